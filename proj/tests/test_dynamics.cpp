#include "gdyn/dynamics.hpp"

#include <gtest/gtest.h>

using namespace gdyn;

namespace {

ContextPtr grid(int steps, Direction dir = Direction::Ascending) {
    return std::make_shared<EdgeContext>(EdgeContext::linear_order(uniform_grid(Rational(0), Rational(1), steps), dir));
}

// A(u, v) = (v - u) X on an ascending grid.
GeneratorFamily constant_generator(const ContextPtr& ctx, const CMatrix& x) {
    return GeneratorFamily(ctx, x.rows(), [x](const NodeId& u, const NodeId& v) { return CMatrix((v - u).to_double() * x); });
}

std::vector<Edge> all_edges(const EdgeContext& ctx) { return ctx.edges(); }

}  // namespace

TEST(IdentityAxiom, Examples) {
    auto ctx = grid(3);
    OperatorFamily one(ctx, 2, [](const NodeId&, const NodeId&) { return identity(2); });
    EXPECT_TRUE(check_identity_axiom(one).pass());
    Rng rng(1);
    const auto fam = exponential_family(constant_generator(ctx, random_dissipative(rng, 3)));
    EXPECT_TRUE(check_identity_axiom(fam).pass());
    OperatorFamily two(ctx, 2, [](const NodeId& u, const NodeId& v) { return CMatrix(u == v ? 2.0 * identity(2) : identity(2)); });
    const Report r = check_identity_axiom(two);
    EXPECT_FALSE(r.pass());
    EXPECT_NEAR(r.checks[0].max_defect, 1.0, 1e-15);
}

TEST(Divisibility, CommutingGeneratorsAreDivisible) {
    auto ctx = grid(4);
    Rng rng(2);
    const auto fam = exponential_family(constant_generator(ctx, random_dissipative(rng, 3)), 1.5);
    const Check c = check_divisibility(fam, composable_triples(*ctx), 1e-10);
    EXPECT_TRUE(c.pass()) << c.max_defect;
    EXPECT_EQ(divisibility_defect(fam, Rational(1, 2), Rational(1, 2), Rational(1, 2)), 0.0);
}

TEST(Divisibility, MissingEdgeThrows) {
    auto ctx = grid(2);
    OperatorFamily one(ctx, 1, [](const NodeId&, const NodeId&) { return identity(1); });
    EXPECT_THROW(divisibility_defect(one, Rational(1), Rational(1, 2), Rational(0)), GraphError);
}

TEST(Divisibility, DegenerateTripleIsIdempotenceDefect) {
    auto ctx = grid(1);
    OperatorFamily two(ctx, 1, [](const NodeId&, const NodeId&) { return CMatrix(2.0 * identity(1)); });
    EXPECT_NEAR(divisibility_defect(two, Rational(0), Rational(0), Rational(0)), 2.0, 1e-15);
}

TEST(Additivity, Examples) {
    auto ctx = grid(4);
    Rng rng(3);
    const CMatrix x = random_matrix(rng, 2);
    const auto tau = [x](double t) { return CMatrix(t * x); };
    GeneratorFamily integrated(ctx, 2, [tau](const NodeId& u, const NodeId& v) {
        return integrate_generators(tau, u.to_double(), v.to_double());
    });
    EXPECT_TRUE(check_additivity(integrated, composable_triples(*ctx), 1e-9).pass());
    EXPECT_EQ(additivity_defect(integrated, Rational(1, 4), Rational(1, 4), Rational(1, 4)), 0.0);

    GeneratorFamily squared(ctx, 2, [x](const NodeId& u, const NodeId& v) {
        const double s = (v - u).to_double();
        return CMatrix(s * s * x);
    });
    // (t - r)^2 = 1 against (t - s)^2 + (s - r)^2 = 1/2
    EXPECT_NEAR(additivity_defect(squared, Rational(0), Rational(1, 2), Rational(1)), 0.5 * spectral_norm(x), 1e-12);
}

TEST(Integrate, ClosedForms) {
    Rng rng(4);
    const CMatrix x = random_matrix(rng, 3);
    EXPECT_LE(spectral_norm(integrate_generators([x](double) { return x; }, 0.2, 0.9) - 0.7 * x), 1e-12);
    EXPECT_LE(spectral_norm(integrate_generators([x](double t) { return CMatrix(t * x); }, 0.2, 0.9) -
                            ((0.81 - 0.04) / 2) * x),
              1e-12);
    EXPECT_THROW(integrate_generators([x](double) { return x; }, 1.0, 0.0), OrderError);
}

TEST(Integrate, TimeFamilyClosedForm) {
    const auto ex = example_indivisible(pauli::x(), pauli::z(), Rational(2));
    for (auto [t, s] : {std::pair{Rational(2), Rational(1)}, std::pair{Rational(3, 2), Rational(1, 4)}}) {
        const CMatrix num = integrate_generators([&](double tau) { return ex.A_tau(tau); }, s.to_double(), t.to_double());
        EXPECT_LE(spectral_norm(num - ex.A(t, s)), 1e-12);
    }
}

TEST(TimeFamily, Coefficients) {
    const auto ex = example_indivisible(pauli::x(), pauli::z(), Rational(1));
    const auto [c1, c2] = ex.coefficients(Rational(1), Rational(1, 2));
    EXPECT_EQ(c1, Rational(3, 8));
    EXPECT_EQ(c2, Rational(1, 8));
    const CMatrix expect = (3.0 / 8.0) * ex.psi1.matrix + (1.0 / 8.0) * ex.psi2.matrix;
    EXPECT_LE(spectral_norm(ex.A(Rational(1), Rational(1, 2)) - expect), 0.0);
}

TEST(TimeFamily, Commutator) {
    const auto ex = example_indivisible(pauli::x(), pauli::z(), Rational(1));
    const CMatrix comm = commutator(ex.A(Rational(1), Rational(1, 2)), ex.A(Rational(1, 2), Rational(0)));
    const CMatrix target = cplx(-1.0 / 8.0) * SuperOp::commutator_with(commutator(pauli::x(), pauli::z())).matrix;
    EXPECT_LE(spectral_norm(comm - target), 1e-12);
}

TEST(TimeFamily, IndivisibleForSomeAlpha) {
    const auto ex = example_indivisible(pauli::x(), pauli::z(), Rational(1));
    const auto gen = ex.generators();
    EXPECT_TRUE(check_additivity(gen, composable_triples(*ex.ctx), 1e-12).pass());
    double best = 0.0;
    for (double alpha : {0.5, 1.0, 2.0, 4.0})
        best = std::max(best, divisibility_defect(exponential_family(gen, alpha), Rational(1), Rational(1, 2), Rational(0)));
    EXPECT_GT(best, 1e-3);
}

TEST(TimeFamily, EqualHamiltoniansDegenerate) {
    EXPECT_THROW(example_indivisible(pauli::x(), pauli::x(), Rational(1)), DegeneracyError);
    const auto ex = example_indivisible(pauli::x(), pauli::x(), Rational(1), {}, false);
    const CMatrix comm = commutator(ex.A(Rational(1), Rational(1, 2)), ex.A(Rational(1, 2), Rational(0)));
    EXPECT_LE(spectral_norm(comm), 1e-15);
    const auto fam = exponential_family(ex.generators());
    EXPECT_TRUE(check_divisibility(fam, composable_triples(*ex.ctx), 1e-10).pass());
}

TEST(TimeFamily, RejectsNonHermitian) {
    CMatrix h(2, 2);
    h << 0, 1, 0, 0;
    EXPECT_THROW(example_indivisible(h, pauli::z(), Rational(1)), InputError);
}

TEST(GeometricGrowth, Examples) {
    auto ctx = grid(4);
    Rng rng(5);
    const CMatrix x = random_dissipative(rng, 3);
    const auto gen = constant_generator(ctx, x);
    const auto fam = exponential_family(gen, 2.0);
    const auto ell = linear_length(2.0 * spectral_norm(x));
    const auto triples = composable_triples(*ctx);
    EXPECT_TRUE(check_geometric_growth(fam, ell, all_edges(*ctx), triples).pass());
    EXPECT_TRUE(check_geometric_growth(gen, ell, all_edges(*ctx), triples, 1e-10, 2.0).pass());

    OperatorFamily one(ctx, 2, [](const NodeId&, const NodeId&) { return identity(2); });
    EXPECT_TRUE(check_geometric_growth(one, zero_length(), all_edges(*ctx), triples).pass());

    auto wide = std::make_shared<EdgeContext>(EdgeContext::linear_order({Rational(0), Rational(1), Rational(3)}));
    OperatorFamily growing(wide, 1, [](const NodeId& u, const NodeId& v) {
        return CMatrix(std::exp((v - u).to_double()) * identity(1));
    });
    const Report r = check_geometric_growth(growing, linear_length(1.0), wide->edges(), composable_triples(*wide));
    EXPECT_FALSE(r.pass());
    EXPECT_EQ(r.checks[0].argmax, "(0,3)");
}

TEST(GeometricGrowth, SubadditiveLengthRejected) {
    auto ctx = grid(2);
    OperatorFamily one(ctx, 1, [](const NodeId&, const NodeId&) { return identity(1); });
    LengthFunction ell = zero_length();
    ell.kind = LengthKind::Subadditive;
    EXPECT_THROW(check_geometric_growth(one, ell, ctx->edges(), {}), PreconditionError);
}

TEST(Lipschitz, DivisibleFamilyAndTimeFamily) {
    auto ctx = grid(5);
    Rng rng(6);
    const CMatrix x = random_dissipative(rng, 3);
    const auto fam = exponential_family(constant_generator(ctx, x));
    const Check c = lipschitz_check(fam, linear_length(spectral_norm(x)), 1.0, edge_pairs(*ctx));
    EXPECT_TRUE(c.pass()) << c.max_defect << " at " << c.argmax;
    const Check same = lipschitz_check(fam, linear_length(spectral_norm(x)), 1.0, {{{Rational(0), Rational(1)}, {Rational(0), Rational(1)}}});
    EXPECT_LE(same.max_defect, 0.0);

    const auto ex = example_indivisible(pauli::x(), pauli::z(), Rational(1));
    EXPECT_TRUE(lipschitz_check(ex.generators(), 1.0, edge_pairs(*ex.ctx)).pass());
}

TEST(Lindblad, UnitaryPart) {
    Rng rng(7);
    const CMatrix h = random_hermitian(rng, 2);
    const SuperOp L = lindblad_generator(h, SuperOp::zero(2));
    const double t = 0.9;
    const CMatrix u = expm(cplx(0, t) * h), a = random_matrix(rng, 2);
    EXPECT_LE(spectral_norm(unvec(expm(t * L.matrix) * vec(a), 2) - adjoint_action(u, a)), 1e-12);
}

TEST(Lindblad, RandomGeneratorsSatisfySchwarz) {
    Rng rng(8);
    std::size_t checked = 0;
    for (int n = 0; n < 10; ++n) {
        const Eigen::Index d = 2 + n % 2;
        const SuperOp L = lindblad_generator(random_hermitian(rng, d), heisenberg_kraus_map(random_kraus(rng, d, 2)));
        EXPECT_LE(spectral_norm(L.apply(identity(d))), 1e-12);
        for (int i = 0; i < 12; ++i) {
            const CMatrix a = random_matrix(rng, d);
            EXPECT_TRUE(is_psd(dissipation_map(L, a, a), 1e-10));
            ++checked;
        }
        std::vector<CMatrix> samples;
        for (int i = 0; i < 8; ++i) samples.push_back(random_matrix(rng, d));
        EXPECT_TRUE(check_schwarz_generator(L, samples).pass());
    }
    EXPECT_GE(checked, 100u);
}

TEST(Lindblad, ZeroGeneratorPasses) {
    Rng rng(9);
    std::vector<CMatrix> samples{random_matrix(rng, 2), random_matrix(rng, 2)};
    EXPECT_TRUE(check_schwarz_generator(SuperOp::zero(2), samples).pass());
}

TEST(Lindblad, TranspositionGeneratorFailsSchwarz) {
    // L = T - id, T the transpose: positive and unital semigroup, but T is not completely positive.
    const Eigen::Index d = 2;
    const SuperOp T = SuperOp::from_map(d, [](const CMatrix& x) { return CMatrix(x.transpose()); });
    const SuperOp L = T - SuperOp::identity_map(d);
    Rng rng(10);
    std::vector<CMatrix> samples;
    for (int i = 0; i < 16; ++i) samples.push_back(random_matrix(rng, d));
    // with b = a^T: D_L(a, a) = (b - a)*(b - a) + b b* - b* b
    for (const auto& a : samples) {
        const CMatrix b = a.transpose();
        const CMatrix direct = (b - a).adjoint() * (b - a) + b * b.adjoint() - b.adjoint() * b;
        EXPECT_LE(spectral_norm(dissipation_map(L, a, a) - direct), 1e-12);
    }
    const Report r = check_schwarz_generator(L, samples);
    ASSERT_GE(r.checks.size(), 3u);
    EXPECT_TRUE(r.checks[0].pass());   // self-adjoint
    EXPECT_TRUE(r.checks[1].pass());   // L(1) = 0
    EXPECT_FALSE(r.checks[2].pass());  // D_L(a, a) not positive on some sample
    EXPECT_FALSE(r.pass());
    EXPECT_FALSE(r.notes.empty());
    // the semigroup itself still contracts: e^{tL} = e^{-t}(cosh t + sinh t T)
    for (double t : {0.1, 1.0, 10.0}) {
        const SuperOp E(d, expm(t * L.matrix));
        for (const auto& a : samples) EXPECT_LE(spectral_norm(E.apply(a)), spectral_norm(a) + 1e-10);
    }
}

TEST(Network, Diamond) {
    const NodeId u = 0, v = 1, z = 2, w = 3;
    const CMatrix two = 2.0 * identity(2);
    const DagNetwork net({u, v, z, w}, {{{u, v}, two}, {{v, w}, two}, {{u, z}, two}, {{z, w}, two}});
    const auto fam = network_family(net);
    EXPECT_EQ(fam(u, u), identity(2));
    EXPECT_EQ(fam(u, w), 8.0 * identity(2));
    EXPECT_EQ(network_defect(net, u, v, w), 4.0 * identity(2));
    EXPECT_EQ(network_path_count(net, u, w), 2.0);
    for (const auto& [a, b, c] : composable_triples(fam.context()))
        EXPECT_EQ(network_defect(net, a, b, c) + fam(a, b) * fam(b, c), fam(a, c));
}

TEST(Network, NoPath) {
    const NodeId u = 0, v = 1, w = 2;
    Rng rng(11);
    const DagNetwork net({u, v, w}, {{{v, w}, random_matrix(rng, 2)}});
    const auto fam = network_family(net);
    EXPECT_EQ(fam(u, w), CMatrix::Zero(2, 2));
    EXPECT_EQ(network_defect(net, u, v, w), CMatrix(-fam(u, v) * fam(v, w)));
}

TEST(Network, NonCommutingWeights) {
    Rng rng(12);
    const NodeId a = 0, b = 1, c = 2, d = 3;
    const DagNetwork net({a, b, c, d}, {{{a, b}, random_matrix(rng, 3)}, {{b, c}, random_matrix(rng, 3)},
                                        {{a, c}, random_matrix(rng, 3)}, {{c, d}, random_matrix(rng, 3)},
                                        {{b, d}, random_matrix(rng, 3)}});
    const auto fam = network_family(net);
    const CMatrix direct = net.weights.at({a, b}) * net.weights.at({b, c}) * net.weights.at({c, d}) +
                           net.weights.at({a, c}) * net.weights.at({c, d}) + net.weights.at({a, b}) * net.weights.at({b, d});
    EXPECT_LE(spectral_norm(fam(a, d) - direct), 1e-12);
    for (const auto& [x, y, z] : composable_triples(fam.context()))
        EXPECT_LE(spectral_norm(network_defect(net, x, y, z) + fam(x, y) * fam(y, z) - fam(x, z)), 1e-12);
}

TEST(Network, CycleRejected) {
    const NodeId u = 0, v = 1;
    EXPECT_THROW(DagNetwork({u, v}, {{{u, v}, identity(1)}, {{v, u}, identity(1)}}), AcyclicityError);
}

TEST(Exponential, CommutingAdditiveFamiliesAreDivisible) {
    Rng rng(13);
    for (int i = 0; i < 10; ++i) {
        auto ctx = grid(5);
        const auto gen = constant_generator(ctx, random_matrix(rng, 3));
        EXPECT_TRUE(check_additivity(gen, composable_triples(*ctx), 1e-12).pass());
        EXPECT_TRUE(check_divisibility(exponential_family(gen, 0.7), composable_triples(*ctx), 1e-9).pass());
    }
}
