#include "gdyn/demos.hpp"

#include <gtest/gtest.h>

using namespace gdyn;

namespace {

DynamicalSystem demo(const std::string& name) { return load_system(demo_spec(name)).system; }

ContextPtr order(int n) {
    std::vector<NodeId> ns;
    for (int i = 0; i < n; ++i) ns.push_back(Rational(i));
    return std::make_shared<EdgeContext>(EdgeContext::linear_order(ns));
}

// Contraction family on 0 < 1 < 2 that is not divisible.
DynamicalSystem small_contractions(std::uint64_t seed) {
    Rng rng(seed);
    std::map<Edge, CMatrix> vals;
    auto ctx = order(3);
    for (const auto& [u, v] : ctx->edges()) {
        if (u == v) continue;
        CMatrix m = random_matrix(rng, 2);
        vals[{u, v}] = m / (1.5 * spectral_norm(m));
    }
    DynamicalSystem s;
    s.name = "contractions";
    s.phi = OperatorFamily(ctx, 2, [vals](const NodeId& u, const NodeId& v) {
        auto it = vals.find({u, v});
        return it == vals.end() ? identity(2) : it->second;
    });
    return s;
}

}  // namespace

TEST(Stroescu, CompressionAndShift) {
    const auto sys = small_contractions(1);
    const auto ds = theorem_A_pipeline(sys);
    const auto& dil = *ds.stroescu;
    const auto& ctx = sys.context();
    EXPECT_TRUE(dil.isometric());
    Rng rng(2);
    const CMatrix xi = CMatrix(random_unit_vector(rng, 2));
    EXPECT_EQ(dil.j(dil.r(xi)), xi);
    for (int i = 0; i < 50; ++i) {
        const auto x = random_element(ctx, rng, 4), y = random_element(ctx, rng, 4);
        // j U(x) r = φ̄(x)
        EXPECT_LE(spectral_norm(dil.j(dil.U(x, dil.r(xi))) - ds.phibar(x) * xi), 1e-14);
        // eval(U(x)v, y) = eval(v, y x)
        const FormalVector v = dil.U(random_element(ctx, rng, 3), dil.r(xi));
        EXPECT_LE(spectral_norm(dil.eval(dil.U(x, v), y) - dil.eval(v, mul(ctx, y, x))), 1e-14);
        // U is a representation on the tags
        EXPECT_TRUE(detail::formal_equal(dil.U(mul(ctx, x, y), v), dil.U(x, dil.U(y, v))));
    }
}

TEST(Stroescu, BoundedModeForExpansiveValues) {
    DynamicalSystem sys = small_contractions(3);
    const auto base = sys.phi;
    sys.phi = OperatorFamily(base.context_ptr(), 2, [base](const NodeId& u, const NodeId& v) { return CMatrix(u == v ? identity(2) : 3.0 * base(u, v)); });
    const auto ds = theorem_A_pipeline(sys);
    EXPECT_FALSE(ds.stroescu->isometric());
    const auto rep = ds.verify();
    EXPECT_TRUE(rep.pass()) << report_json(rep).dump(2);
}

TEST(Stroescu, CStarChecks) {
    const auto ds = run_pipeline(Pipeline::C, demo("lindblad"));
    Rng rng(4);
    std::vector<CMatrix> samples;
    for (int i = 0; i < 6; ++i) samples.push_back(random_matrix(rng, 2));
    std::vector<GroupElement> points{identity_element()};
    for (int i = 0; i < 6; ++i) points.push_back(random_element(ds.context(), rng, 3));
    const auto rep = check_cstar_dilation(*ds.stroescu, samples, points);
    EXPECT_TRUE(rep.pass()) << report_json(rep).dump(2);
}

TEST(Stroescu, FormalProductsNeedCStar) {
    const auto ds = theorem_A_pipeline(small_contractions(5));
    EXPECT_THROW(ds.stroescu->j(ds.stroescu->r_alg(identity(2))), std::logic_error);
}

TEST(Pipelines, AllDemosVerify) {
    for (const auto& name : demo_names()) {
        const auto sys = demo(name);
        for (auto p : demo_pipelines(name)) {
            const auto ds = run_pipeline(p, sys);
            const auto rep = ds.verify();
            EXPECT_TRUE(rep.pass()) << name << " " << to_string(p) << "\n" << report_json(rep).dump(2);
            for (const auto& [u, v] : ds.context().edges()) {
                EXPECT_LE(spectral_norm(ds.compressed({ds.U(u, v)}) - sys.phi(u, v)), 1e-10) << name << " " << to_string(p);
            }
        }
    }
}

TEST(Pipelines, IndivisibleFailsB) {
    try {
        run_pipeline(Pipeline::B, demo("indivisible-2.4"));
        FAIL() << "expected a precondition failure";
    } catch (const PreconditionError& e) {
        EXPECT_EQ(e.axiom, "divisibility");
    }
}

TEST(Pipelines, PreconditionsNamed) {
    auto sys = small_contractions(6);
    EXPECT_THROW(run_pipeline(Pipeline::B, sys), PreconditionError);  // no length function
    EXPECT_THROW(run_pipeline(Pipeline::C, sys), PreconditionError);  // no generators
    EXPECT_THROW(run_pipeline(Pipeline::ACptp, sys), InputError);
    EXPECT_THROW(run_pipeline(Pipeline::A, demo("cptp")), InputError);

    auto bad = demo("divisible-2.4");
    bad.length = linear_length(1e-6);
    try {
        run_pipeline(Pipeline::C, bad);
        FAIL();
    } catch (const PreconditionError& e) {
        EXPECT_EQ(e.axiom, "geometric growth");
    }
}

TEST(Pipelines, IdentityAxiomRequired) {
    auto sys = small_contractions(7);
    const auto base = sys.phi;
    sys.phi = OperatorFamily(base.context_ptr(), 2, [base](const NodeId& u, const NodeId& v) { return CMatrix(u == v ? 0.5 * identity(2) : base(u, v)); });
    try {
        run_pipeline(Pipeline::A, sys);
        FAIL();
    } catch (const PreconditionError& e) {
        EXPECT_EQ(e.axiom, "identity");
    }
}

TEST(Pipelines, CStarNonContractionRejected) {
    auto sys = demo("lindblad");
    const auto base = sys.phi;
    sys.phi = OperatorFamily(base.context_ptr(), 4, [base](const NodeId& u, const NodeId& v) { return CMatrix(u == v ? identity(4) : 2.0 * base(u, v)); });
    sys.phi.hilbert_dim = 2;
    EXPECT_THROW(run_pipeline(Pipeline::A, sys), PreconditionError);
}

TEST(Ved, IdentityAndShapes) {
    const auto ds = run_pipeline(Pipeline::ACptp, demo("cptp"));
    const auto& ved = *ds.ved;
    EXPECT_EQ(ved.d(), 2);
    EXPECT_EQ(ved.env_dim(), 2 + 2 * 4);
    EXPECT_EQ(ved.unitary_of(identity_element()), identity(ved.payload_dim()));
    Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        const auto x = random_element(ds.context(), rng, 3);
        const CMatrix u = ved.unitary_of(x);
        EXPECT_EQ(u.rows(), ved.payload_dim());
        EXPECT_TRUE(is_unitary(u, 1e-10));
        EXPECT_LE(ved.verify(x, random_matrix(rng, 2)), 1e-10);
    }
}

TEST(Ved, RepresentationLawOnTags) {
    const auto ds = run_pipeline(Pipeline::ACptp, demo("cptp"));
    const auto& ved = *ds.ved;
    const auto& ctx = ds.context();
    Rng rng(9);
    for (int i = 0; i < 30; ++i) {
        const auto x = random_element(ctx, rng, 3), y = random_element(ctx, rng, 3);
        const FormalVector v{{{random_element(ctx, rng, 2), CMatrix(random_unit_vector(rng, ved.payload_dim()))}}};
        const FormalVector a = ved.apply(mul(ctx, x, y), v), b = ved.apply(x, ved.apply(y, v));
        ASSERT_EQ(a.terms.size(), 1u);
        EXPECT_EQ(a.terms[0].first, b.terms[0].first);
        EXPECT_LE(spectral_norm(a.terms[0].second - b.terms[0].second), 1e-12);
        EXPECT_NEAR(a.terms[0].second.norm(), 1.0, 1e-12);
    }
}

TEST(Ved, RejectsNonIdentityAtUnit) {
    auto ctx = order(2);
    const GroupEval bad = [](const GroupElement&) { return CMatrix(0.5 * identity(4)); };
    EXPECT_THROW((VedDilation{ctx, bad, 2, basis_vector(2, 0)}), PreconditionError);
}

TEST(OneParam, MemorylessFamilyIsASemigroup) {
    const auto ds = run_pipeline(Pipeline::A, demo("divisible-2.4"));
    // ascending order: the edges run (t, 1), so the base point is the last node
    const auto rep = one_param_factorization(ds, Rational(1));
    EXPECT_TRUE(rep.report.pass()) << report_json(rep.report).dump(2);
    EXPECT_GT(rep.semigroup.samples, 0u);
    EXPECT_LE(rep.semigroup.max_defect, 1e-12);
}

TEST(OneParam, MemoryfulFamilyBreaksTheSemigroupLaw) {
    const auto ds = run_pipeline(Pipeline::C, demo("indivisible-2.4"));
    const auto rep = one_param_factorization(ds, Rational(0));
    EXPECT_TRUE(rep.report.pass()) << report_json(rep.report).dump(2);
    EXPECT_GT(rep.semigroup.max_defect, 1e-3);
}
