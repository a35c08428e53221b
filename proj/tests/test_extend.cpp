#include "gdyn/extend.hpp"

#include <gtest/gtest.h>

using namespace gdyn;

namespace {

const NodeId t1 = 1, t2 = 2, t3 = 3, t4 = 4;

ContextPtr order(int n) {
    std::vector<NodeId> ns;
    for (int i = 0; i < n; ++i) ns.push_back(Rational(i));
    return std::make_shared<EdgeContext>(EdgeContext::linear_order(ns));
}

GroupElement word(const EdgeContext& ctx, std::initializer_list<std::pair<int, int>> letters) {
    Word w;
    for (auto [u, v] : letters) w.push_back({Rational(u), Rational(v)});
    return normalize(ctx, w);
}

// Divisible contraction family e^{(v-u)X} and its generators on an ascending integer order.
struct Divisible {
    ContextPtr ctx;
    GeneratorFamily gen;
    OperatorFamily phi;
};

Divisible divisible(int n, std::uint64_t seed) {
    Rng rng(seed);
    const CMatrix x = random_dissipative(rng, 3, 0.5);
    Divisible d{order(n), {}, {}};
    d.gen = GeneratorFamily(d.ctx, 3, [x](const NodeId& u, const NodeId& v) { return CMatrix((v - u).to_double() * x); }, true);
    d.phi = exponential_family(d.gen);
    return d;
}

// Additive, dissipative, non-commuting: A(u, v) = Σ over unit steps of i·H_k with step-dependent H_k.
GeneratorFamily noncommuting(const ContextPtr& ctx, std::uint64_t seed) {
    Rng rng(seed);
    auto hs = std::make_shared<std::vector<CMatrix>>();
    for (std::size_t k = 0; k < ctx->size(); ++k)
        hs->push_back(cplx(0, 1) * random_hermitian(rng, 2) - 0.1 * identity(2));
    return GeneratorFamily(ctx, 2, [hs](const NodeId& u, const NodeId& v) {
        CMatrix a = CMatrix::Zero(2, 2);
        for (auto k = u.num(); k < v.num(); ++k) a += (*hs)[static_cast<std::size_t>(k)];
        return a;
    }, true);
}

}  // namespace

TEST(Cover, Examples) {
    auto ctx = order(6);
    EXPECT_TRUE(cover_of_word(*ctx, {{t2, t2}}).is_zero());
    const auto single = cover_of_word(*ctx, {{t1, t3}});
    ASSERT_EQ(single.segments.size(), 1u);
    EXPECT_EQ(single.segments[0], (CoverFunction::Segment{t1, t3, 1}));
    const auto two = cover_of_word(*ctx, {{t1, t3}, {t2, t4}});
    const std::vector<CoverFunction::Segment> expect{{t1, t2, 1}, {t2, t3, 2}, {t3, t4, 1}};
    EXPECT_EQ(two.segments, expect);
    EXPECT_TRUE(cover_of_word(*ctx, {}).is_zero());
}

TEST(Cover, ReverseLetterIsNegative) {
    auto ctx = order(6);
    const auto c = cover_of_word(*ctx, {{t3, t1}});
    ASSERT_EQ(c.segments.size(), 1u);
    EXPECT_EQ(c.segments[0].coeff, -1);
}

TEST(Cover, PointwiseIndicatorOracle) {
    auto ctx = order(7);
    Rng rng(1);
    for (int i = 0; i < 300; ++i) {
        const Word w = random_word(*ctx, rng, 6);
        const auto c = cover_of_word(*ctx, w);
        for (const auto& x : ctx->nodes()) {
            std::int64_t expect = 0;
            for (const auto& l : w) {
                const auto lo = std::min(l.tail, l.head), hi = std::max(l.tail, l.head);
                if (lo <= x && x < hi) expect += l.tail < l.head ? 1 : -1;
            }
            EXPECT_EQ(c.at(*ctx, x), expect);
        }
        for (const auto& s : c.segments) EXPECT_NE(s.coeff, 0);
        for (std::size_t k = 1; k < c.segments.size(); ++k)
            EXPECT_FALSE(c.segments[k - 1].right == c.segments[k].left && c.segments[k - 1].coeff == c.segments[k].coeff);
    }
}

TEST(Cover, ReductionInvariant) {
    auto ctx = order(5);
    Rng rng(2);
    for (int i = 0; i < 500; ++i) {
        const Word w = random_word(*ctx, rng, 6);
        const auto c = cover_of_word(*ctx, w);
        for (const auto& r : reduce_once_all(*ctx, w)) EXPECT_EQ(cover_of_word(*ctx, r), c);
    }
}

TEST(Cover, AdditiveAndCyclic) {
    auto ctx = order(6);
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        const Word x = random_word(*ctx, rng, 5), y = random_word(*ctx, rng, 5);
        Word xy = x, yx = y;
        xy.insert(xy.end(), y.begin(), y.end());
        yx.insert(yx.end(), x.begin(), x.end());
        const auto sum = cover_sum(*ctx, cover_of_word(*ctx, x), cover_of_word(*ctx, y));
        EXPECT_EQ(cover_of_word(*ctx, xy), sum);
        EXPECT_EQ(cover_of_word(*ctx, yx), sum);
    }
}

TEST(Cover, UnorderedGraphRejected) {
    const auto ctx = EdgeContext::complete({Rational(0), Rational(1)});
    EXPECT_THROW(cover_of_word(ctx, {}), ContextError);
}

TEST(Refine, Examples) {
    auto ctx = order(6);
    const auto zero = refine(*ctx, CoverFunction{}, {t1, t3});
    for (auto c : zero.coeffs) EXPECT_EQ(c, 0);
    const auto one = refine(*ctx, cover_of_word(*ctx, {{t1, t3}}), {t2});
    EXPECT_EQ(one.breakpoints, (std::vector<NodeId>{t1, t2, t3}));
    EXPECT_EQ(one.coeffs, (std::vector<std::int64_t>{1, 1}));
    const auto two = refine(*ctx, cover_of_word(*ctx, {{t1, t3}, {t2, t4}}));
    EXPECT_EQ(two.breakpoints, (std::vector<NodeId>{t1, t2, t3, t4}));
    EXPECT_EQ(two.coeffs, (std::vector<std::int64_t>{1, 2, 1}));
}

TEST(Refine, ReproducesCoverPointwise) {
    auto ctx = order(7);
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        const auto c = cover_of_word(*ctx, random_word(*ctx, rng, 6));
        const auto r = refine(*ctx, c, random_extra_nodes(*ctx, rng));
        for (const auto& x : ctx->nodes()) EXPECT_EQ(refinement_at(*ctx, r, x), c.at(*ctx, x));
    }
}

TEST(NormalFormExtension, Examples) {
    const NodeId a = 0, b = 1, c = 2, d = 3;
    auto ctx = std::make_shared<EdgeContext>(EdgeContext::from_edges({a, b, c, d}, {{a, b}, {d, c}, {a, a}}));
    Rng rng(5);
    const CMatrix pab = random_matrix(rng, 2), pdc = random_matrix(rng, 2);
    OperatorFamily fam(ctx, 2, [&](const NodeId& u, const NodeId& v) {
        if (u == v) return identity(2);
        return u == a ? pab : pdc;
    });
    const NormalFormExtension ext(fam);
    EXPECT_EQ(ext(identity_element()), identity(2));
    EXPECT_EQ(ext(iota(*ctx, a, b)), pab);
    // (c, d) is the reverse of an edge, so it contributes the identity
    EXPECT_EQ(ext(normalize(*ctx, {{a, b}, {c, d}})), pab);
    EXPECT_EQ(ext(normalize(*ctx, {{d, c}, {a, b}})), CMatrix(pdc * pab));
}

TEST(NormalFormExtension, IdentityAxiomRequired) {
    auto ctx = order(2);
    OperatorFamily bad(ctx, 1, [](const NodeId&, const NodeId&) { return CMatrix(2.0 * identity(1)); });
    EXPECT_THROW(NormalFormExtension{bad}, PreconditionError);
}

TEST(FirstCover, Examples) {
    const auto d = divisible(6, 6);
    const FirstCoverExtension ext(d.phi);
    EXPECT_LE(spectral_norm(ext(identity_element()) - identity(3)), 0.0);
    EXPECT_LE(spectral_norm(ext(iota(*d.ctx, t1, t3)) - d.phi(t1, t3)), 1e-15);
    const auto g = word(*d.ctx, {{1, 3}, {2, 4}});
    EXPECT_LE(spectral_norm(ext(g) - d.phi(t1, t4)), 1e-12);
}

TEST(FirstCover, RequiresDivisibility) {
    const auto ex = example_indivisible(pauli::x(), pauli::z(), Rational(1));
    EXPECT_THROW(FirstCoverExtension{exponential_family(ex.generators())}, PreconditionError);
}

TEST(FirstCover, RefinementIndependentAndCyclic) {
    const auto d = divisible(6, 7);
    const FirstCoverExtension ext(d.phi);
    Rng rng(8);
    for (int i = 0; i < 300; ++i) {
        const auto g = random_element(*d.ctx, rng, 6), h = random_element(*d.ctx, rng, 6);
        const auto r1 = refine(*d.ctx, cover_of(*d.ctx, g), random_extra_nodes(*d.ctx, rng));
        const auto r2 = refine(*d.ctx, cover_of(*d.ctx, g), random_extra_nodes(*d.ctx, rng));
        EXPECT_LE(spectral_norm(ext.evaluate(r1) - ext.evaluate(r2)), 1e-12);
        EXPECT_LE(spectral_norm(ext(mul(*d.ctx, g, h)) - ext(mul(*d.ctx, h, g))), 1e-12);
        EXPECT_LE(spectral_norm(ext(g)), 1.0 + 1e-10);
    }
}

TEST(FirstCover, NegativeSegmentsAreSkipped) {
    const auto d = divisible(6, 9);
    const FirstCoverExtension ext(d.phi);
    EXPECT_LE(spectral_norm(ext(inv(iota(*d.ctx, t1, t3))) - identity(3)), 0.0);
    // [1,3) with +1 and [3,5) with -1
    EXPECT_LE(spectral_norm(ext(word(*d.ctx, {{1, 3}, {5, 3}})) - d.phi(t1, t3)), 1e-15);
}

TEST(SecondCover, Examples) {
    auto ctx = order(6);
    const auto gen = noncommuting(ctx, 10);
    const SecondCoverExtension ext(gen);
    EXPECT_LE(spectral_norm(ext.generator(identity_element())), 0.0);
    EXPECT_LE(spectral_norm(ext(identity_element()) - identity(2)), 0.0);
    EXPECT_LE(spectral_norm(ext.generator(iota(*ctx, t1, t3)) - gen(t1, t3)), 1e-15);
    EXPECT_LE(spectral_norm(ext(iota(*ctx, t1, t3)) - expm(gen(t1, t3))), 1e-15);
    EXPECT_LE(spectral_norm(ext.generator(word(*ctx, {{1, 3}, {2, 4}})) - gen(t1, t4)), 1e-14);
}

TEST(SecondCover, RefinementIndependentCyclicContractive) {
    auto ctx = order(6);
    const SecondCoverExtension ext(noncommuting(ctx, 11), 1.3);
    Rng rng(12);
    for (int i = 0; i < 300; ++i) {
        const auto g = random_element(*ctx, rng, 6), h = random_element(*ctx, rng, 6);
        const auto r = refine(*ctx, cover_of(*ctx, g), random_extra_nodes(*ctx, rng));
        EXPECT_LE(spectral_norm(ext(g) - ext.evaluate(r)), 1e-12);
        EXPECT_LE(spectral_norm(ext(mul(*ctx, g, h)) - ext(mul(*ctx, h, g))), 1e-12);
        EXPECT_LE(spectral_norm(ext(g)), 1.0 + 1e-10);
    }
}

TEST(SecondCover, RequiresAdditivity) {
    auto ctx = order(4);
    Rng rng(13);
    const CMatrix x = random_dissipative(rng, 2);
    GeneratorFamily squared(ctx, 2, [x](const NodeId& u, const NodeId& v) {
        const double s = (v - u).to_double();
        return CMatrix(s * s * x);
    });
    EXPECT_THROW(SecondCoverExtension{squared}, PreconditionError);
}

TEST(SecondCover, RequiresDissipativity) {
    auto ctx = order(3);
    GeneratorFamily growing(ctx, 1, [](const NodeId& u, const NodeId& v) { return CMatrix((v - u).to_double() * identity(1)); });
    EXPECT_THROW(SecondCoverExtension{growing}, PreconditionError);
}

TEST(Extensions, AgreeOnLettersAndDiagonal) {
    const auto d = divisible(5, 14);
    const NormalFormExtension nf(d.phi);
    const FirstCoverExtension first(d.phi);
    const SecondCoverExtension second(d.gen);
    for (const auto& [u, v] : d.ctx->edges()) {
        const auto g = iota(*d.ctx, u, v);
        EXPECT_LE(spectral_norm(first(g) - nf(g)), 1e-14);
        EXPECT_LE(spectral_norm(second(g) - nf(g)), 1e-14);
    }
}

TEST(Continuity, BoundHoldsForBothCovers) {
    const auto d = divisible(6, 15);
    const double rate = spectral_norm(d.gen(Rational(0), Rational(1)));
    const auto ell = linear_length(rate);
    const FirstCoverExtension first(d.phi);
    const SecondCoverExtension second(d.gen);
    const auto space = PayloadSpace::banach(3);
    Rng rng(16);
    const auto samples = random_continuity_samples(*d.ctx, space, rng, 300);
    const GroupEval f = [&](const GroupElement& g) { return first(g); };
    const GroupEval s = [&](const GroupElement& g) { return second(g); };
    EXPECT_TRUE(continuity_modulus_check(f, *d.ctx, ell, CoverKind::First, space, samples).pass());
    EXPECT_TRUE(continuity_modulus_check(s, *d.ctx, ell, CoverKind::Second, space, samples).pass());
}

TEST(Continuity, CoincidentEdgesGiveZero) {
    const auto d = divisible(4, 17);
    const FirstCoverExtension first(d.phi);
    const auto space = PayloadSpace::banach(3);
    Rng rng(18);
    auto samples = random_continuity_samples(*d.ctx, space, rng, 50);
    for (auto& s : samples) s.e_prime = s.e;
    const GroupEval f = [&](const GroupElement& g) { return first(g); };
    const Check c = continuity_modulus_check(f, *d.ctx, linear_length(1.0), CoverKind::First, space, samples);
    EXPECT_LE(c.max_defect, 0.0);
}

TEST(Continuity, BoundTerms) {
    auto ctx = order(6);
    const auto ell = linear_length(0.5);
    // e = (1, 3), e' = (2, 5): ū = 1, v̄ = 5; terms l(1,2), l(5,5), l(3,5), l(1,1)
    const double second = continuity_bound(*ctx, ell, CoverKind::Second, {t1, t3}, {t2, Rational(5)});
    EXPECT_NEAR(second, 0.5 + 0.0 + 1.0 + 0.0, 1e-15);
    const double first = continuity_bound(*ctx, ell, CoverKind::First, {t1, t3}, {t2, Rational(5)});
    EXPECT_NEAR(first, std::expm1(0.5) + std::expm1(1.0), 1e-15);
}

TEST(Continuity, TimeFamilySecondCover) {
    const auto ex = example_indivisible(pauli::x(), pauli::z(), Rational(1));
    const SecondCoverExtension ext(ex.generators());
    const auto space = PayloadSpace::banach(4);
    Rng rng(19);
    const auto samples = random_continuity_samples(*ex.ctx, space, rng, 300);
    const GroupEval f = [&](const GroupElement& g) { return ext(g); };
    EXPECT_TRUE(continuity_modulus_check(f, *ex.ctx, ex.length(), CoverKind::Second, space, samples).pass());
}

TEST(CoverJson, Format) {
    auto ctx = order(5);
    const std::string j = cover_json(cover_of_word(*ctx, {{t1, t3}}));
    EXPECT_NE(j.find("\"left\""), std::string::npos);
    EXPECT_NE(j.find("\"coeff\""), std::string::npos);
}
