#pragma once

#include "dynamics.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace gdyn {

using GroupEval = std::function<CMatrix(const GroupElement&)>;

// Integer simple function on a linearly ordered node set, stored as maximal constant pieces
// [left, right) with nonzero coefficient, sorted along ⪯.
struct CoverFunction {
    struct Segment {
        NodeId left, right;
        std::int64_t coeff = 0;
        friend bool operator==(const Segment&, const Segment&) = default;
    };
    std::vector<Segment> segments;

    bool is_zero() const { return segments.empty(); }
    friend bool operator==(const CoverFunction&, const CoverFunction&) = default;

    // Value at node x.
    std::int64_t at(const EdgeContext& ctx, const NodeId& x) const {
        const std::size_t r = ctx.rank(x);
        for (const auto& s : segments)
            if (ctx.rank(s.left) <= r && r < ctx.rank(s.right)) return s.coeff;
        return 0;
    }
};

namespace detail {

// delta[p] = (#letters with head rank p) - (#letters with tail rank p); the cover value at rank r is
// the sum of delta over ranks strictly above r.
inline CoverFunction cover_from_deltas(const EdgeContext& ctx, const std::map<std::size_t, std::int64_t>& delta) {
    CoverFunction out;
    std::vector<std::pair<std::size_t, std::int64_t>> pts(delta.begin(), delta.end());
    std::vector<std::int64_t> value(pts.size(), 0);  // value on [pts[k], pts[k+1])
    std::int64_t acc = 0;
    for (std::size_t k = pts.size(); k-- > 0;) {
        value[k] = acc;
        acc += pts[k].second;
    }
    if (acc != 0) throw std::logic_error("cover deltas do not sum to zero");
    const auto& nodes = ctx.nodes();
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        if (value[k] == 0) continue;
        const NodeId l = nodes[pts[k].first], r = nodes[pts[k + 1].first];
        if (!out.segments.empty() && out.segments.back().right == l && out.segments.back().coeff == value[k])
            out.segments.back().right = r;
        else
            out.segments.push_back({l, r, value[k]});
    }
    return out;
}

inline void add_deltas(const EdgeContext& ctx, const CoverFunction& c, std::map<std::size_t, std::int64_t>& delta) {
    for (const auto& s : c.segments) {
        delta[ctx.rank(s.right)] += s.coeff;
        delta[ctx.rank(s.left)] -= s.coeff;
    }
}

}  // namespace detail

inline CoverFunction cover_of_word(const EdgeContext& ctx, const Word& w) {
    ctx.require_linear("cover_of_word");
    std::map<std::size_t, std::int64_t> delta;
    for (const auto& l : w) {
        ctx.check_letter(l);
        if (l.is_loop()) continue;
        delta[ctx.rank(l.head)] += 1;
        delta[ctx.rank(l.tail)] -= 1;
    }
    return detail::cover_from_deltas(ctx, delta);
}

inline CoverFunction cover_of(const EdgeContext& ctx, const GroupElement& g) { return cover_of_word(ctx, g.normal_form); }

inline CoverFunction cover_sum(const EdgeContext& ctx, const CoverFunction& a, const CoverFunction& b) {
    ctx.require_linear("cover_sum");
    std::map<std::size_t, std::int64_t> delta;
    detail::add_deltas(ctx, a, delta);
    detail::add_deltas(ctx, b, delta);
    return detail::cover_from_deltas(ctx, delta);
}

// w₀ ⪯ … ⪯ w_m with coefficient cᵢ on [wᵢ₋₁, wᵢ).
struct Refinement {
    std::vector<NodeId> breakpoints;
    std::vector<std::int64_t> coeffs;
};

inline Refinement refine(const EdgeContext& ctx, const CoverFunction& cov, const std::vector<NodeId>& extra = {}) {
    ctx.require_linear("refine");
    std::set<std::size_t> ranks;
    for (const auto& s : cov.segments) {
        ranks.insert(ctx.rank(s.left));
        ranks.insert(ctx.rank(s.right));
    }
    for (const auto& x : extra) ranks.insert(ctx.rank(x));
    Refinement r;
    for (auto k : ranks) r.breakpoints.push_back(ctx.nodes()[k]);
    for (std::size_t i = 1; i < r.breakpoints.size(); ++i) r.coeffs.push_back(cov.at(ctx, r.breakpoints[i - 1]));
    return r;
}

// Pointwise value of a refinement at x.
inline std::int64_t refinement_at(const EdgeContext& ctx, const Refinement& r, const NodeId& x) {
    const std::size_t k = ctx.rank(x);
    for (std::size_t i = 1; i < r.breakpoints.size(); ++i)
        if (ctx.rank(r.breakpoints[i - 1]) <= k && k < ctx.rank(r.breakpoints[i])) return r.coeffs[i - 1];
    return 0;
}

// Random subset of the node set, for refinement-independence checks.
template <class R>
std::vector<NodeId> random_extra_nodes(const EdgeContext& ctx, R& rng) {
    std::bernoulli_distribution coin(0.5);
    std::vector<NodeId> out;
    for (const auto& u : ctx.nodes())
        if (coin(rng)) out.push_back(u);
    return out;
}

inline std::string cover_json(const CoverFunction& c) {
    std::string s = "[";
    for (std::size_t i = 0; i < c.segments.size(); ++i) {
        const auto& seg = c.segments[i];
        if (i) s += ", ";
        s += "{\"left\": \"" + seg.left.str() + "\", \"right\": \"" + seg.right.str() +
             "\", \"coeff\": " + std::to_string(seg.coeff) + "}";
    }
    return s + "]";
}

// ---- extensions -------------------------------------------------------------------------------

// φ̄([x]) = Πᵢ φ₀(uᵢ, vᵢ) over the normal form, with φ₀ = 1 off E.
class NormalFormExtension {
public:
    explicit NormalFormExtension(OperatorFamily fam, double tol = 1e-10) : fam_(std::move(fam)) {
        Report r = check_identity_axiom(fam_, tol);
        if (!r.pass())
            throw PreconditionError("identity", "normal form extension: identity axiom fails, max defect " +
                                                    std::to_string(r.checks[0].max_defect) + " at " +
                                                    r.checks[0].argmax);
    }

    CMatrix operator()(const GroupElement& g) const {
        CMatrix out = identity(fam_.dim());
        for (const auto& l : g.normal_form) {
            fam_.context().check_letter(l);
            if (fam_.context().has_edge(l.tail, l.head)) out = out * fam_(l.tail, l.head);
        }
        return out;
    }

    const OperatorFamily& family() const { return fam_; }

private:
    OperatorFamily fam_;
};

// φ̄([x]) = Π_{cᵢ > 0} φ(wᵢ₋₁, wᵢ) over a refinement of cov_x, ascending index.
class FirstCoverExtension {
public:
    explicit FirstCoverExtension(OperatorFamily fam, double tol = 1e-9) : fam_(std::move(fam)) {
        fam_.context().require_linear("first cover extension");
        Report id = check_identity_axiom(fam_, tol);
        if (!id.pass())
            throw PreconditionError("identity", "first cover extension: identity axiom fails at " + id.checks[0].argmax);
        Check div = check_divisibility(fam_, composable_triples(fam_.context()), tol);
        if (!div.pass())
            throw PreconditionError("divisibility", "first cover extension: divisibility fails, max defect " +
                                                        std::to_string(div.max_defect) + " at " + div.argmax);
        divisibility_defect_ = std::max(0.0, div.max_defect);
    }

    CMatrix operator()(const GroupElement& g) const { return evaluate(refine(fam_.context(), cover_of(fam_.context(), g))); }

    CMatrix evaluate(const Refinement& r) const {
        CMatrix out = identity(fam_.dim());
        for (std::size_t i = 1; i < r.breakpoints.size(); ++i)
            if (r.coeffs[i - 1] > 0) out = out * fam_(r.breakpoints[i - 1], r.breakpoints[i]);
        return out;
    }

    // Largest divisibility defect seen at construction; refinements of size m agree to O(m·δ).
    double divisibility_defect() const { return divisibility_defect_; }
    const OperatorFamily& family() const { return fam_; }

private:
    OperatorFamily fam_;
    double divisibility_defect_ = 0.0;
};

// A([x]) = Σ_{cᵢ > 0} αA(wᵢ₋₁, wᵢ) and φ̄([x]) = e^{A([x])}.
class SecondCoverExtension {
public:
    // Dissipativity is tested in the Hilbert sense (Hermitian part), or for superoperator families in the
    // operator norm of M_h through the Schwarz generator conditions on sampled inputs.
    enum class Dissipativity { Hilbert, Schwarz };

    SecondCoverExtension(GeneratorFamily gen, double alpha = 1.0, Dissipativity mode = Dissipativity::Hilbert,
                         double tol = 1e-9, std::uint64_t seed = 7)
        : gen_(std::move(gen)), alpha_(alpha) {
        gen_.context().require_linear("second cover extension");
        if (alpha < 0) throw PreconditionError("dissipativity", "second cover extension: negative scale");
        Check add = check_additivity(gen_, composable_triples(gen_.context()), tol);
        if (!add.pass())
            throw PreconditionError("additivity", "second cover extension: additivity fails, max defect " +
                                                      std::to_string(add.max_defect) + " at " + add.argmax);
        const auto edges = gen_.context().edges();
        if (mode == Dissipativity::Hilbert) {
            Check dis = check_dissipative(gen_, edges, 1e-10);
            if (!dis.pass())
                throw PreconditionError("dissipativity", "second cover extension: generator not dissipative at " + dis.argmax);
        } else {
            if (!gen_.hilbert_dim) throw PreconditionError("dissipativity", "second cover extension: no Hilbert dimension");
            const Eigen::Index h = *gen_.hilbert_dim;
            Rng rng(seed);
            std::vector<CMatrix> samples;
            for (int i = 0; i < 8; ++i) samples.push_back(random_matrix(rng, h));
            for (const auto& [u, v] : edges) {
                Report r = check_schwarz_generator(SuperOp(h, gen_(u, v)), samples, 1e-9);
                if (!r.pass())
                    throw PreconditionError("dissipativity",
                                            "second cover extension: Schwarz generator conditions fail at " + edge_str(u, v));
            }
        }
    }

    CMatrix generator(const GroupElement& g) const { return generator(refine(gen_.context(), cover_of(gen_.context(), g))); }

    CMatrix generator(const Refinement& r) const {
        CMatrix a = CMatrix::Zero(gen_.dim(), gen_.dim());
        for (std::size_t i = 1; i < r.breakpoints.size(); ++i)
            if (r.coeffs[i - 1] > 0) a += gen_(r.breakpoints[i - 1], r.breakpoints[i]);
        return alpha_ * a;
    }

    CMatrix operator()(const GroupElement& g) const { return expm(generator(g)); }
    CMatrix evaluate(const Refinement& r) const { return expm(generator(r)); }

    const GeneratorFamily& generators() const { return gen_; }
    double alpha() const { return alpha_; }

private:
    GeneratorFamily gen_;
    double alpha_;
};

// ---- continuity moduli -----------------------------------------------------------------------

enum class Flavor { Banach, CStar };

// Where the family values act: vectors of length dim (Banach) or matrices in M_h (C*), with the
// matching norm.
struct PayloadSpace {
    Flavor flavor = Flavor::Banach;
    Eigen::Index dim = 0;  // operator size
    Eigen::Index h = 0;    // C* flavor: dim == h*h

    static PayloadSpace banach(Eigen::Index d) { return {Flavor::Banach, d, d}; }
    static PayloadSpace cstar(Eigen::Index h) { return {Flavor::CStar, h * h, h}; }

    CMatrix apply(const CMatrix& op, const CMatrix& p) const {
        if (flavor == Flavor::Banach) return op * p;
        return unvec(op * vec(p), h);
    }
    double norm(const CMatrix& p) const { return spectral_norm(p); }
    CMatrix zero() const { return flavor == Flavor::Banach ? CMatrix::Zero(dim, 1) : CMatrix::Zero(h, h); }
    CMatrix random(Rng& rng) const {
        if (flavor == Flavor::Banach) return CMatrix(random_unit_vector(rng, dim));
        CMatrix a = random_matrix(rng, h);
        return a / spectral_norm(a);
    }
    // Spanning set: standard basis vectors or matrix units.
    std::vector<CMatrix> basis() const {
        std::vector<CMatrix> out;
        if (flavor == Flavor::Banach)
            for (Eigen::Index i = 0; i < dim; ++i) out.push_back(CMatrix(basis_vector(dim, i)));
        else
            for (Eigen::Index j = 0; j < h; ++j)
                for (Eigen::Index i = 0; i < h; ++i) out.push_back(matrix_unit(h, i, j));
        return out;
    }
    // Operator-norm size of an operator on this payload space; exact for Banach, sampled for C*.
    double op_norm(const CMatrix& op, Rng& rng) const {
        if (flavor == Flavor::Banach) return spectral_norm(op);
        return sampled_opnorm(op, h, rng);
    }
};

enum class CoverKind { First, Second };

struct ContinuitySample {
    GroupElement g, h;
    Edge e, e_prime;
    CMatrix xi;
};

// Four-term bound for ‖(φ̄(gι(e′)h) - φ̄(gι(e)h))ξ‖ with ū = min(u₀, u), v̄ = max(v₀, v), e = (u₀, v₀),
// e′ = (u, v). The first cover form needs contractions; its terms are e^ℓ - 1.
inline double continuity_bound(const EdgeContext& ctx, const LengthFunction& ell, CoverKind kind, const Edge& e,
                               const Edge& ep) {
    const auto& [u0, v0] = e;
    const auto& [u, v] = ep;
    const NodeId ub = ctx.order_min(u0, u), vb = ctx.order_max(v0, v);
    const double terms[4] = {ell(ub, u), ell(v, vb), ell(v0, vb), ell(ub, u0)};
    double s = 0.0;
    for (double t : terms) s += kind == CoverKind::First ? std::expm1(t) : t;
    return s;
}

inline Check continuity_modulus_check(const GroupEval& ext, const EdgeContext& ctx, const LengthFunction& ell,
                                      CoverKind kind, const PayloadSpace& space,
                                      const std::vector<ContinuitySample>& samples, double tol = 1e-10) {
    ctx.require_linear("continuity_modulus_check");
    Check c(kind == CoverKind::First ? "continuity modulus (first cover, exp form)"
                                     : "continuity modulus (second cover, linear form)",
            tol);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const GroupElement a = mul(ctx, mul(ctx, s.g, iota(ctx, s.e_prime)), s.h);
        const GroupElement b = mul(ctx, mul(ctx, s.g, iota(ctx, s.e)), s.h);
        const double lhs = space.norm(space.apply(ext(a) - ext(b), s.xi));
        const double bound = continuity_bound(ctx, ell, kind, s.e, s.e_prime) * space.norm(s.xi);
        c.add(lhs - bound, "sample " + std::to_string(i) + " e=" + edge_str(s.e.first, s.e.second) +
                               " e'=" + edge_str(s.e_prime.first, s.e_prime.second));
    }
    return c;
}

inline std::vector<ContinuitySample> random_continuity_samples(const EdgeContext& ctx, const PayloadSpace& space, Rng& rng,
                                                        std::size_t n, std::size_t max_len = 4) {
    const auto edges = ctx.edges();
    std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
    std::vector<ContinuitySample> out;
    for (std::size_t i = 0; i < n; ++i) {
        ContinuitySample s;
        s.g = random_element(ctx, rng, max_len);
        s.h = random_element(ctx, rng, max_len);
        s.e = edges[pick(rng)];
        s.e_prime = edges[pick(rng)];
        s.xi = space.random(rng);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace gdyn
