#pragma once

#include "linops.hpp"
#include "random.hpp"
#include "report.hpp"
#include "rewrite.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace gdyn {

struct GraphError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct OrderError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct AcyclicityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DegeneracyError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A construction was asked for on data violating one of its hypotheses; `axiom` names it.
struct PreconditionError : std::runtime_error {
    std::string axiom;
    PreconditionError(std::string ax, const std::string& msg) : std::runtime_error(msg), axiom(std::move(ax)) {}
};

using EdgeEval = std::function<CMatrix(const NodeId&, const NodeId&)>;
using ContextPtr = std::shared_ptr<const EdgeContext>;

inline std::string edge_str(const NodeId& u, const NodeId& v) { return "(" + u.str() + "," + v.str() + ")"; }
inline std::string triple_str(const NodeId& u, const NodeId& v, const NodeId& w) {
    return "(" + u.str() + "," + v.str() + "," + w.str() + ")";
}

namespace detail {

// Insert-once cache; concurrent readers, serialized writers.
template <class K, class V>
class MemoCache {
public:
    template <class F>
    V get(const K& k, F&& compute) {
        {
            std::shared_lock lock(mu_);
            auto it = map_.find(k);
            if (it != map_.end()) return it->second;
        }
        V v = compute();
        std::unique_lock lock(mu_);
        return map_.emplace(k, std::move(v)).first->second;
    }

private:
    std::shared_mutex mu_;
    std::map<K, V> map_;
};

}  // namespace detail

// Edge-indexed matrix family, evaluated lazily and memoized per edge.
class EdgeFamily {
public:
    EdgeFamily() = default;
    EdgeFamily(ContextPtr ctx, Eigen::Index dim, EdgeEval eval)
        : ctx_(std::move(ctx)), dim_(dim), eval_(std::move(eval)),
          cache_(std::make_shared<detail::MemoCache<Edge, CMatrix>>()) {}

    CMatrix operator()(const NodeId& u, const NodeId& v) const {
        if (!ctx_->has_edge(u, v)) throw GraphError("missing edge " + edge_str(u, v));
        return cache_->get(Edge{u, v}, [&] {
            CMatrix m = eval_(u, v);
            if (m.rows() != dim_ || m.cols() != dim_)
                throw DimensionError("family value at " + edge_str(u, v) + " has the wrong shape");
            if (!all_finite(m)) throw InputError("family value at " + edge_str(u, v) + " is not finite");
            return m;
        });
    }

    const EdgeContext& context() const { return *ctx_; }
    const ContextPtr& context_ptr() const { return ctx_; }
    Eigen::Index dim() const { return dim_; }

    // Set when the values are superoperators on M_h (dim = h^2).
    std::optional<Eigen::Index> hilbert_dim;

protected:
    ContextPtr ctx_;
    Eigen::Index dim_ = 0;
    EdgeEval eval_;
    std::shared_ptr<detail::MemoCache<Edge, CMatrix>> cache_;
};

// φ(u, v)
class OperatorFamily : public EdgeFamily {
public:
    OperatorFamily() = default;
    OperatorFamily(ContextPtr ctx, Eigen::Index dim, EdgeEval eval, bool contraction = false)
        : EdgeFamily(std::move(ctx), dim, std::move(eval)), contraction_flag(contraction) {}
    bool contraction_flag = false;
};

// A(u, v)
class GeneratorFamily : public EdgeFamily {
public:
    GeneratorFamily() = default;
    GeneratorFamily(ContextPtr ctx, Eigen::Index dim, EdgeEval eval, bool dissipative = false)
        : EdgeFamily(std::move(ctx), dim, std::move(eval)), dissipative_flag(dissipative) {}
    bool dissipative_flag = false;
};

// φ(u, v) = e^{α A(u, v)}
inline OperatorFamily exponential_family(const GeneratorFamily& gen, double alpha = 1.0) {
    OperatorFamily f(
        gen.context_ptr(), gen.dim(), [gen, alpha](const NodeId& u, const NodeId& v) { return expm(alpha * gen(u, v)); },
        gen.dissipative_flag && alpha >= 0);
    f.hilbert_dim = gen.hilbert_dim;
    return f;
}

enum class LengthKind { Additive, Superadditive, Subadditive };

struct LengthFunction {
    std::function<double(const NodeId&, const NodeId&)> eval;
    LengthKind kind = LengthKind::Additive;
    std::string description;

    double operator()(const NodeId& u, const NodeId& v) const { return eval(u, v); }
};

// ℓ(u, v) = rate · |v - u| on numeric keys; additive along any linear order of the keys.
inline LengthFunction linear_length(double rate) {
    return {[rate](const NodeId& u, const NodeId& v) { return rate * std::abs((v - u).to_double()); },
            LengthKind::Additive, "rate*|v-u| with rate=" + std::to_string(rate)};
}

inline LengthFunction zero_length() {
    return {[](const NodeId&, const NodeId&) { return 0.0; }, LengthKind::Additive, "0"};
}

// ---- sampling helpers -------------------------------------------------------------------------

using Triple = std::array<NodeId, 3>;

// All (u, v, w) with (u, v), (v, w), (u, w) ∈ E.
inline std::vector<Triple> composable_triples(const EdgeContext& ctx) {
    std::vector<Triple> out;
    const auto& n = ctx.nodes();
    for (const auto& u : n)
        for (const auto& v : n) {
            if (!ctx.has_edge(u, v)) continue;
            for (const auto& w : n)
                if (ctx.has_edge(v, w) && ctx.has_edge(u, w)) out.push_back({u, v, w});
        }
    return out;
}

inline std::vector<std::pair<Edge, Edge>> edge_pairs(const EdgeContext& ctx) {
    std::vector<std::pair<Edge, Edge>> out;
    const auto es = ctx.edges();
    for (const auto& a : es)
        for (const auto& b : es) out.push_back({a, b});
    return out;
}

// ---- axiom checkers -------------------------------------------------------------------------

inline Report check_identity_axiom(const OperatorFamily& fam, double tol = 1e-10) {
    Report rep{"identity axiom"};
    Check c("||phi(u,u) - 1||", tol);
    for (const auto& u : fam.context().nodes()) {
        if (!fam.context().has_edge(u, u)) continue;
        c.add(spectral_norm(fam(u, u) - identity(fam.dim())), edge_str(u, u));
    }
    if (c.samples == 0) throw GraphError("identity axiom: graph has no diagonal edges");
    rep.add(std::move(c));
    return rep;
}

inline void require_triple(const EdgeContext& ctx, const NodeId& u, const NodeId& v, const NodeId& w) {
    for (const auto& [a, b] : {Edge{u, v}, Edge{v, w}, Edge{u, w}})
        if (!ctx.has_edge(a, b)) throw GraphError("missing edge " + edge_str(a, b));
}

inline double divisibility_defect(const OperatorFamily& fam, const NodeId& u, const NodeId& v, const NodeId& w) {
    require_triple(fam.context(), u, v, w);
    return spectral_norm(fam(u, w) - fam(u, v) * fam(v, w));
}

inline Check check_divisibility(const OperatorFamily& fam, const std::vector<Triple>& triples, double tol = 1e-10) {
    Check c("||phi(u,w) - phi(u,v)phi(v,w)||", tol);
    for (const auto& [u, v, w] : triples) c.add(divisibility_defect(fam, u, v, w), triple_str(u, v, w));
    return c;
}

inline double additivity_defect(const GeneratorFamily& gen, const NodeId& u, const NodeId& v, const NodeId& w) {
    require_triple(gen.context(), u, v, w);
    return spectral_norm(gen(u, w) - gen(u, v) - gen(v, w));
}

inline Check check_additivity(const GeneratorFamily& gen, const std::vector<Triple>& triples, double tol = 1e-9) {
    Check c("||A(u,w) - A(u,v) - A(v,w)||", tol);
    for (const auto& [u, v, w] : triples) c.add(additivity_defect(gen, u, v, w), triple_str(u, v, w));
    return c;
}

inline Check check_contraction(const EdgeFamily& fam, const std::vector<Edge>& edges, double tol = 1e-10) {
    Check c("||phi(u,v)|| - 1", tol);
    for (const auto& [u, v] : edges) c.add(spectral_norm(fam(u, v)) - 1.0, edge_str(u, v));
    return c;
}

inline Check check_dissipative(const GeneratorFamily& gen, const std::vector<Edge>& edges, double tol = 1e-10) {
    Check c("lambda_max(Re A(u,v))", tol);
    for (const auto& [u, v] : edges) c.add(hermitian_eigenvalues(gen(u, v)).maxCoeff(), edge_str(u, v));
    return c;
}

inline Check check_length_kind(const LengthFunction& ell, const EdgeContext& ctx, const std::vector<Triple>& triples,
                               double tol = 1e-12) {
    Check c("length function kind", tol);
    for (const auto& u : ctx.nodes())
        if (ctx.has_edge(u, u)) c.add(std::abs(ell(u, u)), "l" + edge_str(u, u));
    for (const auto& [u, v, w] : triples) {
        const double lhs = ell(u, w), rhs = ell(u, v) + ell(v, w);
        double d = 0.0;
        switch (ell.kind) {
            case LengthKind::Additive: d = std::abs(lhs - rhs); break;
            case LengthKind::Superadditive: d = rhs - lhs; break;
            case LengthKind::Subadditive: d = lhs - rhs; break;
        }
        c.add(d, triple_str(u, v, w));
    }
    return c;
}

// ||φ(u, v) - 1|| <= ℓ(u, v) on the given edges, plus superadditivity of ℓ on the triples.
inline Report check_geometric_growth(const OperatorFamily& fam, const LengthFunction& ell,
                                     const std::vector<Edge>& edges, const std::vector<Triple>& triples,
                                     double tol = 1e-10) {
    if (ell.kind == LengthKind::Subadditive)
        throw PreconditionError("superadditivity", "geometric growth needs a superadditive length function");
    Report rep{"geometric growth (operators)"};
    Check c("||phi(u,v) - 1|| - l(u,v)", tol);
    for (const auto& [u, v] : edges) c.add(spectral_norm(fam(u, v) - identity(fam.dim())) - ell(u, v), edge_str(u, v));
    rep.add(std::move(c));
    Check k = check_length_kind(ell, fam.context(), triples);
    k.name = "length function superadditive";
    if (ell.kind == LengthKind::Additive) {
        // additive is a special case; re-check only the superadditive inequality
        k = Check("length function superadditive", 1e-12);
        for (const auto& [u, v, w] : triples) k.add(ell(u, v) + ell(v, w) - ell(u, w), triple_str(u, v, w));
    }
    rep.add(std::move(k));
    return rep;
}

// ||A(u, v)|| <= ℓ(u, v)
inline Report check_geometric_growth(const GeneratorFamily& gen, const LengthFunction& ell,
                                     const std::vector<Edge>& edges, const std::vector<Triple>& triples,
                                     double tol = 1e-10, double alpha = 1.0) {
    if (ell.kind == LengthKind::Subadditive)
        throw PreconditionError("superadditivity", "geometric growth needs a superadditive length function");
    Report rep{"geometric growth (generators)"};
    Check c("||A(u,v)|| - l(u,v)", tol);
    for (const auto& [u, v] : edges) c.add(alpha * spectral_norm(gen(u, v)) - ell(u, v), edge_str(u, v));
    rep.add(std::move(c));
    Check k("length function superadditive", 1e-12);
    for (const auto& [u, v, w] : triples) k.add(ell(u, v) + ell(v, w) - ell(u, w), triple_str(u, v, w));
    rep.add(std::move(k));
    return rep;
}

// ||φ(u,v) - φ(u',v')|| <= C (ℓ(ū,u) + ℓ(v,v̄) + ℓ(ū,u') + ℓ(v',v̄)), ū = min(u,u'), v̄ = max(v,v').
inline Check lipschitz_check(const OperatorFamily& fam, const LengthFunction& ell, double C,
                             const std::vector<std::pair<Edge, Edge>>& pairs, double tol = 1e-10) {
    const auto& ctx = fam.context();
    ctx.require_linear("lipschitz_check");
    Check c("||phi(e) - phi(e')|| - C*(four l terms)", tol);
    for (const auto& [e, ep] : pairs) {
        const auto& [u, v] = e;
        const auto& [up, vp] = ep;
        const NodeId ub = ctx.order_min(u, up), vb = ctx.order_max(v, vp);
        const double bound = C * (ell(ub, u) + ell(v, vb) + ell(ub, up) + ell(vp, vb));
        c.add(spectral_norm(fam(u, v) - fam(up, vp)) - bound, edge_str(u, v) + "~" + edge_str(up, vp));
    }
    return c;
}

// Generator form: ||e^{αA(u',v')} - e^{αA(u,v)}|| <= ||αA(ū,u)|| + ||αA(v,v̄)|| + ||αA(ū,u')|| + ||αA(v',v̄)||.
inline Check lipschitz_check(const GeneratorFamily& gen, double alpha, const std::vector<std::pair<Edge, Edge>>& pairs,
                             double tol = 1e-10) {
    const auto& ctx = gen.context();
    ctx.require_linear("lipschitz_check");
    Check c("||phi(e) - phi(e')|| - (four ||A|| terms)", tol);
    auto nA = [&](const NodeId& a, const NodeId& b) { return std::abs(alpha) * spectral_norm(gen(a, b)); };
    for (const auto& [e, ep] : pairs) {
        const auto& [u, v] = e;
        const auto& [up, vp] = ep;
        const NodeId ub = ctx.order_min(u, up), vb = ctx.order_max(v, vp);
        const double bound = nA(ub, u) + nA(v, vb) + nA(ub, up) + nA(vp, vb);
        const double lhs = spectral_norm(expm(alpha * gen(u, v)) - expm(alpha * gen(up, vp)));
        c.add(lhs - bound, edge_str(u, v) + "~" + edge_str(up, vp));
    }
    return c;
}

// ∫_s^t A_τ dτ by composite Simpson, doubling panels until two estimates agree.
inline CMatrix integrate_generators(const std::function<CMatrix(double)>& a_tau, double s, double t,
                                    double tol = 1e-12) {
    if (t < s) throw OrderError("integrate_generators: t < s");
    if (t == s) return CMatrix::Zero(a_tau(s).rows(), a_tau(s).cols());
    auto simpson = [&](int panels) {
        const double h = (t - s) / panels;
        CMatrix acc = a_tau(s) + a_tau(t);
        for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * a_tau(s + i * h);
        return CMatrix(acc * (h / 3.0));
    };
    CMatrix prev = simpson(2);
    for (int panels = 4; panels <= (1 << 20); panels *= 2) {
        CMatrix cur = simpson(panels);
        if (spectral_norm(cur - prev) <= tol * std::max(1.0, spectral_norm(cur))) return cur;
        prev = std::move(cur);
    }
    return prev;
}

// ---- time-dependent example on ([0, t_max], ≥) ---------------------------------------------------

// A_τ = (τ/t_max²)Ψ₁ + ((t_max - τ)/t_max²)Ψ₂ with Ψᵢ = i[hᵢ, ·] acting on M_d.
struct TimeFamilyExample {
    CMatrix h1, h2;
    Rational t_max;
    SuperOp psi1, psi2;
    ContextPtr ctx;

    // Exact coefficients (c₁, c₂) of A(t, s) = c₁Ψ₁ + c₂Ψ₂.
    std::pair<Rational, Rational> coefficients(const NodeId& t, const NodeId& s) const {
        const Rational len = (t - s) / t_max;
        const Rational mid = (t + s) / (Rational(2) * t_max);
        return {len * mid, len * (Rational(1) - mid)};
    }

    CMatrix A_tau(double tau) const {
        const double tm = t_max.to_double();
        return (tau / (tm * tm)) * psi1.matrix + ((tm - tau) / (tm * tm)) * psi2.matrix;
    }

    CMatrix A(const NodeId& t, const NodeId& s) const {
        auto [c1, c2] = coefficients(t, s);
        return c1.to_double() * psi1.matrix + c2.to_double() * psi2.matrix;
    }

    // sup ‖A_τ‖ <= max(‖Ψ₁‖, ‖Ψ₂‖)/t_max, since t_max·A_τ is a convex combination.
    double sup_norm_bound() const {
        return std::max(spectral_norm(psi1.matrix), spectral_norm(psi2.matrix)) / t_max.to_double();
    }

    GeneratorFamily generators() const {
        auto self = *this;
        GeneratorFamily g(ctx, psi1.matrix.rows(), [self](const NodeId& t, const NodeId& s) { return self.A(t, s); },
                          true);
        g.hilbert_dim = h1.rows();
        return g;
    }

    LengthFunction length(double alpha = 1.0) const { return linear_length(std::abs(alpha) * sup_norm_bound()); }
};

inline std::vector<NodeId> uniform_grid(const Rational& lo, const Rational& hi, int steps) {
    std::vector<NodeId> g;
    for (int k = 0; k <= steps; ++k) g.push_back(lo + (hi - lo) * Rational(k, steps));
    return g;
}

inline TimeFamilyExample example_indivisible(const CMatrix& h1, const CMatrix& h2, const Rational& t_max,
                                             std::vector<NodeId> grid = {}, bool require_noncentral = true,
                                             double tol = 1e-12) {
    require_square(h1, "example_indivisible");
    require_same_shape(h1, h2, "example_indivisible");
    if (!is_hermitian(h1, tol) || !is_hermitian(h2, tol)) throw InputError("example_indivisible: h1, h2 must be Hermitian");
    if (t_max <= Rational(0)) throw InputError("example_indivisible: t_max must be positive");
    // [h1, h2] is traceless, so it is central exactly when it vanishes
    if (require_noncentral && spectral_norm(commutator(h1, h2)) <= tol)
        throw DegeneracyError("example_indivisible: [h1, h2] is central");
    if (grid.empty()) grid = uniform_grid(Rational(0), t_max, 4);
    for (const auto& t : grid)
        if (t < Rational(0) || t > t_max) throw InputError("example_indivisible: grid point outside [0, t_max]");
    TimeFamilyExample ex;
    ex.h1 = h1;
    ex.h2 = h2;
    ex.t_max = t_max;
    ex.psi1 = cplx(0, 1) * SuperOp::commutator_with(h1);
    ex.psi2 = cplx(0, 1) * SuperOp::commutator_with(h2);
    ex.ctx = std::make_shared<EdgeContext>(EdgeContext::linear_order(std::move(grid), Direction::Descending));
    return ex;
}

// ---- Lindblad generators ----------------------------------------------------------------------

// L = i[h, ·] + Ψ - ½{Ψ(1), ·}
inline SuperOp lindblad_generator(const CMatrix& h, const SuperOp& psi, double tol = 1e-10) {
    require_square(h, "lindblad_generator");
    if (!is_hermitian(h, tol)) throw InputError("lindblad_generator: h is not Hermitian");
    if (psi.dim != h.rows()) throw DimensionError("lindblad_generator: Psi acts on the wrong dimension");
    const Eigen::Index d = h.rows();
    const CMatrix psi1 = psi.apply(identity(d));
    const CMatrix id = identity(d);
    return cplx(0, 1) * SuperOp::commutator_with(h) + psi - cplx(0.5) * SuperOp(d, tensor(id, psi1) + tensor(CMatrix(psi1.transpose()), id));
}

// Ψ(x) = Σ kᵢ* x kᵢ, completely positive.
inline SuperOp heisenberg_kraus_map(const std::vector<CMatrix>& ks) {
    const Eigen::Index d = ks.at(0).rows();
    SuperOp out = SuperOp::zero(d);
    for (const auto& k : ks) out = out + SuperOp::sandwich(k.adjoint(), k);
    return out;
}

// D_L(a, b) = L(b*a) - (L(b)*a + b*L(a))
inline CMatrix dissipation_map(const SuperOp& L, const CMatrix& a, const CMatrix& b) {
    return L.apply(b.adjoint() * a) - (L.apply(b).adjoint() * a + b.adjoint() * L.apply(a));
}

// Self-adjointness, L(1) = 0 and D_L(a, a) ⪰ 0 on sampled a; on pass, contraction of expm(αL) in the
// operator norm of M_d on the same samples.
inline Report check_schwarz_generator(const SuperOp& L, const std::vector<CMatrix>& samples, double tol = 1e-10) {
    Report rep{"Schwarz generator conditions"};
    const Eigen::Index d = L.dim;
    Check sa("||L(a*) - L(a)*||", tol), unit("||L(1)||", tol), dpos("-lambda_min(D_L(a,a))", tol);
    unit.add(spectral_norm(L.apply(identity(d))), "1");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const CMatrix& a = samples[i];
        const std::string where = "sample " + std::to_string(i);
        sa.add(spectral_norm(L.apply(a.adjoint()) - L.apply(a).adjoint()), where);
        const CMatrix D = dissipation_map(L, a, a);
        const double herm = spectral_norm(D - D.adjoint()) / 2.0;
        dpos.add(std::max(herm, -hermitian_eigenvalues(D).minCoeff()), where);
    }
    const bool ok = sa.pass() && unit.pass() && dpos.pass();
    rep.add(std::move(sa));
    rep.add(std::move(unit));
    rep.add(std::move(dpos));
    if (ok) {
        Check con("||exp(aL)(x)|| - ||x||", tol);
        for (double alpha : {0.1, 1.0, 10.0}) {
            const SuperOp E(d, expm(alpha * L.matrix));
            for (std::size_t i = 0; i < samples.size(); ++i)
                con.add(spectral_norm(E.apply(samples[i])) - spectral_norm(samples[i]),
                        "alpha=" + std::to_string(alpha) + " sample " + std::to_string(i));
        }
        con.note = "alpha in {0.1, 1, 10}, same samples";
        rep.add(std::move(con));
    } else {
        rep.notes.push_back("contraction sampling skipped: Schwarz conditions not met");
    }
    return rep;
}

// Sampled lower estimate of the norm of a superoperator on (M_h, operator norm).
inline double sampled_opnorm(const CMatrix& superop, Eigen::Index h, Rng& rng, int samples = 32) {
    double best = spectral_norm(unvec(superop * vec(identity(h)), h));
    for (int i = 0; i < samples; ++i) {
        CMatrix a = i % 2 ? random_unitary(rng, h) : random_matrix(rng, h);
        best = std::max(best, spectral_norm(unvec(superop * vec(a), h)) / spectral_norm(a));
    }
    return best;
}

// ---- networks --------------------------------------------------------------------------------

struct DagNetwork {
    std::vector<NodeId> nodes;
    std::vector<Edge> edges;
    std::map<Edge, CMatrix> weights;
    Eigen::Index dim = 0;
    std::size_t path_cap = 10000;

    DagNetwork() = default;
    DagNetwork(std::vector<NodeId> n, std::map<Edge, CMatrix> w) : nodes(std::move(n)), weights(std::move(w)) {
        if (weights.empty()) throw InputError("network without edges");
        dim = weights.begin()->second.rows();
        for (const auto& [e, m] : weights) {
            if (m.rows() != dim || m.cols() != dim) throw DimensionError("network weights differ in shape");
            edges.push_back(e);
        }
        std::map<NodeId, int> indeg;
        std::map<NodeId, std::vector<NodeId>> out;
        for (const auto& u : nodes) indeg[u] = 0;
        for (const auto& [u, v] : edges) {
            if (!indeg.count(u) || !indeg.count(v)) throw InputError("network edge with unknown node");
            ++indeg[v];
            out[u].push_back(v);
        }
        std::vector<NodeId> ready;
        for (const auto& [u, k] : indeg)
            if (k == 0) ready.push_back(u);
        std::size_t seen = 0;
        while (!ready.empty()) {
            NodeId u = ready.back();
            ready.pop_back();
            ++seen;
            for (const auto& v : out[u])
                if (--indeg[v] == 0) ready.push_back(v);
        }
        if (seen != nodes.size()) throw AcyclicityError("network contains a directed cycle");
    }

    std::vector<NodeId> successors(const NodeId& u) const {
        std::vector<NodeId> s;
        for (const auto& [a, b] : edges)
            if (a == u) s.push_back(b);
        return s;
    }
};

namespace detail {

// Σ over walks u → w of ordered weight products, skipping walks through `avoid` when given.
inline CMatrix walk_sum(const DagNetwork& net, const NodeId& u, const NodeId& w, const std::optional<NodeId>& avoid,
                        std::map<NodeId, CMatrix>& memo, std::map<NodeId, double>& count) {
    if (auto it = memo.find(u); it != memo.end()) return it->second;
    CMatrix acc = CMatrix::Zero(net.dim, net.dim);
    double n = 0;
    if (avoid && u == *avoid) {
        memo[u] = acc;
        count[u] = 0;
        return acc;
    }
    if (u == w) {
        acc += identity(net.dim);
        n += 1;
    }
    for (const auto& x : net.successors(u)) {
        CMatrix tail = walk_sum(net, x, w, avoid, memo, count);
        acc += net.weights.at({u, x}) * tail;
        n += count[x];
    }
    if (n > static_cast<double>(net.path_cap)) throw std::length_error("network exceeds the path cap");
    memo[u] = acc;
    count[u] = n;
    return acc;
}

}  // namespace detail

// Number of walks u → w.
inline double network_path_count(const DagNetwork& net, const NodeId& u, const NodeId& w) {
    std::map<NodeId, CMatrix> memo;
    std::map<NodeId, double> count;
    detail::walk_sum(net, u, w, std::nullopt, memo, count);
    return count[u];
}

// φ(u, v) = Σ_{π ∈ Path(u, v)} w_π on the graph (Ω, Ω × Ω).
inline OperatorFamily network_family(const DagNetwork& net) {
    auto ctx = std::make_shared<EdgeContext>(EdgeContext::complete(net.nodes));
    return OperatorFamily(ctx, net.dim, [net](const NodeId& u, const NodeId& v) {
        std::map<NodeId, CMatrix> memo;
        std::map<NodeId, double> count;
        return detail::walk_sum(net, u, v, std::nullopt, memo, count);
    });
}

// Σ over walks u → w that do not visit v.
inline CMatrix network_defect(const DagNetwork& net, const NodeId& u, const NodeId& v, const NodeId& w) {
    std::map<NodeId, CMatrix> memo;
    std::map<NodeId, double> count;
    return detail::walk_sum(net, u, w, v, memo, count);
}

}  // namespace gdyn
