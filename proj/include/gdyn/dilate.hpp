#pragma once

#include "channel.hpp"
#include "dynamics.hpp"
#include "extend.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace gdyn {

// Memoizes a group-indexed evaluator by normal form.
inline GroupEval cached(GroupEval f) {
    auto cache = std::make_shared<detail::MemoCache<GroupElement, CMatrix>>();
    return [f = std::move(f), cache](const GroupElement& g) { return cache->get(g, [&] { return f(g); }); };
}

// Finitely supported formal sum Σ (tag, payload); never closed or completed.
struct FormalVector {
    std::vector<std::pair<GroupElement, CMatrix>> terms;

    std::vector<GroupElement> tags() const {
        std::vector<GroupElement> t;
        for (const auto& [g, p] : terms) t.push_back(g);
        return t;
    }
};

// Product of formal vectors times a scalar; the C* flavor multiplies point evaluations.
struct FormalMonomial {
    cplx coeff{1.0, 0.0};
    std::vector<FormalVector> factors;
};

struct FormalElement {
    std::vector<FormalMonomial> terms;
};

// Dilation of a group-indexed family φ̄ with φ̄(1) = 1: r(ξ) = (1, ξ), U(x) shifts tags y ↦ xy,
// eval(v, g) = Σ φ̄(g·tag)payload and j = eval(·, 1). With a bound K (‖φ̄(x)‖ ≤ K(x), K submultiplicative,
// K(1) = 1) the U(x) are bounded invertible rather than isometric.
class StroescuDilation {
public:
    using Bound = std::function<double(const GroupElement&)>;

    StroescuDilation(ContextPtr ctx, GroupEval phibar, PayloadSpace space, std::optional<Bound> K = std::nullopt)
        : ctx_(std::move(ctx)), phibar_(cached(std::move(phibar))), space_(space), K_(std::move(K)) {}

    // Checks ‖φ̄(x)‖ <= K(x) (or <= 1) on the given elements; throws PreconditionError naming the axiom.
    void require_bounded(const std::vector<GroupElement>& sample, Rng& rng, double tol = 1e-10) const {
        const CMatrix one = phibar_(identity_element());
        if (spectral_norm(one - identity(space_.dim)) > tol)
            throw PreconditionError("identity", "dilation: extension is not 1 at the identity");
        for (const auto& x : sample) {
            const double n = space_.op_norm(phibar_(x), rng);
            const double k = K_ ? (*K_)(x) : 1.0;
            if (n > k + tol)
                throw PreconditionError(K_ ? "bound" : "contraction",
                                        "dilation: ||phi(x)|| = " + std::to_string(n) + " exceeds " + std::to_string(k) +
                                            " at " + to_string(x));
        }
    }

    bool isometric() const { return !K_; }
    const PayloadSpace& space() const { return space_; }
    const GroupEval& phibar() const { return phibar_; }
    const EdgeContext& context() const { return *ctx_; }
    double bound(const GroupElement& x) const { return K_ ? (*K_)(x) : 1.0; }

    FormalVector r(const CMatrix& xi) const { return FormalVector{{{identity_element(), xi}}}; }

    FormalVector U(const GroupElement& x, const FormalVector& v) const {
        FormalVector out;
        out.terms.reserve(v.terms.size());
        for (const auto& [y, p] : v.terms) out.terms.emplace_back(mul(*ctx_, x, y), p);
        return out;
    }

    CMatrix eval(const FormalVector& v, const GroupElement& g) const {
        CMatrix acc = space_.zero();
        for (const auto& [y, p] : v.terms) acc += space_.apply(phibar_(mul(*ctx_, g, y)), p);
        return acc;
    }

    CMatrix j(const FormalVector& v) const { return eval(v, identity_element()); }

    // ---- C* flavor: formal products with pointwise multiplication ----

    FormalElement r_alg(const CMatrix& a) const { return FormalElement{{FormalMonomial{1.0, {r(a)}}}}; }

    FormalElement U(const GroupElement& x, const FormalElement& f) const {
        FormalElement out = f;
        for (auto& m : out.terms)
            for (auto& fac : m.factors) fac = U(x, fac);
        return out;
    }

    CMatrix eval(const FormalElement& f, const GroupElement& g) const {
        require_cstar();
        CMatrix acc = CMatrix::Zero(space_.h, space_.h);
        for (const auto& m : f.terms) {
            CMatrix p = identity(space_.h);
            for (const auto& fac : m.factors) p = p * eval(fac, g);
            acc += m.coeff * p;
        }
        return acc;
    }

    CMatrix j(const FormalElement& f) const { return eval(f, identity_element()); }

    static FormalElement product(const FormalElement& a, const FormalElement& b) {
        FormalElement out;
        for (const auto& x : a.terms)
            for (const auto& y : b.terms) {
                FormalMonomial m{x.coeff * y.coeff, x.factors};
                m.factors.insert(m.factors.end(), y.factors.begin(), y.factors.end());
                out.terms.push_back(std::move(m));
            }
        return out;
    }

    static FormalElement sum(const FormalElement& a, const FormalElement& b) {
        FormalElement out = a;
        out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
        return out;
    }

    // Pointwise adjoint; valid because the values of φ̄ preserve adjoints.
    static FormalElement star(const FormalElement& a) {
        FormalElement out;
        for (const auto& m : a.terms) {
            FormalMonomial s{std::conj(m.coeff), {}};
            for (auto it = m.factors.rbegin(); it != m.factors.rend(); ++it) {
                FormalVector f = *it;
                for (auto& [g, p] : f.terms) p = CMatrix(p.adjoint());
                s.factors.push_back(std::move(f));
            }
            out.terms.push_back(std::move(s));
        }
        return out;
    }

private:
    ContextPtr ctx_;
    GroupEval phibar_;
    PayloadSpace space_;
    std::optional<Bound> K_;

    void require_cstar() const {
        if (space_.flavor != Flavor::CStar) throw std::logic_error("formal products need the C* flavor");
    }
};

// Positivity and unitality of r and adjoint preservation, on sampled inputs and evaluation points.
inline Report check_cstar_dilation(const StroescuDilation& dil, const std::vector<CMatrix>& samples,
                                   const std::vector<GroupElement>& points, double tol = 1e-10) {
    Report rep{"C* flavor checks"};
    const Eigen::Index h = dil.space().h;
    Check unital("||r(1)(g) - 1||", tol), pos("-lambda_min(r(a*a)(g))", tol), adj("||r(a*)(g) - r(a)(g)*||", tol),
        hom("||j(fg) - j(f)j(g)||", tol), jr("||j(r(a)) - a||", tol);
    const FormalElement one = dil.r_alg(identity(h));
    for (const auto& g : points) unital.add(spectral_norm(dil.eval(one, g) - identity(h)), to_string(g));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const CMatrix& a = samples[i];
        const std::string where = "sample " + std::to_string(i);
        const FormalElement ra = dil.r_alg(a), rb = dil.r_alg(samples[(i + 1) % samples.size()]);
        jr.add(spectral_norm(dil.j(ra) - a), where);
        const FormalElement prod = StroescuDilation::product(ra, rb);
        hom.add(spectral_norm(dil.j(prod) - dil.j(ra) * dil.j(rb)), where);
        const FormalElement raa = dil.r_alg(a.adjoint() * a);
        const FormalElement ras = dil.r_alg(a.adjoint());
        for (const auto& g : points) {
            const CMatrix v = dil.eval(raa, g);
            pos.add(std::max(spectral_norm(v - v.adjoint()), -hermitian_eigenvalues(v).minCoeff()), where + " at " + to_string(g));
            adj.add(spectral_norm(dil.eval(ras, g) - dil.eval(ra, g).adjoint()), where + " at " + to_string(g));
        }
    }
    rep.add(std::move(unital));
    rep.add(std::move(pos));
    rep.add(std::move(adj));
    rep.add(std::move(hom));
    rep.add(std::move(jr));
    rep.notes.push_back("positivity of r is sampled; complete positivity is not claimed");
    return rep;
}

// Unitary representation U(x): (ζ ⊗ e_y) ↦ (u_{xy} u_y* ζ) ⊗ e_{xy} on (ℂ^d ⊗ E) ⊗ ℓ²(G), with u_1 = 1 and
// ω = ω₀ ⊗ |e_1⟩⟨e_1|, ω₀ = ι₁|ξ⟩⟨ξ|ι₁*. ℓ²(G) is represented by tags only.
class VedDilation {
public:
    VedDilation(ContextPtr ctx, GroupEval assignment, Eigen::Index d, CVector xi, double tol = 1e-10)
        : ctx_(std::move(ctx)), assignment_(cached(std::move(assignment))), d_(d), k_(d * d), xi_(std::move(xi)),
          cache_(std::make_shared<detail::MemoCache<GroupElement, CMatrix>>()) {
        const CMatrix one = assignment_(identity_element());
        if (one.rows() != d * d || spectral_norm(one - identity(d * d)) > tol)
            throw PreconditionError("identity", "VED dilation: the identity element is not assigned the identity channel");
        env_dim_ = d + d * k_;
        CVector e = CVector::Zero(env_dim_);
        e.head(d) = xi_;
        base_state_ = PureState::of(e);
    }

    Eigen::Index d() const { return d_; }
    Eigen::Index env_dim() const { return env_dim_; }
    Eigen::Index payload_dim() const { return d_ * env_dim_; }
    const PureState& base_state() const { return base_state_; }
    const GroupEval& assignment() const { return assignment_; }

    Channel channel(const GroupElement& x) const { return Channel::from_superop(SuperOp(d_, assignment_(x))); }

    CMatrix unitary_of(const GroupElement& x) const {
        if (x.is_identity()) return identity(payload_dim());
        return cache_->get(x, [&] { return kraus_ii_dilation(channel(x), xi_, k_).unitary; });
    }

    FormalVector apply(const GroupElement& x, const FormalVector& v) const {
        FormalVector out;
        for (const auto& [y, p] : v.terms) {
            const GroupElement xy = mul(*ctx_, x, y);
            out.terms.emplace_back(xy, unitary_of(xy) * (unitary_of(y).adjoint() * p));
        }
        return out;
    }

    // tr₂(ad_{U(x)}(s ⊗ ω)) evaluated on the tags reached from e_1.
    CMatrix compress(const GroupElement& x, const CMatrix& s) const {
        const Eigen::Index n = payload_dim();
        const CMatrix rho = tensor(s, base_state_.matrix);
        // ad_U(ρ ⊗ |e_1⟩⟨e_1|) = Σ_c |U(ρ e_c ⊗ e_1)⟩⟨U(e_c ⊗ e_1)|
        std::map<GroupElement, Eigen::Index> tag_index;
        std::vector<std::pair<FormalVector, FormalVector>> cols;
        for (Eigen::Index c = 0; c < n; ++c) {
            FormalVector left{{{identity_element(), CMatrix(rho.col(c))}}};
            FormalVector right{{{identity_element(), CMatrix(CMatrix::Identity(n, n).col(c))}}};
            cols.emplace_back(apply(x, left), apply(x, right));
            for (const auto& fv : {cols.back().first, cols.back().second})
                for (const auto& [t, p] : fv.terms) tag_index.emplace(t, 0);
        }
        Eigen::Index T = 0;
        for (auto& [t, i] : tag_index) i = T++;
        auto embed = [&](const FormalVector& fv) {
            CVector out = CVector::Zero(n * T);
            for (const auto& [t, p] : fv.terms)
                for (Eigen::Index a = 0; a < n; ++a) out(a * T + tag_index.at(t)) += p(a, 0);
            return out;
        };
        CMatrix big = CMatrix::Zero(n * T, n * T);
        for (const auto& [l, r] : cols) big += embed(l) * embed(r).adjoint();
        return partial_trace_second(big, d_, env_dim_ * T);
    }

    // ‖Φ_x(s) - tr₂(ad_{U(x)}(s ⊗ ω))‖₁
    double verify(const GroupElement& x, const CMatrix& s) const {
        return trace_norm(channel(x).apply(s) - compress(x, s));
    }

private:
    ContextPtr ctx_;
    GroupEval assignment_;
    Eigen::Index d_, k_, env_dim_ = 0;
    CVector xi_;
    PureState base_state_;
    std::shared_ptr<detail::MemoCache<GroupElement, CMatrix>> cache_;
};

// ---- systems and pipelines ----------------------------------------------------------------------

struct DynamicalSystem {
    std::string name;
    OperatorFamily phi;
    std::optional<GeneratorFamily> generators;  // φ = e^{αA} when present
    double alpha = 1.0;
    std::optional<LengthFunction> length;
    Flavor flavor = Flavor::Banach;
    bool channels = false;  // values are CPTP superoperators on M_h, Schrödinger picture

    const EdgeContext& context() const { return phi.context(); }

    PayloadSpace space() const {
        if (flavor == Flavor::CStar) {
            if (!phi.hilbert_dim) throw InputError("C* flavor needs superoperator values (hilbert_dim)");
            return PayloadSpace::cstar(*phi.hilbert_dim);
        }
        return PayloadSpace::banach(phi.dim());
    }
};

enum class Pipeline { A, B, C, ACptp };

inline std::string to_string(Pipeline p) {
    switch (p) {
        case Pipeline::A: return "A";
        case Pipeline::B: return "B";
        case Pipeline::C: return "C";
        case Pipeline::ACptp: return "A-cptp";
    }
    return "?";
}

struct VerifyOptions {
    std::uint64_t seed = 1;
    std::size_t samples = 200;      // random group elements / continuity samples
    std::size_t max_len = 4;        // word length of sampled group elements
    double tol = 1e-10;
};

class DilatedSystem {
public:
    Pipeline pipeline;
    DynamicalSystem system;
    GroupEval phibar;
    std::shared_ptr<StroescuDilation> stroescu;
    std::shared_ptr<VedDilation> ved;

    const EdgeContext& context() const { return system.context(); }

    // Ū(ι(u, v)) as a group element; the representation acts through it.
    GroupElement U(const NodeId& u, const NodeId& v) const { return iota(context(), u, v); }

    // Matrix of ξ ↦ j U(x_1) ⋯ U(x_n) r ξ in payload coordinates; for the VED pipeline the superoperator
    // s ↦ tr₂(ad_{U(x_1)⋯U(x_n)}(s ⊗ ω)).
    CMatrix compressed(const std::vector<GroupElement>& xs) const {
        if (ved) {
            const Eigen::Index d = ved->d();
            GroupElement prod = identity_element();
            for (const auto& x : xs) prod = mul(context(), prod, x);
            // the representation law is checked separately; here only the product element is compressed
            return SuperOp::from_map(d, [&](const CMatrix& s) { return ved->compress(prod, s); }).matrix;
        }
        const PayloadSpace& sp = stroescu->space();
        const auto basis = sp.basis();
        CMatrix out(sp.dim, static_cast<Eigen::Index>(basis.size()));
        for (std::size_t c = 0; c < basis.size(); ++c) {
            FormalVector v = stroescu->r(basis[c]);
            for (auto it = xs.rbegin(); it != xs.rend(); ++it) v = stroescu->U(*it, v);
            out.col(static_cast<Eigen::Index>(c)) = sp.flavor == Flavor::Banach ? CVector(stroescu->j(v).col(0)) : vec(stroescu->j(v));
        }
        return out;
    }

    Report verify(const VerifyOptions& opt = {}) const;
};

namespace detail {

inline bool formal_equal(const FormalVector& a, const FormalVector& b) {
    if (a.terms.size() != b.terms.size()) return false;
    for (std::size_t i = 0; i < a.terms.size(); ++i)
        if (a.terms[i].first != b.terms[i].first || a.terms[i].second != b.terms[i].second) return false;
    return true;
}

inline std::vector<GroupElement> element_sample(const EdgeContext& ctx, Rng& rng, std::size_t n, std::size_t max_len) {
    std::vector<GroupElement> out{identity_element()};
    for (const auto& [u, v] : ctx.edges()) out.push_back(iota(ctx, u, v));
    for (std::size_t i = 0; i < n; ++i) out.push_back(random_element(ctx, rng, max_len));
    return out;
}

inline std::shared_ptr<StroescuDilation> make_stroescu(const DynamicalSystem& sys, GroupEval phibar,
                                                       std::optional<StroescuDilation::Bound> K, const VerifyOptions& opt) {
    auto dil = std::make_shared<StroescuDilation>(sys.phi.context_ptr(), std::move(phibar), sys.space(), std::move(K));
    Rng rng(opt.seed);
    dil->require_bounded(element_sample(sys.context(), rng, opt.samples / 4, opt.max_len), rng, opt.tol);
    return dil;
}

}  // namespace detail

// Identity axiom only. Contraction families give isometric U(x); otherwise K(x) = M^{|x|} with M the
// largest edge norm, and U(x) is bounded by K(x).
inline DilatedSystem theorem_A_pipeline(const DynamicalSystem& sys, const VerifyOptions& opt = {}) {
    if (sys.channels) throw InputError("pipeline A: channel families go through A-cptp");
    auto ext = std::make_shared<NormalFormExtension>(sys.phi, opt.tol);
    DilatedSystem out{Pipeline::A, sys, [ext](const GroupElement& g) { return (*ext)(g); }, nullptr, nullptr};
    const PayloadSpace sp = sys.space();
    Rng rng(opt.seed);
    double M = 0.0;
    for (const auto& [u, v] : sys.context().edges()) M = std::max(M, sp.op_norm(sys.phi(u, v), rng));
    std::optional<StroescuDilation::Bound> K;
    if (M > 1.0 + opt.tol) {
        if (sys.flavor == Flavor::CStar) throw PreconditionError("contraction", "pipeline A (C*): edge values are not contractions");
        K = [M](const GroupElement& x) { return std::pow(M, static_cast<double>(x.length())); };
    }
    out.stroescu = detail::make_stroescu(sys, out.phibar, K, opt);
    return out;
}

inline void require_length(const DynamicalSystem& sys, const char* what) {
    if (!sys.length) throw PreconditionError("geometric growth", std::string(what) + ": no length function given");
    sys.context().require_linear(what);
}

// Divisible family with geometric growth on a linear order.
inline DilatedSystem theorem_B_pipeline(const DynamicalSystem& sys, const VerifyOptions& opt = {}) {
    if (sys.channels) throw InputError("pipeline B: channel families go through A-cptp");
    require_length(sys, "pipeline B");
    auto ext = std::make_shared<FirstCoverExtension>(sys.phi, 1e-9);
    const auto& ctx = sys.context();
    const PayloadSpace sp = sys.space();
    Rng rng(opt.seed);
    Check growth("||phi(u,v) - 1|| - l(u,v)", opt.tol);
    for (const auto& [u, v] : ctx.edges())
        growth.add(sp.op_norm(sys.phi(u, v) - identity(sys.phi.dim()), rng) - (*sys.length)(u, v), edge_str(u, v));
    if (!growth.pass())
        throw PreconditionError("geometric growth", "pipeline B: growth bound fails at " + growth.argmax);
    DilatedSystem out{Pipeline::B, sys, [ext](const GroupElement& g) { return (*ext)(g); }, nullptr, nullptr};
    out.stroescu = detail::make_stroescu(sys, out.phibar, std::nullopt, opt);
    return out;
}

// Exponential family of additive, dissipative generators with geometric growth on a linear order.
inline DilatedSystem theorem_C_pipeline(const DynamicalSystem& sys, const VerifyOptions& opt = {}) {
    if (sys.channels) throw InputError("pipeline C: channel families go through A-cptp");
    if (!sys.generators) throw PreconditionError("generators", "pipeline C: the system carries no generator family");
    require_length(sys, "pipeline C");
    const auto mode = sys.flavor == Flavor::CStar ? SecondCoverExtension::Dissipativity::Schwarz
                                                  : SecondCoverExtension::Dissipativity::Hilbert;
    auto ext = std::make_shared<SecondCoverExtension>(*sys.generators, sys.alpha, mode, 1e-9, opt.seed);
    const auto& ctx = sys.context();
    // ‖αA‖ on the payload space; in the C* flavor bounded above by √h times the Hilbert–Schmidt norm
    Check growth("||alpha A(u,v)|| - l(u,v)", opt.tol);
    for (const auto& [u, v] : ctx.edges()) {
        double n = std::abs(sys.alpha) * spectral_norm((*sys.generators)(u, v));
        if (sys.flavor == Flavor::CStar) n *= std::sqrt(static_cast<double>(*sys.phi.hilbert_dim));
        growth.add(n - (*sys.length)(u, v), edge_str(u, v));
    }
    if (!growth.pass())
        throw PreconditionError("geometric growth", "pipeline C: generator growth bound fails at " + growth.argmax);
    DilatedSystem out{Pipeline::C, sys, [ext](const GroupElement& g) { return (*ext)(g); }, nullptr, nullptr};
    out.stroescu = detail::make_stroescu(sys, out.phibar, std::nullopt, opt);
    return out;
}

// CPTP family: normal form extension of the channels, dilated by the VED unitary representation.
inline DilatedSystem theorem_A_cptp_pipeline(const DynamicalSystem& sys, const VerifyOptions& opt = {}) {
    if (!sys.channels || !sys.phi.hilbert_dim) throw InputError("pipeline A-cptp: system values must be channels");
    const Eigen::Index d = *sys.phi.hilbert_dim;
    for (const auto& [u, v] : sys.context().edges()) {
        Report r = check_cptp(Channel::from_superop(SuperOp(d, sys.phi(u, v))), opt.tol);
        if (!r.pass()) throw PreconditionError("cptp", "pipeline A-cptp: value at " + edge_str(u, v) + " is not CPTP");
    }
    auto ext = std::make_shared<NormalFormExtension>(sys.phi, opt.tol);
    DilatedSystem out{Pipeline::ACptp, sys, [ext](const GroupElement& g) { return (*ext)(g); }, nullptr, nullptr};
    out.ved = std::make_shared<VedDilation>(sys.phi.context_ptr(), out.phibar, d, CVector(basis_vector(d, 0)), opt.tol);
    return out;
}

inline DilatedSystem run_pipeline(Pipeline p, const DynamicalSystem& sys, const VerifyOptions& opt = {}) {
    switch (p) {
        case Pipeline::A: return theorem_A_pipeline(sys, opt);
        case Pipeline::B: return theorem_B_pipeline(sys, opt);
        case Pipeline::C: return theorem_C_pipeline(sys, opt);
        case Pipeline::ACptp: return theorem_A_cptp_pipeline(sys, opt);
    }
    throw std::logic_error("unknown pipeline");
}

inline Report DilatedSystem::verify(const VerifyOptions& opt) const {
    Report rep{"pipeline " + to_string(pipeline) + " on " + system.name};
    const auto& ctx = context();
    Rng rng(opt.seed);

    // Group level: U(u,u) = 1 and U(u,v)U(v,w) = U(u,w) as elements of the edge group.
    Check ident("group identity U(u,u) = 1", 0.0), divis("group divisibility U(u,v)U(v,w) = U(u,w)", 0.0);
    for (const auto& u : ctx.nodes())
        if (ctx.has_edge(u, u)) ident.add_flag(U(u, u).is_identity(), edge_str(u, u));
    for (const auto& [u, v, w] : composable_triples(ctx))
        divis.add_flag(mul(ctx, U(u, v), U(v, w)) == U(u, w), triple_str(u, v, w));
    rep.add(std::move(ident));
    rep.add(std::move(divis));

    // Representation law on tags (exact) and payloads.
    Check law_tags("U(x)U(y)v = U(xy)v on tags", 0.0), law_pay("U(x)U(y)v = U(xy)v on payloads", 1e-12);
    const auto sample = detail::element_sample(ctx, rng, opt.samples / 4, opt.max_len);
    std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
    for (std::size_t i = 0; i < std::max<std::size_t>(opt.samples / 4, 10); ++i) {
        const GroupElement& x = sample[pick(rng)];
        const GroupElement& y = sample[pick(rng)];
        const GroupElement& z = sample[pick(rng)];
        const std::string where = to_string(x) + " " + to_string(y);
        FormalVector v, a, b;
        if (ved) {
            v.terms.emplace_back(z, CMatrix(random_unit_vector(rng, ved->payload_dim())));
            a = ved->apply(x, ved->apply(y, v));
            b = ved->apply(mul(ctx, x, y), v);
        } else {
            v.terms.emplace_back(z, stroescu->space().random(rng));
            a = stroescu->U(x, stroescu->U(y, v));
            b = stroescu->U(mul(ctx, x, y), v);
        }
        law_tags.add_flag(a.tags() == b.tags(), where);
        law_pay.add(spectral_norm(a.terms[0].second - b.terms[0].second), where);
    }
    rep.add(std::move(law_tags));
    rep.add(std::move(law_pay));

    // Compression identity on every edge.
    if (ved) {
        Check comp("max ||Phi(e)(E_ij) - tr2(ad_U(e)(E_ij x w))||_1", opt.tol);
        const Eigen::Index d = ved->d();
        for (const auto& [u, v] : ctx.edges()) {
            const Channel ch = Channel::from_superop(SuperOp(d, system.phi(u, v)));
            double worst = 0.0;
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j) {
                    const CMatrix e = matrix_unit(d, i, j);
                    worst = std::max(worst, trace_norm(ch.apply(e) - ved->compress(U(u, v), e)));
                }
            comp.add(worst, edge_str(u, v));
        }
        rep.add(std::move(comp));
    } else {
        Check comp("||j U(e) r - phi(e)||", opt.tol);
        const PayloadSpace& sp = stroescu->space();
        for (const auto& [u, v] : ctx.edges()) comp.add(spectral_norm(compressed({U(u, v)}) - system.phi(u, v)), edge_str(u, v));
        rep.add(std::move(comp));
        Check jr("||j r - 1||", opt.tol);
        jr.add(spectral_norm(compressed({}) - identity(system.phi.dim())), "j r");
        rep.add(std::move(jr));
        if (!stroescu->isometric())
            rep.notes.push_back("edge values exceed norm 1: U(x) is bounded by K(x) = M^|x| and is not isometric");
        if (sp.flavor == Flavor::CStar) {
            std::vector<CMatrix> as;
            for (int i = 0; i < 6; ++i) as.push_back(random_matrix(rng, sp.h));
            Report cs = check_cstar_dilation(*stroescu, as, std::vector<GroupElement>(sample.begin(), sample.begin() + std::min<std::size_t>(sample.size(), 12)), 1e-9);
            for (auto& c : cs.checks) rep.add(std::move(c));
            for (auto& n : cs.notes) rep.notes.push_back(n);
        }
    }

    if (pipeline == Pipeline::B || pipeline == Pipeline::C) {
        const auto samples = random_continuity_samples(ctx, stroescu->space(), rng, opt.samples, opt.max_len);
        rep.add(continuity_modulus_check(phibar, ctx, *system.length,
                                         pipeline == Pipeline::B ? CoverKind::First : CoverKind::Second,
                                         stroescu->space(), samples, opt.tol));
    }
    return rep;
}

// ---- one-parameter factorization --------------------------------------------------------------

struct OneParamReport {
    Report report;              // group identity and operator identity
    Check semigroup;            // compressed ‖jU(t₀+a+b)r - jU(t₀+a)U(t₀+b)r‖; positive for memoryful families
    Check semigroup_group;      // the same law at the level of group elements
};

// U(t) = Ū(ι(t, t₀)) when (t, t₀) ∈ E, else Ū(ι(t₀, t))⁻¹.
inline GroupElement one_param_element(const EdgeContext& ctx, const NodeId& t, const NodeId& t0) {
    if (ctx.has_edge(t, t0)) return iota(ctx, t, t0);
    return inv(iota(ctx, t0, t));
}

inline OneParamReport one_param_factorization(const DilatedSystem& ds, const NodeId& t0, double tol = 1e-12) {
    const auto& ctx = ds.context();
    ctx.require_linear("one_param_factorization");
    OneParamReport out{Report{"one-parameter factorization"}, Check("semigroup law (compressed)", tol),
                       Check("semigroup law (group)", 0.0)};
    Check grp("iota(t,s) = iota(t,t0) iota(s,t0)^-1", 0.0), op("||j U(t)U(s)^-1 r - j U(t,s) r||", tol);
    for (const auto& [t, s] : ctx.edges()) {
        const GroupElement Ut = one_param_element(ctx, t, t0), Us = one_param_element(ctx, s, t0);
        grp.add_flag(mul(ctx, Ut, inv(Us)) == iota(ctx, t, s), edge_str(t, s));
        op.add(spectral_norm(ds.compressed({Ut, inv(Us)}) - ds.compressed({iota(ctx, t, s)})), edge_str(t, s));
    }
    out.report.add(std::move(grp));
    out.report.add(std::move(op));
    Check base("U(t0) = 1", 0.0);
    base.add_flag(one_param_element(ctx, t0, t0).is_identity(), t0.str());
    out.report.add(std::move(base));

    // t₀ + a + b on numeric keys, for nodes on the same side of t₀.
    for (const auto& a : ctx.nodes())
        for (const auto& b : ctx.nodes()) {
            const NodeId ab = a + b - t0;
            if (!ctx.has_node(ab) || a == t0 || b == t0) continue;
            if (!ctx.has_edge(a, t0) || !ctx.has_edge(b, t0) || !ctx.has_edge(ab, t0)) continue;
            const GroupElement Ua = one_param_element(ctx, a, t0), Ub = one_param_element(ctx, b, t0),
                               Uab = one_param_element(ctx, ab, t0);
            const std::string where = "a=" + (a - t0).str() + " b=" + (b - t0).str();
            out.semigroup.add(spectral_norm(ds.compressed({Uab}) - ds.compressed({Ua, Ub})), where);
            out.semigroup_group.add_flag(mul(ctx, Ua, Ub) == Uab, where);
        }
    return out;
}

}  // namespace gdyn
