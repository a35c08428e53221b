#pragma once

#include "dynamics.hpp"
#include "linops.hpp"
#include "report.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdyn {

struct NotCptpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Linear map on M_d (Schrödinger picture) held by its Choi matrix Σ Φ(E_ij) ⊗ E_ij, so that
// choi(a*d + i, b*d + j) = Φ(E_ij)(a, b).
struct Channel {
    Eigen::Index dim = 0;
    CMatrix choi;
    std::optional<std::vector<CMatrix>> kraus;

    static Channel from_superop(const SuperOp& phi) {
        const Eigen::Index d = phi.dim;
        Channel ch;
        ch.dim = d;
        ch.choi = CMatrix::Zero(d * d, d * d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) ch.choi += tensor(phi.apply(matrix_unit(d, i, j)), matrix_unit(d, i, j));
        return ch;
    }

    static Channel from_choi(const CMatrix& choi) {
        require_square(choi, "Channel::from_choi");
        Channel ch;
        ch.dim = isqrt_exact(choi.rows());
        ch.choi = choi;
        return ch;
    }

    // Φ(s) = Σ Kᵢ s Kᵢ*
    static Channel from_kraus(const std::vector<CMatrix>& ks) {
        if (ks.empty()) throw InputError("Channel::from_kraus: empty Kraus list");
        const Eigen::Index d = ks[0].rows();
        for (const auto& k : ks)
            if (k.rows() != d || k.cols() != d) throw DimensionError("Channel::from_kraus: Kraus operators differ in shape");
        SuperOp phi = SuperOp::zero(d);
        for (const auto& k : ks) phi = phi + SuperOp::sandwich(k, k.adjoint());
        Channel ch = from_superop(phi);
        ch.kraus = ks;
        return ch;
    }

    CMatrix apply(const CMatrix& s) const {
        if (s.rows() != dim || s.cols() != dim) throw DimensionError("Channel::apply: argument shape");
        CMatrix out = CMatrix::Zero(dim, dim);
        for (Eigen::Index a = 0; a < dim; ++a)
            for (Eigen::Index b = 0; b < dim; ++b)
                for (Eigen::Index i = 0; i < dim; ++i)
                    for (Eigen::Index j = 0; j < dim; ++j) out(a, b) += s(i, j) * choi(a * dim + i, b * dim + j);
        return out;
    }

    SuperOp superop() const {
        return SuperOp::from_map(dim, [this](const CMatrix& x) { return apply(x); });
    }

    CMatrix apply_kraus(const CMatrix& s) const {
        if (!kraus) throw std::logic_error("Channel::apply_kraus: no Kraus list");
        CMatrix out = CMatrix::Zero(dim, dim);
        for (const auto& k : *kraus) out += k * s * k.adjoint();
        return out;
    }
};

// Complete positivity (Choi PSD) and trace preservation (partial trace over the output factor is 1).
inline Report check_cptp(const Channel& ch, double tol = 1e-10) {
    Report rep{"CPTP"};
    Check herm("||choi - choi*||", tol), psd("-lambda_min(choi)", tol), tp("||tr_out(choi) - 1||", tol);
    herm.add(spectral_norm(ch.choi - ch.choi.adjoint()), "choi");
    psd.add(-hermitian_eigenvalues(ch.choi).minCoeff(), "choi");
    tp.add(spectral_norm(partial_trace_first(ch.choi, ch.dim, ch.dim) - identity(ch.dim)), "choi");
    rep.add(std::move(herm));
    rep.add(std::move(psd));
    rep.add(std::move(tp));
    if (ch.kraus) {
        Check norm("||sum K*K - 1||", tol), rec("max ||Phi(E_ij) - sum K E_ij K*||_1", tol);
        CMatrix s = CMatrix::Zero(ch.dim, ch.dim);
        for (const auto& k : *ch.kraus) s += k.adjoint() * k;
        norm.add(spectral_norm(s - identity(ch.dim)), "kraus");
        for (Eigen::Index i = 0; i < ch.dim; ++i)
            for (Eigen::Index j = 0; j < ch.dim; ++j) {
                const CMatrix e = matrix_unit(ch.dim, i, j);
                rec.add(trace_norm(ch.apply(e) - ch.apply_kraus(e)), "E" + std::to_string(i) + std::to_string(j));
            }
        rep.add(std::move(norm));
        rep.add(std::move(rec));
    }
    return rep;
}

// Kraus operators from the Choi eigendecomposition: K(a, i) = √λ v(a*d + i). Eigenvalues at or below
// rel_cutoff · λ_max are dropped.
inline Channel kraus_from_choi(const Channel& ch, double tol = 1e-10, double rel_cutoff = 1e-12) {
    Report r = check_cptp(Channel{ch.dim, ch.choi, std::nullopt}, tol);
    if (!r.pass()) throw NotCptpError("kraus_from_choi: channel is not CPTP within tolerance");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(ch.choi));
    const Eigen::VectorXd lam = es.eigenvalues();
    const double lmax = lam.maxCoeff();
    std::vector<CMatrix> ks;
    for (Eigen::Index n = lam.size(); n-- > 0;) {
        if (lam(n) <= rel_cutoff * lmax) continue;
        CMatrix k(ch.dim, ch.dim);
        for (Eigen::Index a = 0; a < ch.dim; ++a)
            for (Eigen::Index i = 0; i < ch.dim; ++i) k(a, i) = std::sqrt(lam(n)) * es.eigenvectors()(a * ch.dim + i, n);
        ks.push_back(std::move(k));
    }
    Channel out = ch;
    out.kraus = std::move(ks);
    return out;
}

// v ξ = Σᵢ Kᵢ ξ ⊗ eᵢ and vᵢ ξ = ξ ⊗ eᵢ on ℂ^d ⊗ ℂ^k; the partition operators satisfy Kᵢ* = v* vᵢ.
struct IsometricPartition {
    CMatrix v;
    std::vector<CMatrix> parts;
};

inline IsometricPartition isometric_partition(const std::vector<CMatrix>& kraus) {
    if (kraus.empty()) throw InputError("isometric_partition: empty Kraus list");
    const Eigen::Index d = kraus[0].rows(), k = static_cast<Eigen::Index>(kraus.size());
    IsometricPartition out;
    out.v = CMatrix::Zero(d * k, d);
    for (Eigen::Index i = 0; i < k; ++i) {
        CMatrix vi = CMatrix::Zero(d * k, d);
        for (Eigen::Index a = 0; a < d; ++a) {
            vi(a * k + i, a) = 1.0;
            for (Eigen::Index b = 0; b < d; ++b) out.v(a * k + i, b) = kraus[static_cast<std::size_t>(i)](a, b);
        }
        out.parts.push_back(std::move(vi));
    }
    return out;
}

inline Report check_isometric_partition(const IsometricPartition& p, const std::vector<CMatrix>& kraus, double tol = 1e-12) {
    Report rep{"isometric partition"};
    const Eigen::Index d = p.v.cols();
    Check vv("||v*v - 1||", tol), orth("||v_j* v_i - delta_ij||", tol), sum("||sum v_i v_i* - 1||", tol),
        w("||w_i - v* v_i||", tol);
    vv.add(spectral_norm(p.v.adjoint() * p.v - identity(d)), "v");
    CMatrix s = CMatrix::Zero(p.v.rows(), p.v.rows());
    for (std::size_t i = 0; i < p.parts.size(); ++i) {
        s += p.parts[i] * p.parts[i].adjoint();
        for (std::size_t j = 0; j < p.parts.size(); ++j) {
            CMatrix expect = i == j ? identity(d) : CMatrix::Zero(d, d);
            orth.add(spectral_norm(p.parts[j].adjoint() * p.parts[i] - expect), std::to_string(i) + "," + std::to_string(j));
        }
        w.add(spectral_norm(kraus[i].adjoint() - p.v.adjoint() * p.parts[i]), std::to_string(i));
    }
    sum.add(spectral_norm(s - identity(p.v.rows())), "parts");
    rep.add(std::move(vv));
    rep.add(std::move(orth));
    rep.add(std::move(sum));
    rep.add(std::move(w));
    return rep;
}

struct PureState {
    CVector vector;
    CMatrix matrix;

    static PureState of(const CVector& v) {
        const double n = v.norm();
        if (!(n > 0)) throw InputError("PureState: zero vector");
        PureState s;
        s.vector = v / n;
        s.matrix = s.vector * s.vector.adjoint();
        return s;
    }
};

// Reflection u on ℂ^d ⊗ E, E = ℂ^d ⊕ (ℂ^d ⊗ ℂ^k), with Φ(s) = tr_E(u (s ⊗ ω) u*).
struct KrausDilation {
    Eigen::Index d = 0;
    Eigen::Index env_dim = 0;
    CMatrix unitary;
    PureState state;

    CMatrix apply(const CMatrix& s) const {
        const CMatrix big = unitary * tensor(s, state.matrix) * unitary.adjoint();
        return partial_trace_second(big, d, env_dim);
    }
};

// D = Σᵢ Kᵢ ⊗ vᵢ maps ℂ^d ⊗ ℂ^d isometrically into ℂ^d ⊗ ℂ^d ⊗ ℂ^k, and u = [[0, D*], [D, 1 - DD*]] on
// the two summands of ℂ^d ⊗ E. The Kraus list is zero-padded to pad_to operators when given.
inline KrausDilation kraus_ii_dilation(const Channel& ch, const CVector& xi, std::optional<Eigen::Index> pad_to = {},
                                       double tol = 1e-10) {
    const Eigen::Index d = ch.dim;
    if (xi.size() != d) throw DimensionError("kraus_ii_dilation: state vector has the wrong size");
    Channel kc = ch.kraus ? ch : kraus_from_choi(ch, tol);
    if (ch.kraus) {
        Report r = check_cptp(kc, tol);
        if (!r.pass()) throw NotCptpError("kraus_ii_dilation: channel is not CPTP within tolerance");
    }
    std::vector<CMatrix> ks = *kc.kraus;
    const Eigen::Index k = pad_to.value_or(static_cast<Eigen::Index>(ks.size()));
    if (k < static_cast<Eigen::Index>(ks.size())) throw InputError("kraus_ii_dilation: padding below the Kraus rank");
    while (static_cast<Eigen::Index>(ks.size()) < k) ks.push_back(CMatrix::Zero(d, d));

    const IsometricPartition p = isometric_partition(ks);
    CMatrix D = CMatrix::Zero(d * d * k, d * d);
    for (Eigen::Index i = 0; i < k; ++i) D += tensor(ks[static_cast<std::size_t>(i)], p.parts[static_cast<std::size_t>(i)]);

    const Eigen::Index env = d + d * k, n = d * env;
    // embeddings of ℂ^d⊗ℂ^d (ζ ⊗ ι₁η) and ℂ^d⊗ℂ^d⊗ℂ^k (ζ ⊗ ι₂(η ⊗ eᵢ)) into ℂ^d ⊗ E
    CMatrix j1 = CMatrix::Zero(n, d * d), j2 = CMatrix::Zero(n, d * d * k);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) {
            j1(a * env + b, a * d + b) = 1.0;
            for (Eigen::Index i = 0; i < k; ++i) j2(a * env + d + b * k + i, (a * d + b) * k + i) = 1.0;
        }
    const CMatrix DD = D * D.adjoint();
    KrausDilation out;
    out.d = d;
    out.env_dim = env;
    out.unitary = j2 * D * j1.adjoint() + j1 * D.adjoint() * j2.adjoint() +
                  j2 * (identity(d * d * k) - DD) * j2.adjoint();
    CVector e1 = CVector::Zero(env);
    e1.head(d) = xi;
    out.state = PureState::of(e1);
    return out;
}

inline Report check_kraus_dilation(const KrausDilation& kd, const Channel& ch, double tol = 1e-10) {
    Report rep{"Kraus II dilation"};
    const Eigen::Index n = kd.unitary.rows();
    Check un("||u u* - 1||", tol), sa("||u - u*||", tol), sq("||u^2 - 1||", tol), rec("max ||Phi(E_ij) - tr2(ad_u(E_ij x w))||_1", tol);
    un.add(spectral_norm(kd.unitary * kd.unitary.adjoint() - identity(n)), "u");
    sa.add(spectral_norm(kd.unitary - kd.unitary.adjoint()), "u");
    sq.add(spectral_norm(kd.unitary * kd.unitary - identity(n)), "u");
    for (Eigen::Index i = 0; i < kd.d; ++i)
        for (Eigen::Index j = 0; j < kd.d; ++j) {
            const CMatrix e = matrix_unit(kd.d, i, j);
            rec.add(trace_norm(ch.apply(e) - kd.apply(e)), "E" + std::to_string(i) + std::to_string(j));
        }
    rep.add(std::move(un));
    rep.add(std::move(sa));
    rep.add(std::move(sq));
    rep.add(std::move(rec));
    return rep;
}

// Common random channels for tests and demos.
inline Channel random_channel(Rng& rng, Eigen::Index d, Eigen::Index k) { return Channel::from_kraus(random_kraus(rng, d, k)); }

inline Channel unitary_channel(const CMatrix& u) { return Channel::from_kraus({u}); }

inline Channel amplitude_damping(double gamma) {
    CMatrix k0(2, 2), k1(2, 2);
    k0 << 1, 0, 0, std::sqrt(1 - gamma);
    k1 << 0, std::sqrt(gamma), 0, 0;
    return Channel::from_kraus({k0, k1});
}

inline Channel depolarizing(Eigen::Index d, double p) {
    // Φ(s) = (1 - p) s + p tr(s) 1/d
    SuperOp phi = SuperOp::from_map(d, [d, p](const CMatrix& s) {
        return CMatrix((1 - p) * s + p * s.trace() * identity(d) / static_cast<double>(d));
    });
    return Channel::from_superop(phi);
}

}  // namespace gdyn
