#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdyn {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline void require_square(const CMatrix& a, const char* what) {
    if (a.rows() != a.cols())
        throw DimensionError(std::string(what) + ": expected a square matrix, got " + std::to_string(a.rows()) +
                             "x" + std::to_string(a.cols()));
}

inline void require_same_shape(const CMatrix& a, const CMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError(std::string(what) + ": shape mismatch");
}

inline bool all_finite(const CMatrix& a) {
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (!std::isfinite(a.data()[i].real()) || !std::isfinite(a.data()[i].imag())) return false;
    return true;
}

inline CMatrix identity(Eigen::Index d) { return CMatrix::Identity(d, d); }

inline CMatrix matrix_unit(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
    CMatrix e = CMatrix::Zero(d, d);
    e(i, j) = 1.0;
    return e;
}

inline CVector basis_vector(Eigen::Index d, Eigen::Index i) {
    CVector e = CVector::Zero(d);
    e(i) = 1.0;
    return e;
}

namespace pauli {
inline CMatrix x() { CMatrix m(2, 2); m << 0, 1, 1, 0; return m; }
inline CMatrix y() { CMatrix m(2, 2); m << 0, cplx(0, -1), cplx(0, 1), 0; return m; }
inline CMatrix z() { CMatrix m(2, 2); m << 1, 0, 0, -1; return m; }
}  // namespace pauli

// Kronecker product; the first factor is the slow index.
inline CMatrix tensor(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline CVector tensor(const CVector& a, const CVector& b) {
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

inline CMatrix partial_trace_second(const CMatrix& m, Eigen::Index d1, Eigen::Index d2) {
    if (m.rows() != d1 * d2 || m.cols() != d1 * d2)
        throw DimensionError("partial_trace_second: matrix is not (d1*d2)x(d1*d2)");
    CMatrix out = CMatrix::Zero(d1, d1);
    for (Eigen::Index i = 0; i < d1; ++i)
        for (Eigen::Index j = 0; j < d1; ++j)
            for (Eigen::Index k = 0; k < d2; ++k) out(i, j) += m(i * d2 + k, j * d2 + k);
    return out;
}

inline CMatrix partial_trace_first(const CMatrix& m, Eigen::Index d1, Eigen::Index d2) {
    if (m.rows() != d1 * d2 || m.cols() != d1 * d2)
        throw DimensionError("partial_trace_first: matrix is not (d1*d2)x(d1*d2)");
    CMatrix out = CMatrix::Zero(d2, d2);
    for (Eigen::Index i = 0; i < d2; ++i)
        for (Eigen::Index j = 0; j < d2; ++j)
            for (Eigen::Index k = 0; k < d1; ++k) out(i, j) += m(k * d2 + i, k * d2 + j);
    return out;
}

inline Eigen::VectorXd singular_values(const CMatrix& a) {
    if (a.size() == 0) return Eigen::VectorXd();
    return Eigen::BDCSVD<CMatrix>(a).singularValues();
}

inline double spectral_norm(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    return singular_values(a)(0);
}


inline double trace_norm(const CMatrix& a) {
    require_square(a, "trace_norm");
    return singular_values(a).sum();
}

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) {
    require_square(a, "commutator");
    require_same_shape(a, b, "commutator");
    return a * b - b * a;
}

inline CMatrix anticommutator(const CMatrix& a, const CMatrix& b) {
    require_square(a, "anticommutator");
    require_same_shape(a, b, "anticommutator");
    return a * b + b * a;
}

// ad_u(s) = u s u*
inline CMatrix adjoint_action(const CMatrix& u, const CMatrix& s) {
    require_square(u, "adjoint_action");
    require_same_shape(u, s, "adjoint_action");
    return u * s * u.adjoint();
}

inline CMatrix hermitian_part(const CMatrix& a) { return (a + a.adjoint()) / 2.0; }

inline Eigen::VectorXd hermitian_eigenvalues(const CMatrix& h) {
    return Eigen::SelfAdjointEigenSolver<CMatrix>(hermitian_part(h), Eigen::EigenvaluesOnly).eigenvalues();
}

inline bool is_hermitian(const CMatrix& a, double tol = 1e-10) {
    if (a.rows() != a.cols()) return false;
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary(const CMatrix& u, double tol = 1e-10) {
    if (u.rows() != u.cols()) return false;
    return spectral_norm(u.adjoint() * u - identity(u.rows())) <= tol;
}

// Hilbert-space dissipativity: the Hermitian part is negative semidefinite.
inline bool is_dissipative_hilbert(const CMatrix& a, double tol = 1e-10) {
    require_square(a, "is_dissipative_hilbert");
    if (a.size() == 0) return true;
    return hermitian_eigenvalues(a).maxCoeff() <= tol;
}

inline bool is_psd(const CMatrix& a, double tol = 1e-10) {
    require_square(a, "is_psd");
    if (a.size() == 0) return true;
    if (spectral_norm(a - a.adjoint()) / 2.0 > tol) return false;
    return hermitian_eigenvalues(a).minCoeff() >= -tol;
}

// Scaling and squaring with the degree-13 diagonal Padé approximant.
inline CMatrix expm(const CMatrix& a) {
    require_square(a, "expm");
    const Eigen::Index n = a.rows();
    if (n == 0) return a;
    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 == 0.0) return identity(n);  // exact, so loop edges give 1 without rounding
    int s = 0;
    if (norm1 > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
    const CMatrix as = a / std::ldexp(1.0, s);
    const CMatrix id = identity(n);
    const CMatrix a2 = as * as, a4 = a2 * a2, a6 = a4 * a2;
    const CMatrix u = as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const CMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    CMatrix r = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < s; ++i) r = r * r;
    return r;
}

// Nodes and weights of the n-point Gauss–Legendre rule on [0, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = (1.0 - z) / 2.0;
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

// d/dt expm(X + tY) as the integral over s in [0,1] of e^{(1-s)M} Y e^{sM}, M = X + tY.
// Composite Gauss–Legendre; the panel count doubles until two estimates agree to tol.
inline CMatrix exp_derivative(const CMatrix& x, const CMatrix& y, double t, double tol = 1e-10) {
    require_square(x, "exp_derivative");
    require_same_shape(x, y, "exp_derivative");
    const CMatrix m = x + t * y;
    static const auto rule = gauss_legendre(8);
    auto estimate = [&](int panels) {
        CMatrix acc = CMatrix::Zero(x.rows(), x.cols());
        const double h = 1.0 / panels;
        const CMatrix step = expm(h * m);
        CMatrix left = identity(x.rows());  // e^{a M} at panel start a
        for (int p = 0; p < panels; ++p) {
            const double a = p * h;
            for (std::size_t k = 0; k < rule.first.size(); ++k) {
                const double s = a + h * rule.first[k];
                const CMatrix right = left * expm((s - a) * m);
                acc += (h * rule.second[k]) * (expm((1.0 - s) * m) * y * right);
            }
            left = left * step;
        }
        return acc;
    };
    CMatrix prev = estimate(1);
    for (int panels = 2; panels <= 1024; panels *= 2) {
        CMatrix cur = estimate(panels);
        if (spectral_norm(cur - prev) < tol * std::max(1.0, spectral_norm(cur))) return cur;
        prev = std::move(cur);
    }
    return prev;
}

// Column-stacking vectorization: vec(X)[i + j*d] = X(i, j).
inline CVector vec(const CMatrix& x) {
    CVector v(x.size());
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index i = 0; i < x.rows(); ++i) v(i + j * x.rows()) = x(i, j);
    return v;
}

inline CMatrix unvec(const CVector& v, Eigen::Index rows) {
    if (rows <= 0 || v.size() % rows != 0) throw DimensionError("unvec: length not divisible by rows");
    const Eigen::Index cols = v.size() / rows;
    CMatrix x(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = v(i + j * rows);
    return x;
}

// Linear map on M_d stored as a d^2 x d^2 matrix on column-stacked vectors.
struct SuperOp {
    Eigen::Index dim = 0;
    CMatrix matrix;

    SuperOp() = default;
    SuperOp(Eigen::Index d, CMatrix m) : dim(d), matrix(std::move(m)) {
        if (matrix.rows() != d * d || matrix.cols() != d * d) throw DimensionError("SuperOp: matrix is not d^2 x d^2");
    }

    static SuperOp from_map(Eigen::Index d, const std::function<CMatrix(const CMatrix&)>& f) {
        CMatrix m(d * d, d * d);
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index i = 0; i < d; ++i) m.col(i + j * d) = vec(f(matrix_unit(d, i, j)));
        return SuperOp(d, std::move(m));
    }
    static SuperOp identity_map(Eigen::Index d) { return SuperOp(d, gdyn::identity(d * d)); }
    static SuperOp zero(Eigen::Index d) { return SuperOp(d, CMatrix::Zero(d * d, d * d)); }
    // X -> a X b
    static SuperOp sandwich(const CMatrix& a, const CMatrix& b) {
        require_square(a, "SuperOp::sandwich");
        require_same_shape(a, b, "SuperOp::sandwich");
        return SuperOp(a.rows(), tensor(CMatrix(b.transpose()), a));
    }
    // X -> [h, X]
    static SuperOp commutator_with(const CMatrix& h) {
        const CMatrix id = gdyn::identity(h.rows());
        return SuperOp(h.rows(), tensor(id, h) - tensor(CMatrix(h.transpose()), id));
    }

    CMatrix apply(const CMatrix& x) const {
        if (x.rows() != dim || x.cols() != dim) throw DimensionError("SuperOp::apply: argument shape");
        return unvec(matrix * vec(x), dim);
    }

    SuperOp operator*(const SuperOp& o) const { return SuperOp(dim, matrix * o.matrix); }
    SuperOp operator+(const SuperOp& o) const { return SuperOp(dim, matrix + o.matrix); }
    SuperOp operator-(const SuperOp& o) const { return SuperOp(dim, matrix - o.matrix); }
    friend SuperOp operator*(cplx c, const SuperOp& s) { return SuperOp(s.dim, c * s.matrix); }
};

inline Eigen::Index isqrt_exact(Eigen::Index n) {
    auto r = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
    if (r * r != n) throw DimensionError("dimension " + std::to_string(n) + " is not a perfect square");
    return r;
}

}  // namespace gdyn
