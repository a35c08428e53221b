#pragma once

#include "linops.hpp"

#include <random>

namespace gdyn {

using Rng = std::mt19937_64;

inline CMatrix random_block(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = cplx(n(rng), n(rng));
    return m;
}

inline CMatrix random_matrix(Rng& rng, Eigen::Index d, double scale = 1.0) { return random_block(rng, d, d, scale); }

inline CVector random_unit_vector(Rng& rng, Eigen::Index d) {
    CVector v = random_block(rng, d, 1).col(0);
    return v / v.norm();
}

inline CMatrix random_hermitian(Rng& rng, Eigen::Index d, double scale = 1.0) {
    return hermitian_part(random_matrix(rng, d, scale));
}

inline CMatrix random_unitary(Rng& rng, Eigen::Index d) {
    Eigen::HouseholderQR<CMatrix> qr(random_matrix(rng, d));
    CMatrix q = qr.householderQ();
    CMatrix r = qr.matrixQR();
    for (Eigen::Index i = 0; i < d; ++i) {
        cplx p = r(i, i) / std::abs(r(i, i));
        q.col(i) *= p;
    }
    return q;
}

// Columns orthonormal: rows x cols with rows >= cols.
inline CMatrix random_isometry(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    return random_unitary(rng, rows).leftCols(cols);
}

// Hermitian part is negative semidefinite, with a random skew part.
inline CMatrix random_dissipative(Rng& rng, Eigen::Index d, double scale = 1.0) {
    CMatrix b = random_matrix(rng, d, scale);
    CMatrix h = random_hermitian(rng, d, scale);
    return -(b.adjoint() * b) / 2.0 + cplx(0, 1) * h;
}

// Kraus operators of a random CPTP map on M_d with k operators.
inline std::vector<CMatrix> random_kraus(Rng& rng, Eigen::Index d, Eigen::Index k) {
    CMatrix v = random_isometry(rng, d * k, d);
    std::vector<CMatrix> out;
    for (Eigen::Index i = 0; i < k; ++i) out.push_back(v.middleRows(i * d, d));
    return out;
}

}  // namespace gdyn
