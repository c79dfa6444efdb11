#pragma once

// Seeded random generators and the fixture paths shared by the test binaries.

#include <random>

#include <eigenpaths/core.hpp>

namespace fixtures {

using eigenpaths::CMatrix;
using eigenpaths::Complex;
using eigenpaths::MatrixPath;

inline Complex random_complex(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    return {d(rng), d(rng)};
}

inline CMatrix random_matrix(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    CMatrix m(n, n);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = random_complex(rng, scale);
    return m;
}

inline CMatrix diag(std::initializer_list<Complex> d) {
    CMatrix m = CMatrix::Zero(Eigen::Index(d.size()), Eigen::Index(d.size()));
    Eigen::Index i = 0;
    for (Complex z : d) m(i, i) = z, ++i;
    return m;
}

/// (1 - 2 alpha) diag(1, -1): two straight lines crossing at alpha = 1/2.
inline MatrixPath crossing() { return MatrixPath::convex(diag({1.0, -1.0}), diag({-1.0, 1.0})); }

/// A = diag(1, -1), B = V diag(i, -i) V^{-1} with B-eigenvectors (1,1), (-1,1):
/// lambda = 2, mu = 2i, v1 = 1, v2 = -1, repeated eigenvalue at alpha = 1/2.
inline CMatrix both_b() {
    CMatrix v(2, 2);
    v << 1.0, -1.0, 1.0, 1.0;
    return v * diag({Complex(0, 1), Complex(0, -1)}) * v.inverse();
}
inline MatrixPath both_instance() { return MatrixPath::convex(diag({1.0, -1.0}), both_b()); }

/// A 3x3 convex path with C(1/2) = c I: A = S diag(1, 2, 3+i) S^{-1}, B = 2cI - A.
inline MatrixPath through_scalar() {
    CMatrix s(3, 3);
    s << 1.0, 0.3, Complex(0.0, 0.2), -0.2, 1.0, 0.4, Complex(0.1, 0.1), -0.3, 1.0;
    const CMatrix a = s * diag({1.0, 2.0, Complex(3.0, 1.0)}) * s.inverse();
    const Complex c(2.0, 0.5);
    const CMatrix b = 2.0 * c * CMatrix::Identity(3, 3) - a;
    return MatrixPath::convex(a, b);
}

}  // namespace fixtures
