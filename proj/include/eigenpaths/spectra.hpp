#pragma once

// Dense eigenvalues, monic polynomial roots, characteristic polynomials and
// discriminants. Eigenvalues and polynomial roots are computed by unrelated
// algorithms so each can serve as the other's oracle.

#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "core.hpp"

namespace eigenpaths {

struct SpectraConfig {
    double eig_tol = 1e-9;
    double root_tol = 1e-10;
    int root_max_iter = 800;
    std::size_t char_poly_cap = 64;
};

/// t^n + a_{n-1} t^{n-1} + ... + a_0, stored low to high without the leading 1.
struct MonicPoly {
    std::vector<Complex> coeffs;

    MonicPoly() = default;
    explicit MonicPoly(std::vector<Complex> a) : coeffs(std::move(a)) {
        if (coeffs.empty()) domain_error("monic polynomial must have degree >= 1");
        for (Complex c : coeffs)
            if (!is_finite(c)) domain_error("monic polynomial has a non-finite coefficient");
    }

    /// Expands prod_k (t - r_k).
    static MonicPoly from_roots(const std::vector<Complex>& roots) {
        std::vector<Complex> c{Complex(1.0)};
        for (Complex r : roots) {
            std::vector<Complex> next(c.size() + 1, Complex{});
            for (std::size_t k = 0; k < c.size(); ++k) {
                next[k + 1] += c[k];
                next[k] -= r * c[k];
            }
            c = std::move(next);
        }
        c.pop_back();
        return MonicPoly(std::move(c));
    }

    std::size_t degree() const { return coeffs.size(); }

    Complex operator()(Complex z) const {
        Complex r(1.0);
        for (std::size_t k = coeffs.size(); k-- > 0;) r = r * z + coeffs[k];
        return r;
    }

    /// Value and derivative by Horner.
    std::pair<Complex, Complex> value_and_slope(Complex z) const {
        Complex p(1.0), dp(0.0);
        for (std::size_t k = coeffs.size(); k-- > 0;) {
            dp = dp * z + p;
            p = p * z + coeffs[k];
        }
        return {p, dp};
    }

    /// Coefficient max-norm distance, ||P - Q|| = max_j |a_j - b_j|.
    double distance(const MonicPoly& o) const {
        if (o.degree() != degree()) domain_error("polynomial distance: degree mismatch");
        double d = 0.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k) d = std::max(d, std::abs(coeffs[k] - o.coeffs[k]));
        return d;
    }

    double max_coeff() const {
        double m = 0.0;
        for (Complex c : coeffs) m = std::max(m, std::abs(c));
        return m;
    }
};

// ---------------------------------------------------------------------------
// Eigenvalues

namespace detail {

inline std::vector<Complex> eigenvalues_2x2(const CMatrix& m) {
    const Complex tr = m(0, 0) + m(1, 1);
    const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const Complex s = std::sqrt(tr * tr - 4.0 * det);
    // Pick the sign that avoids cancellation, recover the other root from det.
    const Complex q = (std::abs(tr + s) >= std::abs(tr - s)) ? 0.5 * (tr + s) : 0.5 * (tr - s);
    if (q == Complex{}) return {Complex{}, Complex{}};
    return {q, det / q};
}

}  // namespace detail

/// Multiset spectrum of a square complex matrix. 2x2 uses the closed
/// quadratic formula; larger sizes use Hessenberg reduction followed by
/// shifted complex QR.
inline Spectrum eigenvalues(const CMatrix& m, const SpectraConfig& cfg = {}) {
    (void)cfg;
    require_square(m, "eigenvalues");
    const auto n = m.rows();
    if (n == 1) return Spectrum({m(0, 0)});
    if (n == 2) return Spectrum(detail::eigenvalues_2x2(m));
    Eigen::ComplexEigenSolver<CMatrix> solver;
    solver.setMaxIterations(60 * int(n));
    solver.compute(m, false);
    if (solver.info() != Eigen::Success)
        numerical_error("eigenvalues: QR iteration did not converge within " + std::to_string(60 * n) +
                        " sweeps for a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    std::vector<Complex> v(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    return Spectrum(std::move(v));
}

/// Default eigenvalue tolerance tol_eig = 1e-9 (1 + ||M||_2).
inline double tol_eig(const CMatrix& m, const SpectraConfig& cfg = {}) {
    return cfg.eig_tol * (1.0 + m.operatorNorm());
}

// ---------------------------------------------------------------------------
// Characteristic polynomial

namespace detail {

inline bool is_upper_hessenberg(const CMatrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = j + 2; i < m.rows(); ++i)
            if (m(i, j) != Complex{}) return false;
    return true;
}

}  // namespace detail

/// det(tI - M) via unitary Hessenberg reduction and the La Budde recurrence.
/// Matrices that are already upper Hessenberg (companion matrices) are used
/// as given.
inline MonicPoly char_poly(const CMatrix& m, const SpectraConfig& cfg = {}) {
    require_square(m, "char_poly");
    const std::size_t n = std::size_t(m.rows());
    if (n > cfg.char_poly_cap)
        domain_error("char_poly: dimension " + std::to_string(n) + " exceeds cap " + std::to_string(cfg.char_poly_cap));
    CMatrix h;
    if (detail::is_upper_hessenberg(m)) {
        h = m;
    } else {
        Eigen::HessenbergDecomposition<CMatrix> hd(m);
        h = hd.matrixH();
    }
    // p[k] holds the characteristic polynomial of the leading k x k block,
    // coefficients low to high including the leading 1.
    std::vector<std::vector<Complex>> p(n + 1);
    p[0] = {Complex(1.0)};
    for (std::size_t k = 1; k <= n; ++k) {
        std::vector<Complex> next(k + 1, Complex{});
        const Complex hkk = h(Eigen::Index(k - 1), Eigen::Index(k - 1));
        for (std::size_t c = 0; c < k; ++c) {
            next[c + 1] += p[k - 1][c];
            next[c] -= hkk * p[k - 1][c];
        }
        Complex sub(1.0);
        for (std::size_t i = k - 1; i >= 1; --i) {
            sub *= h(Eigen::Index(i), Eigen::Index(i - 1));
            const Complex w = h(Eigen::Index(i - 1), Eigen::Index(k - 1)) * sub;
            if (w != Complex{})
                for (std::size_t c = 0; c < p[i - 1].size(); ++c) next[c] -= w * p[i - 1][c];
        }
        p[k] = std::move(next);
    }
    std::vector<Complex> a(p[n].begin(), p[n].end() - 1);
    return MonicPoly(std::move(a));
}

// ---------------------------------------------------------------------------
// Polynomial roots (Aberth-Ehrlich)

namespace detail {

inline std::vector<Complex> aberth_initial(const MonicPoly& p) {
    const std::size_t n = p.degree();
    const Complex center = -p.coeffs[n - 1] / double(n);
    // Fujiwara-style bound on |root - center| from the shifted coefficients'
    // magnitudes is overkill here; the plain bound on |root| is enough.
    double radius = 0.0;
    for (std::size_t k = 1; k <= n; ++k)
        radius = std::max(radius, std::pow(std::abs(p.coeffs[n - k]), 1.0 / double(k)));
    radius = std::max(radius, 1e-3);
    std::mt19937_64 rng(0x5eed + n);
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    std::vector<Complex> z(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double ang = 2.0 * kPi * (double(k) + 0.25 + jitter(rng)) / double(n) + 0.4;
        z[k] = center + radius * (1.0 + 0.1 * jitter(rng)) * std::polar(1.0, ang);
    }
    return z;
}

inline double residual_scale(const MonicPoly& p, Complex z) {
    const double r = std::max(1.0, std::abs(z));
    return (1.0 + p.max_coeff()) * std::pow(r, double(p.degree()));
}

}  // namespace detail

/// All roots of a monic polynomial by simultaneous Aberth-Ehrlich iteration.
/// `warm_start` (optional, size = degree) replaces the default initial circle.
/// Post: |p(root)| <= tol (1 + max|a_k|) max(1,|root|)^n for every root.
inline std::vector<Complex> poly_roots(const MonicPoly& p, const SpectraConfig& cfg = {},
                                       const std::vector<Complex>* warm_start = nullptr) {
    const std::size_t n = p.degree();
    if (n == 1) return {-p.coeffs[0]};
    std::vector<Complex> z = (warm_start && warm_start->size() == n) ? *warm_start : detail::aberth_initial(p);
    // Coincident warm starts stall the Aberth correction; spread them slightly.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(z[i] - z[j]) < 1e-12 * (1.0 + std::abs(z[i])))
                z[i] += 1e-7 * (1.0 + std::abs(z[i])) * std::polar(1.0, 0.7 + double(i));
    std::vector<char> done(n, 0);
    for (int it = 0; it < cfg.root_max_iter; ++it) {
        bool all_done = true;
        for (std::size_t k = 0; k < n; ++k) {
            if (done[k]) continue;
            auto [v, dv] = p.value_and_slope(z[k]);
            if (v == Complex{}) {
                done[k] = 1;
                continue;
            }
            Complex sum{};
            for (std::size_t j = 0; j < n; ++j)
                if (j != k) sum += 1.0 / (z[k] - z[j]);
            const Complex ratio = v / dv;
            Complex w = ratio / (1.0 - ratio * sum);
            if (!is_finite(w)) w = ratio;
            if (!is_finite(w)) w = Complex(1e-8, 1e-8);
            z[k] -= w;
            if (std::abs(w) <= 4e-16 * (1.0 + std::abs(z[k])))
                done[k] = 1;
            else
                all_done = false;
        }
        if (all_done) break;
    }
    for (Complex r : z) {
        if (!is_finite(r)) numerical_error("poly_roots: iteration diverged");
        const double res = std::abs(p(r));
        if (res > cfg.root_tol * detail::residual_scale(p, r))
            numerical_error("poly_roots: no convergence after " + std::to_string(cfg.root_max_iter) +
                            " iterations (residual " + std::to_string(res) + ")");
    }
    std::sort(z.begin(), z.end(), lex_less);
    return z;
}

/// Monic discriminant prod_{i<j} (r_i - r_j)^2, computed as
/// (-1)^{n(n-1)/2} Res(p, p') from the Sylvester matrix.
inline Complex discriminant(const MonicPoly& p) {
    const std::size_t n = p.degree();
    if (n == 1) return Complex(1.0);
    // p high to low: 1, a_{n-1}, ..., a_0 ; p' high to low: n, (n-1)a_{n-1}, ..., a_1
    std::vector<Complex> ph(n + 1), dh(n);
    ph[0] = 1.0;
    for (std::size_t k = 0; k < n; ++k) ph[k + 1] = p.coeffs[n - 1 - k];
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t deg = n - k;  // power of the term in p
        dh[k] = double(deg) * ph[k];
    }
    const std::size_t s = 2 * n - 1;
    CMatrix syl = CMatrix::Zero(Eigen::Index(s), Eigen::Index(s));
    for (std::size_t r = 0; r < n - 1; ++r)
        for (std::size_t c = 0; c <= n; ++c) syl(Eigen::Index(r), Eigen::Index(r + c)) = ph[c];
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) syl(Eigen::Index(n - 1 + r), Eigen::Index(r + c)) = dh[c];
    const Complex res = syl.partialPivLu().determinant();
    const bool negate = ((n * (n - 1) / 2) % 2) == 1;
    return negate ? -res : res;
}

// ---------------------------------------------------------------------------
// 2x2 convex discriminant in canonical coordinates

/// gamma(alpha) = (1-a)^2 lambda^2 + a^2 mu^2 + 2 ((v1+v2)/(v1-v2)) (1-a) a lambda mu,
/// lambda = lambda1 - lambda2, mu = mu1 - mu2. Zero exactly where the convex
/// path between the canonical A and B has a repeated eigenvalue.
inline Complex discriminant_path_2x2(Complex lambda1, Complex lambda2, Complex mu1, Complex mu2, Complex v1,
                                     Complex v2, double alpha) {
    if (v1 == v2) domain_error("discriminant_path_2x2: v1 == v2 (B is defective)");
    const Complex lam = lambda1 - lambda2, mu = mu1 - mu2;
    const Complex k = (v1 + v2) / (v1 - v2);
    const double a = alpha, b = 1.0 - alpha;
    return b * b * lam * lam + a * a * mu * mu + 2.0 * k * b * a * lam * mu;
}

}  // namespace eigenpaths
