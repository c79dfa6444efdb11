#pragma once

// Closed-form convex eigenpairings of 2x2 matrices. With A diagonalized as
// diag(lambda1, lambda2) and B's eigenvectors written (v1, 1), (v2, 1), the
// pairing p: lambda_j -> mu_j or q: lambda_j -> mu_{3-j} is decided by
// comparing |arg(mu / lambda)| with the angle theta derived from v1, v2.

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "core.hpp"
#include "spectra.hpp"

namespace eigenpaths {

enum class Degeneracy { None, SharedAxis, RepeatedEigenvalue };

inline const char* to_string(Degeneracy d) {
    switch (d) {
    case Degeneracy::None: return "none";
    case Degeneracy::SharedAxis: return "shared_axis";
    case Degeneracy::RepeatedEigenvalue: return "repeated_eigenvalue";
    }
    return "none";
}

/// lambda = lambda1 - lambda2 and mu = mu1 - mu2; reduce() orders both pairs
/// lexicographically descending. For SharedAxis, `shared_mu` (1 or 2) names the
/// B-eigenvalue whose eigenvector is A's first axis (v, 0); the other v is
/// still filled in.
struct Canonical2x2 {
    Complex lambda1, lambda2, mu1, mu2;
    Complex v1, v2;
    Degeneracy flag = Degeneracy::None;
    int shared_mu = 0;

    Complex lambda() const { return lambda1 - lambda2; }
    Complex mu() const { return mu1 - mu2; }
};

enum class Verdict { P_only, Q_only, Both };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::P_only: return "P_only";
    case Verdict::Q_only: return "Q_only";
    case Verdict::Both: return "Both";
    }
    return "Both";
}

struct PairingVerdict {
    Verdict verdict = Verdict::Both;
    double theta = 0.0;
    double arg_ratio = 0.0;
    Degeneracy flag = Degeneracy::None;
    Canonical2x2 canonical;
    /// Roots in (0,1) of tr(C)^2 - 4 det(C) along the convex path.
    std::vector<double> discriminant_roots;
    std::vector<std::string> notes;
};

namespace detail {

inline double principal_arg(Complex z) {
    double a = std::arg(z);
    if (a <= -kPi) a = kPi;
    return a;
}

/// Descending lexicographic order of a 2x2 spectrum.
inline std::pair<Complex, Complex> ordered_pair(const CMatrix& m) {
    const auto s = eigenvalues(m);
    return {s[1], s[0]};
}

/// Null vector of the 2x2 matrix (m - z I) from its larger row, scaled so
/// its largest-modulus entry is 1.
inline CVector null_vector_2x2(const CMatrix& m, Complex z) {
    const Complex a = m(0, 0) - z, b = m(0, 1), c = m(1, 0), d = m(1, 1) - z;
    CVector v(2);
    if (std::norm(a) + std::norm(b) >= std::norm(c) + std::norm(d))
        v << -b, a;
    else
        v << -d, c;
    if (std::abs(v(0)) == 0.0 && std::abs(v(1)) == 0.0) {
        // m - z I vanishes: every vector is an eigenvector.
        v << 1.0, 0.0;
        return v;
    }
    const Complex pivot = std::abs(v(0)) >= std::abs(v(1)) ? v(0) : v(1);
    return v / pivot;
}

inline bool near_equal(Complex x, Complex y, double scale) { return std::abs(x - y) <= 1e-12 * (1.0 + scale); }

}  // namespace detail

/// Brings (A, B) to the canonical form: A = diag(lambda1, lambda2) in its
/// eigenbasis, B's eigenvectors (v_k, 1) for mu_k in that basis.
inline Canonical2x2 reduce(const CMatrix& a, const CMatrix& b) {
    require_square(a, "reduce A");
    require_square(b, "reduce B");
    if (a.rows() != 2 || b.rows() != 2) domain_error("reduce: matrices must be 2x2");
    Canonical2x2 c;
    std::tie(c.lambda1, c.lambda2) = detail::ordered_pair(a);
    std::tie(c.mu1, c.mu2) = detail::ordered_pair(b);
    const double scale = std::max(max_norm(a), max_norm(b));
    if (detail::near_equal(c.lambda1, c.lambda2, scale) || detail::near_equal(c.mu1, c.mu2, scale)) {
        c.flag = Degeneracy::RepeatedEigenvalue;
        return c;
    }
    CMatrix w(2, 2);
    w.col(0) = detail::null_vector_2x2(a, c.lambda1);
    w.col(1) = detail::null_vector_2x2(a, c.lambda2);
    const CMatrix bp = w.inverse() * b * w;
    const CVector e1 = detail::null_vector_2x2(bp, c.mu1), e2 = detail::null_vector_2x2(bp, c.mu2);
    auto axis = [](const CVector& e) { return std::abs(e(1)) < 1e-12 * e.norm(); };
    c.v1 = axis(e1) ? Complex{} : e1(0) / e1(1);
    c.v2 = axis(e2) ? Complex{} : e2(0) / e2(1);
    if (axis(e1) || axis(e2)) {
        c.flag = Degeneracy::SharedAxis;
        c.shared_mu = axis(e1) ? 1 : 2;
    }
    return c;
}

struct ThetaInfo {
    double theta = 0.0;
    /// Arguments of -w_plus and -w_minus in (-pi, pi].
    double arg_plus = 0.0, arg_minus = 0.0;
    Complex w_plus, w_minus;
};

/// w_pm = (v1 + v2 +- 2 sqrt(v1 v2)) / (v1 - v2) with the principal square
/// root; theta = |arg(-w_plus)|. Since w_plus w_minus = 1 the two candidate
/// arguments are {theta, -theta} or {pi, pi} for either root branch.
inline ThetaInfo theta_info(Complex v1, Complex v2) {
    if (v1 == v2) domain_error("theta: v1 == v2");
    ThetaInfo t;
    const Complex s = std::sqrt(v1 * v2);
    t.w_plus = (v1 + v2 + 2.0 * s) / (v1 - v2);
    t.w_minus = (v1 + v2 - 2.0 * s) / (v1 - v2);
    t.arg_plus = detail::principal_arg(-t.w_plus);
    t.arg_minus = detail::principal_arg(-t.w_minus);
    t.theta = std::abs(t.arg_plus);
    return t;
}

inline double theta(Complex v1, Complex v2) { return theta_info(v1, v2).theta; }

/// Roots in (0,1) of disc(alpha) = tr(C)^2 - 4 det(C) for C = (1-alpha) A + alpha B,
/// a quadratic in alpha recovered exactly from three samples. Roots whose
/// imaginary part exceeds imag_tol are dropped.
inline std::vector<double> convex_discriminant_roots(const CMatrix& a, const CMatrix& b, double imag_tol = 1e-6) {
    auto disc = [&](double t) {
        const CMatrix m = (1.0 - t) * a + t * b;
        const Complex tr = m.trace(), det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        return tr * tr - 4.0 * det;
    };
    const Complex d0 = disc(0.0), dh = disc(0.5), d1 = disc(1.0);
    // disc(t) = c0 + c1 t + c2 t^2
    const Complex c0 = d0, c2 = 2.0 * (d1 - 2.0 * dh + d0), c1 = d1 - d0 - c2;
    std::vector<Complex> roots;
    const double scale = std::abs(c0) + std::abs(c1) + std::abs(c2);
    if (std::abs(c2) > 1e-14 * scale) {
        const Complex sq = std::sqrt(c1 * c1 - 4.0 * c2 * c0);
        const Complex q = -0.5 * (c1 + (std::abs(c1 + sq) >= std::abs(c1 - sq) ? sq : -sq));
        roots.push_back(q / c2);
        if (q != Complex{}) roots.push_back(c0 / q);
    } else if (std::abs(c1) > 1e-14 * scale) {
        roots.push_back(-c0 / c1);
    }
    std::vector<double> out;
    for (Complex r : roots)
        if (std::abs(r.imag()) <= imag_tol && r.real() > 0.0 && r.real() < 1.0) out.push_back(r.real());
    std::sort(out.begin(), out.end());
    return out;
}

/// Decides which of p, q are convex eigenpairings for an explicitly ordered
/// canonical form. The labels p, q refer to the order stored in `c`; reduce()
/// orders lexicographically descending, while hand-built canonical data may
/// use any order. eq_tol is the relative width of the band in which
/// |arg(mu/lambda)| and theta count as equal.
inline PairingVerdict classify(const Canonical2x2& c, double eq_tol = 1e-8) {
    PairingVerdict out;
    out.canonical = c;
    out.flag = c.flag;
    if (c.flag == Degeneracy::RepeatedEigenvalue) {
        out.verdict = Verdict::Both;
        out.notes.push_back("repeated eigenvalue: both bijections are convex pairings");
        return out;
    }
    out.arg_ratio = detail::principal_arg(c.mu() / c.lambda());
    const double a_abs = std::abs(out.arg_ratio);
    auto same = [&](double x, double y) { return std::abs(x - y) <= eq_tol * std::max(1.0, y); };
    if (c.flag == Degeneracy::SharedAxis) {
        // A straight line joins lambda1 to mu_{shared}; the other pairing
        // needs the two lines to cross, i.e. mu/lambda real with the right sign.
        if (c.shared_mu == 1) {
            out.theta = kPi;
            out.verdict = same(a_abs, kPi) ? Verdict::Both : Verdict::P_only;
        } else {
            out.theta = 0.0;
            out.verdict = same(a_abs, 0.0) ? Verdict::Both : Verdict::Q_only;
        }
        out.notes.push_back("shared eigenvector with A's first axis: straight-line eigenpath present");
        return out;
    }
    const auto th = theta_info(c.v1, c.v2);
    out.theta = th.theta;
    if (same(a_abs, th.theta)) {
        out.verdict = Verdict::Both;
        if (same(th.theta, kPi)) out.notes.push_back("boundary case |arg(mu/lambda)| = theta = pi");
    } else {
        out.verdict = a_abs < th.theta ? Verdict::P_only : Verdict::Q_only;
    }
    return out;
}

/// Rebuilds (A, B) from canonical data: A = diag(lambda1, lambda2) and B with
/// eigenvectors (v_k, 1), or (1, 0) for the shared axis.
inline std::pair<CMatrix, CMatrix> to_matrices(const Canonical2x2& c) {
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 0) = c.lambda1;
    a(1, 1) = c.lambda2;
    CMatrix v(2, 2);
    v << c.v1, c.v2, 1.0, 1.0;
    if (c.flag == Degeneracy::SharedAxis) v.col(c.shared_mu - 1) << 1.0, 0.0;
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = c.mu1;
    d(1, 1) = c.mu2;
    if (std::abs(v.determinant()) == 0.0) domain_error("to_matrices: eigenvectors are parallel");
    return {a, v * d * v.inverse()};
}

inline PairingVerdict classify(const CMatrix& a, const CMatrix& b, double eq_tol = 1e-8) {
    PairingVerdict out = classify(reduce(a, b), eq_tol);
    out.discriminant_roots = convex_discriminant_roots(a, b);
    return out;
}

/// The verdict as value maps between the sorted spectra {lambda1, lambda2}
/// and {mu1, mu2}: p sends lambda_j to mu_j, q sends lambda_j to mu_{3-j}.
inline std::vector<Eigenpairing> verdict_pairings(const PairingVerdict& v) {
    const auto& c = v.canonical;
    const Spectrum src({c.lambda1, c.lambda2}), dst({c.mu1, c.mu2});
    auto index_of = [](const Spectrum& s, Complex z) { return s[0] == z ? std::size_t{0} : std::size_t{1}; };
    auto build = [&](Complex to1, Complex to2) {
        std::vector<std::size_t> m(2);
        m[index_of(src, c.lambda1)] = index_of(dst, to1);
        m[index_of(src, c.lambda2)] = index_of(dst, to2);
        if (m[0] == m[1]) m[1] = 1 - m[0];  // repeated target value
        return Eigenpairing{Permutation(std::move(m)), src, dst};
    };
    std::vector<Eigenpairing> out;
    if (v.verdict != Verdict::Q_only) out.push_back(build(c.mu1, c.mu2));
    if (v.verdict != Verdict::P_only) out.push_back(build(c.mu2, c.mu1));
    return out;
}

struct LineSegment {
    Complex start, end;
    Complex at(double alpha) const { return (1.0 - alpha) * start + alpha * end; }
};

/// If A and B share an eigenvector, both convex eigenpaths are straight
/// lines: the shared pair lambda_s -> mu_s and, forced by the trace line,
/// the remaining lambda_o -> mu_o.
inline std::pair<LineSegment, LineSegment> straight_line_paths(const CMatrix& a, const CMatrix& b,
                                                               double angle_tol = 1e-9) {
    if (a.rows() != 2 || b.rows() != 2 || a.cols() != 2 || b.cols() != 2)
        domain_error("straight_line_paths: matrices must be 2x2");
    const auto [l1, l2] = detail::ordered_pair(a);
    const auto [m1, m2] = detail::ordered_pair(b);
    const double scale = std::max(max_norm(a), max_norm(b));
    auto scalar = [&](const CMatrix& m, Complex z) { return max_norm(m - z * CMatrix::Identity(2, 2)) <= 1e-12 * (1.0 + scale); };
    const Complex ls[2] = {l1, l2}, ms[2] = {m1, m2};
    const Complex tr_a = a.trace(), tr_b = b.trace();
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            bool shared = scalar(a, ls[i]) || scalar(b, ms[j]);
            if (!shared) {
                const CVector u = detail::null_vector_2x2(a, ls[i]), w = detail::null_vector_2x2(b, ms[j]);
                const double cosang = std::abs(u.dot(w)) / (u.norm() * w.norm());
                shared = cosang >= 1.0 - angle_tol;
            }
            if (shared) {
                const LineSegment first{ls[i], ms[j]};
                const LineSegment second{tr_a - ls[i], tr_b - ms[j]};
                return {first, second};
            }
        }
    }
    domain_error("straight_line_paths: A and B share no eigenvector");
}

}  // namespace eigenpaths
