#pragma once

// Domain types shared by every module: complex matrices, structured matrix
// paths over alpha in [0,1], multiset spectra, eigenpath sets, ambiguity
// reports and endpoint pairings.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace eigenpaths {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind { Domain, Numerical, Parse, Assertion };

/// Every failure raised by the library carries a kind so front ends can map
/// it onto an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void domain_error(const std::string& what) { throw Error(ErrorKind::Domain, what); }
[[noreturn]] inline void numerical_error(const std::string& what) { throw Error(ErrorKind::Numerical, what); }

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline bool is_finite(const CMatrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i)
        if (!is_finite(m.data()[i])) return false;
    return true;
}

/// Entrywise max-modulus norm, the default distance between matrices.
inline double max_norm(const CMatrix& m) {
    double r = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) r = std::max(r, std::abs(m.data()[i]));
    return r;
}

inline double frobenius_norm(const CMatrix& m) { return m.norm(); }

/// Lexicographic (re, im) order used for every multiset representation.
inline bool lex_less(Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

inline void require_square(const CMatrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() < 1)
        domain_error(std::string(what) + ": matrix must be square with n >= 1");
    if (!is_finite(m)) domain_error(std::string(what) + ": matrix has non-finite entries");
}

// ---------------------------------------------------------------------------
// Multisets

/// Size-n multiset of complex values, kept sorted lexicographically with
/// explicit repeats.
struct Spectrum {
    std::vector<Complex> values;

    Spectrum() = default;
    explicit Spectrum(std::vector<Complex> v) : values(std::move(v)) {
        for (Complex z : values)
            if (!is_finite(z)) numerical_error("spectrum contains a non-finite value");
        std::sort(values.begin(), values.end(), lex_less);
    }

    std::size_t size() const { return values.size(); }
    Complex operator[](std::size_t i) const { return values[i]; }
    Complex sum() const { return std::accumulate(values.begin(), values.end(), Complex{}); }
    bool operator==(const Spectrum&) const = default;
};

/// Single-linkage clusters of `values` at radius `tol`. Returns a cluster id
/// per value; ids are numbered in order of first appearance.
inline std::vector<int> cluster_ids(const std::vector<Complex>& values, double tol) {
    const std::size_t n = values.size();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(values[i] - values[j]) <= tol) parent[find(int(i))] = find(int(j));
    std::vector<int> ids(n, -1), root_to_id(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        int r = find(int(i));
        if (root_to_id[r] < 0) root_to_id[r] = next++;
        ids[i] = root_to_id[r];
    }
    return ids;
}

/// Smallest pairwise distance in a multiset (infinity for a single value).
inline double min_gap(const std::vector<Complex>& values) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j) g = std::min(g, std::abs(values[i] - values[j]));
    return g;
}

// ---------------------------------------------------------------------------
// Permutations

/// Bijection on {0..n-1}; `map[i]` is the image of i.
struct Permutation {
    std::vector<std::size_t> map;

    Permutation() = default;
    explicit Permutation(std::vector<std::size_t> m) : map(std::move(m)) {
        if (!is_bijection()) domain_error("permutation is not a bijection");
    }
    static Permutation identity(std::size_t n) {
        std::vector<std::size_t> m(n);
        std::iota(m.begin(), m.end(), std::size_t{0});
        return Permutation(std::move(m));
    }

    std::size_t size() const { return map.size(); }
    std::size_t operator()(std::size_t i) const { return map[i]; }

    bool is_bijection() const {
        std::vector<char> seen(map.size(), 0);
        for (std::size_t v : map) {
            if (v >= map.size() || seen[v]) return false;
            seen[v] = 1;
        }
        return true;
    }
    bool is_identity() const {
        for (std::size_t i = 0; i < map.size(); ++i)
            if (map[i] != i) return false;
        return true;
    }
    Permutation inverse() const {
        std::vector<std::size_t> inv(map.size());
        for (std::size_t i = 0; i < map.size(); ++i) inv[map[i]] = i;
        return Permutation(std::move(inv));
    }
    /// (this ∘ other)(i) = this(other(i))
    Permutation after(const Permutation& other) const {
        std::vector<std::size_t> m(map.size());
        for (std::size_t i = 0; i < map.size(); ++i) m[i] = map[other.map[i]];
        return Permutation(std::move(m));
    }
    bool operator==(const Permutation&) const = default;
    bool operator<(const Permutation& o) const { return map < o.map; }
};

// ---------------------------------------------------------------------------
// Scalar weight functions for combination paths

/// Real function on [0,1]: a named built-in, a piecewise-linear table or a
/// polynomial, optionally precomposed with an affine map alpha -> scale*alpha + shift
/// (the form that reversal and truncation produce).
struct ScalarFn {
    enum class Kind { Builtin, Table, Poly };
    Kind kind = Kind::Builtin;
    std::string name = "linear";
    std::vector<double> xs, ys;   // Table
    std::vector<double> coeffs;   // Poly, low to high
    double scale = 1.0, shift = 0.0;

    static ScalarFn builtin(std::string n) {
        ScalarFn f;
        f.kind = Kind::Builtin;
        f.name = std::move(n);
        f.validate();
        return f;
    }
    static ScalarFn table(std::vector<double> x, std::vector<double> y) {
        ScalarFn f;
        f.kind = Kind::Table;
        f.xs = std::move(x);
        f.ys = std::move(y);
        f.validate();
        return f;
    }
    static ScalarFn poly(std::vector<double> c) {
        ScalarFn f;
        f.kind = Kind::Poly;
        f.coeffs = std::move(c);
        f.validate();
        return f;
    }

    void validate() const {
        switch (kind) {
        case Kind::Builtin:
            if (name != "linear" && name != "linear_down" && name != "cos_ramp" && name != "cos_ramp_down" &&
                name != "zero" && name != "one")
                domain_error("unknown built-in weight function '" + name + "'");
            break;
        case Kind::Table:
            if (xs.size() < 2 || xs.size() != ys.size()) domain_error("weight table needs >= 2 matching samples");
            for (std::size_t i = 1; i < xs.size(); ++i)
                if (!(xs[i] > xs[i - 1])) domain_error("weight table abscissae must increase strictly");
            break;
        case Kind::Poly:
            if (coeffs.empty()) domain_error("weight polynomial needs coefficients");
            break;
        }
    }

    double operator()(double alpha) const {
        const double x = scale * alpha + shift;
        switch (kind) {
        case Kind::Builtin:
            if (name == "linear") return x;
            if (name == "linear_down") return 1.0 - x;
            if (name == "cos_ramp") return 0.5 * (1.0 - std::cos(kPi * x));
            if (name == "cos_ramp_down") return 0.5 * (1.0 + std::cos(kPi * x));
            if (name == "zero") return 0.0;
            return 1.0;
        case Kind::Table: {
            if (x <= xs.front()) return ys.front();
            if (x >= xs.back()) return ys.back();
            auto it = std::upper_bound(xs.begin(), xs.end(), x);
            std::size_t k = std::size_t(it - xs.begin()) - 1;
            double t = (x - xs[k]) / (xs[k + 1] - xs[k]);
            return (1.0 - t) * ys[k] + t * ys[k + 1];
        }
        case Kind::Poly: {
            double r = 0.0;
            for (std::size_t k = coeffs.size(); k-- > 0;) r = r * x + coeffs[k];
            return r;
        }
        }
        return 0.0;
    }

    /// g(alpha) = f(a + (b - a) * alpha)
    ScalarFn reparameterized(double a, double b) const {
        ScalarFn g = *this;
        g.shift = scale * a + shift;
        g.scale = scale * (b - a);
        return g;
    }
    bool operator==(const ScalarFn&) const = default;
};

// ---------------------------------------------------------------------------
// Matrix paths

/// (1 - alpha) A + alpha B
struct ConvexPath {
    CMatrix a, b;
};

/// f(alpha) A + g(alpha) B
struct CombinationPath {
    CMatrix a, b;
    ScalarFn f, g;
};

/// Polynomial entries: sum_k P_k alpha^k (monomial basis) or
/// sum_k P_k C(d,k) alpha^k (1-alpha)^(d-k) (Bernstein basis).
struct PolynomialPath {
    enum class Basis { Monomial, Bernstein };
    std::vector<CMatrix> coeffs;
    Basis basis = Basis::Monomial;
};

/// Entrywise linear interpolation between samples on a strictly increasing
/// grid with grid.front() == 0 and grid.back() == 1.
struct SampledPath {
    std::vector<double> grid;
    std::vector<CMatrix> matrices;
};

namespace detail {

inline CMatrix eval_monomial(const std::vector<CMatrix>& c, Complex z) {
    CMatrix r = c.back();
    for (std::size_t k = c.size() - 1; k-- > 0;) r = (r * z + c[k]).eval();
    return r;
}

inline CMatrix eval_bernstein_decasteljau(std::vector<CMatrix> c, Complex z) {
    const std::size_t d = c.size() - 1;
    for (std::size_t r = 1; r <= d; ++r)
        for (std::size_t k = 0; k + r <= d; ++k) c[k] = (1.0 - z) * c[k] + z * c[k + 1];
    return c[0];
}

/// Bernstein basis values for real t in [0,1], computed outward from the
/// mode in log space so large degrees neither overflow nor underflow.
inline std::vector<double> bernstein_basis(std::size_t d, double t) {
    std::vector<double> b(d + 1, 0.0);
    if (t <= 0.0) {
        b[0] = 1.0;
        return b;
    }
    if (t >= 1.0) {
        b[d] = 1.0;
        return b;
    }
    const double lt = std::log(t), l1t = std::log1p(-t);
    std::size_t mode = std::min<std::size_t>(d, std::size_t(std::floor(double(d) * t + 0.5)));
    auto logb = [&](std::size_t k) {
        return std::lgamma(double(d) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(d - k) + 1) +
               double(k) * lt + double(d - k) * l1t;
    };
    b[mode] = std::exp(logb(mode));
    const double ratio = t / (1.0 - t);
    for (std::size_t k = mode; k < d; ++k) {
        b[k + 1] = b[k] * double(d - k) / double(k + 1) * ratio;
        if (b[k + 1] < 1e-300) break;
    }
    for (std::size_t k = mode; k > 0; --k) {
        b[k - 1] = b[k] * double(k) / double(d - k + 1) / ratio;
        if (b[k - 1] < 1e-300) break;
    }
    return b;
}

}  // namespace detail

/// A continuous map alpha in [0,1] -> n x n complex matrix in one of four
/// structured forms. Immutable after construction.
class MatrixPath {
public:
    using Form = std::variant<ConvexPath, CombinationPath, PolynomialPath, SampledPath>;

    static MatrixPath convex(CMatrix a, CMatrix b) { return MatrixPath(ConvexPath{std::move(a), std::move(b)}); }
    static MatrixPath combination(CMatrix a, CMatrix b, ScalarFn f, ScalarFn g) {
        return MatrixPath(CombinationPath{std::move(a), std::move(b), std::move(f), std::move(g)});
    }
    static MatrixPath polynomial(std::vector<CMatrix> coeffs,
                                 PolynomialPath::Basis basis = PolynomialPath::Basis::Monomial) {
        return MatrixPath(PolynomialPath{std::move(coeffs), basis});
    }
    static MatrixPath sampled(std::vector<double> grid, std::vector<CMatrix> mats) {
        return MatrixPath(SampledPath{std::move(grid), std::move(mats)});
    }
    static MatrixPath constant(const CMatrix& m) { return convex(m, m); }

    explicit MatrixPath(Form form) : form_(std::move(form)) { validate(); }

    const Form& form() const { return form_; }
    std::size_t dim() const { return dim_; }

    bool is_convex() const { return std::holds_alternative<ConvexPath>(form_); }
    bool is_combination() const { return std::holds_alternative<CombinationPath>(form_); }
    bool is_polynomial() const { return std::holds_alternative<PolynomialPath>(form_); }
    bool is_sampled() const { return std::holds_alternative<SampledPath>(form_); }
    /// Convex and polynomial paths extend holomorphically to complex alpha.
    bool is_analytic() const { return is_convex() || is_polynomial(); }

    CMatrix operator()(double alpha) const {
        if (!(alpha >= 0.0 && alpha <= 1.0)) domain_error("alpha out of range [0,1]: " + std::to_string(alpha));
        return std::visit([&](const auto& f) { return eval(f, alpha); }, form_);
    }

    /// Holomorphic extension to complex alpha (convex and polynomial forms).
    CMatrix at_complex(Complex z) const {
        if (const auto* c = std::get_if<ConvexPath>(&form_)) return (1.0 - z) * c->a + z * c->b;
        if (const auto* p = std::get_if<PolynomialPath>(&form_)) {
            if (p->basis == PolynomialPath::Basis::Monomial) return detail::eval_monomial(p->coeffs, z);
            return detail::eval_bernstein_decasteljau(p->coeffs, z);
        }
        domain_error("complex evaluation needs a convex or polynomial path");
    }

private:
    void validate() {
        std::visit([&](const auto& f) { validate_form(f); }, form_);
    }
    void validate_form(const ConvexPath& c) {
        require_square(c.a, "convex path A");
        require_square(c.b, "convex path B");
        if (c.a.rows() != c.b.rows()) domain_error("convex path endpoints differ in dimension");
        dim_ = std::size_t(c.a.rows());
    }
    void validate_form(const CombinationPath& c) {
        require_square(c.a, "combination path A");
        require_square(c.b, "combination path B");
        if (c.a.rows() != c.b.rows()) domain_error("combination path matrices differ in dimension");
        c.f.validate();
        c.g.validate();
        dim_ = std::size_t(c.a.rows());
    }
    void validate_form(const PolynomialPath& p) {
        if (p.coeffs.empty()) domain_error("polynomial path needs at least one coefficient matrix");
        for (const auto& m : p.coeffs) {
            require_square(m, "polynomial path coefficient");
            if (m.rows() != p.coeffs.front().rows()) domain_error("polynomial path coefficients differ in dimension");
        }
        dim_ = std::size_t(p.coeffs.front().rows());
    }
    void validate_form(const SampledPath& s) {
        if (s.grid.size() < 2 || s.grid.size() != s.matrices.size())
            domain_error("sampled path needs >= 2 samples with one matrix per grid point");
        if (s.grid.front() != 0.0 || s.grid.back() != 1.0) domain_error("sampled path grid must span [0,1] exactly");
        for (std::size_t i = 1; i < s.grid.size(); ++i)
            if (!(s.grid[i] > s.grid[i - 1])) domain_error("sampled path grid must be strictly increasing");
        for (const auto& m : s.matrices) {
            require_square(m, "sampled path matrix");
            if (m.rows() != s.matrices.front().rows()) domain_error("sampled path matrices differ in dimension");
        }
        dim_ = std::size_t(s.matrices.front().rows());
    }

    static CMatrix eval(const ConvexPath& c, double t) {
        if (t == 0.0) return c.a;
        if (t == 1.0) return c.b;
        return (1.0 - t) * c.a + t * c.b;
    }
    static CMatrix eval(const CombinationPath& c, double t) { return c.f(t) * c.a + c.g(t) * c.b; }
    static CMatrix eval(const PolynomialPath& p, double t) {
        if (p.basis == PolynomialPath::Basis::Monomial) return detail::eval_monomial(p.coeffs, Complex(t, 0.0));
        const auto w = detail::bernstein_basis(p.coeffs.size() - 1, t);
        CMatrix r = CMatrix::Zero(p.coeffs[0].rows(), p.coeffs[0].cols());
        for (std::size_t k = 0; k < w.size(); ++k)
            if (w[k] != 0.0) r += w[k] * p.coeffs[k];
        return r;
    }
    static CMatrix eval(const SampledPath& s, double t) {
        auto it = std::upper_bound(s.grid.begin(), s.grid.end(), t);
        if (it == s.grid.end()) return s.matrices.back();
        std::size_t k = std::size_t(it - s.grid.begin()) - 1;
        if (t == s.grid[k]) return s.matrices[k];
        double w = (t - s.grid[k]) / (s.grid[k + 1] - s.grid[k]);
        return (1.0 - w) * s.matrices[k] + w * s.matrices[k + 1];
    }

    Form form_;
    std::size_t dim_ = 0;
};

inline CMatrix evaluate(const MatrixPath& path, double alpha) { return path(alpha); }

inline std::vector<double> uniform_grid(std::size_t points) {
    if (points < 2) domain_error("uniform grid needs at least 2 points");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) g[i] = double(i) / double(points - 1);
    g.back() = 1.0;
    return g;
}

/// max over the grid of the entrywise max-modulus distance between the paths.
inline double sup_distance(const MatrixPath& p1, const MatrixPath& p2, const std::vector<double>& grid) {
    if (p1.dim() != p2.dim()) domain_error("sup_distance: dimension mismatch");
    double d = 0.0;
    for (double t : grid) d = std::max(d, max_norm(p1(t) - p2(t)));
    return d;
}

// ---------------------------------------------------------------------------
// Eigenpath sets, ambiguities, pairings

/// n piecewise-linear complex trajectories on a shared alpha grid.
/// paths[j][k] is path j at grid[k]; path j starts at the j-th value of the
/// sorted spectrum at alpha = 0.
struct EigenPathSet {
    std::vector<double> grid;
    std::vector<std::vector<Complex>> paths;

    std::size_t size() const { return paths.size(); }
    std::vector<Complex> column(std::size_t k) const {
        std::vector<Complex> c(paths.size());
        for (std::size_t j = 0; j < paths.size(); ++j) c[j] = paths[j][k];
        return c;
    }
    /// Linear interpolation of path j at alpha.
    Complex at(std::size_t j, double alpha) const {
        auto it = std::upper_bound(grid.begin(), grid.end(), alpha);
        if (it == grid.end()) return paths[j].back();
        if (it == grid.begin()) return paths[j].front();
        std::size_t k = std::size_t(it - grid.begin()) - 1;
        double w = (alpha - grid[k]) / (grid[k + 1] - grid[k]);
        return (1.0 - w) * paths[j][k] + w * paths[j][k + 1];
    }
};

/// A collision cluster: member paths lie within the collision tolerance of
/// `lambda` at `alpha`. [alpha_lo, alpha_hi] is the extent of the run of grid
/// points over which the same members stay clustered.
struct Ambiguity {
    Complex lambda;
    double alpha = 0.0;
    double alpha_lo = 0.0, alpha_hi = 0.0;
    std::size_t grid_index = 0;
    int multiplicity = 0;
    bool singular = false;
    std::vector<std::size_t> members;
    double diameter = 0.0;
};

struct AmbiguityReport {
    std::vector<Ambiguity> ambiguities;
    double collision_tol = 0.0;
    /// Grid steps accepted at the depth cap without passing every test.
    std::vector<double> unresolved_alphas;
    std::vector<std::string> notes;

    bool empty() const { return ambiguities.empty(); }
};

/// Endpoint bijection between the sorted spectra of C(0) and C(1):
/// source[i] is paired with target[perm(i)].
struct Eigenpairing {
    Permutation perm;
    Spectrum source, target;

    Complex image(std::size_t i) const { return target[perm(i)]; }
};

/// Two pairings describe the same value map within tol (labels may differ
/// wherever spectra repeat).
inline bool equivalent(const Eigenpairing& p, const Eigenpairing& q, double tol) {
    if (p.perm.size() != q.perm.size()) return false;
    std::vector<char> used(q.perm.size(), 0);
    for (std::size_t i = 0; i < p.perm.size(); ++i) {
        bool found = false;
        for (std::size_t j = 0; j < q.perm.size() && !found; ++j) {
            if (used[j]) continue;
            if (std::abs(p.source[i] - q.source[j]) <= tol && std::abs(p.image(i) - q.image(j)) <= tol) {
                used[j] = 1;
                found = true;
            }
        }
        if (!found) return false;
    }
    return true;
}

/// Relabels a pairing so that equal-valued (within tol) source and target
/// entries are assigned in increasing index order. Two permutations with
/// equal canonical form induce the same value map.
inline Permutation canonical_pairing(const Permutation& perm, const Spectrum& source, const Spectrum& target,
                                     double tol) {
    const std::size_t n = perm.size();
    auto sc = cluster_ids(source.values, tol);
    auto tc = cluster_ids(target.values, tol);
    std::vector<std::vector<int>> count(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i) count[std::size_t(sc[i])][std::size_t(tc[perm(i)])]++;
    std::vector<char> used(n, 0);
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = count[std::size_t(sc[i])];
        std::size_t best = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j] || row[std::size_t(tc[j])] == 0) continue;
            best = j;
            break;
        }
        used[best] = 1;
        row[std::size_t(tc[best])]--;
        out[i] = best;
    }
    return Permutation(std::move(out));
}

}  // namespace eigenpaths
