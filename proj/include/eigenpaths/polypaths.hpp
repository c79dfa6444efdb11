#pragma once

// Paths of monic polynomials of fixed degree: companion matrix paths, root
// tracking through the matrix tracker, an independent root continuation,
// ripping in coefficient space and the convex reduction check for weighted
// combinations.

#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "construct.hpp"
#include "pairings.hpp"
#include "tracker.hpp"

namespace eigenpaths {

/// (1 - alpha) Q + alpha R
struct ConvexPoly {
    MonicPoly q, r;
};

/// t^n + sum_j (f(alpha) q_j + g(alpha) r_j) t^j: the weights act on the
/// non-leading coefficients so every member stays monic.
struct CombinationPoly {
    MonicPoly q, r;
    ScalarFn f, g;
};

/// Coefficientwise linear interpolation on a grid from 0 to 1.
struct SampledPoly {
    std::vector<double> grid;
    std::vector<MonicPoly> polys;
};

class PolyPath {
public:
    using Form = std::variant<ConvexPoly, CombinationPoly, SampledPoly>;

    static PolyPath convex(MonicPoly q, MonicPoly r) { return PolyPath(ConvexPoly{std::move(q), std::move(r)}); }
    static PolyPath combination(MonicPoly q, MonicPoly r, ScalarFn f, ScalarFn g) {
        return PolyPath(CombinationPoly{std::move(q), std::move(r), std::move(f), std::move(g)});
    }
    static PolyPath sampled(std::vector<double> grid, std::vector<MonicPoly> polys) {
        return PolyPath(SampledPoly{std::move(grid), std::move(polys)});
    }
    static PolyPath constant(const MonicPoly& p) { return convex(p, p); }

    const Form& form() const { return form_; }
    std::size_t degree() const { return degree_; }
    bool is_convex() const { return std::holds_alternative<ConvexPoly>(form_); }
    bool is_combination() const { return std::holds_alternative<CombinationPoly>(form_); }
    bool is_sampled() const { return std::holds_alternative<SampledPoly>(form_); }
    std::string kind() const { return is_convex() ? "convex" : is_combination() ? "combination" : "sampled"; }

    MonicPoly operator()(double alpha) const {
        if (!(alpha >= 0.0 && alpha <= 1.0)) domain_error("polynomial path evaluated outside [0,1]");
        if (const auto* c = std::get_if<ConvexPoly>(&form_)) return mix(c->q, c->r, 1.0 - alpha, alpha);
        if (const auto* c = std::get_if<CombinationPoly>(&form_)) return mix(c->q, c->r, c->f(alpha), c->g(alpha));
        const auto& s = std::get<SampledPoly>(form_);
        auto it = std::upper_bound(s.grid.begin(), s.grid.end(), alpha);
        if (it == s.grid.end()) return s.polys.back();
        const std::size_t k = std::size_t(it - s.grid.begin()) - 1;
        const double w = (alpha - s.grid[k]) / (s.grid[k + 1] - s.grid[k]);
        return mix(s.polys[k], s.polys[k + 1], 1.0 - w, w);
    }

private:
    explicit PolyPath(Form f) : form_(std::move(f)) { validate(); }

    static MonicPoly mix(const MonicPoly& a, const MonicPoly& b, double wa, double wb) {
        std::vector<Complex> c(a.degree());
        for (std::size_t j = 0; j < c.size(); ++j) c[j] = wa * a.coeffs[j] + wb * b.coeffs[j];
        return MonicPoly(std::move(c));
    }

    void validate() {
        auto check_pair = [&](const MonicPoly& q, const MonicPoly& r) {
            if (q.degree() < 1) domain_error("polynomial path: degree must be at least 1");
            if (q.degree() != r.degree()) domain_error("polynomial path: endpoint degrees differ");
            degree_ = q.degree();
        };
        if (const auto* c = std::get_if<ConvexPoly>(&form_)) {
            check_pair(c->q, c->r);
        } else if (const auto* c = std::get_if<CombinationPoly>(&form_)) {
            check_pair(c->q, c->r);
            c->f.validate();
            c->g.validate();
        } else {
            const auto& s = std::get<SampledPoly>(form_);
            if (s.grid.size() < 2 || s.grid.size() != s.polys.size())
                domain_error("sampled polynomial path needs >= 2 grid points, one polynomial each");
            if (s.grid.front() != 0.0 || s.grid.back() != 1.0) domain_error("sampled polynomial path grid must span [0,1]");
            for (std::size_t k = 1; k < s.grid.size(); ++k)
                if (!(s.grid[k] > s.grid[k - 1])) domain_error("sampled polynomial path grid must increase strictly");
            degree_ = s.polys.front().degree();
            if (degree_ < 1) domain_error("polynomial path: degree must be at least 1");
            for (const auto& p : s.polys)
                if (p.degree() != degree_) domain_error("sampled polynomial path: degree changes along the path");
        }
    }

    Form form_;
    std::size_t degree_ = 0;
};

/// Sup of the coefficient max-norm distance over a grid.
inline double poly_sup_distance(const PolyPath& a, const PolyPath& b, const std::vector<double>& grid) {
    double d = 0.0;
    for (double t : grid) d = std::max(d, a(t).distance(b(t)));
    return d;
}

/// Ones on the subdiagonal, -a_0 .. -a_{n-1} down the last column.
inline CMatrix companion(const MonicPoly& p) {
    const auto n = static_cast<Eigen::Index>(p.degree());
    if (n < 1) domain_error("companion: degree must be at least 1");
    CMatrix c = CMatrix::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i) c(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) c(i, n - 1) = -p.coeffs[std::size_t(i)];
    return c;
}

namespace detail {

/// f + g == 1 on a fine grid, within tol.
inline bool weights_sum_to_one(const ScalarFn& f, const ScalarFn& g, double tol = 1e-12) {
    for (double t : uniform_grid(4097))
        if (std::abs(f(t) + g(t) - 1.0) > tol) return false;
    return true;
}

}  // namespace detail

/// alpha -> companion(P(alpha)). Convex paths, and combinations whose weights
/// sum to one, map to exact matrix paths (the companion matrix is affine in the
/// coefficients); other combinations are sampled on `combination_points`.
inline MatrixPath companion_path(const PolyPath& pp, std::size_t combination_points = 4097) {
    if (const auto* c = std::get_if<ConvexPoly>(&pp.form())) return MatrixPath::convex(companion(c->q), companion(c->r));
    if (const auto* c = std::get_if<CombinationPoly>(&pp.form())) {
        if (detail::weights_sum_to_one(c->f, c->g))
            return MatrixPath::combination(companion(c->q), companion(c->r), c->f, c->g);
        auto grid = uniform_grid(combination_points);
        std::vector<CMatrix> mats;
        for (double t : grid) mats.push_back(companion(pp(t)));
        return MatrixPath::sampled(std::move(grid), std::move(mats));
    }
    const auto& s = std::get<SampledPoly>(pp.form());
    std::vector<CMatrix> mats;
    for (const auto& p : s.polys) mats.push_back(companion(p));
    return MatrixPath::sampled(s.grid, std::move(mats));
}

/// Root paths of P are the eigenpaths of its companion path.
inline TrackResult track_roots(const PolyPath& pp, const TrackConfig& cfg = {}) { return track(companion_path(pp), cfg); }

// ---------------------------------------------------------------------------
// Direct root continuation

struct DirectConfig {
    std::size_t points = 257;
    /// Bisection depth below each initial step.
    int max_depth = 16;
    /// A step is accepted when every root moved less than this fraction of the
    /// smallest gap between the new roots.
    double gap_fraction = 0.5;
    std::uint64_t seed = 1;
    SpectraConfig spectra;
};

struct RootPathResult {
    EigenPathSet paths;
    std::vector<double> unresolved_alphas;
    std::size_t evaluations = 0;
    std::size_t reseeds = 0;
};

namespace detail {

class RootContinuation {
public:
    RootContinuation(const PolyPath& pp, const DirectConfig& cfg, RootPathResult& out)
        : pp_(pp), cfg_(cfg), out_(out), rng_(cfg.seed) {}

    /// Roots of P(alpha), labelled to follow `prev`.
    std::vector<Complex> solve(double alpha, const std::vector<Complex>& prev) {
        const MonicPoly p = pp_(alpha);
        ++out_.evaluations;
        std::vector<Complex> z;
        try {
            z = poly_roots(p, cfg_.spectra, &prev);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Numerical) throw;
            ++out_.reseeds;
            const auto seed = perturbed_circle(prev);
            try {
                z = poly_roots(p, cfg_.spectra, &seed);
            } catch (const Error& e2) {
                if (e2.kind() != ErrorKind::Numerical) throw;
                numerical_error("track_roots_direct: root iteration failed twice at alpha=" + std::to_string(alpha));
            }
        }
        const Permutation pi = match_spectra(prev, z);
        std::vector<Complex> labelled(z.size());
        for (std::size_t l = 0; l < z.size(); ++l) labelled[l] = z[pi(l)];
        return labelled;
    }

    /// Appends the samples of (a, b] to the output, refining as needed.
    void advance(double a, double b, const std::vector<Complex>& za, int depth) {
        const std::vector<Complex> zb = solve(b, za);
        double moved = 0.0;
        for (std::size_t l = 0; l < za.size(); ++l) moved = std::max(moved, std::abs(zb[l] - za[l]));
        const bool ok = za.size() < 2 || moved < cfg_.gap_fraction * min_gap(zb);
        const double mid = 0.5 * (a + b);
        if (!ok && depth < cfg_.max_depth && mid > a && mid < b) {
            advance(a, mid, za, depth + 1);
            advance(mid, b, out_column(), depth + 1);
            return;
        }
        if (!ok) out_.unresolved_alphas.push_back(b);
        push(b, zb);
    }

    void push(double alpha, const std::vector<Complex>& z) {
        out_.paths.grid.push_back(alpha);
        for (std::size_t l = 0; l < z.size(); ++l) out_.paths.paths[l].push_back(z[l]);
    }

    std::vector<Complex> out_column() const { return out_.paths.column(out_.paths.grid.size() - 1); }

private:
    std::vector<Complex> perturbed_circle(const std::vector<Complex>& prev) {
        Complex center{};
        for (Complex z : prev) center += z;
        center /= double(prev.size());
        double radius = 1e-3;
        for (Complex z : prev) radius = std::max(radius, 1.1 * std::abs(z - center));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double phase = 2.0 * kPi * u(rng_);
        std::vector<Complex> s(prev.size());
        for (std::size_t k = 0; k < s.size(); ++k)
            s[k] = center + radius * (1.0 + 0.05 * u(rng_)) *
                                std::polar(1.0, phase + 2.0 * kPi * (double(k) + 0.2 * u(rng_)) / double(s.size()));
        return s;
    }

    const PolyPath& pp_;
    const DirectConfig& cfg_;
    RootPathResult& out_;
    std::mt19937_64 rng_;
};

}  // namespace detail

/// Root trajectories by warm-started Aberth iteration between neighbouring
/// alpha samples, stitched by optimal matching, with no matrix in sight.
/// `base_grid` (if non-empty) replaces the uniform initial grid; every base
/// point appears in the output grid.
inline RootPathResult track_roots_direct(const PolyPath& pp, const DirectConfig& cfg = {},
                                         std::vector<double> base_grid = {}) {
    if (base_grid.empty()) base_grid = uniform_grid(std::max<std::size_t>(cfg.points, 2));
    if (base_grid.front() != 0.0 || base_grid.back() != 1.0)
        domain_error("track_roots_direct: grid must start at 0 and end at 1");
    RootPathResult out;
    out.paths.paths.assign(pp.degree(), {});
    std::vector<Complex> z0 = poly_roots(pp(0.0), cfg.spectra);
    ++out.evaluations;
    detail::RootContinuation rc(pp, cfg, out);
    rc.push(0.0, z0);
    for (std::size_t k = 1; k < base_grid.size(); ++k) {
        if (!(base_grid[k] > base_grid[k - 1])) domain_error("track_roots_direct: grid must increase strictly");
        rc.advance(base_grid[k - 1], base_grid[k], rc.out_column(), 0);
    }
    return out;
}

struct RootSetDeviation {
    /// Max over the grid of the bottleneck distance between the two root sets.
    double set_dev = 0.0;
    /// Max distance along paths, after matching the labels at alpha = 0.
    double path_dev = 0.0;
};

/// Compares two root path sets at the grid points of `a`, reading `b` exactly
/// where it has the same grid point and by interpolation otherwise.
inline RootSetDeviation compare_root_paths(const EigenPathSet& a, const EigenPathSet& b) {
    if (a.size() != b.size()) domain_error("compare_root_paths: different numbers of paths");
    RootSetDeviation d;
    const Permutation m0 = match_spectra(a.column(0), b.column(0));
    for (std::size_t k = 0; k < a.grid.size(); ++k) {
        const double t = a.grid[k];
        auto it = std::lower_bound(b.grid.begin(), b.grid.end(), t);
        std::vector<Complex> bc(b.size());
        if (it != b.grid.end() && *it == t) {
            bc = b.column(std::size_t(it - b.grid.begin()));
        } else {
            for (std::size_t j = 0; j < b.size(); ++j) bc[j] = b.at(j, t);
        }
        const auto ac = a.column(k);
        d.set_dev = std::max(d.set_dev, bottleneck_distance(ac, bc));
        for (std::size_t j = 0; j < a.size(); ++j) d.path_dev = std::max(d.path_dev, std::abs(ac[j] - bc[m0(j)]));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Ripping polynomial paths

struct PolyRipResult {
    PolyPath new_path;
    /// Sup over a check grid of the coefficient max-norm distance.
    double coeff_dev = 0.0;
    /// Max distance of the new root paths from the reference root paths.
    double root_dev = 0.0;
    /// Matrix eps passed to the final rip.
    double matrix_eps = 0.0;
    int retries = 0;
    std::optional<Eigenpairing> reference_pairing, achieved_pairing;
    std::vector<std::string> notes;

    explicit PolyRipResult(PolyPath p) : new_path(std::move(p)) {}
};

/// Rips the companion path, then reads off characteristic polynomials sample
/// by sample. The matrix eps shrinks by 4 until the coefficients stay within eps.
inline PolyRipResult rip_poly(const PolyPath& pp, double eps, const RipConfig& cfg = {},
                              const std::optional<SpliceChoice>& choice = std::nullopt, int max_retries = 8) {
    if (!(eps > 0.0)) domain_error("rip_poly: eps must be positive");
    const MatrixPath cp = companion_path(pp);
    const TrackResult base = track(cp, cfg.track);
    const EigenPathSet reference = choice ? splice(base.paths, base.report, *choice) : base.paths;
    PolyRipResult result(pp);
    result.reference_pairing = pairing_from_paths(reference);
    if (base.report.empty()) {
        result.achieved_pairing = result.reference_pairing;
        result.notes.push_back("path is already ambiguity-free");
        return result;
    }
    double meps = eps;
    for (int attempt = 0; attempt <= max_retries; ++attempt, meps *= 0.25) {
        const RipResult r = rip(cp, meps, cfg, choice);
        std::vector<double> grid;
        if (const auto* s = std::get_if<SampledPath>(&r.new_path.form()))
            grid = s->grid;
        else
            grid = uniform_grid(cfg.check_points);
        std::vector<MonicPoly> polys;
        polys.reserve(grid.size());
        for (double t : grid) polys.push_back(char_poly(r.new_path(t), cfg.track.spectra));
        PolyPath candidate = PolyPath::sampled(grid, std::move(polys));
        std::vector<double> check = grid;
        for (std::size_t k = 1; k < grid.size(); ++k) check.push_back(0.5 * (grid[k - 1] + grid[k]));
        for (double t : uniform_grid(cfg.check_points)) check.push_back(t);
        const double cdev = poly_sup_distance(candidate, pp, check);
        const TrackResult tr = track_roots(candidate, cfg.track);
        const double rdev = detail::path_deviation(cp, reference, tr.paths, cfg.track.spectra);
        if (!(cdev < eps) || !tr.report.empty() || !(rdev < eps)) {
            result.notes.push_back("matrix eps " + std::to_string(meps) + " rejected: coefficient deviation " +
                                   std::to_string(cdev) + ", root deviation " + std::to_string(rdev) +
                                   ", ambiguities " + std::to_string(tr.report.ambiguities.size()));
            ++result.retries;
            continue;
        }
        result.new_path = std::move(candidate);
        result.coeff_dev = cdev;
        result.root_dev = rdev;
        result.matrix_eps = meps;
        result.achieved_pairing = pairing_from_paths(tr.paths);
        return result;
    }
    numerical_error("rip_poly: coefficient deviation stayed above eps after " + std::to_string(max_retries) +
                    " matrix eps reductions");
}

// ---------------------------------------------------------------------------
// Convex reduction for polynomial combinations

struct PolyReductionReport {
    bool hypothesis_holds = false;
    double min_join = 0.0, min_join_alpha = 0.0;
    /// Every convex root-pairing of (Q, R) is a root-pairing of the path
    /// f A + g B built from the companion matrices A, B.
    bool contained = false;
    PairingSet convex_root_pairings, path_root_pairings;
    std::vector<std::ptrdiff_t> witness;
    /// f + g == 1, so f A + g B is itself the companion path of the combination.
    bool companion_exact = false;
    /// When the weights do not sum to one: the same containment question for
    /// the monic combination (weights on the lower coefficients).
    std::optional<bool> monic_contained;
    std::vector<std::string> notes;
};

inline PolyReductionReport convex_reduction_poly(const MonicPoly& q, const MonicPoly& r, const ScalarFn& f,
                                                 const ScalarFn& g, const TrackConfig& cfg = {}) {
    if (q.degree() != r.degree()) domain_error("convex_reduction_poly: degrees differ");
    const CMatrix a = companion(q), b = companion(r);
    const ConvexReductionReport m = convex_reduction_check(a, b, f, g, cfg);
    PolyReductionReport rep;
    rep.hypothesis_holds = m.hypothesis_holds;
    rep.min_join = m.min_join;
    rep.min_join_alpha = m.min_join_alpha;
    rep.contained = m.contained;
    rep.convex_root_pairings = m.convex;
    rep.path_root_pairings = m.combination;
    rep.witness = m.witness;
    rep.notes = m.notes;
    rep.companion_exact = detail::weights_sum_to_one(f, g);
    if (!rep.hypothesis_holds || rep.companion_exact) return rep;
    const TrackResult mt = track_roots(PolyPath::combination(q, r, f, g), cfg);
    const PairingSet monic = enumerate_pairings(mt.paths, mt.report);
    const double tol = 1e-6 * (1.0 + std::max(max_norm(a), max_norm(b)));
    bool all = true;
    for (const auto& p : rep.convex_root_pairings.pairings)
        if (monic.find(p, tol) < 0) all = false;
    rep.monic_contained = all;
    rep.notes.push_back("weights do not sum to one: f A + g B is not a companion path; monic combination " +
                        std::string(all ? "also contains" : "does not contain") + " every convex root-pairing");
    return rep;
}

}  // namespace eigenpaths
