#pragma once

// Ambiguity-free perturbations of matrix paths. A path is cut into short
// windows around its collisions; inside each window the path is pushed off
// the collision by a small generic bump, and diagonal swap loops based at a
// window end correct the resulting pairing to a requested eigenpath set.
// Outside the windows the path is kept (or replaced by a Bernstein fit when
// its collision set is not finite).

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pairings.hpp"
#include "spectra.hpp"
#include "tracker.hpp"

namespace eigenpaths {

struct RipConfig {
    TrackConfig track;
    std::uint64_t seed = 1;
    /// Whole-construction retries; each halves the window width and bump size.
    int max_attempts = 6;
    /// Random bump directions tried per window and attempt.
    int candidates = 12;
    double window_half_width = 0.02;
    std::size_t detour_points = 257;
    /// Samples per half of one swap loop.
    std::size_t loop_points = 65;
    std::size_t outside_points = 1025;
    std::size_t check_points = 2001;
    std::size_t max_degree = std::size_t(1) << 16;
};

namespace detail {

inline CMatrix random_direction(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d(0.0, 1.0);
    CMatrix e(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = Complex(d(rng), d(rng));
    return e / max_norm(e);
}

/// Monomial coefficients of the Lagrange basis polynomial for nodes[k].
inline std::vector<double> lagrange_monomial(const std::vector<double>& nodes, std::size_t k) {
    std::vector<double> c{1.0};
    double denom = 1.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i == k) continue;
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t j = 0; j < c.size(); ++j) {
            next[j + 1] += c[j];
            next[j] -= nodes[i] * c[j];
        }
        c = std::move(next);
        denom *= nodes[k] - nodes[i];
    }
    for (double& x : c) x /= denom;
    return c;
}

/// Degree-d Bernstein coefficients of t^j: C(i, j) / C(d, j) for i >= j.
inline double monomial_in_bernstein(std::size_t d, std::size_t j, std::size_t i) {
    if (i < j) return 0.0;
    auto lc = [](double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); };
    return std::exp(lc(double(i), double(j)) - lc(double(d), double(j)));
}

inline bool distinct_spectrum(const CMatrix& m, double tol) { return min_gap(eigenvalues(m).values) > tol; }

}  // namespace detail

/// Entrywise Bernstein approximation of `path` with degree doubled until the
/// sup deviation on a check grid is below eps/2, then corrected by Lagrange
/// polynomials so the fit equals the path exactly at `fixed_alphas`. If the
/// fit has a repeated eigenvalue at a free point alpha0, a small generic
/// target is pinned there so the discriminant of the fit is not identically
/// zero.
inline MatrixPath bernstein_fit(const MatrixPath& path, std::vector<double> fixed_alphas, double eps,
                                const RipConfig& cfg = {}) {
    if (!(eps > 0.0)) domain_error("bernstein_fit: eps must be positive");
    std::sort(fixed_alphas.begin(), fixed_alphas.end());
    for (std::size_t i = 0; i < fixed_alphas.size(); ++i) {
        if (!(fixed_alphas[i] >= 0.0 && fixed_alphas[i] <= 1.0)) domain_error("bernstein_fit: fixed alpha outside [0,1]");
        if (i > 0 && fixed_alphas[i] - fixed_alphas[i - 1] < 1e-12) domain_error("bernstein_fit: fixed alphas must be distinct");
    }
    const std::size_t n = path.dim();
    std::vector<double> grid = uniform_grid(cfg.check_points);
    for (double a : fixed_alphas) grid.push_back(a);
    std::sort(grid.begin(), grid.end());
    const double scale = 1.0 + sup_distance(path, MatrixPath::constant(CMatrix::Zero(Eigen::Index(n), Eigen::Index(n))), grid);
    const double gap_tol = std::max(1e-9, 10.0 * cfg.track.collision_tol) * scale;

    // Polynomial inputs are their own fit.
    if (path.is_polynomial() || path.is_convex()) {
        std::vector<double> free_pts{0.0, 1.0};
        free_pts.insert(free_pts.end(), fixed_alphas.begin(), fixed_alphas.end());
        std::sort(free_pts.begin(), free_pts.end());
        double best = 0.5, width = -1.0;
        for (std::size_t i = 1; i < free_pts.size(); ++i)
            if (free_pts[i] - free_pts[i - 1] > width) width = free_pts[i] - free_pts[i - 1], best = 0.5 * (free_pts[i] + free_pts[i - 1]);
        if (detail::distinct_spectrum(path(best), gap_tol)) {
            if (path.is_polynomial()) return path;
            const auto& c = std::get<ConvexPath>(path.form());
            return MatrixPath::polynomial({c.a, c.b}, PolynomialPath::Basis::Bernstein);
        }
    }

    std::vector<CMatrix> coeffs;
    double dev = 0.0;
    // The Lagrange correction (one node per fixed point plus a possible free
    // point) must fit inside the Bernstein degree.
    std::size_t degree = 1;
    while (degree < fixed_alphas.size() + 1) degree *= 2;
    for (;; degree *= 2) {
        coeffs.resize(degree + 1);
        for (std::size_t k = 0; k <= degree; ++k) coeffs[k] = path(double(k) / double(degree));
        dev = sup_distance(path, MatrixPath::polynomial(coeffs, PolynomialPath::Basis::Bernstein), grid);
        if (dev < eps / 2) break;
        if (degree >= cfg.max_degree) {
            const double needed = double(degree) * dev / (eps / 2);
            domain_error("bernstein_fit: degree " + std::to_string(degree) + " leaves deviation " + std::to_string(dev) +
                         "; roughly degree " + std::to_string(std::size_t(needed)) + " is required");
        }
    }

    std::mt19937_64 rng(cfg.seed);
    auto corrected = [&](const std::vector<double>& nodes, const std::vector<CMatrix>& targets) {
        const MatrixPath base = MatrixPath::polynomial(coeffs, PolynomialPath::Basis::Bernstein);
        std::vector<CMatrix> out = coeffs;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const CMatrix r = targets[k] - base(nodes[k]);
            if (max_norm(r) == 0.0) continue;
            const auto lm = detail::lagrange_monomial(nodes, k);
            for (std::size_t i = 0; i <= degree; ++i) {
                double w = 0.0;
                for (std::size_t j = 0; j < lm.size() && j <= i; ++j) w += lm[j] * detail::monomial_in_bernstein(degree, j, i);
                if (w != 0.0) out[i] += w * r;
            }
        }
        // Exact agreement at the endpoints survives the correction's rounding.
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (nodes[k] == 0.0) out.front() = targets[k];
            if (nodes[k] == 1.0) out.back() = targets[k];
        }
        return MatrixPath::polynomial(std::move(out), PolynomialPath::Basis::Bernstein);
    };

    std::vector<double> nodes = fixed_alphas;
    std::vector<CMatrix> targets;
    for (double a : nodes) targets.push_back(path(a));
    MatrixPath fit = corrected(nodes, targets);

    // Free point: midpoint of the widest gap between constraints.
    std::vector<double> pts{0.0, 1.0};
    pts.insert(pts.end(), nodes.begin(), nodes.end());
    std::sort(pts.begin(), pts.end());
    double alpha0 = 0.5, width = -1.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i] - pts[i - 1] > width) width = pts[i] - pts[i - 1], alpha0 = 0.5 * (pts[i] + pts[i - 1]);
    if (!detail::distinct_spectrum(fit(alpha0), gap_tol)) {
        bool done = false;
        for (int attempt = 0; attempt < 8 && !done; ++attempt) {
            auto nn = nodes;
            auto tt = targets;
            nn.push_back(alpha0);
            tt.push_back(fit(alpha0) + (eps / 8) * detail::random_direction(rng, n));
            MatrixPath trial = corrected(nn, tt);
            if (detail::distinct_spectrum(trial(alpha0), gap_tol)) {
                fit = std::move(trial);
                done = true;
            }
        }
        if (!done) numerical_error("bernstein_fit: could not move the free point off a repeated eigenvalue");
    }
    const double total = sup_distance(path, fit, grid);
    if (!(total < eps))
        domain_error("bernstein_fit: fixed points too dense for eps; correction raises the deviation to " +
                     std::to_string(total) + " at degree " + std::to_string(degree) + "; try degree " +
                     std::to_string(std::size_t(double(degree) * total / (eps / 2))));
    return fit;
}

/// Loop from D back to D that exchanges the diagonal entries d_i and d_j and
/// fixes the rest. On [0, 1/2] the (i, j) block is conjugated by a rotation
/// through angle pi*alpha (constant spectrum); on [1/2, 1] the two entries
/// travel back along opposite halves of an ellipse with diameter [d_i, d_j],
/// flattened while any other entry lies inside it. Sampled with
/// `points_per_half` samples on each half.
inline MatrixPath swap_path(const CMatrix& d, std::size_t i, std::size_t j, std::size_t points_per_half = 129) {
    require_square(d, "swap_path D");
    const std::size_t n = std::size_t(d.rows());
    if (i >= n || j >= n || i == j) domain_error("swap_path: need two distinct indices within the matrix");
    const double scale = max_norm(d);
    for (Eigen::Index r = 0; r < d.rows(); ++r)
        for (Eigen::Index c = 0; c < d.cols(); ++c)
            if (r != c && std::abs(d(r, c)) > 1e-14 * (1.0 + scale)) domain_error("swap_path: D must be diagonal");
    const Complex di = d(Eigen::Index(i), Eigen::Index(i)), dj = d(Eigen::Index(j), Eigen::Index(j));
    if (di == dj) domain_error("swap_path: d_i == d_j");
    if (points_per_half < 3) domain_error("swap_path: need at least 3 samples per half");

    const Complex mid = 0.5 * (di + dj), u = 0.5 * (di - dj);
    double h = 1.0;
    for (int shrink = 0;; ++shrink) {
        bool clear = true;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i || k == j) continue;
            const Complex zeta = (d(Eigen::Index(k), Eigen::Index(k)) - mid) / u;
            if (std::abs(zeta.imag()) <= 1e-12 && std::abs(zeta.real()) < 1.0)
                domain_error("swap_path: another diagonal entry lies on the segment between d_i and d_j");
            const double rr = zeta.real() * zeta.real() + (zeta.imag() / h) * (zeta.imag() / h);
            if (rr <= 1.0 + 1e-9) clear = false;
        }
        if (clear) break;
        if (shrink >= 60) domain_error("swap_path: could not clear the arc of other diagonal entries");
        h *= 0.5;
    }

    const std::size_t steps = points_per_half - 1;
    std::vector<double> grid;
    std::vector<CMatrix> mats;
    const auto ii = Eigen::Index(i), jj = Eigen::Index(j);
    for (std::size_t k = 0; k <= 2 * steps; ++k) {
        const double alpha = double(k) / double(2 * steps);
        CMatrix m = d;
        if (k <= steps) {
            const double c = std::cos(kPi * alpha), s = std::sin(kPi * alpha);
            // R D R^T restricted to the (i, j) block, R = [[c, -s], [s, c]].
            m(ii, ii) = c * c * di + s * s * dj;
            m(jj, jj) = s * s * di + c * c * dj;
            m(ii, jj) = c * s * (di - dj);
            m(jj, ii) = c * s * (di - dj);
            if (k == steps) m(ii, jj) = m(jj, ii) = 0.0;
        } else {
            const double t = 2.0 * alpha - 1.0;
            const Complex shape(-std::cos(kPi * t), h * std::sin(kPi * t));
            m(ii, ii) = mid + u * shape;
            m(jj, jj) = mid - u * shape;
            if (k == 2 * steps) m(ii, ii) = di, m(jj, jj) = dj;
        }
        grid.push_back(alpha);
        mats.push_back(std::move(m));
    }
    grid.back() = 1.0;
    return MatrixPath::sampled(std::move(grid), std::move(mats));
}

struct RipWindow {
    double alpha_lo = 0.0, alpha_hi = 0.0;
    bool open_left = false, open_right = false;
    double bump = 0.0;
    std::size_t transpositions = 0;
    int candidate = -1;
};

struct RipResult {
    MatrixPath new_path;
    double sup_dev = 0.0;
    double path_dev = 0.0;
    std::pair<bool, bool> endpoint_preserved{true, true};
    bool fitted = false;
    int attempts = 0;
    std::vector<RipWindow> windows;
    std::optional<Eigenpairing> reference_pairing, achieved_pairing;
    std::vector<std::string> notes;

    explicit RipResult(MatrixPath p) : new_path(std::move(p)) {}
};

namespace detail {

/// Alpha values (in (0,1) or at the ends) where the spectrum of `path` has a
/// repeated eigenvalue: local minima of |disc(char_poly(C(alpha)))| on a grid
/// and tracked collision clusters, refined by golden-section search and kept
/// when the eigenvalue gap there is at collision scale.
inline std::vector<double> discriminant_roots(const MatrixPath& path, const TrackConfig& cfg,
                                              const std::vector<Ambiguity>& clusters, std::size_t points = 2049) {
    auto f = [&](double a) { return std::abs(discriminant(char_poly(path(a), cfg.spectra))); };
    auto refine = [&](double lo, double hi) {
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = f(x1), f2 = f(x2);
        for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
            if (f1 <= f2) {
                hi = x2, x2 = x1, f2 = f1;
                x1 = hi - g * (hi - lo), f1 = f(x1);
            } else {
                lo = x1, x1 = x2, f1 = f2;
                x2 = lo + g * (hi - lo), f2 = f(x2);
            }
        }
        return 0.5 * (lo + hi);
    };
    const auto grid = uniform_grid(points);
    std::vector<double> vals(points);
    double fmax = 0.0;
    for (std::size_t k = 0; k < points; ++k) fmax = std::max(fmax, vals[k] = f(grid[k]));
    std::vector<double> cand;
    for (std::size_t k = 0; k < points; ++k) {
        const bool left = k == 0 || vals[k] <= vals[k - 1];
        const bool right = k + 1 == points || vals[k] <= vals[k + 1];
        if (left && right) cand.push_back(refine(grid[k == 0 ? 0 : k - 1], grid[k + 1 == points ? k : k + 1]));
    }
    for (const auto& amb : clusters) cand.push_back(amb.alpha);
    std::sort(cand.begin(), cand.end());
    std::vector<double> out;
    for (double a : cand) {
        const CMatrix m = path(a);
        const double gap = min_gap(eigenvalues(m, cfg.spectra).values);
        const double tol = std::max(1e-6 * (1.0 + max_norm(m)), cfg.collision_tol);
        const bool from_cluster =
            std::any_of(clusters.begin(), clusters.end(), [&](const Ambiguity& c) { return c.alpha == a; });
        if (!(gap <= tol || from_cluster || f(a) <= 1e-14 * fmax)) continue;
        if (!out.empty() && a - out.back() < 1e-6) continue;
        out.push_back(a);
    }
    return out;
}

/// Transpositions (x, y) realizing the index map tau (label at x moves to tau(x)).
inline std::vector<std::pair<std::size_t, std::size_t>> transpositions_of(const Permutation& tau) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::vector<char> seen(tau.size(), 0);
    for (std::size_t c0 = 0; c0 < tau.size(); ++c0) {
        if (seen[c0]) continue;
        seen[c0] = 1;
        for (std::size_t c = tau(c0); c != c0; c = tau(c)) {
            seen[c] = 1;
            out.emplace_back(c0, c);
        }
    }
    return out;
}

struct WindowSpec {
    double a = 0.0, b = 0.0;
    bool open_left = false, open_right = false;
};

struct WindowBuild {
    std::vector<double> local;  // in [0,1]
    std::vector<CMatrix> mats;
    RipWindow info;
};

/// Builds the perturbed path over one window of P. With a reference set the
/// pairing through the window is corrected to match it; without one any
/// collision-free candidate is accepted.
inline std::optional<WindowBuild> build_window(const MatrixPath& p, const WindowSpec& w, const EigenPathSet* reference,
                                               double eps, double bump, const RipConfig& cfg, std::mt19937_64& rng) {
    const std::size_t n = p.dim();
    auto shape = [&](double s) {
        if (w.open_left && w.open_right) return 1.0;
        if (w.open_left) return std::cos(0.5 * kPi * s);
        if (w.open_right) return std::sin(0.5 * kPi * s);
        return std::sin(kPi * s);
    };
    const std::vector<double> local = uniform_grid(cfg.detour_points);
    // The second direction has a profile that changes sign mid-window. At a
    // crossing through a non-diagonalizable matrix a single sign-definite bump
    // gives the same pairing for E and -E; the twist reaches the other one.
    auto detour_mats = [&](const CMatrix& e, const CMatrix& twist) {
        std::vector<CMatrix> m;
        for (double s : local) {
            CMatrix x = p(w.a + s * (w.b - w.a)) + (bump * shape(s)) * e;
            if (twist.size() > 0) x += (bump * shape(s) * std::cos(kPi * s)) * twist;
            m.push_back(std::move(x));
        }
        if (!w.open_left) m.front() = p(w.a);
        if (!w.open_right) m.back() = p(w.b);
        return m;
    };
    // Loops sit at the closed end of the window, the right one if possible.
    const bool loops_right = !w.open_right, loops_possible = !(w.open_left && w.open_right);

    struct Candidate {
        std::vector<CMatrix> mats;
        std::vector<std::pair<std::size_t, std::size_t>> swaps;
        CMatrix s, d;
        double cost = 0.0;
        int index = -1;
    };
    std::optional<Candidate> best;
    CMatrix e_prev, t_prev;
    for (int c = 0; c < cfg.candidates; ++c) {
        CMatrix e, t;
        if (c % 2 == 1) {
            e = -e_prev;
            t = -t_prev;
        } else {
            e = detail::random_direction(rng, n);
            if ((c / 2) % 2 == 1) t = detail::random_direction(rng, n);
        }
        e_prev = e;
        t_prev = t;
        auto mats = detour_mats(e, t);
        const auto wt = track(MatrixPath::sampled(local, mats), cfg.track);
        if (!wt.report.ambiguities.empty()) continue;
        Candidate cand{std::move(mats), {}, CMatrix(), CMatrix(), 0.0, c};
        if (!reference) {
            best = std::move(cand);
            break;
        }
        const CMatrix ma = cand.mats.front(), mb = cand.mats.back();
        Eigen::ComplexEigenSolver<CMatrix> sa(ma), sb(mb);
        std::vector<Complex> da(n), db(n), ra(n), rb(n);
        for (std::size_t k = 0; k < n; ++k) {
            da[k] = sa.eigenvalues()(Eigen::Index(k));
            db[k] = sb.eigenvalues()(Eigen::Index(k));
            ra[k] = reference->at(k, w.a);
            rb[k] = reference->at(k, w.b);
        }
        const Permutation m1 = match_spectra(da, wt.paths.column(0));
        const Permutation m2 = match_spectra(wt.paths.column(wt.paths.grid.size() - 1), db);
        std::vector<std::size_t> dmap(n);
        for (std::size_t x = 0; x < n; ++x) dmap[x] = m2(m1(x));
        const Permutation detour_map(dmap);
        const Permutation ia = match_spectra(ra, da), ib = match_spectra(rb, db);
        std::vector<std::size_t> tau(n);
        for (std::size_t l = 0; l < n; ++l) {
            if (loops_right)
                tau[detour_map(ia(l))] = ib(l);
            else
                tau[ia(l)] = detour_map.inverse()(ib(l));
        }
        cand.swaps = transpositions_of(Permutation(tau));
        if (cand.swaps.empty()) {
            best = std::move(cand);
            break;
        }
        if (!loops_possible) continue;
        const auto& solver = loops_right ? sb : sa;
        cand.s = solver.eigenvectors();
        cand.d = CMatrix::Zero(Eigen::Index(n), Eigen::Index(n));
        for (std::size_t k = 0; k < n; ++k) cand.d(Eigen::Index(k), Eigen::Index(k)) = (loops_right ? db : da)[k];
        Eigen::JacobiSVD<CMatrix> svd(cand.s);
        const double cond = svd.singularValues()(0) / svd.singularValues()(Eigen::Index(n) - 1);
        for (auto [x, y] : cand.swaps)
            cand.cost = std::max(cand.cost, cond * std::abs(cand.d(Eigen::Index(x), Eigen::Index(x)) -
                                                            cand.d(Eigen::Index(y), Eigen::Index(y))));
        if (cand.cost > eps / 4) continue;
        if (!best || cand.swaps.size() < best->swaps.size() || (cand.swaps.size() == best->swaps.size() && cand.cost < best->cost))
            best = std::move(cand);
    }
    if (!best) return std::nullopt;

    WindowBuild out;
    out.info.alpha_lo = w.a;
    out.info.alpha_hi = w.b;
    out.info.open_left = w.open_left;
    out.info.open_right = w.open_right;
    out.info.bump = bump;
    out.info.transpositions = best->swaps.size();
    out.info.candidate = best->index;
    if (best->swaps.empty()) {
        out.local = local;
        out.mats = std::move(best->mats);
        return out;
    }
    // Detour on 60% of the window, the loops share the rest.
    const double frac = 0.6;
    const double detour_lo = loops_right ? 0.0 : 1.0 - frac, loop_lo = loops_right ? frac : 0.0;
    const double loop_len = (1.0 - frac) / double(best->swaps.size());
    const CMatrix sinv = best->s.inverse();
    std::vector<std::pair<double, CMatrix>> pieces;
    for (std::size_t k = 0; k < local.size(); ++k) pieces.emplace_back(detour_lo + frac * local[k], best->mats[k]);
    for (std::size_t r = 0; r < best->swaps.size(); ++r) {
        const MatrixPath loop = swap_path(best->d, best->swaps[r].first, best->swaps[r].second, cfg.loop_points);
        const auto& sp = std::get<SampledPath>(loop.form());
        for (std::size_t k = 0; k < sp.grid.size(); ++k)
            pieces.emplace_back(loop_lo + loop_len * (double(r) + sp.grid[k]), best->s * sp.matrices[k] * sinv);
    }
    std::stable_sort(pieces.begin(), pieces.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (auto& [s, m] : pieces) {
        if (!out.local.empty() && s <= out.local.back()) continue;
        out.local.push_back(s);
        out.mats.push_back(std::move(m));
    }
    // Seams: the loop base equals the detour end matrix up to the eigensolver
    // reconstruction; pin the window ends to P exactly.
    if (!w.open_left) out.mats.front() = p(w.a);
    if (!w.open_right) out.mats.back() = p(w.b);
    out.local.back() = 1.0;
    return out;
}

/// Eigenvalues of C(alpha) labelled by the nearest reference path, so that
/// deviations are measured against exact spectra rather than interpolants.
inline double path_deviation(const MatrixPath& original, const EigenPathSet& reference, const EigenPathSet& tracked,
                             const SpectraConfig& sc) {
    const std::size_t n = reference.size();
    const Permutation m0 = match_spectra(reference.column(0), tracked.column(0));
    double dev = 0.0;
    for (std::size_t k = 0; k < tracked.grid.size(); ++k) {
        const double a = tracked.grid[k];
        std::vector<Complex> r(n);
        for (std::size_t l = 0; l < n; ++l) r[l] = reference.at(l, a);
        const auto exact = eigenvalues(original(a), sc).values;
        const Permutation mm = match_spectra(r, exact);
        for (std::size_t l = 0; l < n; ++l) dev = std::max(dev, std::abs(tracked.paths[m0(l)][k] - exact[mm(l)]));
    }
    return dev;
}

struct Assembly {
    MatrixPath path;
    std::vector<RipWindow> windows;
};

/// Windows around the given collision intervals of P, merged when they
/// overlap, then the whole path sampled with window pieces substituted.
inline std::optional<Assembly> assemble(const MatrixPath& p, const std::vector<std::pair<double, double>>& intervals,
                                        const EigenPathSet* reference, const std::vector<double>& base_grid, double eps,
                                        double width_scale, double bump, const RipConfig& cfg, std::mt19937_64& rng,
                                        std::vector<std::string>& notes) {
    const double scale = 1.0 + max_norm(p(0.0)) + max_norm(p(1.0));
    const double open_tol = std::max(1e-9, 10.0 * cfg.track.collision_tol) * scale;
    std::vector<WindowSpec> specs;
    for (const auto& [lo, hi] : intervals) {
        const double center = 0.5 * (lo + hi);
        const CMatrix pc = p(center);
        double w = width_scale * cfg.window_half_width;
        double a = 0.0, b = 1.0;
        for (;;) {
            a = std::max(0.0, lo - w);
            b = std::min(1.0, hi + w);
            bool ok = true;
            for (int k = 0; k <= 32 && ok; ++k) {
                const double t = a + (b - a) * k / 32.0;
                if (max_norm(p(t) - pc) > eps / 8) ok = false;
                if (reference)
                    for (std::size_t l = 0; l < reference->size() && ok; ++l)
                        if (std::abs(reference->at(l, t) - reference->at(l, center)) > eps / 4) ok = false;
            }
            if (ok) break;
            w *= 0.5;
            if (w < 1e-12) numerical_error("rip: no window around alpha=" + std::to_string(center) + " keeps the path within eps");
        }
        WindowSpec s{a, b, false, false};
        s.open_left = a == 0.0 && !distinct_spectrum(p(0.0), open_tol);
        s.open_right = b == 1.0 && !distinct_spectrum(p(1.0), open_tol);
        specs.push_back(s);
    }
    std::sort(specs.begin(), specs.end(), [](const WindowSpec& x, const WindowSpec& y) { return x.a < y.a; });
    std::vector<WindowSpec> merged;
    for (const auto& s : specs) {
        if (!merged.empty() && s.a <= merged.back().b) {
            merged.back().b = std::max(merged.back().b, s.b);
            merged.back().open_right = merged.back().open_right || s.open_right;
        } else {
            merged.push_back(s);
        }
    }

    std::map<double, CMatrix> samples;
    for (double t : base_grid) samples.emplace(t, p(t));
    for (double t : uniform_grid(cfg.outside_points)) samples.emplace(t, p(t));
    Assembly out{p, {}};
    for (const auto& w : merged) {
        auto built = build_window(p, w, reference, eps, bump, cfg, rng);
        if (!built) {
            notes.push_back("window [" + std::to_string(w.a) + ", " + std::to_string(w.b) + "] found no admissible detour");
            return std::nullopt;
        }
        for (auto it = samples.lower_bound(w.a); it != samples.end() && it->first <= w.b;) it = samples.erase(it);
        for (std::size_t k = 0; k < built->local.size(); ++k) {
            const double t = k + 1 == built->local.size() ? w.b : w.a + built->local[k] * (w.b - w.a);
            samples[t] = built->mats[k];
        }
        out.windows.push_back(built->info);
    }
    std::vector<double> grid;
    std::vector<CMatrix> mats;
    for (auto& [t, m] : samples) {
        grid.push_back(t);
        mats.push_back(m);
    }
    out.path = MatrixPath::sampled(std::move(grid), std::move(mats));
    return out;
}

inline std::vector<double> check_grid(const MatrixPath& candidate, std::size_t points) {
    std::vector<double> g = uniform_grid(points);
    const auto& sp = std::get<SampledPath>(candidate.form());
    g.insert(g.end(), sp.grid.begin(), sp.grid.end());
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

inline std::vector<std::pair<double, double>> collision_intervals(const AmbiguityReport& report) {
    std::vector<std::pair<double, double>> out;
    for (const auto& amb : report.ambiguities) out.emplace_back(amb.alpha_lo, amb.alpha_hi);
    return out;
}

inline RipResult rip_impl(const MatrixPath& path, double eps, const RipConfig& cfg, const SpliceChoice* choice,
                          bool keep_start, bool keep_end) {
    if (!(eps > 0.0)) domain_error("rip: eps must be positive");
    const TrackResult base = track(path, cfg.track);
    const EigenPathSet reference = choice ? splice(base.paths, base.report, *choice) : base.paths;
    RipResult result(path);
    result.reference_pairing = pairing_from_paths(reference);
    if (base.report.empty()) {
        result.achieved_pairing = pairing_from_paths(base.paths);
        if (choice && !equivalent(*result.achieved_pairing, *result.reference_pairing, 1e-12))
            domain_error("rip: splice choice given for a path without ambiguities");
        result.notes.push_back("path has no ambiguities; returned unchanged");
        return result;
    }

    // A cluster that persists over an interval (or steps left unresolved)
    // means the collision set is not finite: replace the path by a
    // polynomial fit that agrees with it at the point collisions and the kept endpoints.
    bool wide = !base.report.unresolved_alphas.empty();
    for (const auto& amb : base.report.ambiguities) wide = wide || amb.alpha_hi - amb.alpha_lo > 1e-6;
    MatrixPath p = path;
    TrackResult tp = base;
    if (wide) {
        std::vector<double> fixed;
        if (keep_start) fixed.push_back(0.0);
        if (keep_end) fixed.push_back(1.0);
        for (const auto& amb : base.report.ambiguities)
            if (amb.alpha_hi - amb.alpha_lo <= 1e-6 && amb.alpha > 0.0 && amb.alpha < 1.0) fixed.push_back(amb.alpha);
        std::sort(fixed.begin(), fixed.end());
        fixed.erase(std::unique(fixed.begin(), fixed.end(), [](double x, double y) { return y - x < 1e-9; }), fixed.end());
        p = bernstein_fit(path, fixed, eps / 4, cfg);
        tp = track(p, cfg.track);
        result.fitted = true;
        result.notes.push_back("collision set not finite; path replaced by a Bernstein fit before detours");
    }

    double width_scale = 1.0, bump_scale = 1.0;
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        result.attempts = attempt + 1;
        std::mt19937_64 rng(cfg.seed + 7919ULL * std::uint64_t(attempt));
        const auto intervals = collision_intervals(tp.report);
        std::optional<Assembly> as;
        if (intervals.empty()) {
            // The fit already removed every collision.
            const auto g = uniform_grid(cfg.outside_points);
            std::vector<CMatrix> mats;
            for (double t : g) mats.push_back(p(t));
            as = Assembly{MatrixPath::sampled(g, mats), {}};
        } else {
            as = assemble(p, intervals, &reference, tp.paths.grid, eps, width_scale, bump_scale * eps / 8, cfg, rng,
                          result.notes);
        }
        width_scale *= 0.5;
        bump_scale *= 0.5;
        if (!as) continue;
        const TrackResult tr = track(as->path, cfg.track);
        const double sup = sup_distance(path, as->path, check_grid(as->path, cfg.check_points));
        const double dev = path_deviation(path, reference, tr.paths, cfg.track.spectra);
        if (!tr.report.ambiguities.empty() || !(sup < eps) || !(dev < eps)) {
            result.notes.push_back("attempt " + std::to_string(attempt + 1) + " rejected: ambiguities=" +
                                   std::to_string(tr.report.ambiguities.size()) + " sup_dev=" + std::to_string(sup) +
                                   " path_dev=" + std::to_string(dev));
            continue;
        }
        result.new_path = as->path;
        result.windows = as->windows;
        result.sup_dev = sup;
        result.path_dev = dev;
        result.achieved_pairing = pairing_from_paths(tr.paths);
        result.endpoint_preserved = {max_norm(as->path(0.0) - path(0.0)) == 0.0, max_norm(as->path(1.0) - path(1.0)) == 0.0};
        if (!tr.report.unresolved_alphas.empty())
            result.notes.push_back("final tracking left " + std::to_string(tr.report.unresolved_alphas.size()) +
                                   " steps unresolved at the depth cap");
        return result;
    }
    std::string where;
    for (const auto& amb : tp.report.ambiguities) where += " " + std::to_string(amb.alpha);
    numerical_error("rip: no ambiguity-free perturbation within eps after " + std::to_string(cfg.max_attempts) +
                    " attempts; collisions at alpha =" + where +
                    (result.notes.empty() ? std::string() : "; last: " + result.notes.back()));
}

}  // namespace detail

/// Ambiguity-free path within eps of `path` whose eigenpaths stay within eps
/// of the tracked eigenpath set, or of the set spliced by `choice`.
inline RipResult rip(const MatrixPath& path, double eps, const RipConfig& cfg = {},
                     const std::optional<SpliceChoice>& choice = std::nullopt) {
    return detail::rip_impl(path, eps, cfg, choice ? &*choice : nullptr, false, false);
}

/// As rip, keeping C(0) and/or C(1) exactly. Each kept endpoint must have
/// distinct eigenvalues.
inline RipResult rip_preserving_endpoints(const MatrixPath& path, double eps, bool keep_start = true,
                                          bool keep_end = true, const RipConfig& cfg = {},
                                          const std::optional<SpliceChoice>& choice = std::nullopt) {
    const double tol = std::max(1e-9, 10.0 * cfg.track.collision_tol);
    if (keep_start && !detail::distinct_spectrum(path(0.0), tol * (1.0 + max_norm(path(0.0)))))
        domain_error("rip_preserving_endpoints: C(0) has a repeated eigenvalue");
    if (keep_end && !detail::distinct_spectrum(path(1.0), tol * (1.0 + max_norm(path(1.0)))))
        domain_error("rip_preserving_endpoints: C(1) has a repeated eigenvalue");
    RipResult r = detail::rip_impl(path, eps, cfg, choice ? &*choice : nullptr, keep_start, keep_end);
    if ((keep_start && !r.endpoint_preserved.first) || (keep_end && !r.endpoint_preserved.second))
        numerical_error("rip_preserving_endpoints: construction moved a kept endpoint");
    return r;
}

/// Path from A to B within eps of the segment, with no repeated eigenvalue
/// anywhere: generic bumps over short windows around each discriminant root.
inline MatrixPath detour(const CMatrix& a, const CMatrix& b, double eps, const RipConfig& cfg = {}) {
    if (!(eps > 0.0)) domain_error("detour: eps must be positive");
    const double tol = std::max(1e-9, 10.0 * cfg.track.collision_tol);
    if (!detail::distinct_spectrum(a, tol * (1.0 + max_norm(a))) || !detail::distinct_spectrum(b, tol * (1.0 + max_norm(b))))
        domain_error("detour: A and B must have distinct eigenvalues");
    const MatrixPath path = MatrixPath::convex(a, b);
    const TrackResult base = track(path, cfg.track);
    const auto roots = detail::discriminant_roots(path, cfg.track, base.report.ambiguities);
    if (roots.empty()) return path;
    std::vector<std::pair<double, double>> intervals;
    for (double r : roots) intervals.emplace_back(r, r);
    double width_scale = 1.0, bump_scale = 1.0;
    std::vector<std::string> notes;
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        std::mt19937_64 rng(cfg.seed + 7919ULL * std::uint64_t(attempt));
        auto as = detail::assemble(path, intervals, nullptr, base.paths.grid, eps, width_scale, bump_scale * eps / 8, cfg,
                                   rng, notes);
        width_scale *= 0.5;
        bump_scale *= 0.5;
        if (!as) continue;
        const TrackResult tr = track(as->path, cfg.track);
        if (tr.report.ambiguities.empty() && sup_distance(path, as->path, detail::check_grid(as->path, cfg.check_points)) < eps)
            return as->path;
    }
    std::string where;
    for (double r : roots) where += " " + std::to_string(r);
    numerical_error("detour: bump search failed; discriminant roots at alpha =" + where);
}

}  // namespace eigenpaths
