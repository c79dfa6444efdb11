#pragma once

// Endpoint pairings of tracked eigenpath sets, enumeration of every pairing
// reachable by splicing at collision clusters, path transforms that act
// predictably on pairings, and the convex-reduction checker for
// combination paths f(alpha) A + g(alpha) B.

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "tracker.hpp"

namespace eigenpaths {

/// Endpoint bijection induced by a tracked set: path j starts at the j-th
/// sorted eigenvalue of C(0) and ends at target index perm(j) of the sorted
/// spectrum of C(1) (repeated target values assigned lexicographically).
inline Eigenpairing pairing_from_paths(const EigenPathSet& eps) {
    if (eps.paths.empty() || eps.grid.empty()) domain_error("pairing_from_paths: empty eigenpath set");
    const auto first = eps.column(0), last = eps.column(eps.grid.size() - 1);
    Spectrum source(first), target(last);
    const auto to_source = match_spectra(source.values, first);  // sorted index -> path
    const auto to_target = match_spectra(last, target.values);   // path -> sorted index
    std::vector<std::size_t> m(eps.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = to_target(to_source(i));
    return {Permutation(std::move(m)), std::move(source), std::move(target)};
}

inline Eigenpairing inverse(const Eigenpairing& p) { return {p.perm.inverse(), p.target, p.source}; }

/// second ∘ first, defined when first.target and second.source agree as
/// multisets within tol (labels are re-matched if they differ).
inline Eigenpairing compose(const Eigenpairing& second, const Eigenpairing& first, double tol) {
    const auto link = match_spectra(first.target.values, second.source.values);
    if (matching_max(first.target.values, second.source.values, link) > tol)
        domain_error("compose: intermediate spectra differ");
    std::vector<std::size_t> m(first.perm.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = second.perm(link(first.perm(i)));
    return {Permutation(std::move(m)), first.source, second.target};
}

struct PairingSet {
    std::vector<Eigenpairing> pairings;
    /// Splice choice that generates pairings[i] from the tracked set.
    std::vector<SpliceChoice> generators;
    bool truncated = false;
    std::vector<std::string> notes;

    std::size_t size() const { return pairings.size(); }
    /// Index of a pairing with the same value map within tol, or -1.
    std::ptrdiff_t find(const Eigenpairing& p, double tol) const {
        for (std::size_t i = 0; i < pairings.size(); ++i)
            if (equivalent(pairings[i], p, tol)) return std::ptrdiff_t(i);
        return -1;
    }
    bool contains(const Eigenpairing& p, double tol) const { return find(p, tol) >= 0; }
};

inline constexpr std::size_t kDefaultPairingCap = 10000;

/// Breadth-first over clusters in alpha order: at each cluster of
/// multiplicity m every one of the m! in-cluster permutations is applied to
/// every assignment reached so far. Distinct label permutations are kept,
/// so repeated endpoint values can yield several pairings with one value map.
inline PairingSet enumerate_pairings(const EigenPathSet& eps, const AmbiguityReport& report,
                                     std::size_t cap = kDefaultPairingCap) {
    PairingSet out;
    const std::size_t n = eps.size();
    const Eigenpairing base = pairing_from_paths(eps);
    std::vector<std::size_t> id(n);
    std::iota(id.begin(), id.end(), std::size_t{0});
    std::vector<std::pair<std::vector<std::size_t>, SpliceChoice>> frontier{{id, {}}};
    for (const auto& amb : report.ambiguities) {
        if (amb.multiplicity >= 3)
            out.notes.push_back("cluster of multiplicity " + std::to_string(amb.multiplicity) + " at alpha=" +
                                std::to_string(amb.alpha) +
                                ": all m! in-cluster permutations generated, achievability not proven");
        const auto perms = detail::all_permutations(amb.members.size());
        std::map<std::vector<std::size_t>, SpliceChoice> seen;
        std::vector<std::pair<std::vector<std::size_t>, SpliceChoice>> next;
        for (const auto& [follow, choice] : frontier) {
            for (const auto& sigma : perms) {
                auto f = follow;
                apply_splice(f, amb, sigma);
                if (seen.count(f)) continue;
                SpliceChoice c = choice;
                c.perms.push_back(sigma);
                seen.emplace(f, c);
                next.emplace_back(std::move(f), std::move(c));
                if (next.size() >= cap) break;
            }
            if (next.size() >= cap) {
                out.truncated = true;
                break;
            }
        }
        frontier = std::move(next);
    }
    for (auto& [follow, choice] : frontier) {
        std::vector<std::size_t> m(n);
        for (std::size_t j = 0; j < n; ++j) m[j] = base.perm(follow[j]);
        // Pad choices when enumeration stopped early so generators stay
        // applicable to `splice`.
        while (choice.perms.size() < report.ambiguities.size())
            choice.perms.push_back(Permutation::identity(report.ambiguities[choice.perms.size()].members.size()));
        out.pairings.push_back({Permutation(std::move(m)), base.source, base.target});
        out.generators.push_back(std::move(choice));
    }
    if (out.truncated) out.notes.push_back("enumeration truncated at cap " + std::to_string(cap));
    if (!report.unresolved_alphas.empty())
        out.notes.push_back("tracking left " + std::to_string(report.unresolved_alphas.size()) +
                            " steps unresolved at the depth cap; near-collisions there are not enumerated");
    return out;
}

// ---------------------------------------------------------------------------
// Transforms

namespace detail {

inline std::vector<double> sampling_grid(const MatrixPath& p, std::size_t dense = 2049) {
    if (const auto* s = std::get_if<SampledPath>(&p.form())) return s->grid;
    if (p.is_convex()) return {0.0, 1.0};
    return uniform_grid(dense);
}

inline MatrixPath sample(const MatrixPath& p, const std::vector<double>& grid) {
    std::vector<CMatrix> m;
    m.reserve(grid.size());
    for (double t : grid) m.push_back(p(t));
    return MatrixPath::sampled(grid, std::move(m));
}

template <class F>
MatrixPath map_matrices(const MatrixPath& p, F&& f, bool affine_ok) {
    return std::visit(
        [&](const auto& form) -> MatrixPath {
            using T = std::decay_t<decltype(form)>;
            if constexpr (std::is_same_v<T, ConvexPath>) {
                return MatrixPath::convex(f(form.a, true), f(form.b, true));
            } else if constexpr (std::is_same_v<T, CombinationPath>) {
                if (!affine_ok) return MatrixPath::combination(f(form.a, false), f(form.b, false), form.f, form.g);
                return map_matrices(sample(p, uniform_grid(2049)), f, affine_ok);
            } else if constexpr (std::is_same_v<T, PolynomialPath>) {
                std::vector<CMatrix> c;
                for (std::size_t k = 0; k < form.coeffs.size(); ++k) {
                    // Monomial: the constant part lives in P_0 only; Bernstein:
                    // the basis sums to one, so every control point carries it.
                    const bool carries = form.basis == PolynomialPath::Basis::Bernstein || k == 0;
                    c.push_back(f(form.coeffs[k], carries));
                }
                return MatrixPath::polynomial(std::move(c), form.basis);
            } else {
                std::vector<CMatrix> m;
                for (const auto& x : form.matrices) m.push_back(f(x, true));
                return MatrixPath::sampled(form.grid, std::move(m));
            }
        },
        p.form());
}

/// Coefficients of sum_k P_k (s + r alpha)^k in the monomial basis.
inline std::vector<CMatrix> compose_affine(const std::vector<CMatrix>& c, double s, double r) {
    const std::size_t d = c.size() - 1;
    std::vector<CMatrix> out(d + 1, CMatrix::Zero(c[0].rows(), c[0].cols()));
    for (std::size_t k = 0; k <= d; ++k) {
        double binom = 1.0;
        for (std::size_t i = 0; i <= k; ++i) {
            out[i] += binom * std::pow(s, double(k - i)) * std::pow(r, double(i)) * c[k];
            binom = binom * double(k - i) / double(i + 1);
        }
    }
    return out;
}

/// de Casteljau split of Bernstein control points at t: control points of
/// the curve restricted to [0, t] (left) or [t, 1] (right).
inline std::vector<CMatrix> bernstein_split(std::vector<CMatrix> c, double t, bool left) {
    const std::size_t d = c.size() - 1;
    std::vector<CMatrix> side(d + 1);
    if (left)
        side[0] = c[0];
    else
        side[d] = c[d];
    for (std::size_t r = 1; r <= d; ++r) {
        for (std::size_t k = 0; k + r <= d; ++k) c[k] = (1.0 - t) * c[k] + t * c[k + 1];
        if (left)
            side[r] = c[0];
        else
            side[d - r] = c[d - r];
    }
    return side;
}

}  // namespace detail

/// alpha -> S C(alpha) S^-1; refuses S whose 2-norm condition number exceeds cond_cap.
inline MatrixPath apply_similarity(const MatrixPath& path, const CMatrix& s, double cond_cap = 1e12) {
    require_square(s, "apply_similarity");
    if (std::size_t(s.rows()) != path.dim()) domain_error("apply_similarity: dimension mismatch");
    Eigen::JacobiSVD<CMatrix> svd(s);
    const auto sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (!(cond <= cond_cap)) domain_error("apply_similarity: S is numerically singular (cond " + std::to_string(cond) + ")");
    const CMatrix inv = s.inverse();
    return detail::map_matrices(path, [&](const CMatrix& m, bool) -> CMatrix { return s * m * inv; }, false);
}

/// alpha -> a C(alpha) + b I. Combination paths with b != 0 have no exact
/// combination form and are resampled on a uniform 2049-point grid.
inline MatrixPath scale_shift(const MatrixPath& path, Complex a, Complex b) {
    const CMatrix eye = CMatrix::Identity(Eigen::Index(path.dim()), Eigen::Index(path.dim()));
    if (path.is_combination() && b == Complex{}) {
        const auto& c = std::get<CombinationPath>(path.form());
        return MatrixPath::combination(a * c.a, a * c.b, c.f, c.g);
    }
    return detail::map_matrices(
        path, [&](const CMatrix& m, bool carries) -> CMatrix { return carries ? CMatrix(a * m + b * eye) : CMatrix(a * m); },
        true);
}

/// beta(alpha) = alpha c / (1 - alpha + alpha c): the reparameterization under
/// which (1-alpha) A + alpha c B is a positive multiple of the convex path.
inline double convex_scale_shift_map(double c, double alpha) {
    if (!(c > 0.0)) domain_error("convex_scale_shift_map: c must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) domain_error("convex_scale_shift_map: alpha out of range");
    return alpha * c / (1.0 - alpha + alpha * c);
}

/// alpha -> C(1 - alpha).
inline MatrixPath reverse(const MatrixPath& path) {
    return std::visit(
        [&](const auto& f) -> MatrixPath {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConvexPath>) {
                return MatrixPath::convex(f.b, f.a);
            } else if constexpr (std::is_same_v<T, CombinationPath>) {
                return MatrixPath::combination(f.a, f.b, f.f.reparameterized(1.0, 0.0), f.g.reparameterized(1.0, 0.0));
            } else if constexpr (std::is_same_v<T, PolynomialPath>) {
                if (f.basis == PolynomialPath::Basis::Bernstein)
                    return MatrixPath::polynomial(std::vector<CMatrix>(f.coeffs.rbegin(), f.coeffs.rend()), f.basis);
                return MatrixPath::polynomial(detail::compose_affine(f.coeffs, 1.0, -1.0));
            } else {
                std::vector<double> g;
                std::vector<CMatrix> m;
                for (std::size_t k = f.grid.size(); k-- > 0;) {
                    g.push_back(1.0 - f.grid[k]);
                    m.push_back(f.matrices[k]);
                }
                g.front() = 0.0;
                g.back() = 1.0;
                return MatrixPath::sampled(std::move(g), std::move(m));
            }
        },
        path.form());
}

/// alpha -> C(a + (b - a) alpha) for 0 <= a < b <= 1.
inline MatrixPath truncate(const MatrixPath& path, double a, double b) {
    if (!(a >= 0.0 && b <= 1.0 && a < b)) domain_error("truncate: need 0 <= a < b <= 1");
    if (a == 0.0 && b == 1.0) return path;
    return std::visit(
        [&](const auto& f) -> MatrixPath {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConvexPath>) {
                return MatrixPath::convex(path(a), path(b));
            } else if constexpr (std::is_same_v<T, CombinationPath>) {
                return MatrixPath::combination(f.a, f.b, f.f.reparameterized(a, b), f.g.reparameterized(a, b));
            } else if constexpr (std::is_same_v<T, PolynomialPath>) {
                if (f.basis == PolynomialPath::Basis::Monomial)
                    return MatrixPath::polynomial(detail::compose_affine(f.coeffs, a, b - a));
                auto left = b < 1.0 ? detail::bernstein_split(f.coeffs, b, true) : f.coeffs;
                auto piece = a > 0.0 ? detail::bernstein_split(left, a / b, false) : left;
                return MatrixPath::polynomial(std::move(piece), f.basis);
            } else {
                std::vector<double> g{0.0};
                std::vector<CMatrix> m{path(a)};
                for (std::size_t k = 0; k < f.grid.size(); ++k) {
                    if (!(f.grid[k] > a && f.grid[k] < b)) continue;
                    const double u = (f.grid[k] - a) / (b - a);
                    if (u <= g.back() || u >= 1.0) continue;
                    g.push_back(u);
                    m.push_back(f.matrices[k]);
                }
                g.push_back(1.0);
                m.push_back(path(b));
                return MatrixPath::sampled(std::move(g), std::move(m));
            }
        },
        path.form());
}

/// p1 on [0, 1/2] followed by p2 on [1/2, 1], as a sampled path (convex
/// pieces are represented exactly by their endpoints).
inline MatrixPath concatenate(const MatrixPath& p1, const MatrixPath& p2, double tol = 1e-9) {
    if (p1.dim() != p2.dim()) domain_error("concatenate: dimension mismatch");
    const CMatrix end = p1(1.0), start = p2(0.0);
    if (max_norm(end - start) > tol * (1.0 + max_norm(end)))
        domain_error("concatenate: p1(1) and p2(0) differ by " + std::to_string(max_norm(end - start)));
    std::vector<double> g;
    std::vector<CMatrix> m;
    for (double t : detail::sampling_grid(p1)) {
        g.push_back(0.5 * t);
        m.push_back(p1(t));
    }
    for (double t : detail::sampling_grid(p2)) {
        if (t == 0.0) continue;
        g.push_back(t == 1.0 ? 1.0 : 0.5 + 0.5 * t);
        m.push_back(p2(t));
    }
    return MatrixPath::sampled(std::move(g), std::move(m));
}

/// Block-diagonal path diag(C1(alpha), C2(alpha), ...). All-convex,
/// all-combination with shared weights and all-monomial inputs keep their
/// form; other mixes are sampled on the union of the inputs' grids.
inline MatrixPath block_combine(const std::vector<MatrixPath>& paths) {
    if (paths.empty()) domain_error("block_combine: no blocks");
    if (paths.size() == 1) return paths.front();
    std::size_t n = 0;
    for (const auto& p : paths) n += p.dim();
    auto blockdiag = [&](auto&& get) {
        CMatrix m = CMatrix::Zero(Eigen::Index(n), Eigen::Index(n));
        Eigen::Index off = 0;
        for (std::size_t i = 0; i < paths.size(); ++i) {
            const auto d = Eigen::Index(paths[i].dim());
            m.block(off, off, d, d) = get(i);
            off += d;
        }
        return m;
    };
    auto all = [&](auto pred) { return std::all_of(paths.begin(), paths.end(), pred); };
    if (all([](const MatrixPath& p) { return p.is_convex(); })) {
        return MatrixPath::convex(blockdiag([&](std::size_t i) { return std::get<ConvexPath>(paths[i].form()).a; }),
                                  blockdiag([&](std::size_t i) { return std::get<ConvexPath>(paths[i].form()).b; }));
    }
    if (all([](const MatrixPath& p) { return p.is_combination(); })) {
        const auto& c0 = std::get<CombinationPath>(paths[0].form());
        if (all([&](const MatrixPath& p) {
                const auto& c = std::get<CombinationPath>(p.form());
                return c.f == c0.f && c.g == c0.g;
            }))
            return MatrixPath::combination(
                blockdiag([&](std::size_t i) { return std::get<CombinationPath>(paths[i].form()).a; }),
                blockdiag([&](std::size_t i) { return std::get<CombinationPath>(paths[i].form()).b; }), c0.f, c0.g);
    }
    if (all([](const MatrixPath& p) {
            return p.is_polynomial() && std::get<PolynomialPath>(p.form()).basis == PolynomialPath::Basis::Monomial;
        })) {
        std::size_t deg = 0;
        for (const auto& p : paths) deg = std::max(deg, std::get<PolynomialPath>(p.form()).coeffs.size());
        std::vector<CMatrix> c;
        for (std::size_t k = 0; k < deg; ++k)
            c.push_back(blockdiag([&](std::size_t i) -> CMatrix {
                const auto& pc = std::get<PolynomialPath>(paths[i].form()).coeffs;
                const auto d = Eigen::Index(paths[i].dim());
                return k < pc.size() ? pc[k] : CMatrix::Zero(d, d);
            }));
        return MatrixPath::polynomial(std::move(c));
    }
    std::vector<double> grid;
    for (const auto& p : paths) {
        const auto g = detail::sampling_grid(p);
        grid.insert(grid.end(), g.begin(), g.end());
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<CMatrix> mats;
    for (double t : grid) mats.push_back(blockdiag([&](std::size_t i) { return paths[i](t); }));
    return MatrixPath::sampled(std::move(grid), std::move(mats));
}

// ---------------------------------------------------------------------------
// Convex reduction

struct ConvexReductionReport {
    bool hypothesis_holds = false;
    /// min over the hypothesis grid of max(f, g), and where it occurs.
    double min_join = 0.0;
    double min_join_alpha = 0.0;
    bool f_dips_negative = false, g_dips_negative = false;
    bool contained = false;
    PairingSet convex, combination;
    /// witness[i] = index in `combination` equivalent to convex pairing i, or -1.
    std::vector<std::ptrdiff_t> witness;
    std::vector<std::string> notes;
};

namespace detail {

/// Sample points for the (f v g) >= 0 check: a uniform grid plus the
/// bisection-refined sign changes of f and g.
inline std::vector<double> hypothesis_grid(const ScalarFn& f, const ScalarFn& g, std::size_t points = 10001) {
    auto grid = uniform_grid(points);
    std::vector<double> extra;
    for (const ScalarFn* h : {&f, &g}) {
        for (std::size_t k = 1; k < grid.size(); ++k) {
            double lo = grid[k - 1], hi = grid[k];
            double flo = (*h)(lo), fhi = (*h)(hi);
            if ((flo < 0.0) == (fhi < 0.0)) continue;
            for (int it = 0; it < 60 && hi - lo > 0.0; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                if (((*h)(mid) < 0.0) == (flo < 0.0))
                    lo = mid;
                else
                    hi = mid;
            }
            extra.push_back(lo);
            extra.push_back(hi);
        }
    }
    for (double x : extra) grid.push_back(x);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

}  // namespace detail

/// Checks that every convex pairing of (A, B) is a pairing of
/// f(alpha) A + g(alpha) B when max(f, g) >= 0 everywhere.
inline ConvexReductionReport convex_reduction_check(const CMatrix& a, const CMatrix& b, const ScalarFn& f,
                                                    const ScalarFn& g, const TrackConfig& cfg = {},
                                                    double endpoint_tol = 1e-12) {
    if (std::abs(f(0.0) - 1.0) > endpoint_tol || std::abs(g(1.0) - 1.0) > endpoint_tol ||
        std::abs(f(1.0)) > endpoint_tol || std::abs(g(0.0)) > endpoint_tol)
        domain_error("convex_reduction_check: need f(0) = g(1) = 1 and f(1) = g(0) = 0");
    ConvexReductionReport rep;
    rep.min_join = std::numeric_limits<double>::infinity();
    for (double t : detail::hypothesis_grid(f, g)) {
        const double fv = f(t), gv = g(t);
        if (fv < 0.0) rep.f_dips_negative = true;
        if (gv < 0.0) rep.g_dips_negative = true;
        const double j = std::max(fv, gv);
        if (j < rep.min_join) rep.min_join = j, rep.min_join_alpha = t;
    }
    rep.hypothesis_holds = rep.min_join >= 0.0;
    if (!rep.hypothesis_holds) {
        rep.notes.push_back("hypothesis fails: max(f, g) = " + std::to_string(rep.min_join) +
                            " at alpha=" + std::to_string(rep.min_join_alpha));
        return rep;
    }
    const auto conv = track(MatrixPath::convex(a, b), cfg);
    const auto comb = track(MatrixPath::combination(a, b, f, g), cfg);
    rep.convex = enumerate_pairings(conv.paths, conv.report);
    rep.combination = enumerate_pairings(comb.paths, comb.report);
    const double tol = 1e-6 * (1.0 + std::max(max_norm(a), max_norm(b)));
    rep.contained = true;
    for (const auto& p : rep.convex.pairings) {
        const auto idx = rep.combination.find(p, tol);
        rep.witness.push_back(idx);
        if (idx < 0) rep.contained = false;
    }
    if (rep.convex.truncated || rep.combination.truncated) rep.notes.push_back("a pairing enumeration was truncated");
    return rep;
}

}  // namespace eigenpaths
