#pragma once

// Adaptive eigenvalue path tracking over alpha in [0,1], collision cluster
// bookkeeping, numerical singularity probes, splicing at clusters and the
// perturbation experiment that searches splices for a close eigenpath set.

#include <iterator>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "matching.hpp"
#include "spectra.hpp"

namespace eigenpaths {

struct TrackConfig {
    double eps_resolution = 1e-2;
    double collision_tol = 1e-7;
    int max_depth = 40;
    int grid_init = 64;
    /// Prediction error must stay this many times below the distance to the
    /// nearest foreign eigenvalue for a step to be accepted.
    double separation_factor = 2.0;
    /// A pair whose interpolated difference dips below this fraction of its
    /// endpoint values is treated as a possible collision inside the step.
    double dip_ratio = 0.5;
    std::size_t max_steps = 2000000;
    SpectraConfig spectra;

    void validate() const {
        if (!(eps_resolution > 0.0)) domain_error("eps_resolution must be positive");
        if (!(collision_tol > 0.0)) domain_error("collision_tol must be positive");
        if (max_depth < 0 || max_depth > 60) domain_error("max_depth must lie in [0, 60]");
        if (grid_init < 1) domain_error("grid_init must be at least 1");
    }
    double min_step() const { return 1.0 / (double(grid_init) * std::ldexp(1.0, max_depth)); }
};

/// delta = min{2m, eps^n / (2^(4n-3) m^(n-1))}: a matrix change of 2-norm
/// below delta moves optimally matched eigenvalues by less than eps.
inline double step_bound(double m, std::size_t n, double eps) {
    if (!(m > 0.0) || n < 1 || !(eps > 0.0)) domain_error("step_bound needs m > 0, n >= 1, eps > 0");
    const double nn = double(n);
    const double other = std::exp(nn * std::log(eps) - (4.0 * nn - 3.0) * std::log(2.0) - (nn - 1.0) * std::log(m));
    return std::min(2.0 * m, other);
}

/// 4 * 2^(-1/n) (||C||_2 + ||C'||_2)^(1-1/n) ||C - C'||_2^(1/n), an upper bound
/// on the optimally matched eigenvalue distance between C and C'.
inline double eigenvalue_motion_bound(double norm_c, double norm_c2, double norm_diff, std::size_t n) {
    const double inv = 1.0 / double(n);
    return 4.0 * std::pow(2.0, -inv) * std::pow(norm_c + norm_c2, 1.0 - inv) * std::pow(norm_diff, inv);
}

struct TrackResult {
    EigenPathSet paths;
    AmbiguityReport report;
    std::size_t evaluations = 0;
};

namespace detail {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

/// Outcome of testing one candidate step.
struct StepVerdict {
    bool accept = false;
    double split = -1.0;  // preferred split point when rejected, < 0 for the midpoint
};

class Tracker {
public:
    Tracker(const MatrixPath& path, const TrackConfig& cfg) : path_(path), cfg_(cfg) {}

    TrackResult run() {
        cfg_.validate();
        const std::size_t n = path_.dim();
        const double h0 = 1.0 / double(cfg_.grid_init);
        const double h_min = cfg_.min_step();
        TrackResult out;

        std::vector<double> grid{0.0};
        std::vector<std::vector<Complex>> cols{spectrum_at(0.0)};

        // Slope estimate at alpha = 0 from a tiny nearest-neighbour step,
        // stored as a virtual previous point at -delta.
        const double delta = std::min(1e-7, h0 * 1e-3);
        double prev_alpha = -delta;
        std::vector<Complex> prev_col(n);
        {
            const auto& s = spectrum_at(delta);
            const auto pi = match_spectra(cols[0], s);
            for (std::size_t j = 0; j < n; ++j) prev_col[j] = 2.0 * cols[0][j] - s[pi(j)];
        }

        std::vector<double> pending;
        for (int k = cfg_.grid_init; k >= 1; --k) pending.push_back(k == cfg_.grid_init ? 1.0 : double(k) * h0);

        std::size_t steps = 0;
        while (!pending.empty()) {
            const double a = grid.back();
            const double b = pending.back();
            const auto& col_a = cols.back();
            const std::vector<Complex>& pcol = grid.size() >= 2 ? cols[cols.size() - 2] : prev_col;
            const double pa = grid.size() >= 2 ? grid[grid.size() - 2] : prev_alpha;
            const auto& spec_b = spectrum_at(b);

            std::vector<Complex> pred(n);
            const double ratio = (b - a) / (a - pa);
            for (std::size_t j = 0; j < n; ++j) pred[j] = col_a[j] + (col_a[j] - pcol[j]) * ratio;
            const auto pi = match_spectra(pred, spec_b);
            std::vector<Complex> next(n);
            for (std::size_t j = 0; j < n; ++j) next[j] = spec_b[pi(j)];

            const bool at_floor = (b - a) <= h_min * (1.0 + 1e-9);
            const bool out_of_budget = ++steps > cfg_.max_steps;
            StepVerdict v = assess(col_a, pred, spec_b, pi, next, a, b);
            if (!v.accept && (at_floor || out_of_budget)) {
                out.report.unresolved_alphas.push_back(b);
                v.accept = true;
            }
            if (v.accept) {
                grid.push_back(b);
                cols.push_back(std::move(next));
                pending.pop_back();
                continue;
            }
            double s = v.split;
            const double lo = a + (b - a) / 1024.0, hi = b - (b - a) / 1024.0;
            if (!(s > a && s < b)) s = 0.5 * (a + b);
            s = std::clamp(s, lo, hi);
            if (!(s > a && s < b)) s = 0.5 * (a + b);
            if (!(s > a && s < b)) {
                // No representable point in between; accept as is.
                out.report.unresolved_alphas.push_back(b);
                grid.push_back(b);
                cols.push_back(std::move(next));
                pending.pop_back();
                continue;
            }
            pending.push_back(s);
        }

        out.paths.grid = std::move(grid);
        out.paths.paths.assign(n, std::vector<Complex>(out.paths.grid.size()));
        for (std::size_t k = 0; k < cols.size(); ++k)
            for (std::size_t j = 0; j < n; ++j) out.paths.paths[j][k] = cols[k][j];
        out.report.collision_tol = cfg_.collision_tol;
        out.evaluations = cache_.size();
        if (steps > cfg_.max_steps)
            out.report.notes.push_back("step budget exhausted; remaining steps accepted without verification");
        return out;
    }

private:
    const std::vector<Complex>& spectrum_at(double alpha) {
        auto it = cache_.find(alpha);
        if (it != cache_.end()) return it->second;
        auto s = eigenvalues(path_(alpha), cfg_.spectra).values;
        return cache_.emplace(alpha, std::move(s)).first->second;
    }

    StepVerdict assess(const std::vector<Complex>& col_a, const std::vector<Complex>& pred,
                       const std::vector<Complex>& spec_b, const Permutation& pi, const std::vector<Complex>& next,
                       double a, double b) const {
        const std::size_t n = col_a.size();
        const double tol = cfg_.collision_tol;

        double motion = 0.0;
        for (std::size_t j = 0; j < n; ++j) motion = std::max(motion, std::abs(next[j] - col_a[j]));
        if (motion > cfg_.eps_resolution) return {false, -1.0};

        // Pair dips: a collision inside the step shows as an interior near-zero
        // of the interpolated difference d (transversal crossing) or of d^2
        // (square-root branch point).
        double best_score = cfg_.dip_ratio;
        double best_split = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const Complex da = col_a[i] - col_a[j], db = next[i] - next[j];
                if (std::abs(da) <= tol || std::abs(db) <= tol) continue;
                for (int power = 1; power <= 2; ++power) {
                    const Complex fa = power == 1 ? da : da * da;
                    const Complex fb = power == 1 ? db : db * db;
                    const Complex slope = fb - fa;
                    const double s2 = std::norm(slope);
                    if (s2 == 0.0) continue;
                    const double s = -(std::conj(fa) * slope).real() / s2;
                    if (!(s > 0.0 && s < 1.0)) continue;
                    const double depth = std::abs(fa + s * slope) / std::min(std::abs(fa), std::abs(fb));
                    if (depth < best_score) {
                        best_score = depth;
                        best_split = a + s * (b - a);
                    }
                }
            }
        }
        if (best_split >= 0.0) return {false, best_split};

        // Prediction separation: each prediction must be markedly closer to
        // its assigned eigenvalue than to any eigenvalue outside its
        // collision component.
        UnionFind uf(2 * n);
        for (std::size_t j = 0; j < n; ++j) uf.unite(j, n + pi(j));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                if (std::abs(col_a[i] - col_a[j]) <= tol) uf.unite(i, j);
                if (std::abs(spec_b[i] - spec_b[j]) <= tol) uf.unite(n + i, n + j);
            }
        for (std::size_t j = 0; j < n; ++j) {
            const double err = std::abs(pred[j] - next[j]);
            for (std::size_t k = 0; k < n; ++k) {
                if (uf.find(n + k) == uf.find(j)) continue;
                if (std::abs(pred[j] - spec_b[k]) < cfg_.separation_factor * err) return {false, -1.0};
            }
        }
        return {true, -1.0};
    }

    const MatrixPath& path_;
    TrackConfig cfg_;
    std::map<double, std::vector<Complex>> cache_;
};

}  // namespace detail

/// Clusters of tracked paths at each grid point, merged into runs of
/// consecutive grid points with identical membership.
inline std::vector<Ambiguity> find_clusters(const EigenPathSet& eps, double tol) {
    struct Open {
        Ambiguity amb;
        std::size_t last = 0;
    };
    std::map<std::vector<std::size_t>, Open> open;
    std::vector<Ambiguity> done;
    auto close = [&](Open& o) { done.push_back(o.amb); };
    for (std::size_t k = 0; k < eps.grid.size(); ++k) {
        const auto col = eps.column(k);
        const auto ids = cluster_ids(col, tol);
        std::map<int, std::vector<std::size_t>> groups;
        for (std::size_t j = 0; j < col.size(); ++j) groups[ids[j]].push_back(j);
        std::set<std::vector<std::size_t>> seen;
        for (auto& [id, members] : groups) {
            if (members.size() < 2) continue;
            Complex mean{};
            for (std::size_t j : members) mean += col[j];
            mean /= double(members.size());
            double diam = 0.0;
            for (std::size_t x : members)
                for (std::size_t y : members) diam = std::max(diam, std::abs(col[x] - col[y]));
            seen.insert(members);
            auto it = open.find(members);
            if (it != open.end() && it->second.last + 1 == k) {
                auto& o = it->second;
                o.last = k;
                o.amb.alpha_hi = eps.grid[k];
                if (diam < o.amb.diameter) {
                    o.amb.diameter = diam;
                    o.amb.alpha = eps.grid[k];
                    o.amb.grid_index = k;
                    o.amb.lambda = mean;
                }
                continue;
            }
            if (it != open.end()) {
                close(it->second);
                open.erase(it);
            }
            Open o;
            o.last = k;
            o.amb.lambda = mean;
            o.amb.alpha = o.amb.alpha_lo = o.amb.alpha_hi = eps.grid[k];
            o.amb.grid_index = k;
            o.amb.multiplicity = int(members.size());
            o.amb.members = members;
            o.amb.diameter = diam;
            open.emplace(members, std::move(o));
        }
        for (auto it = open.begin(); it != open.end();) {
            if (!seen.count(it->first) && it->second.last < k) {
                close(it->second);
                it = open.erase(it);
            } else {
                ++it;
            }
        }
    }
    for (auto& [m, o] : open) close(o);
    std::sort(done.begin(), done.end(), [](const Ambiguity& x, const Ambiguity& y) {
        if (x.grid_index != y.grid_index) return x.grid_index < y.grid_index;
        return x.members < y.members;
    });
    return done;
}

/// Probe radius used when none is given: ten times the median accepted step,
/// capped at a quarter of the distance from the cluster to the nearest
/// non-member eigenvalue.
inline double default_probe_radius(const EigenPathSet& eps, const Ambiguity& amb) {
    std::vector<double> steps;
    for (std::size_t k = 1; k < eps.grid.size(); ++k) steps.push_back(eps.grid[k] - eps.grid[k - 1]);
    std::nth_element(steps.begin(), steps.begin() + std::ptrdiff_t(steps.size() / 2), steps.end());
    double r = 10.0 * steps[steps.size() / 2];
    double foreign = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < eps.size(); ++j) {
        if (std::find(amb.members.begin(), amb.members.end(), j) != amb.members.end()) continue;
        foreign = std::min(foreign, std::abs(eps.paths[j][amb.grid_index] - amb.lambda));
    }
    if (std::isfinite(foreign)) r = std::min(r, 0.25 * foreign);
    return r;
}

/// Numerical singularity test: probes alpha +- r 2^-k (k = 0..30) and reports
/// true when some eigenvalue within r of lambda has numerical multiplicity
/// (cluster size at collision_tol) below the ambiguity's multiplicity.
inline bool classify_ambiguity(const MatrixPath& path, const Ambiguity& amb, double probe_radius,
                               const TrackConfig& cfg = {}) {
    if (!(probe_radius >= cfg.min_step()))
        domain_error("classify_ambiguity: probe radius " + std::to_string(probe_radius) +
                     " is below the grid resolution " + std::to_string(cfg.min_step()));
    for (int k = 0; k <= 30; ++k) {
        const double off = std::ldexp(probe_radius, -k);
        for (double t : {amb.alpha - off, amb.alpha + off}) {
            if (t < 0.0 || t > 1.0) continue;
            const auto s = eigenvalues(path(t), cfg.spectra).values;
            std::vector<Complex> near;
            for (Complex z : s)
                if (std::abs(z - amb.lambda) <= probe_radius) near.push_back(z);
            if (near.empty()) continue;
            const auto ids = cluster_ids(near, cfg.collision_tol);
            std::map<int, int> sizes;
            for (int id : ids) sizes[id]++;
            for (auto& [id, c] : sizes)
                if (c < amb.multiplicity) return true;
        }
    }
    return false;
}

/// Tracks the eigenvalues of `path`: adaptive steps until each accepted step
/// moves every path by at most eps_resolution and the predictor-based
/// matching is unambiguous, collisions refined down to the depth cap, then
/// collision clusters reported as ambiguities with a singularity verdict.
inline TrackResult track(const MatrixPath& path, const TrackConfig& cfg = {}) {
    TrackResult out = detail::Tracker(path, cfg).run();
    out.report.ambiguities = find_clusters(out.paths, cfg.collision_tol);
    for (auto& amb : out.report.ambiguities) {
        const double r = std::max(default_probe_radius(out.paths, amb), cfg.min_step());
        amb.singular = classify_ambiguity(path, amb, r, cfg);
        std::string who;
        for (std::size_t m : amb.members) who += (who.empty() ? "" : ",") + std::to_string(m);
        out.report.notes.push_back("cluster {" + who + "} at alpha=" + std::to_string(amb.alpha) +
                                   ": in-cluster continuation fixed by the lexicographic matching");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Splices

/// One permutation per ambiguity (in report order) acting on positions of
/// that ambiguity's member list: after the splice point, the path labelled
/// members[i] continues along the tail of members[perm(i)].
struct SpliceChoice {
    std::vector<Permutation> perms;
};

/// Applies one splice step to the label -> followed-path assignment.
inline void apply_splice(std::vector<std::size_t>& follow, const Ambiguity& amb, const Permutation& sigma) {
    for (auto& f : follow) {
        auto it = std::find(amb.members.begin(), amb.members.end(), f);
        if (it == amb.members.end()) continue;
        f = amb.members[sigma(std::size_t(it - amb.members.begin()))];
    }
}

inline EigenPathSet splice(const EigenPathSet& eps, const AmbiguityReport& report, const SpliceChoice& choice) {
    if (choice.perms.size() != report.ambiguities.size())
        domain_error("splice: need one permutation per ambiguity");
    for (std::size_t r = 0; r < choice.perms.size(); ++r)
        if (choice.perms[r].size() != report.ambiguities[r].members.size())
            domain_error("splice: permutation size differs from cluster multiplicity");
    EigenPathSet out = eps;
    const std::size_t n = eps.size();
    std::vector<std::size_t> follow(n);
    std::iota(follow.begin(), follow.end(), std::size_t{0});
    std::size_t r = 0;
    for (std::size_t k = 0; k < eps.grid.size(); ++k) {
        for (std::size_t j = 0; j < n; ++j) out.paths[j][k] = eps.paths[follow[j]][k];
        while (r < report.ambiguities.size() && report.ambiguities[r].grid_index == k) {
            apply_splice(follow, report.ambiguities[r], choice.perms[r]);
            ++r;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Perturbation experiment

struct Theorem1Report {
    bool witness_found = false;
    double deviation = 0.0;
    double eps = 0.0;
    double perturbation_size = 0.0;
    double delta = 0.0;
    std::size_t base_ambiguities = 0;
    std::size_t states_searched = 0;
    SpliceChoice witness;
    std::string message;
};

namespace detail {

inline std::vector<Permutation> all_permutations(std::size_t m) {
    std::vector<std::size_t> p(m);
    std::iota(p.begin(), p.end(), std::size_t{0});
    std::vector<Permutation> out;
    do out.emplace_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return out;
}

}  // namespace detail

/// Tracks `path` and `perturbation`, then searches splice choices at the
/// base path's clusters (exhaustively by dynamic programming over label
/// assignments for n <= 6, greedily otherwise) for the base eigenpath set
/// closest to the perturbed one in the sup over a merged grid.
inline Theorem1Report theorem1_experiment(const MatrixPath& path, const MatrixPath& perturbation, double eps,
                                          const TrackConfig& cfg = {}) {
    if (path.dim() != perturbation.dim()) domain_error("theorem1_experiment: dimension mismatch");
    if (!(eps > 0.0)) domain_error("theorem1_experiment: eps must be positive");
    Theorem1Report rep;
    rep.eps = eps;
    const auto base = track(path, cfg);
    const auto pert = track(perturbation, cfg);
    const auto& ambs = base.report.ambiguities;
    rep.base_ambiguities = ambs.size();

    std::vector<double> merged = base.paths.grid;
    merged.insert(merged.end(), pert.paths.grid.begin(), pert.paths.grid.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    rep.perturbation_size = sup_distance(path, perturbation, merged);
    double m = 0.0;
    for (double t : merged) m = std::max(m, frobenius_norm(path(t)));
    rep.delta = step_bound(std::max(m, 1e-300), path.dim(), eps);

    // Segment r covers merged points with alpha in (split[r-1], split[r]].
    const std::size_t n = path.dim();
    std::vector<double> splits;
    for (const auto& a : ambs) splits.push_back(base.paths.grid[a.grid_index]);
    auto segment_cost = [&](std::size_t seg, const std::vector<std::size_t>& follow) {
        const double lo = seg == 0 ? -1.0 : splits[seg - 1];
        const double hi = seg < splits.size() ? splits[seg] : 2.0;
        double c = 0.0;
        for (double t : merged) {
            if (!(t > lo && t <= hi)) continue;
            for (std::size_t j = 0; j < n; ++j)
                c = std::max(c, std::abs(pert.paths.at(j, t) - base.paths.at(follow[j], t)));
        }
        return c;
    };

    struct State {
        double cost;
        std::vector<Permutation> choices;
    };
    std::map<std::vector<std::size_t>, State> states;
    if (n <= 6) {
        for (const auto& p : detail::all_permutations(n)) states[p.map] = {0.0, {}};
    } else {
        std::vector<std::size_t> id(n);
        std::iota(id.begin(), id.end(), std::size_t{0});
        states[id] = {0.0, {}};
    }
    for (std::size_t seg = 0; seg <= splits.size(); ++seg) {
        for (auto& [follow, st] : states) st.cost = std::max(st.cost, segment_cost(seg, follow));
        rep.states_searched += states.size();
        if (seg == splits.size()) break;
        const auto& amb = ambs[seg];
        std::map<std::vector<std::size_t>, State> next;
        for (const auto& [follow, st] : states) {
            for (const auto& sigma : detail::all_permutations(amb.members.size())) {
                auto f = follow;
                apply_splice(f, amb, sigma);
                State cand{st.cost, st.choices};
                cand.choices.push_back(sigma);
                auto it = next.find(f);
                if (it == next.end() || cand.cost < it->second.cost) next[f] = std::move(cand);
            }
        }
        if (n > 6) {
            // Greedy: keep the assignment that is best on the coming segment.
            auto best = next.begin();
            double best_c = std::numeric_limits<double>::infinity();
            for (auto it = next.begin(); it != next.end(); ++it) {
                const double c = std::max(it->second.cost, segment_cost(seg + 1, it->first));
                if (c < best_c) best_c = c, best = it;
            }
            std::map<std::vector<std::size_t>, State> keep;
            keep.insert(*best);
            next = std::move(keep);
        }
        states = std::move(next);
    }
    const State* best = nullptr;
    for (const auto& [f, st] : states)
        if (!best || st.cost < best->cost) best = &st;
    rep.deviation = best->cost;
    rep.witness.perms = best->choices;
    rep.witness_found = rep.deviation < eps;
    rep.message = rep.witness_found ? "witness found" : "no witness found";
    if (rep.perturbation_size >= rep.delta) rep.message += "; perturbation exceeds delta";
    return rep;
}

/// A seeded perturbation of `path` with sup max-norm distance below `size`:
/// (1 - alpha) E0 + alpha E1 + sin(pi alpha) E2 with each E of max-norm
/// 0.3 size. Convex paths stay convex (E2 is dropped); other forms are sampled.
inline MatrixPath random_perturbation(const MatrixPath& path, double size, std::mt19937_64& rng,
                                      std::size_t points = 1025) {
    if (!(size > 0.0)) domain_error("random_perturbation: size must be positive");
    const auto n = static_cast<Eigen::Index>(path.dim());
    std::normal_distribution<double> d(0.0, 1.0);
    auto draw = [&] {
        CMatrix e(n, n);
        for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = Complex(d(rng), d(rng));
        return CMatrix(0.3 * size * e / max_norm(e));
    };
    const CMatrix e0 = draw(), e1 = draw(), e2 = draw();
    if (const auto* c = std::get_if<ConvexPath>(&path.form())) return MatrixPath::convex(c->a + e0, c->b + e1);
    std::vector<double> grid = uniform_grid(points);
    if (const auto* s = std::get_if<SampledPath>(&path.form())) {
        std::vector<double> merged;
        merged.reserve(grid.size() + s->grid.size());
        std::merge(grid.begin(), grid.end(), s->grid.begin(), s->grid.end(), std::back_inserter(merged));
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        grid = std::move(merged);
    }
    std::vector<CMatrix> mats;
    mats.reserve(grid.size());
    for (double t : grid) mats.push_back(path(t) + (1.0 - t) * e0 + t * e1 + std::sin(kPi * t) * e2);
    return MatrixPath::sampled(std::move(grid), std::move(mats));
}

}  // namespace eigenpaths
