// Acceptance harness: one PASS/FAIL line per criterion, with the measured
// quantities and the wall time against its budget. Exits 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include <eigenpaths/eigenpaths.hpp>

#include "fixtures.hpp"

using namespace eigenpaths;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            std::fprintf(stderr, "  failed: %s\n", what.c_str());
            if (pass) detail << "first failure: " << what << "; ";
            pass = false;
        }
    }
};

bool run(int id, const char* name, double budget_s, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < budget_s, "runtime over budget");
    std::printf("[%s] criterion %d: %s: %s(%.1fs, budget %.0fs)\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.str().c_str(), secs, budget_s);
    std::fflush(stdout);
    return o.pass;
}

const std::vector<MatrixPath>& fixture_paths() {
    static const std::vector<MatrixPath> paths{fixtures::crossing(), fixtures::both_instance(),
                                               fixtures::through_scalar()};
    return paths;
}
const char* fixture_name(std::size_t i) {
    static const char* names[] = {"crossing", "both_instance", "through_scalar"};
    return names[i];
}

PairingSet pairings_of(const MatrixPath& p) {
    const auto r = track(p);
    return enumerate_pairings(r.paths, r.report);
}

/// q realises the value map z -> h(z) applied to both sides of p, within tol.
bool maps_onto(const Eigenpairing& p, const Eigenpairing& q, const std::function<Complex(Complex)>& h, double tol) {
    const std::size_t n = p.perm.size();
    if (q.perm.size() != n) return false;
    std::vector<char> used(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        bool hit = false;
        for (std::size_t j = 0; j < n && !hit; ++j) {
            if (used[j]) continue;
            hit = std::abs(q.source[j] - h(p.source[i])) < tol && std::abs(q.image(j) - h(p.image(i))) < tol;
            if (hit) used[j] = 1;
        }
        if (!hit) return false;
    }
    return true;
}

double min_gap_along(const EigenPathSet& s) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.grid.size(); ++k) g = std::min(g, min_gap(s.column(k)));
    return g;
}

// ---------------------------------------------------------------------------

void perturbation_bound(Outcome& o) {
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t dims[] = {2, 3, 4, 6};
    const double epsilons[] = {1.0, 0.5, 0.1};
    int below = 0, raw_ok = 0, raw_checks = 0;
    double worst_ratio = 0.0;
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = dims[t % 4];
        const double eps = epsilons[(t / 4) % 3];
        const CMatrix c = fixtures::random_matrix(rng, n);
        const double m = c.operatorNorm() + 1.0;
        const double delta = step_bound(m, n, eps);
        CMatrix e = fixtures::random_matrix(rng, n);
        e *= (0.01 + 0.98 * u(rng)) * delta / e.operatorNorm();
        const CMatrix c2 = c + e;
        const double motion = bottleneck_distance(eigenvalues(c).values, eigenvalues(c2).values);
        if (motion < eps) ++below;
        o.require(motion < eps, "trial " + std::to_string(t) + " moved " + std::to_string(motion));
        worst_ratio = std::max(worst_ratio, motion / eps);

        // The raw bound at the small step and at a large random step.
        CMatrix big = fixtures::random_matrix(rng, n);
        big *= std::pow(10.0, -6.0 * u(rng)) * c.operatorNorm() / big.operatorNorm();
        for (const CMatrix& d : {c2, CMatrix(c + big)}) {
            ++raw_checks;
            const double mv = bottleneck_distance(eigenvalues(c).values, eigenvalues(d).values);
            const double bound = eigenvalue_motion_bound(c.operatorNorm(), d.operatorNorm(), (c - d).operatorNorm(), n);
            if (mv <= bound) ++raw_ok;
            o.require(mv <= bound, "raw bound violated in trial " + std::to_string(t));
        }
    }
    o.detail << below << "/500 below eps, max motion/eps " << worst_ratio << ", raw bound held " << raw_ok << "/"
             << raw_checks << " ";
}

void splice_witness_harness(Outcome& o) {
    const double eps = 0.05;
    for (std::size_t f = 0; f < fixture_paths().size(); ++f) {
        const auto& path = fixture_paths()[f];
        const double delta = theorem1_experiment(path, path, eps).delta;
        std::mt19937_64 rng(2000 + f);
        int found = 0;
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const auto pert = random_perturbation(path, delta, rng);
            const auto rep = theorem1_experiment(path, pert, eps);
            o.require(rep.perturbation_size < delta, std::string(fixture_name(f)) + " perturbation exceeds delta");
            if (rep.witness_found && rep.deviation < eps) ++found;
            o.require(rep.witness_found && rep.deviation < eps,
                      std::string(fixture_name(f)) + " trial " + std::to_string(t) + " has no witness");
            worst = std::max(worst, rep.deviation);
        }
        o.detail << fixture_name(f) << " " << found << "/100 (delta " << delta << ", max dev " << worst << ") ";
    }
}

void rip_guarantees(Outcome& o) {
    RipConfig cfg;
    TrackConfig fine = cfg.track;
    fine.grid_init = 10000;
    const auto verify_grid = uniform_grid(10001);
    int ok = 0, total = 0;
    double worst_sup = 0.0, worst_path = 0.0, worst_end = 0.0;
    for (std::size_t f = 0; f < fixture_paths().size(); ++f) {
        const auto& path = fixture_paths()[f];
        const auto base = track(path, cfg.track);
        for (double eps : {0.2, 0.05}) {
            for (bool keep : {false, true}) {
                ++total;
                const std::string tag = std::string(fixture_name(f)) + " eps=" + std::to_string(eps) +
                                        (keep ? " endpoints" : "");
                const RipResult r = keep ? rip_preserving_endpoints(path, eps, true, true, cfg) : rip(path, eps, cfg);
                const auto tr = track(r.new_path, fine);
                const double sup = sup_distance(path, r.new_path, verify_grid);
                const double dev = detail::path_deviation(path, base.paths, tr.paths, cfg.track.spectra);
                const bool good = tr.report.empty() && sup < eps && dev < eps;
                o.require(tr.report.empty(), tag + ": ambiguities remain");
                o.require(sup < eps, tag + ": sup deviation " + std::to_string(sup));
                o.require(dev < eps, tag + ": path deviation " + std::to_string(dev));
                worst_sup = std::max(worst_sup, sup / eps);
                worst_path = std::max(worst_path, dev / eps);
                bool ends = true;
                if (keep) {
                    const double e = std::max(max_norm(r.new_path(0.0) - path(0.0)), max_norm(r.new_path(1.0) - path(1.0)));
                    worst_end = std::max(worst_end, e);
                    ends = e <= 1e-12;
                    o.require(ends, tag + ": endpoint moved by " + std::to_string(e));
                }
                if (good && ends) ++ok;
            }
        }
    }
    o.detail << ok << "/" << total << " rips verified on 10001 points, max sup/eps " << worst_sup
             << ", max path/eps " << worst_path << ", max endpoint move " << worst_end << " ";
}

std::set<std::vector<std::size_t>> expected_perms(Verdict v) {
    switch (v) {
    case Verdict::P_only: return {{0, 1}};
    case Verdict::Q_only: return {{1, 0}};
    case Verdict::Both: return {{0, 1}, {1, 0}};
    }
    return {};
}

/// Both the label permutations and the value maps of the verdict match the
/// pairings enumerated from the tracked convex path.
bool tracker_agrees(const PairingVerdict& v, const CMatrix& a, const CMatrix& b) {
    const auto set = pairings_of(MatrixPath::convex(a, b));
    std::set<std::vector<std::size_t>> perms;
    for (const auto& p : set.pairings) perms.insert(p.perm.map);
    if (perms != expected_perms(v.verdict)) return false;
    const auto predicted = verdict_pairings(v);
    if (predicted.size() != set.size()) return false;
    for (const auto& p : predicted)
        if (!set.contains(p, 1e-9)) return false;
    return true;
}

void classifier(Outcome& o) {
    std::mt19937_64 rng(4004);
    int compared = 0, agreed = 0, skipped = 0;
    double worst_product = 0.0;
    std::map<std::string, int> counts;
    while (compared < 1000) {
        const CMatrix a = fixtures::random_matrix(rng, 2), b = fixtures::random_matrix(rng, 2);
        const auto v = classify(a, b);
        const auto th = theta_info(v.canonical.v1, v.canonical.v2);
        const double prod = std::abs(th.w_plus * th.w_minus - 1.0);
        worst_product = std::max(worst_product, prod);
        o.require(prod <= 1e-12, "w+ w- = 1 off by " + std::to_string(prod));
        if (std::abs(std::abs(v.arg_ratio) - v.theta) <= 1e-4) {
            ++skipped;
            continue;
        }
        ++compared;
        ++counts[to_string(v.verdict)];
        const bool ok = tracker_agrees(v, a, b);
        if (ok) ++agreed;
        o.require(ok, "disagreement on instance " + std::to_string(compared));
    }
    int flips = 0;
    for (double side : {-1.0, 1.0}) {
        Canonical2x2 c;
        c.lambda1 = 1.0, c.lambda2 = -1.0, c.v1 = 1.0, c.v2 = -1.0;
        c.mu1 = std::polar(1.0, kPi / 2 + side * 1e-4);
        c.mu2 = -c.mu1;
        const auto v = classify(c);
        const Verdict want = side < 0 ? Verdict::P_only : Verdict::Q_only;
        const auto [a, b] = to_matrices(c);
        const bool ok = v.verdict == want && tracker_agrees(classify(a, b), a, b);
        if (ok) ++flips;
        o.require(ok, "quarter-turn family on side " + std::to_string(side));
    }
    o.detail << agreed << "/" << compared << " agree (" << skipped << " within margin skipped; ";
    for (const auto& [k, n] : counts) o.detail << k << "=" << n << " ";
    o.detail << "), max |w+w- - 1| " << worst_product << ", quarter-turn flips " << flips << "/2 ";
}

void convex_reduction(Outcome& o) {
    std::mt19937_64 rng(5005);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0, dips = 0, checked = 0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 2 + std::size_t(t % 2);
        CMatrix a, b;
        if (t < 6) {
            const auto& fx = fixture_paths()[std::size_t(t) % 3];
            a = fx(0.0), b = fx(1.0);
        } else {
            a = fixtures::random_matrix(rng, n), b = fixtures::random_matrix(rng, n);
        }
        // Piecewise-linear weights with random positive interior knots; the
        // last ten instances push one knot of f below zero where g > 0.
        std::vector<double> x{0.0, 0.2 + 0.1 * u(rng), 0.45 + 0.1 * u(rng), 0.7 + 0.1 * u(rng), 1.0};
        std::vector<double> fy{1.0, 0.1 + 1.5 * u(rng), 0.1 + 1.5 * u(rng), 0.1 + 1.5 * u(rng), 0.0};
        std::vector<double> gy{0.0, 0.1 + 1.5 * u(rng), 0.1 + 1.5 * u(rng), 0.1 + 1.5 * u(rng), 1.0};
        if (t >= 40) fy[1 + std::size_t(t % 3)] = -(0.01 + 0.3 * u(rng));
        const auto rep = convex_reduction_check(a, b, ScalarFn::table(x, fy), ScalarFn::table(x, gy));
        o.require(rep.hypothesis_holds, "instance " + std::to_string(t) + " fails the hypothesis");
        if (rep.f_dips_negative) ++dips;
        ++checked;
        if (!rep.contained) {
            ++violations;
            o.require(false, "instance " + std::to_string(t) + " not contained");
        }
    }
    o.require(dips == 10, "expected 10 instances with f < 0, got " + std::to_string(dips));
    o.detail << checked << " instances, " << dips << " with f dipping negative, " << violations << " violations ";
}

MonicPoly random_poly(std::mt19937_64& rng, std::size_t n) {
    std::vector<Complex> c(n);
    for (auto& x : c) x = fixtures::random_complex(rng);
    return MonicPoly(std::move(c));
}

void companion_oracle(Outcome& o) {
    std::mt19937_64 rng(6006);
    double worst = 0.0;
    int agreed = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t d = 2 + std::size_t(t % 5);
        const auto pp = PolyPath::convex(random_poly(rng, d), random_poly(rng, d));
        const auto tr = track_roots(pp);
        const auto dr = track_roots_direct(pp, {}, tr.paths.grid);
        const double dev = compare_root_paths(tr.paths, dr.paths).set_dev;
        worst = std::max(worst, dev);
        if (dev < 1e-6) ++agreed;
        o.require(dev < 1e-6, "path " + std::to_string(t) + " deviates by " + std::to_string(dev));
    }
    double worst_cp = 0.0;
    int round_trips = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto p = random_poly(rng, 1 + std::size_t(t % 12));
        const double dist = char_poly(companion(p)).distance(p);
        worst_cp = std::max(worst_cp, dist);
        if (dist < 1e-10) ++round_trips;
        o.require(dist < 1e-10, "char_poly round trip off by " + std::to_string(dist));
    }
    o.detail << agreed << "/100 root paths agree (max " << worst << "), " << round_trips
             << "/1000 char_poly round trips (max " << worst_cp << ") ";
}

void structural(Outcome& o) {
    std::mt19937_64 rng(7007);
    std::vector<MatrixPath> family = fixture_paths();
    for (int t = 0; t < 4; ++t) {
        const std::size_t n = 2 + std::size_t(t % 3);
        family.push_back(MatrixPath::convex(fixtures::random_matrix(rng, n), fixtures::random_matrix(rng, n)));
    }
    int passed = 0, total = 0;
    auto check = [&](bool ok, const std::string& what) {
        ++total;
        if (ok) ++passed;
        o.require(ok, what);
    };

    for (std::size_t i = 0; i < family.size(); ++i) {
        const auto& path = family[i];
        const std::string tag = "family[" + std::to_string(i) + "]";
        const auto r = track(path);
        const CMatrix a = path(0.0), b = path(1.0);
        const double n = double(path.dim());

        bool line = true;
        for (std::size_t k = 0; k < r.paths.grid.size(); ++k) {
            const double t = r.paths.grid[k];
            Complex sum = 0.0;
            for (Complex z : r.paths.column(k)) sum += z;
            line = line && std::abs(sum - ((1.0 - t) * a.trace() + t * b.trace())) <= n * tol_eig(path(t));
        }
        check(line, tag + ": trace line");

        const Complex sa(1.5, -0.5), sb(0.25, 2.0);
        const auto moved = scale_shift(path, sa, sb);
        const auto rm = track(moved);
        double region = 0.0;
        for (std::size_t k = 0; k < rm.paths.grid.size(); ++k) {
            std::vector<Complex> mapped;
            for (Complex z : eigenvalues(path(rm.paths.grid[k])).values) mapped.push_back(sa * z + sb);
            region = std::max(region, bottleneck_distance(mapped, rm.paths.column(k)));
        }
        check(region < 1e-6, tag + ": scale/shift eigenregion moved by " + std::to_string(region));
        const auto set = enumerate_pairings(r.paths, r.report), mset = enumerate_pairings(rm.paths, rm.report);
        bool relabelled = set.size() == mset.size();
        for (const auto& p : set.pairings) {
            bool found = false;
            for (const auto& q : mset.pairings) found = found || maps_onto(p, q, [&](Complex z) { return sa * z + sb; }, 1e-9);
            relabelled = relabelled && found;
        }
        check(relabelled, tag + ": scale/shift pairing correspondence");

        for (double c : {0.3, 2.0, 7.0}) {
            bool mono = convex_scale_shift_map(c, 0.0) == 0.0 && convex_scale_shift_map(c, 1.0) == 1.0;
            double prev = 0.0, spec = 0.0;
            for (double t : uniform_grid(201)) {
                const double beta = convex_scale_shift_map(c, t);
                if (t > 0.0) mono = mono && beta > prev;
                prev = beta;
                // (1-t) A + t c B = (1 - t + t c) C(beta).
                const auto lhs = eigenvalues((1.0 - t) * a + t * c * b).values;
                auto rhs = eigenvalues(path(beta)).values;
                for (auto& z : rhs) z *= (1.0 - t + t * c);
                spec = std::max(spec, bottleneck_distance(lhs, rhs));
            }
            check(mono, tag + ": beta endpoints and monotonicity for c=" + std::to_string(c));
            check(spec < 1e-8, tag + ": beta spectral relation off by " + std::to_string(spec));
        }

        const auto rev = pairings_of(reverse(path));
        bool inverted = rev.size() == set.size();
        for (const auto& p : set.pairings) inverted = inverted && rev.contains(inverse(p), 1e-9);
        check(inverted, tag + ": reverse inverts pairings");

        // Empty report <=> min gap above collision_tol <=> one pairing.
        const TrackConfig cfg;
        const bool empty = r.report.empty();
        const bool gapped = min_gap_along(r.paths) > cfg.collision_tol;
        const bool unique = set.size() == 1;
        check(empty == gapped && gapped == unique, tag + ": ambiguity-free equivalences");
    }

    // Concatenation composes component pairings.
    {
        const auto p1 = fixtures::crossing();
        const auto p2 = MatrixPath::convex(fixtures::diag({-1.0, 1.0}), fixtures::both_b());
        const auto p3 = MatrixPath::convex(fixtures::both_b(), fixtures::diag({2.0, Complex(0.0, 1.0)}));
        for (const auto& [x, y] : {std::pair{p1, p2}, std::pair{p2, p3}}) {
            const auto sx = pairings_of(x), sy = pairings_of(y), s = pairings_of(concatenate(x, y));
            bool all = true;
            for (const auto& a : sx.pairings)
                for (const auto& b : sy.pairings) all = all && s.contains(compose(b, a, 1e-9), 1e-9);
            check(all, "concatenate composes pairings");
        }
        const auto loop = concatenate(family[3], reverse(family[3]));
        const auto rl = track(loop);
        const Eigenpairing id{Permutation::identity(family[3].dim()), Spectrum(rl.paths.column(0)),
                              Spectrum(rl.paths.column(rl.paths.grid.size() - 1))};
        check(pairings_of(loop).contains(id, 1e-9), "path followed by its reverse admits the identity");
    }

    // Block-combine: the union of component regions, and the product of
    // component pairings embeds in the combined set.
    for (const auto& [x, y] : {std::pair{fixtures::crossing(), family[4]}, std::pair{fixtures::both_instance(), family[3]}}) {
        const auto combined = block_combine({x, y});
        const auto r = track(combined), rx = track(x), ry = track(y);
        double dist = 0.0;
        for (std::size_t k = 0; k < r.paths.grid.size(); ++k) {
            const double t = r.paths.grid[k];
            std::vector<Complex> both;
            for (std::size_t j = 0; j < rx.paths.size(); ++j) both.push_back(rx.paths.at(j, t));
            for (std::size_t j = 0; j < ry.paths.size(); ++j) both.push_back(ry.paths.at(j, t));
            const auto exact = eigenvalues(combined(t)).values;
            std::vector<Complex> ex;
            for (std::size_t j = 0; j < rx.paths.size(); ++j) ex.push_back(eigenvalues(x(t)).values[j]);
            for (std::size_t j = 0; j < ry.paths.size(); ++j) ex.push_back(eigenvalues(y(t)).values[j]);
            dist = std::max(dist, bottleneck_distance(ex, exact));
        }
        check(dist < 1e-9, "block_combine spectrum is the union, off by " + std::to_string(dist));
        const auto s = enumerate_pairings(r.paths, r.report);
        const auto sx = enumerate_pairings(rx.paths, rx.report), sy = enumerate_pairings(ry.paths, ry.report);
        bool embeds = true;
        for (const auto& a : sx.pairings)
            for (const auto& b : sy.pairings) {
                const std::size_t na = a.perm.size(), nb = b.perm.size();
                std::vector<Complex> src, dst;
                for (std::size_t i = 0; i < na; ++i) src.push_back(a.source[i]), dst.push_back(a.image(i));
                for (std::size_t i = 0; i < nb; ++i) src.push_back(b.source[i]), dst.push_back(b.image(i));
                bool found = false;
                for (const auto& p : s.pairings) {
                    std::vector<char> used(na + nb, 0);
                    bool all = true;
                    for (std::size_t i = 0; i < na + nb && all; ++i) {
                        bool hit = false;
                        for (std::size_t j = 0; j < na + nb && !hit; ++j) {
                            if (used[j]) continue;
                            hit = std::abs(p.source[j] - src[i]) < 1e-9 && std::abs(p.image(j) - dst[i]) < 1e-9;
                            if (hit) used[j] = 1;
                        }
                        all = hit;
                    }
                    found = found || all;
                }
                embeds = embeds && found;
            }
        check(embeds, "block_combine embeds product of component pairings");
    }

    // Commuting-eigenvector pairs: both eigenpaths are straight lines.
    for (int t = 0; t < 10; ++t) {
        const CMatrix s = fixtures::random_matrix(rng, 2) + 2.0 * CMatrix::Identity(2, 2);
        CMatrix a0 = fixtures::random_matrix(rng, 2), b0 = fixtures::random_matrix(rng, 2);
        a0(1, 0) = 0.0;
        b0(1, 0) = 0.0;
        const CMatrix a = s * a0 * s.inverse(), b = s * b0 * s.inverse();
        const auto lines = straight_line_paths(a, b);
        const auto r = track(MatrixPath::convex(a, b));
        double dist = 0.0;
        for (std::size_t k = 0; k < r.paths.grid.size(); ++k) {
            const double al = r.paths.grid[k];
            dist = std::max(dist, bottleneck_distance({lines.first.at(al), lines.second.at(al)}, r.paths.column(k)));
        }
        check(dist < 1e-6, "shared-eigenvector straight lines off by " + std::to_string(dist));
    }
    o.detail << passed << "/" << total << " invariant checks ";
}

}  // namespace

int main() {
    bool all = true;
    all &= run(1, "perturbation bound on 500 random pairs", 30, perturbation_bound);
    all &= run(2, "splice witness for 100 perturbations of each fixture", 60, splice_witness_harness);
    all &= run(3, "rip guarantees on fixtures", 60, rip_guarantees);
    all &= run(4, "2x2 classifier against the tracker", 60, classifier);
    all &= run(5, "convex reduction containment", 120, convex_reduction);
    all &= run(6, "companion tracking against direct root continuation", 60, companion_oracle);
    all &= run(7, "structural invariants", 30, structural);
    std::printf("%s\n", all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
    return all ? 0 : 1;
}
