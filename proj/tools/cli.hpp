#pragma once

// Command-line front end: each subcommand reads one JSON input, runs a
// library operation and writes CSV, JSON and SVG files into the output
// directory. An optional "expect" object in the input turns result fields
// into assertions; a failed one gives exit status 4.

#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <eigenpaths/eigenpaths.hpp>

namespace eigenpaths::cli {

enum ExitCode { kOk = 0, kParse = 2, kNumerical = 3, kAssertion = 4 };

struct RunSpec {
    std::string command;
    std::string input;
    std::string out = "out";
    std::optional<double> eps;
    std::uint64_t seed = 1;
    int trials = 100;
    std::string config;
    std::string format = "all";

    bool wants(const char* f) const { return format == "all" || format == f; }
};

struct Context {
    RunSpec spec;
    Json input;
    TrackConfig track;
    RipConfig rip;
    DirectConfig direct;
    std::ostream& log;

    std::string path(const std::string& name) const { return (std::filesystem::path(spec.out) / name).string(); }
    void json(const std::string& name, const Json& j) const {
        if (spec.wants("json")) io::write_json_file(path(name), j);
    }
    void csv(const std::string& name, const std::string& text) const {
        if (spec.wants("csv")) io::write_text(path(name), text);
    }
    void svg(const std::string& name, const svg::Plot& p) const {
        if (spec.wants("svg")) io::write_text(path(name), p.render());
    }
    double eps_or(double fallback) const {
        if (spec.eps) return *spec.eps;
        if (input.is_object() && input.contains("eps")) return io::detail::number(input["eps"], "input.eps");
        return fallback;
    }
};

// ---------------------------------------------------------------------------
// Expectations

/// Each key of `expect` names a summary field. A plain value must match
/// exactly; {"below": x} and {"above": x} bound a number.
inline std::vector<std::string> check_expectations(const Json& input, const Json& summary) {
    std::vector<std::string> failed;
    if (!input.is_object() || !input.contains("expect")) return failed;
    const Json& ex = input["expect"];
    if (!ex.is_object()) parse_error("input.expect: expected an object");
    for (const auto& [key, want] : ex.items()) {
        if (!summary.contains(key)) parse_error("input.expect: result has no field '" + key + "'");
        const Json& got = summary[key];
        bool ok = true;
        if (want.is_object() && (want.contains("below") || want.contains("above"))) {
            if (!got.is_number()) parse_error("input.expect." + key + ": bound on a non-numeric field");
            const double v = got.get<double>();
            if (want.contains("below") && !(v < io::detail::number(want["below"], "expect." + key + ".below"))) ok = false;
            if (want.contains("above") && !(v > io::detail::number(want["above"], "expect." + key + ".above"))) ok = false;
        } else {
            ok = got == want;
        }
        if (!ok) failed.push_back(key + ": expected " + want.dump() + ", got " + got.dump());
    }
    return failed;
}

// ---------------------------------------------------------------------------
// Helpers

/// A bare path object, or one under `key`.
inline const Json& unwrap(const Json& in, const char* key) {
    if (in.is_object() && in.contains(key)) return in[key];
    return in;
}

inline void eigenpath_figures(const Context& c, const std::string& stem, const EigenPathSet& s,
                              const AmbiguityReport& r, const std::string& title) {
    c.svg(stem + "_re.svg", svg::eigenpath_plot(s, &r, false, title + ": Re(lambda)"));
    c.svg(stem + "_im.svg", svg::eigenpath_plot(s, &r, true, title + ": Im(lambda)"));
}

inline Json pairing_summary(const EigenPathSet& paths, const AmbiguityReport& report) {
    const PairingSet all = enumerate_pairings(paths, report);
    return {{"tracked_pairing", io::to_json(pairing_from_paths(paths))}, {"pairing_set", io::to_json(all)},
            {"pairing_count", all.size()}};
}

// ---------------------------------------------------------------------------
// Commands. Each returns the summary that expectations are checked against.

inline Json cmd_track(Context& c) {
    const MatrixPath path = io::path_from_json(unwrap(c.input, "path"), "input.path");
    const TrackResult r = track(path, c.track);
    Json summary = io::to_json(r.report);
    summary["dimension"] = path.dim();
    summary["grid_points"] = r.paths.grid.size();
    summary["evaluations"] = r.evaluations;
    summary["ambiguity_count"] = r.report.ambiguities.size();
    summary.update(pairing_summary(r.paths, r.report));
    c.csv("eigenpaths.csv", io::paths_csv(r.paths));
    c.json("ambiguities.json", summary);
    eigenpath_figures(c, "eigenpaths", r.paths, r.report, "eigenpaths");
    return summary;
}

inline Json cmd_classify2x2(Context& c) {
    CMatrix a, b;
    if (c.input.contains("canonical")) {
        const Json& k = c.input["canonical"];
        const auto lam = io::complexes_from_json(io::detail::field(k, "lambda", "canonical"), "canonical.lambda");
        const auto mu = io::complexes_from_json(io::detail::field(k, "mu", "canonical"), "canonical.mu");
        const auto v = io::complexes_from_json(io::detail::field(k, "v", "canonical"), "canonical.v");
        if (lam.size() != 2 || mu.size() != 2 || v.size() != 2) parse_error("canonical: lambda, mu and v need two entries");
        Canonical2x2 can;
        can.lambda1 = lam[0], can.lambda2 = lam[1], can.mu1 = mu[0], can.mu2 = mu[1], can.v1 = v[0], can.v2 = v[1];
        std::tie(a, b) = io::detail::as_parse("canonical", [&] { return to_matrices(can); });
    } else {
        a = io::matrix_from_json(io::detail::field(c.input, "A", "input"), "input.A");
        b = io::matrix_from_json(io::detail::field(c.input, "B", "input"), "input.B");
    }
    if (a.rows() != 2 || b.rows() != 2) parse_error("classify2x2: A and B must be 2x2");
    const PairingVerdict v = classify(a, b);
    Json summary = io::to_json(v);
    // Cross-check against the pairings the tracker can realise.
    const TrackResult r = track(MatrixPath::convex(a, b), c.track);
    const PairingSet tracked = enumerate_pairings(r.paths, r.report);
    const auto predicted = verdict_pairings(v);
    bool agree = predicted.size() == tracked.size();
    for (const auto& p : predicted) agree = agree && tracked.contains(p, 1e-9 * (1.0 + max_norm(a) + max_norm(b)));
    summary["tracker_pairing_count"] = tracked.size();
    summary["tracker_agrees"] = agree;
    c.json("verdict.json", summary);
    eigenpath_figures(c, "eigenpaths", r.paths, r.report, "convex path");
    return summary;
}

inline Json cmd_rip(Context& c) {
    const MatrixPath path = io::path_from_json(unwrap(c.input, "path"), "input.path");
    const double eps = c.eps_or(0.1);
    std::optional<SpliceChoice> choice;
    if (c.input.contains("splice")) choice = io::splice_from_json(c.input["splice"], "input.splice");
    bool keep_start = false, keep_end = false;
    if (c.input.contains("preserve_endpoints")) {
        const Json& pe = c.input["preserve_endpoints"];
        if (!pe.is_array() || pe.size() != 2 || !pe[0].is_boolean() || !pe[1].is_boolean())
            parse_error("input.preserve_endpoints: expected [bool, bool]");
        keep_start = pe[0].get<bool>();
        keep_end = pe[1].get<bool>();
    }
    const RipResult r = (keep_start || keep_end)
                            ? rip_preserving_endpoints(path, eps, keep_start, keep_end, c.rip, choice)
                            : rip(path, eps, c.rip, choice);
    const TrackResult before = track(path, c.track), after = track(r.new_path, c.track);
    Json summary = io::to_json(r);
    summary["eps"] = eps;
    summary["ambiguity_count_before"] = before.report.ambiguities.size();
    summary["ambiguity_count_after"] = after.report.ambiguities.size();
    summary["unchanged"] = r.windows.empty() && !r.fitted && r.sup_dev == 0.0;
    c.json("rip.json", summary);
    c.json("new_path.json", io::to_json(r.new_path));
    c.csv("eigenpaths_before.csv", io::paths_csv(before.paths));
    c.csv("eigenpaths_after.csv", io::paths_csv(after.paths));
    for (bool imag : {false, true}) {
        svg::Plot p;
        p.title = std::string("rip, eps=") + svg::detail::num(eps) + ": before (dashed) and after";
        p.ylabel = imag ? "Im(lambda)" : "Re(lambda)";
        p.series = svg::path_series(before.paths, imag, true, "before ");
        for (auto& s : svg::path_series(after.paths, imag, false, "after ")) p.series.push_back(std::move(s));
        p.markers = svg::ambiguity_markers(before.report, imag);
        c.svg(imag ? "rip_im.svg" : "rip_re.svg", p);
    }
    return summary;
}

inline Json cmd_polytrack(Context& c) {
    const PolyPath pp = io::poly_path_from_json(unwrap(c.input, "poly_path"), "input.poly_path");
    const TrackResult r = track_roots(pp, c.track);
    const RootPathResult d = track_roots_direct(pp, c.direct, r.paths.grid);
    const RootSetDeviation dev = compare_root_paths(r.paths, d.paths);
    Json summary = io::to_json(r.report);
    summary["degree"] = pp.degree();
    summary["ambiguity_count"] = r.report.ambiguities.size();
    summary["direct"] = {{"set_dev", dev.set_dev},
                         {"path_dev", dev.path_dev},
                         {"grid_points", d.paths.grid.size()},
                         {"unresolved_alphas", d.unresolved_alphas},
                         {"reseeds", d.reseeds}};
    summary["direct_set_dev"] = dev.set_dev;
    summary.update(pairing_summary(r.paths, r.report));
    if (c.input.contains("rip_eps") || c.spec.eps) {
        const double eps = c.spec.eps ? *c.spec.eps : io::detail::number(c.input["rip_eps"], "input.rip_eps");
        std::optional<SpliceChoice> choice;
        if (c.input.contains("splice")) choice = io::splice_from_json(c.input["splice"], "input.splice");
        const PolyRipResult pr = rip_poly(pp, eps, c.rip, choice);
        const TrackResult after = track_roots(pr.new_path, c.track);
        summary["rip"] = io::to_json(pr);
        summary["rip_coeff_dev"] = pr.coeff_dev;
        summary["rip_ambiguity_count"] = after.report.ambiguities.size();
        c.json("new_poly_path.json", io::to_json(pr.new_path));
        c.csv("rootpaths_after.csv", io::paths_csv(after.paths));
        eigenpath_figures(c, "rootpaths_after", after.paths, after.report, "ripped root paths");
    }
    c.csv("rootpaths.csv", io::paths_csv(r.paths));
    c.json("ambiguities.json", summary);
    eigenpath_figures(c, "rootpaths", r.paths, r.report, "root paths");
    return summary;
}

inline Json cmd_reduce(Context& c) {
    const ScalarFn f = io::scalar_fn_from_json(io::detail::field(c.input, "f", "input"), "input.f");
    const ScalarFn g = io::scalar_fn_from_json(io::detail::field(c.input, "g", "input"), "input.g");
    Json summary;
    if (c.input.contains("Q")) {
        const MonicPoly q = io::poly_from_json(c.input["Q"], "input.Q");
        const MonicPoly r = io::poly_from_json(io::detail::field(c.input, "R", "input"), "input.R");
        summary = io::to_json(io::detail::as_parse("input", [&] { return convex_reduction_poly(q, r, f, g, c.track); }));
        summary["mode"] = "polynomial";
    } else {
        const CMatrix a = io::matrix_from_json(io::detail::field(c.input, "A", "input"), "input.A");
        const CMatrix b = io::matrix_from_json(io::detail::field(c.input, "B", "input"), "input.B");
        summary = io::to_json(io::detail::as_parse("input", [&] { return convex_reduction_check(a, b, f, g, c.track); }));
        summary["mode"] = "matrix";
    }
    c.json("reduce.json", summary);
    svg::Plot p;
    p.title = "weights f (blue) and g (orange)";
    p.ylabel = "weight";
    svg::Series sf, sg;
    sg.color = svg::palette(1);
    for (double t : uniform_grid(401)) {
        sf.x.push_back(t), sf.y.push_back(f(t));
        sg.x.push_back(t), sg.y.push_back(g(t));
    }
    p.series = {sf, sg};
    c.svg("weights.svg", p);
    return summary;
}

inline Json cmd_perturb(Context& c) {
    const MatrixPath path = io::path_from_json(unwrap(c.input, "path"), "input.path");
    const double eps = c.eps_or(0.05);
    if (c.spec.trials < 1) parse_error("--trials must be at least 1");
    // The default size is the step bound delta of the base path itself.
    double delta = theorem1_experiment(path, path, eps, c.track).delta;
    if (c.input.contains("delta")) delta = io::detail::number(c.input["delta"], "input.delta");
    std::ostringstream table;
    table << std::setprecision(17) << "trial,seed,perturbation_size,deviation,witness_found\n";
    std::size_t found = 0;
    double worst = 0.0;
    Json rows = Json::array();
    std::vector<double> xs, ys;
    for (int t = 0; t < c.spec.trials; ++t) {
        const std::uint64_t seed = c.spec.seed * 1000003ULL + std::uint64_t(t);
        std::mt19937_64 rng(seed);
        const MatrixPath pert = random_perturbation(path, delta, rng);
        const Theorem1Report rep = theorem1_experiment(path, pert, eps, c.track);
        found += rep.witness_found ? 1 : 0;
        worst = std::max(worst, rep.deviation);
        table << t << "," << seed << "," << rep.perturbation_size << "," << rep.deviation << ","
              << (rep.witness_found ? 1 : 0) << "\n";
        Json row = io::to_json(rep);
        row["trial"] = t;
        row["seed"] = seed;
        rows.push_back(std::move(row));
        xs.push_back(t);
        ys.push_back(rep.deviation);
    }
    Json summary = {{"trials", c.spec.trials},      {"witnesses", found},
                    {"all_witnesses", found == std::size_t(c.spec.trials)},
                    {"eps", eps},                   {"delta", delta},
                    {"max_deviation", worst},       {"runs", std::move(rows)}};
    c.json("perturb.json", summary);
    c.csv("perturb.csv", table.str());
    svg::Plot p;
    p.title = "splice witness deviation per trial (eps dashed)";
    p.xlabel = "trial";
    p.ylabel = "deviation";
    svg::Series dev, bound;
    dev.x = xs, dev.y = ys;
    bound.x = {0.0, double(std::max(1, c.spec.trials - 1))}, bound.y = {eps, eps};
    bound.dashed = true;
    bound.color = svg::palette(3);
    p.series = {dev, bound};
    c.svg("perturb.svg", p);
    return summary;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunSpec spec;
    CLI::App app{"Eigenvalue paths along matrix and polynomial paths"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--input,-i", spec.input, "input JSON file")->required();
    app.add_option("--out,-o", spec.out, "output directory");
    app.add_option("--eps", spec.eps, "tolerance for rip and perturb");
    app.add_option("--seed", spec.seed, "seed for every random draw");
    app.add_option("--trials", spec.trials, "trials for perturb");
    app.add_option("--config", spec.config, "JSON file of configuration overrides");
    app.add_option("--format", spec.format, "outputs to write")->check(CLI::IsMember({"csv", "json", "svg", "all"}));
    const std::vector<std::pair<const char*, const char*>> commands{
        {"track", "track eigenpaths of a matrix path"},
        {"classify2x2", "convex pairing verdict for a 2x2 pair"},
        {"rip", "ambiguity-free perturbation of a matrix path"},
        {"polytrack", "track roots of a polynomial path, checked by direct continuation"},
        {"reduce", "convex reduction check for a weighted combination"},
        {"perturb", "splice witnesses for seeded perturbations"}};
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kParse;
    }
    spec.command = app.get_subcommands().front()->get_name();

    try {
        Context c{spec, io::read_json_file(spec.input), {}, {}, {}, err};
        c.rip.seed = spec.seed;
        c.direct.seed = spec.seed;
        if (!spec.config.empty()) io::apply_overrides(io::read_json_file(spec.config), c.track, &c.rip, &c.direct);
        c.rip.track = c.track;
        c.direct.spectra = c.track.spectra;
        std::filesystem::create_directories(spec.out);
        Json summary;
        if (spec.command == "track") summary = cmd_track(c);
        else if (spec.command == "classify2x2") summary = cmd_classify2x2(c);
        else if (spec.command == "rip") summary = cmd_rip(c);
        else if (spec.command == "polytrack") summary = cmd_polytrack(c);
        else if (spec.command == "reduce") summary = cmd_reduce(c);
        else summary = cmd_perturb(c);
        const auto failed = check_expectations(c.input, summary);
        for (const auto& f : failed) err << "assertion failed: " << f << "\n";
        out << spec.command << ": wrote results to " << spec.out << "\n";
        return failed.empty() ? kOk : kAssertion;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        switch (e.kind()) {
        case ErrorKind::Parse:
        case ErrorKind::Domain: return kParse;
        case ErrorKind::Numerical: return kNumerical;
        case ErrorKind::Assertion: return kAssertion;
        }
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kParse;
    }
    return kNumerical;
}

}  // namespace eigenpaths::cli
