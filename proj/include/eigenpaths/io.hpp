#pragma once

// JSON and CSV forms of the library types. Complex numbers are [re, im]
// pairs, matrices are arrays of rows, polynomial coefficients run low to high
// without the leading 1. Doubles are written with round-trip precision, so
// reading back what was written reproduces every value bit for bit.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "construct.hpp"
#include "polypaths.hpp"
#include "twobytwo.hpp"

namespace eigenpaths {

using Json = nlohmann::ordered_json;

[[noreturn]] inline void parse_error(const std::string& what) { throw Error(ErrorKind::Parse, what); }

namespace io {

namespace detail {

inline const Json& field(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object()) parse_error(where + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) parse_error(where + ": missing field '" + key + "'");
    return *it;
}

inline double number(const Json& j, const std::string& where) {
    if (!j.is_number()) parse_error(where + ": expected a number");
    return j.get<double>();
}

inline std::vector<double> numbers(const Json& j, const std::string& where) {
    if (!j.is_array()) parse_error(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(number(x, where));
    return out;
}

template <class T, class F>
std::vector<T> array_of(const Json& j, const std::string& where, F&& each) {
    if (!j.is_array()) parse_error(where + ": expected an array");
    std::vector<T> out;
    out.reserve(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(each(j[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

/// Library validation failures while building a parsed object are schema
/// errors from the caller's point of view.
template <class F>
auto as_parse(const std::string& where, F&& build) -> decltype(build()) {
    try {
        return build();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Domain) parse_error(where + ": " + e.what());
        throw;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scalars, matrices, spectra

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

/// [re, im] or a bare real number.
inline Complex complex_from_json(const Json& j, const std::string& where = "complex") {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        parse_error(where + ": expected [re, im] or a number");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Json to_json(const std::vector<Complex>& v) {
    Json a = Json::array();
    for (Complex z : v) a.push_back(to_json(z));
    return a;
}

inline std::vector<Complex> complexes_from_json(const Json& j, const std::string& where) {
    return detail::array_of<Complex>(j, where, [](const Json& x, const std::string& w) { return complex_from_json(x, w); });
}

inline Json to_json(const CMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(to_json(m(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline CMatrix matrix_from_json(const Json& j, const std::string& where = "matrix") {
    if (!j.is_array() || j.empty()) parse_error(where + ": expected a non-empty array of rows");
    const std::size_t n = j.size();
    CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const std::string w = where + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != n) parse_error(w + ": expected a row of length " + std::to_string(n));
        for (std::size_t k = 0; k < n; ++k)
            m(Eigen::Index(i), Eigen::Index(k)) = complex_from_json(j[i][k], w + "[" + std::to_string(k) + "]");
    }
    return m;
}

inline Json to_json(const Spectrum& s) { return to_json(s.values); }

inline Json to_json(const Permutation& p) { return Json(p.map); }

inline Permutation permutation_from_json(const Json& j, const std::string& where = "permutation") {
    if (!j.is_array()) parse_error(where + ": expected an array of indices");
    std::vector<std::size_t> m;
    for (const auto& x : j) {
        if (!x.is_number_unsigned()) parse_error(where + ": indices must be non-negative integers");
        m.push_back(x.get<std::size_t>());
    }
    return detail::as_parse(where, [&] { return Permutation(std::move(m)); });
}

inline Json to_json(const MonicPoly& p) { return to_json(p.coeffs); }

inline MonicPoly poly_from_json(const Json& j, const std::string& where = "polynomial") {
    auto c = complexes_from_json(j, where);
    return detail::as_parse(where, [&] { return MonicPoly(std::move(c)); });
}

// ---------------------------------------------------------------------------
// Weight functions and paths

/// {"builtin": name} | {"table": {"x": [...], "y": [...]}} | {"poly": [...]},
/// with "scale" and "shift" present only when they differ from 1 and 0.
inline Json to_json(const ScalarFn& f) {
    Json j = Json::object();
    switch (f.kind) {
    case ScalarFn::Kind::Builtin: j["builtin"] = f.name; break;
    case ScalarFn::Kind::Table: j["table"] = {{"x", f.xs}, {"y", f.ys}}; break;
    case ScalarFn::Kind::Poly: j["poly"] = f.coeffs; break;
    }
    if (f.scale != 1.0) j["scale"] = f.scale;
    if (f.shift != 0.0) j["shift"] = f.shift;
    return j;
}

inline ScalarFn scalar_fn_from_json(const Json& j, const std::string& where = "weight") {
    if (j.is_string()) return detail::as_parse(where, [&] { return ScalarFn::builtin(j.get<std::string>()); });
    if (!j.is_object()) parse_error(where + ": expected a built-in name or an object");
    ScalarFn f = detail::as_parse(where, [&] {
        if (j.contains("builtin")) {
            if (!j["builtin"].is_string()) parse_error(where + ".builtin: expected a string");
            return ScalarFn::builtin(j["builtin"].get<std::string>());
        }
        if (j.contains("table")) {
            const Json& t = j["table"];
            return ScalarFn::table(detail::numbers(detail::field(t, "x", where + ".table"), where + ".table.x"),
                                   detail::numbers(detail::field(t, "y", where + ".table"), where + ".table.y"));
        }
        if (j.contains("poly")) return ScalarFn::poly(detail::numbers(j["poly"], where + ".poly"));
        parse_error(where + ": expected one of 'builtin', 'table', 'poly'");
    });
    if (j.contains("scale")) f.scale = detail::number(j["scale"], where + ".scale");
    if (j.contains("shift")) f.shift = detail::number(j["shift"], where + ".shift");
    return f;
}

inline Json to_json(const MatrixPath& p) {
    Json j = Json::object();
    if (const auto* c = std::get_if<ConvexPath>(&p.form())) {
        j["kind"] = "convex";
        j["A"] = to_json(c->a);
        j["B"] = to_json(c->b);
    } else if (const auto* c = std::get_if<CombinationPath>(&p.form())) {
        j["kind"] = "combination";
        j["A"] = to_json(c->a);
        j["B"] = to_json(c->b);
        j["f"] = to_json(c->f);
        j["g"] = to_json(c->g);
    } else if (const auto* c = std::get_if<PolynomialPath>(&p.form())) {
        j["kind"] = "polynomial";
        j["basis"] = c->basis == PolynomialPath::Basis::Monomial ? "monomial" : "bernstein";
        Json cs = Json::array();
        for (const auto& m : c->coeffs) cs.push_back(to_json(m));
        j["coeffs"] = std::move(cs);
    } else {
        const auto& s = std::get<SampledPath>(p.form());
        j["kind"] = "sampled";
        j["grid"] = s.grid;
        Json ms = Json::array();
        for (const auto& m : s.matrices) ms.push_back(to_json(m));
        j["matrices"] = std::move(ms);
    }
    return j;
}

inline MatrixPath path_from_json(const Json& j, const std::string& where = "path") {
    const Json& kind = detail::field(j, "kind", where);
    if (!kind.is_string()) parse_error(where + ".kind: expected a string");
    const std::string k = kind.get<std::string>();
    auto mat = [&](const char* key) { return matrix_from_json(detail::field(j, key, where), where + "." + key); };
    auto mats = [&](const char* key) {
        return detail::array_of<CMatrix>(detail::field(j, key, where), where + "." + key,
                                         [](const Json& x, const std::string& w) { return matrix_from_json(x, w); });
    };
    return detail::as_parse(where, [&] {
        if (k == "convex") return MatrixPath::convex(mat("A"), mat("B"));
        if (k == "combination")
            return MatrixPath::combination(mat("A"), mat("B"), scalar_fn_from_json(detail::field(j, "f", where), where + ".f"),
                                           scalar_fn_from_json(detail::field(j, "g", where), where + ".g"));
        if (k == "polynomial") {
            auto basis = PolynomialPath::Basis::Monomial;
            if (j.contains("basis")) {
                const std::string b = j["basis"].is_string() ? j["basis"].get<std::string>() : "";
                if (b == "bernstein")
                    basis = PolynomialPath::Basis::Bernstein;
                else if (b != "monomial")
                    parse_error(where + ".basis: expected 'monomial' or 'bernstein'");
            }
            return MatrixPath::polynomial(mats("coeffs"), basis);
        }
        if (k == "sampled")
            return MatrixPath::sampled(detail::numbers(detail::field(j, "grid", where), where + ".grid"), mats("matrices"));
        parse_error(where + ".kind: unknown path kind '" + k + "'");
    });
}

/// {"kind": ..., "coeffs": [...]}: one coefficient list per endpoint or sample.
inline Json to_json(const PolyPath& p) {
    Json j = Json::object();
    j["kind"] = p.kind();
    if (const auto* c = std::get_if<ConvexPoly>(&p.form())) {
        j["coeffs"] = Json::array({to_json(c->q), to_json(c->r)});
    } else if (const auto* c = std::get_if<CombinationPoly>(&p.form())) {
        j["coeffs"] = Json::array({to_json(c->q), to_json(c->r)});
        j["f"] = to_json(c->f);
        j["g"] = to_json(c->g);
    } else {
        const auto& s = std::get<SampledPoly>(p.form());
        j["grid"] = s.grid;
        Json cs = Json::array();
        for (const auto& q : s.polys) cs.push_back(to_json(q));
        j["coeffs"] = std::move(cs);
    }
    return j;
}

inline PolyPath poly_path_from_json(const Json& j, const std::string& where = "polynomial path") {
    const Json& kind = detail::field(j, "kind", where);
    if (!kind.is_string()) parse_error(where + ".kind: expected a string");
    const std::string k = kind.get<std::string>();
    auto polys = detail::array_of<MonicPoly>(detail::field(j, "coeffs", where), where + ".coeffs",
                                             [](const Json& x, const std::string& w) { return poly_from_json(x, w); });
    return detail::as_parse(where, [&] {
        if (k == "convex" || k == "combination") {
            if (polys.size() != 2) parse_error(where + ".coeffs: expected two coefficient lists");
            if (k == "convex") return PolyPath::convex(polys[0], polys[1]);
            return PolyPath::combination(polys[0], polys[1], scalar_fn_from_json(detail::field(j, "f", where), where + ".f"),
                                         scalar_fn_from_json(detail::field(j, "g", where), where + ".g"));
        }
        if (k == "sampled")
            return PolyPath::sampled(detail::numbers(detail::field(j, "grid", where), where + ".grid"), std::move(polys));
        parse_error(where + ".kind: unknown polynomial path kind '" + k + "'");
    });
}

// ---------------------------------------------------------------------------
// Results

inline Json to_json(const Ambiguity& a) {
    return {{"alpha", a.alpha},
            {"alpha_lo", a.alpha_lo},
            {"alpha_hi", a.alpha_hi},
            {"grid_index", a.grid_index},
            {"lambda", to_json(a.lambda)},
            {"multiplicity", a.multiplicity},
            {"singular", a.singular},
            {"members", a.members},
            {"diameter", a.diameter}};
}

inline Json to_json(const AmbiguityReport& r) {
    Json a = Json::array();
    for (const auto& x : r.ambiguities) a.push_back(to_json(x));
    return {{"collision_tol", r.collision_tol},
            {"ambiguities", std::move(a)},
            {"unresolved_alphas", r.unresolved_alphas},
            {"notes", r.notes}};
}

inline Json to_json(const Eigenpairing& p) {
    return {{"perm", to_json(p.perm)}, {"source", to_json(p.source)}, {"target", to_json(p.target)}};
}

inline Eigenpairing pairing_from_json(const Json& j, const std::string& where = "pairing") {
    Eigenpairing p;
    p.perm = permutation_from_json(detail::field(j, "perm", where), where + ".perm");
    p.source = Spectrum(complexes_from_json(detail::field(j, "source", where), where + ".source"));
    p.target = Spectrum(complexes_from_json(detail::field(j, "target", where), where + ".target"));
    if (p.perm.size() != p.source.size() || p.perm.size() != p.target.size())
        parse_error(where + ": permutation and spectra sizes differ");
    return p;
}

inline Json to_json(const SpliceChoice& c) {
    Json a = Json::array();
    for (const auto& p : c.perms) a.push_back(to_json(p));
    return a;
}

inline SpliceChoice splice_from_json(const Json& j, const std::string& where = "splice") {
    return {detail::array_of<Permutation>(j, where,
                                          [](const Json& x, const std::string& w) { return permutation_from_json(x, w); })};
}

inline Json to_json(const PairingSet& s) {
    Json ps = Json::array(), gs = Json::array();
    for (const auto& p : s.pairings) ps.push_back(to_json(p));
    for (const auto& g : s.generators) gs.push_back(to_json(g));
    return {{"pairings", std::move(ps)}, {"generators", std::move(gs)}, {"truncated", s.truncated}, {"notes", s.notes}};
}

inline Json to_json(const PairingVerdict& v) {
    Json flags = Json::array();
    if (v.flag != Degeneracy::None) flags.push_back(to_string(v.flag));
    const auto& c = v.canonical;
    return {{"verdict", to_string(v.verdict)},
            {"theta", v.theta},
            {"arg_ratio", v.arg_ratio},
            {"flags", std::move(flags)},
            {"canonical",
             {{"lambda", to_json(std::vector<Complex>{c.lambda1, c.lambda2})},
              {"mu", to_json(std::vector<Complex>{c.mu1, c.mu2})},
              {"v", to_json(std::vector<Complex>{c.v1, c.v2})}}},
            {"evidence", {{"discriminant_roots", v.discriminant_roots}}},
            {"notes", v.notes}};
}

inline Json to_json(const RipWindow& w) {
    return {{"alpha_lo", w.alpha_lo},       {"alpha_hi", w.alpha_hi}, {"open_left", w.open_left},
            {"open_right", w.open_right},   {"bump", w.bump},         {"transpositions", w.transpositions},
            {"candidate", w.candidate}};
}

/// The result without the new path itself, which is written separately.
inline Json to_json(const RipResult& r) {
    Json ws = Json::array();
    for (const auto& w : r.windows) ws.push_back(to_json(w));
    Json j = {{"sup_dev", r.sup_dev},
              {"path_dev", r.path_dev},
              {"endpoint_preserved", {r.endpoint_preserved.first, r.endpoint_preserved.second}},
              {"fitted", r.fitted},
              {"attempts", r.attempts},
              {"new_path_kind", r.new_path.is_sampled()     ? "sampled"
                                : r.new_path.is_convex()    ? "convex"
                                : r.new_path.is_polynomial() ? "polynomial"
                                                             : "combination"},
              {"windows", std::move(ws)}};
    j["reference_pairing"] = r.reference_pairing ? to_json(*r.reference_pairing) : Json();
    j["achieved_pairing"] = r.achieved_pairing ? to_json(*r.achieved_pairing) : Json();
    j["notes"] = r.notes;
    return j;
}

inline Json to_json(const PolyRipResult& r) {
    Json j = {{"coeff_dev", r.coeff_dev},
              {"root_dev", r.root_dev},
              {"matrix_eps", r.matrix_eps},
              {"retries", r.retries},
              {"new_path_kind", r.new_path.kind()}};
    j["reference_pairing"] = r.reference_pairing ? to_json(*r.reference_pairing) : Json();
    j["achieved_pairing"] = r.achieved_pairing ? to_json(*r.achieved_pairing) : Json();
    j["notes"] = r.notes;
    return j;
}

inline Json to_json(const Theorem1Report& r) {
    return {{"witness_found", r.witness_found},
            {"deviation", r.deviation},
            {"eps", r.eps},
            {"perturbation_size", r.perturbation_size},
            {"delta", r.delta},
            {"base_ambiguities", r.base_ambiguities},
            {"states_searched", r.states_searched},
            {"witness", to_json(r.witness)},
            {"message", r.message}};
}

inline Json to_json(const ConvexReductionReport& r) {
    Json w = Json::array();
    for (auto x : r.witness) w.push_back(x);
    return {{"hypothesis_holds", r.hypothesis_holds},
            {"min_join", r.min_join},
            {"min_join_alpha", r.min_join_alpha},
            {"f_dips_negative", r.f_dips_negative},
            {"g_dips_negative", r.g_dips_negative},
            {"contained", r.contained},
            {"convex", to_json(r.convex)},
            {"combination", to_json(r.combination)},
            {"witness", std::move(w)},
            {"notes", r.notes}};
}

inline Json to_json(const PolyReductionReport& r) {
    Json w = Json::array();
    for (auto x : r.witness) w.push_back(x);
    Json j = {{"hypothesis_holds", r.hypothesis_holds},
              {"min_join", r.min_join},
              {"min_join_alpha", r.min_join_alpha},
              {"contained", r.contained},
              {"companion_exact", r.companion_exact},
              {"convex_root_pairings", to_json(r.convex_root_pairings)},
              {"path_root_pairings", to_json(r.path_root_pairings)},
              {"witness", std::move(w)}};
    j["monic_contained"] = r.monic_contained ? Json(*r.monic_contained) : Json();
    j["notes"] = r.notes;
    return j;
}

// ---------------------------------------------------------------------------
// Config overrides

/// Applies recognised keys of `j` to the configs; any other key is an error.
inline void apply_overrides(const Json& j, TrackConfig& track, RipConfig* rip = nullptr, DirectConfig* direct = nullptr) {
    if (j.is_null()) return;
    if (!j.is_object()) parse_error("config: expected an object");
    auto num = [&](const std::string& k) { return detail::number(j[k], "config." + k); };
    auto count = [&](const std::string& k) {
        if (!j[k].is_number_unsigned()) parse_error("config." + k + ": expected a non-negative integer");
        return j[k].get<std::size_t>();
    };
    for (const auto& [k, v] : j.items()) {
        if (k == "eps_resolution") track.eps_resolution = num(k);
        else if (k == "collision_tol") track.collision_tol = num(k);
        else if (k == "max_depth") track.max_depth = int(count(k));
        else if (k == "grid_init") track.grid_init = int(count(k));
        else if (k == "separation_factor") track.separation_factor = num(k);
        else if (k == "dip_ratio") track.dip_ratio = num(k);
        else if (k == "max_steps") track.max_steps = count(k);
        else if (k == "root_tol") track.spectra.root_tol = num(k);
        else if (rip && k == "max_attempts") rip->max_attempts = int(count(k));
        else if (rip && k == "candidates") rip->candidates = int(count(k));
        else if (rip && k == "window_half_width") rip->window_half_width = num(k);
        else if (rip && k == "detour_points") rip->detour_points = count(k);
        else if (rip && k == "loop_points") rip->loop_points = count(k);
        else if (rip && k == "outside_points") rip->outside_points = count(k);
        else if (rip && k == "check_points") rip->check_points = count(k);
        else if (rip && k == "max_degree") rip->max_degree = count(k);
        else if (direct && k == "direct_points") direct->points = count(k);
        else if (direct && k == "direct_max_depth") direct->max_depth = int(count(k));
        else parse_error("config: unknown key '" + k + "'");
        (void)v;
    }
    detail::as_parse("config", [&] {
        track.validate();
        return 0;
    });
    if (rip) rip->track = track;
    if (direct) direct->spectra = track.spectra;
}

// ---------------------------------------------------------------------------
// Files

/// Parses JSON text, reporting syntax errors by line and column.
inline Json parse_json(const std::string& text, const std::string& name = "input") {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        parse_error(name + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
    }
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) parse_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str(), path);
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Domain, "cannot write '" + path + "'");
    out << text;
}

inline void write_json_file(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

/// One row per grid point: alpha, then re_j, im_j for every path j.
inline std::string paths_csv(const EigenPathSet& s) {
    std::ostringstream o;
    o << std::setprecision(17);
    o << "alpha";
    for (std::size_t j = 0; j < s.size(); ++j) o << ",re_" << j << ",im_" << j;
    o << "\n";
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
        o << s.grid[k];
        for (std::size_t j = 0; j < s.size(); ++j) o << "," << s.paths[j][k].real() << "," << s.paths[j][k].imag();
        o << "\n";
    }
    return o.str();
}

}  // namespace io
}  // namespace eigenpaths
