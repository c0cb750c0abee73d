#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "linalg.hpp"
#include "oracle.hpp"
#include "paths.hpp"
#include "phases.hpp"
#include "random.hpp"
#include "states.hpp"
#include "transport.hpp"

namespace decphase {

using nlohmann::json;

// ---------------- scenario model ----------------

struct Tolerances {
    double phase = 1e-6;
    double transport = 1e-8;
    double trace = 1e-10;
};

enum class Check { gauge, transport, oracle, common_basis, recombination };

inline const char* check_name(Check c) {
    switch (c) {
        case Check::gauge: return "gauge";
        case Check::transport: return "transport";
        case Check::oracle: return "oracle";
        case Check::common_basis: return "common_basis";
        case Check::recombination: return "recombination";
    }
    return "?";
}

struct Scenario {
    Scenario(Decomposition d, std::vector<UnitaryPath> p)
        : decomposition(std::move(d)), paths(std::move(p)) {}

    Decomposition decomposition;
    std::vector<UnitaryPath> paths;
    std::string name;
    bool shared_path = false;
    double steps_per_unit_time = 1000.0;
    Tolerances tol;
    std::vector<Check> checks;
    bool checks_explicit = false;
    std::uint64_t seed = 12345;
    double gauge_amplitude = 0.1;
    int oracle_dim_cap = kDefaultLiftCap;
};

struct BuildOptions {
    std::map<std::string, double> parameter_overrides;
    std::optional<double> steps_per_unit_time;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol_phase;
    std::string default_name;
};

// ---------------- parsing helpers ----------------

namespace detail {

inline std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void locate(const std::string& text, std::size_t byte, int& line, int& column) {
    line = 1;
    std::size_t last_nl = 0;
    bool seen_nl = false;
    const std::size_t stop = std::min(byte, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
        if (text[i] == '\n') {
            ++line;
            last_nl = i;
            seen_nl = true;
        }
    }
    column = static_cast<int>(stop - (seen_nl ? last_nl + 1 : 0)) + 1;
}

using Params = std::map<std::string, double>;

[[noreturn]] inline void bad_field(const std::string& path, const std::string& why) {
    throw ValidationError(path + ": " + why);
}

inline const json& field(const json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) bad_field(path + "." + key, "missing");
    return *it;
}

inline double resolve_number(const json& j, const Params& params, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        auto it = params.find(j.get<std::string>());
        if (it == params.end())
            bad_field(path, "unknown parameter '" + j.get<std::string>() + "'");
        return it->second;
    }
    if (j.is_object()) {
        const json& p = field(j, "param", path);
        if (!p.is_string()) bad_field(path + ".param", "expected a parameter name");
        auto it = params.find(p.get<std::string>());
        if (it == params.end())
            bad_field(path + ".param", "unknown parameter '" + p.get<std::string>() + "'");
        double scale = 1.0, offset = 0.0;
        if (j.contains("scale")) {
            if (!j["scale"].is_number()) bad_field(path + ".scale", "expected a number");
            scale = j["scale"].get<double>();
        }
        if (j.contains("offset")) {
            if (!j["offset"].is_number()) bad_field(path + ".offset", "expected a number");
            offset = j["offset"].get<double>();
        }
        return scale * it->second + offset;
    }
    bad_field(path, "expected a number, parameter name, or {param, scale, offset}");
}

inline cxd resolve_entry(const json& j, const Params& params, const std::string& path) {
    if (j.is_array()) {
        if (j.size() != 2) bad_field(path, "complex entry must be [re, im]");
        return {resolve_number(j[0], params, path + "[0]"),
                resolve_number(j[1], params, path + "[1]")};
    }
    return {resolve_number(j, params, path), 0.0};
}

inline ComplexMatrix resolve_matrix(const json& j, const Params& params, const std::string& path) {
    if (!j.is_array() || j.empty()) bad_field(path, "expected a nonempty array of rows");
    const int rows = static_cast<int>(j.size());
    int cols = -1;
    ComplexMatrix m;
    for (int r = 0; r < rows; ++r) {
        const json& row = j[r];
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!row.is_array() || row.empty()) bad_field(rp, "expected a nonempty row array");
        if (cols < 0) {
            cols = static_cast<int>(row.size());
            m.resize(rows, cols);
        } else if (static_cast<int>(row.size()) != cols) {
            bad_field(rp, "ragged matrix row");
        }
        for (int c = 0; c < cols; ++c)
            m(r, c) = resolve_entry(row[c], params, rp + "[" + std::to_string(c) + "]");
    }
    return m;
}

inline ComplexMatrix resolve_density(const json& j, int dim, const Params& params,
                                     const std::string& path) {
    if (j.is_object() && (j.contains("bloch") || j.contains("bloch_polar"))) {
        if (dim != 2) bad_field(path, "bloch form needs system_dim 2");
        double x, y, z;
        if (j.contains("bloch")) {
            const json& b = j["bloch"];
            if (!b.is_array() || b.size() != 3) bad_field(path + ".bloch", "expected [x, y, z]");
            x = resolve_number(b[0], params, path + ".bloch[0]");
            y = resolve_number(b[1], params, path + ".bloch[1]");
            z = resolve_number(b[2], params, path + ".bloch[2]");
        } else {
            const json& b = j["bloch_polar"];
            if (!b.is_array() || b.size() != 3)
                bad_field(path + ".bloch_polar", "expected [r, theta, phi]");
            const double r = resolve_number(b[0], params, path + ".bloch_polar[0]");
            const double th = resolve_number(b[1], params, path + ".bloch_polar[1]");
            const double ph = resolve_number(b[2], params, path + ".bloch_polar[2]");
            x = r * std::sin(th) * std::cos(ph);
            y = r * std::sin(th) * std::sin(ph);
            z = r * std::cos(th);
        }
        if (x * x + y * y + z * z > 1.0 + 1e-12)
            bad_field(path, "bloch vector leaves the unit ball");
        return 0.5 * pauli_combination(1.0, x, y, z);
    }
    const ComplexMatrix m = resolve_matrix(j, params, path);
    if (m.rows() != dim) bad_field(path, "density matrix does not match system_dim");
    return m;
}

inline ComplexMatrix resolve_hamiltonian(const json& j, int dim, const Params& params,
                                         const std::string& path) {
    if (j.is_object() && j.contains("pauli")) {
        if (dim != 2) bad_field(path, "pauli form needs system_dim 2");
        const json& p = j["pauli"];
        if (!p.is_array() || p.size() != 4)
            bad_field(path + ".pauli", "expected [c0, cx, cy, cz]");
        return pauli_combination(resolve_number(p[0], params, path + ".pauli[0]"),
                                 resolve_number(p[1], params, path + ".pauli[1]"),
                                 resolve_number(p[2], params, path + ".pauli[2]"),
                                 resolve_number(p[3], params, path + ".pauli[3]"));
    }
    const ComplexMatrix m = resolve_matrix(j, params, path);
    if (m.rows() != dim) bad_field(path, "hamiltonian does not match system_dim");
    return m;
}

inline UnitaryPath resolve_path(const json& j, int dim, double spu, const Params& params,
                                const std::string& path) {
    const json& segs = field(j, "segments", path);
    if (!segs.is_array() || segs.empty())
        bad_field(path + ".segments", "expected a nonempty array");
    std::vector<HamiltonianSegment> segments;
    std::vector<int> steps;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const std::string sp = path + ".segments[" + std::to_string(i) + "]";
        const json& s = segs[i];
        if (!s.is_object()) bad_field(sp, "expected an object");
        HamiltonianSegment seg;
        seg.hamiltonian = resolve_hamiltonian(field(s, "hamiltonian", sp), dim, params,
                                              sp + ".hamiltonian");
        seg.duration = resolve_number(field(s, "duration", sp), params, sp + ".duration");
        if (!(seg.duration > 0.0)) bad_field(sp + ".duration", "must be positive");
        steps.push_back(static_cast<int>(std::max<long long>(1, std::llround(seg.duration * spu))));
        segments.push_back(std::move(seg));
    }
    return path_from_hamiltonians(segments, steps);
}

inline Check resolve_check(const json& j, const std::string& path) {
    if (!j.is_string()) bad_field(path, "expected a check name string");
    const std::string s = j.get<std::string>();
    for (Check c : {Check::gauge, Check::transport, Check::oracle, Check::common_basis,
                    Check::recombination})
        if (s == check_name(c)) return c;
    bad_field(path, "unknown check '" + s + "'");
}

}  // namespace detail

// Parse scenario text to JSON. Syntax errors surface as ParseError with the
// line and column of the first offending byte.
inline json parse_scenario_text(const std::string& text, const std::string& name = "scenario") {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 1, column = 1;
        detail::locate(text, e.byte > 0 ? e.byte - 1 : 0, line, column);
        throw ParseError(name + ": malformed JSON at line " + std::to_string(line) +
                         ", column " + std::to_string(column));
    }
}

// Materialize a scenario from its JSON description. Parameter leaves resolve
// against the file's `parameters` map, with `opts.parameter_overrides` taking
// precedence.
inline Scenario build_scenario(const json& root, const BuildOptions& opts = {}) {
    if (!root.is_object()) detail::bad_field("scenario", "top level must be an object");

    detail::Params params;
    if (root.contains("parameters")) {
        const json& p = root["parameters"];
        if (!p.is_object()) detail::bad_field("parameters", "expected an object");
        for (auto it = p.begin(); it != p.end(); ++it) {
            if (!it.value().is_number())
                detail::bad_field("parameters." + it.key(), "expected a number");
            params[it.key()] = it.value().get<double>();
        }
    }
    for (const auto& [k, v] : opts.parameter_overrides) params[k] = v;

    std::string name = opts.default_name;
    if (root.contains("name")) {
        if (!root["name"].is_string()) detail::bad_field("name", "expected a string");
        name = root["name"].get<std::string>();
    }
    if (name.empty()) name = "scenario";

    const json& jd = detail::field(root, "system_dim", "scenario");
    if (!jd.is_number_integer() || jd.get<int>() < 2)
        detail::bad_field("system_dim", "expected an integer >= 2");
    const int dim = jd.get<int>();

    double spu = 1000.0;
    if (root.contains("steps_per_unit_time"))
        spu = detail::resolve_number(root["steps_per_unit_time"], params, "steps_per_unit_time");
    if (opts.steps_per_unit_time) spu = *opts.steps_per_unit_time;
    if (!(spu > 0.0)) detail::bad_field("steps_per_unit_time", "must be positive");

    Tolerances tol;
    if (root.contains("tolerances")) {
        const json& t = root["tolerances"];
        if (!t.is_object()) detail::bad_field("tolerances", "expected an object");
        if (t.contains("phase"))
            tol.phase = detail::resolve_number(t["phase"], params, "tolerances.phase");
        if (t.contains("transport"))
            tol.transport = detail::resolve_number(t["transport"], params, "tolerances.transport");
        if (t.contains("trace"))
            tol.trace = detail::resolve_number(t["trace"], params, "tolerances.trace");
    }
    if (opts.tol_phase) tol.phase = *opts.tol_phase;

    std::uint64_t seed = 12345;
    if (root.contains("seed")) {
        const json& s = root["seed"];
        if (!s.is_number_unsigned() && !s.is_number_integer())
            detail::bad_field("seed", "expected an integer");
        seed = s.get<std::uint64_t>();
    }
    if (opts.seed) seed = *opts.seed;

    double gauge_amplitude = 0.1;
    if (root.contains("gauge_amplitude")) {
        gauge_amplitude =
            detail::resolve_number(root["gauge_amplitude"], params, "gauge_amplitude");
        if (!(gauge_amplitude >= 0.0)) detail::bad_field("gauge_amplitude", "must be >= 0");
    }
    int oracle_dim_cap = kDefaultLiftCap;
    if (root.contains("oracle_dim_cap")) {
        const json& c = root["oracle_dim_cap"];
        if (!c.is_number_integer() || c.get<int>() < 1)
            detail::bad_field("oracle_dim_cap", "expected a positive integer");
        oracle_dim_cap = c.get<int>();
    }

    const json& comps = detail::field(root, "components", "scenario");
    if (!comps.is_array() || comps.empty())
        detail::bad_field("components", "expected a nonempty array");
    std::vector<double> weights;
    std::vector<DensityOperator> members;
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const std::string cp = "components[" + std::to_string(k) + "]";
        const json& c = comps[k];
        if (!c.is_object()) detail::bad_field(cp, "expected an object");
        const double w =
            detail::resolve_number(detail::field(c, "weight", cp), params, cp + ".weight");
        if (!(w > 0.0) || w > 1.0 + kTraceTol) detail::bad_field(cp + ".weight", "outside (0, 1]");
        const ComplexMatrix m =
            detail::resolve_density(detail::field(c, "density", cp), dim, params, cp + ".density");
        weights.push_back(w);
        try {
            members.emplace_back(m);
        } catch (const Error& e) {
            detail::bad_field(cp + ".density", e.what());
        }
    }

    bool shared_path = false;
    if (root.contains("shared")) {
        if (!root["shared"].is_boolean()) detail::bad_field("shared", "expected a boolean");
        shared_path = root["shared"].get<bool>();
    }
    const json& jpaths = detail::field(root, "paths", "scenario");
    if (!jpaths.is_array() || jpaths.empty())
        detail::bad_field("paths", "expected a nonempty array");
    const std::size_t expected = shared_path ? 1 : comps.size();
    if (jpaths.size() != expected)
        detail::bad_field("paths", "expected " + std::to_string(expected) + " entries, got " +
                                       std::to_string(jpaths.size()));
    std::vector<UnitaryPath> paths;
    for (std::size_t i = 0; i < jpaths.size(); ++i)
        paths.push_back(detail::resolve_path(jpaths[i], dim, spu, params,
                                             "paths[" + std::to_string(i) + "]"));
    if (shared_path) paths.assign(comps.size(), paths.front());

    Scenario sc(
        [&]() -> Decomposition {
            try {
                return Decomposition(std::move(weights), std::move(members));
            } catch (const Error& e) {
                detail::bad_field("components", e.what());
            }
        }(),
        std::move(paths));
    sc.name = std::move(name);
    sc.shared_path = shared_path;
    sc.steps_per_unit_time = spu;
    sc.tol = tol;
    sc.seed = seed;
    sc.gauge_amplitude = gauge_amplitude;
    sc.oracle_dim_cap = oracle_dim_cap;

    if (root.contains("checks")) {
        const json& jc = root["checks"];
        if (!jc.is_array()) detail::bad_field("checks", "expected an array");
        sc.checks_explicit = true;
        std::set<int> seen;
        for (std::size_t i = 0; i < jc.size(); ++i) {
            const Check c = detail::resolve_check(jc[i], "checks[" + std::to_string(i) + "]");
            if (seen.insert(static_cast<int>(c)).second) sc.checks.push_back(c);
        }
    }
    return sc;
}

// ---------------- report generation ----------------

struct ScenarioReport {
    std::vector<std::string> lines;
    bool passed = true;

    std::string text() const {
        std::string out;
        for (const auto& l : lines) {
            out += l;
            out += '\n';
        }
        return out;
    }
};

namespace detail {

inline bool cp_shaped(const Decomposition& d) {
    for (int k = 1; k < d.size(); ++k)
        if (max_abs(d.component(k).matrix() - d.component(0).matrix()) > 1e-12) return false;
    return true;
}

inline bool pairwise_commuting(const Decomposition& d, double tol) {
    for (int i = 0; i < d.size(); ++i)
        for (int j = i + 1; j < d.size(); ++j) {
            const ComplexMatrix& a = d.component(i).matrix();
            const ComplexMatrix& b = d.component(j).matrix();
            if (max_abs(a * b - b * a) > tol) return false;
        }
    return true;
}

struct CheckLine {
    Check check;
    enum class Status { pass, fail, skip } status;
    std::string detail;
};

inline std::string render_check(const CheckLine& c) {
    const char* s = c.status == CheckLine::Status::pass   ? "pass"
                    : c.status == CheckLine::Status::fail ? "fail"
                                                          : "skip";
    return std::string("check,") + check_name(c.check) + "," + s + "," + c.detail;
}

}  // namespace detail

// Evaluate a scenario: headline phase functionals, per-branch quantities when
// the ensemble describes a channel acting on one state, transport residuals,
// the one-term attainability test, and the requested consistency checks.
inline ScenarioReport run_scenario(const Scenario& sc) {
    ScenarioReport rep;
    auto put = [&rep](const std::string& key, const std::string& val) {
        rep.lines.push_back(key + "," + val);
    };
    auto putd = [&put](const std::string& key, double v) { put(key, detail::fmt12(v)); };

    const Decomposition& d = sc.decomposition;
    DecompositionPath dp(d, sc.paths);

    put("scenario", sc.name);
    put("system_dim", std::to_string(d.dim()));
    put("components", std::to_string(d.size()));
    putd("duration", dp.path(0).duration());
    put("grid_nodes", std::to_string(dp.path(0).nodes()));

    bool relative_defined = true;
    double relative_phase = 0.0;
    try {
        const PhaseResult r = decomposition_relative_phase(dp);
        relative_phase = r.phase;
        putd("relative_phase", r.phase);
        putd("relative_magnitude", r.magnitude);
    } catch (const UndefinedPhase& e) {
        relative_defined = false;
        put("relative_phase", "UNDEFINED");
        putd("relative_magnitude", e.magnitude);
    }

    bool geometric_defined = true;
    double geometric_phase = 0.0;
    try {
        const PhaseResult g = decomposition_geometric_phase(dp);
        geometric_phase = g.phase;
        putd("geometric_phase", g.phase);
        putd("geometric_magnitude", g.magnitude);
    } catch (const UndefinedPhase& e) {
        geometric_defined = false;
        put("geometric_phase", "UNDEFINED");
        putd("geometric_magnitude", e.magnitude);
    }

    const bool cp = detail::cp_shaped(d);
    put("cp_shaped", cp ? "true" : "false");

    std::vector<double> branch_vis(d.size()), branch_geo(d.size());
    std::vector<bool> branch_defined(d.size(), true);
    for (int k = 0; k < d.size(); ++k) {
        branch_vis[k] = visibility(d.component(k), dp.path(k));
        try {
            branch_geo[k] = per_kraus_geometric_phase(d.component(k), dp.path(k)).phase;
        } catch (const UndefinedPhase&) {
            branch_defined[k] = false;
            branch_geo[k] = 0.0;
        }
        const std::string b = "branch_" + std::to_string(k);
        putd(b + "_visibility", branch_vis[k]);
        if (branch_defined[k])
            putd(b + "_geometric_phase", branch_geo[k]);
        else
            put(b + "_geometric_phase", "UNDEFINED");
        if (cp) {
            try {
                const PhaseResult kr = kraus_relative_phase(d.component(k), d.weight(k),
                                                            dp.path(k), dp.path(k).nodes() - 1);
                putd(b + "_amplitude", kr.magnitude);
                putd(b + "_relative_phase", kr.phase);
            } catch (const UndefinedPhase& e) {
                putd(b + "_amplitude", e.magnitude);
                put(b + "_relative_phase", "UNDEFINED");
            }
        }
    }

    const RealMatrix residuals = transport_residuals(dp);
    for (int k = 0; k < d.size(); ++k)
        putd("transport_residual_member_" + std::to_string(k), residuals.row(k).maxCoeff());
    putd("transport_residual_max", residuals.maxCoeff());

    {
        const auto [lhs, rhs] = one_term_obstruction(d);
        putd("one_term_sum", lhs);
        put("one_term", rhs - lhs <= 1e-12 ? "ATTAINABLE" : "OBSTRUCTED");
    }

    // Resolve which checks run. Defaults: everything applicable.
    std::vector<Check> checks = sc.checks;
    const bool common_applicable = sc.shared_path && detail::pairwise_commuting(d, 1e-10);
    if (!sc.checks_explicit) {
        checks = {Check::gauge, Check::transport, Check::oracle};
        if (common_applicable) checks.push_back(Check::common_basis);
        if (cp) checks.push_back(Check::recombination);
    }

    std::vector<detail::CheckLine> lines;
    for (Check c : checks) {
        detail::CheckLine cl{c, detail::CheckLine::Status::pass, ""};
        try {
            switch (c) {
                case Check::gauge: {
                    if (!geometric_defined) {
                        cl.status = detail::CheckLine::Status::skip;
                        cl.detail = "undefined_phase";
                        break;
                    }
                    Rng rng(sc.seed);
                    double worst = 0.0;
                    for (int trial = 0; trial < 3; ++trial) {
                        const auto profiles = random_gauge_profiles(d, dp.times(), rng,
                                                                    sc.gauge_amplitude);
                        const auto gauges = admissible_gauge(d, dp.times(), profiles);
                        const PhaseResult g2 =
                            decomposition_geometric_phase(gauge_compose(dp, gauges));
                        worst = std::max(worst, angle_distance(geometric_phase, g2.phase));
                    }
                    cl.detail = "max_shift," + detail::fmt12(worst);
                    if (worst > sc.tol.phase) cl.status = detail::CheckLine::Status::fail;
                    break;
                }
                case Check::transport: {
                    if (!relative_defined) {
                        cl.status = detail::CheckLine::Status::skip;
                        cl.detail = "undefined_phase";
                        break;
                    }
                    const DecompositionPath par = parallelize(dp);
                    const double after = transport_residuals(par).maxCoeff();
                    double gap = 0.0;
                    if (geometric_defined) {
                        const PhaseResult rel = decomposition_relative_phase(par);
                        gap = angle_distance(geometric_phase, rel.phase);
                    }
                    cl.detail = "residual," + detail::fmt12(after) + ",phase_gap," +
                                detail::fmt12(gap);
                    if (after > sc.tol.transport || gap > sc.tol.phase)
                        cl.status = detail::CheckLine::Status::fail;
                    break;
                }
                case Check::oracle: {
                    const long total = static_cast<long>(d.dim()) * d.size() * d.dim() * d.size();
                    if (total > sc.oracle_dim_cap) {
                        cl.status = detail::CheckLine::Status::skip;
                        cl.detail = "dimension_above_cap";
                        break;
                    }
                    if (!relative_defined) {
                        cl.status = detail::CheckLine::Status::skip;
                        cl.detail = "undefined_phase";
                        break;
                    }
                    const PhaseResult big = enlarged_relative_phase(d, dp);
                    const PhaseResult pure =
                        lift_overlap_phase(d, dp, dp.path(0).nodes() - 1, sc.oracle_dim_cap);
                    const double gap =
                        std::max(angle_distance(relative_phase, big.phase),
                                 angle_distance(relative_phase, pure.phase));
                    cl.detail = "max_gap," + detail::fmt12(gap);
                    if (gap > 1e-10) cl.status = detail::CheckLine::Status::fail;
                    break;
                }
                case Check::common_basis: {
                    if (!sc.shared_path || !common_applicable) {
                        cl.status = detail::CheckLine::Status::skip;
                        cl.detail = sc.shared_path ? "members_do_not_commute" : "paths_differ";
                        break;
                    }
                    if (!geometric_defined) {
                        cl.status = detail::CheckLine::Status::skip;
                        cl.detail = "undefined_phase";
                        break;
                    }
                    const PhaseResult mixed = mixed_geometric_phase(mix(d), dp.path(0));
                    const double gap = angle_distance(geometric_phase, mixed.phase);
                    cl.detail = "mixture_gap," + detail::fmt12(gap);
                    if (gap > sc.tol.phase) cl.status = detail::CheckLine::Status::fail;
                    break;
                }
                case Check::recombination: {
                    if (!cp) {
                        cl.status = detail::CheckLine::Status::skip;
                        cl.detail = "not_cp_shaped";
                        break;
                    }
                    if (!geometric_defined) {
                        cl.status = detail::CheckLine::Status::skip;
                        cl.detail = "undefined_phase";
                        break;
                    }
                    const PhaseResult rec = recombine(d.weights(), branch_vis, branch_geo);
                    const double gap = angle_distance(geometric_phase, rec.phase);
                    cl.detail = "recombined_gap," + detail::fmt12(gap);
                    if (gap > sc.tol.phase) cl.status = detail::CheckLine::Status::fail;
                    break;
                }
            }
        } catch (const UndefinedPhase&) {
            cl.status = detail::CheckLine::Status::skip;
            cl.detail = "undefined_phase";
        } catch (const Error& e) {
            cl.status = detail::CheckLine::Status::fail;
            cl.detail = std::string("error,") + e.what();
        }
        if (cl.status == detail::CheckLine::Status::fail) rep.passed = false;
        lines.push_back(cl);
    }
    for (const auto& cl : lines) rep.lines.push_back(detail::render_check(cl));
    put("passed", rep.passed ? "true" : "false");
    return rep;
}

// ---------------- sweeps ----------------

struct SweepSpec {
    std::string parameter;
    double from = 0.0;
    double to = 1.0;
    int samples = 2;
    bool unwrap = false;
};

// Rebuild the scenario at each parameter value and tabulate the phase
// functionals. Rows where an interference sum vanishes carry UNDEFINED in the
// phase column; the sweep itself still succeeds.
inline std::string run_sweep(const json& root, const SweepSpec& spec,
                             const BuildOptions& base_opts = {}) {
    if (spec.samples < 2) throw ValidationError("sweep: needs at least 2 samples");
    if (spec.parameter.empty()) throw ValidationError("sweep: parameter name is empty");
    if (!root.is_object() || !root.contains("parameters") ||
        !root["parameters"].is_object() || !root["parameters"].contains(spec.parameter))
        throw ValidationError("sweep: parameter '" + spec.parameter +
                              "' is not declared in the scenario");

    std::string out;
    bool header_done = false;
    std::vector<double> prev_phase(2, 0.0);
    std::vector<bool> prev_set(2, false);

    for (int i = 0; i < spec.samples; ++i) {
        const double t = static_cast<double>(i) / (spec.samples - 1);
        const double value = spec.from + t * (spec.to - spec.from);
        BuildOptions opts = base_opts;
        opts.parameter_overrides[spec.parameter] = value;
        const Scenario sc = build_scenario(root, opts);
        DecompositionPath dp(sc.decomposition, sc.paths);

        if (!header_done) {
            out += spec.parameter +
                   ",relative_phase,relative_magnitude,geometric_phase,geometric_magnitude";
            for (int k = 0; k < sc.decomposition.size(); ++k)
                out += ",visibility_" + std::to_string(k);
            out += '\n';
            header_done = true;
        }

        // column index 0: relative, 1: geometric
        auto phase_cell = [&](int col, auto&& eval) -> std::string {
            try {
                const PhaseResult r = eval();
                double phi = r.phase;
                if (spec.unwrap && prev_set[col])
                    phi = prev_phase[col] + std::remainder(phi - prev_phase[col], 2.0 * kPi);
                prev_phase[col] = phi;
                prev_set[col] = true;
                return detail::fmt12(phi) + "," + detail::fmt12(r.magnitude);
            } catch (const UndefinedPhase& e) {
                return "UNDEFINED," + detail::fmt12(e.magnitude);
            }
        };

        out += detail::fmt12(value);
        out += ',';
        out += phase_cell(0, [&] { return decomposition_relative_phase(dp); });
        out += ',';
        out += phase_cell(1, [&] { return decomposition_geometric_phase(dp); });
        for (int k = 0; k < sc.decomposition.size(); ++k)
            out += "," + detail::fmt12(visibility(sc.decomposition.component(k), dp.path(k)));
        out += '\n';
    }
    return out;
}

}  // namespace decphase
