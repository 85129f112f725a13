#pragma once

// Experiment configuration (JSON) and the CSV / JSON output files.
//
// Every CSV starts with one comment line `# config_hash=<16 hex digits>`
// followed by a single header line. State columns are named x_<i>_<u> with
// one-based colour i and vertex u, in colour-major order.

#include <json.hpp>

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "urn/dynamics.hpp"
#include "urn/fixed_points.hpp"
#include "urn/model.hpp"
#include "urn/urn_sim.hpp"

namespace urn::io {

using nlohmann::json;

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf.data(), ptr);
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// Configuration

struct SimBlock {
    std::int64_t n_steps = 100000;
    int n_runs = 100;
    std::uint64_t master_seed = 1;
    std::int64_t snapshot_every = 0;  // 0: no snapshot files
};

struct FlowBlock {
    double t_end = 50.0;
    double h = 0.01;
    int n_starts = 10;
    std::uint64_t seed = 1;
    int store_every = 10;
    std::vector<std::vector<double>> starts;  // explicit starts, used before random ones
};

struct FpBlock {
    int n_starts = 200;
    std::uint64_t seed = 1;
};

struct SweepBlock {
    std::vector<double> alpha_values;
};

struct ExperimentConfig {
    ModelParams model;
    SimBlock sim;
    FlowBlock flow;
    FpBlock fp;
    SweepBlock sweep;
};

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

inline const json& block(const json& j, const char* key) {
    static const json empty = json::object();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_object()) throw ConfigError(std::string("config: '") + key + "' must be an object");
    return j.at(key);
}

}  // namespace detail

/// Model block: keys d, c, alpha, phi ("logistic") and initial_balls, a
/// d x c integer matrix with one row per vertex and one column per colour.
/// initial_balls may be omitted, meaning one ball of every colour per urn.
inline ModelParams model_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    for (const char* key : {"d", "c", "alpha"})
        if (!j.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
    ModelParams p;
    p.d = detail::get_or<int>(j, "d", 0);
    p.c = detail::get_or<int>(j, "c", 0);
    p.alpha = detail::get_or<double>(j, "alpha", 0.0);
    const auto phi = detail::get_or<std::string>(j, "phi", "logistic");
    if (phi != "logistic") throw ConfigError("config: unknown phi '" + phi + "' (only \"logistic\" is built in)");
    p.phi = ReinforcementFunction::logistic();
    if (p.d < 2 || p.c < 2) throw ConfigError(validate_params(p).message());

    if (j.contains("initial_balls")) {
        const auto& rows = j.at("initial_balls");
        if (!rows.is_array() || rows.size() != static_cast<std::size_t>(p.d))
            throw ConfigError("config: initial_balls must have d rows (one per vertex)");
        p.initial_balls.assign(p.dim(), 0);
        for (int u = 0; u < p.d; ++u) {
            const auto& row = rows.at(static_cast<std::size_t>(u));
            if (!row.is_array() || row.size() != static_cast<std::size_t>(p.c))
                throw ConfigError("config: initial_balls row " + std::to_string(u + 1) + " must have c entries");
            for (int i = 0; i < p.c; ++i) {
                const auto& v = row.at(static_cast<std::size_t>(i));
                if (!v.is_number_integer()) throw ConfigError("config: initial_balls entries must be integers");
                p.initial_balls[p.index(u, i)] = v.get<std::int64_t>();
            }
        }
    } else {
        p.initial_balls.assign(p.dim(), 1);
    }
    const auto report = validate_params(p);
    if (!report.ok()) throw ConfigError("config: " + report.message());
    return p;
}

inline json model_to_json(const ModelParams& p) {
    json rows = json::array();
    for (int u = 0; u < p.d; ++u) {
        json row = json::array();
        for (int i = 0; i < p.c; ++i) row.push_back(p.initial_balls[p.index(u, i)]);
        rows.push_back(row);
    }
    return {{"d", p.d}, {"c", p.c}, {"alpha", p.alpha}, {"phi", p.phi.name()}, {"initial_balls", rows}};
}

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.model = model_from_json(j);

    const json& sim = detail::block(j, "sim");
    cfg.sim.n_steps = detail::get_or(sim, "n_steps", cfg.sim.n_steps);
    cfg.sim.n_runs = detail::get_or(sim, "n_runs", cfg.sim.n_runs);
    cfg.sim.master_seed = detail::get_or(sim, "master_seed", cfg.sim.master_seed);
    cfg.sim.snapshot_every = detail::get_or(sim, "snapshot_every", cfg.sim.snapshot_every);

    const json& flow = detail::block(j, "flow");
    cfg.flow.t_end = detail::get_or(flow, "t_end", cfg.flow.t_end);
    cfg.flow.h = detail::get_or(flow, "h", cfg.flow.h);
    cfg.flow.n_starts = detail::get_or(flow, "n_starts", cfg.flow.n_starts);
    cfg.flow.seed = detail::get_or(flow, "seed", cfg.flow.seed);
    cfg.flow.store_every = detail::get_or(flow, "store_every", cfg.flow.store_every);
    cfg.flow.starts = detail::get_or(flow, "starts", cfg.flow.starts);

    const json& fp = detail::block(j, "fp");
    cfg.fp.n_starts = detail::get_or(fp, "n_starts", cfg.fp.n_starts);
    cfg.fp.seed = detail::get_or(fp, "seed", cfg.fp.seed);

    const json& sweep = detail::block(j, "sweep");
    cfg.sweep.alpha_values = detail::get_or(sweep, "alpha_values", cfg.sweep.alpha_values);

    if (cfg.sim.n_steps < 0) throw ConfigError("config: sim.n_steps must be >= 0");
    if (cfg.sim.n_runs < 1) throw ConfigError("config: sim.n_runs must be >= 1");
    if (cfg.sim.snapshot_every < 0) throw ConfigError("config: sim.snapshot_every must be >= 0");
    if (!(cfg.flow.h > 0.0)) throw ConfigError("config: flow.h must be positive");
    if (!(cfg.flow.t_end >= 0.0)) throw ConfigError("config: flow.t_end must be >= 0");
    if (cfg.flow.n_starts < 0) throw ConfigError("config: flow.n_starts must be >= 0");
    if (cfg.flow.store_every < 1) throw ConfigError("config: flow.store_every must be >= 1");
    for (const auto& s : cfg.flow.starts)
        if (s.size() != cfg.model.dim()) throw ConfigError("config: every flow start needs d*c coordinates");
    if (cfg.fp.n_starts < 1) throw ConfigError("config: fp.n_starts must be >= 1");
    return cfg;
}

/// The configuration with every default filled in.
inline json config_to_json(const ExperimentConfig& cfg) {
    json j = model_to_json(cfg.model);
    j["sim"] = {{"n_steps", cfg.sim.n_steps},
                {"n_runs", cfg.sim.n_runs},
                {"master_seed", cfg.sim.master_seed},
                {"snapshot_every", cfg.sim.snapshot_every}};
    j["flow"] = {{"t_end", cfg.flow.t_end}, {"h", cfg.flow.h},           {"n_starts", cfg.flow.n_starts},
                 {"seed", cfg.flow.seed},   {"store_every", cfg.flow.store_every}, {"starts", cfg.flow.starts}};
    j["fp"] = {{"n_starts", cfg.fp.n_starts}, {"seed", cfg.fp.seed}};
    j["sweep"] = {{"alpha_values", cfg.sweep.alpha_values}};
    return j;
}

/// Hash of the resolved configuration (keys sorted, defaults filled in).
inline std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a64(config_to_json(cfg).dump())); }

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// CSV

inline std::vector<std::string> state_columns(int d, int c) {
    std::vector<std::string> cols;
    for (int i = 0; i < c; ++i)
        for (int u = 0; u < d; ++u) cols.push_back("x_" + std::to_string(i + 1) + "_" + std::to_string(u + 1));
    return cols;
}

inline void write_hash_line(std::ostream& os, const std::string& hash) { os << "# config_hash=" << hash << '\n'; }

inline void write_header(std::ostream& os, const std::vector<std::string>& cols) {
    for (std::size_t k = 0; k < cols.size(); ++k) os << (k ? "," : "") << cols[k];
    os << '\n';
}

/// Columns t, x_<i>_<u>..., lyapunov.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const ModelParams& p,
                                 const std::string& hash) {
    write_hash_line(os, hash);
    auto cols = state_columns(p.d, p.c);
    cols.insert(cols.begin(), "t");
    cols.push_back("lyapunov");
    write_header(os, cols);
    const HopfieldSystem sys = build_hopfield(p);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        os << format_double(traj.times[k]);
        for (double v : traj.states[k].values()) os << ',' << format_double(v);
        const double l = k < traj.lyapunov.size() ? traj.lyapunov[k] : lyapunov_on_simplex(traj.states[k].values(), p, sys);
        os << ',' << format_double(l) << '\n';
    }
}

/// Snapshots of one simulated run in the trajectory schema; t holds the step n.
inline void write_snapshot_csv(std::ostream& os, const SimRun& r, const std::string& hash) {
    const ModelParams& p = r.params;
    write_hash_line(os, hash);
    auto cols = state_columns(p.d, p.c);
    cols.insert(cols.begin(), "t");
    cols.push_back("lyapunov");
    write_header(os, cols);
    const HopfieldSystem sys = build_hopfield(p);
    for (const auto& s : r.snapshots) {
        const SimplexPoint x = s.proportions();
        os << s.n;
        for (double v : x.values()) os << ',' << format_double(v);
        os << ',' << format_double(lyapunov_on_simplex(x.values(), p, sys)) << '\n';
    }
}

/// One row per run: seed, n_steps, final state, nearest_fixed_point_id
/// (-1 when no fixed points are known), final_distance (l_inf).
inline void write_batch_csv(std::ostream& os, const std::vector<SimRun>& runs, const ModelParams& p,
                            const std::vector<FixedPointRecord>& fixed_points, const std::string& hash) {
    write_hash_line(os, hash);
    auto cols = state_columns(p.d, p.c);
    cols.insert(cols.begin(), {"seed", "n_steps"});
    cols.push_back("nearest_fixed_point_id");
    cols.push_back("final_distance");
    write_header(os, cols);
    for (const auto& r : runs) {
        const SimplexPoint x = proportions(r.final_state);
        const auto [id, dist] = nearest_fixed_point(x, fixed_points);
        os << r.seed << ',' << r.final_state.step;
        for (double v : x.values()) os << ',' << format_double(v);
        os << ',' << id << ',' << (id < 0 ? std::string("nan") : format_double(dist)) << '\n';
    }
}

struct CsvTable {
    std::vector<std::string> comments;  // without the leading '#'
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return k;
        throw std::out_of_range("csv: no column '" + name + "'");
    }
};

/// Reads files written by the writers above.
inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            t.comments.push_back(line.substr(1));
            continue;
        }
        if (t.header.empty()) {
            t.header = split(line);
            continue;
        }
        std::vector<double> row;
        for (const auto& cell : split(line)) row.push_back(std::stod(cell));
        if (row.size() != t.header.size()) throw std::runtime_error("csv: row width does not match header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// JSON fixed-point report

inline json fixed_point_json(const FixedPointRecord& r, int id, int orbit_id) {
    return {{"id", id},
            {"point", std::vector<double>(r.point.values().begin(), r.point.values().end())},
            {"residual", r.residual},
            {"spectral_radius", r.spectral_radius},
            {"classification", to_string(r.classification)},
            {"orbit_id", orbit_id},
            {"basin_hits", r.basin_hits}};
}

inline json fixed_point_report(const ModelParams& p, const SearchResult& s, const std::string& hash) {
    const auto orbits = assign_orbits(s.records, p);
    json pts = json::array();
    for (std::size_t k = 0; k < s.records.size(); ++k)
        pts.push_back(fixed_point_json(s.records[k], static_cast<int>(k), orbits[k]));
    return {{"config_hash", hash},
            {"d", p.d},
            {"c", p.c},
            {"alpha", p.alpha},
            {"l1_norm_bound", l1_norm_bound(p)},
            {"contraction_regime", is_contraction_regime(p)},
            {"n_starts", s.n_starts},
            {"abandoned_starts", s.n_abandoned},
            {"failed_starts", s.n_failed},
            {"fixed_points", pts}};
}

/// Reads the points back from a report written by fixed_point_report.
inline std::vector<SimplexPoint> fixed_points_from_report(const json& report) {
    const int d = report.at("d").get<int>();
    const int c = report.at("c").get<int>();
    std::vector<SimplexPoint> out;
    for (const auto& fp : report.at("fixed_points")) out.emplace_back(d, c, fp.at("point").get<std::vector<double>>());
    return out;
}

}  // namespace urn::io
