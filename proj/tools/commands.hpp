#pragma once

// Implementation of the urnctl verbs. Each command returns the process exit
// code: 0 success, 1 a check failed, 2 usage, configuration or I/O error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "urn/io.hpp"
#include "urn/urn.hpp"

namespace urn::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2 };

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    bool quiet = false;
};

struct SimulateOptions {
    std::optional<int> n_runs;
    std::optional<std::int64_t> n_steps;
    std::optional<std::int64_t> snapshot_every;
    double hit_radius = 0.05;
};

struct FixedPointsOptions {
    std::optional<int> n_starts;
    bool verify_example1 = false;
    bool contraction_check = false;
};

struct FlowOptions {
    std::optional<int> n_starts;
    std::optional<double> t_end;
    std::optional<double> h;
};

namespace detail {

inline std::filesystem::path prepare_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
    return dir;
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write '" + path.string() + "'");
    writer(os);
    os.flush();
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

inline io::ExperimentConfig load(const CommonOptions& common) {
    if (common.config_path.empty()) throw io::ConfigError("--config <path> is required");
    auto cfg = io::load_config(common.config_path);
    if (common.alpha) cfg.model.alpha = *common.alpha;
    return cfg;
}

inline std::string point_string(const SimplexPoint& x, int precision = 6) {
    std::ostringstream os;
    os << std::setprecision(precision) << '(';
    for (std::size_t k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
    os << ')';
    return os.str();
}

inline void print_fixed_points(std::ostream& os, const ModelParams& p, const SearchResult& s) {
    const auto orbits = assign_orbits(s.records, p);
    os << "fixed points found: " << s.records.size() << " (starts " << s.n_starts << ", abandoned "
       << s.n_abandoned << ", failed " << s.n_failed << ")\n";
    for (std::size_t k = 0; k < s.records.size(); ++k) {
        const auto& r = s.records[k];
        os << "  [" << k << "] orbit " << orbits[k] << "  " << point_string(r.point) << "  rho "
           << std::setprecision(6) << r.spectral_radius << "  " << to_string(r.classification) << "  hits "
           << r.basin_hits << "  residual " << std::scientific << std::setprecision(2) << r.residual
           << std::defaultfloat << '\n';
    }
}

inline void print_contraction(std::ostream& os, const ModelParams& p) {
    os << std::setprecision(12) << "l1_norm_bound " << l1_norm_bound(p) << "  (threshold |alpha| < "
       << contraction_alpha_threshold(p) << ")  contraction regime: "
       << (is_contraction_regime(p) ? "yes" : "no") << '\n';
}

}  // namespace detail

inline int cmd_fixed_points(const CommonOptions& common, const FixedPointsOptions& opt, std::ostream& out) {
    if (opt.verify_example1) {
        const auto report = example1::verify(common.alpha.value_or(example1::alpha()));
        if (!common.quiet) out << "alpha " << std::setprecision(17) << report.alpha << '\n' << report.summary();
        if (common.quiet) out << (report.passed() ? "all checks pass" : "some checks failed") << '\n';
        return report.passed() ? kOk : kCheckFailed;
    }

    auto cfg = detail::load(common);
    if (common.seed) cfg.fp.seed = *common.seed;
    if (opt.n_starts) cfg.fp.n_starts = *opt.n_starts;
    if (cfg.fp.n_starts < 1) throw io::ConfigError("--n-starts must be >= 1");
    const std::string hash = io::config_hash(cfg);
    const ModelParams& p = cfg.model;

    if (opt.contraction_check) detail::print_contraction(out, p);

    const auto result = multi_start_search(p, cfg.fp.n_starts, cfg.fp.seed);
    const auto dir = detail::prepare_dir(common.out_dir);
    detail::write_file(dir / "fixed_points.json",
                       [&](std::ostream& os) { os << io::fixed_point_report(p, result, hash).dump(2) << '\n'; });
    if (!common.quiet) {
        detail::print_fixed_points(out, p, result);
        out << "wrote " << (dir / "fixed_points.json").string() << '\n';
    }
    return kOk;
}

inline int cmd_simulate(const CommonOptions& common, const SimulateOptions& opt, std::ostream& out) {
    auto cfg = detail::load(common);
    if (common.seed) cfg.sim.master_seed = *common.seed;
    if (opt.n_runs) cfg.sim.n_runs = *opt.n_runs;
    if (opt.n_steps) cfg.sim.n_steps = *opt.n_steps;
    if (opt.snapshot_every) cfg.sim.snapshot_every = *opt.snapshot_every;
    if (cfg.sim.n_runs < 1) throw io::ConfigError("--n-runs must be >= 1");
    if (cfg.sim.n_steps < 0) throw io::ConfigError("--n-steps must be >= 0");
    if (cfg.sim.snapshot_every < 0) throw io::ConfigError("--snapshot-every must be >= 0");
    const std::string hash = io::config_hash(cfg);
    const ModelParams& p = cfg.model;

    const auto fixed = multi_start_search(p, cfg.fp.n_starts, cfg.fp.seed);
    const auto schedule = cfg.sim.snapshot_every > 0 ? SnapshotSchedule::linear(cfg.sim.snapshot_every)
                                                     : SnapshotSchedule::endpoints();
    const auto runs = run_batch(p, cfg.sim.n_runs, cfg.sim.n_steps, cfg.sim.master_seed, schedule);

    std::vector<std::int64_t> hits(fixed.records.size(), 0);
    std::int64_t other = 0;
    for (const auto& r : runs) {
        const auto [id, dist] = nearest_fixed_point(proportions(r.final_state), fixed.records);
        if (id >= 0 && dist < opt.hit_radius)
            ++hits[static_cast<std::size_t>(id)];
        else
            ++other;
    }

    const auto dir = detail::prepare_dir(common.out_dir);
    detail::write_file(dir / "batch.csv",
                       [&](std::ostream& os) { io::write_batch_csv(os, runs, p, fixed.records, hash); });
    detail::write_file(dir / "fixed_points.json",
                       [&](std::ostream& os) { os << io::fixed_point_report(p, fixed, hash).dump(2) << '\n'; });
    if (cfg.sim.snapshot_every > 0) {
        const auto snap_dir = detail::prepare_dir(dir / "snapshots");
        for (std::size_t k = 0; k < runs.size(); ++k)
            detail::write_file(snap_dir / ("run_" + std::to_string(k) + ".csv"),
                               [&](std::ostream& os) { io::write_snapshot_csv(os, runs[k], hash); });
    }

    if (!common.quiet) {
        out << "runs " << runs.size() << ", steps " << cfg.sim.n_steps << ", alpha " << std::setprecision(12)
            << p.alpha << '\n';
        out << "hit counts (l_inf < " << opt.hit_radius << " at the final step):\n";
        for (std::size_t k = 0; k < fixed.records.size(); ++k)
            out << "  [" << k << "] " << detail::point_string(fixed.records[k].point) << "  "
                << to_string(fixed.records[k].classification) << "  hits " << hits[k] << '\n';
        out << "  other  hits " << other << '\n';
        out << "wrote " << (dir / "batch.csv").string() << '\n';
    }
    return kOk;
}

inline int cmd_flow(const CommonOptions& common, const FlowOptions& opt, std::ostream& out) {
    auto cfg = detail::load(common);
    if (common.seed) cfg.flow.seed = *common.seed;
    if (opt.n_starts) cfg.flow.n_starts = *opt.n_starts;
    if (opt.t_end) cfg.flow.t_end = *opt.t_end;
    if (opt.h) cfg.flow.h = *opt.h;
    if (!(cfg.flow.h > 0.0) || !(cfg.flow.t_end >= 0.0) || cfg.flow.n_starts < 0)
        throw io::ConfigError("flow: need h > 0, t_end >= 0 and n_starts >= 0");
    const std::string hash = io::config_hash(cfg);
    const ModelParams& p = cfg.model;

    std::vector<SimplexPoint> starts;
    for (const auto& s : cfg.flow.starts) starts.emplace_back(p.d, p.c, s);
    for (int k = 0; k < cfg.flow.n_starts; ++k) {
        Rng rng = make_stream(cfg.flow.seed, static_cast<std::uint64_t>(k));
        starts.push_back(random_simplex_point(p.d, p.c, rng));
    }
    if (starts.empty()) throw io::ConfigError("flow: no starting points (set flow.starts or flow.n_starts)");

    IntegrateOptions iopt;
    iopt.store_every = cfg.flow.store_every;
    std::vector<Trajectory> trajs(starts.size());
    urn::detail::parallel_for(trajs.size(),
                              [&](std::size_t k) { trajs[k] = integrate(starts[k], p, cfg.flow.t_end, cfg.flow.h, iopt); });

    const auto fixed = multi_start_search(p, cfg.fp.n_starts, cfg.fp.seed);
    const auto dir = detail::prepare_dir(std::filesystem::path(common.out_dir) / "flow");
    int violations = 0;
    double worst_inc = -std::numeric_limits<double>::infinity();
    double worst_endpoint = 0.0;
    for (std::size_t k = 0; k < trajs.size(); ++k) {
        violations += trajs[k].lyapunov_increases;
        worst_inc = std::max(worst_inc, trajs[k].max_lyapunov_increase);
        const auto [id, dist] = nearest_fixed_point(trajs[k].states.back(), fixed.records);
        worst_endpoint = std::max(worst_endpoint, id < 0 ? INFINITY : dist);
        detail::write_file(dir / ("traj_" + std::to_string(k) + ".csv"),
                           [&](std::ostream& os) { io::write_trajectory_csv(os, trajs[k], p, hash); });
    }
    detail::write_file(dir / "fixed_points.json",
                       [&](std::ostream& os) { os << io::fixed_point_report(p, fixed, hash).dump(2) << '\n'; });

    if (!common.quiet) {
        out << "trajectories " << trajs.size() << ", t_end " << cfg.flow.t_end << ", h " << cfg.flow.h << '\n';
        out << "lyapunov monotonicity violations: " << violations << " (largest per-step change "
            << std::scientific << std::setprecision(3) << worst_inc << ")\n";
        out << "largest endpoint distance to a computed fixed point: " << worst_endpoint << std::defaultfloat
            << '\n';
        out << "wrote " << trajs.size() << " trajectory files to " << dir.string() << '\n';
    } else {
        out << "lyapunov monotonicity violations: " << violations << '\n';
    }
    return violations == 0 ? kOk : kCheckFailed;
}

inline int cmd_sweep(const CommonOptions& common, std::optional<int> n_starts, std::ostream& out) {
    auto cfg = detail::load(common);
    if (common.seed) cfg.fp.seed = *common.seed;
    if (n_starts) cfg.fp.n_starts = *n_starts;
    if (cfg.sweep.alpha_values.empty()) throw io::ConfigError("sweep: sweep.alpha_values is empty");
    const std::string hash = io::config_hash(cfg);

    io::json reports = io::json::array();
    std::ostringstream csv;
    io::write_hash_line(csv, hash);
    csv << "alpha,l1_norm_bound,contraction_regime,n_fixed_points,n_stable,n_unstable,n_marginal,abandoned_starts\n";
    for (double a : cfg.sweep.alpha_values) {
        ModelParams p = cfg.model;
        p.alpha = a;
        const auto res = multi_start_search(p, cfg.fp.n_starts, cfg.fp.seed);
        int stable = 0, unstable = 0, marginal = 0;
        for (const auto& r : res.records) {
            stable += r.classification == Stability::stable;
            unstable += r.classification == Stability::unstable;
            marginal += r.classification == Stability::marginal;
        }
        csv << io::format_double(a) << ',' << io::format_double(l1_norm_bound(p)) << ','
            << (is_contraction_regime(p) ? 1 : 0) << ',' << res.records.size() << ',' << stable << ',' << unstable
            << ',' << marginal << ',' << res.n_abandoned << '\n';
        reports.push_back(io::fixed_point_report(p, res, hash));
        if (!common.quiet)
            out << "alpha " << std::setprecision(8) << a << ": " << res.records.size() << " fixed points (" << stable
                << " stable, " << unstable << " unstable, " << marginal << " marginal)\n";
    }
    const auto dir = detail::prepare_dir(common.out_dir);
    detail::write_file(dir / "sweep.csv", [&](std::ostream& os) { os << csv.str(); });
    detail::write_file(dir / "sweep.json", [&](std::ostream& os) { os << reports.dump(2) << '\n'; });
    if (!common.quiet) out << "wrote " << (dir / "sweep.csv").string() << '\n';
    return kOk;
}

}  // namespace urn::cli
