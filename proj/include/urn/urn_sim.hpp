#pragma once

// Exact simulation of the interacting urn process on K_d and the pieces of
// its stochastic-approximation decomposition
//   X(n+1) - X(n) = gamma_n (F(X(n)) + U(n)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "urn/dynamics.hpp"
#include "urn/model.hpp"
#include "urn/parallel.hpp"
#include "urn/pi_map.hpp"
#include "urn/random.hpp"

namespace urn {

/// Ball counts B_u^i(n), colour-major like every state vector, at time n.
struct UrnState {
    int d = 0;
    int c = 0;
    std::vector<std::int64_t> balls;
    std::int64_t step = 0;

    static UrnState initial(const ModelParams& p) { return {p.d, p.c, p.initial_balls, 0}; }

    std::int64_t operator()(int u, int i) const { return balls[static_cast<std::size_t>(i) * d + u]; }
    std::int64_t colour_total(int i) const {
        std::int64_t s = 0;
        for (int u = 0; u < d; ++u) s += (*this)(u, i);
        return s;
    }
    friend bool operator==(const UrnState&, const UrnState&) = default;
};

/// X_u^i = B_u^i / sum_v B_v^i.
inline SimplexPoint proportions(const UrnState& s) {
    std::vector<double> x(s.balls.size());
    for (int i = 0; i < s.c; ++i) {
        const std::int64_t total = s.colour_total(i);
        if (total <= 0) throw std::logic_error("proportions: colour " + std::to_string(i) + " has no balls");
        for (int u = 0; u < s.d; ++u)
            x[static_cast<std::size_t>(i) * s.d + u] = static_cast<double>(s(u, i)) / static_cast<double>(total);
    }
    return SimplexPoint(s.d, s.c, std::move(x));
}

/// P(ball of colour i at edge {u, v} goes to u), for u < v and every colour,
/// in lexicographic (u, v, i) order; this is also the order of the draws.
inline std::vector<double> placement_probabilities(std::span<const double> x, const ModelParams& p) {
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(p.edges()) * p.c);
    for (int u = 0; u < p.d; ++u)
        for (int v = u + 1; v < p.d; ++v)
            for (int i = 0; i < p.c; ++i) probs.push_back(p.phi.eval(influence(x, p.d, p.c, p.alpha, i, u, v)));
    return probs;
}

/// Numbers of balls N_u^i(n+1) placed in one step drawn from proportions x.
/// Every draw conditions on x; the step's placements do not feed back.
inline std::vector<std::int64_t> draw_placements(std::span<const double> x, const ModelParams& p, Rng& rng) {
    std::vector<std::int64_t> placed(p.dim(), 0);
    const auto probs = placement_probabilities(x, p);
    std::size_t k = 0;
    for (int u = 0; u < p.d; ++u)
        for (int v = u + 1; v < p.d; ++v)
            for (int i = 0; i < p.c; ++i) {
                const int dest = uniform01(rng) < probs[k++] ? u : v;
                ++placed[p.index(dest, i)];
            }
    return placed;
}

inline UrnState step(const UrnState& s, const ModelParams& p, Rng& rng) {
    const SimplexPoint x = proportions(s);
    const auto placed = draw_placements(x.values(), p, rng);
    UrnState next = s;
    for (std::size_t k = 0; k < placed.size(); ++k) next.balls[k] += placed[k];
    ++next.step;
    return next;
}

/// xi(n) = N(n+1) / |E| for one step drawn at proportions x.
inline std::vector<double> sample_xi(std::span<const double> x, const ModelParams& p, Rng& rng) {
    const auto placed = draw_placements(x, p, rng);
    std::vector<double> xi(placed.size());
    const double edges = static_cast<double>(p.edges());
    for (std::size_t k = 0; k < placed.size(); ++k) xi[k] = static_cast<double>(placed[k]) / edges;
    return xi;
}

/// E[xi(n) | F_n] = pi(X(n)).
inline SimplexPoint conditional_mean_xi(const SimplexPoint& x, const ModelParams& p) { return pi(x, p); }

/// gamma_n = 1 / (b0/|E| + n + 1).
inline double gamma(std::int64_t n, const ModelParams& p) {
    if (n < 0) throw std::invalid_argument("gamma: n must be >= 0");
    return 1.0 / (static_cast<double>(p.b0()) / static_cast<double>(p.edges()) + static_cast<double>(n) + 1.0);
}

/// Which steps are recorded by run(). Step 0 and the last step are always kept.
struct SnapshotSchedule {
    enum class Kind { linear, geometric };
    Kind kind = Kind::linear;
    /// linear: record every `every`-th step (0 = endpoints only).
    std::int64_t every = 0;
    /// geometric: record at 1, ceil(ratio), ... growing by `ratio` (> 1).
    double ratio = 2.0;

    static SnapshotSchedule linear(std::int64_t every) { return {Kind::linear, every, 2.0}; }
    static SnapshotSchedule geometric(double ratio) { return {Kind::geometric, 0, ratio}; }
    static SnapshotSchedule endpoints() { return linear(0); }
};

struct Snapshot {
    std::int64_t n = 0;
    UrnState state;
    SimplexPoint proportions() const { return urn::proportions(state); }
};

struct SimRun {
    std::uint64_t seed = 0;
    ModelParams params;
    std::vector<Snapshot> snapshots;
    UrnState final_state;
};

/// n_steps steps of the urn process from params.initial_balls, using the
/// stream Rng(seed). Bit-identical for identical (seed, params, schedule).
inline SimRun run(const ModelParams& p, std::int64_t n_steps, std::uint64_t seed,
                  const SnapshotSchedule& schedule = SnapshotSchedule::endpoints()) {
    if (n_steps < 0) throw std::invalid_argument("run: n_steps must be >= 0");
    if (schedule.kind == SnapshotSchedule::Kind::geometric && !(schedule.ratio > 1.0))
        throw std::invalid_argument("run: geometric snapshot ratio must exceed 1");
    require_valid(p);

    SimRun out;
    out.seed = seed;
    out.params = p;
    Rng rng(seed);
    UrnState s = UrnState::initial(p);
    out.snapshots.push_back({0, s});

    double next_geometric = 1.0;
    auto wanted = [&](std::int64_t n) {
        if (n == n_steps) return true;
        if (schedule.kind == SnapshotSchedule::Kind::linear) return schedule.every > 0 && n % schedule.every == 0;
        if (static_cast<double>(n) >= next_geometric) {
            while (next_geometric <= static_cast<double>(n)) next_geometric = std::ceil(next_geometric * schedule.ratio);
            return true;
        }
        return false;
    };

    // Same arithmetic as step(), without re-allocating the state.
    std::vector<double> x(p.dim());
    for (std::int64_t n = 1; n <= n_steps; ++n) {
        for (int i = 0; i < p.c; ++i) {
            const double total = static_cast<double>(s.colour_total(i));
            for (int u = 0; u < p.d; ++u) x[p.index(u, i)] = static_cast<double>(s(u, i)) / total;
        }
        const auto placed = draw_placements(x, p, rng);
        for (std::size_t k = 0; k < placed.size(); ++k) s.balls[k] += placed[k];
        s.step = n;
        if (wanted(n)) out.snapshots.push_back({n, s});
    }
    out.final_state = s;
    return out;
}

/// Independent runs r = 0..n_runs-1 with seeds stream_seed(master_seed, r).
inline std::vector<SimRun> run_batch(const ModelParams& p, int n_runs, std::int64_t n_steps,
                                     std::uint64_t master_seed,
                                     const SnapshotSchedule& schedule = SnapshotSchedule::endpoints(),
                                     unsigned threads = 0) {
    std::vector<SimRun> runs(static_cast<std::size_t>(std::max(n_runs, 0)));
    detail::parallel_for(
        runs.size(),
        [&](std::size_t r) { runs[r] = run(p, n_steps, stream_seed(master_seed, r), schedule); },
        threads);
    return runs;
}

// ---------------------------------------------------------------------------
// Stochastic-approximation structure

struct SaCheckOptions {
    /// Number of independent one-step draws at the frozen state.
    int replications = 100000;
    /// Frozen state; the run's final proportions when empty.
    std::optional<SimplexPoint> frozen_state;
    std::uint64_t seed = 0x5eed;
    double identity_tol = 1e-12;
    double sigma_multiple = 3.0;
};

struct SaReport {
    std::size_t steps_checked = 0;
    /// max over steps and components of |X(n+1) - X(n) - gamma_n (F(X(n)) + U(n))|
    /// with U(n) = xi(n) - pi(X(n)) and xi(n) taken from the ball counts.
    double max_identity_residual = 0.0;
    /// max over steps of |(X(n+1) - X(n))/gamma_n - F(X(n)) - U(n)|.
    double max_reconstruction_residual = 0.0;

    // Martingale check at the frozen state.
    std::vector<double> mean_u;
    std::vector<double> sigma_mean_u;  // standard error of each mean
    double max_z_score = 0.0;

    // Boundedness: 0 <= xi_u^i <= (d-1)/|E| and ||U||_2 <= 2c.
    double max_xi = 0.0;
    double xi_bound = 0.0;
    double max_u_norm = 0.0;
    double u_norm_bound = 0.0;

    bool identity_ok = false;
    bool martingale_ok = false;
    bool bounds_ok = false;
    bool passed() const { return identity_ok && martingale_ok && bounds_ok; }
};

/// Verifies the decomposition along consecutive snapshots of `r` (run it with
/// SnapshotSchedule::linear(1)), and the zero conditional mean of U by Monte
/// Carlo at a frozen state.
inline SaReport sa_decomposition_check(const SimRun& r, const ModelParams& p, const SaCheckOptions& opt = {}) {
    SaReport rep;
    const double edges = static_cast<double>(p.edges());
    rep.xi_bound = (p.d - 1) / edges;
    rep.u_norm_bound = 2.0 * p.c;
    const std::size_t n = p.dim();
    bool consecutive = r.snapshots.size() >= 2;

    for (std::size_t k = 0; k + 1 < r.snapshots.size(); ++k) {
        const auto& a = r.snapshots[k];
        const auto& b = r.snapshots[k + 1];
        if (b.n != a.n + 1) {
            consecutive = false;
            break;
        }
        const SimplexPoint xa = a.proportions();
        const SimplexPoint xb = b.proportions();
        const auto f = field(xa, p);
        const auto pix = pi_values(xa.values(), p);
        const double g = gamma(a.n, p);
        double u_norm2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double xi = static_cast<double>(b.state.balls[j] - a.state.balls[j]) / edges;
            const double u = xi - pix[j];
            const double dx = xb[j] - xa[j];
            rep.max_identity_residual = std::max(rep.max_identity_residual, std::abs(dx - g * (f[j] + u)));
            rep.max_reconstruction_residual =
                std::max(rep.max_reconstruction_residual, std::abs(dx / g - f[j] - u));
            rep.max_xi = std::max(rep.max_xi, std::abs(xi));
            u_norm2 += u * u;
        }
        rep.max_u_norm = std::max(rep.max_u_norm, std::sqrt(u_norm2));
        ++rep.steps_checked;
    }
    rep.identity_ok = consecutive && rep.max_identity_residual <= opt.identity_tol;

    // Monte Carlo at a frozen state: U = xi - E[xi], E[xi] = pi(x).
    const SimplexPoint frozen = opt.frozen_state ? *opt.frozen_state : proportions(r.final_state);
    const auto mean_xi = pi_values(frozen.values(), p);
    const auto probs = placement_probabilities(frozen.values(), p);
    std::vector<double> var(n, 0.0);
    {
        std::size_t k = 0;
        for (int u = 0; u < p.d; ++u)
            for (int v = u + 1; v < p.d; ++v)
                for (int i = 0; i < p.c; ++i) {
                    const double q = probs[k++];
                    // The indicator for u and the one for v are 1 - each other.
                    var[p.index(u, i)] += q * (1.0 - q) / (edges * edges);
                    var[p.index(v, i)] += q * (1.0 - q) / (edges * edges);
                }
    }
    rep.mean_u.assign(n, 0.0);
    Rng rng(opt.seed);
    for (int rep_i = 0; rep_i < opt.replications; ++rep_i) {
        const auto xi = sample_xi(frozen.values(), p, rng);
        double u_norm2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double u = xi[j] - mean_xi[j];
            rep.mean_u[j] += u;
            rep.max_xi = std::max(rep.max_xi, xi[j]);
            u_norm2 += u * u;
        }
        rep.max_u_norm = std::max(rep.max_u_norm, std::sqrt(u_norm2));
    }
    rep.sigma_mean_u.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        rep.mean_u[j] /= std::max(opt.replications, 1);
        rep.sigma_mean_u[j] = std::sqrt(var[j] / std::max(opt.replications, 1));
        const double z = rep.sigma_mean_u[j] > 0.0 ? std::abs(rep.mean_u[j]) / rep.sigma_mean_u[j]
                                                   : (rep.mean_u[j] == 0.0 ? 0.0 : INFINITY);
        rep.max_z_score = std::max(rep.max_z_score, z);
    }
    rep.martingale_ok = opt.replications > 0 && rep.max_z_score <= opt.sigma_multiple;
    rep.bounds_ok = rep.max_xi <= rep.xi_bound + 1e-15 && rep.max_u_norm <= rep.u_norm_bound;
    return rep;
}

}  // namespace urn
