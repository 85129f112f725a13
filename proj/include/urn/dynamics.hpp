#pragma once

// Mean-field flow x' = -x + pi(x) and its Hopfield-network Lyapunov function.
//
// The change of variables z = Psi(x), z_{iuv} = sum_{k != i} alpha (x_u^k - x_v^k),
// turns the flow into z' = -z + W phi(z) + m, a Hopfield network with
// symmetric weights, whose energy L decreases along solutions. L o Psi is
// therefore a Lyapunov function on the simplex.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "urn/model.hpp"
#include "urn/pi_map.hpp"

namespace urn {

/// F(x) = -x + pi(x) on R^{dc}.
inline void field_into(std::span<const double> x, const ModelParams& p, std::span<double> out) {
    pi_into(x, p, out);
    for (std::size_t k = 0; k < x.size(); ++k) out[k] -= x[k];
}

inline std::vector<double> field(std::span<const double> x, const ModelParams& p) {
    std::vector<double> out(x.size());
    field_into(x, p, out);
    return out;
}

inline std::vector<double> field(const SimplexPoint& x, const ModelParams& p) { return field(x.values(), p); }

// ---------------------------------------------------------------------------
// Hopfield system

/// Element (i, u, v) of the index set Lambda, u != v (ordered pairs).
struct HopfieldIndex {
    int colour;
    int from;
    int to;
    friend bool operator==(const HopfieldIndex&, const HopfieldIndex&) = default;
};

/// Lambda in lexicographic (i, u, v) order; c d (d - 1) entries.
inline std::vector<HopfieldIndex> hopfield_index_set(int d, int c) {
    std::vector<HopfieldIndex> idx;
    idx.reserve(static_cast<std::size_t>(c) * d * (d - 1));
    for (int i = 0; i < c; ++i)
        for (int u = 0; u < d; ++u)
            for (int v = 0; v < d; ++v)
                if (u != v) idx.push_back({i, u, v});
    return idx;
}

struct HopfieldSystem {
    std::vector<HopfieldIndex> lambda_index;
    Eigen::MatrixXd weights;  // symmetric, |Lambda| x |Lambda|
    double offset = 0.0;      // m, the constant input of every unit

    std::size_t size() const { return lambda_index.size(); }
    double weight(std::size_t mu, std::size_t nu) const {
        return weights(static_cast<Eigen::Index>(mu), static_cast<Eigen::Index>(nu));
    }
    /// Position of (i, u, v) in lambda_index.
    static std::size_t position(int d, int i, int u, int v) {
        const auto row = static_cast<std::size_t>(i) * d * (d - 1) + static_cast<std::size_t>(u) * (d - 1);
        return row + static_cast<std::size_t>(v < u ? v : v - 1);
    }
};

/// Weight between units (i, u, v) and (j, r, s):
///   2 alpha/|E|  if j != i, r = u, s = v
///   alpha/|E|    if j != i and exactly one of r = u, s = v holds
///   0            otherwise (including every j = i).
inline double hopfield_weight(const HopfieldIndex& a, const HopfieldIndex& b, double alpha, double edges) {
    if (a.colour == b.colour) return 0.0;
    const bool same_from = a.from == b.from;
    const bool same_to = a.to == b.to;
    if (same_from && same_to) return 2.0 * alpha / edges;
    if (same_from || same_to) return alpha / edges;
    return 0.0;
}

inline HopfieldSystem build_hopfield(const ModelParams& p) {
    HopfieldSystem sys;
    sys.lambda_index = hopfield_index_set(p.d, p.c);
    const auto n = static_cast<Eigen::Index>(sys.lambda_index.size());
    const double edges = static_cast<double>(p.edges());
    sys.weights.resize(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            sys.weights(a, b) = hopfield_weight(sys.lambda_index[static_cast<std::size_t>(a)],
                                                sys.lambda_index[static_cast<std::size_t>(b)], p.alpha, edges);
    sys.offset = -p.alpha / edges * (p.d - 1) * (p.c - 1);
    return sys;
}

/// z = Psi(x), one component per element of Lambda.
inline std::vector<double> psi(std::span<const double> x, const ModelParams& p) {
    std::vector<double> z;
    z.reserve(static_cast<std::size_t>(p.c) * p.d * (p.d - 1));
    for (const auto& ix : hopfield_index_set(p.d, p.c))
        z.push_back(influence(x, p.d, p.c, p.alpha, ix.colour, ix.from, ix.to));
    return z;
}

inline std::vector<double> psi(const SimplexPoint& x, const ModelParams& p) { return psi(x.values(), p); }

/// Psi applied to a tangent vector (Psi is linear).
inline std::vector<double> psi_linear(std::span<const double> dx, const ModelParams& p) { return psi(dx, p); }

namespace detail {
inline Eigen::VectorXd activations(std::span<const double> z, const ReinforcementFunction& phi) {
    Eigen::VectorXd a(static_cast<Eigen::Index>(z.size()));
    for (std::size_t k = 0; k < z.size(); ++k) a(static_cast<Eigen::Index>(k)) = phi.eval(z[k]);
    return a;
}
}  // namespace detail

/// G(z) = -z + W phi(z) + m.
inline std::vector<double> hopfield_field(std::span<const double> z, const HopfieldSystem& sys,
                                          const ReinforcementFunction& phi) {
    if (z.size() != sys.size()) throw std::invalid_argument("hopfield_field: z does not match the index set");
    const Eigen::VectorXd wa = sys.weights * detail::activations(z, phi);
    std::vector<double> g(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) g[k] = -z[k] + wa(static_cast<Eigen::Index>(k)) + sys.offset;
    return g;
}

/// Hopfield energy
///   L(z) = -1/2 sum_{mu,nu} w_{mu nu} phi(z_mu) phi(z_nu)
///          + sum_mu \int^{phi(z_mu)} phi^{-1} - m sum_mu phi(z_mu).
/// The input term enters with a minus sign, as in Hopfield's energy; only then
/// is dL/dt = -sum phi' G^2 off the image of Psi. On that image sum phi(z_mu)
/// is the constant |Lambda|/2, so L o Psi is the same up to a constant.
inline double lyapunov(std::span<const double> z, const HopfieldSystem& sys, const ReinforcementFunction& phi) {
    if (z.size() != sys.size()) throw std::invalid_argument("lyapunov: z does not match the index set");
    const Eigen::VectorXd a = detail::activations(z, phi);
    double value = -0.5 * a.dot(sys.weights * a) - sys.offset * a.sum();
    for (double zm : z) value += phi.inverse_antiderivative(zm);
    return value;
}

/// d/dt L(z(t)) along z' = G(z), in closed form: -sum_mu phi'(z_mu) G_mu(z)^2.
inline double lyapunov_rate(std::span<const double> z, const HopfieldSystem& sys, const ReinforcementFunction& phi) {
    const auto g = hopfield_field(z, sys, phi);
    double r = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) r -= phi.deriv(z[k]) * g[k] * g[k];
    return r;
}

inline double lyapunov_on_simplex(std::span<const double> x, const ModelParams& p, const HopfieldSystem& sys) {
    return lyapunov(psi(x, p), sys, p.phi);
}

inline double lyapunov_on_simplex(const SimplexPoint& x, const ModelParams& p) {
    return lyapunov(psi(x, p), build_hopfield(p), p.phi);
}

// ---------------------------------------------------------------------------
// Integration

struct IntegrateOptions {
    /// Store every k-th accepted step; the endpoints are always stored.
    int store_every = 10;
    /// Largest tolerated per-colour sum drift of a raw RK4 step.
    double max_drift = SimplexPoint::kRepairTol;
    /// Smallest substep tried when a step has to be split.
    double min_step = 1e-6;
    /// Also record L o Psi for every stored state.
    bool with_lyapunov = true;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SimplexPoint> states;
    std::vector<double> lyapunov;  // empty unless requested

    double h = 0.0;
    double alpha = 0.0;
    SimplexPoint initial;

    // Diagnostics over every step, stored or not, measured before renormalization.
    double max_drift = 0.0;
    double min_coordinate = 0.0;
    int n_split_steps = 0;
    std::size_t n_steps = 0;
    /// Steps i where L(x_{i+1}) - L(x_i) exceeded the tolerance handed to integrate.
    int lyapunov_increases = 0;
    double max_lyapunov_increase = -std::numeric_limits<double>::infinity();
};

class IntegrationError : public NumericError {
public:
    using NumericError::NumericError;
};

namespace detail {
inline void rk4_step(std::span<const double> x, const ModelParams& p, double h, std::vector<double>& out,
                     std::vector<double>& k1, std::vector<double>& k2, std::vector<double>& k3,
                     std::vector<double>& k4, std::vector<double>& tmp) {
    const std::size_t n = x.size();
    field_into(x, p, k1);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = x[k] + 0.5 * h * k1[k];
    field_into(tmp, p, k2);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = x[k] + 0.5 * h * k2[k];
    field_into(tmp, p, k3);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = x[k] + h * k3[k];
    field_into(tmp, p, k4);
    for (std::size_t k = 0; k < n; ++k) out[k] = x[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
}

inline void renormalize_blocks(std::vector<double>& x, int d, int c) {
    for (int i = 0; i < c; ++i) {
        double s = 0.0;
        for (int u = 0; u < d; ++u) {
            auto& v = x[static_cast<std::size_t>(i) * d + u];
            v = std::max(v, 0.0);
            s += v;
        }
        for (int u = 0; u < d; ++u) x[static_cast<std::size_t>(i) * d + u] /= s;
    }
}
}  // namespace detail

/// Classical fixed-step RK4 from x0 to t_end. After every step each colour
/// block is rescaled to sum one; a step whose raw drift exceeds
/// opt.max_drift is redone as two half steps (recursively, down to
/// opt.min_step).
///
/// `lyapunov_tol` is the per-step increase of L o Psi counted as a violation
/// in Trajectory::lyapunov_increases (checked at every step, not only stored ones).
inline Trajectory integrate(const SimplexPoint& x0, const ModelParams& p, double t_end, double h,
                            const IntegrateOptions& opt = {}, double lyapunov_tol = 1e-9) {
    if (!(h > 0.0)) throw std::invalid_argument("integrate: h must be positive");
    if (!(t_end >= 0.0)) throw std::invalid_argument("integrate: t_end must be non-negative");
    if (opt.store_every < 1) throw std::invalid_argument("integrate: store_every must be >= 1");

    Trajectory traj;
    traj.h = h;
    traj.alpha = p.alpha;
    traj.initial = x0;
    traj.min_coordinate = *std::min_element(x0.values().begin(), x0.values().end());

    const HopfieldSystem sys = build_hopfield(p);
    const std::size_t n = p.dim();
    std::vector<double> x(x0.values().begin(), x0.values().end());
    std::vector<double> next(n), k1(n), k2(n), k3(n), k4(n), tmp(n);

    auto store = [&](double t, double lval) {
        traj.times.push_back(t);
        traj.states.emplace_back(p.d, p.c, x);
        if (opt.with_lyapunov) traj.lyapunov.push_back(lval);
    };

    // One raw step of size dt from `from` into `to`, split while drift is too large.
    std::vector<double> mid(n);
    auto advance = [&](auto&& self, const std::vector<double>& from, double dt, std::vector<double>& to,
                       int depth) -> void {
        detail::rk4_step(from, p, dt, to, k1, k2, k3, k4, tmp);
        const double drift = colour_sum_drift(to, p.d, p.c);
        if (drift <= opt.max_drift) {
            traj.max_drift = std::max(traj.max_drift, drift);
            traj.min_coordinate = std::min(traj.min_coordinate, *std::min_element(to.begin(), to.end()));
            return;
        }
        if (dt * 0.5 < opt.min_step) {
            std::ostringstream os;
            os << "integrate: colour-sum drift " << drift << " exceeds " << opt.max_drift
               << " even at step " << dt << " (alpha " << p.alpha << ")";
            throw IntegrationError(os.str());
        }
        if (depth == 0) ++traj.n_split_steps;
        std::vector<double> half(n);
        self(self, from, 0.5 * dt, half, depth + 1);
        detail::renormalize_blocks(half, p.d, p.c);
        self(self, half, 0.5 * dt, to, depth + 1);
    };

    const auto n_steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
    double l_prev = lyapunov_on_simplex(x, p, sys);
    store(0.0, l_prev);
    for (std::size_t s = 1; s <= n_steps; ++s) {
        const double t_prev = static_cast<double>(s - 1) * h;
        const double dt = std::min(h, t_end - t_prev);
        advance(advance, x, dt, next, 0);
        detail::renormalize_blocks(next, p.d, p.c);
        x.swap(next);
        ++traj.n_steps;

        const double l_now = lyapunov_on_simplex(x, p, sys);
        const double inc = l_now - l_prev;
        traj.max_lyapunov_increase = std::max(traj.max_lyapunov_increase, inc);
        if (inc > lyapunov_tol) ++traj.lyapunov_increases;
        l_prev = l_now;

        const double t = s == n_steps ? t_end : static_cast<double>(s) * h;
        if (s % static_cast<std::size_t>(opt.store_every) == 0 || s == n_steps) store(t, l_now);
    }
    return traj;
}

}  // namespace urn
