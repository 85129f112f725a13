#pragma once

// Locating and classifying fixed points of pi.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "urn/model.hpp"
#include "urn/parallel.hpp"
#include "urn/pi_map.hpp"
#include "urn/random.hpp"

namespace urn {

enum class Stability { stable, unstable, marginal };

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::marginal: return "marginal";
    }
    return "?";
}

/// Width of the band around rho = 1 reported as marginal.
inline constexpr double kMarginalBand = 1e-8;

inline Stability classify(double spectral_radius) {
    if (spectral_radius < 1.0 - kMarginalBand) return Stability::stable;
    if (spectral_radius > 1.0 + kMarginalBand) return Stability::unstable;
    return Stability::marginal;
}

struct FixedPointRecord {
    SimplexPoint point;
    double residual = 0.0;         // ||pi(x) - x||_inf
    double spectral_radius = 0.0;  // rho(J pi(x))
    Stability classification = Stability::marginal;
    std::int64_t basin_hits = 0;
    int iterations = 0;  // solver iterations that produced the record
};

inline FixedPointRecord make_record(SimplexPoint x, const ModelParams& p, int iterations = 0) {
    FixedPointRecord r;
    r.residual = fixed_point_residual(x, p);
    r.spectral_radius = spectral_radius(pi_jacobian(x, p).matrix());
    r.classification = classify(r.spectral_radius);
    r.iterations = iterations;
    r.point = std::move(x);
    return r;
}

/// Outcome of a local solver. `record` is empty on non-convergence; that is a
/// normal outcome, not an error.
struct SolveOutcome {
    std::optional<FixedPointRecord> record;
    int iterations = 0;
    double last_residual = 0.0;
    bool abandoned = false;  // the iterate left the simplex
    std::string diagnostic;

    bool converged() const { return record.has_value(); }
};

/// Picard iteration x <- pi(x) until ||pi(x) - x||_inf < tol. Converges from
/// any start in the contraction regime.
inline SolveOutcome iterate_to_fixed_point(const SimplexPoint& x0, const ModelParams& p, int max_iter,
                                           double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("iterate_to_fixed_point: tol must be positive");
    SolveOutcome out;
    std::vector<double> x(x0.values().begin(), x0.values().end());
    std::vector<double> y(x.size());
    for (int it = 0; it <= max_iter; ++it) {
        pi_into(x, p, y);
        out.last_residual = linf_distance(y, x);
        out.iterations = it;
        if (out.last_residual < tol) {
            out.record = make_record(SimplexPoint(p.d, p.c, std::move(x)), p, it);
            return out;
        }
        if (it == max_iter) break;
        x.swap(y);
    }
    std::ostringstream os;
    os << "no convergence after " << max_iter << " iterations (residual " << out.last_residual << ")";
    out.diagnostic = os.str();
    return out;
}

struct NewtonOptions {
    int max_steps = 100;
    double min_damping = 1e-6;
    /// A start is abandoned once any coordinate drops below -max_excursion.
    double max_excursion = 0.1;
};

/// Damped Newton on F(x) = pi(x) - x restricted to the affine set where every
/// colour block sums to one. The last vertex of each colour is eliminated,
/// leaving a square system of size (d - 1) c.
inline SolveOutcome newton_solve(const SimplexPoint& x0, const ModelParams& p, double tol,
                                 const NewtonOptions& opt = {}) {
    if (!(tol > 0.0)) throw std::invalid_argument("newton_solve: tol must be positive");
    const int d = p.d;
    const int c = p.c;
    const auto n = static_cast<Eigen::Index>((d - 1) * c);
    const int last = d - 1;

    SolveOutcome out;
    std::vector<double> x(x0.values().begin(), x0.values().end());
    std::vector<double> f(x.size());

    auto residual = [&](const std::vector<double>& at, std::vector<double>& fx) {
        pi_into(at, p, fx);
        for (std::size_t k = 0; k < at.size(); ++k) fx[k] -= at[k];
    };
    auto reduced_norm2 = [&](const std::vector<double>& fx) {
        double s = 0.0;
        for (int i = 0; i < c; ++i)
            for (int u = 0; u < last; ++u) s += fx[p.index(u, i)] * fx[p.index(u, i)];
        return s;
    };
    auto inf_norm = [](const std::vector<double>& fx) {
        double m = 0.0;
        for (double v : fx) m = std::max(m, std::abs(v));
        return m;
    };
    auto reduced_row = [&](int u, int i) { return static_cast<Eigen::Index>(i * (d - 1) + u); };

    residual(x, f);
    for (int step = 0;; ++step) {
        out.iterations = step;
        out.last_residual = inf_norm(f);
        if (out.last_residual < tol) {
            out.record = make_record(SimplexPoint(d, c, x), p, step);
            return out;
        }
        if (step == opt.max_steps) {
            out.diagnostic = "no convergence after " + std::to_string(opt.max_steps) + " Newton steps";
            return out;
        }

        // Reduced Jacobian: column (v, j) of J_F minus column (last, j),
        // keeping rows with u < last. J_F = J pi - I.
        const Eigen::MatrixXd jf = pi_jacobian(x, p).matrix() -
                                   Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p.dim()),
                                                             static_cast<Eigen::Index>(p.dim()));
        Eigen::MatrixXd jr(n, n);
        Eigen::VectorXd rhs(n);
        for (int i = 0; i < c; ++i) {
            for (int u = 0; u < last; ++u) {
                const auto row = static_cast<Eigen::Index>(p.index(u, i));
                rhs(reduced_row(u, i)) = -f[p.index(u, i)];
                for (int j = 0; j < c; ++j) {
                    const auto col_last = static_cast<Eigen::Index>(p.index(last, j));
                    for (int v = 0; v < last; ++v) {
                        jr(reduced_row(u, i), reduced_row(v, j)) =
                            jf(row, static_cast<Eigen::Index>(p.index(v, j))) - jf(row, col_last);
                    }
                }
            }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jr);
        if (!lu.isInvertible()) {
            out.diagnostic = "singular reduced Jacobian at step " + std::to_string(step);
            return out;
        }
        const Eigen::VectorXd delta = lu.solve(rhs);

        const double merit = reduced_norm2(f);
        std::vector<double> trial(x.size());
        std::vector<double> f_trial(x.size());
        bool accepted = false;
        for (double lambda = 1.0; lambda >= opt.min_damping; lambda *= 0.5) {
            for (int i = 0; i < c; ++i) {
                double acc = 0.0;
                for (int u = 0; u < last; ++u) {
                    const double v = x[p.index(u, i)] + lambda * delta(reduced_row(u, i));
                    trial[p.index(u, i)] = v;
                    acc += v;
                }
                trial[p.index(last, i)] = 1.0 - acc;
            }
            residual(trial, f_trial);
            if (reduced_norm2(f_trial) < merit) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            out.diagnostic = "line search failed at step " + std::to_string(step);
            return out;
        }
        x.swap(trial);
        f.swap(f_trial);
        if (*std::min_element(x.begin(), x.end()) < -opt.max_excursion) {
            out.abandoned = true;
            out.iterations = step + 1;
            out.last_residual = inf_norm(f);
            out.diagnostic = "iterate left the simplex";
            return out;
        }
    }
}

/// Distinct fixed points closer than this in l_inf are merged.
inline constexpr double kDedupTol = 1e-7;

struct SearchResult {
    std::vector<FixedPointRecord> records;
    int n_starts = 0;
    int n_abandoned = 0;
    int n_failed = 0;  // non-converged but not abandoned
};

/// Newton from `n_starts` seeded Dirichlet(1, ..., 1) starts. Start k uses
/// stream k of `seed`; results are merged in start order, so the output does
/// not depend on how many threads ran the solves.
inline SearchResult multi_start_search(const ModelParams& p, int n_starts, std::uint64_t seed,
                                       double tol = 1e-12, unsigned threads = 0) {
    if (n_starts < 1) throw std::invalid_argument("multi_start_search: n_starts must be >= 1");
    std::vector<SolveOutcome> outcomes(static_cast<std::size_t>(n_starts));
    detail::parallel_for(
        outcomes.size(),
        [&](std::size_t k) {
            Rng rng = make_stream(seed, k);
            outcomes[k] = newton_solve(random_simplex_point(p.d, p.c, rng), p, tol);
        },
        threads);

    SearchResult result;
    result.n_starts = n_starts;
    for (auto& o : outcomes) {
        if (!o.converged()) {
            (o.abandoned ? result.n_abandoned : result.n_failed) += 1;
            continue;
        }
        auto hit = std::find_if(result.records.begin(), result.records.end(), [&](const FixedPointRecord& r) {
            return linf_distance(r.point, o.record->point) < kDedupTol;
        });
        if (hit != result.records.end()) {
            ++hit->basin_hits;
        } else {
            o.record->basin_hits = 1;
            result.records.push_back(std::move(*o.record));
        }
    }
    return result;
}

/// Images of x under every permutation of the vertex set applied to all colour
/// blocks at once (x_u^i -> x_{sigma(u)}^i), duplicates removed, identity first.
inline std::vector<SimplexPoint> permutation_orbit(const SimplexPoint& x, const ModelParams& p,
                                                   double tol = 1e-12) {
    if (p.d > 10) throw std::invalid_argument("permutation_orbit: d! permutations is too many for d > 10");
    std::vector<int> sigma(static_cast<std::size_t>(p.d));
    std::iota(sigma.begin(), sigma.end(), 0);
    std::vector<SimplexPoint> orbit;
    do {
        std::vector<double> y(p.dim());
        for (int i = 0; i < p.c; ++i)
            for (int u = 0; u < p.d; ++u) y[p.index(u, i)] = x(sigma[static_cast<std::size_t>(u)], i);
        SimplexPoint candidate(p.d, p.c, std::move(y));
        const bool seen = std::any_of(orbit.begin(), orbit.end(),
                                      [&](const SimplexPoint& q) { return linf_distance(q, candidate) < tol; });
        if (!seen) orbit.push_back(std::move(candidate));
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return orbit;
}

/// Labels records by vertex-permutation orbit; records in the same orbit share
/// an id. Ids are assigned in record order starting at 0.
inline std::vector<int> assign_orbits(const std::vector<FixedPointRecord>& records, const ModelParams& p,
                                      double tol = 1e-6) {
    std::vector<int> ids(records.size(), -1);
    int next = 0;
    for (std::size_t a = 0; a < records.size(); ++a) {
        if (ids[a] >= 0) continue;
        ids[a] = next;
        const auto orbit = permutation_orbit(records[a].point, p);
        for (std::size_t b = a + 1; b < records.size(); ++b) {
            if (ids[b] >= 0) continue;
            for (const auto& q : orbit) {
                if (linf_distance(q, records[b].point) < tol) {
                    ids[b] = next;
                    break;
                }
            }
        }
        ++next;
    }
    return ids;
}

/// Index of the record nearest to x in l_inf, with its distance; -1 if empty.
inline std::pair<int, double> nearest_fixed_point(const SimplexPoint& x, const std::vector<FixedPointRecord>& records) {
    int best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < records.size(); ++k) {
        const double dk = linf_distance(x, records[k].point);
        if (dk < dist) {
            dist = dk;
            best = static_cast<int>(k);
        }
    }
    return {best, dist};
}

}  // namespace urn
