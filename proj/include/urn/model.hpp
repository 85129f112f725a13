#pragma once

// Domain types shared by every part of the urn engine: the reinforcement
// function, model parameters and points of the product simplex.
//
// Indexing convention used throughout: a state in R^{dc} is stored flat in
// colour-major order, flat index = i * d + u for colour i and vertex u
// (both zero-based), i.e. (x^1_1, ..., x^1_d, ..., x^c_1, ..., x^c_d).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace urn {

/// Thrown when a value violates a domain invariant (simplex membership,
/// model shape, ...).
class InvariantError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine cannot produce a trustworthy answer.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// Adaptive Simpson on [a, b]; f is assumed smooth.
template <typename F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) {
        return left + right + diff / 15.0;
    }
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 40) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace detail

/// A reinforcement function phi: R -> (0, 1) with bounded positive derivative
/// and phi(t) + phi(-t) = 1.
///
/// Besides phi and phi' the Lyapunov machinery needs the primitive
/// z -> \int^{phi(z)} phi^{-1}(eta) d eta, exposed as inverse_antiderivative.
/// Its additive constant is fixed by the base point phi(0) = 1/2.
class ReinforcementFunction {
public:
    using ScalarFn = std::function<double(double)>;

    ReinforcementFunction(std::string name, ScalarFn eval, ScalarFn deriv, double deriv_sup,
                          ScalarFn inverse_antiderivative)
        : name_(std::move(name)),
          eval_(std::move(eval)),
          deriv_(std::move(deriv)),
          deriv_sup_(deriv_sup),
          inverse_antiderivative_(std::move(inverse_antiderivative)) {
        if (!eval_ || !deriv_ || !inverse_antiderivative_) {
            throw std::invalid_argument("reinforcement function: missing callable");
        }
        if (!(deriv_sup_ > 0.0) || !std::isfinite(deriv_sup_)) {
            throw std::invalid_argument("reinforcement function: deriv_sup must be positive and finite");
        }
    }

    /// Logistic phi(t) = 1 / (1 + e^{-t}); sup phi' = 1/4 exactly.
    static ReinforcementFunction logistic() {
        auto eval = [](double t) {
            // Split by sign so neither branch overflows.
            if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
            const double e = std::exp(t);
            return e / (1.0 + e);
        };
        auto deriv = [eval](double t) {
            const double p = eval(t);
            return p * (1.0 - p);
        };
        auto primitive = [eval](double z) {
            // eta ln eta + (1 - eta) ln(1 - eta) at eta = phi(z), written so the
            // tails stay accurate: ln phi(z) = -log1p(e^{-z}).
            const double p = eval(z);
            const double q = eval(-z);
            const double log_p = z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
            const double log_q = log_p - z;
            return p * log_p + q * log_q;
        };
        return ReinforcementFunction("logistic", eval, deriv, 0.25, primitive);
    }

    /// A user-supplied phi. The primitive is integrated numerically: with
    /// eta = phi(t) the integral of phi^{-1} from 1/2 to phi(z) becomes
    /// \int_0^z t phi'(t) dt, evaluated by adaptive Simpson quadrature.
    static ReinforcementFunction custom(std::string name, ScalarFn eval, ScalarFn deriv,
                                        double deriv_sup, double quadrature_tol = 1e-13) {
        auto primitive = [deriv, quadrature_tol](double z) {
            auto integrand = [&deriv](double t) { return t * deriv(t); };
            return detail::adaptive_simpson(integrand, 0.0, z, quadrature_tol);
        };
        return ReinforcementFunction(std::move(name), std::move(eval), std::move(deriv), deriv_sup,
                                     primitive);
    }

    double eval(double t) const { return eval_(t); }
    double deriv(double t) const { return deriv_(t); }
    double deriv_sup() const { return deriv_sup_; }
    double inverse_antiderivative(double z) const { return inverse_antiderivative_(z); }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    ScalarFn eval_;
    ScalarFn deriv_;
    double deriv_sup_;
    ScalarFn inverse_antiderivative_;
};

inline ReinforcementFunction logistic() { return ReinforcementFunction::logistic(); }

/// Result of a sampled check of phi(t) + phi(-t) = 1.
struct SymmetryCheck {
    bool ok = true;
    double worst_violation = 0.0;
    double worst_at = 0.0;
};

inline SymmetryCheck check_h2(const ReinforcementFunction& phi, std::span<const double> samples,
                              double tol = 1e-12) {
    if (samples.empty()) throw std::invalid_argument("check_h2: samples must be non-empty");
    SymmetryCheck out;
    for (double t : samples) {
        const double v = std::abs(phi.eval(t) + phi.eval(-t) - 1.0);
        if (v > out.worst_violation || std::isnan(v)) {
            out.worst_violation = v;
            out.worst_at = t;
        }
    }
    out.ok = out.worst_violation < tol;
    return out;
}

/// Parameters of the interacting urn model on the complete graph K_d.
///
/// initial_balls is stored colour-major like every other state vector:
/// initial_balls[i * d + u] = B_u^i(0).
struct ModelParams {
    int d = 0;
    int c = 0;
    double alpha = 0.0;
    ReinforcementFunction phi = ReinforcementFunction::logistic();
    std::vector<std::int64_t> initial_balls;

    std::size_t dim() const { return static_cast<std::size_t>(d) * static_cast<std::size_t>(c); }
    std::size_t index(int u, int i) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(d) + static_cast<std::size_t>(u);
    }
    /// |E| = d(d-1)/2.
    std::int64_t edges() const { return static_cast<std::int64_t>(d) * (d - 1) / 2; }
    /// Common per-colour initial total b0 (colour 0's total).
    std::int64_t b0() const {
        std::int64_t s = 0;
        for (int u = 0; u < d; ++u) s += initial_balls.at(index(u, 0));
        return s;
    }

    /// Model with `balls` balls of each colour in each urn.
    static ModelParams uniform(int d, int c, double alpha,
                               ReinforcementFunction phi = ReinforcementFunction::logistic(),
                               std::int64_t balls = 1) {
        ModelParams p{d, c, alpha, std::move(phi), {}};
        p.initial_balls.assign(static_cast<std::size_t>(std::max(d, 0)) * static_cast<std::size_t>(std::max(c, 0)),
                               balls);
        return p;
    }
};

struct ValidationReport {
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
    std::string message() const {
        std::string s;
        for (const auto& e : errors) {
            if (!s.empty()) s += "; ";
            s += e;
        }
        return s;
    }
};

inline ValidationReport validate_params(const ModelParams& p) {
    ValidationReport r;
    if (p.d < 2 || p.c < 2) {
        std::ostringstream os;
        os << "degenerate model (d=" << p.d << ", c=" << p.c << "; need d >= 2 and c >= 2)";
        r.errors.push_back(os.str());
        return r;
    }
    if (!std::isfinite(p.alpha)) r.errors.push_back("alpha must be finite");
    if (p.initial_balls.size() != p.dim()) {
        std::ostringstream os;
        os << "initial_balls has " << p.initial_balls.size() << " entries, expected d*c = " << p.dim();
        r.errors.push_back(os.str());
        return r;
    }
    bool all_positive = true;
    for (auto b : p.initial_balls) all_positive = all_positive && b >= 1;
    if (!all_positive) r.errors.push_back("every initial ball count must be >= 1");

    std::vector<std::int64_t> totals(static_cast<std::size_t>(p.c), 0);
    for (int i = 0; i < p.c; ++i)
        for (int u = 0; u < p.d; ++u) totals[static_cast<std::size_t>(i)] += p.initial_balls[p.index(u, i)];
    if (std::adjacent_find(totals.begin(), totals.end(), std::not_equal_to<>()) != totals.end()) {
        std::ostringstream os;
        os << "unbalanced initial colours (per-colour totals:";
        for (auto t : totals) os << ' ' << t;
        os << ')';
        r.errors.push_back(os.str());
    }
    return r;
}

inline void require_valid(const ModelParams& p) {
    auto r = validate_params(p);
    if (!r.ok()) throw InvariantError(r.message());
}

/// A point of the product simplex: x_u^i >= 0 and sum_u x_u^i = 1 per colour.
///
/// Construction accepts inputs off the simplex by at most kRepairTol (round-off
/// drift from integration) and renormalizes them, remembering that it did.
class SimplexPoint {
public:
    static constexpr double kTol = 1e-12;
    static constexpr double kRepairTol = 1e-9;

    SimplexPoint() = default;

    SimplexPoint(int d, int c, std::vector<double> values) : d_(d), c_(c), values_(std::move(values)) {
        if (d_ < 1 || c_ < 1) throw InvariantError("simplex point: d and c must be positive");
        if (values_.size() != static_cast<std::size_t>(d_) * static_cast<std::size_t>(c_)) {
            throw InvariantError("simplex point: expected " + std::to_string(d_ * c_) + " coordinates, got " +
                                 std::to_string(values_.size()));
        }
        double worst = 0.0;
        for (int i = 0; i < c_; ++i) {
            double sum = 0.0;
            for (int u = 0; u < d_; ++u) {
                const double v = values_[at(u, i)];
                if (!std::isfinite(v)) throw InvariantError("simplex point: non-finite coordinate");
                if (v < 0.0) worst = std::max(worst, -v);
                sum += v;
            }
            worst = std::max(worst, std::abs(sum - 1.0));
        }
        if (worst > kRepairTol) {
            std::ostringstream os;
            os.precision(3);
            os << "simplex point: violates the simplex constraints by " << worst;
            throw InvariantError(os.str());
        }
        if (worst > kTol) {
            renormalize();
            repaired_ = true;
        }
    }

    int d() const { return d_; }
    int c() const { return c_; }
    std::size_t size() const { return values_.size(); }
    std::size_t at(int u, int i) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(d_) + static_cast<std::size_t>(u);
    }
    double operator()(int u, int i) const { return values_[at(u, i)]; }
    double operator[](std::size_t k) const { return values_[k]; }
    std::span<const double> values() const { return values_; }
    /// True when construction had to renormalize the input.
    bool was_repaired() const { return repaired_; }

    /// (1/d, ..., 1/d).
    static SimplexPoint uniform(int d, int c) {
        return SimplexPoint(d, c, std::vector<double>(static_cast<std::size_t>(d) * static_cast<std::size_t>(c),
                                                      1.0 / d));
    }

    friend bool operator==(const SimplexPoint&, const SimplexPoint&) = default;

private:
    void renormalize() {
        for (int i = 0; i < c_; ++i) {
            double sum = 0.0;
            for (int u = 0; u < d_; ++u) {
                auto& v = values_[at(u, i)];
                v = std::max(v, 0.0);
                sum += v;
            }
            for (int u = 0; u < d_; ++u) values_[at(u, i)] /= sum;
        }
    }

    int d_ = 0;
    int c_ = 0;
    std::vector<double> values_;
    bool repaired_ = false;
};

inline double linf_distance(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

inline double linf_distance(const SimplexPoint& a, const SimplexPoint& b) {
    return linf_distance(a.values(), b.values());
}

/// Largest |sum_u x_u^i - 1| over colours.
inline double colour_sum_drift(std::span<const double> x, int d, int c) {
    double worst = 0.0;
    for (int i = 0; i < c; ++i) {
        double s = 0.0;
        for (int u = 0; u < d; ++u) s += x[static_cast<std::size_t>(i) * d + u];
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

}  // namespace urn
