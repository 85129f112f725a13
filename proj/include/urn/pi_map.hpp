#pragma once

// The reinforcement map pi, its Jacobian and the contraction bound.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <span>
#include <sstream>
#include <vector>

#include "urn/model.hpp"

namespace urn {

/// Argument of phi for colour i at the ordered pair (u, w):
/// sum_{k != i} alpha (x_u^k - x_w^k).
inline double influence(std::span<const double> x, int d, int c, double alpha, int i, int u, int w) {
    double s = 0.0;
    for (int k = 0; k < c; ++k) {
        if (k == i) continue;
        s += x[static_cast<std::size_t>(k) * d + u] - x[static_cast<std::size_t>(k) * d + w];
    }
    return alpha * s;
}

/// pi on all of R^{dc}; `out` must have size dc.
inline void pi_into(std::span<const double> x, const ModelParams& p, std::span<double> out) {
    const double inv_edges = 1.0 / static_cast<double>(p.edges());
    for (int i = 0; i < p.c; ++i) {
        for (int u = 0; u < p.d; ++u) {
            double s = 0.0;
            for (int w = 0; w < p.d; ++w) {
                if (w == u) continue;
                s += p.phi.eval(influence(x, p.d, p.c, p.alpha, i, u, w));
            }
            out[p.index(u, i)] = s * inv_edges;
        }
    }
}

inline std::vector<double> pi_values(std::span<const double> x, const ModelParams& p) {
    std::vector<double> out(p.dim());
    pi_into(x, p, out);
    return out;
}

/// pi(x). The image lies in the interior of the simplex.
inline SimplexPoint pi(const SimplexPoint& x, const ModelParams& p) {
    return SimplexPoint(p.d, p.c, pi_values(x.values(), p));
}

/// ||pi(x) - x||_inf.
inline double fixed_point_residual(std::span<const double> x, const ModelParams& p) {
    return linf_distance(pi_values(x, p), x);
}

inline double fixed_point_residual(const SimplexPoint& x, const ModelParams& p) {
    return fixed_point_residual(x.values(), p);
}

/// Dense Jacobian of pi, rows (u, i) and columns (v, j) in flat colour-major
/// order.
class JacobianMatrix {
public:
    JacobianMatrix(int d, int c, Eigen::MatrixXd entries) : d_(d), c_(c), m_(std::move(entries)) {}

    double entry(int u, int i, int v, int j) const { return m_(i * d_ + u, j * d_ + v); }
    const Eigen::MatrixXd& matrix() const { return m_; }
    /// The d x d block of derivatives of colour-i rows w.r.t. colour-j columns.
    Eigen::MatrixXd block(int i, int j) const { return m_.block(i * d_, j * d_, d_, d_); }
    /// max over columns of the column l1 norm, i.e. the induced l1 norm.
    double max_column_l1() const { return m_.cwiseAbs().colwise().sum().maxCoeff(); }

    int d() const { return d_; }
    int c() const { return c_; }

private:
    int d_;
    int c_;
    Eigen::MatrixXd m_;
};

inline JacobianMatrix pi_jacobian(std::span<const double> x, const ModelParams& p) {
    const int d = p.d;
    const int c = p.c;
    const double scale = p.alpha / static_cast<double>(p.edges());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.dim()), static_cast<Eigen::Index>(p.dim()));
    for (int i = 0; i < c; ++i) {
        for (int u = 0; u < d; ++u) {
            const auto row = static_cast<Eigen::Index>(p.index(u, i));
            // d pi_u^i / d x_v^j = -scale phi'(arg_{u,v}) for v != u, and the
            // diagonal-vertex entry collects the sum; identical for every j != i.
            double diag = 0.0;
            std::vector<double> off(static_cast<std::size_t>(d), 0.0);
            for (int v = 0; v < d; ++v) {
                if (v == u) continue;
                const double g = p.phi.deriv(influence(x, d, c, p.alpha, i, u, v));
                diag += g;
                off[static_cast<std::size_t>(v)] = -scale * g;
            }
            for (int j = 0; j < c; ++j) {
                if (j == i) continue;
                for (int v = 0; v < d; ++v) {
                    J(row, static_cast<Eigen::Index>(p.index(v, j))) =
                        v == u ? scale * diag : off[static_cast<std::size_t>(v)];
                }
            }
        }
    }
    return JacobianMatrix(d, c, std::move(J));
}

inline JacobianMatrix pi_jacobian(const SimplexPoint& x, const ModelParams& p) {
    return pi_jacobian(x.values(), p);
}

/// 4 (c - 1) |alpha| sup phi' / d, an upper bound on the l1 operator norm of
/// the Jacobian over the whole simplex.
inline double l1_norm_bound(const ModelParams& p) {
    return 4.0 * (p.c - 1) * std::abs(p.alpha) * p.phi.deriv_sup() / p.d;
}

/// True iff pi is an l1 contraction by the bound above (strict inequality).
inline bool is_contraction_regime(const ModelParams& p) { return l1_norm_bound(p) < 1.0; }

/// |alpha| threshold below which the model is in the contraction regime.
inline double contraction_alpha_threshold(const ModelParams& p) {
    return p.d / (4.0 * (p.c - 1) * p.phi.deriv_sup());
}

/// All eigenvalues of a general square matrix (real Schur / QR iteration).
inline std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("eigenvalues: matrix must be square");
    if (!a.allFinite()) throw NumericError("eigenvalues: matrix has non-finite entries");
    if (a.rows() == 0) return {};
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        Eigen::IOFormat fmt(Eigen::FullPrecision, 0, ", ", "\n", "[", "]");
        std::ostringstream os;
        os << "eigenvalues: QR iteration did not converge for\n" << a.format(fmt);
        throw NumericError(os.str());
    }
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

inline double spectral_radius(const Eigen::MatrixXd& a) {
    double r = 0.0;
    for (const auto& l : eigenvalues(a)) r = std::max(r, std::abs(l));
    return r;
}

}  // namespace urn
