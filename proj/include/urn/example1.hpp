#pragma once

// The three-vertex, two-colour golden case: alpha = (615/182) ln 9 with the
// logistic phi has six stable fixed points obtained from
// y = (23/615, 1/3, 129/205) by permuting vertices, with x = (y, y).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "urn/fixed_points.hpp"
#include "urn/model.hpp"
#include "urn/pi_map.hpp"

namespace urn::example1 {

inline double alpha() { return 615.0 / 182.0 * std::log(9.0); }

inline ModelParams params(double a = alpha()) { return ModelParams::uniform(3, 2, a); }

/// The six points in their published order.
inline std::vector<SimplexPoint> points() {
    const double p = 23.0 / 615.0;
    const double q = 1.0 / 3.0;
    const double r = 129.0 / 205.0;
    const std::array<std::array<double, 3>, 6> ys{{
        {p, q, r}, {p, r, q}, {q, p, r}, {r, q, p}, {r, p, q}, {q, r, p},
    }};
    std::vector<SimplexPoint> out;
    for (const auto& y : ys) out.emplace_back(3, 2, std::vector<double>{y[0], y[1], y[2], y[0], y[1], y[2]});
    return out;
}

/// M(y) at the first point, without the alpha / 3 factor.
inline Eigen::Matrix3d m_rational() {
    Eigen::Matrix3d m;
    m << 8577.0 / 84050.0, -9.0 / 100.0, -81.0 / 6724.0,  //
        -9.0 / 100.0, 9.0 / 50.0, -9.0 / 100.0,            //
        -81.0 / 6724.0, -9.0 / 100.0, 8577.0 / 84050.0;
    return m;
}

struct SubCheck {
    std::string id;
    std::string description;
    bool passed = false;
    double discrepancy = 0.0;
    std::string detail;
};

struct Report {
    double alpha = 0.0;
    std::vector<SubCheck> checks;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const SubCheck& c) { return c.passed; });
    }
    std::string summary() const {
        std::ostringstream os;
        os.precision(3);
        for (const auto& c : checks) {
            os << "(" << c.id << ") " << (c.passed ? "pass" : "FAIL") << "  " << c.description
               << "  [discrepancy " << std::scientific << c.discrepancy << std::defaultfloat << "]";
            if (!c.detail.empty()) os << "  " << c.detail;
            os << '\n';
        }
        os << (passed() ? "all checks pass" : "some checks failed") << '\n';
        return os.str();
    }
};

inline constexpr double kIdentityTol = 1e-12;
inline constexpr double kEigenTol = 0.01;

/// Runs the golden checks at the given alpha (the published value by default):
///  (a) pi(x) = x at the six points,
///  (b) the off-diagonal Jacobian blocks equal M(y),
///  (c) alpha (y_u - y_w) = -ln 9, -2 ln 9, -ln 9 for (u, w) = (1,2), (1,3), (2,3),
///  (d) the spectrum of M(y) is approximately {0, 0.28, 0.66},
///  (e) rho(J pi) < 1 at the six points.
inline Report verify(double a = alpha()) {
    const ModelParams p = params(a);
    const auto pts = points();
    Report rep;
    rep.alpha = a;

    {
        SubCheck c{"a", "pi(x) = x at all six points", true, 0.0, {}};
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const double r = fixed_point_residual(pts[k], p);
            if (r > c.discrepancy) {
                c.discrepancy = r;
                c.detail = "worst at point " + std::to_string(k + 1);
            }
        }
        c.passed = c.discrepancy < kIdentityTol;
        rep.checks.push_back(c);
    }

    const JacobianMatrix jac = pi_jacobian(pts[0], p);
    const Eigen::MatrixXd m_expected = (alpha() / 3.0) * m_rational();
    {
        SubCheck c{"b", "Jacobian blocks equal M(y)", true, 0.0, {}};
        const double upper = (jac.block(0, 1) - m_expected).cwiseAbs().maxCoeff();
        const double lower = (jac.block(1, 0) - m_expected).cwiseAbs().maxCoeff();
        const double diag = std::max(jac.block(0, 0).cwiseAbs().maxCoeff(), jac.block(1, 1).cwiseAbs().maxCoeff());
        c.discrepancy = std::max({upper, lower, diag});
        c.passed = c.discrepancy < kIdentityTol;
        rep.checks.push_back(c);
    }

    {
        SubCheck c{"c", "y_12 = -ln 9, y_13 = -2 ln 9, y_23 = -ln 9", true, 0.0, {}};
        const double ln9 = std::log(9.0);
        const std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
        const std::array<double, 3> expected{-ln9, -2.0 * ln9, -ln9};
        std::ostringstream os;
        os.precision(17);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            // influence for colour index 1 reads the colour-0 block, i.e. y.
            const double v = influence(pts[0].values(), 3, 2, a, 1, pairs[k][0], pairs[k][1]);
            c.discrepancy = std::max(c.discrepancy, std::abs(v - expected[k]));
            os << (k ? ", " : "values ") << v;
        }
        c.detail = os.str();
        c.passed = c.discrepancy < kIdentityTol;
        rep.checks.push_back(c);
    }

    {
        SubCheck c{"d", "eigenvalues of M(y) ~ {0, 0.28, 0.66}", true, 0.0, {}};
        auto ev = eigenvalues(jac.block(0, 1));
        std::vector<double> re;
        double imag = 0.0;
        for (const auto& l : ev) {
            re.push_back(l.real());
            imag = std::max(imag, std::abs(l.imag()));
        }
        std::sort(re.begin(), re.end());
        const std::array<double, 3> expected{0.0, 0.28, 0.66};
        for (std::size_t k = 0; k < 3; ++k) c.discrepancy = std::max(c.discrepancy, std::abs(re[k] - expected[k]));
        c.discrepancy = std::max(c.discrepancy, imag);
        std::ostringstream os;
        os.precision(6);
        os << "spectrum " << re[0] << ", " << re[1] << ", " << re[2];
        c.detail = os.str();
        c.passed = c.discrepancy <= kEigenTol;
        rep.checks.push_back(c);
    }

    {
        SubCheck c{"e", "rho(J pi) < 1 at all six points", true, 0.0, {}};
        double worst = 0.0;
        for (const auto& x : pts) worst = std::max(worst, spectral_radius(pi_jacobian(x, p).matrix()));
        c.discrepancy = std::max(0.0, worst - 1.0);
        std::ostringstream os;
        os.precision(6);
        os << "max rho " << worst;
        c.detail = os.str();
        c.passed = worst < 1.0;
        rep.checks.push_back(c);
    }
    return rep;
}

}  // namespace urn::example1
