#include <gtest/gtest.h>

#include <cmath>

#include "urn/dynamics.hpp"
#include "urn/example1.hpp"
#include "urn/random.hpp"

namespace urn {
namespace {

SimplexPoint nudged(const SimplexPoint& x, Rng& rng, double size) {
    std::vector<double> v(x.values().begin(), x.values().end());
    for (int i = 0; i < x.c(); ++i) {
        // Move mass between two vertices of the colour block.
        const int a = static_cast<int>(uniform01(rng) * x.d());
        const int b = (a + 1) % x.d();
        const double s = size * (2.0 * uniform01(rng) - 1.0);
        v[static_cast<std::size_t>(i * x.d() + a)] += s;
        v[static_cast<std::size_t>(i * x.d() + b)] -= s;
    }
    return SimplexPoint(x.d(), x.c(), v);
}

TEST(Field, VanishesAtCentre) {
    const auto p = ModelParams::uniform(4, 3, 2.0);
    for (double v : field(SimplexPoint::uniform(4, 3), p)) EXPECT_LT(std::abs(v), 1e-15);
}

TEST(Field, TangentToTheSimplex) {
    Rng rng(1);
    for (int k = 0; k < 200; ++k) {
        const auto p = ModelParams::uniform(3, 3, -6.0 + 12.0 * uniform01(rng));
        const auto f = field(random_simplex_point(3, 3, rng), p);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(f[i * 3] + f[i * 3 + 1] + f[i * 3 + 2], 0.0, 1e-14);
    }
}

TEST(Field, PointsInwardOnTheBoundary) {
    const auto p = example1::params();
    const SimplexPoint x(3, 2, {0.0, 0.4, 0.6, 0.7, 0.0, 0.3});
    const auto f = field(x, p);
    EXPECT_GT(f[p.index(0, 0)], 0.0);
    EXPECT_GT(f[p.index(1, 1)], 0.0);
}

TEST(Psi, CentreMapsToZero) {
    const auto p = ModelParams::uniform(3, 3, 4.0);
    for (double z : psi(SimplexPoint::uniform(3, 3), p)) EXPECT_NEAR(z, 0.0, 1e-15);
}

TEST(Psi, ExampleOneValues) {
    const auto p = example1::params();
    const auto z = psi(example1::points().front(), p);
    const double l9 = std::log(9.0);
    // Colour 1 units: (1,2), (1,3), (2,1), (2,3), (3,1), (3,2).
    EXPECT_NEAR(z[HopfieldSystem::position(3, 0, 0, 1)], -l9, 1e-12);
    EXPECT_NEAR(z[HopfieldSystem::position(3, 0, 0, 2)], -2.0 * l9, 1e-12);
    EXPECT_NEAR(z[HopfieldSystem::position(3, 0, 1, 2)], -l9, 1e-12);
}

TEST(Psi, AntisymmetricInTheVertexPair) {
    Rng rng(2);
    const auto p = ModelParams::uniform(4, 3, 1.7);
    const auto z = psi(random_simplex_point(4, 3, rng), p);
    for (int i = 0; i < 3; ++i)
        for (int u = 0; u < 4; ++u)
            for (int v = 0; v < 4; ++v)
                if (u != v)
                    EXPECT_EQ(z[HopfieldSystem::position(4, i, u, v)], -z[HopfieldSystem::position(4, i, v, u)]);
}

TEST(Hopfield, IndexSetAndPositions) {
    const auto idx = hopfield_index_set(4, 3);
    ASSERT_EQ(idx.size(), 36u);
    for (std::size_t k = 0; k < idx.size(); ++k)
        EXPECT_EQ(HopfieldSystem::position(4, idx[k].colour, idx[k].from, idx[k].to), k);
}

TEST(Hopfield, WeightExamples) {
    const double a = 3.0, e = 3.0;
    EXPECT_EQ(hopfield_weight({0, 0, 1}, {1, 0, 1}, a, e), 2.0);
    EXPECT_EQ(hopfield_weight({0, 0, 1}, {1, 0, 2}, a, e), 1.0);
    EXPECT_EQ(hopfield_weight({0, 0, 1}, {1, 2, 1}, a, e), 1.0);
    EXPECT_EQ(hopfield_weight({0, 0, 1}, {1, 1, 0}, a, e), 0.0);
    EXPECT_EQ(hopfield_weight({0, 0, 1}, {0, 0, 1}, a, e), 0.0);
    EXPECT_EQ(hopfield_weight({0, 0, 1}, {1, 2, 0}, a, e), 0.0);
}

TEST(Hopfield, WeightsAreSymmetricWithZeroDiagonal) {
    const auto p = ModelParams::uniform(4, 3, -2.3);
    const auto sys = build_hopfield(p);
    EXPECT_EQ(sys.size(), 36u);
    EXPECT_EQ((sys.weights - sys.weights.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const double unit = p.alpha / p.edges();
    for (Eigen::Index a = 0; a < sys.weights.rows(); ++a) {
        EXPECT_EQ(sys.weights(a, a), 0.0);
        for (Eigen::Index b = 0; b < sys.weights.cols(); ++b) {
            const double w = sys.weights(a, b);
            EXPECT_TRUE(w == 0.0 || w == unit || w == 2.0 * unit) << w;
        }
    }
    EXPECT_DOUBLE_EQ(sys.offset, -unit * 3 * 2);
}

// Psi carries the flow onto the Hopfield network: Psi(F(x)) = G(Psi(x)).
TEST(Hopfield, ReparametrizesTheFlow) {
    Rng rng(3);
    for (auto [d, c] : {std::pair{2, 2}, {3, 2}, {3, 3}, {4, 3}}) {
        for (int k = 0; k < 25; ++k) {
            const auto p = ModelParams::uniform(d, c, -8.0 + 16.0 * uniform01(rng));
            const auto sys = build_hopfield(p);
            const auto x = random_simplex_point(d, c, rng);
            const auto lhs = psi_linear(field(x, p), p);
            const auto rhs = hopfield_field(psi(x, p), sys, p.phi);
            for (std::size_t m = 0; m < lhs.size(); ++m) EXPECT_NEAR(lhs[m], rhs[m], 1e-12);
        }
    }
}

TEST(Hopfield, ReparametrizesAlongATrajectory) {
    const auto p = example1::params();
    const auto sys = build_hopfield(p);
    Rng rng(4);
    IntegrateOptions opt;
    opt.store_every = 1;
    const auto traj = integrate(random_simplex_point(3, 2, rng), p, 2.0, 0.001, opt);
    // Central differences of z(t) = Psi(x(t)) against G(z(t)).
    for (std::size_t k = 1; k + 1 < traj.states.size(); k += 97) {
        const auto zm = psi(traj.states[k - 1], p);
        const auto zp = psi(traj.states[k + 1], p);
        const auto g = hopfield_field(psi(traj.states[k], p), sys, p.phi);
        for (std::size_t m = 0; m < g.size(); ++m) EXPECT_NEAR((zp[m] - zm[m]) / 0.002, g[m], 1e-5);
    }
}

TEST(Hopfield, FieldVanishesAtFixedPoints) {
    const auto p = example1::params();
    const auto sys = build_hopfield(p);
    for (const auto& x : example1::points())
        for (double g : hopfield_field(psi(x, p), sys, p.phi)) EXPECT_NEAR(g, 0.0, 1e-11);
}

TEST(Lyapunov, ZeroAlphaValue) {
    const auto p = ModelParams::uniform(3, 2, 0.0);
    Rng rng(5);
    EXPECT_NEAR(lyapunov_on_simplex(random_simplex_point(3, 2, rng), p), 12 * -std::log(2.0), 1e-13);
}

TEST(Lyapunov, RateMatchesFiniteDifferences) {
    Rng rng(6);
    for (int k = 0; k < 100; ++k) {
        const auto p = ModelParams::uniform(3, 2, k % 2 ? 0.75 : example1::alpha());
        const auto sys = build_hopfield(p);
        std::vector<double> z(sys.size());
        for (double& v : z) v = -10.0 + 20.0 * uniform01(rng);
        const auto g = hopfield_field(z, sys, p.phi);
        const double eps = 1e-6;
        std::vector<double> zp = z, zm = z;
        for (std::size_t m = 0; m < z.size(); ++m) {
            zp[m] += eps * g[m];
            zm[m] -= eps * g[m];
        }
        const double fd = (lyapunov(zp, sys, p.phi) - lyapunov(zm, sys, p.phi)) / (2.0 * eps);
        EXPECT_NEAR(fd, lyapunov_rate(z, sys, p.phi), 1e-6);
        EXPECT_LE(lyapunov_rate(z, sys, p.phi), 0.0);
    }
}

TEST(Lyapunov, EqualOnThePermutationOrbit) {
    const auto p = example1::params();
    const auto pts = example1::points();
    const double l0 = lyapunov_on_simplex(pts.front(), p);
    for (const auto& x : pts) EXPECT_NEAR(lyapunov_on_simplex(x, p), l0, 1e-12);
    EXPECT_LT(l0, lyapunov_on_simplex(SimplexPoint::uniform(3, 2), p));
}

TEST(Integrate, CentreStaysPut) {
    const auto p = example1::params();
    const auto traj = integrate(SimplexPoint::uniform(3, 2), p, 5.0, 0.01);
    for (const auto& x : traj.states) EXPECT_LT(linf_distance(x, SimplexPoint::uniform(3, 2)), 1e-15);
    EXPECT_EQ(traj.lyapunov_increases, 0);
}

TEST(Integrate, ContractionRegimeConvergesToCentre) {
    const auto p = ModelParams::uniform(3, 2, 0.75);
    Rng rng(7);
    for (int k = 0; k < 10; ++k) {
        const auto traj = integrate(random_simplex_point(3, 2, rng), p, 50.0, 0.01);
        EXPECT_LT(linf_distance(traj.states.back(), SimplexPoint::uniform(3, 2)), 1e-6);
        EXPECT_NEAR(traj.times.back(), 50.0, 1e-12);
        EXPECT_EQ(traj.n_steps, 5000u);
    }
}

TEST(Integrate, StablePointAttractsNearbyStarts) {
    const auto p = example1::params();
    Rng rng(8);
    for (const auto& y : example1::points()) {
        const auto traj = integrate(nudged(y, rng, 0.01), p, 50.0, 0.01);
        EXPECT_LT(linf_distance(traj.states.back(), y), 1e-6);
        EXPECT_EQ(traj.lyapunov_increases, 0);
    }
}

TEST(Integrate, LyapunovDecreasesAlongStoredStates) {
    const auto p = example1::params();
    Rng rng(9);
    for (int k = 0; k < 10; ++k) {
        const auto traj = integrate(random_simplex_point(3, 2, rng), p, 20.0, 0.01);
        ASSERT_EQ(traj.lyapunov.size(), traj.states.size());
        for (std::size_t s = 1; s < traj.lyapunov.size(); ++s) EXPECT_LE(traj.lyapunov[s], traj.lyapunov[s - 1] + 1e-9);
        EXPECT_EQ(traj.lyapunov_increases, 0);
    }
}

TEST(Integrate, StaysOnTheSimplexFromNearTheBoundary) {
    const auto p = example1::params();
    Rng rng(10);
    for (int k = 0; k < 20; ++k) {
        std::vector<double> v(6);
        for (int i = 0; i < 2; ++i) {
            const int low = static_cast<int>(uniform01(rng) * 3);
            const double rest = 1.0 - 1e-6;
            const double split = uniform01(rng);
            v[i * 3 + low] = 1e-6;
            v[i * 3 + (low + 1) % 3] = rest * split;
            v[i * 3 + (low + 2) % 3] = rest * (1.0 - split);
        }
        const auto traj = integrate(SimplexPoint(3, 2, v), p, 10.0, 0.01);
        EXPECT_GE(traj.min_coordinate, -1e-12);
        EXPECT_LE(traj.max_drift, 1e-9);
        for (const auto& x : traj.states) EXPECT_LT(colour_sum_drift(x.values(), 3, 2), 1e-12);
    }
}

TEST(Integrate, ReportsUnrecoverableDrift) {
    IntegrateOptions opt;
    opt.max_drift = -1.0;
    opt.min_step = 0.01;
    Rng rng(11);
    EXPECT_THROW(integrate(random_simplex_point(3, 2, rng), example1::params(), 1.0, 0.01, opt), IntegrationError);
    EXPECT_THROW(integrate(SimplexPoint::uniform(3, 2), example1::params(), 1.0, 0.0), std::invalid_argument);
}

TEST(Integrate, StoresEndpoints) {
    IntegrateOptions opt;
    opt.store_every = 7;
    const auto traj = integrate(SimplexPoint::uniform(2, 2), ModelParams::uniform(2, 2, 1.0), 1.0, 0.1, opt);
    EXPECT_EQ(traj.times.front(), 0.0);
    EXPECT_NEAR(traj.times.back(), 1.0, 1e-15);
    EXPECT_EQ(traj.states.size(), 3u);  // t = 0, 0.7, 1.0
}

}  // namespace
}  // namespace urn
