// Walks through the three-vertex, two-colour model at large alpha: golden
// checks, a fixed-point census, one ODE path and one urn run.

#include <iomanip>
#include <iostream>

#include "urn/urn.hpp"

int main() {
    const urn::ModelParams p = urn::example1::params();
    std::cout << urn::example1::verify().summary() << '\n';

    const auto search = urn::multi_start_search(p, 200, 42);
    std::cout << "fixed points: " << search.records.size() << '\n';
    for (const auto& r : search.records) {
        std::cout << "  rho " << std::setprecision(4) << r.spectral_radius << "  " << urn::to_string(r.classification)
                  << "  y = (" << r.point(0, 0) << ", " << r.point(1, 0) << ", " << r.point(2, 0) << ")\n";
    }

    urn::Rng rng(7);
    const auto traj = urn::integrate(urn::random_simplex_point(3, 2, rng), p, 30.0, 0.01);
    std::cout << "ODE: L went from " << traj.lyapunov.front() << " to " << traj.lyapunov.back() << '\n';

    const auto run = urn::run(p, 20000, 11);
    const auto x = urn::proportions(run.final_state);
    const auto [id, dist] = urn::nearest_fixed_point(x, search.records);
    std::cout << "urn run ended " << dist << " from fixed point " << id << '\n';
}
