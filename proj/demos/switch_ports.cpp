// 16 destinations on 14 ports: exact, brute-force and sampled odds that
// 14 distinct destinations land on 14 distinct ports.
#include <collide/collide.hpp>

#include <iostream>

using namespace collide;

int main() {
    const SwitchGeometry g(16, 14);
    const Rational exact = no_collision_probability(g);
    const auto count = enumerate_exact(g);
    const auto sim = simulate_traffic(g, 1'000'000, 7);

    std::cout << "exact:       " << to_string(exact) << "\n";
    std::cout << "enumerated:  " << count.favorable << " / " << count.total << "\n";
    std::cout << "simulated:   " << format_fixed(sim.no_collision_frequency, 5) << " +/- "
              << format_fixed(sim.standard_error, 5) << "\n";
    std::cout << "mean colliding ports: " << format_fixed(sim.mean_collisions(), 3) << "\n";
}
