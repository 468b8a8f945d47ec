// A 32 KiB, 8-way L1 with 64-byte lines: how much of a randomly placed
// 512-line buffer survives, and how a contiguous buffer behaves instead.
#include <collide/collide.hpp>

#include <iostream>

using namespace collide;

int main() {
    const CacheGeometry l1(64, 8);
    std::cout << "expected lines kept: " << format_fixed(expected_stored(l1), 1) << " of " << l1.capacity() << "\n";

    const auto mc = simulate_random_fill(SimConfig{100'000, 1, l1, 0}, l1.capacity());
    std::cout << "monte carlo:         " << format_fixed(mc.mean_stored, 1) << " +/- "
              << format_fixed(mc.mean_stored_stderr, 2) << "\n";

    AddressStream contiguous;
    contiguous.scenario = scenario::Sequential{l1.capacity()};
    contiguous.repetitions = 4;
    contiguous.line_bytes = 64;
    std::cout << "contiguous buffer steady-state hit rate: "
              << format_fixed(100 * simulate_trace(l1, contiguous).steady_state.hit_rate(), 1) << "%\n";
}
