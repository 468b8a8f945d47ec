// Classic birthday problem as a direct-mapped cache with 365 sets.
#include <collide/collide.hpp>

#include <iostream>

int main() {
    const collide::CacheGeometry days(365, 1);
    for (std::uint64_t people : {10, 23, 30, 50, 70}) {
        const auto p = collide::no_conflict_probability(days, {people});
        std::cout << people << " people: P(no shared birthday) = " << collide::format_scientific(p, 4) << "\n";
    }
}
