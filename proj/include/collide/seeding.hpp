#pragma once

// Counter-based seeding and a deterministic parallel trial runner shared by
// the Monte Carlo simulators.
//
// Trial t always draws from a stream derived from (seed, t) alone, and
// per-block partial results are merged in block order, so output does not
// depend on how many worker threads ran.

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace collide {

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// SplitMix64 stream.  Satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

    /// Stream for one trial: mixes the master seed with the trial index.
    static constexpr SplitMix64 for_trial(std::uint64_t seed, std::uint64_t trial) {
        return SplitMix64(splitmix64_mix(seed ^ splitmix64_mix(trial + 0x9e3779b97f4a7c15ULL)));
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    constexpr result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return splitmix64_mix(state_);
    }

    /// Uniform integer in [0, bound), bound > 0.  Lemire's multiply-shift
    /// with rejection, so exactly uniform and identical on every platform.
    std::uint64_t below(std::uint64_t bound) {
        unsigned __int128 product = static_cast<unsigned __int128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(product);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                product = static_cast<unsigned __int128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

private:
    std::uint64_t state_;
};

inline unsigned resolve_workers(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Run trials [0, trials) in fixed-size blocks.  `run_block(first, last,
/// partial)` accumulates into a copy of `zero`; the block partials are then
/// folded with `merge(total, partial)` in ascending block order.
template <class Partial, class RunBlock, class Merge>
Partial run_trials(std::uint64_t trials, unsigned workers, const Partial& zero, RunBlock run_block,
                   Merge merge) {
    constexpr std::uint64_t kBlock = 4096;
    const std::uint64_t blocks = (trials + kBlock - 1) / kBlock;
    std::vector<Partial> partials(blocks, zero);
    const auto width = static_cast<unsigned>(
        std::min<std::uint64_t>(resolve_workers(workers), std::max<std::uint64_t>(blocks, 1)));

    auto worker = [&](unsigned id) {
        for (std::uint64_t b = id; b < blocks; b += width)
            run_block(b * kBlock, std::min(trials, (b + 1) * kBlock), partials[b]);
    };
    if (width <= 1) {
        worker(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(width);
        for (unsigned id = 0; id < width; ++id) pool.emplace_back(worker, id);
    }
    Partial total = zero;
    for (const auto& p : partials) merge(total, p);
    return total;
}

} // namespace collide
