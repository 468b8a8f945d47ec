#pragma once

// Monte Carlo and trace-driven cache simulation.
//
// simulate_random_fill is the empirical counterpart of cache_model.hpp.
// simulate_trace runs a concrete LRU set-associative cache over generated
// address streams (sequential sweeps, conflicting strides, several arrays at
// a conflicting offset, random working sets, and paged memory whose page
// frames may have been scrambled).

#include <collide/cache_model.hpp>
#include <collide/seeding.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace collide {

struct SimConfig {
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    CacheGeometry geometry{1, 1};
    unsigned workers = 0; ///< 0 = hardware concurrency; never affects results
};

struct SimReport {
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t addresses = 0;
    CacheGeometry geometry{1, 1};

    std::uint64_t total_stored = 0;       ///< sum over trials of lines stored
    std::uint64_t total_stored_sq = 0;    ///< sum over trials of (lines stored)^2
    std::uint64_t no_conflict_trials = 0; ///< trials where every set got <= k

    double mean_stored = 0.0;
    double mean_stored_stderr = 0.0;
    double no_conflict_frequency = 0.0;
    double no_conflict_stderr = 0.0;

    /// histogram[j] = number of (trial, set) pairs where exactly j addresses
    /// mapped to the set; j runs 0..A.
    std::vector<std::uint64_t> occupancy_histogram;
};

/// Throw A addresses at m sets uniformly at random, `trials` times.
inline SimReport simulate_random_fill(const SimConfig& config, std::uint64_t addresses) {
    if (config.trials == 0) throw std::invalid_argument("simulate_random_fill: trials must be >= 1");
    const std::uint64_t m = config.geometry.sets();
    const std::uint64_t k = config.geometry.associativity();

    struct Partial {
        std::uint64_t stored = 0;
        std::uint64_t stored_sq = 0;
        std::uint64_t no_conflict = 0;
        std::vector<std::uint64_t> histogram;
    };
    Partial zero;
    zero.histogram.assign(addresses + 1, 0);

    auto run_block = [&](std::uint64_t first, std::uint64_t last, Partial& out) {
        std::vector<std::uint64_t> counts(m);
        for (std::uint64_t t = first; t < last; ++t) {
            std::fill(counts.begin(), counts.end(), 0);
            auto rng = SplitMix64::for_trial(config.seed, t);
            for (std::uint64_t a = 0; a < addresses; ++a) ++counts[rng.below(m)];
            std::uint64_t stored = 0;
            bool overflow = false;
            for (std::uint64_t c : counts) {
                stored += std::min(c, k);
                overflow |= c > k;
                ++out.histogram[c];
            }
            out.stored += stored;
            out.stored_sq += stored * stored;
            out.no_conflict += overflow ? 0 : 1;
        }
    };
    auto merge = [](Partial& total, const Partial& p) {
        total.stored += p.stored;
        total.stored_sq += p.stored_sq;
        total.no_conflict += p.no_conflict;
        for (std::size_t j = 0; j < p.histogram.size(); ++j) total.histogram[j] += p.histogram[j];
    };
    Partial sum = run_trials(config.trials, config.workers, zero, run_block, merge);

    SimReport r;
    r.trials = config.trials;
    r.seed = config.seed;
    r.addresses = addresses;
    r.geometry = config.geometry;
    r.total_stored = sum.stored;
    r.total_stored_sq = sum.stored_sq;
    r.no_conflict_trials = sum.no_conflict;
    r.occupancy_histogram = std::move(sum.histogram);

    const auto T = static_cast<double>(config.trials);
    r.mean_stored = static_cast<double>(sum.stored) / T;
    if (config.trials > 1) {
        const double s = static_cast<double>(sum.stored);
        const double var = (static_cast<double>(sum.stored_sq) - s * s / T) / (T - 1.0);
        r.mean_stored_stderr = std::sqrt(std::max(var, 0.0) / T);
    }
    r.no_conflict_frequency = static_cast<double>(sum.no_conflict) / T;
    r.no_conflict_stderr =
        std::sqrt(r.no_conflict_frequency * (1.0 - r.no_conflict_frequency) / T);
    return r;
}

// ---------------------------------------------------------------------------
// Trace-driven simulation

struct TraceStats {
    std::uint64_t accesses = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;

    /// 0 when there were no accesses.
    double hit_rate() const {
        return accesses == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(accesses);
    }
    void record(bool hit) {
        ++accesses;
        (hit ? hits : misses) += 1;
    }
    friend bool operator==(const TraceStats&, const TraceStats&) = default;
};

/// `overall` includes the cold first repetition; `steady_state` skips it.
struct TraceReport {
    TraceStats overall;
    TraceStats steady_state;
};

/// Set-associative cache with LRU replacement inside each set.
class SetAssociativeCache {
public:
    explicit SetAssociativeCache(const CacheGeometry& geom, std::uint64_t line_bytes = 1)
        : geom_(geom), line_bytes_(line_bytes), tags_(geom.capacity()), fill_(geom.sets(), 0) {
        if (line_bytes == 0) throw std::invalid_argument("cache line size must be >= 1");
    }

    const CacheGeometry& geometry() const { return geom_; }
    std::uint64_t line_bytes() const { return line_bytes_; }

    std::uint64_t set_of(std::uint64_t address) const { return (address / line_bytes_) % geom_.sets(); }

    /// Returns true on a hit.  Misses load the line, evicting the least
    /// recently used line of the set when it is full.
    bool access(std::uint64_t address) {
        const std::uint64_t line = address / line_bytes_;
        const std::uint64_t set = line % geom_.sets();
        const std::uint64_t k = geom_.associativity();
        // Ways of a set are kept most-recently-used first.
        auto* ways = tags_.data() + set * k;
        std::uint64_t& fill = fill_[set];
        auto* end = ways + fill;
        auto* found = std::find(ways, end, line);
        if (found != end) {
            std::rotate(ways, found, found + 1);
            return true;
        }
        if (fill < k) ++fill;
        std::shift_right(ways, ways + fill, 1);
        ways[0] = line;
        return false;
    }

private:
    CacheGeometry geom_;
    std::uint64_t line_bytes_;
    std::vector<std::uint64_t> tags_;
    std::vector<std::uint64_t> fill_;
};

enum class PageMapping { identity, permuted };

namespace scenario {

/// Lines 0..length-1 in order.
struct Sequential {
    std::uint64_t length = 1;
};

/// Two interleaved streams, x[i] at line i and y[i] at line i + stride.
struct Strided {
    std::uint64_t length = 1;
    std::uint64_t stride = 1;
};

/// array_count arrays based conflicting_offset lines apart, visited
/// element-wise: a0[i], a1[i], ..., then i+1.
struct MultiArray {
    std::uint64_t length = 1;
    std::uint64_t array_count = 1;
    std::uint64_t conflicting_offset = 1;
};

/// A fixed working set of `length` lines drawn uniformly from a large address
/// space, visited in the same order every repetition.
struct UniformRandom {
    std::uint64_t length = 1;
    std::uint64_t seed = 0;
    std::uint64_t universe = std::uint64_t{1} << 40;
};

/// Sequential sweep over the first `sweep_pages` virtual pages of a physical
/// memory of page_count frames.  Under `permuted`, virtual page v lives in
/// frame perm[v] for a uniformly random permutation of all frames.
struct Paged {
    std::uint64_t page_count = 1;
    std::uint64_t page_size = 1; ///< in lines
    PageMapping mapping = PageMapping::identity;
    std::uint64_t seed = 0;
    std::uint64_t sweep_pages = 0; ///< 0 = all pages
};

} // namespace scenario

using Scenario = std::variant<scenario::Sequential, scenario::Strided, scenario::MultiArray,
                              scenario::UniformRandom, scenario::Paged>;

struct AddressStream {
    Scenario scenario = scenario::Sequential{};
    std::uint64_t repetitions = 2;
    std::uint64_t line_bytes = 1;
};

/// Byte addresses of one repetition of the stream.
inline std::vector<std::uint64_t> generate_pass(const AddressStream& stream) {
    if (stream.line_bytes == 0) throw std::invalid_argument("address stream: line size must be >= 1");
    std::vector<std::uint64_t> lines;
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, scenario::Sequential>) {
                if (s.length == 0) throw std::invalid_argument("sequential stream: length must be >= 1");
                lines.resize(s.length);
                std::iota(lines.begin(), lines.end(), std::uint64_t{0});
            } else if constexpr (std::is_same_v<S, scenario::Strided>) {
                if (s.length == 0) throw std::invalid_argument("strided stream: length must be >= 1");
                for (std::uint64_t i = 0; i < s.length; ++i) {
                    lines.push_back(i);
                    lines.push_back(i + s.stride);
                }
            } else if constexpr (std::is_same_v<S, scenario::MultiArray>) {
                if (s.length == 0 || s.array_count == 0)
                    throw std::invalid_argument("multi-array stream: length and array count must be >= 1");
                for (std::uint64_t i = 0; i < s.length; ++i)
                    for (std::uint64_t a = 0; a < s.array_count; ++a)
                        lines.push_back(a * s.conflicting_offset + i);
            } else if constexpr (std::is_same_v<S, scenario::UniformRandom>) {
                if (s.length == 0 || s.universe < s.length)
                    throw std::invalid_argument("random stream: need 1 <= length <= universe");
                auto rng = SplitMix64::for_trial(s.seed, 0);
                std::vector<std::uint64_t> seen;
                while (lines.size() < s.length) {
                    const std::uint64_t line = rng.below(s.universe);
                    auto it = std::lower_bound(seen.begin(), seen.end(), line);
                    if (it != seen.end() && *it == line) continue;
                    seen.insert(it, line);
                    lines.push_back(line);
                }
            } else {
                if (s.page_count == 0 || s.page_size == 0)
                    throw std::invalid_argument("paged stream: page count and size must be >= 1");
                const std::uint64_t sweep = s.sweep_pages == 0 ? s.page_count : s.sweep_pages;
                if (sweep > s.page_count)
                    throw std::invalid_argument("paged stream: sweep exceeds page count");
                std::vector<std::uint64_t> frame(s.page_count);
                std::iota(frame.begin(), frame.end(), std::uint64_t{0});
                if (s.mapping == PageMapping::permuted) {
                    auto rng = SplitMix64::for_trial(s.seed, 0);
                    for (std::uint64_t i = s.page_count - 1; i > 0; --i)
                        std::swap(frame[i], frame[rng.below(i + 1)]);
                }
                lines.reserve(sweep * s.page_size);
                for (std::uint64_t v = 0; v < sweep; ++v)
                    for (std::uint64_t off = 0; off < s.page_size; ++off)
                        lines.push_back(frame[v] * s.page_size + off);
            }
        },
        stream.scenario);
    for (auto& l : lines) l *= stream.line_bytes;
    return lines;
}

/// Replay `stream` through a fresh LRU cache.  Pure function of its inputs.
inline TraceReport simulate_trace(const CacheGeometry& geometry, const AddressStream& stream) {
    if (stream.repetitions == 0) throw std::invalid_argument("address stream: repetitions must be >= 1");
    const auto pass = generate_pass(stream);
    SetAssociativeCache cache(geometry, stream.line_bytes);
    TraceReport report;
    for (std::uint64_t rep = 0; rep < stream.repetitions; ++rep) {
        for (std::uint64_t addr : pass) {
            const bool hit = cache.access(addr);
            report.overall.record(hit);
            if (rep > 0) report.steady_state.record(hit);
        }
    }
    return report;
}

struct PagedDegradation {
    TraceReport identity;
    TraceReport permuted;
};

/// Sweep a working set of `sweep_pages` pages (0 = as many pages as fit in the
/// cache) under an identity page table and under a random permutation of all
/// page_count frames.  A freshly booted machine hands out frames in order;
/// after long uptime the free list is scrambled and orderly sweeps turn into
/// random placement.
inline PagedDegradation simulate_paged_degradation(const CacheGeometry& geometry,
                                                   std::uint64_t page_count,
                                                   std::uint64_t page_size, std::uint64_t seed,
                                                   std::uint64_t sweep_pages = 0,
                                                   std::uint64_t repetitions = 3) {
    if (page_size == 0 || page_count == 0)
        throw std::invalid_argument("paged degradation: page count and size must be >= 1");
    const std::uint64_t span = page_count * page_size;
    if (span < geometry.capacity())
        throw std::invalid_argument("paged degradation: span of " + std::to_string(span) +
                                    " lines is smaller than cache capacity " +
                                    std::to_string(geometry.capacity()));
    if (sweep_pages == 0) sweep_pages = std::max<std::uint64_t>(1, geometry.capacity() / page_size);
    sweep_pages = std::min(sweep_pages, page_count);

    AddressStream stream;
    stream.repetitions = repetitions;
    scenario::Paged paged{page_count, page_size, PageMapping::identity, seed, sweep_pages};
    stream.scenario = paged;
    PagedDegradation out;
    out.identity = simulate_trace(geometry, stream);
    paged.mapping = PageMapping::permuted;
    stream.scenario = paged;
    out.permuted = simulate_trace(geometry, stream);
    return out;
}

} // namespace collide
