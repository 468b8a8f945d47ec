#include <collide/cache_sim.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace collide;

namespace {

SimReport fill(std::uint64_t m, std::uint64_t k, std::uint64_t A, std::uint64_t trials, std::uint64_t seed = 1,
               unsigned workers = 1) {
    return simulate_random_fill(SimConfig{trials, seed, CacheGeometry(m, k), workers}, A);
}

AddressStream stream_of(Scenario s, std::uint64_t reps, std::uint64_t line_bytes = 1) {
    AddressStream st;
    st.scenario = s;
    st.repetitions = reps;
    st.line_bytes = line_bytes;
    return st;
}

} // namespace

TEST(SplitMix64, BelowIsInRangeAndRoughlyUniform) {
    auto rng = SplitMix64::for_trial(3, 0);
    std::vector<int> hist(7, 0);
    for (int i = 0; i < 70'000; ++i) {
        const auto v = rng.below(7);
        ASSERT_LT(v, 7u);
        ++hist[v];
    }
    for (int h : hist) EXPECT_NEAR(h, 10'000, 500);
    EXPECT_EQ(rng.below(1), 0u);
}

TEST(SplitMix64, TrialStreamsDiffer) {
    auto a = SplitMix64::for_trial(1, 0);
    auto b = SplitMix64::for_trial(1, 1);
    auto c = SplitMix64::for_trial(2, 0);
    const auto x = a();
    EXPECT_NE(x, b());
    EXPECT_NE(x, c());
}

TEST(RandomFill, SingleSetExactlyFull) {
    const auto r = fill(1, 5, 5, 100);
    EXPECT_EQ(r.mean_stored, 5.0);
    EXPECT_EQ(r.no_conflict_frequency, 1.0);
    EXPECT_EQ(r.occupancy_histogram[5], 100u);
}

TEST(RandomFill, TwoSetsTwoAddresses) {
    const std::uint64_t T = 1'000'000;
    const auto r = fill(2, 1, 2, T, 99);
    const double se = std::sqrt(0.25 / static_cast<double>(T));
    EXPECT_LE(std::abs(r.no_conflict_frequency - 0.5), 4 * se);
}

TEST(RandomFill, MeanStoredNearAnalytic) {
    const std::uint64_t T = 20'000;
    for (auto [m, k] : std::vector<std::pair<std::uint64_t, std::uint64_t>>{{1000, 1}, {250, 4}, {64, 8}}) {
        const auto r = fill(m, k, m * k, T, 5);
        const double want = expected_stored(CacheGeometry(m, k));
        EXPECT_LE(std::abs(r.mean_stored - want), 4 * r.mean_stored_stderr) << m << "x" << k;
    }
}

TEST(RandomFill, NoConflictFrequencyNearAnalytic) {
    const std::uint64_t T = 200'000;
    for (auto [m, k, A] : std::vector<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>>{
             {25, 4, 50}, {50, 4, 100}, {365, 1, 23}, {10, 2, 12}}) {
        const double p = no_conflict_probability(CacheGeometry(m, k), {A}).value();
        const auto r = fill(m, k, A, T, 11);
        const double se = std::sqrt(p * (1 - p) / static_cast<double>(T));
        EXPECT_LE(std::abs(r.no_conflict_frequency - p), 4 * se) << m << "," << k << "," << A;
    }
}

TEST(RandomFill, HistogramAndBoundsInvariants) {
    const std::uint64_t T = 5000, m = 40, k = 3, A = 90;
    const auto r = fill(m, k, A, T, 17);
    ASSERT_EQ(r.occupancy_histogram.size(), A + 1);
    std::uint64_t sets = 0, addrs = 0;
    for (std::size_t j = 0; j < r.occupancy_histogram.size(); ++j) {
        sets += r.occupancy_histogram[j];
        addrs += j * r.occupancy_histogram[j];
    }
    EXPECT_EQ(sets, T * m);
    EXPECT_EQ(addrs, T * A);
    EXPECT_GE(r.no_conflict_frequency, 0.0);
    EXPECT_LE(r.no_conflict_frequency, 1.0);
    EXPECT_LE(r.mean_stored, static_cast<double>(m * k));
    EXPECT_EQ(r.seed, 17u);
}

TEST(RandomFill, ReproducibleAcrossWorkerCounts) {
    const auto a = fill(100, 4, 300, 20'000, 42, 1);
    const auto b = fill(100, 4, 300, 20'000, 42, 3);
    const auto c = fill(100, 4, 300, 20'000, 42, 8);
    EXPECT_EQ(a.total_stored, b.total_stored);
    EXPECT_EQ(a.total_stored_sq, c.total_stored_sq);
    EXPECT_EQ(a.no_conflict_trials, c.no_conflict_trials);
    EXPECT_EQ(a.occupancy_histogram, b.occupancy_histogram);
    EXPECT_EQ(a.mean_stored, c.mean_stored);
    const auto d = fill(100, 4, 300, 20'000, 43, 1);
    EXPECT_NE(a.occupancy_histogram, d.occupancy_histogram);
}

TEST(RandomFill, RejectsZeroTrials) {
    EXPECT_THROW(simulate_random_fill(SimConfig{0, 1, CacheGeometry(2, 2)}, 3), std::invalid_argument);
}

TEST(LruCache, FullSetReaccessedInOrderHits) {
    for (std::uint64_t k : {1, 2, 4, 8, 16}) {
        SetAssociativeCache cache(CacheGeometry(4, k));
        for (std::uint64_t i = 0; i < k; ++i) EXPECT_FALSE(cache.access(i * 4)); // all map to set 0
        for (int round = 0; round < 3; ++round)
            for (std::uint64_t i = 0; i < k; ++i) EXPECT_TRUE(cache.access(i * 4)) << "k=" << k;
    }
}

TEST(LruCache, CyclicOverflowAlwaysMisses) {
    for (std::uint64_t k : {1, 2, 4, 8}) {
        SetAssociativeCache cache(CacheGeometry(4, k));
        for (int round = 0; round < 5; ++round)
            for (std::uint64_t i = 0; i <= k; ++i) EXPECT_FALSE(cache.access(i * 4)) << "k=" << k;
    }
}

TEST(LruCache, EvictsLeastRecentlyUsed) {
    SetAssociativeCache cache(CacheGeometry(1, 2));
    cache.access(1);
    cache.access(2);
    EXPECT_TRUE(cache.access(1)); // 2 is now LRU
    cache.access(3);              // evicts 2
    EXPECT_TRUE(cache.access(1));
    EXPECT_FALSE(cache.access(2));
}

TEST(LruCache, LineGranularity) {
    SetAssociativeCache cache(CacheGeometry(64, 8), 64);
    EXPECT_FALSE(cache.access(0));
    EXPECT_TRUE(cache.access(63));
    EXPECT_FALSE(cache.access(64));
    EXPECT_EQ(cache.set_of(64 * 65), 1u);
}

TEST(Trace, SequentialCapacityStreamHitsAfterFirstPass) {
    const CacheGeometry g(1024, 1);
    const auto r = simulate_trace(g, stream_of(scenario::Sequential{1024}, 2));
    EXPECT_EQ(r.overall.accesses, 2048u);
    EXPECT_EQ(r.overall.misses, 1024u);
    EXPECT_EQ(r.steady_state.hit_rate(), 1.0);
    EXPECT_EQ(r.overall.hits + r.overall.misses, r.overall.accesses);
}

TEST(Trace, SequentialXeonL1WithByteAddresses) {
    const CacheGeometry g(64, 8);
    const auto r = simulate_trace(g, stream_of(scenario::Sequential{512}, 3, 64));
    EXPECT_EQ(r.steady_state.hit_rate(), 1.0);
    const auto over = simulate_trace(g, stream_of(scenario::Sequential{513}, 3, 64));
    EXPECT_LT(over.steady_state.hit_rate(), 1.0);
}

TEST(Trace, TwoStreamsAtCapacityStrideNeverHit) {
    const CacheGeometry g(512, 1);
    const auto r = simulate_trace(g, stream_of(scenario::Strided{512, 512}, 4));
    EXPECT_EQ(r.steady_state.hits, 0u);
    EXPECT_EQ(r.steady_state.accesses, 3u * 1024u);
    // Same two streams fit once the cache is 2-way.
    const auto r2 = simulate_trace(CacheGeometry(512, 2), stream_of(scenario::Strided{512, 1024}, 4));
    EXPECT_EQ(r2.steady_state.hit_rate(), 1.0);
}

TEST(Trace, FourConflictingArraysFitFourWay) {
    const CacheGeometry g(256, 4);
    const auto r = simulate_trace(g, stream_of(scenario::MultiArray{256, 4, g.capacity()}, 3));
    EXPECT_EQ(r.steady_state.hit_rate(), 1.0);
    // A fifth array at the same offset thrashes every set.
    const auto r5 = simulate_trace(g, stream_of(scenario::MultiArray{256, 5, g.capacity()}, 3));
    EXPECT_EQ(r5.steady_state.hits, 0u);
}

TEST(Trace, RandomWorkingSetIsDeterministicAndBelowPerfect) {
    const CacheGeometry g(256, 4);
    const auto s = stream_of(scenario::UniformRandom{1024, 9}, 3);
    const auto a = simulate_trace(g, s);
    const auto b = simulate_trace(g, s);
    EXPECT_EQ(a.overall, b.overall);
    EXPECT_EQ(a.steady_state, b.steady_state);
    EXPECT_GT(a.steady_state.hit_rate(), 0.0);
    EXPECT_LT(a.steady_state.hit_rate(), 1.0);
}

TEST(Trace, RandomStreamHasDistinctLines) {
    auto pass = generate_pass(stream_of(scenario::UniformRandom{5000, 3, 6000}, 1));
    std::sort(pass.begin(), pass.end());
    EXPECT_EQ(std::adjacent_find(pass.begin(), pass.end()), pass.end());
}

TEST(Trace, RejectsBadStreams) {
    EXPECT_THROW(simulate_trace(CacheGeometry(4, 1), stream_of(scenario::Sequential{0}, 1)), std::invalid_argument);
    EXPECT_THROW(simulate_trace(CacheGeometry(4, 1), stream_of(scenario::Sequential{4}, 0)), std::invalid_argument);
    EXPECT_THROW(generate_pass(stream_of(scenario::Sequential{4}, 1, 0)), std::invalid_argument);
}

TEST(PagedDegradation, SpanEqualToCapacityIdentityAllHits) {
    const CacheGeometry g(4096, 1);
    const auto d = simulate_paged_degradation(g, 64, 64, 1);
    EXPECT_EQ(d.identity.steady_state.hit_rate(), 1.0);
}

TEST(PagedDegradation, IdentitySweepOverTwiceCapacityNeverHits) {
    const CacheGeometry g(4096, 1);
    const auto d = simulate_paged_degradation(g, 128, 64, 1, /*sweep_pages=*/128);
    EXPECT_EQ(d.identity.steady_state.hits, 0u);
}

TEST(PagedDegradation, PermutedFramesLoseHits) {
    const CacheGeometry g(4096, 1);
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto d = simulate_paged_degradation(g, 128, 64, seed);
        EXPECT_EQ(d.identity.steady_state.hit_rate(), 1.0);
        EXPECT_LT(d.permuted.steady_state.hit_rate(), d.identity.steady_state.hit_rate());
        EXPECT_EQ(d.permuted.steady_state.accesses, d.identity.steady_state.accesses);
    }
}

TEST(PagedDegradation, RejectsSpanBelowCapacity) {
    EXPECT_THROW(simulate_paged_degradation(CacheGeometry(4096, 1), 32, 64, 1), std::invalid_argument);
}
