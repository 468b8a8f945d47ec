#include <collide/switch_model.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace collide;

namespace {

Rational frac(std::uint64_t num, std::uint64_t den) { return Rational(BigInt(num), BigInt(den)); }

} // namespace

TEST(SwitchGeometry, Validation) {
    EXPECT_THROW(SwitchGeometry(3, 4), std::invalid_argument);
    EXPECT_THROW(SwitchGeometry(9, 4), std::invalid_argument);
    EXPECT_THROW(SwitchGeometry(0, 0), std::invalid_argument);
    const SwitchGeometry g(16, 14);
    EXPECT_EQ(g.total_ports(), 30u);
    EXPECT_EQ(g.oversubscription(), 2u);
    EXPECT_EQ(g.single_ports(), 12u);
}

TEST(PortMap, CanonicalMaps) {
    for (auto [n, k, doubles] : std::vector<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>>{
             {4, 4, 0}, {6, 4, 2}, {16, 14, 2}, {8, 4, 4}}) {
        const auto map = build_port_map(SwitchGeometry(n, k));
        std::uint64_t two = 0, one = 0;
        for (std::uint32_t p = 0; p < k; ++p) (map.load(p) == 2 ? two : one) += 1;
        EXPECT_EQ(two, doubles);
        EXPECT_EQ(one, 2 * k - n);
    }
    const auto identity = build_port_map(SwitchGeometry(4, 4));
    for (std::uint32_t d = 0; d < 4; ++d) EXPECT_EQ(identity.port_of(d), d);
    const auto six = build_port_map(SwitchGeometry(6, 4));
    EXPECT_EQ(six.destination_to_port(), (std::vector<std::uint32_t>{0, 0, 1, 1, 2, 3}));
}

TEST(PortMap, RejectsInvalidTables) {
    const SwitchGeometry g(6, 4);
    EXPECT_THROW(PortMap(g, {0, 0, 0, 1, 2, 3}), std::invalid_argument); // triple port
    EXPECT_THROW(PortMap(g, {0, 0, 1, 1, 2, 2}), std::invalid_argument); // port 3 unused
    EXPECT_THROW(PortMap(g, {0, 0, 1, 1, 2}), std::invalid_argument);
    EXPECT_THROW(PortMap(g, {0, 0, 1, 1, 2, 9}), std::invalid_argument);
}

TEST(NoCollision, Examples) {
    for (std::uint64_t k = 1; k <= 10; ++k) EXPECT_EQ(no_collision_probability(SwitchGeometry(k, k)), 1);
    EXPECT_EQ(no_collision_probability(SwitchGeometry(16, 14)), frac(1, 30));
    EXPECT_EQ(no_collision_probability(SwitchGeometry(4, 2)), frac(2, 3));
    EXPECT_EQ(to_string(no_collision_probability(SwitchGeometry(16, 14))), "1/30");
    EXPECT_NEAR(to_double(no_collision_probability(SwitchGeometry(16, 14))), 1.0 / 30.0, 1e-17);
}

TEST(NoCollision, LargeGeometriesStayExact) {
    // C(100,50) ~ 1e29 does not fit in 64 bits.
    const Rational p = no_collision_probability(SwitchGeometry(100, 50));
    EXPECT_EQ(p, Rational(BigInt(1) << 50, exact_binomial(100, 50)));
    EXPECT_GT(p, 0);
}

TEST(NoCollision, BoundsAndMonotonicity) {
    for (std::uint64_t k = 1; k <= 40; ++k) {
        Rational prev = 2;
        for (std::uint64_t n = k; n <= 2 * k; ++n) {
            const Rational p = no_collision_probability(SwitchGeometry(n, k));
            EXPECT_GT(p, 0);
            EXPECT_LE(p, 1);
            if (n < 2 * k) {
                EXPECT_EQ(p == 1, n == k) << n << "," << k;
                EXPECT_LT(p, prev) << n << "," << k;
            } else {
                // The step into n = 2k has ratio 2(n-k)/n = 1.
                EXPECT_EQ(p, prev) << n << "," << k;
            }
            prev = p;
        }
    }
    // Hence a single destination pair on one port never collides.
    EXPECT_EQ(no_collision_probability(SwitchGeometry(2, 1)), 1);
}

TEST(Recurrence, Examples) {
    EXPECT_EQ(recurrence_ratio(6, 4), frac(2, 3));
    for (std::uint64_t k = 1; k <= 20; ++k) EXPECT_EQ(recurrence_ratio(k + 1, k), frac(2, k + 1));
    EXPECT_THROW(recurrence_ratio(4, 4), std::invalid_argument);
    EXPECT_THROW(recurrence_ratio(9, 4), std::invalid_argument);
}

TEST(Recurrence, IdentityHoldsExactly) {
    for (std::uint64_t k = 1; k <= 100; ++k)
        for (std::uint64_t n = k + 1; n <= std::min<std::uint64_t>(2 * k, 100); ++n)
            ASSERT_EQ(no_collision_probability(SwitchGeometry(n, k)),
                      no_collision_probability(SwitchGeometry(n - 1, k)) * recurrence_ratio(n, k))
                << n << "," << k;
}

TEST(ClosedForms, Examples) {
    EXPECT_EQ(closed_form_two_way(14), frac(1, 30));
    EXPECT_EQ(closed_form_two_way(2), frac(2, 3));
    EXPECT_EQ(closed_form_two_way_ports(30), frac(1, 30));
    EXPECT_EQ(closed_form_one_way(2), frac(2, 3));
    EXPECT_THROW(closed_form_two_way(1), std::invalid_argument);
    EXPECT_THROW(closed_form_two_way_ports(31), std::invalid_argument);
}

TEST(ClosedForms, AgreeWithGeneralFormula) {
    for (std::uint64_t k = 2; k <= 50; ++k) {
        EXPECT_EQ(closed_form_one_way(k), no_collision_probability(SwitchGeometry(k + 1, k)));
        EXPECT_EQ(closed_form_two_way(k), no_collision_probability(SwitchGeometry(k + 2, k)));
        EXPECT_EQ(closed_form_two_way_ports(2 * k + 2), closed_form_two_way(k));
        // 8/(n(n-1)) with n = k+2.
        EXPECT_EQ(closed_form_two_way(k), frac(8, (k + 2) * (k + 1)));
    }
}

TEST(Enumerate, Examples) {
    auto c = enumerate_exact(SwitchGeometry(4, 2));
    EXPECT_EQ(c.favorable, 4);
    EXPECT_EQ(c.total, 6);
    c = enumerate_exact(SwitchGeometry(5, 5));
    EXPECT_EQ(c.favorable, 1);
    EXPECT_EQ(c.total, 1);
    c = enumerate_exact(SwitchGeometry(16, 14));
    EXPECT_EQ(c.favorable, 4);
    EXPECT_EQ(c.total, 120);
    EXPECT_EQ(c.probability(), frac(1, 30));
}

TEST(Enumerate, MatchesPermutationOracle) {
    for (std::uint64_t k = 1; k <= 9; ++k)
        for (std::uint64_t n = k; n <= 2 * k && n <= 16; ++n) {
            const auto map = build_port_map(SwitchGeometry(n, k));
            const auto [fav, total] = oracle::count_collision_free(map.destination_to_port(), k);
            const auto c = enumerate_exact(map);
            EXPECT_EQ(c.favorable, fav) << n << "," << k;
            EXPECT_EQ(c.total, total) << n << "," << k;
            std::uint64_t mass = 0;
            for (auto v : c.by_collisions) mass += v;
            EXPECT_EQ(BigInt(mass), c.total);
        }
}

TEST(Enumerate, AnyPairingGivesSameStatistics) {
    std::mt19937_64 gen(5);
    for (auto [n, k] : std::vector<std::pair<std::uint64_t, std::uint64_t>>{{6, 4}, {10, 6}, {12, 7}, {14, 7}}) {
        const SwitchGeometry g(n, k);
        auto table = build_port_map(g).destination_to_port();
        std::shuffle(table.begin(), table.end(), gen);
        const PortMap shuffled(g, table);
        const auto a = enumerate_exact(g);
        const auto b = enumerate_exact(shuffled);
        EXPECT_EQ(a.favorable, b.favorable);
        EXPECT_EQ(a.by_collisions, b.by_collisions);
    }
}

TEST(Enumerate, RejectsOverCap) {
    EXPECT_THROW(enumerate_exact(SwitchGeometry(30, 15), 1000), std::length_error);
}

TEST(Simulate, Examples) {
    const auto r = simulate_traffic(SwitchGeometry(7, 7), 1000, 3);
    EXPECT_EQ(r.no_collision_frequency, 1.0);
    const std::uint64_t T = 200'000;
    const auto s = simulate_traffic(SwitchGeometry(4, 2), T, 3);
    EXPECT_LE(std::abs(s.no_collision_frequency - 2.0 / 3.0), 4 * std::sqrt(2.0 / 9.0 / T));
}

TEST(Simulate, HistogramSupportAndMass) {
    const auto r = simulate_traffic(SwitchGeometry(12, 7), 50'000, 8);
    ASSERT_EQ(r.collision_count_distribution.size(), 6u);
    std::uint64_t mass = 0;
    for (auto v : r.collision_count_distribution) mass += v;
    EXPECT_EQ(mass, r.trials);
}

TEST(Simulate, FullOversubscriptionMeanMatchesEnumeration) {
    // n = 2k: every port is double and C = k - (distinct ports hit).
    for (std::uint64_t k : {3, 5, 8}) {
        const SwitchGeometry g(2 * k, k);
        const auto exact = enumerate_exact(g);
        double mean = 0.0, second = 0.0;
        const double total = exact.total.convert_to<double>();
        for (std::size_t c = 0; c < exact.by_collisions.size(); ++c) {
            mean += static_cast<double>(c * exact.by_collisions[c]) / total;
            second += static_cast<double>(c * c * exact.by_collisions[c]) / total;
        }
        const std::uint64_t T = 100'000;
        const auto r = simulate_traffic(g, T, 21);
        const double se = std::sqrt((second - mean * mean) / T);
        EXPECT_LE(std::abs(r.mean_collisions() - mean), 4 * se) << k;
    }
}

TEST(Simulate, ConsistentAcrossManySeeds) {
    const SwitchGeometry g(6, 4);
    const double p = to_double(no_collision_probability(g));
    const std::uint64_t T = 5'000;
    const double band = 4 * std::sqrt(p * (1 - p) / T);
    int inside = 0;
    const int experiments = 200;
    for (int s = 0; s < experiments; ++s)
        inside += std::abs(simulate_traffic(g, T, 1000 + s).no_collision_frequency - p) <= band;
    EXPECT_GE(inside, 0.99 * experiments);
}

TEST(Simulate, ReproducibleAcrossWorkerCounts) {
    const auto a = simulate_traffic(SwitchGeometry(16, 14), 30'000, 77, 1);
    const auto b = simulate_traffic(SwitchGeometry(16, 14), 30'000, 77, 5);
    EXPECT_EQ(a.collision_count_distribution, b.collision_count_distribution);
}

TEST(Sweep, Rows) {
    const auto one = sweep_oversubscription(SweepMode::one_way, 2, 4);
    ASSERT_EQ(one.size(), 3u);
    EXPECT_EQ(one[0].probability, frac(2, 3));
    EXPECT_EQ(one[1].probability, frac(1, 2));
    EXPECT_EQ(one[2].probability, frac(2, 5));
    const auto two = sweep_oversubscription(SweepMode::two_way, 14, 14);
    ASSERT_EQ(two.size(), 1u);
    EXPECT_EQ(two[0].inbound, 16u);
    EXPECT_EQ(two[0].probability, frac(1, 30));
    EXPECT_THROW(sweep_oversubscription(SweepMode::one_way, 1, 4), std::invalid_argument);
    EXPECT_THROW(sweep_oversubscription(SweepMode::one_way, 5, 4), std::invalid_argument);
}
