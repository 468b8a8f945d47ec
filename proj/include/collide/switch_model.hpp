#pragma once

// Collision statistics for an oversubscribed switch with static destination
// routing.  n destinations share k output ports (k <= n <= 2k), so n-k ports
// are "double" (two destinations) and 2k-n are "single".  When k messages go
// to k distinct destinations at once, they are collision free only if no
// double port receives both of its destinations.

#include <collide/seeding.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace collide {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// "p/q", or just "p" for integers.
inline std::string to_string(const Rational& r) {
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    return den == 1 ? num.str() : num.str() + "/" + den.str();
}

inline BigInt exact_binomial(std::uint64_t n, std::uint64_t j) {
    if (j > n) return 0;
    j = std::min(j, n - j);
    BigInt c = 1;
    for (std::uint64_t i = 1; i <= j; ++i) c = c * (n - j + i) / i;
    return c;
}

class SwitchGeometry {
public:
    SwitchGeometry(std::uint64_t inbound, std::uint64_t outbound)
        : inbound_(inbound), outbound_(outbound) {
        if (outbound == 0) throw std::invalid_argument("switch geometry: outbound ports must be >= 1");
        if (inbound < outbound)
            throw std::invalid_argument("switch geometry: inbound " + std::to_string(inbound) +
                                        " < outbound " + std::to_string(outbound) +
                                        " (need k <= n <= 2k)");
        if (inbound > 2 * outbound)
            throw std::invalid_argument("switch geometry: inbound " + std::to_string(inbound) +
                                        " > 2 * outbound " + std::to_string(outbound) +
                                        " (need k <= n <= 2k)");
    }

    std::uint64_t inbound() const { return inbound_; }   ///< n, destinations
    std::uint64_t outbound() const { return outbound_; } ///< k, output ports
    std::uint64_t total_ports() const { return inbound_ + outbound_; }
    std::uint64_t oversubscription() const { return inbound_ - outbound_; }
    std::uint64_t double_ports() const { return inbound_ - outbound_; }
    std::uint64_t single_ports() const { return 2 * outbound_ - inbound_; }

    friend bool operator==(const SwitchGeometry&, const SwitchGeometry&) = default;

private:
    std::uint64_t inbound_;
    std::uint64_t outbound_;
};

/// Static routing table: destination -> output port.  Every port serves one
/// or two destinations, with exactly n-k of them serving two.
class PortMap {
public:
    PortMap(const SwitchGeometry& geom, std::vector<std::uint32_t> destination_to_port)
        : geom_(geom), port_of_(std::move(destination_to_port)) {
        if (port_of_.size() != geom.inbound())
            throw std::invalid_argument("port map: expected one entry per destination");
        std::vector<std::uint64_t> load(geom.outbound(), 0);
        for (auto p : port_of_) {
            if (p >= geom.outbound()) throw std::invalid_argument("port map: port index out of range");
            ++load[p];
        }
        std::uint64_t doubles = 0;
        for (auto l : load) {
            if (l == 0 || l > 2)
                throw std::invalid_argument("port map: every port must serve one or two destinations");
            doubles += l == 2;
        }
        if (doubles != geom.double_ports())
            throw std::invalid_argument("port map: wrong number of double ports");
    }

    const SwitchGeometry& geometry() const { return geom_; }
    std::uint32_t port_of(std::uint64_t destination) const { return port_of_.at(destination); }
    const std::vector<std::uint32_t>& destination_to_port() const { return port_of_; }

    std::uint64_t load(std::uint32_t port) const {
        return static_cast<std::uint64_t>(std::count(port_of_.begin(), port_of_.end(), port));
    }

    /// Destination pairs sharing a double port, as bitmasks.  n <= 64 only.
    std::vector<std::uint64_t> double_port_masks() const {
        if (geom_.inbound() > 64) throw std::length_error("port map: masks need n <= 64");
        std::vector<std::uint64_t> per_port(geom_.outbound(), 0);
        for (std::uint64_t d = 0; d < port_of_.size(); ++d) per_port[port_of_[d]] |= std::uint64_t{1} << d;
        std::vector<std::uint64_t> masks;
        for (auto m : per_port)
            if (std::popcount(m) == 2) masks.push_back(m);
        return masks;
    }

private:
    SwitchGeometry geom_;
    std::vector<std::uint32_t> port_of_;
};

/// Canonical map: destinations 2i and 2i+1 share double port i for i < n-k;
/// the remaining destinations get one single port each.
inline PortMap build_port_map(const SwitchGeometry& geom) {
    const std::uint64_t doubles = geom.double_ports();
    std::vector<std::uint32_t> port(geom.inbound());
    for (std::uint64_t d = 0; d < geom.inbound(); ++d)
        port[d] = static_cast<std::uint32_t>(d < 2 * doubles ? d / 2 : d - doubles);
    return PortMap(geom, std::move(port));
}

/// 2^(n-k) / C(n,k).
inline Rational no_collision_probability(const SwitchGeometry& geom) {
    const BigInt favorable = BigInt(1) << static_cast<unsigned>(geom.double_ports());
    return Rational(favorable, exact_binomial(geom.inbound(), geom.outbound()));
}

/// P(n) / P(n-1) = 2(n-k)/n for k < n <= 2k.
inline Rational recurrence_ratio(std::uint64_t n, std::uint64_t k) {
    if (n == k)
        throw std::invalid_argument("recurrence_ratio: undefined at n = k (anchor P(k) = 1)");
    SwitchGeometry geom(n, k);
    return Rational(BigInt(2 * (n - k)), BigInt(n));
}

/// One extra destination (n = k+1): 2/(k+1).
inline Rational closed_form_one_way(std::uint64_t k) {
    if (k < 1) throw std::invalid_argument("closed_form_one_way: k must be >= 1");
    return Rational(BigInt(2), BigInt(k + 1));
}

/// Two extra destinations (n = k+2): 8/((k+1)(k+2)).
inline Rational closed_form_two_way(std::uint64_t k) {
    if (k < 2) throw std::invalid_argument("closed_form_two_way: k must be >= 2");
    return Rational(BigInt(8), BigInt(k + 1) * (k + 2));
}

/// The n = k+2 case written in total ports p = 2k+2: 32/(p(p+2)).
inline Rational closed_form_two_way_ports(std::uint64_t total_ports) {
    if (total_ports < 6 || total_ports % 2 != 0)
        throw std::invalid_argument("closed_form_two_way_ports: p must be even and >= 6");
    return Rational(BigInt(32), BigInt(total_ports) * (total_ports + 2));
}

inline constexpr std::uint64_t kDefaultSubsetCap = 10'000'000;

struct ExactCount {
    BigInt favorable;
    BigInt total;
    /// by_collisions[c] = number of k-subsets with exactly c double-booked ports.
    std::vector<std::uint64_t> by_collisions;

    Rational probability() const { return Rational(favorable, total); }
};

/// Brute force over every k-subset of the n destinations, routed through `map`.
inline ExactCount enumerate_exact(const PortMap& map, std::uint64_t max_subsets = kDefaultSubsetCap) {
    const auto& geom = map.geometry();
    const std::uint64_t n = geom.inbound();
    const std::uint64_t k = geom.outbound();
    if (n > 63) throw std::length_error("enumerate_exact: n must be <= 63");
    const BigInt total = exact_binomial(n, k);
    if (total > max_subsets)
        throw std::length_error("enumerate_exact: C(" + std::to_string(n) + "," + std::to_string(k) +
                                ") = " + total.str() + " exceeds cap of " +
                                std::to_string(max_subsets) + " subsets");
    const auto pairs = map.double_port_masks();
    ExactCount out;
    out.total = total;
    out.by_collisions.assign(geom.double_ports() + 1, 0);

    // Gosper's hack: next k-subset bitmask in increasing order.
    std::uint64_t subset = (std::uint64_t{1} << k) - 1;
    const std::uint64_t limit = std::uint64_t{1} << n;
    while (subset < limit) {
        std::uint64_t c = 0;
        for (auto p : pairs) c += (subset & p) == p;
        ++out.by_collisions[c];
        const std::uint64_t low = subset & (0 - subset);
        const std::uint64_t ripple = subset + low;
        subset = ripple | (((subset ^ ripple) >> 2) / low);
    }
    out.favorable = out.by_collisions[0];
    return out;
}

inline ExactCount enumerate_exact(const SwitchGeometry& geom, std::uint64_t max_subsets = kDefaultSubsetCap) {
    return enumerate_exact(build_port_map(geom), max_subsets);
}

struct CollisionReport {
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t no_collision_trials = 0;
    double no_collision_frequency = 0.0;
    double standard_error = 0.0;
    /// collision_count_distribution[c] = trials with exactly c double-booked ports.
    std::vector<std::uint64_t> collision_count_distribution;

    double mean_collisions() const {
        std::uint64_t s = 0;
        for (std::size_t c = 0; c < collision_count_distribution.size(); ++c)
            s += c * collision_count_distribution[c];
        return trials == 0 ? 0.0 : static_cast<double>(s) / static_cast<double>(trials);
    }
};

/// Each trial sends k messages to a uniformly random k-subset of destinations
/// and counts ports that receive two of them.
inline CollisionReport simulate_traffic(const PortMap& map, std::uint64_t trials, std::uint64_t seed,
                                        unsigned workers = 0) {
    if (trials == 0) throw std::invalid_argument("simulate_traffic: trials must be >= 1");
    const auto& geom = map.geometry();
    const std::uint64_t n = geom.inbound();
    const std::uint64_t k = geom.outbound();
    using Histogram = std::vector<std::uint64_t>;
    const Histogram zero(geom.double_ports() + 1, 0);

    auto run_block = [&](std::uint64_t first, std::uint64_t last, Histogram& hist) {
        std::vector<std::uint32_t> dest(n);
        std::vector<std::uint8_t> hits(k);
        for (std::uint64_t t = first; t < last; ++t) {
            auto rng = SplitMix64::for_trial(seed, t);
            std::iota(dest.begin(), dest.end(), 0u);
            std::fill(hits.begin(), hits.end(), 0);
            std::uint64_t collisions = 0;
            // Partial Fisher-Yates: dest[0..k) becomes a uniform k-subset.
            for (std::uint64_t i = 0; i < k; ++i) {
                std::swap(dest[i], dest[i + rng.below(n - i)]);
                collisions += ++hits[map.port_of(dest[i])] == 2;
            }
            ++hist[collisions];
        }
    };
    auto merge = [](Histogram& total, const Histogram& h) {
        for (std::size_t c = 0; c < h.size(); ++c) total[c] += h[c];
    };

    CollisionReport r;
    r.trials = trials;
    r.seed = seed;
    r.collision_count_distribution = run_trials(trials, workers, zero, run_block, merge);
    r.no_collision_trials = r.collision_count_distribution[0];
    const auto T = static_cast<double>(trials);
    r.no_collision_frequency = static_cast<double>(r.no_collision_trials) / T;
    r.standard_error = std::sqrt(r.no_collision_frequency * (1.0 - r.no_collision_frequency) / T);
    return r;
}

inline CollisionReport simulate_traffic(const SwitchGeometry& geom, std::uint64_t trials,
                                        std::uint64_t seed, unsigned workers = 0) {
    return simulate_traffic(build_port_map(geom), trials, seed, workers);
}

enum class SweepMode { one_way, two_way };

struct SweepRow {
    std::uint64_t outbound;  ///< k
    std::uint64_t inbound;   ///< n = k+1 or k+2
    Rational probability;
};

/// No-collision probability for n = k+1 (one_way) or n = k+2 (two_way) over
/// k in [k_min, k_max].
inline std::vector<SweepRow> sweep_oversubscription(SweepMode mode, std::uint64_t k_min,
                                                    std::uint64_t k_max) {
    if (k_min < 2) throw std::invalid_argument("sweep: k_min must be >= 2");
    if (k_max < k_min) throw std::invalid_argument("sweep: k_max must be >= k_min");
    std::vector<SweepRow> rows;
    for (std::uint64_t k = k_min; k <= k_max; ++k) {
        if (mode == SweepMode::one_way)
            rows.push_back({k, k + 1, closed_form_one_way(k)});
        else
            rows.push_back({k, k + 2, closed_form_two_way(k)});
    }
    return rows;
}

} // namespace collide
