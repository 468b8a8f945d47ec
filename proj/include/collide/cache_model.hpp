#pragma once

// Analytic model of a k-way set-associative cache fed by uniformly random
// addresses: how many of n = m*k random lines survive, and how likely it is
// that A random lines fit without any set overflowing.

#include <collide/logspace.hpp>

#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace collide {

class CacheGeometry {
public:
    CacheGeometry(std::uint64_t sets, std::uint64_t associativity)
        : sets_(sets), associativity_(associativity) {
        if (sets == 0) throw std::invalid_argument("cache geometry: sets must be >= 1");
        if (associativity == 0)
            throw std::invalid_argument("cache geometry: associativity must be >= 1");
    }

    /// Largest geometry of the given associativity whose capacity does not
    /// exceed `capacity` (sets = floor(capacity / associativity)).
    static CacheGeometry from_capacity(std::uint64_t capacity, std::uint64_t associativity) {
        if (associativity == 0)
            throw std::invalid_argument("cache geometry: associativity must be >= 1");
        if (capacity < associativity)
            throw std::invalid_argument("cache geometry: capacity " + std::to_string(capacity) +
                                        " is smaller than associativity " +
                                        std::to_string(associativity));
        return CacheGeometry(capacity / associativity, associativity);
    }

    std::uint64_t sets() const { return sets_; }
    std::uint64_t associativity() const { return associativity_; }
    std::uint64_t capacity() const { return sets_ * associativity_; }

    friend bool operator==(const CacheGeometry&, const CacheGeometry&) = default;

private:
    std::uint64_t sets_;
    std::uint64_t associativity_;
};

/// counts[j] = number of sets holding exactly j addresses, j = 0..k.
struct OccupancyVector {
    std::vector<std::uint64_t> counts;

    std::uint64_t sets() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }
    std::uint64_t addresses() const {
        std::uint64_t a = 0;
        for (std::size_t j = 0; j < counts.size(); ++j) a += j * counts[j];
        return a;
    }
    friend bool operator==(const OccupancyVector&, const OccupancyVector&) = default;
};

struct WorkingSetQuery {
    std::uint64_t addresses = 0;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

/// E[min(X, k)] for X ~ Binomial(m*k, 1/m): the expected number of lines a
/// single set ends up holding when as many random lines as the cache has
/// slots are loaded.
inline double expected_set_occupancy(const CacheGeometry& geom) {
    const std::uint64_t k = geom.associativity();
    if (geom.sets() == 1) return static_cast<double>(k);
    const std::uint64_t n = geom.capacity();
    const double q = 1.0 / static_cast<double>(geom.sets());
    double deficit = 0.0;
    for (std::uint64_t j = 0; j < k; ++j)
        deficit += static_cast<double>(k - j) * ln_binomial_pmf(n, j, q).value();
    return static_cast<double>(k) - deficit;
}

inline double expected_stored(const CacheGeometry& geom) {
    return static_cast<double>(geom.sets()) * expected_set_occupancy(geom);
}

/// Expected fraction of the cache that is usefully filled.  Depends on the
/// associativity and only weakly on the number of sets.
inline double expected_fraction(std::uint64_t associativity, std::uint64_t sets) {
    const CacheGeometry geom(sets, associativity);
    return expected_stored(geom) / static_cast<double>(geom.capacity());
}

/// Probability that A independent uniform addresses spread over m sets leave
/// no set with more than k of them.
///
/// Evaluated as A! m^-A [x^A] (sum_{j<=k} x^j / j!)^m with m successive
/// log-space convolutions.  This is the same quantity as the sum over
/// occupancy vectors (see no_conflict_probability_direct) but costs
/// O(m * A * k) instead of growing with the number of vectors.
inline LogReal no_conflict_probability(const CacheGeometry& geom, WorkingSetQuery query) {
    const std::uint64_t m = geom.sets();
    const std::uint64_t k = geom.associativity();
    const std::uint64_t A = query.addresses;
    if (A <= k) return LogReal::one();
    if (A > geom.capacity()) return LogReal::zero();

    std::vector<LogReal> factor(k + 1);
    for (std::uint64_t j = 0; j <= k; ++j) factor[j] = LogReal::from_log(-ln_factorial(j));

    // poly holds coefficients [lo, lo + poly.size()) of the partial product.
    std::vector<LogReal> poly{LogReal::one()};
    std::uint64_t lo = 0;
    std::vector<LogReal> next;
    std::vector<LogReal> terms;
    terms.reserve(k + 1);
    for (std::uint64_t step = 1; step <= m; ++step) {
        const std::uint64_t remaining = m - step;
        // Coefficients below A - remaining*k can no longer reach x^A.
        const std::uint64_t new_lo = A > remaining * k ? A - remaining * k : 0;
        const std::uint64_t new_hi = std::min<std::uint64_t>(A, lo + poly.size() - 1 + k);
        next.assign(new_hi - new_lo + 1, LogReal::zero());
        for (std::uint64_t a = new_lo; a <= new_hi; ++a) {
            terms.clear();
            for (std::uint64_t j = 0; j <= k && j <= a; ++j) {
                const std::uint64_t src = a - j;
                if (src < lo || src >= lo + poly.size()) continue;
                terms.push_back(poly[src - lo] * factor[j]);
            }
            next[a - new_lo] = log_sum_exp(terms);
        }
        poly.swap(next);
        lo = new_lo;
    }
    const LogReal coeff = poly[A - lo];
    const double scale = ln_factorial(A) - static_cast<double>(A) * std::log(static_cast<double>(m));
    return coeff * LogReal::from_log(scale);
}

/// Visit every occupancy vector with sum_j i_j = m and sum_j j*i_j = A.
/// Vectors are generated by choosing i_k, i_{k-1}, ... in turn and pruning
/// any choice that leaves more addresses than the remaining sets can hold.
template <class Visitor>
void for_each_occupancy_vector(const CacheGeometry& geom, std::uint64_t A, Visitor&& visit) {
    const std::uint64_t k = geom.associativity();
    if (A > geom.capacity())
        throw std::domain_error("precondition violated: addresses <= sets * associativity (A = " +
                                std::to_string(A) + ", m*k = " + std::to_string(geom.capacity()) +
                                ")");
    OccupancyVector vec;
    vec.counts.assign(k + 1, 0);
    // remaining_addresses is the running remainder after placing levels > j.
    std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)> place =
        [&](std::uint64_t j, std::uint64_t remaining_sets, std::uint64_t remaining_addresses) {
            if (j == 0) {
                vec.counts[0] = remaining_sets;
                visit(static_cast<const OccupancyVector&>(vec));
                return;
            }
            const std::uint64_t hi = std::min(remaining_sets, remaining_addresses / j);
            const std::uint64_t floor_need = (j - 1) * remaining_sets;
            const std::uint64_t lo =
                remaining_addresses > floor_need ? remaining_addresses - floor_need : 0;
            for (std::uint64_t i = lo; i <= hi; ++i) {
                vec.counts[j] = i;
                place(j - 1, remaining_sets - i, remaining_addresses - j * i);
            }
            vec.counts[j] = 0;
        };
    place(k, geom.sets(), A);
}

/// All occupancy vectors for (geom, A).  Throws std::length_error when more
/// than max_vectors exist.
inline std::vector<OccupancyVector> enumerate_occupancy_vectors(
    const CacheGeometry& geom, std::uint64_t A, std::uint64_t max_vectors = kDefaultEnumerationCap) {
    std::vector<OccupancyVector> out;
    for_each_occupancy_vector(geom, A, [&](const OccupancyVector& v) {
        if (out.size() == max_vectors)
            throw std::length_error("occupancy enumeration exceeds cap of " +
                                    std::to_string(max_vectors) + " vectors");
        out.push_back(v);
    });
    return out;
}

/// The literal counting formula: for each occupancy vector, the number of
/// ways to pick which sets get j addresses (m! / prod i_j!) times the number
/// of ways to deal the A addresses into them (A! / prod (j!)^{i_j}), all over
/// m^A.  Intended as a cross-check on small instances.
inline LogReal no_conflict_probability_direct(const CacheGeometry& geom, WorkingSetQuery query,
                                              std::uint64_t max_vectors = kDefaultEnumerationCap) {
    const std::uint64_t m = geom.sets();
    const std::uint64_t A = query.addresses;
    const double base = ln_factorial(m) + ln_factorial(A) -
                        static_cast<double>(A) * std::log(static_cast<double>(m));
    std::vector<LogReal> terms;
    for_each_occupancy_vector(geom, A, [&](const OccupancyVector& v) {
        if (terms.size() == max_vectors)
            throw std::length_error("occupancy enumeration exceeds cap of " +
                                    std::to_string(max_vectors) + " vectors");
        double t = base;
        for (std::size_t j = 0; j < v.counts.size(); ++j) {
            const auto ij = v.counts[j];
            t -= ln_factorial(ij) + static_cast<double>(ij) * ln_factorial(j);
        }
        terms.push_back(LogReal::from_log(t));
    });
    return log_sum_exp(terms);
}

} // namespace collide
