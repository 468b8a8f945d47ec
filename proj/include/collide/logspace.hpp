#pragma once

// Log-space combinatorics.  Factorials, binomials and the probabilities built
// from them overflow doubles long before the models here stop being
// interesting, so everything is carried as a natural logarithm and only
// turned back into a plain real at the API boundary.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace collide {

/// A nonnegative real stored as its natural logarithm.  Exact zero is a flag
/// rather than -inf so that sums of zeros never produce NaN.
class LogReal {
public:
    constexpr LogReal() = default;

    static constexpr LogReal zero() { return LogReal{}; }
    static constexpr LogReal one() { return from_log(0.0); }
    static constexpr LogReal from_log(double log_value) {
        LogReal r;
        r.log_ = log_value;
        r.zero_ = false;
        return r;
    }
    static LogReal from_value(double value) {
        if (value < 0.0 || std::isnan(value))
            throw std::invalid_argument("LogReal: value must be nonnegative");
        return value == 0.0 ? zero() : from_log(std::log(value));
    }

    constexpr bool is_zero() const { return zero_; }
    /// Natural log of the magnitude; -inf for exact zero.
    constexpr double log_value() const {
        return zero_ ? -std::numeric_limits<double>::infinity() : log_;
    }
    /// Underflows to 0.0 for magnitudes below the double range.
    double value() const { return zero_ ? 0.0 : std::exp(log_); }

    friend constexpr LogReal operator*(LogReal a, LogReal b) {
        if (a.zero_ || b.zero_) return zero();
        return from_log(a.log_ + b.log_);
    }
    friend LogReal operator/(LogReal a, LogReal b) {
        if (b.zero_) throw std::domain_error("LogReal: division by zero");
        if (a.zero_) return zero();
        return from_log(a.log_ - b.log_);
    }
    friend LogReal operator+(LogReal a, LogReal b) {
        if (a.zero_) return b;
        if (b.zero_) return a;
        double hi = std::max(a.log_, b.log_);
        double lo = std::min(a.log_, b.log_);
        return from_log(hi + std::log1p(std::exp(lo - hi)));
    }
    LogReal& operator*=(LogReal o) { return *this = *this * o; }
    LogReal& operator+=(LogReal o) { return *this = *this + o; }

    /// Raise to a real power (power >= 0).
    LogReal pow(double power) const {
        if (zero_) return power == 0.0 ? one() : zero();
        return from_log(log_ * power);
    }

    friend constexpr bool operator==(LogReal a, LogReal b) {
        return a.zero_ == b.zero_ && (a.zero_ || a.log_ == b.log_);
    }
    friend constexpr bool operator<(LogReal a, LogReal b) {
        if (b.zero_) return false;
        if (a.zero_) return true;
        return a.log_ < b.log_;
    }

private:
    double log_ = 0.0;
    bool zero_ = true;
};

namespace detail {

inline constexpr std::uint64_t kFactorialTableSize = 10'000;

inline const std::vector<double>& ln_factorial_table() {
    static const std::vector<double> table = [] {
        std::vector<double> t(kFactorialTableSize + 1);
        long double acc = 0.0L;
        t[0] = 0.0;
        for (std::uint64_t i = 1; i <= kFactorialTableSize; ++i) {
            acc += std::log(static_cast<long double>(i));
            t[i] = static_cast<double>(acc);
        }
        return t;
    }();
    return table;
}

inline double ln_factorial_stirling(std::uint64_t n) {
    const long double x = static_cast<long double>(n);
    const long double inv = 1.0L / x;
    const long double inv2 = inv * inv;
    const long double series = inv * (1.0L / 12 - inv2 * (1.0L / 360 - inv2 * (1.0L / 1260)));
    const long double ln2pi = std::log(2.0L * std::numbers::pi_v<long double>);
    return static_cast<double>(x * std::log(x) - x + 0.5L * (ln2pi + std::log(x)) + series);
}

} // namespace detail

/// ln(n!).  Table lookup up to 10^4, Stirling series above.
inline double ln_factorial(std::uint64_t n) {
    if (n <= detail::kFactorialTableSize) return detail::ln_factorial_table()[n];
    return detail::ln_factorial_stirling(n);
}

/// ln C(n, j).  Throws std::invalid_argument for j > n.
inline double ln_binomial(std::uint64_t n, std::uint64_t j) {
    if (j > n)
        throw std::invalid_argument("ln_binomial: j = " + std::to_string(j) + " exceeds n = " +
                                    std::to_string(n));
    if (j == 0 || j == n) return 0.0;
    return ln_factorial(n) - ln_factorial(j) - ln_factorial(n - j);
}

/// log of C(n,j) q^j (1-q)^(n-j).  q must lie strictly inside (0, 1); the
/// degenerate endpoints belong to the caller.
inline LogReal ln_binomial_pmf(std::uint64_t n, std::uint64_t j, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("ln_binomial_pmf: success probability must be in (0, 1)");
    const double nj = static_cast<double>(n - std::min(j, n));
    return LogReal::from_log(ln_binomial(n, j) + static_cast<double>(j) * std::log(q) +
                             nj * std::log1p(-q));
}

/// Sum of magnitudes, shifted by the largest term so nothing overflows.
/// Terms are accumulated in the order given.
inline LogReal log_sum_exp(std::span<const LogReal> terms) {
    double hi = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const LogReal& t : terms) {
        if (t.is_zero()) continue;
        hi = any ? std::max(hi, t.log_value()) : t.log_value();
        any = true;
    }
    if (!any) return LogReal::zero();
    double sum = 0.0;
    for (const LogReal& t : terms)
        if (!t.is_zero()) sum += std::exp(t.log_value() - hi);
    return LogReal::from_log(hi + std::log(sum));
}

inline LogReal log_sum_exp(std::initializer_list<LogReal> terms) {
    return log_sum_exp(std::span<const LogReal>(terms.begin(), terms.size()));
}

} // namespace collide
