#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace snrisk {

// Neumaier-compensated accumulator. Partial sums from parallel blocks are
// merged in block order, keeping reductions independent of the worker count.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    void merge(const CompensatedSum& other) {
        add(other.sum_);
        comp_ += other.comp_;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Mean/variance accumulator built on compensated sums of x and x^2.
class MomentAccumulator {
public:
    void add(double x) {
        sum_.add(x);
        sumsq_.add(x * x);
        ++n_;
    }
    void merge(const MomentAccumulator& o) {
        sum_.merge(o.sum_);
        sumsq_.merge(o.sumsq_);
        n_ += o.n_;
    }
    std::size_t count() const { return n_; }
    double mean() const { return n_ ? sum_.value() / static_cast<double>(n_) : 0.0; }
    double variance() const {
        if (n_ < 2) return 0.0;
        double m = mean();
        double v = (sumsq_.value() - static_cast<double>(n_) * m * m) / static_cast<double>(n_ - 1);
        return std::max(v, 0.0);
    }
    double std_error() const {
        return n_ ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

private:
    CompensatedSum sum_;
    CompensatedSum sumsq_;
    std::size_t n_ = 0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double half_width() const { return 0.5 * (hi - lo); }
    double center() const { return 0.5 * (hi + lo); }
};

// Wilson score interval for a binomial proportion. Non-degenerate at zero
// counts, which matters for rare-event thresholds.
inline Interval wilson_score(std::size_t successes, std::size_t trials, double z = 1.96) {
    if (trials == 0) return {0.0, 1.0};
    double n = static_cast<double>(trials);
    double p = static_cast<double>(successes) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2.0 * n)) / denom;
    double half = (z / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Empirical quantile by linear interpolation on the sorted copy.
inline double empirical_quantile(std::vector<double> values, double level) {
    if (values.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
    if (level < 0.0 || level > 1.0) throw std::invalid_argument("empirical_quantile: level outside [0,1]");
    std::sort(values.begin(), values.end());
    double pos = level * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

// (1 - e^{-z}) / z, continuous through z = 0.
inline double one_minus_exp_over(double z) {
    if (std::abs(z) < 1e-8) return 1.0 - 0.5 * z + z * z / 6.0;
    return -std::expm1(-z) / z;
}

// (z + e^{-z} - 1) / z^2, continuous through z = 0.
inline double exp_remainder_over_sq(double z) {
    if (std::abs(z) < 1e-5) return 0.5 - z / 6.0 + z * z / 24.0;
    return (z + std::expm1(-z)) / (z * z);
}

} // namespace snrisk
