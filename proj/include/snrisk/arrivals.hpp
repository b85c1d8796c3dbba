#pragma once

#include "snrisk/rng.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace snrisk {

struct ArrivalSequence {
    std::vector<double> times;  // strictly increasing, all in (0, horizon]
    double horizon = 0.0;
    std::size_t count() const { return times.size(); }
};

// Counting process over a finite horizon: homogeneous / inhomogeneous Poisson
// (sampled through the order-statistics property) or a general renewal
// process given an inter-arrival sampler.
class CountingProcessSpec {
public:
    static CountingProcessSpec homogeneous_poisson(double rate);
    // Cumulative intensity obtained by quadrature of lambda.
    static CountingProcessSpec inhomogeneous_poisson(std::function<double(double)> intensity);
    // Both supplied; cumulative is trusted as the source of truth.
    static CountingProcessSpec inhomogeneous_poisson(std::function<double(double)> intensity,
                                                     std::function<double(double)> cumulative);
    static CountingProcessSpec renewal(std::function<double(RngEngine&)> interarrival);

    bool is_poisson() const { return kind_ != Kind::Renewal; }
    bool is_homogeneous() const { return kind_ == Kind::Homogeneous; }
    double rate() const { return rate_; }

    // m(t); exact for the homogeneous case, quadrature otherwise.
    // Throws for renewal processes ("no intensity").
    double cumulative_intensity(double t) const;
    double intensity(double t) const;

    ArrivalSequence sample_arrivals(double horizon, RngEngine& rng) const;

    // One draw with density lambda(t)/m(T) on [0,T]; Uniform[0,T] when homogeneous.
    double sample_v0(double horizon, RngEngine& rng) const;

    // Renewal kind only: the inter-arrival sampler itself.
    const std::function<double(RngEngine&)>& interarrival_sampler() const;

    // Empirical E[N(T)^order] with a tail-concentration warning, for renewal
    // laws whose moments cannot be certified analytically.
    struct MomentCheck {
        double estimate = 0.0;
        bool concentrated = false;  // top 1% of samples carries > 50% of the mean
    };
    MomentCheck empirical_count_moment(double horizon, double order,
                                       std::size_t n_paths, RngEngine& rng) const;

private:
    enum class Kind { Homogeneous, Inhomogeneous, Renewal };
    CountingProcessSpec() = default;

    // Inverse of m on [0, horizon] by bracketed bisection.
    double inverse_cumulative(double target, double horizon) const;

    Kind kind_ = Kind::Homogeneous;
    double rate_ = 0.0;
    std::function<double(double)> intensity_;
    std::function<double(double)> cumulative_;
    std::function<double(RngEngine&)> interarrival_;
};

} // namespace snrisk
