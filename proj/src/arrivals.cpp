#include "snrisk/arrivals.hpp"

#include "snrisk/quadrature.hpp"
#include "snrisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace snrisk {

CountingProcessSpec CountingProcessSpec::homogeneous_poisson(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("Poisson process: rate must be > 0");
    CountingProcessSpec s;
    s.kind_ = Kind::Homogeneous;
    s.rate_ = rate;
    return s;
}

CountingProcessSpec CountingProcessSpec::inhomogeneous_poisson(std::function<double(double)> intensity) {
    if (!intensity) throw std::invalid_argument("Poisson process: intensity required");
    CountingProcessSpec s;
    s.kind_ = Kind::Inhomogeneous;
    s.intensity_ = std::move(intensity);
    return s;
}

CountingProcessSpec CountingProcessSpec::inhomogeneous_poisson(std::function<double(double)> intensity,
                                                               std::function<double(double)> cumulative) {
    auto s = inhomogeneous_poisson(std::move(intensity));
    s.cumulative_ = std::move(cumulative);
    return s;
}

CountingProcessSpec CountingProcessSpec::renewal(std::function<double(RngEngine&)> interarrival) {
    if (!interarrival) throw std::invalid_argument("renewal process: inter-arrival sampler required");
    CountingProcessSpec s;
    s.kind_ = Kind::Renewal;
    s.interarrival_ = std::move(interarrival);
    return s;
}

double CountingProcessSpec::intensity(double t) const {
    if (kind_ == Kind::Renewal) throw std::domain_error("no intensity");
    if (t < 0.0) throw std::invalid_argument("intensity: t must be >= 0");
    if (kind_ == Kind::Homogeneous) return rate_;
    double v = intensity_(t);
    if (v < 0.0) throw std::runtime_error("intensity function returned a negative value");
    return v;
}

double CountingProcessSpec::cumulative_intensity(double t) const {
    if (kind_ == Kind::Renewal) throw std::domain_error("no intensity");
    if (t < 0.0) throw std::invalid_argument("cumulative intensity: t must be >= 0");
    if (t == 0.0) return 0.0;
    if (kind_ == Kind::Homogeneous) return rate_ * t;
    if (cumulative_) return cumulative_(t);
    return integrate([this](double s) { return intensity(s); }, 0.0, t, 1e-10);
}

double CountingProcessSpec::inverse_cumulative(double target, double horizon) const {
    return bisect_root([this](double t) { return cumulative_intensity(t); },
                       0.0, horizon, target, 1e-12);
}

ArrivalSequence CountingProcessSpec::sample_arrivals(double horizon, RngEngine& rng) const {
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_arrivals: horizon must be > 0");
    ArrivalSequence seq;
    seq.horizon = horizon;

    if (kind_ == Kind::Renewal) {
        double t = 0.0;
        for (;;) {
            double dt = interarrival_(rng);
            if (!(dt > 0.0)) throw std::runtime_error("renewal inter-arrival must be > 0");
            t += dt;
            if (t > horizon) break;
            seq.times.push_back(t);
        }
        return seq;
    }

    double total = cumulative_intensity(horizon);
    if (total == 0.0) return seq;  // empty path is a valid draw
    std::poisson_distribution<long> pois(total);
    long n = pois(rng);
    seq.times.reserve(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (long i = 0; i < n; ++i) {
        double u = unif(rng);
        double t = kind_ == Kind::Homogeneous ? u * horizon : inverse_cumulative(u * total, horizon);
        seq.times.push_back(std::min(t, horizon));
    }
    std::sort(seq.times.begin(), seq.times.end());
    // Float ties are broken by a deterministic 1-ulp nudge, keeping times
    // strictly increasing; the nudge walks backwards if it would pass T.
    for (std::size_t i = 1; i < seq.times.size(); ++i) {
        if (seq.times[i] <= seq.times[i - 1]) {
            double up = std::nextafter(seq.times[i - 1], horizon + 1.0);
            if (up <= horizon) {
                seq.times[i] = up;
            } else {
                for (std::size_t j = i; j-- > 0;) {
                    double down = std::nextafter(seq.times[j + 1], 0.0);
                    if (seq.times[j] < down) break;
                    seq.times[j] = down;
                }
            }
        }
    }
    return seq;
}

double CountingProcessSpec::sample_v0(double horizon, RngEngine& rng) const {
    if (kind_ == Kind::Renewal) throw std::domain_error("no intensity");
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_v0: horizon must be > 0");
    double total = cumulative_intensity(horizon);
    if (total <= 0.0) throw std::domain_error("sample_v0: m(T) = 0");
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (kind_ == Kind::Homogeneous) return u * horizon;
    return inverse_cumulative(u * total, horizon);
}

const std::function<double(RngEngine&)>& CountingProcessSpec::interarrival_sampler() const {
    if (kind_ != Kind::Renewal)
        throw std::domain_error("interarrival sampler only defined for renewal processes");
    return interarrival_;
}

CountingProcessSpec::MomentCheck CountingProcessSpec::empirical_count_moment(
    double horizon, double order, std::size_t n_paths, RngEngine& rng) const {
    if (n_paths == 0) throw std::invalid_argument("empirical_count_moment: n_paths must be >= 1");
    std::vector<double> vals(n_paths);
    for (auto& v : vals) {
        auto seq = sample_arrivals(horizon, rng);
        v = std::pow(static_cast<double>(seq.count()), order);
    }
    CompensatedSum total;
    for (double v : vals) total.add(v);
    MomentCheck out;
    out.estimate = total.value() / static_cast<double>(n_paths);

    std::sort(vals.begin(), vals.end());
    std::size_t top = std::max<std::size_t>(1, n_paths / 100);
    CompensatedSum top_sum;
    for (std::size_t i = n_paths - top; i < n_paths; ++i) top_sum.add(vals[i]);
    out.concentrated = total.value() > 0.0 && top_sum.value() > 0.5 * total.value();
    return out;
}

} // namespace snrisk
