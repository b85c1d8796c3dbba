#include "snrisk/heavytail.hpp"

#include "snrisk/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace snrisk {

HeavyTailDist HeavyTailDist::pareto(double alpha, double scale) {
    if (!(alpha > 0.0)) throw std::invalid_argument("Pareto: alpha must be > 0");
    if (!(scale > 0.0)) throw std::invalid_argument("Pareto: scale must be > 0");
    HeavyTailDist d;
    d.pareto_ = true;
    d.alpha_ = alpha;
    d.scale_ = scale;
    d.mean_ = alpha > 1.0 ? alpha * scale / (alpha - 1.0) : 0.0;
    return d;
}

HeavyTailDist HeavyTailDist::from_survival(std::function<double(double)> survival,
                                           double alpha, double mean, double support_lo) {
    if (!(alpha > 0.0)) throw std::invalid_argument("heavy-tail law: alpha must be > 0");
    if (!survival) throw std::invalid_argument("heavy-tail law: survival function required");
    if (support_lo < 0.0) throw std::invalid_argument("heavy-tail law: support must be non-negative");
    HeavyTailDist d;
    d.pareto_ = false;
    d.alpha_ = alpha;
    d.scale_ = support_lo;
    d.mean_ = mean;
    d.user_survival_ = std::move(survival);
    return d;
}

double HeavyTailDist::mean() const {
    if (!has_finite_mean()) throw std::domain_error("mean undefined: alpha <= 1");
    return mean_;
}

double HeavyTailDist::survival(double x) const {
    if (x < 0.0) throw std::invalid_argument("survival: x must be >= 0");
    if (pareto_) {
        if (x <= scale_) return 1.0;
        return std::pow(scale_ / x, alpha_);
    }
    double s = user_survival_(x);
    if (s < 0.0 || s > 1.0) throw std::runtime_error("user survival outside [0,1]");
    return s;
}

double HeavyTailDist::quantile(double p) const {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("quantile: p must lie in [0,1)");
    if (pareto_) return scale_ * std::pow(1.0 - p, -1.0 / alpha_);
    double target = 1.0 - p;  // survival level
    double lo = scale_;
    if (user_survival_(lo) <= target) return lo;
    double hi = std::max(1.0, 2.0 * lo);
    while (user_survival_(hi) > target) {
        hi *= 2.0;
        if (hi > 1e300) throw std::runtime_error("quantile: survival does not reach level");
    }
    return bisect_root([&](double x) { return user_survival_(x); }, lo, hi, target, 1e-12 * hi);
}

double HeavyTailDist::integrated_tail_survival(double y) const {
    if (!has_finite_mean()) throw std::domain_error("integrated tail undefined: infinite mean");
    if (y < 0.0) throw std::invalid_argument("integrated tail: y must be >= 0");
    double gamma = mean();
    if (pareto_) {
        // int_y^inf survival = (x_m - y) + x_m/(alpha-1) for y < x_m,
        // and x_m^alpha y^{1-alpha}/(alpha-1) above the scale point.
        double tail_from_scale = scale_ / (alpha_ - 1.0);
        if (y <= scale_) return ((scale_ - y) + tail_from_scale) / gamma;
        return std::pow(scale_ / y, alpha_) * y / ((alpha_ - 1.0) * gamma);
    }
    // Truncate where the tail is numerically negligible, then integrate.
    double hi = std::max(y + 1.0, std::max(1.0, 2.0 * scale_));
    while (user_survival_(hi) > 1e-12 && hi < 1e300) hi *= 2.0;
    if (hi <= y) return 0.0;
    double integral = integrate([&](double x) { return user_survival_(x); }, y, hi, 1e-8);
    return integral / gamma;
}

double HeavyTailDist::sample(RngEngine& rng) const {
    double u = uniform_open01(rng);
    if (pareto_) return scale_ * std::pow(u, -1.0 / alpha_);
    // Inverse transform on the survival function: X = S^{-1}(u).
    double lo = scale_;
    if (user_survival_(lo) <= u) return lo;
    double hi = std::max(1.0, 2.0 * std::max(lo, 1.0));
    while (user_survival_(hi) > u && hi < 1e300) hi *= 2.0;
    return bisect_root([&](double x) { return user_survival_(x); }, lo, hi, u, 1e-12 * hi);
}

std::vector<double> HeavyTailDist::sample(std::size_t n, RngEngine& rng) const {
    std::vector<double> out(n);
    for (auto& x : out) x = sample(rng);
    return out;
}

double HeavyTailDist::sample_above(double threshold, RngEngine& rng) const {
    if (pareto_) {
        double base = std::max(threshold, scale_);
        return base * std::pow(uniform_open01(rng), -1.0 / alpha_);
    }
    double s_thr = survival(threshold);
    if (s_thr <= 0.0) throw std::domain_error("sample_above: survival vanishes at threshold");
    double u = uniform_open01(rng) * s_thr;
    double lo = std::max(threshold, scale_);
    double hi = std::max(1.0, 2.0 * std::max(lo, 1.0));
    while (user_survival_(hi) > u && hi < 1e300) hi *= 2.0;
    return bisect_root([&](double x) { return user_survival_(x); }, lo, hi, u, 1e-12 * hi);
}

DependentSequenceGen::DependentSequenceGen(HeavyTailDist marginal, double phi, double noise_sd)
    : marginal_(std::move(marginal)), phi_(phi), noise_sd_(noise_sd) {
    if (!(phi > 0.0 && phi < 1.0))
        throw std::invalid_argument("dependent generator: phi must lie in (0,1)");
    if (noise_sd < 0.0)
        throw std::invalid_argument("dependent generator: noise sd must be >= 0");
}

std::vector<double> DependentSequenceGen::sample(std::size_t n, RngEngine& rng) const {
    std::vector<double> out(n);
    if (n == 0) return out;
    std::normal_distribution<double> gauss(0.0, 1.0);
    // Stationary start for the log-volatility AR(1).
    double stat_sd = noise_sd_ / std::sqrt(1.0 - phi_ * phi_);
    double log_sigma = noise_sd_ > 0.0 ? stat_sd * gauss(rng) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) log_sigma = phi_ * log_sigma + (noise_sd_ > 0.0 ? noise_sd_ * gauss(rng) : 0.0);
        out[i] = std::exp(log_sigma) * marginal_.sample(rng);
    }
    return out;
}

} // namespace snrisk
