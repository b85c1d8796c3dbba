#pragma once

#include "snrisk/rng.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace snrisk {

// Regularly varying marginal law with tail index alpha. Pareto is the
// canonical case with exact survival (x_m/x)^alpha; user laws supply a
// survival function plus declared alpha and mean, and are only spot-checked
// by the regular-variation diagnostics in the test suite.
class HeavyTailDist {
public:
    static HeavyTailDist pareto(double alpha, double scale);
    static HeavyTailDist from_survival(std::function<double(double)> survival,
                                       double alpha, double mean, double support_lo);

    bool is_pareto() const { return pareto_; }
    double alpha() const { return alpha_; }
    double scale() const { return scale_; }
    bool has_finite_mean() const { return alpha_ > 1.0; }

    // Mean gamma; defined only for alpha > 1.
    double mean() const;

    // P(X > x) for x >= 0.
    double survival(double x) const;

    // Smallest x with F(x) >= p, p in [0,1).
    double quantile(double p) const;

    // (1/gamma) * int_y^inf survival(x) dx. Requires alpha > 1.
    double integrated_tail_survival(double y) const;

    double sample(RngEngine& rng) const;
    std::vector<double> sample(std::size_t n, RngEngine& rng) const;

    // Draw conditioned on X > threshold (exact for Pareto, numeric otherwise).
    double sample_above(double threshold, RngEngine& rng) const;

private:
    HeavyTailDist() = default;

    bool pareto_ = true;
    double alpha_ = 0.0;
    double scale_ = 0.0;   // x_m for Pareto, lower support point otherwise
    double mean_ = 0.0;    // declared for user laws
    std::function<double(double)> user_survival_;
};

// Serially dependent generator with identically distributed, pairwise
// asymptotically independent marginals: X_t = sigma_t * eps_t with heavy
// i.i.d. eps and log sigma_t an AR(1) with Gaussian noise, independent of eps.
class DependentSequenceGen {
public:
    DependentSequenceGen(HeavyTailDist marginal, double phi, double noise_sd);

    const HeavyTailDist& marginal() const { return marginal_; }
    double phi() const { return phi_; }
    double noise_sd() const { return noise_sd_; }
    double alpha() const { return marginal_.alpha(); }

    std::vector<double> sample(std::size_t n, RngEngine& rng) const;

private:
    HeavyTailDist marginal_;
    double phi_;
    double noise_sd_;
};

} // namespace snrisk
