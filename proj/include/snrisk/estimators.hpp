#pragma once

#include "snrisk/heavytail.hpp"
#include "snrisk/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace snrisk {

// Hill estimator from the k largest order statistics:
// alpha_hat = k / sum_{i=1..k} log(X_(n-i+1) / X_(n-k)).
// Throws when ties make the denominator vanish.
double hill_estimator(std::vector<double> samples, std::size_t k);

struct TailRatioCurve {
    std::vector<double> thresholds;
    std::vector<double> ratios;
    std::vector<double> ci_half;   // score-interval half widths on the ratio
    double reference_constant = 0.0;
};

// P_hat(numerator > x) / survival_ref(x) for each threshold on the grid.
TailRatioCurve tail_ratio_curve(const std::function<double(RngEngine&)>& numerator_sampler,
                                const HeavyTailDist& reference,
                                std::vector<double> thresholds, std::size_t n_samples,
                                std::uint64_t seed, int workers = 1,
                                double reference_constant = 0.0);

struct H2Report {
    std::vector<double> quantile_levels;
    std::vector<double> thresholds;       // empirical marginal quantiles
    std::vector<double> max_pair_ratio;   // max over pairs of P(Xi>x, Xj>x)/P(X1>x)
    bool pass = false;
    double bound = 0.05;
};

// Pairwise upper-tail dependence diagnostic on a window generator. Ratios
// must decay towards 0 along the threshold ladder for H2-style asymptotic
// independence; pass requires the top-threshold value below the bound.
H2Report h2_diagnostic(const std::function<std::vector<double>(RngEngine&)>& window_generator,
                       const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                       std::vector<double> quantile_levels, std::size_t n_windows,
                       std::uint64_t seed, double bound = 0.05);

} // namespace snrisk
