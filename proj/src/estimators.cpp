#include "snrisk/estimators.hpp"

#include "snrisk/parallel.hpp"
#include "snrisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snrisk {

double hill_estimator(std::vector<double> samples, std::size_t k) {
    std::size_t n = samples.size();
    if (k < 2 || k >= n) throw std::invalid_argument("hill estimator: need 2 <= k < n");
    for (double x : samples)
        if (!(x > 0.0)) throw std::invalid_argument("hill estimator: samples must be > 0");
    // Partial sort so that the top k+1 order statistics are in place.
    std::nth_element(samples.begin(), samples.begin() + (n - k - 1), samples.end());
    double pivot = samples[n - k - 1];  // X_(n-k)
    CompensatedSum logsum;
    for (std::size_t i = n - k; i < n; ++i) logsum.add(std::log(samples[i] / pivot));
    double denom = logsum.value();
    if (!(denom > 0.0)) throw std::domain_error("hill estimator: zero log-spacing (tied samples)");
    return static_cast<double>(k) / denom;
}

TailRatioCurve tail_ratio_curve(const std::function<double(RngEngine&)>& numerator_sampler,
                                const HeavyTailDist& reference,
                                std::vector<double> thresholds, std::size_t n_samples,
                                std::uint64_t seed, int workers, double reference_constant) {
    if (thresholds.empty()) throw std::invalid_argument("tail_ratio_curve: empty threshold grid");
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw std::invalid_argument("tail_ratio_curve: thresholds must ascend");
    if (n_samples == 0) throw std::invalid_argument("tail_ratio_curve: n_samples must be >= 1");

    std::size_t m = thresholds.size();
    BlockPlan plan{n_samples, 65536};
    std::vector<std::vector<std::size_t>> counts(plan.n_blocks());
    run_blocks(plan, workers, [&](std::size_t b, std::size_t lo, std::size_t hi) {
        RngEngine rng = make_substream(seed, b);
        auto& c = counts[b];
        c.assign(m, 0);
        for (std::size_t i = lo; i < hi; ++i) {
            double v = numerator_sampler(rng);
            // Thresholds ascend, so count from the top down and stop early.
            for (std::size_t j = m; j-- > 0;) {
                if (v > thresholds[j]) ++c[j];
                else break;
            }
        }
    });
    std::vector<std::size_t> total(m, 0);
    for (const auto& c : counts)
        for (std::size_t j = 0; j < m; ++j) total[j] += c[j];

    TailRatioCurve curve;
    curve.thresholds = std::move(thresholds);
    curve.reference_constant = reference_constant;
    curve.ratios.resize(m);
    curve.ci_half.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        double s = reference.survival(curve.thresholds[j]);
        if (!(s > 0.0)) throw std::domain_error("tail_ratio_curve: reference survival vanished");
        curve.ratios[j] = static_cast<double>(total[j]) / static_cast<double>(n_samples) / s;
        curve.ci_half[j] = wilson_score(total[j], n_samples).half_width() / s;
    }
    return curve;
}

H2Report h2_diagnostic(const std::function<std::vector<double>(RngEngine&)>& window_generator,
                       const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                       std::vector<double> quantile_levels, std::size_t n_windows,
                       std::uint64_t seed, double bound) {
    if (pairs.empty()) throw std::invalid_argument("h2 diagnostic: empty pair set");
    for (auto& [i, j] : pairs)
        if (i == j) throw std::invalid_argument("h2 diagnostic: pairs must have i != j");
    if (quantile_levels.empty()) throw std::invalid_argument("h2 diagnostic: no quantile levels");
    std::sort(quantile_levels.begin(), quantile_levels.end());

    std::size_t max_index = 0;
    for (auto& [i, j] : pairs) max_index = std::max({max_index, i, j});

    RngEngine rng = make_substream(seed, 0);
    std::vector<std::vector<double>> windows(n_windows);
    std::vector<double> pooled;
    pooled.reserve(n_windows * (max_index + 1));
    for (auto& w : windows) {
        w = window_generator(rng);
        if (w.size() <= max_index)
            throw std::invalid_argument("h2 diagnostic: window shorter than pair indices");
        pooled.insert(pooled.end(), w.begin(), w.begin() + static_cast<long>(max_index + 1));
    }

    H2Report rep;
    rep.bound = bound;
    rep.quantile_levels = quantile_levels;
    for (double level : quantile_levels) {
        double x = empirical_quantile(pooled, level);
        rep.thresholds.push_back(x);
        std::size_t single = 0;
        for (const auto& w : windows)
            if (w[0] > x) ++single;
        double worst = 0.0;
        for (auto& [i, j] : pairs) {
            std::size_t joint = 0;
            for (const auto& w : windows)
                if (w[i] > x && w[j] > x) ++joint;
            if (single > 0)
                worst = std::max(worst, static_cast<double>(joint) / static_cast<double>(single));
            else if (joint > 0)
                worst = 1.0;
        }
        rep.max_pair_ratio.push_back(worst);
    }
    rep.pass = rep.max_pair_ratio.back() < bound;
    return rep;
}

} // namespace snrisk
