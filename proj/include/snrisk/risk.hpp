#pragma once

#include "snrisk/arrivals.hpp"
#include "snrisk/heavytail.hpp"
#include "snrisk/snp.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace snrisk {

// Everything needed for the asymptotic risk constants of a shot noise process
// on [0, horizon]. Closed forms require Poisson counting.
struct RiskScenario {
    HeavyTailDist marginal;
    CountingProcessSpec counting;
    ShockFunctionSpec shock;
    double horizon = 1.0;

    double alpha() const { return marginal.alpha(); }
};

struct ClosedForm {
    bool available = false;
    double value = 0.0;
    std::string method;  // "quadrature", "nested-mc", or the unavailability reason
};

// Options for scenarios whose omega law only admits Monte Carlo expectations.
struct NestedExpectationOptions {
    std::size_t n_inner = 100000;
    std::uint64_t seed = 0x5eedULL;
};

// K with P(Y(T) > x) ~ K survival(x):  m(T) E[h0^alpha(T, V0)].
ClosedForm tail_constant(const RiskScenario& sc, const NestedExpectationOptions& opts = {});

// K with psi(x,T) ~ K survival(x). Non-increasing shocks use
// m(T) E[h0^alpha(V0,V0)]; non-decreasing shocks coincide with the tail
// constant; exponential shocks with sign-mixed omega use the split formula
// m(T) P(w>0) + E[1{w<=0} int_0^T exp(-alpha w (T-s)) lambda(s) ds].
ClosedForm ruin_constant(const RiskScenario& sc, const NestedExpectationOptions& opts = {});

// K with ES(x) ~ K integrated_tail_survival(x): gamma * tail constant.
// Throws "infinite mean" when alpha <= 1.
ClosedForm es_constant(const RiskScenario& sc, const NestedExpectationOptions& opts = {});

// K with IES(x) ~ K integrated_tail_survival(x):
// gamma * int_0^T m(t) E[h0^alpha(t, V0(t))] dt. Throws when alpha <= 1.
ClosedForm ies_constant(const RiskScenario& sc, const NestedExpectationOptions& opts = {});

// lim_x ETOT(x) = int_0^T m(t) E[h0^alpha(t, V0(t))] dt / ruin constant.
// Throws when the ruin constant is 0.
double etot_limit(const RiskScenario& sc, const NestedExpectationOptions& opts = {});

enum class ExtremalMode { NumericLimit, PaperClosedForm, EmbeddedChain };

struct ExtremalIndexResult {
    double value = 0.0;
    bool is_infinite = false;
    std::string method;
    // (T, 1/etot_limit(T)) grid trace for the numeric mode.
    std::vector<std::pair<double, double>> trace;
};

struct ExtremalOptions {
    std::vector<double> t_grid = {10.0, 20.0, 40.0, 80.0};
    NestedExpectationOptions nested;
};

ExtremalIndexResult extremal_index(const RiskScenario& sc, ExtremalMode mode,
                                   const ExtremalOptions& opts = {});

enum class RiskIndicator { TailRatio, Ruin, ES, IES, ETOT };

const char* indicator_name(RiskIndicator ind);

struct McOptions {
    std::size_t n_paths = 100000;
    std::uint64_t seed = 1;
    int workers = 1;
    SupremumMode sup_mode = SupremumMode::SkeletonTerminal;
    double dense_grid_dt = 0.0;  // used when sup_mode == DenseGrid
    // Mixture oversampling of large shocks for extreme thresholds: each shock
    // is drawn from (1-p) F + p F(.|X > b) and reweighted by the exact
    // likelihood ratio, which depends on the base level b only through
    // survival(b).
    bool importance = false;
    double importance_mix = 0.1;
    double importance_base_quantile = 0.99;
};

struct McResult {
    double estimate = 0.0;
    double ci_half_width = 0.0;
    std::size_t n_paths = 0;
    double threshold = 0.0;
    std::size_t n_exceedances = 0;
    bool wide_ci = false;  // no exceedances observed; estimate unreliable
    std::string estimator;  // "plain" or "importance"
};

// Monte Carlo counterpart of each asymptotic limit, normalized so that the
// estimate converges to the matching closed-form constant as x grows:
//   tail-ratio  P(Y(T)>x) / survival(x)
//   ruin        P(sup Y > x) / survival(x)
//   es          E[(Y(T)-x)+] / (gamma * integrated_tail_survival(x))
//   ies         E[int_0^T (Y(t)-x)+ dt] / (gamma * integrated_tail_survival(x))
//   etot        E[time above x] / P(time above x > 0)
McResult mc_indicator(const RiskScenario& sc, RiskIndicator ind, double x, const McOptions& opts);

// Block-maxima cluster estimator of the extremal index of a stationary
// sequence: (# blocks containing an exceedance) / (# exceedances).
double block_maxima_extremal_index(const std::vector<double>& chain, double quantile_level,
                                   std::size_t block_length);

} // namespace snrisk
