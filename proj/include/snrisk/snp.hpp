#pragma once

#include "snrisk/arrivals.hpp"
#include "snrisk/heavytail.hpp"
#include "snrisk/rng.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace snrisk {

// Law of a scalar parameter (the elimination rate omega). Constant and
// discrete laws admit exact expectations; anything else goes through
// Monte Carlo with a fixed inner budget.
class ScalarLaw {
public:
    static ScalarLaw constant(double v);
    static ScalarLaw discrete(std::vector<double> values, std::vector<double> probs);
    static ScalarLaw sampler(std::function<double(RngEngine&)> draw);

    bool exact_expectations() const { return kind_ != Kind::Sampler; }
    double sample(RngEngine& rng) const;

    // E[f(w)] for constant/discrete laws; throws for sampler laws.
    double expect(const std::function<double(double)>& f) const;
    // Monte Carlo fallback with n inner draws.
    double expect_mc(const std::function<double(double)>& f, std::size_t n, RngEngine& rng) const;
    // P(pred(w)); exact for constant/discrete, throws otherwise.
    double prob(const std::function<bool(double)>& pred) const;
    double mean() const { return expect([](double w) { return w; }); }

    bool is_constant() const { return kind_ == Kind::Constant; }
    double constant_value() const;
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& probs() const { return probs_; }

private:
    enum class Kind { Constant, Discrete, Sampler };
    ScalarLaw() = default;
    Kind kind_ = Kind::Constant;
    std::vector<double> values_;
    std::vector<double> probs_;
    std::function<double(RngEngine&)> draw_;
};

// Shock function h_i(t, s): the per-shock modulation applied to X_i from its
// arrival time s onward. h is 0 for t < s.
class ShockFunctionSpec {
public:
    enum class Kind { Constant, ExponentialDecay, Indicator, UserDeterministic };
    enum class Monotonicity { NonIncreasingInT, NonDecreasingInT, Mixed };

    static ShockFunctionSpec constant(double c);
    // h_i(t,s) = exp(-w_i (t-s)), w_i drawn once per shock from the law.
    static ShockFunctionSpec exponential(ScalarLaw omega_law);
    static ShockFunctionSpec exponential(double omega);
    static ShockFunctionSpec indicator();
    static ShockFunctionSpec user(std::function<double(double, double)> h, Monotonicity mono);

    Kind kind() const { return kind_; }
    Monotonicity monotonicity() const { return mono_; }
    bool needs_omega() const { return kind_ == Kind::ExponentialDecay; }
    const ScalarLaw& omega_law() const;
    double constant_value() const { return c_; }

    double draw_omega(RngEngine& rng) const;
    // h(t,s); omega ignored unless the kind is ExponentialDecay.
    double eval(double t, double s, double omega = 0.0) const;

    // Empirical check of E[exp(p * max(-w,0) * T)] < inf for some p > alpha,
    // required when omega can go negative. Exact (always true) for constant
    // and discrete laws; sampler laws are probed by concentration.
    bool cramer_guard_ok(double alpha, double horizon, RngEngine& rng,
                         std::size_t n_draws = 10000) const;

private:
    ShockFunctionSpec() : omega_(ScalarLaw::constant(0.0)) {}
    Kind kind_ = Kind::Constant;
    Monotonicity mono_ = Monotonicity::NonIncreasingInT;
    double c_ = 1.0;
    ScalarLaw omega_;
    std::function<double(double, double)> user_h_;
};

// One realized path: arrivals, shock sizes, and (for exponential shocks) the
// per-shock elimination rates. All vectors have equal length.
struct SnpPath {
    ArrivalSequence arrivals;
    std::vector<double> shocks;
    std::vector<double> omegas;  // empty unless the shock spec needs them
};

using MarginalModel = std::variant<HeavyTailDist, DependentSequenceGen>;

SnpPath sample_path(const MarginalModel& marginal, const CountingProcessSpec& counting,
                    const ShockFunctionSpec& shock, double horizon, RngEngine& rng);

// Y(t) = sum_{T_i <= t} X_i h_i(t, T_i).
double evaluate(const SnpPath& path, const ShockFunctionSpec& shock, double t);

// (Y(T_1), ..., Y(T_N)), each value including the shock that just arrived.
std::vector<double> embedded_chain(const SnpPath& path, const ShockFunctionSpec& shock);

enum class SupremumMode { Skeleton, SkeletonTerminal, DenseGrid };

struct SupremumResult {
    double value = 0.0;
    // Set when a skeleton-only supremum was requested for a shock that can
    // grow between jumps; the dense-grid oracle is the reliable reference.
    bool monotonicity_warning = false;
};

SupremumResult path_supremum(const SnpPath& path, const ShockFunctionSpec& shock,
                             SupremumMode mode, double grid_dt = 0.0);

struct KdemOptions {
    std::size_t burn_in = 0;      // stationary warm-up steps, dropped from output
    std::optional<double> y0;     // starting level, default 0
};

// Embedded chain of the exponential-decay model by its one-step recursion:
// Y_{n+1} = exp(-w_{n+1} dT_{n+1}) Y_n + X_{n+1}.
std::vector<double> kdem_chain(const ScalarLaw& omega_law,
                               const std::function<double(RngEngine&)>& interarrival,
                               const std::function<double(RngEngine&)>& shock_law,
                               std::size_t n_steps, RngEngine& rng,
                               const KdemOptions& opts = {});

// Per-path trace on a uniform grid, for CSV export: (t_k, Y(t_k)).
std::vector<std::pair<double, double>> path_trace(const SnpPath& path, const ShockFunctionSpec& shock,
                                                  std::size_t n_points);

} // namespace snrisk
