#include "snrisk/snp.hpp"

#include "snrisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace snrisk {

ScalarLaw ScalarLaw::constant(double v) {
    ScalarLaw l;
    l.kind_ = Kind::Constant;
    l.values_ = {v};
    l.probs_ = {1.0};
    return l;
}

ScalarLaw ScalarLaw::discrete(std::vector<double> values, std::vector<double> probs) {
    if (values.empty() || values.size() != probs.size())
        throw std::invalid_argument("discrete law: values/probs size mismatch");
    double total = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw std::invalid_argument("discrete law: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("discrete law: probabilities must sum to 1");
    ScalarLaw l;
    l.kind_ = Kind::Discrete;
    l.values_ = std::move(values);
    l.probs_ = std::move(probs);
    return l;
}

ScalarLaw ScalarLaw::sampler(std::function<double(RngEngine&)> draw) {
    if (!draw) throw std::invalid_argument("sampler law: callable required");
    ScalarLaw l;
    l.kind_ = Kind::Sampler;
    l.draw_ = std::move(draw);
    return l;
}

double ScalarLaw::sample(RngEngine& rng) const {
    switch (kind_) {
        case Kind::Constant: return values_[0];
        case Kind::Discrete: {
            double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            double acc = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                acc += probs_[i];
                if (u <= acc) return values_[i];
            }
            return values_.back();
        }
        case Kind::Sampler: return draw_(rng);
    }
    return 0.0;
}

double ScalarLaw::expect(const std::function<double(double)>& f) const {
    if (kind_ == Kind::Sampler)
        throw std::domain_error("scalar law: exact expectation unavailable for sampler laws");
    double acc = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) acc += probs_[i] * f(values_[i]);
    return acc;
}

double ScalarLaw::expect_mc(const std::function<double(double)>& f, std::size_t n, RngEngine& rng) const {
    if (kind_ != Kind::Sampler) return expect(f);
    if (n == 0) throw std::invalid_argument("expect_mc: n must be >= 1");
    CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) s.add(f(draw_(rng)));
    return s.value() / static_cast<double>(n);
}

double ScalarLaw::prob(const std::function<bool(double)>& pred) const {
    return expect([&](double w) { return pred(w) ? 1.0 : 0.0; });
}

double ScalarLaw::constant_value() const {
    if (kind_ != Kind::Constant) throw std::logic_error("scalar law: not a constant");
    return values_[0];
}

ShockFunctionSpec ShockFunctionSpec::constant(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("constant shock: c must be > 0");
    ShockFunctionSpec s;
    s.kind_ = Kind::Constant;
    s.c_ = c;
    s.mono_ = Monotonicity::NonIncreasingInT;  // constant in t, either reading is exact
    return s;
}

ShockFunctionSpec ShockFunctionSpec::exponential(ScalarLaw omega_law) {
    ShockFunctionSpec s;
    s.kind_ = Kind::ExponentialDecay;
    s.omega_ = std::move(omega_law);
    if (s.omega_.exact_expectations()) {
        bool any_neg = false, any_pos = false;
        for (std::size_t i = 0; i < s.omega_.values().size(); ++i) {
            if (s.omega_.probs()[i] <= 0.0) continue;
            if (s.omega_.values()[i] < 0.0) any_neg = true;
            if (s.omega_.values()[i] >= 0.0) any_pos = true;
        }
        s.mono_ = any_neg && any_pos ? Monotonicity::Mixed
                : any_neg            ? Monotonicity::NonDecreasingInT
                                     : Monotonicity::NonIncreasingInT;
    } else {
        s.mono_ = Monotonicity::Mixed;  // unknown sign support: assume the worst
    }
    return s;
}

ShockFunctionSpec ShockFunctionSpec::exponential(double omega) {
    return exponential(ScalarLaw::constant(omega));
}

ShockFunctionSpec ShockFunctionSpec::indicator() {
    ShockFunctionSpec s;
    s.kind_ = Kind::Indicator;
    s.mono_ = Monotonicity::NonIncreasingInT;
    return s;
}

ShockFunctionSpec ShockFunctionSpec::user(std::function<double(double, double)> h, Monotonicity mono) {
    if (!h) throw std::invalid_argument("user shock: callable required");
    ShockFunctionSpec s;
    s.kind_ = Kind::UserDeterministic;
    s.user_h_ = std::move(h);
    s.mono_ = mono;
    return s;
}

const ScalarLaw& ShockFunctionSpec::omega_law() const {
    if (kind_ != Kind::ExponentialDecay)
        throw std::logic_error("shock spec: omega law only defined for exponential decay");
    return omega_;
}

double ShockFunctionSpec::draw_omega(RngEngine& rng) const {
    return omega_law().sample(rng);
}

double ShockFunctionSpec::eval(double t, double s, double omega) const {
    if (t < s) return 0.0;
    switch (kind_) {
        case Kind::Constant: return c_;
        case Kind::ExponentialDecay: return std::exp(-omega * (t - s));
        case Kind::Indicator: return t == s ? 1.0 : 0.0;
        case Kind::UserDeterministic: {
            double v = user_h_(t, s);
            if (v < 0.0) throw std::runtime_error("user shock function returned a negative value");
            return v;
        }
    }
    return 0.0;
}

bool ShockFunctionSpec::cramer_guard_ok(double alpha, double horizon, RngEngine& rng,
                                        std::size_t n_draws) const {
    if (kind_ != Kind::ExponentialDecay) return true;
    if (omega_.exact_expectations()) return true;  // finite support, moment finite
    double p = 1.5 * alpha;
    std::vector<double> vals(n_draws);
    for (auto& v : vals) {
        double w = omega_.sample(rng);
        v = std::exp(p * std::max(-w, 0.0) * horizon);
    }
    CompensatedSum total;
    for (double v : vals) total.add(v);
    std::sort(vals.begin(), vals.end());
    std::size_t top = std::max<std::size_t>(1, n_draws / 100);
    CompensatedSum top_sum;
    for (std::size_t i = n_draws - top; i < n_draws; ++i) top_sum.add(vals[i]);
    return top_sum.value() <= 0.5 * total.value();
}

SnpPath sample_path(const MarginalModel& marginal, const CountingProcessSpec& counting,
                    const ShockFunctionSpec& shock, double horizon, RngEngine& rng) {
    SnpPath path;
    path.arrivals = counting.sample_arrivals(horizon, rng);
    std::size_t n = path.arrivals.count();
    path.shocks = std::visit([&](const auto& m) { return m.sample(n, rng); }, marginal);
    if (shock.needs_omega()) {
        path.omegas.resize(n);
        for (auto& w : path.omegas) w = shock.draw_omega(rng);
    }
    return path;
}

namespace {

double shock_term(const SnpPath& path, const ShockFunctionSpec& shock, std::size_t i, double t) {
    double w = path.omegas.empty() ? 0.0 : path.omegas[i];
    return path.shocks[i] * shock.eval(t, path.arrivals.times[i], w);
}

} // namespace

double evaluate(const SnpPath& path, const ShockFunctionSpec& shock, double t) {
    if (t < 0.0 || t > path.arrivals.horizon)
        throw std::invalid_argument("evaluate: t outside [0, horizon]");
    CompensatedSum acc;
    for (std::size_t i = 0; i < path.arrivals.count(); ++i) {
        if (path.arrivals.times[i] > t) break;
        acc.add(shock_term(path, shock, i, t));
    }
    return acc.value();
}

std::vector<double> embedded_chain(const SnpPath& path, const ShockFunctionSpec& shock) {
    std::size_t n = path.arrivals.count();
    std::vector<double> chain(n);
    if (n == 0) return chain;
    if (shock.kind() == ShockFunctionSpec::Kind::Constant) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) chain[k] = acc += shock.constant_value() * path.shocks[k];
        return chain;
    }
    if (shock.kind() == ShockFunctionSpec::Kind::Indicator) {
        // h(T_k, T_j) = 1{k=j} for strictly increasing arrivals.
        for (std::size_t k = 0; k < n; ++k) chain[k] = path.shocks[k];
        return chain;
    }
    if (shock.kind() == ShockFunctionSpec::Kind::ExponentialDecay && shock.omega_law().is_constant()) {
        // One-step recursion, O(N) instead of the O(N^2) direct sums.
        double w = shock.omega_law().constant_value();
        double y = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double dt = k == 0 ? 0.0 : path.arrivals.times[k] - path.arrivals.times[k - 1];
            y = (k == 0 ? 0.0 : std::exp(-w * dt) * y) + path.shocks[k];
            chain[k] = y;
        }
        return chain;
    }
    for (std::size_t k = 0; k < n; ++k) {
        CompensatedSum acc;
        for (std::size_t j = 0; j <= k; ++j)
            acc.add(shock_term(path, shock, j, path.arrivals.times[k]));
        chain[k] = acc.value();
    }
    return chain;
}

SupremumResult path_supremum(const SnpPath& path, const ShockFunctionSpec& shock,
                             SupremumMode mode, double grid_dt) {
    SupremumResult res;
    if (path.arrivals.count() == 0) return res;

    if (mode == SupremumMode::DenseGrid) {
        if (!(grid_dt > 0.0)) throw std::invalid_argument("path_supremum: dense mode requires grid_dt > 0");
        double m = 0.0;
        double T = path.arrivals.horizon;
        // Jump instants are included so the grid never misses an arrival peak.
        for (double t : path.arrivals.times) m = std::max(m, evaluate(path, shock, t));
        auto steps = static_cast<std::size_t>(std::ceil(T / grid_dt));
        for (std::size_t k = 1; k <= steps; ++k)
            m = std::max(m, evaluate(path, shock, std::min(T, static_cast<double>(k) * grid_dt)));
        res.value = m;
        return res;
    }

    auto chain = embedded_chain(path, shock);
    double m = *std::max_element(chain.begin(), chain.end());
    if (mode == SupremumMode::SkeletonTerminal)
        m = std::max(m, evaluate(path, shock, path.arrivals.horizon));
    res.value = m;
    if (shock.monotonicity() == ShockFunctionSpec::Monotonicity::Mixed &&
        mode == SupremumMode::Skeleton)
        res.monotonicity_warning = true;
    return res;
}

std::vector<double> kdem_chain(const ScalarLaw& omega_law,
                               const std::function<double(RngEngine&)>& interarrival,
                               const std::function<double(RngEngine&)>& shock_law,
                               std::size_t n_steps, RngEngine& rng,
                               const KdemOptions& opts) {
    if (n_steps == 0) throw std::invalid_argument("kdem_chain: n_steps must be >= 1");
    if (opts.burn_in > 0) {
        // A stationary solution exists only under E[omega] > 0.
        bool ok;
        if (omega_law.exact_expectations()) {
            ok = omega_law.mean() > 0.0;
        } else {
            RngEngine probe = rng;  // probe draws must not disturb the stream
            CompensatedSum s;
            for (int i = 0; i < 10000; ++i) s.add(omega_law.sample(probe));
            ok = s.value() > 0.0;
        }
        if (!ok) throw std::domain_error("no stationary solution: E[omega] <= 0");
    }
    double y = opts.y0.value_or(0.0);
    for (std::size_t i = 0; i < opts.burn_in; ++i) {
        double dt = interarrival(rng);
        y = std::exp(-omega_law.sample(rng) * dt) * y + shock_law(rng);
    }
    std::vector<double> out(n_steps);
    for (auto& v : out) {
        double dt = interarrival(rng);
        y = std::exp(-omega_law.sample(rng) * dt) * y + shock_law(rng);
        v = y;
    }
    return out;
}

std::vector<std::pair<double, double>> path_trace(const SnpPath& path, const ShockFunctionSpec& shock,
                                                  std::size_t n_points) {
    if (n_points < 2) throw std::invalid_argument("path_trace: need at least 2 points");
    std::vector<std::pair<double, double>> out;
    out.reserve(n_points);
    double T = path.arrivals.horizon;
    for (std::size_t k = 0; k < n_points; ++k) {
        double t = T * static_cast<double>(k) / static_cast<double>(n_points - 1);
        out.emplace_back(t, evaluate(path, shock, t));
    }
    return out;
}

} // namespace snrisk
