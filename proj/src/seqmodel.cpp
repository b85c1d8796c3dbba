#include "snrisk/seqmodel.hpp"

#include "snrisk/parallel.hpp"
#include "snrisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

namespace snrisk {

InducedNormBound induced_matrix_norm(const Norm& norm, const DenseMatrix& m) {
    InducedNormBound out;
    if (m.n == 0) return out;
    double max_col = 0.0, max_row = 0.0;
    for (std::size_t j = 0; j < m.n; ++j) {
        double cs = 0.0;
        for (std::size_t i = 0; i < m.n; ++i) cs += std::abs(m(i, j));
        max_col = std::max(max_col, cs);
    }
    for (std::size_t i = 0; i < m.n; ++i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < m.n; ++j) rs += std::abs(m(i, j));
        max_row = std::max(max_row, rs);
    }
    switch (norm.kind()) {
        case Norm::Kind::L1:
            out.value = max_col;
            break;
        case Norm::Kind::Linf:
            out.value = max_row;
            break;
        case Norm::Kind::Lp:
            out.value = std::pow(max_col, 1.0 / norm.p()) * std::pow(max_row, 1.0 - 1.0 / norm.p());
            out.exact = false;
            break;
    }
    return out;
}

MatrixSpec MatrixSpec::identity() {
    return MatrixSpec();
}

MatrixSpec MatrixSpec::diagonal(ShockFunctionSpec shock) {
    MatrixSpec s;
    s.kind_ = Kind::Diagonal;
    s.shock_ = std::move(shock);
    return s;
}

MatrixSpec MatrixSpec::lower_triangular(ShockFunctionSpec shock) {
    MatrixSpec s;
    s.kind_ = Kind::LowerTriangularShock;
    s.shock_ = std::move(shock);
    return s;
}

MatrixSpec MatrixSpec::user_dense(std::function<double(RngEngine&)> entry_law) {
    if (!entry_law) throw std::invalid_argument("user dense matrix: entry law required");
    MatrixSpec s;
    s.kind_ = Kind::UserDense;
    s.entry_law_ = std::move(entry_law);
    return s;
}

const ShockFunctionSpec& MatrixSpec::shock() const {
    if (kind_ != Kind::Diagonal && kind_ != Kind::LowerTriangularShock)
        throw std::logic_error("matrix spec: no shock function for this kind");
    return shock_;
}

RealizedMatrix realize_matrix(const MatrixSpec& spec, const ArrivalSequence& arrivals, RngEngine& rng) {
    RealizedMatrix m;
    m.kind_ = spec.kind_;
    m.n_ = arrivals.count();
    m.horizon_ = arrivals.horizon;
    switch (spec.kind_) {
        case MatrixSpec::Kind::Identity:
            break;
        case MatrixSpec::Kind::Diagonal: {
            m.diag_.resize(m.n_);
            for (std::size_t j = 0; j < m.n_; ++j) {
                double w = spec.shock_.needs_omega() ? spec.shock_.draw_omega(rng) : 0.0;
                m.diag_[j] = spec.shock_.eval(arrivals.horizon, arrivals.times[j], w);
            }
            break;
        }
        case MatrixSpec::Kind::LowerTriangularShock: {
            m.times_ = arrivals.times;
            m.shock_ = &spec.shock_;
            if (spec.shock_.needs_omega()) {
                m.omegas_.resize(m.n_);
                for (auto& w : m.omegas_) w = spec.shock_.draw_omega(rng);
            }
            break;
        }
        case MatrixSpec::Kind::UserDense: {
            m.dense_.n = m.n_;
            m.dense_.a.resize(m.n_ * m.n_);
            for (auto& v : m.dense_.a) {
                v = spec.entry_law_(rng);
                if (v < 0.0) throw std::runtime_error("user dense matrix: negative entry drawn");
            }
            break;
        }
    }
    return m;
}

double RealizedMatrix::entry(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) throw std::out_of_range("matrix entry index");
    switch (kind_) {
        case MatrixSpec::Kind::Identity:
            return i == j ? 1.0 : 0.0;
        case MatrixSpec::Kind::Diagonal:
            return i == j ? diag_[j] : 0.0;
        case MatrixSpec::Kind::LowerTriangularShock: {
            if (i < j) return 0.0;
            double w = omegas_.empty() ? 0.0 : omegas_[j];
            return shock_->eval(times_[i], times_[j], w);
        }
        case MatrixSpec::Kind::UserDense:
            return dense_(i, j);
    }
    return 0.0;
}

double RealizedMatrix::column_norm(std::size_t j, const Norm& norm) const {
    if (j >= n_) throw std::out_of_range("column index");
    switch (kind_) {
        case MatrixSpec::Kind::Identity:
            return 1.0;  // canonical basis vectors are standardized under H3 norms
        case MatrixSpec::Kind::Diagonal:
            return std::abs(diag_[j]);
        case MatrixSpec::Kind::LowerTriangularShock: {
            // Column j holds h_j(T_k, T_j) for rows k >= j; only the scan
            // result is kept, never the column itself.
            double w = omegas_.empty() ? 0.0 : omegas_[j];
            switch (norm.kind()) {
                case Norm::Kind::Linf: {
                    double mx = 0.0;
                    for (std::size_t k = j; k < n_; ++k)
                        mx = std::max(mx, shock_->eval(times_[k], times_[j], w));
                    return mx;
                }
                case Norm::Kind::L1: {
                    CompensatedSum s;
                    for (std::size_t k = j; k < n_; ++k)
                        s.add(shock_->eval(times_[k], times_[j], w));
                    return s.value();
                }
                case Norm::Kind::Lp: {
                    double mx = 0.0;
                    for (std::size_t k = j; k < n_; ++k)
                        mx = std::max(mx, shock_->eval(times_[k], times_[j], w));
                    if (mx == 0.0) return 0.0;
                    double s = 0.0;
                    for (std::size_t k = j; k < n_; ++k)
                        s += std::pow(shock_->eval(times_[k], times_[j], w) / mx, norm.p());
                    return mx * std::pow(s, 1.0 / norm.p());
                }
            }
            return 0.0;
        }
        case MatrixSpec::Kind::UserDense: {
            std::vector<double> col(n_);
            for (std::size_t i = 0; i < n_; ++i) col[i] = dense_(i, j);
            return norm(col);
        }
    }
    return 0.0;
}

std::vector<double> RealizedMatrix::apply(std::span<const double> x) const {
    if (x.size() != n_) throw std::invalid_argument("matrix apply: dimension mismatch");
    std::vector<double> c(n_);
    switch (kind_) {
        case MatrixSpec::Kind::Identity:
            std::copy(x.begin(), x.end(), c.begin());
            break;
        case MatrixSpec::Kind::Diagonal:
            for (std::size_t i = 0; i < n_; ++i) c[i] = diag_[i] * x[i];
            break;
        case MatrixSpec::Kind::LowerTriangularShock:
            for (std::size_t k = 0; k < n_; ++k) {
                CompensatedSum s;
                for (std::size_t j = 0; j <= k; ++j) {
                    double w = omegas_.empty() ? 0.0 : omegas_[j];
                    s.add(shock_->eval(times_[k], times_[j], w) * x[j]);
                }
                c[k] = s.value();
            }
            break;
        case MatrixSpec::Kind::UserDense:
            for (std::size_t i = 0; i < n_; ++i) {
                CompensatedSum s;
                for (std::size_t j = 0; j < n_; ++j) s.add(dense_(i, j) * x[j]);
                c[i] = s.value();
            }
            break;
    }
    return c;
}

InducedNormBound RealizedMatrix::induced_norm(const Norm& norm) const {
    InducedNormBound out;
    if (n_ == 0) return out;
    switch (kind_) {
        case MatrixSpec::Kind::Identity:
            out.value = 1.0;
            return out;
        case MatrixSpec::Kind::Diagonal: {
            // Diagonal operators have the same induced norm for every lp.
            double mx = 0.0;
            for (double d : diag_) mx = std::max(mx, std::abs(d));
            out.value = mx;
            return out;
        }
        case MatrixSpec::Kind::LowerTriangularShock: {
            double max_col = 0.0, max_row = 0.0;
            Norm l1 = Norm::l1();
            for (std::size_t j = 0; j < n_; ++j) max_col = std::max(max_col, column_norm(j, l1));
            for (std::size_t k = 0; k < n_; ++k) {
                CompensatedSum rs;
                for (std::size_t j = 0; j <= k; ++j) {
                    double w = omegas_.empty() ? 0.0 : omegas_[j];
                    rs.add(shock_->eval(times_[k], times_[j], w));
                }
                max_row = std::max(max_row, rs.value());
            }
            switch (norm.kind()) {
                case Norm::Kind::L1: out.value = max_col; break;
                case Norm::Kind::Linf: out.value = max_row; break;
                case Norm::Kind::Lp:
                    out.value = std::pow(max_col, 1.0 / norm.p()) *
                                std::pow(max_row, 1.0 - 1.0 / norm.p());
                    out.exact = false;
                    break;
            }
            return out;
        }
        case MatrixSpec::Kind::UserDense:
            return induced_matrix_norm(norm, dense_);
    }
    return out;
}

Realization realize(const SequenceScenario& scenario, RngEngine& rng) {
    Realization r;
    r.arrivals = scenario.counting.sample_arrivals(scenario.horizon, rng);
    std::size_t n = r.arrivals.count();
    r.x = std::visit([&](const auto& m) { return m.sample(n, rng); }, scenario.marginal);
    r.a = realize_matrix(scenario.matrix, r.arrivals, rng);
    r.c = r.a.apply(r.x);
    r.c_norm = scenario.norm(r.c);
    return r;
}

MonteCarloEstimate breiman_constant_mc(const SequenceScenario& scenario, std::size_t n_samples,
                                       std::uint64_t seed, int workers) {
    if (n_samples == 0) throw std::invalid_argument("breiman_constant_mc: n_samples must be >= 1");
    double alpha = scenario.alpha();
    BlockPlan plan{n_samples, 8192};
    std::vector<MomentAccumulator> block_acc(plan.n_blocks());
    run_blocks(plan, workers, [&](std::size_t b, std::size_t lo, std::size_t hi) {
        RngEngine rng = make_substream(seed, b);
        auto& acc = block_acc[b];
        for (std::size_t i = lo; i < hi; ++i) {
            auto arrivals = scenario.counting.sample_arrivals(scenario.horizon, rng);
            auto a = realize_matrix(scenario.matrix, arrivals, rng);
            CompensatedSum s;
            for (std::size_t k = 0; k < a.dim(); ++k)
                s.add(std::pow(a.column_norm(k, scenario.norm), alpha));
            double v = s.value();
            if (!std::isfinite(v))
                throw std::runtime_error("breiman_constant_mc: non-finite sample at draw " +
                                         std::to_string(i));
            acc.add(v);
        }
    });
    MomentAccumulator total;
    for (const auto& acc : block_acc) total.merge(acc);
    return {total.mean(), 1.96 * total.std_error(), total.count()};
}

CountLaw CountLaw::fixed(std::size_t n) {
    CountLaw l;
    l.kind_ = Kind::Fixed;
    l.n_ = n;
    l.mean_ = static_cast<double>(n);
    return l;
}

CountLaw CountLaw::poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("Poisson law: mean must be >= 0");
    CountLaw l;
    l.kind_ = Kind::Poisson;
    l.mean_ = mean;
    return l;
}

CountLaw CountLaw::pmf(std::vector<double> probs) {
    if (probs.empty()) throw std::invalid_argument("pmf law: empty");
    double total = 0.0, mean = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (probs[k] < 0.0) throw std::invalid_argument("pmf law: negative mass");
        total += probs[k];
        mean += static_cast<double>(k) * probs[k];
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("pmf law: mass must sum to 1");
    CountLaw l;
    l.kind_ = Kind::Pmf;
    l.probs_ = std::move(probs);
    l.mean_ = mean;
    return l;
}

double CountLaw::tail(std::size_t j) const {
    switch (kind_) {
        case Kind::Fixed:
            return j <= n_ ? 1.0 : 0.0;
        case Kind::Poisson: {
            if (j == 0) return 1.0;
            // P(N >= j) = 1 - sum_{k<j} pmf(k), accumulated in extended precision
            // through the recurrence pmf(k) = pmf(k-1) * mean / k.
            long double pmf = std::exp(-static_cast<long double>(mean_));
            long double cdf = pmf;
            for (std::size_t k = 1; k < j; ++k) {
                pmf *= mean_ / static_cast<long double>(k);
                cdf += pmf;
            }
            return static_cast<double>(std::max<long double>(0.0L, 1.0L - cdf));
        }
        case Kind::Pmf: {
            double t = 0.0;
            for (std::size_t k = probs_.size(); k-- > j;) t += probs_[k];
            return j < probs_.size() ? t : 0.0;
        }
    }
    return 0.0;
}

double CountLaw::mean() const { return mean_; }

SpectralAtoms spectral_atoms_closed(const CountLaw& law, std::size_t j_max) {
    double m = law.mean();
    if (!(m > 0.0)) throw std::domain_error("spectral atoms: E[N] = 0");
    SpectralAtoms atoms;
    atoms.probabilities.resize(j_max);
    double acc = 0.0;
    for (std::size_t j = 1; j <= j_max; ++j) {
        double p = law.tail(j) / m;
        atoms.probabilities[j - 1] = p;
        acc += p;
    }
    atoms.truncation_deficit = 1.0 - acc;
    return atoms;
}

namespace {

struct SpectralBlock {
    std::size_t n_samples = 0;
    std::size_t n_exceed = 0;
    std::vector<std::size_t> argmax_count;
    std::vector<CompensatedSum> theta_alpha_sum;
};

} // namespace

SpectralEstimate empirical_spectral_measure(const SequenceScenario& scenario,
                                            const ThresholdChoice& threshold,
                                            std::size_t j_max, std::size_t sample_cap,
                                            std::uint64_t seed, int workers,
                                            std::size_t min_exceedances) {
    if (j_max == 0) throw std::invalid_argument("spectral estimate: j_max must be >= 1");
    double alpha = scenario.alpha();

    double x = threshold.value;
    if (threshold.kind == ThresholdChoice::Kind::QuantileOfNorm) {
        if (!(threshold.value > 0.0 && threshold.value < 1.0))
            throw std::invalid_argument("spectral estimate: quantile level outside (0,1)");
        // Pilot run on a reserved substream places the threshold empirically.
        RngEngine pilot = make_substream(seed, 0xfffffff0ULL);
        std::vector<double> norms(10000);
        for (auto& v : norms) v = realize(scenario, pilot).c_norm;
        x = empirical_quantile(std::move(norms), threshold.value);
    }

    // Fixed chunk decomposition: chunks are scanned in order and the loop
    // stops at the first chunk boundary where enough exceedances have
    // accumulated, so the estimate never depends on the worker count.
    const std::size_t chunk = 1 << 16;
    const std::size_t block = 1 << 13;
    std::vector<SpectralBlock> merged_blocks;
    std::size_t produced = 0, exceed_total = 0;

    while (produced < sample_cap) {
        std::size_t this_chunk = std::min(chunk, sample_cap - produced);
        BlockPlan plan{this_chunk, block};
        std::size_t base_block = produced / block;
        std::vector<SpectralBlock> blocks(plan.n_blocks());
        run_blocks(plan, workers, [&](std::size_t b, std::size_t lo, std::size_t hi) {
            RngEngine rng = make_substream(seed, base_block + b);
            auto& out = blocks[b];
            out.argmax_count.assign(j_max, 0);
            out.theta_alpha_sum.assign(j_max, {});
            for (std::size_t i = lo; i < hi; ++i) {
                auto r = realize(scenario, rng);
                ++out.n_samples;
                if (!(r.c_norm > x)) continue;
                ++out.n_exceed;
                std::size_t arg = 0;
                for (std::size_t k = 1; k < r.c.size(); ++k)
                    if (std::abs(r.c[k]) > std::abs(r.c[arg])) arg = k;
                if (arg < j_max) ++out.argmax_count[arg];
                for (std::size_t k = 0; k < j_max; ++k) {
                    double ci = k < r.c.size() ? std::abs(r.c[k]) / r.c_norm : 0.0;
                    out.theta_alpha_sum[k].add(std::pow(ci, alpha));
                }
            }
        });
        for (auto& b : blocks) {
            exceed_total += b.n_exceed;
            merged_blocks.push_back(std::move(b));
        }
        produced += this_chunk;
        if (exceed_total >= min_exceedances) break;
    }

    if (exceed_total < min_exceedances)
        throw std::runtime_error("threshold too extreme for budget");

    SpectralEstimate est;
    est.threshold = x;
    est.atom_weights.assign(j_max, 0.0);
    est.atom_ci_half.assign(j_max, 0.0);
    est.theta_alpha_mean.assign(j_max, 0.0);
    std::vector<std::size_t> counts(j_max, 0);
    std::vector<CompensatedSum> theta_sum(j_max);
    for (const auto& b : merged_blocks) {
        est.n_samples_used += b.n_samples;
        est.n_exceedances += b.n_exceed;
        for (std::size_t k = 0; k < j_max; ++k) {
            counts[k] += b.argmax_count[k];
            theta_sum[k].merge(b.theta_alpha_sum[k]);
        }
    }
    for (std::size_t k = 0; k < j_max; ++k) {
        est.atom_weights[k] = static_cast<double>(counts[k]) / static_cast<double>(est.n_exceedances);
        est.atom_ci_half[k] = wilson_score(counts[k], est.n_exceedances).half_width();
        est.theta_alpha_mean[k] = theta_sum[k].value() / static_cast<double>(est.n_exceedances);
    }
    return est;
}

H4Diagnostic h4_moment_diagnostic(const SequenceScenario& scenario, double eps,
                                  std::size_t n_samples, std::uint64_t seed) {
    if (!(eps > 0.0)) throw std::invalid_argument("h4 diagnostic: eps must be > 0");
    if (n_samples == 0) throw std::invalid_argument("h4 diagnostic: n_samples must be >= 1");
    double alpha = scenario.alpha();
    RngEngine rng = make_substream(seed, 0);
    std::vector<double> vals(n_samples);
    H4Diagnostic out;
    for (auto& v : vals) {
        auto arrivals = scenario.counting.sample_arrivals(scenario.horizon, rng);
        auto a = realize_matrix(scenario.matrix, arrivals, rng);
        if (a.dim() == 0) {
            v = 0.0;
            continue;
        }
        auto ind = a.induced_norm(scenario.norm);
        out.induced_norm_exact = out.induced_norm_exact && ind.exact;
        v = std::pow(ind.value, alpha + eps) *
            std::pow(static_cast<double>(a.dim()), 1.0 + alpha + eps);
    }
    CompensatedSum total;
    for (double v : vals) total.add(v);
    out.estimate = total.value() / static_cast<double>(n_samples);
    std::sort(vals.begin(), vals.end());
    std::size_t top = std::max<std::size_t>(1, n_samples / 100);
    CompensatedSum top_sum;
    for (std::size_t i = n_samples - top; i < n_samples; ++i) top_sum.add(vals[i]);
    out.top_share = total.value() > 0.0 ? top_sum.value() / total.value() : 0.0;
    out.unstable = out.top_share > 0.5;
    return out;
}

} // namespace snrisk
