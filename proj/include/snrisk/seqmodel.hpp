#pragma once

#include "snrisk/arrivals.hpp"
#include "snrisk/heavytail.hpp"
#include "snrisk/norms.hpp"
#include "snrisk/rng.hpp"
#include "snrisk/snp.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace snrisk {

class MatrixSpec;
class RealizedMatrix;
RealizedMatrix realize_matrix(const MatrixSpec& spec, const ArrivalSequence& arrivals,
                              RngEngine& rng);

// Random N x N matrix builder. Shock-based kinds are realized against an
// arrival sequence; columns are exposed through their norms so the ruin
// triangular matrix never materializes the full N x N array.
class MatrixSpec {
public:
    enum class Kind { Identity, Diagonal, LowerTriangularShock, UserDense };

    static MatrixSpec identity();
    static MatrixSpec diagonal(ShockFunctionSpec shock);
    static MatrixSpec lower_triangular(ShockFunctionSpec shock);
    static MatrixSpec user_dense(std::function<double(RngEngine&)> entry_law);

    Kind kind() const { return kind_; }
    const ShockFunctionSpec& shock() const;

private:
    MatrixSpec() : shock_(ShockFunctionSpec::constant(1.0)) {}
    Kind kind_ = Kind::Identity;
    ShockFunctionSpec shock_;
    std::function<double(RngEngine&)> entry_law_;

    friend class RealizedMatrix;
    friend RealizedMatrix realize_matrix(const MatrixSpec& spec, const ArrivalSequence& arrivals,
                                         RngEngine& rng);
};

// One draw of A(N), tied to the arrivals that fixed its size.
class RealizedMatrix {
public:
    std::size_t dim() const { return n_; }
    MatrixSpec::Kind kind() const { return kind_; }

    // ||A_j|| for the j-th column (0-based) under the given sequence norm.
    double column_norm(std::size_t j, const Norm& norm) const;

    // C = A x.
    std::vector<double> apply(std::span<const double> x) const;

    // Induced-operator-norm bound of the whole matrix.
    InducedNormBound induced_norm(const Norm& norm) const;

    // Dense entries; materialized lazily except for UserDense.
    double entry(std::size_t i, std::size_t j) const;

private:
    friend RealizedMatrix realize_matrix(const MatrixSpec& spec, const ArrivalSequence& arrivals,
                                         RngEngine& rng);
    MatrixSpec::Kind kind_ = MatrixSpec::Kind::Identity;
    std::size_t n_ = 0;
    std::vector<double> times_;      // arrival times for shock-based kinds
    double horizon_ = 0.0;
    std::vector<double> diag_;       // Diagonal: realized h_j(T, T_j)
    std::vector<double> omegas_;     // LowerTriangularShock with exponential shocks
    const ShockFunctionSpec* shock_ = nullptr;  // borrowed from the spec
    DenseMatrix dense_;              // UserDense only
};

RealizedMatrix realize_matrix(const MatrixSpec& spec, const ArrivalSequence& arrivals, RngEngine& rng);

// The full C(N) = A(N) X(N) model.
struct SequenceScenario {
    MarginalModel marginal;
    CountingProcessSpec counting;
    double horizon;
    MatrixSpec matrix;
    Norm norm;

    double alpha() const {
        return std::visit([](const auto& m) { return m.alpha(); }, marginal);
    }
};

struct Realization {
    ArrivalSequence arrivals;
    std::vector<double> x;
    RealizedMatrix a;
    std::vector<double> c;
    double c_norm = 0.0;  // 0 on empty paths
};

Realization realize(const SequenceScenario& scenario, RngEngine& rng);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double ci_half_width = 0.0;  // 1.96 standard errors
    std::size_t n_samples = 0;
};

// E[sum_k ||A_k(N)||^alpha], the constant in the random-length tail equivalence.
MonteCarloEstimate breiman_constant_mc(const SequenceScenario& scenario, std::size_t n_samples,
                                       std::uint64_t seed, int workers = 1);

struct SpectralAtoms {
    std::vector<double> probabilities;  // p_j for j = 1..j_max
    double truncation_deficit = 0.0;    // 1 - sum p_j
};

// Counting law abstraction for the closed-form spectral atoms.
class CountLaw {
public:
    static CountLaw fixed(std::size_t n);
    static CountLaw poisson(double mean);
    // Explicit pmf over {0,1,2,...}.
    static CountLaw pmf(std::vector<double> probs);

    double tail(std::size_t j) const;  // P(N >= j)
    double mean() const;

private:
    CountLaw() = default;
    enum class Kind { Fixed, Poisson, Pmf } kind_ = Kind::Fixed;
    std::size_t n_ = 0;
    double mean_ = 0.0;
    std::vector<double> probs_;
};

// p_j = P(N >= j) / E[N] on the canonical basis, truncated at j_max.
SpectralAtoms spectral_atoms_closed(const CountLaw& law, std::size_t j_max);

struct ThresholdChoice {
    enum class Kind { Raw, QuantileOfNorm } kind = Kind::Raw;
    double value = 0.0;

    static ThresholdChoice raw(double x) { return {Kind::Raw, x}; }
    static ThresholdChoice quantile(double level) { return {Kind::QuantileOfNorm, level}; }
};

struct SpectralEstimate {
    double threshold = 0.0;
    std::size_t n_exceedances = 0;
    std::size_t n_samples_used = 0;
    std::vector<double> atom_weights;    // argmax-coordinate frequencies, j = 1..j_max
    std::vector<double> atom_ci_half;    // score-interval half widths
    std::vector<double> theta_alpha_mean;  // mean of |C_i / ||C|| |^alpha per coordinate
};

// Empirical law of C/||C|| given ||C|| > x. Resamples until at least
// `min_exceedances` are collected, or throws once the sample cap is reached.
SpectralEstimate empirical_spectral_measure(const SequenceScenario& scenario,
                                            const ThresholdChoice& threshold,
                                            std::size_t j_max, std::size_t sample_cap,
                                            std::uint64_t seed, int workers = 1,
                                            std::size_t min_exceedances = 200);

struct H4Diagnostic {
    double estimate = 0.0;
    bool unstable = false;      // top 1% of samples carries > 50% of the mean
    double top_share = 0.0;
    bool induced_norm_exact = true;
};

// Empirical E[||A(N)||^{alpha+eps} N^{1+alpha+eps}].
H4Diagnostic h4_moment_diagnostic(const SequenceScenario& scenario, double eps,
                                  std::size_t n_samples, std::uint64_t seed);

} // namespace snrisk
