#include <doctest.h>

#include "oracles.hpp"
#include "snrisk/seqmodel.hpp"

#include <cmath>
#include <limits>
#include <numeric>

using namespace snrisk;

namespace {

// Deterministic renewal gaps sized so exactly n arrivals land in [0, T].
CountingProcessSpec fixed_count(std::size_t n, double horizon) {
    double gap = horizon / (static_cast<double>(n) + 0.5);
    return CountingProcessSpec::renewal([gap](RngEngine&) { return gap; });
}

SequenceScenario identity_scenario(double alpha, CountingProcessSpec counting, double horizon,
                                   Norm norm) {
    return SequenceScenario{HeavyTailDist::pareto(alpha, 1.0), std::move(counting), horizon,
                            MatrixSpec::identity(), norm};
}

} // namespace

TEST_CASE("realize: identity with forced N = 1") {
    auto sc = identity_scenario(2.0, fixed_count(1, 1.0), 1.0, Norm::linf());
    RngEngine rng = make_substream(21, 0);
    for (int rep = 0; rep < 20; ++rep) {
        auto r = realize(sc, rng);
        REQUIRE(r.arrivals.count() == 1);
        CHECK(r.c == r.x);
        CHECK(r.c_norm == doctest::Approx(r.x[0]));
    }
}

TEST_CASE("realize: diagonal and triangular with h = 1 reduce to shock sums") {
    auto ones = ShockFunctionSpec::constant(1.0);
    SequenceScenario diag{HeavyTailDist::pareto(1.5, 1.0),
                          CountingProcessSpec::homogeneous_poisson(3.0), 2.0,
                          MatrixSpec::diagonal(ones), Norm::l1()};
    RngEngine rng = make_substream(22, 0);
    for (int rep = 0; rep < 50; ++rep) {
        auto r = realize(diag, rng);
        double sum = std::accumulate(r.x.begin(), r.x.end(), 0.0);
        CHECK(r.c_norm == doctest::Approx(sum).epsilon(1e-12));
    }

    SequenceScenario tri{HeavyTailDist::pareto(1.5, 1.0),
                         CountingProcessSpec::homogeneous_poisson(3.0), 2.0,
                         MatrixSpec::lower_triangular(ones), Norm::linf()};
    for (int rep = 0; rep < 50; ++rep) {
        auto r = realize(tri, rng);
        double sum = std::accumulate(r.x.begin(), r.x.end(), 0.0);
        // The last row dominates for non-negative shocks.
        CHECK(r.c_norm == doctest::Approx(sum).epsilon(1e-12));
    }
}

TEST_CASE("realize: empty path gives zero norm") {
    auto dead = CountingProcessSpec::inhomogeneous_poisson([](double) { return 0.0; },
                                                           [](double) { return 0.0; });
    auto sc = identity_scenario(2.0, dead, 1.0, Norm::l1());
    RngEngine rng = make_substream(23, 0);
    auto r = realize(sc, rng);
    CHECK(r.arrivals.count() == 0);
    CHECK(r.c_norm == 0.0);
}

TEST_CASE("realized matrix entries and induced norms") {
    auto expw = ShockFunctionSpec::exponential(1.0);
    ArrivalSequence seq;
    seq.times = {0.2, 0.5, 0.9};
    seq.horizon = 1.0;
    RngEngine rng = make_substream(24, 0);

    auto tri = realize_matrix(MatrixSpec::lower_triangular(expw), seq, rng);
    CHECK(tri.entry(0, 1) == 0.0);
    CHECK(tri.entry(1, 0) == doctest::Approx(std::exp(-0.3)));
    CHECK(tri.entry(2, 2) == doctest::Approx(1.0));
    // Column 0 holds exp(-(T_k - T_0)); max is at k = 0, the sum is the l1 norm.
    CHECK(tri.column_norm(0, Norm::linf()) == doctest::Approx(1.0));
    CHECK(tri.column_norm(0, Norm::l1()) ==
          doctest::Approx(1.0 + std::exp(-0.3) + std::exp(-0.7)));
    double expected_row = std::exp(-0.7) + std::exp(-0.4) + 1.0;
    CHECK(tri.induced_norm(Norm::linf()).value == doctest::Approx(expected_row));

    auto idm = realize_matrix(MatrixSpec::identity(), seq, rng);
    CHECK(idm.induced_norm(Norm::l1()).value == 1.0);
    CHECK(idm.column_norm(1, Norm::lp(2.0)) == 1.0);

    auto dense = realize_matrix(MatrixSpec::user_dense([](RngEngine&) { return 2.0; }), seq, rng);
    CHECK(dense.entry(1, 2) == 2.0);
    CHECK(dense.column_norm(0, Norm::l1()) == doctest::Approx(6.0));
    std::vector<double> x{1.0, 1.0, 1.0};
    auto c = dense.apply(x);
    CHECK(c == std::vector<double>{6.0, 6.0, 6.0});
}

TEST_CASE("breiman constant: identity reduces to E[N]") {
    auto sc = identity_scenario(1.5, CountingProcessSpec::homogeneous_poisson(1.0), 10.0,
                                Norm::l1());
    auto est = breiman_constant_mc(sc, 200000, 7);
    CHECK(std::abs(est.estimate - 10.0) < 3.0 * est.ci_half_width);
    CHECK(est.estimate == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("breiman constant: diagonal exponential shock matches the quadrature oracle") {
    SequenceScenario sc{HeavyTailDist::pareto(1.0, 1.0),
                        CountingProcessSpec::homogeneous_poisson(1.0), 1.0,
                        MatrixSpec::diagonal(ShockFunctionSpec::exponential(1.0)), Norm::l1()};
    // E[sum_k h^alpha(T, T_k)] = int_0^T exp(-alpha w (T-s)) lambda ds.
    double by_quadrature =
        oracle::integrate([](double s) { return std::exp(-(1.0 - s)); }, 0.0, 1.0);
    double plug_in = oracle::kdem_tail(1.0, 1.0, 1.0, 1.0);
    CHECK(by_quadrature == doctest::Approx(plug_in).epsilon(1e-10));
    auto est = breiman_constant_mc(sc, 400000, 11);
    CHECK(std::abs(est.estimate - plug_in) < 3.0 * est.ci_half_width);
}

TEST_CASE("breiman constant: N = 1 with constant dense entry gives c^alpha") {
    SequenceScenario sc{HeavyTailDist::pareto(2.0, 1.0), fixed_count(1, 1.0), 1.0,
                        MatrixSpec::user_dense([](RngEngine&) { return 3.0; }), Norm::l1()};
    auto est = breiman_constant_mc(sc, 1000, 3);
    CHECK(est.estimate == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(est.ci_half_width == doctest::Approx(0.0));
}

TEST_CASE("breiman constant flags non-finite samples") {
    SequenceScenario sc{HeavyTailDist::pareto(2.0, 1.0), fixed_count(1, 1.0), 1.0,
                        MatrixSpec::user_dense([](RngEngine&) {
                            return std::numeric_limits<double>::infinity();
                        }),
                        Norm::l1()};
    CHECK_THROWS_AS(breiman_constant_mc(sc, 10, 3), std::runtime_error);
}

TEST_CASE("closed-form spectral atoms") {
    auto three = spectral_atoms_closed(CountLaw::fixed(3), 3);
    for (double p : three.probabilities) CHECK(p == doctest::Approx(1.0 / 3.0));
    CHECK(three.truncation_deficit == doctest::Approx(0.0));

    auto one = spectral_atoms_closed(CountLaw::fixed(1), 2);
    CHECK(one.probabilities[0] == doctest::Approx(1.0));
    CHECK(one.probabilities[1] == doctest::Approx(0.0));

    // Poisson(2), raw law: p_j = P(N >= j)/2, checked against direct summation.
    auto pois = spectral_atoms_closed(CountLaw::poisson(2.0), 3);
    CHECK(pois.probabilities[0] == doctest::Approx(oracle::poisson_tail(2.0, 1) / 2.0).epsilon(1e-12));
    CHECK(pois.probabilities[1] == doctest::Approx(oracle::poisson_tail(2.0, 2) / 2.0).epsilon(1e-12));
    CHECK(pois.probabilities[2] == doctest::Approx(oracle::poisson_tail(2.0, 3) / 2.0).epsilon(1e-12));
    CHECK(pois.probabilities[0] == doctest::Approx(0.432332).epsilon(1e-5));
    CHECK(pois.probabilities[1] == doctest::Approx(0.297008).epsilon(1e-5));
    CHECK(pois.probabilities[2] == doctest::Approx(0.161662).epsilon(1e-5));

    CHECK_THROWS_AS(spectral_atoms_closed(CountLaw::poisson(0.0), 3), std::domain_error);

    // Atom normalization: the truncated sum approaches 1 from below.
    auto deep = spectral_atoms_closed(CountLaw::poisson(3.0), 60);
    double total = 0.0;
    double prev = 1.0;
    for (double p : deep.probabilities) {
        CHECK(p <= prev + 1e-15);  // non-increasing in j
        prev = p;
        total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(deep.truncation_deficit == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("empirical spectral measure: identity with N = 3") {
    auto sc = identity_scenario(2.0, fixed_count(3, 1.0), 1.0, Norm::linf());
    auto est = empirical_spectral_measure(sc, ThresholdChoice::quantile(0.995), 3, 2000000, 31);
    REQUIRE(est.n_exceedances >= 200);
    for (int j = 0; j < 3; ++j)
        CHECK(est.atom_weights[j] == doctest::Approx(1.0 / 3.0).epsilon(0.15));
    // Mean constraint: E|Theta_i|^alpha = 1/n for fixed length n.
    for (int j = 0; j < 3; ++j) CHECK(est.theta_alpha_mean[j] == doctest::Approx(1.0 / 3.0).epsilon(0.2));
    double wsum = est.atom_weights[0] + est.atom_weights[1] + est.atom_weights[2];
    CHECK(wsum == doctest::Approx(1.0));
}

TEST_CASE("empirical spectral measure: N = 1 concentrates on the first atom") {
    SequenceScenario sc{HeavyTailDist::pareto(2.0, 1.0), fixed_count(1, 1.0), 1.0,
                        MatrixSpec::user_dense([](RngEngine&) { return 2.5; }), Norm::l1()};
    auto est = empirical_spectral_measure(sc, ThresholdChoice::quantile(0.9), 2, 100000, 32);
    CHECK(est.atom_weights[0] == doctest::Approx(1.0));
    CHECK(est.theta_alpha_mean[0] == doctest::Approx(1.0));
    CHECK(est.atom_weights[1] == doctest::Approx(0.0));
}

TEST_CASE("empirical spectral measure: impossible threshold exhausts the budget") {
    auto sc = identity_scenario(2.0, fixed_count(2, 1.0), 1.0, Norm::linf());
    CHECK_THROWS_WITH_AS(
        empirical_spectral_measure(sc, ThresholdChoice::raw(1e12), 2, 20000, 33),
        "threshold too extreme for budget", std::runtime_error);
}

TEST_CASE("spectral estimate is stable in the threshold (homogeneity)") {
    auto sc = identity_scenario(2.0, fixed_count(3, 1.0), 1.0, Norm::linf());
    auto lo = empirical_spectral_measure(sc, ThresholdChoice::raw(10.0), 3, 4000000, 34);
    auto hi = empirical_spectral_measure(sc, ThresholdChoice::raw(20.0), 3, 4000000, 34);
    for (int j = 0; j < 3; ++j) {
        double drift = std::abs(lo.atom_weights[j] - hi.atom_weights[j]);
        CHECK(drift < 2.0 * (lo.atom_ci_half[j] + hi.atom_ci_half[j]));
    }
}

TEST_CASE("h4 diagnostic: deterministic, poisson, and heavy dense cases") {
    // Identity with N = n: the statistic is exactly n^{1+alpha+eps}.
    auto fixed = identity_scenario(2.0, fixed_count(3, 1.0), 1.0, Norm::l1());
    auto d = h4_moment_diagnostic(fixed, 0.5, 500, 41);
    CHECK(d.estimate == doctest::Approx(std::pow(3.0, 3.5)).epsilon(1e-12));
    CHECK(!d.unstable);

    auto pois = identity_scenario(1.5, CountingProcessSpec::homogeneous_poisson(2.0), 1.0,
                                  Norm::l1());
    auto dp = h4_moment_diagnostic(pois, 0.5, 20000, 42);
    CHECK(dp.estimate > 0.0);
    CHECK(!dp.unstable);

    // Dense entries with tail index below alpha: unstable concentration.
    auto heavy_law = HeavyTailDist::pareto(0.8, 1.0);
    SequenceScenario heavy{HeavyTailDist::pareto(2.0, 1.0), fixed_count(2, 1.0), 1.0,
                           MatrixSpec::user_dense([heavy_law](RngEngine& rng) {
                               return heavy_law.sample(rng);
                           }),
                           Norm::l1()};
    auto dh = h4_moment_diagnostic(heavy, 0.5, 5000, 43);
    CHECK(dh.unstable);
}
