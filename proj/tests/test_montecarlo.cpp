#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gkdv/montecarlo.hpp"

using namespace gkdv;
using std::numbers::pi;

namespace {

Field bump(const Grid& g, double amplitude = 1.0) {
    return restrict_to_randomizable(Field::sample(g, [=](double x) { return cx(amplitude * std::exp(-x * x)); }));
}

const Grid& small_grid() {
    static const Grid g(4.0 * pi, 64);
    return g;
}

}  // namespace

TEST(Ensemble, DegenerateLawReproducesNorm) {
    const Field phi = bump(small_grid());
    const EnsembleConfig cfg{Distribution::ones, 3, 1, 1};
    ObservableSpec spec;
    spec.s = 0.3;
    const auto recs = run_ensemble(phi, cfg, spec);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_NEAR(recs[0].at("hs_norm"), sobolev_norm(phi, 0.3), 1e-12);
    EXPECT_EQ(recs[0].seed, sample_seed(3, 0));
}

TEST(Ensemble, DeterministicAcrossRunsAndThreads) {
    const Field phi = bump(small_grid());
    ObservableSpec spec;
    spec.l2_norm = true;
    spec.strichartz = StrichartzSpec{4.0, 4.0, 0.25, 8, true};
    spec.linf_T = 0.25;
    spec.linf_time_samples = 4;
    EnsembleConfig cfg{Distribution::gaussian, 11, 40, 1};
    const auto a = run_ensemble(phi, cfg, spec);
    const auto b = run_ensemble(phi, cfg, spec);
    cfg.threads = 4;
    const auto c = run_ensemble(phi, cfg, spec);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].observables, b[i].observables);
        EXPECT_EQ(a[i].observables, c[i].observables);
        EXPECT_EQ(a[i].seed, c[i].seed);
    }
    cfg.seed = 12;
    EXPECT_NE(run_ensemble(phi, cfg, spec)[0].observables, a[0].observables);
    for (const auto& r : a)
        for (const auto& [k, v] : r.observables) EXPECT_TRUE(std::isfinite(v)) << k;
}

TEST(Ensemble, MeanMassMatchesBandEnergy) {
    const Field phi = bump(small_grid());
    ObservableSpec spec;
    spec.hs_norm = false;
    spec.l2_norm = true;
    const auto recs = run_ensemble(phi, {Distribution::gaussian, 5, 10000, 1}, spec);
    double m = 0.0, m2 = 0.0;
    for (const auto& r : recs) {
        const double v = std::pow(r.at("l2_norm"), 2);
        m += v;
        m2 += v * v;
    }
    const double n = static_cast<double>(recs.size());
    m /= n;
    const double se = std::sqrt((m2 / n - m * m) / n);
    EXPECT_LE(std::abs(m - band_energy_sum(phi)), 3.0 * se);
}

TEST(Ensemble, RejectsDataBeyondRandomizableBand) {
    const Grid g(4.0 * pi, 64);
    const Field wide = Field::sample(g, [](double x) { return cx(std::exp(-x * x)); });
    EXPECT_THROW(run_ensemble(wide, {}, {}), PreconditionError);
}

TEST(Ensemble, PicardBlowupRecordedNotThrown) {
    const Grid g(pi, 16);
    const Field huge = Field::sample(g, [](double x) { return cx(1e40 * std::cos(x)); });
    ObservableSpec spec;
    PicardSpec ps;
    ps.T = 0.0625;
    ps.options.axis = TimeAxis(1.0, 512);
    spec.picard = ps;
    const auto recs = run_ensemble(huge, {Distribution::ones, 1, 2, 1}, spec);
    ASSERT_EQ(recs.size(), 2u);
    for (const auto& r : recs) {
        EXPECT_TRUE(r.blown_up);
        EXPECT_EQ(r.at("picard_failed"), 1.0);
    }
}

TEST(TailFit, RecoversRayleighSlope) {
    // |X + iY| with X, Y iid N(0, 1): P(R > l) = exp(-l^2 / 2) exactly.
    std::mt19937_64 eng(2024);
    std::normal_distribution<double> nd;
    std::vector<double> v(100000);
    for (double& x : v) x = std::hypot(nd(eng), nd(eng));
    const TailFit fit = tail_fit(v, quantile_grid(v, 0.5, 0.995, 25));
    EXPECT_NEAR(fit.slope, -0.5, 0.05);
    EXPECT_GT(fit.r2, 0.99);
    for (std::size_t i = 0; i < fit.probability.size(); ++i) {
        EXPECT_GE(fit.probability[i], 0.0);
        EXPECT_LE(fit.probability[i], 1.0);
        if (i) {
            EXPECT_LE(fit.probability[i], fit.probability[i - 1]);
        }
    }
}

TEST(TailFit, Preconditions) {
    const std::vector<double> constant(2000, 1.5);
    EXPECT_THROW(tail_fit(constant, {1.5, 1.5}), std::invalid_argument);
    std::vector<double> v(2000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    EXPECT_THROW(tail_fit(std::vector<double>(v.begin(), v.begin() + 999), {600.0, 700.0}), std::invalid_argument);
    EXPECT_THROW(tail_fit(v, {100.0, 1500.0}), std::invalid_argument);   // below q50
    EXPECT_THROW(tail_fit(v, {1500.0, 1999.0}), std::invalid_argument);  // above q99.5
    EXPECT_NO_THROW(tail_fit(v, {1200.0, 1800.0}));
}

TEST(TailFit, HsNormTailIsSubGaussian) {
    const Field phi = bump(small_grid());
    const auto recs = run_ensemble(phi, {Distribution::gaussian, 8, 4000, 1}, {});
    const TailFit fit = tail_fit_quantiles(column(recs, "hs_norm"));
    EXPECT_LT(fit.slope, 0.0);
    EXPECT_GE(fit.r2, 0.9);
}

TEST(Strichartz, ConstantInTimeRecoversExactScaling) {
    const Field phi = bump(small_grid());
    StrichartzOptions opt;
    opt.dispersion = false;
    opt.time_samples = 4;
    const StrichartzReport r = strichartz_scaling(phi, {Distribution::gaussian, 4, 2000, 1}, opt);
    EXPECT_NEAR(r.exponent, 0.25, 0.0025);
    ASSERT_EQ(r.rows.size(), 3u);
    for (const auto& row : r.rows) {
        EXPECT_LE(row.ci_lo, row.scale);
        EXPECT_GE(row.ci_hi, row.scale);
    }
}

TEST(Strichartz, DoublingDataDoublesScale) {
    const Field phi = bump(small_grid());
    StrichartzOptions opt;
    opt.time_samples = 8;
    const EnsembleConfig cfg{Distribution::gaussian, 4, 1500, 1};
    const StrichartzReport a = strichartz_scaling(phi, cfg, opt);
    const StrichartzReport b = strichartz_scaling(cx(2.0) * phi, cfg, opt);
    for (std::size_t k = 0; k < a.rows.size(); ++k) EXPECT_NEAR(b.rows[k].scale / a.rows[k].scale, 2.0, 1e-9);
}

TEST(Strichartz, NormsMatchSeparableIdentity) {
    const Field phi = bump(small_grid());
    const double Ts[] = {0.5};
    const double v = strichartz_norms(phi, 4.0, 3.0, Ts, 10, false)[0];
    EXPECT_NEAR(v, std::pow(0.5, 0.25) * lp_norm(phi, 3.0), 1e-12);
}

TEST(Statistics, WilsonInterval) {
    const auto [lo, hi] = wilson(0, 200);
    EXPECT_EQ(lo, 0.0);
    EXPECT_NEAR(hi, 1.96 * 1.96 / (200.0 + 1.96 * 1.96), 1e-12);
    const auto [l2, h2] = wilson(50, 100);
    EXPECT_NEAR(0.5 * (l2 + h2), 0.5, 1e-12);
    EXPECT_NEAR(h2 - 0.5, 0.0961, 5e-4);
    EXPECT_THROW(wilson(3, 2), std::invalid_argument);
}

TEST(Statistics, KendallTauAndQuantile) {
    const double x[] = {4, 3, 2, 1};
    const double up[] = {0.4, 0.3, 0.2, 0.0};
    const double down[] = {0.0, 0.1, 0.2, 0.3};
    EXPECT_DOUBLE_EQ(kendall_tau(x, up), 1.0);
    EXPECT_DOUBLE_EQ(kendall_tau(x, down), -1.0);
    EXPECT_DOUBLE_EQ(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(quantile({1.0, 2.0}, 0.25), 1.25);
}

TEST(Exceptional, ZeroDataAlwaysConverges) {
    const Grid g(pi, 16);
    PicardOptions opt;
    opt.axis = TimeAxis(1.0, 256);
    const ExceptionalReport r =
        exceptional_probability(Field::zeros(g), {0.125, 0.0625}, {Distribution::gaussian, 1, 100, 1}, opt);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.failures, 0);
        EXPECT_LE(row.ci_hi, 0.04);
    }
    EXPECT_TRUE(r.nonincreasing);
}

TEST(Exceptional, Preconditions) {
    const Grid g(pi, 16);
    PicardOptions opt;
    opt.axis = TimeAxis(1.0, 256);
    EXPECT_THROW(exceptional_probability(Field::zeros(g), {0.0625, 0.125}, {Distribution::gaussian, 1, 100, 1}, opt),
                 std::invalid_argument);
    EXPECT_THROW(exceptional_probability(Field::zeros(g), {0.125}, {Distribution::gaussian, 1, 99, 1}, opt),
                 std::invalid_argument);
}
