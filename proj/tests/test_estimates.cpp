#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "gkdv/estimates.hpp"
#include "oracles.hpp"

using namespace gkdv;
using std::numbers::pi;

namespace {

ProbeGrid small_probe() { return make_probe_grid(32, 64, 4.0 * pi, 4.0); }

std::vector<SpaceTimeField> ensemble(const ProbeGrid& pg, int n, int role) {
    std::vector<SpaceTimeField> out;
    for (int i = 0; i < n; ++i) out.push_back(random_spacetime(pg, stream_key({7, i, role})));
    return out;
}

// Direct Riemann pairing of real fields through Parseval: int int u v = sum F u conj(F v) dxi dtau.
double parseval_pairing(const SpaceTimeField& u, const SpaceTimeField& v) {
    const SpaceTimeField a = to_spectral(u), b = to_spectral(v);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) acc += (a.values()[i] * std::conj(b.values()[i])).real();
    return acc * u.grid().dxi() * u.axis().dtau();
}

}  // namespace

TEST(Ensembles, RealUnitNormAndBandLimited) {
    const ProbeGrid pg = small_probe();
    const SpaceTimeField u = random_spacetime(pg, 11);
    EXPECT_NEAR(lp_norm(u, 2.0), 1.0, 1e-12);
    for (const cx& c : u.values()) ASSERT_EQ(c.imag(), 0.0);
    EXPECT_LE(effective_band(u), pg.band);
    EXPECT_LE(2.0 * std::pow(pg.band, 3), pg.axis.tau_max());
    EXPECT_NO_THROW(xsb_norm(u, 0.3, 0.6));
    const SpaceTimeField spec = to_spectral(u);
    double imag_residue = 0.0;
    for (const cx& c : to_physical(spec).values()) imag_residue = std::max(imag_residue, std::abs(c.imag()));
    EXPECT_LT(imag_residue, 1e-14);
}

TEST(Ensembles, DoublingExtendsCoefficients) {
    const ProbeGrid coarse = make_probe_grid(32, 64, 4.0 * pi, 4.0);
    const ProbeGrid fine = make_probe_grid(64, 128, 4.0 * pi, 4.0);
    const SpaceTimeField a = to_spectral(random_spacetime(coarse, 5));
    const SpaceTimeField b = to_spectral(random_spacetime(fine, 5));
    // Common modes agree up to one global normalization constant.
    double ratio = 0.0;
    double worst = 0.0;
    for (std::size_t l = 0; l < a.rows(); ++l) {
        const long kl = signed_index(static_cast<long>(l), 64);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (kl == -32 || std::abs(coarse.grid.xi(j)) > coarse.band || coarse.grid.is_nyquist(j)) continue;
            const cx cb = b.at(static_cast<std::size_t>(slot_of(kl, 128)),
                               static_cast<std::size_t>(slot_of(coarse.grid.wavenumber(j), 64)));
            const double r = std::abs(cb / a.at(l, j));
            if (ratio == 0.0) ratio = r;
            worst = std::max(worst, std::abs(r - ratio));
        }
    }
    EXPECT_GT(ratio, 0.0);
    EXPECT_LT(worst, 1e-9 * ratio);
}

TEST(Ensembles, SpaceFieldRealUnit) {
    const Grid g(8.0 * pi, 64);
    const Field f = random_space(g, 3.0, 3);
    EXPECT_NEAR(l2_norm(f), 1.0, 1e-12);
    for (const cx& c : f.values()) ASSERT_EQ(c.imag(), 0.0);
}

TEST(DuhamelExact, MatchesQuadratureOracle) {
    // Torus with unit frequency spacing and unit tau spacing: xi = 2 and tau = 8 resonate.
    const Grid g(pi, 16);
    const TimeAxis a(2.0 * pi, 64);
    struct Wave {
        double amp, xi, tau, phase;
    };
    const std::vector<Wave> waves = {{1.0, 2.0, 8.0, 0.3}, {0.5, 1.0, -5.0, 1.1}, {0.25, 3.0, 2.0, -0.4}};
    const SpaceTimeField F = SpaceTimeField::sample(g, a, [&](double x, double t) {
        double v = 0.0;
        for (const auto& w : waves) v += w.amp * std::cos(w.xi * x + w.tau * t + w.phase);
        return cx(v);
    });
    const SpaceTimeField D = duhamel_exact(F);
    double worst = 0.0;
    for (std::size_t m = 0; m < a.size(); m += 5)
        for (std::size_t j = 0; j < g.size(); j += 3) {
            const double x = g.x(j), t = a.t(m);
            // S(t - s) cos(xi x + tau s + p) = cos(xi x + tau s + p + (t - s) xi^3).
            const double oracle = oracle::integrate(
                [&](double s) {
                    double v = 0.0;
                    for (const auto& w : waves)
                        v += w.amp * std::cos(w.xi * x + w.tau * s + w.phase + (t - s) * w.xi * w.xi * w.xi);
                    return v;
                },
                0.0, t);
            worst = std::max(worst, std::abs(D.at(m, j) - cx(oracle)));
        }
    EXPECT_LT(worst, 1e-11);
}

TEST(ProductIntegral, MatchesParsevalForPairs) {
    const ProbeGrid pg = small_probe();
    const auto us = ensemble(pg, 3, 1);
    for (int i = 0; i < 2; ++i) {
        const cx direct = product_integral({us[i], us[i + 1]});
        EXPECT_NEAR(direct.real(), parseval_pairing(us[i], us[i + 1]), 1e-13);
        EXPECT_NEAR(direct.imag(), 0.0, 1e-13);
    }
}

TEST(ProductIntegral, ExactForHighDegreeProducts) {
    // int int cos^8(x) cos^2(t) over [-pi, pi) x [-pi, pi): (35 pi / 64) * pi.
    const Grid g(pi, 16);
    const TimeAxis a(2.0 * pi, 16);
    const SpaceTimeField c = SpaceTimeField::sample(g, a, [](double x, double) { return cx(std::cos(x)); });
    const SpaceTimeField ct = SpaceTimeField::sample(g, a, [](double, double t) { return cx(std::cos(t)); });
    std::vector<SpaceTimeField> f(8, c);
    f.push_back(ct);
    f.push_back(ct);
    const cx v = product_integral(f);
    EXPECT_NEAR(v.real(), 2.0 * pi * (35.0 / 128.0) * 2.0 * pi * 0.5, 1e-12);
}

TEST(Multilinear, ZeroFactorsAndPermutationSymmetry) {
    const ProbeGrid pg = small_probe();
    auto v = ensemble(pg, 8, 2);
    const SpaceTimeField h = random_spacetime(pg, 99);
    const double sigma = 3.0 / 14.0 + 0.1;
    const cx base = multilinear_pairing(v, h, sigma);
    std::swap(v[0], v[5]);
    std::swap(v[2], v[7]);
    EXPECT_NEAR(std::abs(multilinear_pairing(v, h, sigma) - base), 0.0, 1e-12 * std::abs(base));
    std::vector<SpaceTimeField> zeros(8, SpaceTimeField::zeros(pg.grid, pg.axis));
    EXPECT_EQ(multilinear_pairing(zeros, h, sigma), cx(0.0));
}

TEST(Multilinear, TranspositionMatchesDirectDerivative) {
    // J^sigma d_x applied to the product on its own padded grid, then paired with h.
    const ProbeGrid pg = make_probe_grid(16, 32, 2.0 * pi, 4.0);
    auto v = ensemble(pg, 8, 3);
    const SpaceTimeField h = random_spacetime(pg, 4);
    const double sigma = 0.3;
    const int pad = 5;
    std::vector<cx> prod;
    for (const auto& f : v) {
        const SpaceTimeField r = detail::refine(f, pad, pad);
        if (prod.empty()) prod.assign(r.values().begin(), r.values().end());
        else
            for (std::size_t i = 0; i < prod.size(); ++i) prod[i] *= r.values()[i];
    }
    const Grid fg(pg.grid.half_length(), pg.grid.size() * pad);
    const TimeAxis fa(pg.axis.span(), pg.axis.size() * pad);
    const SpaceTimeField P(fg, fa, prod, Representation::physical);
    const SpaceTimeField dP = apply_spatial_symbol(P, [sigma](double xi) { return cx(0.0, xi) * std::pow(1.0 + xi * xi, sigma / 2); });
    const double direct = parseval_pairing(dP, detail::refine(h, pad, pad));
    const cx trans = multilinear_pairing(v, h, sigma);
    EXPECT_NEAR(trans.real(), direct, 1e-10 * std::abs(direct));
}

TEST(Multilinear, AlignedTestFunctionIsExtremal) {
    const ProbeGrid pg = small_probe();
    const auto v = ensemble(pg, 8, 5);
    const double sigma = 0.3, bh = 0.49;
    const SpaceTimeField h = aligned_test_function(v, sigma, bh, pg.band);
    const double best = std::abs(multilinear_pairing(v, h, sigma)) / xsb_norm(h, 0.0, bh);
    EXPECT_GT(multilinear_pairing(v, h, sigma).real(), 0.0);
    for (int i = 0; i < 5; ++i) {
        const SpaceTimeField r = random_spacetime(pg, stream_key({i, 77}));
        EXPECT_LT(std::abs(multilinear_pairing(v, r, sigma)) / xsb_norm(r, 0.0, bh), best);
    }
}

TEST(LinearEstimates, ZeroDataAndHomogeneity) {
    const ProbeGrid pg = small_probe();
    const double s = 0.2, b = 0.51;
    EXPECT_EQ(xsb_norm(cutoff_free_evolution(Field::zeros(pg.grid), pg.axis, 0.25), s, b), 0.0);
    const Field mode = Field::sample(pg.grid, [&](double x) { return cx(std::cos(pg.grid.dxi() * 5.0 * x)); });
    const EstimateReport r = check_linear_estimates({mode, cx(7.5) * mode}, {0.25}, pg.axis, s, b);
    ASSERT_EQ(r.records.size(), 2u);
    EXPECT_NEAR(r.records[0].ratio, r.records[1].ratio, 1e-12 * r.records[0].ratio);
    const EstimateReport z = check_linear_estimates({Field::zeros(pg.grid)}, {0.25}, pg.axis, s, b);
    EXPECT_EQ(z.excluded, 1);
    EXPECT_TRUE(z.records.empty());
    EXPECT_THROW(check_linear_estimates({mode}, {0.25}, pg.axis, s, 0.8), std::invalid_argument);
}

TEST(LinearEstimates, TScalingCapturesGrowth) {
    EstimateConfig c;
    c.trials = 30;
    const ProbeGrid pg = make_probe_grid(c.n_modes, c.n_times);
    std::vector<Field> phis;
    for (long i = 0; i < c.trials; ++i) phis.push_back(random_space(pg.grid, pg.band, stream_key({1, i})));
    const double s = 17.0 / 112.0 + 0.05, b = 0.5 + 0.05 / 24.0;
    std::vector<double> maxima;
    for (double T : c.linear_T) maxima.push_back(check_linear_estimates(phis, {T}, pg.axis, s, b).max_ratio());
    const auto [lo, hi] = std::minmax_element(maxima.begin(), maxima.end());
    EXPECT_GT(*lo, 0.0);
    EXPECT_LT(*hi / *lo, 2.0);
}

TEST(Bilinear, LowModulationExampleRatioBounded) {
    // b-tilde = 0.4 sits below this lemma's threshold 1/6 + 2s/3 at s = 1/2;
    // the probe still records a finite maximum.
    const ProbeGrid pg = small_probe();
    const auto u1 = ensemble(pg, 100, 6), u2 = ensemble(pg, 100, 7);
    const EstimateReport r = check_bilinear("lemma2.5", u1, u2, 0.5, 0.51, 0.4);
    EXPECT_EQ(r.records.size(), 100u);
    EXPECT_TRUE(std::isfinite(r.max_ratio()));
    EXPECT_GT(r.max_ratio(), 0.0);
    EXPECT_LE(r.median_ratio(), r.max_ratio());
}

TEST(Embeddings, CatalogExponents) {
    const auto cat = embedding_catalog();
    EXPECT_EQ(cat.size(), 14u);
    const double e = 0.05, b = 0.5 + e / 24.0;
    EXPECT_DOUBLE_EQ(find_embedding("eq2.014").p(e), 8.0);
    EXPECT_DOUBLE_EQ(find_embedding("eq2.014").b(e), b);
    EXPECT_TRUE(std::isinf(find_embedding("eq2.016").p(e)));
    EXPECT_DOUBLE_EQ(find_embedding("eq2.016").s(e), b);
    EXPECT_DOUBLE_EQ(find_embedding("eq2.06").b(e), 0.5 - e / 12.0);
    EXPECT_DOUBLE_EQ(find_embedding("eq2.012").p(e), 56.0 / (4.0 + 77.0 * e));
    // l = 3 and l = 6 endpoints of the family.
    EXPECT_DOUBLE_EQ(find_embedding("eq2.09-l3").p(e), 56.0 * 4.0 / (13.0 + 21.0 * e));
    EXPECT_DOUBLE_EQ(find_embedding("eq2.09-l6").s(e), 2.0 * (3.0 + e) / 70.0);
    for (const auto& entry : cat) EXPECT_GE(entry.p(e), 1.0) << entry.id;
    EXPECT_THROW(find_embedding("eq2.99"), ConfigError);
}

TEST(Embeddings, ZeroGuardAndFiniteRatios) {
    const ProbeGrid pg = small_probe();
    std::vector<SpaceTimeField> us = ensemble(pg, 10, 8);
    us.push_back(SpaceTimeField::zeros(pg.grid, pg.axis));
    const EstimateReport r = check_embedding(us, "eq2.016", 0.05);
    EXPECT_EQ(r.excluded, 1);
    EXPECT_EQ(r.records.size(), 10u);
    for (const auto& rec : r.records) EXPECT_TRUE(std::isfinite(rec.ratio) && rec.ratio > 0.0);
}

TEST(Catalog, IdsAndUnknownId) {
    const auto ids = estimate_ids();
    EXPECT_EQ(ids.size(), 20u);
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), ids.size());
    EstimateConfig c;
    c.trials = 2;
    try {
        run_estimate("eq9.9", c);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("eq2.014"), std::string::npos);
    }
}

TEST(Catalog, ThreadCountDoesNotChangeRecords) {
    EstimateConfig c;
    c.trials = 6;
    c.n_modes = 32;
    c.n_times = 64;
    for (const char* id : {"eq2.014", "lemma2.4", "lemma3.10"}) {
        c.threads = 1;
        const EstimateReport a = run_estimate(id, c);
        c.threads = 4;
        const EstimateReport b = run_estimate(id, c);
        ASSERT_EQ(a.records.size(), b.records.size());
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            EXPECT_EQ(a.records[i].lhs, b.records[i].lhs);
            EXPECT_EQ(a.records[i].rhs, b.records[i].rhs);
        }
    }
}

TEST(Catalog, CheapEntriesStableUnderDoubling) {
    EstimateConfig c;
    c.trials = 20;
    for (const char* id : {"eq2.06", "eq2.014", "eq2.016", "lemma2.4-duhamel"}) {
        const double coarse = run_estimate(id, c).max_ratio();
        EstimateConfig d = c;
        d.n_modes *= 2;
        d.n_times *= 2;
        const double fine = run_estimate(id, d).max_ratio();
        EXPECT_LE(std::max(fine / coarse, coarse / fine), 2.0) << id;
    }
}
