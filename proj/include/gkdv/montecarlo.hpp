#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gkdv/error.hpp"
#include "gkdv/norms.hpp"
#include "gkdv/parallel.hpp"
#include "gkdv/rng.hpp"
#include "gkdv/solver.hpp"
#include "gkdv/wiener.hpp"

namespace gkdv {

struct EnsembleRecord {
    long sample;
    std::uint64_t seed;
    std::map<std::string, double> observables;
    bool blown_up = false;

    double at(const std::string& name) const {
        const auto it = observables.find(name);
        require(it != observables.end(), "ensemble record has no observable '" + name + "'");
        return it->second;
    }
};

struct StrichartzSpec {
    double q = 4.0;
    double r = 4.0;
    double T = 0.25;
    int time_samples = 64;
    bool dispersion = true;  ///< false: S(t) replaced by the identity (synthetic check)
};

struct PicardSpec {
    double T = 0.125;
    PicardOptions options;
};

/// What run_ensemble measures on each sample phi^omega.
struct ObservableSpec {
    double s = 17.0 / 112.0 + 0.05;
    bool hs_norm = true;
    bool l2_norm = false;
    std::optional<StrichartzSpec> strichartz;
    std::optional<double> linf_T;  ///< sup over [0, T] x torus of |S(t) phi^omega|
    int linf_time_samples = 64;
    std::optional<PicardSpec> picard;
};

struct EnsembleConfig {
    Distribution distribution = Distribution::gaussian;
    std::uint64_t seed = 1;
    long n_samples = 1000;
    int threads = 1;
};

/// Seed of sample i: a splittable hash of (master seed, i).
inline std::uint64_t sample_seed(std::uint64_t master, long index) {
    return stream_key({static_cast<std::int64_t>(master), index});
}

/// phi^omega for sample `index`, using all bands the grid supports.
inline Field randomized_sample(const Field& phi, Distribution dist, std::uint64_t master, long index) {
    const RandomCoefficients g = sample_coefficients(dist, sample_seed(master, index), max_band(phi.grid()));
    return randomize(phi, g);
}

/// Riemann L^q_t L^r_x([0, T]) norms of S(t) f, midpoint rule with
/// `time_samples` nodes per T.
inline std::vector<double> strichartz_norms(const Field& f, double q, double r, std::span<const double> Ts,
                                            int time_samples, bool dispersion = true) {
    require(q >= 1.0 && r >= 1.0, "strichartz_norms: exponents must be >= 1");
    require(time_samples >= 1, "strichartz_norms: need time samples");
    const Field spec = as_spectral(f);
    std::vector<double> out;
    out.reserve(Ts.size());
    for (double T : Ts) {
        require(T > 0.0, "strichartz_norms: T must be positive");
        const double dt = T / time_samples;
        double acc = 0.0;
        for (int m = 0; m < time_samples; ++m) {
            const double t = (m + 0.5) * dt;
            const double nr = lp_norm(dispersion ? to_physical(airy_propagate(spec, t)) : to_physical(spec), r);
            acc = std::isinf(q) ? std::max(acc, nr) : acc + dt * std::pow(nr, q);
        }
        out.push_back(std::isinf(q) ? acc : std::pow(acc, 1.0 / q));
    }
    return out;
}

inline double linf_norm(const Field& f, double T, int time_samples) {
    const Field spec = as_spectral(f);
    double m = 0.0;
    for (int k = 0; k <= time_samples; ++k)
        m = std::max(m, lp_norm(to_physical(airy_propagate(spec, T * k / time_samples)), infinity));
    return m;
}

/// Picard failure on a sample: not converged, any contraction ratio >= 1/2,
/// or blowup inside Gamma.
inline bool picard_failed(const PicardResult& r) { return !r.converged || r.max_ratio() >= 0.5; }

namespace detail {

inline EnsembleRecord observe(const Field& phi, const EnsembleConfig& cfg, const ObservableSpec& spec, long i) {
    EnsembleRecord rec{i, sample_seed(cfg.seed, i), {}, false};
    const Field w = randomized_sample(phi, cfg.distribution, cfg.seed, i);
    if (spec.hs_norm) rec.observables["hs_norm"] = sobolev_norm(w, spec.s);
    if (spec.l2_norm) rec.observables["l2_norm"] = l2_norm(w);
    if (spec.strichartz) {
        const auto& st = *spec.strichartz;
        const double T[] = {st.T};
        rec.observables["strichartz"] = strichartz_norms(w, st.q, st.r, T, st.time_samples, st.dispersion)[0];
    }
    if (spec.linf_T) rec.observables["linf"] = linf_norm(w, *spec.linf_T, spec.linf_time_samples);
    if (spec.picard) {
        try {
            const PicardResult r = picard_solve(w, spec.picard->T, spec.picard->options);
            rec.observables["picard_converged"] = r.converged ? 1.0 : 0.0;
            rec.observables["contraction_ratio"] = r.max_ratio();
            rec.observables["iterations"] = r.iterations;
            rec.observables["picard_failed"] = picard_failed(r) ? 1.0 : 0.0;
        } catch (const BlowupError&) {
            rec.blown_up = true;
            rec.observables["picard_converged"] = 0.0;
            rec.observables["contraction_ratio"] = infinity;
            rec.observables["iterations"] = 0.0;
            rec.observables["picard_failed"] = 1.0;
        }
    }
    return rec;
}

}  // namespace detail

/// One record per sample, in sample order. Deterministic in (phi, cfg, spec)
/// for any thread count. Blowup inside a sample is recorded, not thrown.
inline std::vector<EnsembleRecord> run_ensemble(const Field& phi, const EnsembleConfig& cfg,
                                                const ObservableSpec& spec) {
    require(cfg.n_samples >= 1, "run_ensemble: n_samples must be >= 1");
    require(required_band_range(phi) <= max_band(phi.grid()),
            "run_ensemble: data spectrum exceeds the randomizable band |xi| <= " + std::to_string(max_band(phi.grid())));
    std::vector<EnsembleRecord> out(static_cast<std::size_t>(cfg.n_samples));
    parallel_for(out.size(), cfg.threads,
                 [&](std::size_t i) { out[i] = detail::observe(phi, cfg, spec, static_cast<long>(i)); });
    return out;
}

// ---------------------------------------------------------------------------
// Statistics.

/// Linear-interpolated empirical quantile (the common "type 7" rule).
inline double quantile(std::vector<double> v, double p) {
    require(!v.empty() && p >= 0.0 && p <= 1.0, "quantile: bad input");
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// `points` equally spaced lambdas between the p_lo and p_hi quantiles.
inline std::vector<double> quantile_grid(const std::vector<double>& v, double p_lo, double p_hi, int points) {
    require(points >= 2 && p_lo < p_hi, "quantile_grid: need >= 2 points and p_lo < p_hi");
    const double a = quantile(v, p_lo), b = quantile(v, p_hi);
    std::vector<double> g;
    for (int i = 0; i < points; ++i) g.push_back(a + (b - a) * i / (points - 1));
    return g;
}

struct TailFit {
    std::vector<double> lambda;
    std::vector<double> probability;  ///< empirical P(X > lambda)
    double slope = 0.0;               ///< of log P against lambda^2
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;            ///< least-squares standard error of the slope

    /// lambda-scale (-slope)^{-1/2}: P ~ exp(-(lambda / scale)^2).
    double scale() const { return 1.0 / std::sqrt(-slope); }
};

struct LineFit {
    double slope, intercept, r2, slope_se;
};

inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, "least_squares: need >= 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= n, my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    require(sxx > 0.0, "least_squares: degenerate abscissae");
    const double slope = sxy / sxx;
    const double sse = std::max(0.0, syy - slope * sxy);
    const double r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    const double se = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
    return {slope, my - slope * mx, r2, se};
}

/// Least-squares line through (lambda^2, log P-hat(lambda)) for a sample of
/// an observable. Requires >= 1000 values, a grid inside the [q50, q99.5]
/// range of the data, and a non-degenerate exceedance profile.
inline TailFit tail_fit(const std::vector<double>& values, const std::vector<double>& lambda) {
    require(values.size() >= 1000, "tail_fit: need at least 1000 records");
    require(lambda.size() >= 2, "tail_fit: need at least two lambdas");
    const double lo = quantile(values, 0.5), hi = quantile(values, 0.995);
    const double slack = 1e-9 * std::max(1.0, std::abs(hi));
    for (double l : lambda)
        require(l >= lo - slack && l <= hi + slack, "tail_fit: lambda outside the [q50, q99.5] sample range");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    TailFit fit;
    fit.lambda = lambda;
    std::vector<double> x, y;
    for (double l : lambda) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), l);
        const double p = static_cast<double>(above) / static_cast<double>(sorted.size());
        fit.probability.push_back(p);
        require(p > 0.0, "tail_fit: no exceedances at lambda");
        x.push_back(l * l);
        y.push_back(std::log(p));
    }
    require(*std::max_element(y.begin(), y.end()) > *std::min_element(y.begin(), y.end()),
            "tail_fit: degenerate grid (all exceedance probabilities equal)");
    const LineFit lf = least_squares(x, y);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.r2 = lf.r2;
    fit.slope_se = lf.slope_se;
    return fit;
}

inline std::vector<double> column(const std::vector<EnsembleRecord>& recs, const std::string& name) {
    std::vector<double> v;
    v.reserve(recs.size());
    for (const auto& r : recs) v.push_back(r.at(name));
    return v;
}

inline TailFit tail_fit(const std::vector<EnsembleRecord>& recs, const std::string& observable,
                        const std::vector<double>& lambda) {
    return tail_fit(column(recs, observable), lambda);
}

/// Tail fit over `points` lambdas between the p_lo and p_hi sample quantiles.
inline TailFit tail_fit_quantiles(const std::vector<double>& values, double p_lo = 0.9, double p_hi = 0.995,
                                  int points = 20) {
    return tail_fit(values, quantile_grid(values, p_lo, p_hi, points));
}

// ---------------------------------------------------------------------------
// Strichartz tail scaling.

struct ScaleRow {
    double T;
    double scale;
    double ci_lo;
    double ci_hi;
    TailFit fit;
};

struct StrichartzReport {
    double q, r;
    std::vector<ScaleRow> rows;
    double exponent = 0.0;     ///< fitted d log(scale) / d log T
    double exponent_se = 0.0;
    double predicted = 0.0;    ///< 1/q
    std::vector<std::vector<double>> norms;  ///< norms[i][k]: sample i, T index k
};

struct StrichartzOptions {
    double q = 4.0;
    double r = 4.0;
    std::vector<double> Ts = {0.125, 0.25, 0.5};
    int time_samples = 64;
    bool dispersion = true;
    double p_lo = 0.9;
    double p_hi = 0.995;
    int grid_points = 20;
};

/// Per T, the tail lambda-scale of ||S(t) phi^omega||_{L^q_t L^r_x([0,T])}
/// (common random numbers across T), then log(scale) regressed on log T.
/// Scale intervals come from slope +- 1.96 standard errors.
inline StrichartzReport strichartz_scaling(const Field& phi, const EnsembleConfig& cfg, const StrichartzOptions& opt) {
    require(opt.Ts.size() >= 3, "strichartz_scaling: need at least three T values");
    require(std::isfinite(opt.q), "strichartz_scaling: q must be finite");
    require(required_band_range(phi) <= max_band(phi.grid()), "strichartz_scaling: data exceeds randomizable band");
    StrichartzReport rep{opt.q, opt.r, {}, 0.0, 0.0, 1.0 / opt.q, {}};
    rep.norms.resize(static_cast<std::size_t>(cfg.n_samples));
    parallel_for(rep.norms.size(), cfg.threads, [&](std::size_t i) {
        const Field w = randomized_sample(phi, cfg.distribution, cfg.seed, static_cast<long>(i));
        rep.norms[i] = strichartz_norms(w, opt.q, opt.r, opt.Ts, opt.time_samples, opt.dispersion);
    });
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < opt.Ts.size(); ++k) {
        std::vector<double> v;
        for (const auto& row : rep.norms) v.push_back(row[k]);
        const TailFit fit = tail_fit_quantiles(v, opt.p_lo, opt.p_hi, opt.grid_points);
        require(fit.slope < 0.0, "strichartz_scaling: non-decaying tail at T = " + std::to_string(opt.Ts[k]));
        const double s_steep = -(fit.slope - 1.96 * fit.slope_se), s_flat = -(fit.slope + 1.96 * fit.slope_se);
        const double lo = 1.0 / std::sqrt(s_steep);
        const double hi = s_flat > 0.0 ? 1.0 / std::sqrt(s_flat) : infinity;
        rep.rows.push_back({opt.Ts[k], fit.scale(), lo, hi, fit});
        lx.push_back(std::log(opt.Ts[k]));
        ly.push_back(std::log(fit.scale()));
    }
    const LineFit lf = least_squares(lx, ly);
    rep.exponent = lf.slope;
    rep.exponent_se = lf.slope_se;
    return rep;
}

// ---------------------------------------------------------------------------
// Exceptional-set probability.

/// Wilson score interval for k successes in n trials.
inline std::pair<double, double> wilson(long k, long n, double z = 1.96) {
    require(n >= 1 && k >= 0 && k <= n, "wilson: need 0 <= k <= n, n >= 1");
    const double nn = static_cast<double>(n), p = static_cast<double>(k) / nn, z2 = z * z;
    const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Kendall tau-a rank correlation.
inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, "kendall_tau: need >= 2 paired values");
    auto sign = [](double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); };
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) s += sign(x[i] - x[j]) * sign(y[i] - y[j]);
    const double n = static_cast<double>(x.size());
    return s / (0.5 * n * (n - 1.0));
}

struct FailureRow {
    double T;
    long failures;
    long samples;
    double fraction;
    double ci_lo;
    double ci_hi;
};

struct ExceptionalReport {
    std::vector<FailureRow> rows;                      ///< in the given (descending) T order
    std::vector<std::vector<EnsembleRecord>> records;  ///< per T, per sample
    bool nonincreasing = true;  ///< fraction nonincreasing as T decreases, within Wilson CI overlap
    double kendall_tau = 0.0;   ///< between T and failure fraction (> 0: fewer failures at small T)
};

/// Failure fraction of picard_solve per T on common samples phi^omega.
inline ExceptionalReport exceptional_probability(const Field& phi, const std::vector<double>& Ts,
                                                 const EnsembleConfig& cfg, const PicardOptions& opt) {
    require(!Ts.empty(), "exceptional_probability: empty T grid");
    for (std::size_t k = 1; k < Ts.size(); ++k) require(Ts[k] < Ts[k - 1], "exceptional_probability: T grid must descend");
    require(cfg.n_samples >= 100, "exceptional_probability: need at least 100 samples");
    ExceptionalReport rep;
    std::vector<double> fr;
    for (double T : Ts) {
        ObservableSpec spec;
        spec.hs_norm = true;
        spec.picard = PicardSpec{T, opt};
        auto recs = run_ensemble(phi, cfg, spec);
        long fails = 0;
        for (const auto& r : recs) fails += r.at("picard_failed") > 0.5;
        const auto [lo, hi] = wilson(fails, cfg.n_samples);
        rep.rows.push_back({T, fails, cfg.n_samples, static_cast<double>(fails) / cfg.n_samples, lo, hi});
        rep.records.push_back(std::move(recs));
        fr.push_back(rep.rows.back().fraction);
    }
    for (std::size_t k = 1; k < rep.rows.size(); ++k) {
        const FailureRow &a = rep.rows[k - 1], &b = rep.rows[k];
        const bool overlap = b.ci_lo <= a.ci_hi && a.ci_lo <= b.ci_hi;
        if (b.fraction > a.fraction && !overlap) rep.nonincreasing = false;
    }
    if (Ts.size() >= 2) rep.kendall_tau = kendall_tau(Ts, fr);
    return rep;
}

}  // namespace gkdv
