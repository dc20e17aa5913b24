#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gkdv/error.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/rng.hpp"

namespace gkdv {

/// Raised-cosine window psi(xi) = cos^2(pi xi / 2) on [-1, 1]. Its integer
/// translates form an exact partition of unity since cos^2 + sin^2 = 1.
struct PartitionWindow {
    double operator()(double xi) const noexcept {
        if (std::abs(xi) >= 1.0) return 0.0;
        const double c = std::cos(0.5 * std::numbers::pi * xi);
        return c * c;
    }
    static constexpr double support_radius = 1.0;
};

inline PartitionWindow make_window() { return {}; }

/// psi(D - n) f.
inline Field project_band(const Field& f, long n) {
    require(static_cast<double>(std::abs(n)) <= f.grid().xi_max() - 1.0,
            "project_band: band " + std::to_string(n) + " outside the resolvable range");
    const PartitionWindow psi;
    return apply_symbol(f, [&psi, n](double xi, std::size_t) { return cx(psi(xi - static_cast<double>(n))); });
}

/// Largest band index whose window is fully resolved on the grid.
inline long max_band(const Grid& g) { return static_cast<long>(std::floor(g.xi_max() - 1.0)); }

enum class Distribution { gaussian, rademacher, uniform, ones };

inline Distribution parse_distribution(std::string_view tag) {
    if (tag == "gaussian") return Distribution::gaussian;
    if (tag == "rademacher") return Distribution::rademacher;
    if (tag == "uniform") return Distribution::uniform;
    if (tag == "ones") return Distribution::ones;
    throw ConfigError("unknown distribution '" + std::string(tag) +
                      "' (expected gaussian | rademacher | uniform | ones)");
}

inline std::string to_string(Distribution d) {
    switch (d) {
        case Distribution::gaussian: return "gaussian";
        case Distribution::rademacher: return "rademacher";
        case Distribution::uniform: return "uniform";
        case Distribution::ones: return "ones";
    }
    return "?";
}

/// One mean-zero, unit-variance real draw. `ones` is the degenerate law
/// X = 1 used to check that randomization reduces to the identity.
inline double unit_component(Distribution d, Engine& eng) {
    switch (d) {
        case Distribution::gaussian: return std::normal_distribution<double>(0.0, 1.0)(eng);
        case Distribution::rademacher: return (eng() >> 63) ? 1.0 : -1.0;
        case Distribution::uniform: {
            const double r = std::sqrt(3.0);
            return std::uniform_real_distribution<double>(-r, r)(eng);
        }
        case Distribution::ones: return 1.0;
    }
    return 0.0;
}

/// The coefficients {g_n}, |n| <= n_max, for one sample of the randomization.
/// g_{-n} = conj(g_n) and g_0 is real, so real data stays real; E|g_n|^2 = 1.
class RandomCoefficients {
public:
    RandomCoefficients(Distribution dist, std::uint64_t seed, long n_max, std::vector<cx> values)
        : dist_(dist), seed_(seed), n_max_(n_max), values_(std::move(values)) {}

    Distribution distribution() const noexcept { return dist_; }
    std::uint64_t seed() const noexcept { return seed_; }
    long n_max() const noexcept { return n_max_; }
    bool covers(long n) const noexcept { return std::abs(n) <= n_max_; }
    cx operator()(long n) const noexcept {
        return covers(n) ? values_[static_cast<std::size_t>(n + n_max_)] : cx(0.0);
    }
    std::span<const cx> values() const noexcept { return values_; }

private:
    Distribution dist_;
    std::uint64_t seed_;
    long n_max_;
    std::vector<cx> values_;
};

/// Deterministic in (dist, seed, n_max, sample); each n has its own stream
/// keyed by (seed, sample, n), so draws do not depend on n_max or ordering.
inline RandomCoefficients sample_coefficients(Distribution dist, std::uint64_t seed, long n_max,
                                              std::uint64_t sample = 0) {
    require(n_max >= 1, "sample_coefficients: n_max must be >= 1");
    std::vector<cx> v(static_cast<std::size_t>(2 * n_max + 1));
    const double half = std::sqrt(0.5);
    for (long n = 0; n <= n_max; ++n) {
        Engine eng = make_engine({static_cast<std::int64_t>(seed), static_cast<std::int64_t>(sample), n});
        cx g;
        if (n == 0) {
            g = unit_component(dist, eng);
        } else if (dist == Distribution::ones) {
            g = 1.0;
        } else {
            const double re = unit_component(dist, eng);
            const double im = unit_component(dist, eng);
            g = cx(half * re, half * im);
        }
        v[static_cast<std::size_t>(n_max + n)] = g;
        v[static_cast<std::size_t>(n_max - n)] = std::conj(g);
    }
    return RandomCoefficients(dist, seed, n_max, std::move(v));
}

/// Monte Carlo estimate of max_gamma log(E e^{gamma X}) / gamma^2 for the
/// unit-variance component law X. Sub-gaussian laws give a finite value
/// (exactly 1/2 for the gaussian).
inline double verify_mgf_bound(Distribution dist, std::span<const double> gammas,
                               std::size_t n_samples = 1'000'000, std::uint64_t seed = 0x4d47u) {
    require(!gammas.empty(), "verify_mgf_bound: empty gamma grid");
    for (double g : gammas) require(g != 0.0, "verify_mgf_bound: gamma must be nonzero");
    std::vector<double> sums(gammas.size(), 0.0);
    Engine eng = make_engine({static_cast<std::int64_t>(seed), 0x6d6766});
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double x = unit_component(dist, eng);
        for (std::size_t k = 0; k < gammas.size(); ++k) sums[k] += std::exp(gammas[k] * x);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < gammas.size(); ++k) {
        const double mean = sums[k] / static_cast<double>(n_samples);
        best = std::max(best, std::log(mean) / (gammas[k] * gammas[k]));
    }
    return best;
}

/// Smallest n_max covering every coefficient of f above `rel_threshold`
/// times the spectral maximum.
inline long required_band_range(const Field& f, double rel_threshold = 1e-14) {
    const Field spec = as_spectral(f);
    double peak = 0.0;
    for (const cx& c : spec.values()) peak = std::max(peak, std::abs(c));
    long need = 1;
    if (peak == 0.0) return need;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        if (std::abs(spec[j]) <= rel_threshold * peak) continue;
        const double a = std::abs(spec.grid().xi(j));
        need = std::max(need, static_cast<long>(std::floor(a)) + 1);
    }
    return need;
}

/// Drops every mode that the band n <= max_band(g) cannot cover (|xi| >= max_band).
inline Field restrict_to_randomizable(const Field& f) {
    const double cut = static_cast<double>(max_band(f.grid()));
    return apply_symbol(f, [cut](double xi, std::size_t) { return std::abs(xi) < cut ? cx(1.0) : cx(0.0); });
}

/// Wiener randomization: multiplies the spectrum by m(xi) = sum_n g_n psi(xi - n).
/// Throws if f has significant content outside the bands covered by g. The
/// unpaired Nyquist coefficient uses Re m so that real data stays real.
inline Field randomize(const Field& phi, const RandomCoefficients& g, double rel_threshold = 1e-14) {
    const Field spec = as_spectral(phi);
    const Grid& grid = phi.grid();
    double peak = 0.0;
    for (const cx& c : spec.values()) peak = std::max(peak, std::abs(c));
    const PartitionWindow psi;
    std::vector<cx> v(spec.size());
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double xi = grid.xi(j);
        const long lo = static_cast<long>(std::floor(xi));
        cx m = 0.0;
        bool covered = true;
        for (long n = lo; n <= lo + 1; ++n) {
            const double w = psi(xi - static_cast<double>(n));
            if (w == 0.0) continue;
            if (!g.covers(n)) covered = false;
            m += g(n) * w;
        }
        if (!covered && std::abs(spec[j]) > rel_threshold * peak)
            throw PreconditionError("randomize: spectral support exceeds coefficient range n_max=" +
                                    std::to_string(g.n_max()));
        if (grid.is_nyquist(j)) m = m.real();
        v[j] = spec[j] * m;
    }
    Field out(grid, std::move(v), Representation::spectral);
    return phi.is_physical() ? to_physical(out) : out;
}

/// sum_n || J^s psi(D - n) f ||^2_{L^2}, computed mode by mode.
inline double band_energy_sum(const Field& f, double s = 0.0) {
    const Field spec = as_spectral(f);
    const PartitionWindow psi;
    double acc = 0.0;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double xi = spec.grid().xi(j);
        const double lo = std::floor(xi);
        const double w = psi(xi - lo) * psi(xi - lo) + psi(xi - lo - 1.0) * psi(xi - lo - 1.0);
        acc += std::pow(1.0 + xi * xi, s) * w * std::norm(spec[j]);
    }
    return spec.grid().dxi() * acc;
}

}  // namespace gkdv
