#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gkdv/error.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/norms.hpp"
#include "gkdv/spacetime.hpp"

namespace gkdv {

/// Spatial refinement used to evaluate polynomial nonlinearities. u^9 of a
/// field band-limited to |k| < N/2 has |k| < 4.5 N, so eight-fold padding
/// keeps every retained mode (and the zero mode of u^9) alias-free.
inline constexpr int default_padding = 8;

namespace detail {

/// Physical samples on the padded grid from a spectral vector (Nyquist dropped).
inline std::vector<cx> padded_physical(const Grid& g, std::span<const cx> spec, int pad) {
    const Grid fine(g.half_length(), g.size() * pad);
    std::vector<cx> v(static_cast<std::size_t>(fine.size()));
    for (std::size_t j = 0; j < spec.size(); ++j) {
        if (g.is_nyquist(j)) continue;
        v[static_cast<std::size_t>(slot_of(g.wavenumber(j), fine.size()))] = spec[j];
    }
    spectral_to_physical(fine, v);
    return v;
}

/// F_x[-(u^8)_x / 8] on the coarse grid, from the spectrum of u.
inline std::vector<cx> nonlinear_spectrum(const Grid& g, std::span<const cx> spec, int pad) {
    const Grid fine(g.half_length(), g.size() * pad);
    std::vector<cx> w = padded_physical(g, spec, pad);
    for (cx& x : w) {
        const double u = x.real();
        const double u2 = u * u;
        const double u4 = u2 * u2;
        x = cx(u4 * u4, 0.0);
    }
    physical_to_spectral(fine, w);
    std::vector<cx> out(spec.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        if (g.is_nyquist(j)) continue;
        const cx c = w[static_cast<std::size_t>(slot_of(g.wavenumber(j), fine.size()))];
        out[j] = cx(0.0, -g.xi(j) / 8.0) * c;
    }
    return out;
}

inline bool all_finite(std::span<const cx> v) {
    return std::all_of(v.begin(), v.end(), [](const cx& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

}  // namespace detail

/// N(u) = -u^7 u_x = -(u^8)_x / 8 for real u, alias-free by zero padding.
/// The Nyquist coefficient of the result is zero. Keeps the input
/// representation.
inline Field nonlinearity(const Field& u, int pad = default_padding) {
    require(pad >= 1, "nonlinearity: padding must be >= 1");
    const Field spec = as_spectral(u);
    std::vector<cx> out = detail::nonlinear_spectrum(u.grid(), spec.values(), pad);
    if (!detail::all_finite(out)) throw BlowupError("nonlinearity: non-finite values", -1);
    Field f(u.grid(), std::move(out), Representation::spectral);
    return u.is_physical() ? to_physical(f) : f;
}

struct Invariants {
    double mean;    ///< int u dx
    double mass;    ///< int u^2 dx
    double energy;  ///< int (u_x^2 / 2 - u^9 / 72) dx
};

inline Invariants conserved_quantities(const Field& u, int pad = default_padding) {
    const Field spec = as_spectral(u);
    const Grid& g = u.grid();
    double mean = 0.0, mass = 0.0, kinetic = 0.0;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double e = std::norm(spec[j]);
        if (g.wavenumber(j) == 0) mean = spec[j].real() * std::sqrt(2.0 * std::numbers::pi);
        mass += e;
        kinetic += g.xi(j) * g.xi(j) * e;
    }
    mass *= g.dxi();
    kinetic *= 0.5 * g.dxi();
    const std::vector<cx> w = detail::padded_physical(g, spec.values(), pad);
    double potential = 0.0;
    for (const cx& x : w) {
        const double v = x.real();
        const double v3 = v * v * v;
        potential += v3 * v3 * v3;
    }
    potential *= g.dx() / pad / 72.0;
    return {mean, mass, kinetic - potential};
}

struct StepDiagnostics {
    long step;
    double time;
    Invariants invariants;
};

/// Solution samples of the reference integrator.
struct Trajectory {
    Grid grid;
    double dt;
    long stride;
    std::string scheme;
    std::vector<double> times;
    std::vector<Field> samples;  ///< physical, real-valued
    std::vector<StepDiagnostics> diagnostics;
    bool blown_up = false;
    long blowup_step = -1;
};

/// Integrating-factor RK4 for u_t + u_xxx + u^7 u_x = 0: the Airy part is
/// integrated exactly by e^{i t xi^3}, RK4 acts on the transformed
/// nonlinearity. Samples every `stride` steps (plus t = 0 and the end);
/// invariants are recorded at every step. A step producing NaN/Inf or
/// |u| > blowup_threshold stops the run and flags the trajectory.
inline Trajectory evolve_reference(const Field& phi, double T, double dt, long stride = 1,
                                   int pad = default_padding, double blowup_threshold = 1e8) {
    require(dt > 0.0 && T >= 0.0, "evolve_reference: need dt > 0 and T >= 0");
    require(stride >= 1, "evolve_reference: stride must be >= 1");
    const double steps_real = T / dt;
    const long steps = std::lround(steps_real);
    require(std::abs(steps_real - static_cast<double>(steps)) <= 1e-9 * std::max(1.0, steps_real),
            "evolve_reference: T/dt must be an integer");
    require(steps <= 10'000'000, "evolve_reference: more than 1e7 steps");

    const Grid& g = phi.grid();
    Trajectory traj{g, dt, stride, "ifrk4", {}, {}, {}, false, -1};
    std::vector<cx> u = zero_nyquist(as_spectral(phi)).take_values();
    const std::size_t n = u.size();
    std::vector<cx> e_half(n), e_full(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double xi = g.xi(j);
        e_half[j] = std::polar(1.0, 0.5 * dt * xi * xi * xi);
        e_full[j] = e_half[j] * e_half[j];
    }

    auto record_sample = [&](double t) {
        Field phys = to_physical(Field(g, u, Representation::spectral));
        std::vector<cx> v = std::move(phys).take_values();
        for (cx& c : v) c = cx(c.real(), 0.0);
        traj.times.push_back(t);
        traj.samples.emplace_back(g, std::move(v), Representation::physical);
    };
    auto record_diag = [&](long step) {
        traj.diagnostics.push_back(
            {step, static_cast<double>(step) * dt, conserved_quantities(Field(g, u, Representation::spectral), pad)});
    };

    record_sample(0.0);
    record_diag(0);
    std::vector<cx> tmp(n);
    for (long step = 1; step <= steps; ++step) {
        const std::vector<cx> a = detail::nonlinear_spectrum(g, u, pad);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = e_half[j] * (u[j] + 0.5 * dt * a[j]);
        const std::vector<cx> b = detail::nonlinear_spectrum(g, tmp, pad);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = e_half[j] * u[j] + 0.5 * dt * b[j];
        const std::vector<cx> c = detail::nonlinear_spectrum(g, tmp, pad);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = e_full[j] * u[j] + dt * e_half[j] * c[j];
        const std::vector<cx> d = detail::nonlinear_spectrum(g, tmp, pad);
        for (std::size_t j = 0; j < n; ++j)
            u[j] = e_full[j] * u[j] +
                   dt / 6.0 * (e_full[j] * a[j] + 2.0 * e_half[j] * (b[j] + c[j]) + d[j]);

        const Field phys = to_physical(Field(g, u, Representation::spectral));
        double peak = 0.0;
        bool finite = detail::all_finite(phys.values());
        for (const cx& v : phys.values()) peak = std::max(peak, std::abs(v));
        if (!finite || peak > blowup_threshold) {
            traj.blown_up = true;
            traj.blowup_step = step;
            return traj;
        }
        record_diag(step);
        if (step % stride == 0 || step == steps) record_sample(static_cast<double>(step) * dt);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Duhamel map and Picard iteration.

/// Gamma v = eta_T(t) int_0^t S(t - s) N(eta v + z)(s) ds with N(u) = -u^7 u_x,
/// the cutoff form of the Duhamel integral for u = v + z. `z` is the
/// caller-supplied cutoff free evolution eta_T S(t) phi. The integral is a
/// cumulative trapezoid rule in the interaction picture (exact Airy phases
/// between nodes), started at the node t = 0; nodes with eta_T = 0 are zero.
inline SpaceTimeField duhamel_gamma(const SpaceTimeField& v, const SpaceTimeField& z, double T,
                                    int pad = default_padding) {
    require(same_axes(v, z), "duhamel_gamma: axis mismatch");
    require(T > 0.0, "duhamel_gamma: T must be positive");
    const SpaceTimeField vp = as_physical(v);
    const SpaceTimeField zp = as_physical(z);
    const Grid& g = v.grid();
    const TimeAxis& a = v.axis();
    require(2.0 * T <= 0.5 * a.span() + 1e-12, "duhamel_gamma: cutoff support [-2T, 2T] exceeds the time axis");
    const Cutoff eta_T(T);
    const std::size_t m0 = a.origin();
    const std::size_t n = vp.cols();

    // Contiguous node range where eta_T > 0.
    std::size_t lo = m0, hi = m0;
    while (lo > 0 && eta_T(a.t(lo - 1)) > 0.0) --lo;
    while (hi + 1 < vp.rows() && eta_T(a.t(hi + 1)) > 0.0) ++hi;

    std::vector<std::vector<cx>> integrand(hi - lo + 1);
    for (std::size_t m = lo; m <= hi; ++m) {
        const double t = a.t(m);
        std::vector<cx> w(n);
        const double cut = eta(t);
        for (std::size_t j = 0; j < n; ++j) w[j] = cut * vp.at(m, j) + zp.at(m, j);
        detail::physical_to_spectral(g, w);
        std::vector<cx> f = detail::nonlinear_spectrum(g, w, pad);
        if (!detail::all_finite(f)) throw BlowupError("duhamel_gamma: non-finite nonlinearity", static_cast<long>(m));
        for (std::size_t j = 0; j < n; ++j) {
            const double xi = g.xi(j);
            f[j] *= std::polar(1.0, -t * xi * xi * xi);
        }
        integrand[m - lo] = std::move(f);
    }

    std::vector<cx> out(vp.values().size());
    const double h = 0.5 * a.dt();
    auto emit = [&](std::size_t m, const std::vector<cx>& acc) {
        const double t = a.t(m);
        std::vector<cx> row(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double xi = g.xi(j);
            row[j] = eta_T(t) * std::polar(1.0, t * xi * xi * xi) * acc[j];
        }
        detail::spectral_to_physical(g, row);
        std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(m * n));
    };
    std::vector<cx> acc(n);
    for (std::size_t m = m0 + 1; m <= hi; ++m) {
        const auto& f0 = integrand[m - 1 - lo];
        const auto& f1 = integrand[m - lo];
        for (std::size_t j = 0; j < n; ++j) acc[j] += h * (f0[j] + f1[j]);
        emit(m, acc);
    }
    std::fill(acc.begin(), acc.end(), cx(0.0));
    for (std::size_t m = m0; m-- > lo;) {
        const auto& f0 = integrand[m + 1 - lo];
        const auto& f1 = integrand[m - lo];
        for (std::size_t j = 0; j < n; ++j) acc[j] -= h * (f0[j] + f1[j]);
        emit(m, acc);
    }
    if (!detail::all_finite(out)) throw BlowupError("duhamel_gamma: non-finite output", -1);
    return SpaceTimeField(g, a, std::move(out), Representation::physical);
}

struct PicardOptions {
    TimeAxis axis{2.0, 1024};
    double sigma = 3.0 / 14.0 + 0.1;
    double b = 0.5 + 0.05 / 24.0;
    double tol = 1e-10;
    int max_iter = 25;
    double xsb_band = 8.0;  ///< distances use the |xi| <= xsb_band projection
    int pad = default_padding;
};

struct PicardResult {
    SpaceTimeField v;
    SpaceTimeField z;                 ///< eta_T S(t) phi
    std::vector<double> distances;    ///< ||v_{m+1} - v_m||_{X_{sigma,b}}
    std::vector<double> ratios;       ///< distances[m+1] / distances[m]
    bool converged = false;
    int iterations = 0;
    double xsb_norm_v = 0.0;          ///< ||P v||_{X_{sigma,b}} of the last iterate
    double high_band_mass = 0.0;      ///< ||v - P v||^2_{L^2_{xt}} discarded by the projection

    double max_ratio() const {
        return ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
    }
};

/// Cutoff free evolution z = eta_T(t) S(t) phi on the axis.
inline SpaceTimeField cutoff_free_evolution(const Field& phi, const TimeAxis& axis, double T) {
    const Cutoff eta_T(T);
    return multiply_in_time(free_evolution(phi, axis), [&eta_T](double t) { return eta_T(t); });
}

/// Picard iteration v_{m+1} = Gamma(v_m) from v_0 = 0 until the X_{sigma,b}
/// step falls below tol. Non-convergence is a result state; blowup inside
/// Gamma propagates as BlowupError.
inline PicardResult picard_solve(const Field& phi, double T, const PicardOptions& opt = {}) {
    require(opt.tol > 0.0, "picard_solve: tol must be positive");
    require(opt.max_iter >= 1, "picard_solve: max_iter must be >= 1");
    const Grid& g = phi.grid();
    SpaceTimeField z = cutoff_free_evolution(as_physical(phi), opt.axis, T);
    SpaceTimeField v = SpaceTimeField::zeros(g, opt.axis);
    PicardResult res{v, z, {}, {}, false, 0, 0.0, 0.0};
    for (int it = 1; it <= opt.max_iter; ++it) {
        SpaceTimeField next = duhamel_gamma(v, z, T, opt.pad);
        const double d = xsb_norm(band_limit(next - v, opt.xsb_band), opt.sigma, opt.b);
        if (!res.distances.empty()) {
            const double prev = res.distances.back();
            res.ratios.push_back(prev > 0.0 ? d / prev : 0.0);
        }
        res.distances.push_back(d);
        res.iterations = it;
        v = std::move(next);
        if (!std::isfinite(d)) break;
        if (d <= opt.tol) {
            res.converged = res.ratios.empty() || res.ratios.back() < 1.0;
            break;
        }
    }
    const SpaceTimeField low = band_limit(v, opt.xsb_band);
    res.xsb_norm_v = xsb_norm(low, opt.sigma, opt.b);
    res.high_band_mass = std::pow(lp_norm(v - low, 2.0), 2);
    res.v = std::move(v);
    res.z = std::move(z);
    return res;
}

/// max over samples with t in [t0, t1] of ||u_t + u_xxx + u^7 u_x||_{L^2_x} / ||u||_{L^2_x},
/// using a fourth-order central difference of the interaction-picture field
/// S(-t) u(t) and the exact spatial operators.
inline double pde_residual(const SpaceTimeField& u, double t0, double t1, int pad = default_padding) {
    const SpaceTimeField p = as_physical(u);
    const Grid& g = p.grid();
    const TimeAxis& a = p.axis();
    const double dt = a.dt();
    auto interaction = [&](std::size_t m) {
        const Field s = to_spectral(p.row(m));
        return airy_propagate(s, -a.t(m));
    };
    double worst = 0.0;
    for (std::size_t m = 2; m + 2 < p.rows(); ++m) {
        const double t = a.t(m);
        if (t < t0 - 1e-12 || t > t1 + 1e-12) continue;
        const Field wm2 = interaction(m - 2), wm1 = interaction(m - 1), wp1 = interaction(m + 1),
                    wp2 = interaction(m + 2);
        std::vector<cx> dw(p.cols());
        for (std::size_t j = 0; j < dw.size(); ++j)
            dw[j] = (-wp2[j] + 8.0 * wp1[j] - 8.0 * wm1[j] + wm2[j]) / (12.0 * dt);
        const Field lin = airy_propagate(Field(g, std::move(dw), Representation::spectral), t);
        const Field um = to_spectral(p.row(m));
        const Field res = lin - nonlinearity(um, pad);
        const double norm_u = l2_norm(um);
        if (norm_u > 0.0) worst = std::max(worst, l2_norm(res) / norm_u);
    }
    return worst;
}

}  // namespace gkdv
