#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "gkdv/error.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/spacetime.hpp"
#include "gkdv/wiener.hpp"

namespace gkdv {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// ||u||_{H^s} = || <xi>^s F_x u ||_{L^2_xi} as a Riemann sum.
inline double sobolev_norm(const Field& f, double s) {
    const Field spec = as_spectral(f);
    double acc = 0.0;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double xi = spec.grid().xi(j);
        acc += std::pow(1.0 + xi * xi, s) * std::norm(spec[j]);
    }
    return std::sqrt(spec.grid().dxi() * acc);
}

/// Homogeneous norm with weight |xi|^s; the xi = 0 coefficient is excluded.
inline double homogeneous_norm(const Field& f, double s) {
    require(s > -0.5, "homogeneous_norm: s must exceed -1/2");
    const Field spec = as_spectral(f);
    double acc = 0.0;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        if (spec.grid().wavenumber(j) == 0) continue;
        acc += std::pow(std::abs(spec.grid().xi(j)), 2.0 * s) * std::norm(spec[j]);
    }
    return std::sqrt(spec.grid().dxi() * acc);
}

namespace detail {

/// (w * sum |v|^p)^{1/p}, or max |v| for p = infinity.
template <class Range>
double lebesgue(const Range& values, double weight, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (const cx& v : values) m = std::max(m, std::abs(v));
        return m;
    }
    double acc = 0.0;
    for (const cx& v : values) acc += std::pow(std::abs(v), p);
    return std::pow(weight * acc, 1.0 / p);
}

inline void check_exponent(double p, const char* what) {
    require(p >= 1.0, std::string(what) + ": Lebesgue exponent must be >= 1");
}

}  // namespace detail

/// ||u||_{L^p_x} by Riemann sum over the grid; p = infinity gives the max.
inline double lp_norm(const Field& f, double p) {
    detail::check_exponent(p, "lp_norm");
    const Field phys = as_physical(f);
    return detail::lebesgue(phys.values(), phys.grid().dx(), p);
}

/// ||u||_{L^p_{xt}} over the whole space-time box.
inline double lp_norm(const SpaceTimeField& u, double p) {
    detail::check_exponent(p, "lp_norm");
    const SpaceTimeField phys = as_physical(u);
    return detail::lebesgue(phys.values(), phys.grid().dx() * phys.axis().dt(), p);
}

/// Modulation norm || <n>^s ||psi(D - n) u||_{L^p_x} ||_{l^q_n}, summed over
/// every band resolvable on the grid.
inline double modulation_norm(const Field& f, double s, double p, double q) {
    detail::check_exponent(p, "modulation_norm");
    detail::check_exponent(q, "modulation_norm");
    const Field spec = as_spectral(f);
    const long nb = max_band(f.grid());
    double acc = 0.0;
    for (long n = -nb; n <= nb; ++n) {
        const double term =
            std::pow(1.0 + static_cast<double>(n * n), 0.5 * s) * lp_norm(project_band(spec, n), p);
        if (std::isinf(q))
            acc = std::max(acc, term);
        else
            acc += std::pow(term, q);
    }
    return std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
}

/// Half-open time window [begin, end).
struct TimeInterval {
    double begin;
    double end;
};

/// ||u||_{L^q_t L^r_x(interval)}: L^r in space at each time sample falling
/// in the interval, then a Riemann L^q over those samples.
inline double mixed_norm(const SpaceTimeField& u, double q, double r, TimeInterval interval) {
    detail::check_exponent(q, "mixed_norm");
    detail::check_exponent(r, "mixed_norm");
    const TimeAxis& a = u.axis();
    const double eps = 1e-9 * a.dt();
    require(interval.begin < interval.end && interval.begin >= a.t(0) - eps &&
                interval.end <= a.t(0) + a.span() + eps,
            "mixed_norm: interval outside the time axis");
    const SpaceTimeField phys = as_physical(u);
    std::vector<cx> slice_norms;
    for (std::size_t m = 0; m < phys.rows(); ++m) {
        const double t = a.t(m);
        if (t < interval.begin - eps || t >= interval.end - eps) continue;
        const auto row = phys.values().subspan(m * phys.cols(), phys.cols());
        slice_norms.emplace_back(detail::lebesgue(row, phys.grid().dx(), r));
    }
    return detail::lebesgue(slice_norms, a.dt(), q);
}

/// Whole-axis mixed norm.
inline double mixed_norm(const SpaceTimeField& u, double q, double r) {
    return mixed_norm(u, q, r, {u.axis().t(0), u.axis().t(0) + u.axis().span()});
}

/// Largest |xi| carrying more than rel_threshold of the total x-spectral energy.
inline double effective_band(const SpaceTimeField& u, double rel_threshold = 1e-24) {
    const SpaceTimeField spec = as_spectral(u);
    std::vector<double> energy(spec.cols(), 0.0);
    double total = 0.0;
    for (std::size_t l = 0; l < spec.rows(); ++l)
        for (std::size_t j = 0; j < spec.cols(); ++j) {
            const double e = std::norm(spec.at(l, j));
            energy[j] += e;
            total += e;
        }
    double band = 0.0;
    for (std::size_t j = 0; j < spec.cols(); ++j)
        if (energy[j] > rel_threshold * total) band = std::max(band, std::abs(spec.grid().xi(j)));
    return band;
}

/// Throws unless the tau axis resolves the dispersion relation on the
/// field's band: 2 * band^3 <= tau_max.
inline void check_modulation_range(const SpaceTimeField& u) {
    const double band = effective_band(u);
    if (2.0 * band * band * band > u.axis().tau_max())
        throw PreconditionError("xsb_norm: modulation range insufficient (band " + std::to_string(band) +
                                " needs tau_max >= " + std::to_string(2.0 * band * band * band) +
                                ", axis has " + std::to_string(u.axis().tau_max()) + ")");
}

/// ||u||_{X_{s,b}} = || <xi>^s <tau - xi^3>^b F u ||_{L^2_{xi,tau}}.
inline double xsb_norm(const SpaceTimeField& u, double s, double b) {
    check_modulation_range(u);
    const SpaceTimeField spec = as_spectral(u);
    double acc = 0.0;
    for (std::size_t l = 0; l < spec.rows(); ++l) {
        const double tau = spec.axis().tau(l);
        for (std::size_t j = 0; j < spec.cols(); ++j) {
            const double xi = spec.grid().xi(j);
            const double mod = tau - xi * xi * xi;
            acc += std::pow(1.0 + xi * xi, s) * std::pow(1.0 + mod * mod, b) * std::norm(spec.at(l, j));
        }
    }
    return std::sqrt(spec.grid().dxi() * spec.axis().dtau() * acc);
}

/// Restriction of every time slice to |xi| <= xi_cut.
inline SpaceTimeField band_limit(const SpaceTimeField& u, double xi_cut) {
    return apply_spatial_symbol(u, [xi_cut](double xi) { return std::abs(xi) <= xi_cut ? cx(1.0) : cx(0.0); });
}

/// J^s in x at every time.
inline SpaceTimeField bessel_multiplier(const SpaceTimeField& u, double s) {
    return apply_spatial_symbol(u, [s](double xi) { return cx(std::pow(1.0 + xi * xi, 0.5 * s)); });
}

enum class BilinearVariant {
    plus,        ///< |xi1 + xi2|^s
    minus,       ///< |xi1 - xi2|^s
    plus_minus,  ///< |xi1 + xi2|^s |xi1 - xi2|^s, the composite I^s I^s_-
};

namespace detail {

/// Physical samples on the same spatial grid and a time axis refined by 2,
/// by zero-padding the tau spectrum.
inline SpaceTimeField refine_time_2x(const SpaceTimeField& u) {
    const SpaceTimeField spec = as_spectral(u);
    const TimeAxis& a = u.axis();
    const TimeAxis fine(a.span(), 2 * a.size());
    std::vector<cx> v(spec.cols() * static_cast<std::size_t>(fine.size()));
    for (std::size_t l = 0; l < spec.rows(); ++l) {
        const long k = signed_index(static_cast<long>(l), a.size());
        if (k == -a.size() / 2) continue;
        const auto dst = static_cast<std::size_t>(slot_of(k, fine.size()));
        std::copy_n(spec.values().begin() + static_cast<std::ptrdiff_t>(l * spec.cols()), spec.cols(),
                    v.begin() + static_cast<std::ptrdiff_t>(dst * spec.cols()));
    }
    return to_physical(SpaceTimeField(u.grid(), fine, std::move(v), Representation::spectral));
}

}  // namespace detail

/// Bilinear Fourier multiplier applied to the product u1 u2:
///   F_x B(u1,u2)(xi, t) = (2 pi)^{-1/2} int sym(xi1, xi - xi1) F_x u1(xi1,t) F_x u2(xi - xi1,t) dxi1.
/// Evaluated without aliasing on a grid with 2N modes and 2M_t times (same
/// L and span), which represents the product exactly.
inline SpaceTimeField bilinear_I(const SpaceTimeField& u1, const SpaceTimeField& u2, double s,
                                 BilinearVariant variant) {
    require(same_axes(u1, u2), "bilinear_I: axis mismatch");
    const Grid& g = u1.grid();
    const SpaceTimeField f1 = detail::refine_time_2x(u1);
    const SpaceTimeField f2 = detail::refine_time_2x(u2);
    const Grid out_grid(g.half_length(), 2 * g.size());
    const TimeAxis out_axis = f1.axis();
    const int n = g.size();

    // Symbol table over wavenumber pairs (k1, k2), Nyquist excluded.
    std::vector<double> sym(static_cast<std::size_t>(n) * n, 0.0);
    for (std::size_t j1 = 0; j1 < static_cast<std::size_t>(n); ++j1)
        for (std::size_t j2 = 0; j2 < static_cast<std::size_t>(n); ++j2) {
            if (g.is_nyquist(j1) || g.is_nyquist(j2)) continue;
            const double a = g.xi(j1), b = g.xi(j2);
            double w = 1.0;
            if (variant != BilinearVariant::minus) w *= std::pow(std::abs(a + b), s);
            if (variant != BilinearVariant::plus) w *= std::pow(std::abs(a - b), s);
            sym[j1 * n + j2] = w;
        }

    const double conv = g.dxi() / std::sqrt(2.0 * std::numbers::pi);
    std::vector<Field> rows;
    rows.reserve(f1.rows());
    for (std::size_t m = 0; m < f1.rows(); ++m) {
        const Field a = to_spectral(f1.row(m));
        const Field b = to_spectral(f2.row(m));
        std::vector<cx> w(static_cast<std::size_t>(out_grid.size()));
        for (std::size_t j1 = 0; j1 < static_cast<std::size_t>(n); ++j1) {
            const cx aj = a[j1];
            if (aj == cx(0.0)) continue;
            const long k1 = g.wavenumber(j1);
            for (std::size_t j2 = 0; j2 < static_cast<std::size_t>(n); ++j2) {
                const double sw = sym[j1 * n + j2];
                if (sw == 0.0) continue;
                const long k = k1 + g.wavenumber(j2);
                w[static_cast<std::size_t>(slot_of(k, out_grid.size()))] += sw * aj * b[j2];
            }
        }
        for (cx& c : w) c *= conv;
        rows.push_back(to_physical(Field(out_grid, std::move(w), Representation::spectral)));
    }
    return SpaceTimeField::from_rows(out_grid, out_axis, rows);
}

}  // namespace gkdv
