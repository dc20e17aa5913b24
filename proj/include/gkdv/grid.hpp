#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gkdv/error.hpp"
#include "gkdv/fft.hpp"

namespace gkdv {

/// Periodic discretization of [-L, L) with N samples; the torus stands in
/// for the real line. Frequencies are xi_k = pi k / L, k in [-N/2, N/2).
class Grid {
public:
    Grid(double half_length, int n_modes) : half_length_(half_length), n_(n_modes) {
        require(half_length > 0.0, "grid: half_length must be positive");
        require(n_modes >= 8 && n_modes % 2 == 0, "grid: n_modes must be even and >= 8");
    }

    double half_length() const noexcept { return half_length_; }
    int size() const noexcept { return n_; }
    double dx() const noexcept { return 2.0 * half_length_ / n_; }
    /// Frequency spacing pi/L.
    double dxi() const noexcept { return std::numbers::pi / half_length_; }
    /// |xi| of the Nyquist mode.
    double xi_max() const noexcept { return dxi() * (n_ / 2); }

    double x(std::size_t j) const noexcept { return -half_length_ + dx() * static_cast<double>(j); }
    long wavenumber(std::size_t j) const noexcept { return signed_index(static_cast<long>(j), n_); }
    double xi(std::size_t j) const noexcept { return dxi() * static_cast<double>(wavenumber(j)); }
    bool is_nyquist(std::size_t j) const noexcept { return static_cast<long>(j) == n_ / 2; }

    bool operator==(const Grid&) const = default;

private:
    double half_length_;
    int n_;
};

inline Grid make_grid(double half_length, int n_modes) { return Grid(half_length, n_modes); }

enum class Representation { physical, spectral };

/// Samples of a function on a Grid, either as point values u(x_j) or as
/// Riemann-sum Fourier coefficients F_x u(xi_k) with the symmetric
/// 1/sqrt(2 pi) normalization. Spectral values are stored in DFT order.
class Field {
public:
    Field(Grid grid, std::vector<cx> values, Representation rep)
        : grid_(grid), values_(std::move(values)), rep_(rep) {
        require(values_.size() == static_cast<std::size_t>(grid_.size()),
                "field: value count does not match grid");
    }

    static Field zeros(const Grid& g, Representation rep = Representation::physical) {
        return Field(g, std::vector<cx>(static_cast<std::size_t>(g.size())), rep);
    }

    /// Point samples of f on the grid.
    static Field sample(const Grid& g, const std::function<cx(double)>& f) {
        std::vector<cx> v(static_cast<std::size_t>(g.size()));
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(g.x(j));
        return Field(g, std::move(v), Representation::physical);
    }

    const Grid& grid() const noexcept { return grid_; }
    Representation representation() const noexcept { return rep_; }
    bool is_physical() const noexcept { return rep_ == Representation::physical; }
    std::span<const cx> values() const noexcept { return values_; }
    const cx& operator[](std::size_t j) const noexcept { return values_[j]; }
    std::size_t size() const noexcept { return values_.size(); }

    /// Moves the sample buffer out (for building derived fields cheaply).
    std::vector<cx> take_values() && { return std::move(values_); }

private:
    Grid grid_;
    std::vector<cx> values_;
    Representation rep_;
};

namespace detail {

/// (-1)^k, the phase of e^{-i x_0 xi_k} with x_0 = -L.
inline double alternating(long k) noexcept { return (k & 1) ? -1.0 : 1.0; }

inline void physical_to_spectral(const Grid& g, std::span<cx> v) {
    fft_forward(v);
    const double scale = g.dx() / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= scale * alternating(g.wavenumber(j));
}

inline void spectral_to_physical(const Grid& g, std::span<cx> v) {
    const double scale = g.dxi() / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= scale * alternating(g.wavenumber(j));
    fft_backward(v);
}

}  // namespace detail

inline Field to_spectral(const Field& f) {
    require(f.is_physical(), "to_spectral: field is already spectral");
    std::vector<cx> v(f.values().begin(), f.values().end());
    detail::physical_to_spectral(f.grid(), v);
    return Field(f.grid(), std::move(v), Representation::spectral);
}

inline Field to_physical(const Field& f) {
    require(!f.is_physical(), "to_physical: field is already physical");
    std::vector<cx> v(f.values().begin(), f.values().end());
    detail::spectral_to_physical(f.grid(), v);
    return Field(f.grid(), std::move(v), Representation::physical);
}

inline Field as_spectral(const Field& f) { return f.is_physical() ? to_spectral(f) : f; }
inline Field as_physical(const Field& f) { return f.is_physical() ? f : to_physical(f); }

/// Multiplies the spectrum by symbol(xi_k, slot). The result keeps the input
/// representation.
template <class Symbol>
Field apply_symbol(const Field& f, Symbol&& symbol) {
    Field spec = as_spectral(f);
    const Grid& g = f.grid();
    std::vector<cx> v = std::move(spec).take_values();
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= symbol(g.xi(j), j);
    Field out(g, std::move(v), Representation::spectral);
    return f.is_physical() ? to_physical(out) : out;
}

/// Airy group S(t): multiplies each coefficient by e^{i t xi^3}.
inline Field airy_propagate(const Field& f, double t) {
    return apply_symbol(f, [t](double xi, std::size_t) { return std::polar(1.0, t * xi * xi * xi); });
}

/// Japanese bracket <xi> = (1 + xi^2)^{1/2}.
inline double bracket(double xi) noexcept { return std::sqrt(1.0 + xi * xi); }

/// Bessel potential J^s, symbol <xi>^s.
inline Field bessel_multiplier(const Field& f, double s) {
    return apply_symbol(f, [s](double xi, std::size_t) { return cx(std::pow(1.0 + xi * xi, 0.5 * s)); });
}

/// Spectral derivative, symbol (i xi)^order. For odd orders the Nyquist
/// coefficient is dropped since its derivative is not representable.
inline Field derivative(const Field& f, int order) {
    require(order >= 1, "derivative: order must be >= 1");
    const Grid& g = f.grid();
    return apply_symbol(f, [&g, order](double xi, std::size_t j) {
        if (order % 2 == 1 && g.is_nyquist(j)) return cx(0.0);
        return std::pow(cx(0.0, xi), order);
    });
}

/// Generalized 3/2-rule: keeps |xi| <= xi_max * 2/(degree + 1).
inline Field dealias(const Field& f, int degree) {
    require(degree >= 2, "dealias: degree must be >= 2");
    const double cut = f.grid().xi_max() * 2.0 / (degree + 1);
    return apply_symbol(f, [cut](double xi, std::size_t) { return std::abs(xi) <= cut ? cx(1.0) : cx(0.0); });
}

/// Sharp dyadic block {<xi> in [N, 2N)}; block 1 collects <xi> < 2.
inline Field dyadic_project(const Field& f, long block) {
    require(block >= 1 && (block & (block - 1)) == 0, "dyadic_project: block must be a power of two");
    const double lo = block == 1 ? 0.0 : static_cast<double>(block);
    const double hi = 2.0 * static_cast<double>(block);
    return apply_symbol(f, [lo, hi](double xi, std::size_t) {
        const double b = bracket(xi);
        return (b >= lo && b < hi) ? cx(1.0) : cx(0.0);
    });
}

/// Sharp restriction to |xi| <= xi_cut.
inline Field band_limit(const Field& f, double xi_cut) {
    return apply_symbol(f, [xi_cut](double xi, std::size_t) { return std::abs(xi) <= xi_cut ? cx(1.0) : cx(0.0); });
}

inline Field zero_nyquist(const Field& f) {
    const Grid& g = f.grid();
    return apply_symbol(f, [&g](double, std::size_t j) { return g.is_nyquist(j) ? cx(0.0) : cx(1.0); });
}

/// Discrete L^2: dx * sum |u|^2 (physical) or dxi * sum |F u|^2 (spectral).
inline double l2_norm(const Field& f) {
    double acc = 0.0;
    for (const cx& v : f.values()) acc += std::norm(v);
    const double w = f.is_physical() ? f.grid().dx() : f.grid().dxi();
    return std::sqrt(w * acc);
}

inline Field operator+(const Field& a, const Field& b) {
    require(a.grid() == b.grid() && a.representation() == b.representation(), "field +: mismatched operands");
    std::vector<cx> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = a[j] + b[j];
    return Field(a.grid(), std::move(v), a.representation());
}

inline Field operator-(const Field& a, const Field& b) {
    require(a.grid() == b.grid() && a.representation() == b.representation(), "field -: mismatched operands");
    std::vector<cx> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = a[j] - b[j];
    return Field(a.grid(), std::move(v), a.representation());
}

inline Field operator*(cx c, const Field& a) {
    std::vector<cx> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = c * a[j];
    return Field(a.grid(), std::move(v), a.representation());
}

/// Trigonometric interpolation onto a grid refined by `factor` (same L):
/// zero-pads the spectrum and returns physical samples on the fine grid.
/// The Nyquist coefficient is discarded.
inline Field refine(const Field& f, int factor) {
    require(factor >= 1, "refine: factor must be >= 1");
    if (factor == 1) return as_physical(f);
    const Field spec = as_spectral(f);
    const Grid& g = f.grid();
    const Grid fine(g.half_length(), g.size() * factor);
    std::vector<cx> v(static_cast<std::size_t>(fine.size()));
    for (std::size_t j = 0; j < spec.size(); ++j) {
        if (g.is_nyquist(j)) continue;
        v[static_cast<std::size_t>(slot_of(g.wavenumber(j), fine.size()))] = spec[j];
    }
    return to_physical(Field(fine, std::move(v), Representation::spectral));
}

/// Keeps the wavenumbers of `coarse` from a spectral field on a finer grid
/// with the same half-length.
inline Field truncate_to(const Field& f, const Grid& coarse) {
    const Field spec = as_spectral(f);
    const Grid& g = f.grid();
    require(g.half_length() == coarse.half_length() && g.size() >= coarse.size(),
            "truncate_to: incompatible grids");
    std::vector<cx> v(static_cast<std::size_t>(coarse.size()));
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (coarse.is_nyquist(j)) continue;
        v[j] = spec[static_cast<std::size_t>(slot_of(coarse.wavenumber(j), g.size()))];
    }
    return Field(coarse, std::move(v), Representation::spectral);
}

}  // namespace gkdv
