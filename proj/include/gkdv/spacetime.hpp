#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "gkdv/error.hpp"
#include "gkdv/fft.hpp"
#include "gkdv/grid.hpp"

namespace gkdv {

/// Uniform periodic time samples t_m = -span/2 + m dt on [-span/2, span/2),
/// with dual frequencies tau_l = 2 pi l / span.
class TimeAxis {
public:
    TimeAxis(double span, int samples) : span_(span), m_(samples) {
        require(span > 0.0, "time axis: span must be positive");
        require(samples >= 16 && samples % 2 == 0, "time axis: sample count must be even and >= 16");
    }

    double span() const noexcept { return span_; }
    int size() const noexcept { return m_; }
    double dt() const noexcept { return span_ / m_; }
    double t(std::size_t m) const noexcept { return -0.5 * span_ + dt() * static_cast<double>(m); }
    double dtau() const noexcept { return 2.0 * std::numbers::pi / span_; }
    double tau(std::size_t l) const noexcept {
        return dtau() * static_cast<double>(signed_index(static_cast<long>(l), m_));
    }
    /// |tau| of the Nyquist mode.
    double tau_max() const noexcept { return dtau() * (m_ / 2); }
    /// Index of the sample t = 0.
    std::size_t origin() const noexcept { return static_cast<std::size_t>(m_ / 2); }

    bool operator==(const TimeAxis&) const = default;

private:
    double span_;
    int m_;
};

/// u(x, t) sampled on Grid x TimeAxis, stored time-major (row m = time t_m).
/// `spectral` means transformed in both variables with the 1/(2 pi)
/// normalization; rows are then indexed by tau and columns by xi.
class SpaceTimeField {
public:
    SpaceTimeField(Grid grid, TimeAxis axis, std::vector<cx> values, Representation rep)
        : grid_(grid), axis_(axis), values_(std::move(values)), rep_(rep) {
        require(values_.size() == static_cast<std::size_t>(grid_.size()) * axis_.size(),
                "space-time field: value count does not match axes");
    }

    static SpaceTimeField zeros(const Grid& g, const TimeAxis& a, Representation rep = Representation::physical) {
        return SpaceTimeField(g, a, std::vector<cx>(static_cast<std::size_t>(g.size()) * a.size()), rep);
    }

    static SpaceTimeField sample(const Grid& g, const TimeAxis& a, const std::function<cx(double, double)>& f) {
        std::vector<cx> v(static_cast<std::size_t>(g.size()) * a.size());
        for (std::size_t m = 0; m < static_cast<std::size_t>(a.size()); ++m)
            for (std::size_t j = 0; j < static_cast<std::size_t>(g.size()); ++j)
                v[m * g.size() + j] = f(g.x(j), a.t(m));
        return SpaceTimeField(g, a, std::move(v), Representation::physical);
    }

    /// Physical field assembled from per-time Fields (any representation).
    static SpaceTimeField from_rows(const Grid& g, const TimeAxis& a, const std::vector<Field>& rows) {
        require(rows.size() == static_cast<std::size_t>(a.size()), "from_rows: row count mismatch");
        std::vector<cx> v;
        v.reserve(static_cast<std::size_t>(g.size()) * a.size());
        for (const Field& r : rows) {
            require(r.grid() == g, "from_rows: grid mismatch");
            const Field p = as_physical(r);
            v.insert(v.end(), p.values().begin(), p.values().end());
        }
        return SpaceTimeField(g, a, std::move(v), Representation::physical);
    }

    const Grid& grid() const noexcept { return grid_; }
    const TimeAxis& axis() const noexcept { return axis_; }
    Representation representation() const noexcept { return rep_; }
    bool is_physical() const noexcept { return rep_ == Representation::physical; }
    std::span<const cx> values() const noexcept { return values_; }
    std::size_t rows() const noexcept { return static_cast<std::size_t>(axis_.size()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(grid_.size()); }
    const cx& at(std::size_t m, std::size_t j) const noexcept { return values_[m * cols() + j]; }

    /// Physical time slice as a Field.
    Field row(std::size_t m) const {
        require(is_physical(), "row: field must be physical");
        auto first = values_.begin() + static_cast<std::ptrdiff_t>(m * cols());
        return Field(grid_, std::vector<cx>(first, first + static_cast<std::ptrdiff_t>(cols())),
                     Representation::physical);
    }

    std::vector<cx> take_values() && { return std::move(values_); }

private:
    Grid grid_;
    TimeAxis axis_;
    std::vector<cx> values_;
    Representation rep_;
};

inline bool same_axes(const SpaceTimeField& a, const SpaceTimeField& b) {
    return a.grid() == b.grid() && a.axis() == b.axis();
}

inline SpaceTimeField to_spectral(const SpaceTimeField& u) {
    require(u.is_physical(), "to_spectral: space-time field is already spectral");
    const Grid& g = u.grid();
    const TimeAxis& a = u.axis();
    std::vector<cx> v(u.values().begin(), u.values().end());
    fft2_forward(v, a.size(), g.size());
    const double scale = g.dx() * a.dt() / (2.0 * std::numbers::pi);
    for (std::size_t l = 0; l < u.rows(); ++l) {
        const double sl = scale * detail::alternating(signed_index(static_cast<long>(l), a.size()));
        for (std::size_t j = 0; j < u.cols(); ++j)
            v[l * u.cols() + j] *= sl * detail::alternating(g.wavenumber(j));
    }
    return SpaceTimeField(g, a, std::move(v), Representation::spectral);
}

inline SpaceTimeField to_physical(const SpaceTimeField& u) {
    require(!u.is_physical(), "to_physical: space-time field is already physical");
    const Grid& g = u.grid();
    const TimeAxis& a = u.axis();
    std::vector<cx> v(u.values().begin(), u.values().end());
    const double scale = g.dxi() * a.dtau() / (2.0 * std::numbers::pi);
    for (std::size_t l = 0; l < u.rows(); ++l) {
        const double sl = scale * detail::alternating(signed_index(static_cast<long>(l), a.size()));
        for (std::size_t j = 0; j < u.cols(); ++j)
            v[l * u.cols() + j] *= sl * detail::alternating(g.wavenumber(j));
    }
    fft2_backward(v, a.size(), g.size());
    return SpaceTimeField(g, a, std::move(v), Representation::physical);
}

inline SpaceTimeField as_spectral(const SpaceTimeField& u) { return u.is_physical() ? to_spectral(u) : u; }
inline SpaceTimeField as_physical(const SpaceTimeField& u) { return u.is_physical() ? u : to_physical(u); }

/// Multiplies the (xi, tau) spectrum by symbol(xi, tau); keeps representation.
template <class Symbol>
SpaceTimeField apply_symbol(const SpaceTimeField& u, Symbol&& symbol) {
    const SpaceTimeField spec = as_spectral(u);
    const Grid& g = u.grid();
    const TimeAxis& a = u.axis();
    std::vector<cx> v(spec.values().begin(), spec.values().end());
    for (std::size_t l = 0; l < spec.rows(); ++l)
        for (std::size_t j = 0; j < spec.cols(); ++j) v[l * spec.cols() + j] *= symbol(g.xi(j), a.tau(l));
    SpaceTimeField out(g, a, std::move(v), Representation::spectral);
    return u.is_physical() ? to_physical(out) : out;
}

/// Applies a spatial multiplier at every time (physical in, physical out).
template <class Symbol>
SpaceTimeField apply_spatial_symbol(const SpaceTimeField& u, Symbol&& symbol) {
    return apply_symbol(u, [&symbol](double xi, double) { return symbol(xi); });
}

/// Multiplies every time slice by w(t).
inline SpaceTimeField multiply_in_time(const SpaceTimeField& u, const std::function<double(double)>& w) {
    const SpaceTimeField p = as_physical(u);
    std::vector<cx> v(p.values().begin(), p.values().end());
    for (std::size_t m = 0; m < p.rows(); ++m) {
        const double wm = w(p.axis().t(m));
        for (std::size_t j = 0; j < p.cols(); ++j) v[m * p.cols() + j] *= wm;
    }
    return SpaceTimeField(p.grid(), p.axis(), std::move(v), Representation::physical);
}

inline SpaceTimeField operator+(const SpaceTimeField& a, const SpaceTimeField& b) {
    require(same_axes(a, b) && a.representation() == b.representation(), "space-time +: mismatched operands");
    std::vector<cx> v(a.values().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] + b.values()[i];
    return SpaceTimeField(a.grid(), a.axis(), std::move(v), a.representation());
}

inline SpaceTimeField operator-(const SpaceTimeField& a, const SpaceTimeField& b) {
    require(same_axes(a, b) && a.representation() == b.representation(), "space-time -: mismatched operands");
    std::vector<cx> v(a.values().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] - b.values()[i];
    return SpaceTimeField(a.grid(), a.axis(), std::move(v), a.representation());
}

inline SpaceTimeField operator*(cx c, const SpaceTimeField& a) {
    std::vector<cx> v(a.values().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * a.values()[i];
    return SpaceTimeField(a.grid(), a.axis(), std::move(v), a.representation());
}

/// S(t)phi sampled at every time of the axis.
inline SpaceTimeField free_evolution(const Field& phi, const TimeAxis& axis) {
    const Field spec = as_spectral(phi);
    const Grid& g = phi.grid();
    std::vector<Field> rows;
    rows.reserve(static_cast<std::size_t>(axis.size()));
    for (std::size_t m = 0; m < static_cast<std::size_t>(axis.size()); ++m)
        rows.push_back(to_physical(airy_propagate(spec, axis.t(m))));
    return SpaceTimeField::from_rows(g, axis, rows);
}

// ---------------------------------------------------------------------------
// Smooth cutoffs.

namespace detail {
inline double smooth_step_kernel(double x) noexcept { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
}  // namespace detail

/// eta(t): C^infinity, 1 on [-1, 1], 0 outside (-2, 2), monotone in between.
inline double eta(double t) noexcept {
    const double a = std::abs(t);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    const double r = a - 1.0;
    const double up = detail::smooth_step_kernel(1.0 - r);
    return up / (up + detail::smooth_step_kernel(r));
}

/// A cutoff profile at scale T: eta_T(t) = eta(t / T).
class Cutoff {
public:
    explicit Cutoff(double scale) : scale_(scale) { require(scale > 0.0, "cutoff: scale must be positive"); }
    double scale() const noexcept { return scale_; }
    double operator()(double t) const noexcept { return eta(t / scale_); }

private:
    double scale_;
};

}  // namespace gkdv
