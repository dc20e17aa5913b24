#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

namespace gkdv {

using cx = std::complex<double>;

namespace detail {

/// Process-wide cache of FFTW plans. Planning is serialized; execution uses
/// the new-array interface, which FFTW guarantees to be thread-safe.
/// FFTW_ESTIMATE | FFTW_UNALIGNED makes the plan (and thus the rounding)
/// independent of buffer alignment, so results are bit-reproducible.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int rows, int cols, int sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(rows, cols, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<cx> scratch(static_cast<std::size_t>(rows) * cols);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan p = rows == 1 ? fftw_plan_dft_1d(cols, buf, buf, sign, flags)
                                : fftw_plan_dft_2d(rows, cols, buf, buf, sign, flags);
        plans_.emplace(key, p);
        return p;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, p] : plans_) fftw_destroy_plan(p);
    }

    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

inline void execute(std::span<cx> data, int rows, int cols, int sign) {
    fftw_plan p = PlanCache::instance().get(rows, cols, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, buf, buf);
}

}  // namespace detail

/// Unnormalized in-place DFT, X_k = sum_j x_j e^{-2 pi i jk/n}.
inline void fft_forward(std::span<cx> data) {
    detail::execute(data, 1, static_cast<int>(data.size()), FFTW_FORWARD);
}

/// Unnormalized in-place inverse DFT (no 1/n factor).
inline void fft_backward(std::span<cx> data) {
    detail::execute(data, 1, static_cast<int>(data.size()), FFTW_BACKWARD);
}

/// Row-major 2D transforms over a rows x cols block.
inline void fft2_forward(std::span<cx> data, int rows, int cols) {
    detail::execute(data, rows, cols, FFTW_FORWARD);
}

inline void fft2_backward(std::span<cx> data, int rows, int cols) {
    detail::execute(data, rows, cols, FFTW_BACKWARD);
}

/// Signed wavenumber of DFT index j on an n-point grid, in [-n/2, n/2).
constexpr long signed_index(long j, long n) noexcept { return j < n / 2 ? j : j - n; }

/// DFT slot holding signed wavenumber k on an n-point grid.
constexpr long slot_of(long k, long n) noexcept { return k >= 0 ? k : k + n; }

}  // namespace gkdv
