#pragma once
// Output formats: CSV with 17 significant digits, binary trajectory dumps and
// the per-directory manifest. Everything here is a pure function of its input
// so repeated runs produce byte-identical files.

#include <openssl/evp.h>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gkdv/error.hpp"
#include "gkdv/estimates.hpp"
#include "gkdv/montecarlo.hpp"
#include "gkdv/solver.hpp"

namespace gkdv {

#ifndef GKDV_VERSION
#define GKDV_VERSION "unknown"
#endif

inline constexpr const char* version = GKDV_VERSION;

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

template <class... Ts>
std::string csv_row(const Ts&... cells) {
    std::string out;
    auto put = [&out](const auto& c) {
        if (!out.empty()) out += ',';
        if constexpr (std::is_floating_point_v<std::decay_t<decltype(c)>>)
            out += fmt17(c);
        else if constexpr (std::is_integral_v<std::decay_t<decltype(c)>>)
            out += std::to_string(c);
        else
            out += c;
    };
    (put(cells), ...);
    return out + '\n';
}

}  // namespace detail

// ---- CSV writers ----------------------------------------------------------

/// sample,seed,<observables in name order>. All records must carry the same names.
inline std::string ensemble_csv(const std::vector<EnsembleRecord>& recs) {
    std::string out = "sample,seed";
    if (recs.empty()) return out + '\n';
    for (const auto& [k, v] : recs.front().observables) out += ',' + k;
    out += ",blown_up\n";
    for (const auto& r : recs) {
        out += std::to_string(r.sample) + ',' + std::to_string(r.seed);
        require(r.observables.size() == recs.front().observables.size(), "ensemble_csv: ragged records");
        for (const auto& [k, v] : r.observables) out += ',' + fmt17(v);
        out += r.blown_up ? ",1\n" : ",0\n";
    }
    return out;
}

inline std::string scale_csv(const StrichartzReport& rep) {
    std::string out = "T,scale,ci_lo,ci_hi\n";
    for (const auto& row : rep.rows) out += detail::csv_row(row.T, row.scale, row.ci_lo, row.ci_hi);
    return out;
}

inline std::string exponent_csv(const StrichartzReport& rep) {
    return "q,r,exponent,exponent_se,predicted\n" +
           detail::csv_row(rep.q, rep.r, rep.exponent, rep.exponent_se, rep.predicted);
}

inline std::string tail_csv(const TailFit& fit) {
    std::string out = "lambda,probability\n";
    for (std::size_t i = 0; i < fit.lambda.size(); ++i) out += detail::csv_row(fit.lambda[i], fit.probability[i]);
    return out;
}

inline std::string tail_fit_csv(const TailFit& fit) {
    return "slope,intercept,r2,slope_se,scale\n" +
           detail::csv_row(fit.slope, fit.intercept, fit.r2, fit.slope_se, fit.slope < 0 ? fit.scale() : 0.0);
}

inline std::string failures_csv(const ExceptionalReport& rep) {
    std::string out = "T,failures,samples,fraction,ci_lo,ci_hi\n";
    for (const auto& r : rep.rows) out += detail::csv_row(r.T, r.failures, r.samples, r.fraction, r.ci_lo, r.ci_hi);
    return out;
}

/// All per-sample Picard records, one line per (T, sample).
inline std::string lwp_records_csv(const ExceptionalReport& rep) {
    std::string out = "T,sample,seed,converged,iterations,contraction_ratio,failed\n";
    for (std::size_t k = 0; k < rep.rows.size(); ++k)
        for (const auto& r : rep.records[k])
            out += detail::csv_row(rep.rows[k].T, r.sample, r.seed, static_cast<long>(r.at("picard_converged")),
                                   static_cast<long>(r.at("iterations")), r.at("contraction_ratio"),
                                   static_cast<long>(r.at("picard_failed")));
    return out;
}

inline std::string estimate_csv(const std::vector<EstimateReport>& reps) {
    std::string out = "estimate_id,trial,lhs,rhs,ratio\n";
    for (const auto& rep : reps)
        for (const auto& r : rep.records) out += detail::csv_row(rep.id, r.trial, r.lhs, r.rhs, r.ratio);
    return out;
}

inline std::string estimate_summary_csv(const std::vector<EstimateReport>& reps) {
    std::string out = "estimate_id,n_modes,n_times,band,trials,excluded,max_ratio,median_ratio\n";
    for (const auto& r : reps)
        out += detail::csv_row(r.id, static_cast<long>(r.n_modes), static_cast<long>(r.n_times), r.band,
                               static_cast<long>(r.records.size()), r.excluded, r.max_ratio(), r.median_ratio());
    return out;
}

inline std::string diagnostics_csv(const Trajectory& tr) {
    std::string out = "step,time,mean,mass,energy\n";
    for (const auto& d : tr.diagnostics)
        out += detail::csv_row(d.step, d.time, d.invariants.mean, d.invariants.mass, d.invariants.energy);
    return out;
}

/// x,re,im (physical values).
inline std::string field_csv(const Field& f) {
    const Field u = as_physical(f);
    std::string out = "x,re,im\n";
    for (std::size_t j = 0; j < u.size(); ++j) out += detail::csv_row(u.grid().x(j), u[j].real(), u[j].imag());
    return out;
}

// ---- trajectory dump ------------------------------------------------------

/// Text header terminated by "end_header\n", then one row per time sample:
/// t, u(x_0), ..., u(x_{N-1}) as little-endian float64.
inline std::string trajectory_bytes(const Trajectory& tr, std::uint64_t seed) {
    std::ostringstream h;
    h << "gkdv-trajectory 1\n"
      << "half_length " << fmt17(tr.grid.half_length()) << '\n'
      << "n_modes " << tr.grid.size() << '\n'
      << "dt " << fmt17(tr.dt) << '\n'
      << "stride " << tr.stride << '\n'
      << "scheme " << tr.scheme << '\n'
      << "seed " << seed << '\n'
      << "rows " << tr.samples.size() << '\n'
      << "columns t,u[0.." << tr.grid.size() - 1 << "]\n"
      << "blown_up " << (tr.blown_up ? 1 : 0) << '\n'
      << "end_header\n";
    std::string out = h.str();
    auto put = [&out](double v) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        for (int b = 0; b < 8; ++b) out += static_cast<char>((bits >> (8 * b)) & 0xff);
    };
    for (std::size_t r = 0; r < tr.samples.size(); ++r) {
        put(tr.times[r]);
        for (std::size_t j = 0; j < tr.samples[r].size(); ++j) put(tr.samples[r][j].real());
    }
    return out;
}

// ---- hashing and manifest -------------------------------------------------

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

/// Collects the artifacts of one run and writes them plus MANIFEST.
class OutputDir {
public:
    explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
        std::filesystem::create_directories(root_);
    }

    const std::filesystem::path& root() const { return root_; }

    void write(const std::string& name, const std::string& bytes) {
        std::ofstream f(root_ / name, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + (root_ / name).string());
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        entries_.push_back({name, bytes.size(), sha256_hex(bytes)});
    }

    /// Manifest: command, version, artifact table, then the resolved config.
    void finish(const std::string& command, const std::string& config_echo, const std::string& status = "ok") {
        std::ostringstream m;
        m << "command " << command << '\n' << "version " << version << '\n' << "status " << status << '\n';
        m << "[artifacts]\n";
        for (const auto& e : entries_) m << e.name << ' ' << e.bytes << ' ' << e.sha256 << '\n';
        m << "[config]\n" << config_echo;
        const std::string s = m.str();
        std::ofstream f(root_ / "MANIFEST", std::ios::binary | std::ios::trunc);
        f.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

    std::vector<std::string> files() const {
        std::vector<std::string> v;
        for (const auto& e : entries_) v.push_back(e.name);
        return v;
    }

private:
    struct Entry {
        std::string name;
        std::size_t bytes;
        std::string sha256;
    };
    std::filesystem::path root_;
    std::vector<Entry> entries_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace gkdv
