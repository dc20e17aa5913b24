#pragma once
// Run configuration: an INI file with one section per concern. Every key has a
// default (see `RunConfig::echo()` on a default-constructed config); unknown
// keys are rejected and all problems are reported together.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gkdv/error.hpp"
#include "gkdv/estimates.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/io.hpp"
#include "gkdv/wiener.hpp"

namespace gkdv {

/// Real literal: "0.25", "1/16", "8pi", "pi/4", "1e-4".
inline std::optional<double> parse_real(std::string text) {
    std::erase_if(text, [](char c) { return c == ' ' || c == '\t'; });
    if (text.empty()) return std::nullopt;
    auto atom = [](std::string a) -> std::optional<double> {
        double mult = 1.0;
        if (a.size() >= 2 && a.compare(a.size() - 2, 2, "pi") == 0) {
            mult = std::numbers::pi;
            a.resize(a.size() - 2);
            if (!a.empty() && a.back() == '*') a.pop_back();
            if (a.empty()) return mult;
        }
        double v = 0.0;
        const auto [p, ec] = std::from_chars(a.data(), a.data() + a.size(), v);
        if (ec != std::errc() || p != a.data() + a.size()) return std::nullopt;
        return v * mult;
    };
    const auto slash = text.find('/');
    if (slash == std::string::npos) return atom(text);
    const auto num = atom(text.substr(0, slash)), den = atom(text.substr(slash + 1));
    if (!num || !den || *den == 0.0) return std::nullopt;
    return *num / *den;
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

struct RunConfig {
    // [grid]
    double half_length = 8.0 * std::numbers::pi;
    int n_modes = 512;

    // [time]: the reference integrator and the Picard space-time axis
    double final_time = 1.0;
    double dt = 1e-4;
    long stride = 1000;
    double blowup_threshold = 1e8;
    double span = 1.0;
    int time_samples = 512;

    // [model]
    double epsilon = 0.05;
    std::optional<double> s_value;  ///< default 17/112 + epsilon
    bool allow_override = false;
    std::optional<double> sigma_override, b_override, c_override;
    int pad = default_padding;

    // [data]
    std::string profile = "gaussian-bump";
    double amplitude = 1.0;
    double width = 1.0;
    double center = 0.0;
    double power = 2.0 / 7.0;
    std::string path;

    // [random]
    Distribution distribution = Distribution::gaussian;
    std::uint64_t seed = 1;

    // [run]
    std::string out = "out";

    // [randomize]
    long randomize_samples = 3;

    // [strichartz]
    double q = 4.0, r = 4.0;
    std::vector<double> strichartz_T = {0.125, 0.25, 0.5};
    int strichartz_time_samples = 64;
    long strichartz_samples = 10000;
    bool dispersion = true;
    double p_lo = 0.9, p_hi = 0.995;
    int grid_points = 20;

    // [lwp]
    std::vector<double> lwp_T = {0.25, 0.125, 0.0625, 0.03125};
    long lwp_samples = 200;
    double tol = 1e-10;
    int max_iter = 25;
    double xsb_band = 8.0;

    // [estimates]
    std::vector<std::string> estimate_ids_ = {"all"};
    long trials = 100;
    int estimate_modes = 64;
    int estimate_times = 128;
    double estimate_half_length = 8.0 * std::numbers::pi;
    double estimate_span = 4.0;
    double modulation_decay = 1.5;
    std::vector<double> linear_T = {0.25, 0.125, 0.0625};
    double nonlinear_T = 0.5;
    bool doubled = false;

    // derived
    double s() const { return s_value.value_or(17.0 / 112.0 + epsilon); }
    double sigma() const { return sigma_override.value_or(3.0 / 14.0 + 2.0 * epsilon); }
    double b() const { return b_override.value_or(0.5 + epsilon / 24.0); }
    double c() const { return c_override.value_or(0.5 + epsilon / 100.0); }

    Grid grid() const { return Grid(half_length, n_modes); }

    std::vector<std::string> selected_estimates() const {
        if (estimate_ids_.size() == 1 && estimate_ids_[0] == "all") return estimate_ids();
        return estimate_ids_;
    }

    EstimateConfig estimate_config(int threads) const {
        EstimateConfig e;
        e.epsilon = epsilon;
        e.trials = trials;
        e.n_modes = estimate_modes;
        e.n_times = estimate_times;
        e.half_length = estimate_half_length;
        e.span = estimate_span;
        e.seed = seed;
        e.threads = threads;
        e.linear_T = linear_T;
        e.nonlinear_T = nonlinear_T;
        e.modulation_decay = modulation_decay;
        return e;
    }

    PicardOptions picard_options() const {
        PicardOptions o;
        o.axis = TimeAxis(span, time_samples);
        o.sigma = sigma();
        o.b = b();
        o.tol = tol;
        o.max_iter = max_iter;
        o.xsb_band = xsb_band;
        o.pad = pad;
        return o;
    }

    std::string echo() const;
};

namespace detail {

struct Key {
    const char* section;
    const char* name;
    std::function<std::string(RunConfig&, const std::string&)> set;  ///< returns an error or ""
    std::function<std::string(const RunConfig&)> get;               ///< empty optional -> ""
};

inline std::string join_reals(const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += (out.empty() ? "" : ", ") + fmt17(x);
    return out;
}

template <class T>
std::string set_int(T& dst, const std::string& v) {
    long long x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) return "expected an integer, got '" + v + "'";
    dst = static_cast<T>(x);
    return "";
}

inline std::string set_real(double& dst, const std::string& v) {
    const auto x = parse_real(v);
    if (!x) return "expected a number, got '" + v + "'";
    dst = *x;
    return "";
}

inline std::string set_opt(std::optional<double>& dst, const std::string& v) {
    double x = 0.0;
    auto e = set_real(x, v);
    if (e.empty()) dst = x;
    return e;
}

inline std::string set_bool(bool& dst, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") dst = true;
    else if (v == "false" || v == "0" || v == "no") dst = false;
    else return "expected true/false, got '" + v + "'";
    return "";
}

inline std::string set_reals(std::vector<double>& dst, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) {
        const auto x = parse_real(item);
        if (!x) return "bad list entry '" + item + "'";
        out.push_back(*x);
    }
    dst = std::move(out);
    return "";
}

#define GKDV_REAL(sec, key, member) \
    {sec, key, [](RunConfig& c, const std::string& v) { return set_real(c.member, v); }, \
     [](const RunConfig& c) { return fmt17(c.member); }}
#define GKDV_INT(sec, key, member) \
    {sec, key, [](RunConfig& c, const std::string& v) { return set_int(c.member, v); }, \
     [](const RunConfig& c) { return std::to_string(c.member); }}
#define GKDV_BOOL(sec, key, member) \
    {sec, key, [](RunConfig& c, const std::string& v) { return set_bool(c.member, v); }, \
     [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }}
#define GKDV_REALS(sec, key, member) \
    {sec, key, [](RunConfig& c, const std::string& v) { return set_reals(c.member, v); }, \
     [](const RunConfig& c) { return join_reals(c.member); }}
#define GKDV_OPT(sec, key, member) \
    {sec, key, [](RunConfig& c, const std::string& v) { return set_opt(c.member, v); }, \
     [](const RunConfig& c) { return c.member ? fmt17(*c.member) : std::string(); }}

inline const std::vector<Key>& keys() {
    static const std::vector<Key> k = {
        GKDV_REAL("grid", "half_length", half_length),
        GKDV_INT("grid", "n_modes", n_modes),
        GKDV_REAL("time", "final", final_time),
        GKDV_REAL("time", "dt", dt),
        GKDV_INT("time", "stride", stride),
        GKDV_REAL("time", "blowup_threshold", blowup_threshold),
        GKDV_REAL("time", "span", span),
        GKDV_INT("time", "samples", time_samples),
        GKDV_REAL("model", "epsilon", epsilon),
        GKDV_OPT("model", "s", s_value),
        GKDV_BOOL("model", "allow_override", allow_override),
        GKDV_OPT("model", "sigma", sigma_override),
        GKDV_OPT("model", "b", b_override),
        GKDV_OPT("model", "c", c_override),
        GKDV_INT("model", "pad", pad),
        {"data", "profile", [](RunConfig& c, const std::string& v) { c.profile = v; return std::string(); },
         [](const RunConfig& c) { return c.profile; }},
        GKDV_REAL("data", "amplitude", amplitude),
        GKDV_REAL("data", "width", width),
        GKDV_REAL("data", "center", center),
        GKDV_REAL("data", "power", power),
        {"data", "path", [](RunConfig& c, const std::string& v) { c.path = v; return std::string(); },
         [](const RunConfig& c) { return c.path; }},
        {"random", "distribution",
         [](RunConfig& c, const std::string& v) {
             try {
                 c.distribution = parse_distribution(v);
             } catch (const std::exception& e) {
                 return std::string(e.what());
             }
             return std::string();
         },
         [](const RunConfig& c) { return to_string(c.distribution); }},
        GKDV_INT("random", "seed", seed),
        {"run", "out", [](RunConfig& c, const std::string& v) { c.out = v; return std::string(); },
         [](const RunConfig& c) { return c.out; }},
        GKDV_INT("randomize", "samples", randomize_samples),
        GKDV_REAL("strichartz", "q", q),
        GKDV_REAL("strichartz", "r", r),
        GKDV_REALS("strichartz", "T", strichartz_T),
        GKDV_INT("strichartz", "time_samples", strichartz_time_samples),
        GKDV_INT("strichartz", "samples", strichartz_samples),
        GKDV_BOOL("strichartz", "dispersion", dispersion),
        GKDV_REAL("strichartz", "p_lo", p_lo),
        GKDV_REAL("strichartz", "p_hi", p_hi),
        GKDV_INT("strichartz", "grid_points", grid_points),
        GKDV_REALS("lwp", "T", lwp_T),
        GKDV_INT("lwp", "samples", lwp_samples),
        GKDV_REAL("lwp", "tol", tol),
        GKDV_INT("lwp", "max_iter", max_iter),
        GKDV_REAL("lwp", "xsb_band", xsb_band),
        {"estimates", "ids",
         [](RunConfig& c, const std::string& v) {
             c.estimate_ids_ = split_list(v);
             return std::string();
         },
         [](const RunConfig& c) {
             std::string out;
             for (const auto& s : c.estimate_ids_) out += (out.empty() ? "" : ", ") + s;
             return out;
         }},
        GKDV_INT("estimates", "trials", trials),
        GKDV_INT("estimates", "n_modes", estimate_modes),
        GKDV_INT("estimates", "n_times", estimate_times),
        GKDV_REAL("estimates", "half_length", estimate_half_length),
        GKDV_REAL("estimates", "span", estimate_span),
        GKDV_REAL("estimates", "modulation_decay", modulation_decay),
        GKDV_REALS("estimates", "linear_T", linear_T),
        GKDV_REAL("estimates", "nonlinear_T", nonlinear_T),
        GKDV_BOOL("estimates", "doubled", doubled),
    };
    return k;
}

#undef GKDV_REAL
#undef GKDV_INT
#undef GKDV_BOOL
#undef GKDV_REALS
#undef GKDV_OPT

}  // namespace detail

/// Resolved configuration in INI form. The output directory is left out so
/// that identical runs into different directories echo identically.
inline std::string RunConfig::echo() const {
    std::string out, section;
    for (const auto& k : detail::keys()) {
        if (std::string_view(k.name) == "out") continue;
        if (section != k.section) {
            section = k.section;
            out += (out.empty() ? "[" : "\n[") + section + "]\n";
        }
        const std::string v = k.get(*this);
        out += (v.empty() ? "; " + std::string(k.name) + " =" : std::string(k.name) + " = " + v) + '\n';
    }
    out += "\n; derived\n; s = " + fmt17(s()) + "\n; sigma = " + fmt17(sigma()) + "\n; b = " + fmt17(b()) +
           "\n; c = " + fmt17(c()) + '\n';
    return out;
}

/// Every problem with a config, in file order then rule order.
inline std::vector<std::string> validate(const RunConfig& c) {
    std::vector<std::string> e;
    auto check = [&e](bool ok, const std::string& msg) {
        if (!ok) e.push_back(msg);
    };
    check(c.half_length > 0, "[grid] half_length must be positive");
    check(c.n_modes >= 8 && c.n_modes % 2 == 0, "[grid] n_modes must be even and >= 8");
    check(c.final_time > 0, "[time] final must be positive");
    check(c.dt > 0, "[time] dt must be positive");
    if (c.final_time > 0 && c.dt > 0) {
        const double steps = c.final_time / c.dt;
        check(std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps), "[time] final must be a multiple of dt");
    }
    check(c.stride >= 1, "[time] stride must be >= 1");
    check(c.blowup_threshold > 0, "[time] blowup_threshold must be positive");
    check(c.span > 0, "[time] span must be positive");
    check(c.time_samples >= 4 && c.time_samples % 2 == 0, "[time] samples must be even and >= 4");
    check(c.epsilon > 0 && c.epsilon <= 0.2, "[model] epsilon must lie in (0, 0.2]");
    if (!c.allow_override) {
        check(!c.sigma_override, "[model] sigma is derived from epsilon; set allow_override = true to override");
        check(!c.b_override, "[model] b is derived from epsilon; set allow_override = true to override");
        check(!c.c_override, "[model] c is derived from epsilon; set allow_override = true to override");
    }
    check(c.pad >= 1, "[model] pad must be >= 1");
    check(c.profile == "gaussian-bump" || c.profile == "sech-power" || c.profile == "file",
          "[data] profile must be gaussian-bump, sech-power or file (got '" + c.profile + "')");
    check(c.width > 0, "[data] width must be positive");
    check(c.power > 0, "[data] power must be positive");
    check(c.profile != "file" || !c.path.empty(), "[data] profile = file needs a path");
    check(c.randomize_samples >= 0, "[randomize] samples must be >= 0");
    check(c.q >= 2 && c.r >= 2, "[strichartz] q and r must be >= 2");
    check(c.strichartz_T.size() >= 3, "[strichartz] T needs at least three values");
    for (double t : c.strichartz_T) check(t > 0, "[strichartz] T values must be positive");
    check(c.strichartz_time_samples >= 1, "[strichartz] time_samples must be >= 1");
    check(c.strichartz_samples >= 1000, "[strichartz] samples must be >= 1000 for tail fits");
    check(0 < c.p_lo && c.p_lo < c.p_hi && c.p_hi < 1, "[strichartz] need 0 < p_lo < p_hi < 1");
    check(c.grid_points >= 3, "[strichartz] grid_points must be >= 3");
    check(!c.lwp_T.empty(), "[lwp] T must not be empty");
    for (std::size_t k = 0; k < c.lwp_T.size(); ++k) {
        check(c.lwp_T[k] > 0, "[lwp] T values must be positive");
        if (k) check(c.lwp_T[k] < c.lwp_T[k - 1], "[lwp] T values must be strictly decreasing");
    }
    check(c.lwp_samples >= 100, "[lwp] samples must be >= 100");
    check(c.tol > 0, "[lwp] tol must be positive");
    check(c.max_iter >= 1, "[lwp] max_iter must be >= 1");
    check(c.xsb_band > 0, "[lwp] xsb_band must be positive");
    const auto valid = estimate_ids();
    for (const auto& id : c.selected_estimates()) {
        if (std::find(valid.begin(), valid.end(), id) == valid.end()) {
            std::string list;
            for (const auto& v : valid) list += (list.empty() ? "" : ", ") + v;
            e.push_back("[estimates] unknown id '" + id + "'; valid ids: all, " + list);
        }
    }
    check(c.trials >= 1, "[estimates] trials must be >= 1");
    check(c.estimate_modes >= 8 && c.estimate_modes % 2 == 0, "[estimates] n_modes must be even and >= 8");
    check(c.estimate_times >= 4 && c.estimate_times % 2 == 0, "[estimates] n_times must be even and >= 4");
    check(c.estimate_half_length > 0 && c.estimate_span > 0, "[estimates] half_length and span must be positive");
    check(c.modulation_decay > 0.5, "[estimates] modulation_decay must exceed 1/2");
    check(!c.linear_T.empty(), "[estimates] linear_T must not be empty");
    check(c.nonlinear_T > 0, "[estimates] nonlinear_T must be positive");
    return e;
}

inline void throw_if_invalid(const std::vector<std::string>& errors) {
    if (errors.empty()) return;
    std::string msg = std::to_string(errors.size()) + " config error(s):";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
}

/// Parses INI text over the defaults. Throws ConfigError listing every problem.
inline RunConfig parse_config(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
    }
    RunConfig cfg;
    std::vector<std::string> errors;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {  // top-level key
            errors.push_back("key '" + section + "' outside any section");
            continue;
        }
        for (const auto& [name, value] : body) {
            const auto& ks = detail::keys();
            const auto it = std::find_if(ks.begin(), ks.end(),
                                         [&](const detail::Key& k) { return section == k.section && name == k.name; });
            if (it == ks.end()) {
                errors.push_back("unknown key [" + section + "] " + name);
                continue;
            }
            const std::string err = it->set(cfg, value.data());
            if (!err.empty()) errors.push_back("[" + section + "] " + name + ": " + err);
        }
    }
    for (auto& e : validate(cfg)) errors.push_back(std::move(e));
    throw_if_invalid(errors);
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& p) {
    std::string text;
    try {
        text = read_file(p);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text);
}

// ---- data profiles ----------------------------------------------------------

/// Initial datum on the configured grid.
inline Field make_data(const RunConfig& c) {
    const Grid g = c.grid();
    if (c.profile == "gaussian-bump") {
        return Field::sample(g, [&](double x) {
            const double y = (x - c.center) / c.width;
            return cx(c.amplitude * std::exp(-y * y));
        });
    }
    if (c.profile == "sech-power") {
        return Field::sample(g, [&](double x) {
            return cx(c.amplitude * std::pow(1.0 / std::cosh((x - c.center) / c.width), c.power));
        });
    }
    if (c.profile == "file") {
        std::istringstream in(read_file(c.path));
        std::vector<cx> v;
        std::string tok;
        while (in >> tok) {
            const auto x = parse_real(tok);
            if (!x) throw ConfigError("[data] " + c.path + ": bad value '" + tok + "'");
            v.emplace_back(c.amplitude * *x);
        }
        if (v.size() != static_cast<std::size_t>(g.size()))
            throw ConfigError("[data] " + c.path + ": expected " + std::to_string(g.size()) + " values, found " +
                              std::to_string(v.size()));
        return Field(g, std::move(v), Representation::physical);
    }
    throw ConfigError("[data] unknown profile '" + c.profile + "'");
}

}  // namespace gkdv
