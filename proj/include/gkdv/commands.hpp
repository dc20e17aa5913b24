#pragma once
// Subcommand bodies. Each writes its artifacts plus MANIFEST into `out` and
// returns normally, except simulate, which throws BlowupError after writing
// the truncated trajectory.

#include <string>
#include <vector>

#include "gkdv/config.hpp"
#include "gkdv/estimates.hpp"
#include "gkdv/io.hpp"
#include "gkdv/montecarlo.hpp"
#include "gkdv/solver.hpp"

namespace gkdv {

/// Data fed to the randomization: the configured profile without the modes
/// that the unit-band partition on this grid cannot reach.
inline Field randomizable_data(const RunConfig& c) { return restrict_to_randomizable(make_data(c)); }

inline EnsembleConfig ensemble_config(const RunConfig& c, long n, int threads) {
    return {c.distribution, c.seed, n, threads};
}

inline void cmd_randomize(const RunConfig& c, OutputDir& out) {
    const Field phi = randomizable_data(c);
    out.write("phi.csv", field_csv(phi));
    std::string norms = "field,seed,hs_norm,l2_norm\n";
    norms += detail::csv_row(std::string("phi"), 0L, sobolev_norm(phi, c.s()), l2_norm(phi));
    for (long i = 0; i < c.randomize_samples; ++i) {
        const Field w = randomized_sample(phi, c.distribution, c.seed, i);
        char name[32];
        std::snprintf(name, sizeof name, "sample_%03ld", i);
        out.write(std::string(name) + ".csv", field_csv(w));
        norms += detail::csv_row(std::string(name), sample_seed(c.seed, i), sobolev_norm(w, c.s()), l2_norm(w));
    }
    out.write("norms.csv", norms);
    out.finish("randomize", c.echo());
}

/// Max over steps of |Q(t) - Q(0)|, absolute and relative to |Q(0)|.
inline std::string conservation_csv(const Trajectory& tr, const Invariants& q0) {
    double dm = 0, dM = 0, dE = 0;
    for (const auto& d : tr.diagnostics) {
        dm = std::max(dm, std::abs(d.invariants.mean - q0.mean));
        dM = std::max(dM, std::abs(d.invariants.mass - q0.mass));
        dE = std::max(dE, std::abs(d.invariants.energy - q0.energy));
    }
    auto rel = [](double d, double q) { return q != 0.0 ? d / std::abs(q) : d; };
    std::string s = "quantity,initial,max_abs_drift,max_rel_drift\n";
    s += detail::csv_row(std::string("mean"), q0.mean, dm, rel(dm, q0.mean));
    s += detail::csv_row(std::string("mass"), q0.mass, dM, rel(dM, q0.mass));
    s += detail::csv_row(std::string("energy"), q0.energy, dE, rel(dE, q0.energy));
    return s;
}

inline void cmd_simulate(const RunConfig& c, OutputDir& out) {
    const Field phi = make_data(c);
    const Invariants q0 = conserved_quantities(phi, c.pad);
    const Trajectory tr = evolve_reference(phi, c.final_time, c.dt, c.stride, c.pad, c.blowup_threshold);
    out.write("trajectory.bin", trajectory_bytes(tr, c.seed));
    out.write("diagnostics.csv", diagnostics_csv(tr));
    out.write("conservation.csv", conservation_csv(tr, q0));
    if (tr.blown_up) {
        out.finish("simulate", c.echo(), "blowup at step " + std::to_string(tr.blowup_step));
        throw BlowupError("simulate: blowup at step " + std::to_string(tr.blowup_step), tr.blowup_step);
    }
    out.finish("simulate", c.echo());
}

/// Sub-Gaussian tail of ||phi^omega||_{H^s} and the T-scaling of the L^q_T L^r_x tail.
inline void cmd_strichartz_tail(const RunConfig& c, OutputDir& out, int threads) {
    const Field phi = randomizable_data(c);
    const EnsembleConfig ec = ensemble_config(c, c.strichartz_samples, threads);
    ObservableSpec spec;
    spec.s = c.s();
    auto recs = run_ensemble(phi, ec, spec);

    StrichartzOptions opt;
    opt.q = c.q;
    opt.r = c.r;
    opt.Ts = c.strichartz_T;
    opt.time_samples = c.strichartz_time_samples;
    opt.dispersion = c.dispersion;
    opt.p_lo = c.p_lo;
    opt.p_hi = c.p_hi;
    opt.grid_points = c.grid_points;
    const StrichartzReport rep = strichartz_scaling(phi, ec, opt);
    for (std::size_t i = 0; i < recs.size(); ++i)
        for (std::size_t k = 0; k < opt.Ts.size(); ++k)
            recs[i].observables["strichartz_T" + fmt17(opt.Ts[k])] = rep.norms[i][k];

    const TailFit hs = tail_fit_quantiles(column(recs, "hs_norm"), c.p_lo, c.p_hi, c.grid_points);
    out.write("ensemble.csv", ensemble_csv(recs));
    out.write("hs_tail.csv", tail_csv(hs));
    out.write("hs_tail_fit.csv", tail_fit_csv(hs));
    out.write("strichartz_scale.csv", scale_csv(rep));
    out.write("strichartz_exponent.csv", exponent_csv(rep));
    out.finish("strichartz-tail", c.echo());
}

inline void cmd_lwp_ensemble(const RunConfig& c, OutputDir& out, int threads) {
    const Field phi = randomizable_data(c);
    const ExceptionalReport rep =
        exceptional_probability(phi, c.lwp_T, ensemble_config(c, c.lwp_samples, threads), c.picard_options());
    out.write("failures.csv", failures_csv(rep));
    out.write("lwp_records.csv", lwp_records_csv(rep));
    out.write("trend.csv", "nonincreasing,kendall_tau\n" +
                               detail::csv_row(static_cast<long>(rep.nonincreasing), rep.kendall_tau));
    out.finish("lwp-ensemble", c.echo());
}

inline void cmd_verify_estimates(const RunConfig& c, OutputDir& out, int threads) {
    const auto ids = c.selected_estimates();
    const EstimateConfig base = c.estimate_config(threads);
    std::vector<EstimateReport> reps;
    for (const auto& id : ids) reps.push_back(run_estimate(id, base));
    out.write("estimates.csv", estimate_csv(reps));
    out.write("summary.csv", estimate_summary_csv(reps));
    if (c.doubled) {
        EstimateConfig fine = base;
        fine.n_modes *= 2;
        fine.n_times *= 2;
        std::vector<EstimateReport> reps2;
        for (const auto& id : ids) reps2.push_back(run_estimate(id, fine));
        out.write("estimates_doubled.csv", estimate_csv(reps2));
        out.write("summary_doubled.csv", estimate_summary_csv(reps2));
        std::string st = "estimate_id,max_ratio,max_ratio_doubled,change\n";
        for (std::size_t k = 0; k < reps.size(); ++k) {
            const double a = reps[k].max_ratio(), b = reps2[k].max_ratio();
            st += detail::csv_row(reps[k].id, a, b, a > 0 ? b / a : 0.0);
        }
        out.write("stability.csv", st);
    }
    out.finish("verify-estimates", c.echo());
}

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> n = {"randomize", "simulate", "strichartz-tail", "lwp-ensemble",
                                               "verify-estimates"};
    return n;
}

inline void run_command(const std::string& name, const RunConfig& c, OutputDir& out, int threads) {
    if (name == "randomize") return cmd_randomize(c, out);
    if (name == "simulate") return cmd_simulate(c, out);
    if (name == "strichartz-tail") return cmd_strichartz_tail(c, out, threads);
    if (name == "lwp-ensemble") return cmd_lwp_ensemble(c, out, threads);
    if (name == "verify-estimates") return cmd_verify_estimates(c, out, threads);
    throw ConfigError("unknown command '" + name + "'");
}

}  // namespace gkdv
