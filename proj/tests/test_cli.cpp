#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <numbers>

#include "gkdv/gkdv.hpp"

using namespace gkdv;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("gkdv_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    return p;
}

RunConfig tiny() {
    RunConfig c;
    c.half_length = 4.0 * pi;
    c.n_modes = 64;
    c.final_time = 0.01;
    c.dt = 1e-3;
    c.stride = 5;
    return c;
}

int lab(const std::string& args) {
    const int st = std::system((std::string(GKDV_LAB) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

}  // namespace

TEST(ParseReal, Forms) {
    EXPECT_DOUBLE_EQ(*parse_real("0.25"), 0.25);
    EXPECT_DOUBLE_EQ(*parse_real("1/16"), 0.0625);
    EXPECT_DOUBLE_EQ(*parse_real("8pi"), 8.0 * pi);
    EXPECT_DOUBLE_EQ(*parse_real("pi/4"), pi / 4.0);
    EXPECT_DOUBLE_EQ(*parse_real(" 2 * pi "), 2.0 * pi);
    EXPECT_DOUBLE_EQ(*parse_real("1e-4"), 1e-4);
    EXPECT_FALSE(parse_real("abc"));
    EXPECT_FALSE(parse_real("1/0"));
    EXPECT_FALSE(parse_real(""));
}

TEST(Config, DefaultsAreValidAndDerived) {
    const RunConfig c;
    EXPECT_TRUE(validate(c).empty());
    EXPECT_DOUBLE_EQ(c.sigma(), 3.0 / 14.0 + 0.1);
    EXPECT_DOUBLE_EQ(c.b(), 0.5 + 0.05 / 24.0);
    EXPECT_DOUBLE_EQ(c.c(), 0.5 + 0.05 / 100.0);
    EXPECT_DOUBLE_EQ(c.s(), 17.0 / 112.0 + 0.05);
}

TEST(Config, EchoRoundTrips) {
    RunConfig c = parse_config("[model]\nepsilon = 0.1\n[lwp]\nT = 1/2, 1/4\n[data]\nprofile = sech-power\n");
    EXPECT_DOUBLE_EQ(c.epsilon, 0.1);
    EXPECT_EQ(c.lwp_T, (std::vector<double>{0.5, 0.25}));
    const RunConfig d = parse_config(c.echo());
    EXPECT_EQ(d.echo(), c.echo());
}

TEST(Config, AllErrorsReportedTogether) {
    try {
        parse_config("[grid]\nn_modes = 7\nhalf_lenght = 3\n[model]\nepsilon = 0.3\n[typo]\nx = 1\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string m = e.what();
        EXPECT_NE(m.find("4 config error(s)"), std::string::npos) << m;
        EXPECT_NE(m.find("unknown key [grid] half_lenght"), std::string::npos);
        EXPECT_NE(m.find("unknown key [typo] x"), std::string::npos);
        EXPECT_NE(m.find("n_modes"), std::string::npos);
        EXPECT_NE(m.find("epsilon"), std::string::npos);
    }
}

TEST(Config, DerivedOverrideNeedsFlag) {
    EXPECT_THROW(parse_config("[model]\nb = 0.6\n"), ConfigError);
    const RunConfig c = parse_config("[model]\nallow_override = true\nb = 0.6\n");
    EXPECT_DOUBLE_EQ(c.b(), 0.6);
    EXPECT_DOUBLE_EQ(c.sigma(), 3.0 / 14.0 + 0.1);
}

TEST(Config, EpsilonBounds) {
    EXPECT_THROW(parse_config("[model]\nepsilon = 0\n"), ConfigError);
    EXPECT_NO_THROW(parse_config("[model]\nepsilon = 0.2\n"));
    EXPECT_THROW(parse_config("[model]\nepsilon = 0.21\n"), ConfigError);
}

TEST(Config, BadValuesAndIds) {
    EXPECT_THROW(parse_config("[random]\ndistribution = cauchy\n"), ConfigError);
    EXPECT_THROW(parse_config("[time]\ndt = fast\n"), ConfigError);
    EXPECT_THROW(parse_config("[time]\nfinal = 1\ndt = 0.3\n"), ConfigError);
    EXPECT_THROW(parse_config("[lwp]\nT = 1/8, 1/4\n"), ConfigError);
    try {
        parse_config("[estimates]\nids = eq2.014, lemma9.9\n");
        FAIL();
    } catch (const ConfigError& e) {
        const std::string m = e.what();
        EXPECT_NE(m.find("lemma9.9"), std::string::npos);
        EXPECT_NE(m.find("lemma3.10"), std::string::npos);  // valid ids are listed
    }
}

TEST(Config, ShippedPresetsParse) {
    for (const char* name : {"smooth.ini", "small.ini", "moderate.ini", "strichartz.ini", "estimates.ini"})
        EXPECT_NO_THROW(load_config(fs::path(GKDV_CONFIG_DIR) / name)) << name;
    EXPECT_THROW(load_config("/nonexistent/x.ini"), ConfigError);
}

TEST(Data, Profiles) {
    RunConfig c = tiny();
    c.amplitude = 2.0;
    c.width = 0.5;
    const Field g = make_data(c);
    EXPECT_NEAR(g[32].real(), 2.0, 1e-15);  // x = 0
    EXPECT_NEAR(g[40].real(), 2.0 * std::exp(-std::pow(c.grid().x(40) / 0.5, 2)), 1e-13);
    c.profile = "sech-power";
    c.power = 2.0;
    const Field s = make_data(c);
    EXPECT_NEAR(s[40].real(), 2.0 / std::pow(std::cosh(c.grid().x(40) / 0.5), 2), 1e-13);

    const fs::path dir = scratch("data");
    fs::create_directories(dir);
    std::string text;
    for (int j = 0; j < 64; ++j) text += std::to_string(j) + (j % 8 == 7 ? "\n" : " ");
    std::ofstream(dir / "u.txt") << text;
    c.profile = "file";
    c.path = (dir / "u.txt").string();
    c.amplitude = 1.0;
    EXPECT_DOUBLE_EQ(make_data(c)[10].real(), 10.0);
    std::ofstream(dir / "short.txt") << "1 2 3";
    c.path = (dir / "short.txt").string();
    EXPECT_THROW(make_data(c), ConfigError);
}

TEST(Io, Sha256KnownVector) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(fmt17(0.1), "0.10000000000000001");
}

TEST(Randomize, OnesReproducesInputAndWritesArtifacts) {
    RunConfig c = tiny();
    c.distribution = Distribution::ones;
    OutputDir out(scratch("rz"));
    cmd_randomize(c, out);
    EXPECT_EQ(out.files(), (std::vector<std::string>{"phi.csv", "sample_000.csv", "sample_001.csv", "sample_002.csv",
                                                     "norms.csv"}));
    // The all-ones sample equals phi up to the last printed digit or two.
    const auto phi = lines(read_file(out.root() / "phi.csv"));
    const auto s0 = lines(read_file(out.root() / "sample_000.csv"));
    ASSERT_EQ(phi.size(), s0.size());
    for (std::size_t i = 1; i < phi.size(); ++i) {
        double a[3], b[3];
        std::sscanf(phi[i].c_str(), "%lf,%lf,%lf", a, a + 1, a + 2);
        std::sscanf(s0[i].c_str(), "%lf,%lf,%lf", b, b + 1, b + 2);
        EXPECT_NEAR(a[1], b[1], 1e-13);
        EXPECT_NEAR(b[2], 0.0, 1e-13);
    }
    const auto manifest = read_file(out.root() / "MANIFEST");
    EXPECT_NE(manifest.find("norms.csv"), std::string::npos);
    EXPECT_NE(manifest.find(sha256_hex(read_file(out.root() / "norms.csv"))), std::string::npos);
    EXPECT_NE(manifest.find("[config]"), std::string::npos);
}

TEST(Randomize, FixedSeedIsByteIdentical) {
    const RunConfig c = tiny();
    OutputDir a(scratch("ra")), b(scratch("rb"));
    cmd_randomize(c, a);
    cmd_randomize(c, b);
    EXPECT_EQ(read_file(a.root() / "MANIFEST"), read_file(b.root() / "MANIFEST"));
    for (const auto& f : a.files()) EXPECT_EQ(read_file(a.root() / f), read_file(b.root() / f)) << f;
}

TEST(Simulate, ZeroDataGivesZeroTrajectory) {
    RunConfig c = tiny();
    c.amplitude = 0.0;
    OutputDir out(scratch("zero"));
    cmd_simulate(c, out);
    const auto diag = lines(read_file(out.root() / "diagnostics.csv"));
    EXPECT_EQ(diag.front(), "step,time,mean,mass,energy");
    for (std::size_t i = 1; i < diag.size(); ++i) EXPECT_NE(diag[i].find(",0,0,0"), std::string::npos) << diag[i];

    const std::string bin = read_file(out.root() / "trajectory.bin");
    const auto pos = bin.find("end_header\n");
    ASSERT_NE(pos, std::string::npos);
    EXPECT_NE(bin.find("rows 3\n"), std::string::npos);  // t = 0, 0.005, 0.01
    const std::string body = bin.substr(pos + 11);
    ASSERT_EQ(body.size(), 3u * 65u * 8u);
    double v = 1.0;
    std::memcpy(&v, body.data() + 65 * 8, 8);  // second row, time column
    EXPECT_NEAR(v, 0.005, 1e-15);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t j = 1; j < 65; ++j) {
            std::memcpy(&v, body.data() + (r * 65 + j) * 8, 8);
            EXPECT_EQ(v, 0.0);
        }
}

TEST(Simulate, BlowupThrowsAfterWritingTruncatedTrajectory) {
    RunConfig c = tiny();
    c.amplitude = 50.0;
    c.width = 0.5;
    c.final_time = 1.0;
    OutputDir out(scratch("blow"));
    EXPECT_THROW(cmd_simulate(c, out), BlowupError);
    const auto manifest = read_file(out.root() / "MANIFEST");
    EXPECT_NE(manifest.find("status blowup at step"), std::string::npos);
    const auto diag = lines(read_file(out.root() / "diagnostics.csv"));
    EXPECT_LT(diag.size(), 1001u);
    EXPECT_NE(read_file(out.root() / "trajectory.bin").find("blown_up 1"), std::string::npos);
}

TEST(VerifyEstimates, WritesReportForEmbeddingProbe) {
    RunConfig c = tiny();
    c.estimate_ids_ = {"eq2.014"};
    c.trials = 5;
    c.estimate_modes = 32;
    c.estimate_times = 64;
    OutputDir out(scratch("est"));
    cmd_verify_estimates(c, out, 2);
    const auto rows = lines(read_file(out.root() / "estimates.csv"));
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], "estimate_id,trial,lhs,rhs,ratio");
    EXPECT_EQ(rows[1].rfind("eq2.014,0,", 0), 0u);
}

TEST(LwpEnsemble, FailureFractionPerT) {
    RunConfig c = tiny();
    c.half_length = pi;
    c.n_modes = 16;
    c.amplitude = 0.3;
    c.span = 1.0;
    c.time_samples = 256;
    c.xsb_band = 5.0;
    c.lwp_samples = 100;
    OutputDir out(scratch("lwp"));
    cmd_lwp_ensemble(c, out, 2);
    const auto rows = lines(read_file(out.root() / "failures.csv"));
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0], "T,failures,samples,fraction,ci_lo,ci_hi");
    EXPECT_EQ(rows[1].rfind("0.25,", 0), 0u);
    EXPECT_EQ(rows[4].rfind("0.03125,", 0), 0u);
    EXPECT_EQ(lines(read_file(out.root() / "lwp_records.csv")).size(), 401u);
}

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch("exit");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.ini") << "[grid]\nn_mode = 64\n";
    std::ofstream(dir / "blow.ini") << "[grid]\nhalf_length = 4pi\nn_modes = 64\n[time]\nfinal = 1\ndt = 1e-3\n"
                                       "[data]\namplitude = 50\nwidth = 0.5\n";
    std::ofstream(dir / "pre.ini") << "[grid]\nhalf_length = 4pi\nn_modes = 64\n[time]\nsamples = 64\n"
                                      "[lwp]\nT = 1/8\nsamples = 100\n";
    std::ofstream(dir / "ok.ini") << "[grid]\nhalf_length = 4pi\nn_modes = 64\n[randomize]\nsamples = 1\n";
    EXPECT_EQ(lab("randomize --config " + (dir / "ok.ini").string() + " --out " + (dir / "o").string()), 0);
    EXPECT_EQ(lab("randomize --config " + (dir / "bad.ini").string() + " --out " + (dir / "b").string()), 2);
    EXPECT_EQ(lab("simulate --config " + (dir / "blow.ini").string() + " --out " + (dir / "s").string()), 3);
    EXPECT_EQ(lab("lwp-ensemble --config " + (dir / "pre.ini").string() + " --out " + (dir / "p").string()), 4);
    EXPECT_EQ(lab("no-such-command"), 2);
    EXPECT_EQ(lab("randomize --threads 0"), 2);
}

TEST(Cli, SeedFlagOverridesConfig) {
    const fs::path dir = scratch("seed");
    fs::create_directories(dir);
    std::ofstream(dir / "c.ini") << "[grid]\nhalf_length = 4pi\nn_modes = 64\n[random]\nseed = 3\n[randomize]\nsamples = 1\n";
    const std::string cfg = " --config " + (dir / "c.ini").string();
    ASSERT_EQ(lab("randomize" + cfg + " --out " + (dir / "a").string()), 0);
    ASSERT_EQ(lab("randomize" + cfg + " --seed 3 --out " + (dir / "b").string() + " --threads 4"), 0);
    ASSERT_EQ(lab("randomize" + cfg + " --seed 4 --out " + (dir / "c").string()), 0);
    EXPECT_EQ(read_file(dir / "a/MANIFEST"), read_file(dir / "b/MANIFEST"));
    EXPECT_NE(read_file(dir / "a/sample_000.csv"), read_file(dir / "c/sample_000.csv"));
}
