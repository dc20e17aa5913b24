// gkdv_lab: command-line driver for the randomized-data gKdV experiments.
//
//   gkdv_lab <command> [--config PATH] [--seed INT] [--out DIR] [--threads INT]
//
// Exit status: 0 ok, 2 config error, 3 numerical blowup, 4 precondition
// violation in an estimate probe or norm, 1 anything else.

#include <CLI11.hpp>

#include <iostream>

#include "gkdv/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Pseudospectral lab for u_t + u_xxx + u^7 u_x = 0 with Wiener-randomized data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(gkdv::version));

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = 1;
    bool print_config = false;
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides [random] seed)");
    app.add_option("--config", config_path, "INI config file (defaults are used when omitted)");
    app.add_option("--out", out_dir, "output directory (overrides [run] out)");
    app.add_option("--threads", threads, "worker threads; affects speed only")->check(CLI::Range(1, 4096));
    app.add_flag("--print-config", print_config, "print the resolved config and exit");

    for (const auto& name : gkdv::command_names()) app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        gkdv::RunConfig cfg = config_path.empty() ? gkdv::RunConfig{} : gkdv::load_config(config_path);
        if (config_path.empty()) gkdv::throw_if_invalid(gkdv::validate(cfg));
        if (*seed_opt) cfg.seed = seed;
        if (!out_dir.empty()) cfg.out = out_dir;
        if (print_config) {
            std::cout << cfg.echo();
            return 0;
        }
        const std::string command = app.get_subcommands().front()->get_name();
        gkdv::OutputDir out(cfg.out);
        gkdv::run_command(command, cfg, out, threads);
        for (const auto& f : out.files()) std::cout << (out.root() / f).string() << '\n';
        std::cout << (out.root() / "MANIFEST").string() << '\n';
        return 0;
    } catch (const gkdv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const gkdv::BlowupError& e) {
        std::cerr << "blowup: " << e.what() << '\n';
        return 3;
    } catch (const gkdv::PreconditionError& e) {
        std::cerr << "precondition violated: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
