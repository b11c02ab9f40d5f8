#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "plap/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"plapctl: quasiradial p-harmonic construction, checks and strip solver"};
    std::string command, config_path, out_dir;
    std::uint64_t seed = 1;
    app.add_option("command", command, "profile | coeffs | verify | solve | report-all")->required();
    app.add_option("--config", config_path, "JSON run configuration (default: p=4, N=3)");
    app.add_option("--out", out_dir, "output directory, overrides output_dir");
    app.add_option("--seed", seed, "seed for random spot-check points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        bool known = false;
        for (const auto& c : plap::commands()) known = known || c == command;
        if (!known) throw plap::UsageError("unknown command '" + command + "'");
        auto cfg = config_path.empty() ? plap::parse_config_text(R"({"p": 4, "N": 3})")
                                       : plap::parse_config_file(config_path);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        plap::Pipeline pipeline(std::move(cfg), seed, std::cout);
        return pipeline.run(command);
    } catch (const plap::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
