#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pbc/commands.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out, "Output directory")->required();
    cmd->add_option("--seed", args.seed, "Override the configured seed");
}

pbc::RunConfig resolve(const CommonArgs& args) {
    auto config = pbc::load_run_config(args.config);
    if (args.seed) {
        config.seed = *args.seed;
        config.pbc.seed = *args.seed;
    }
    return config;
}

void print_synth_summary(const nlohmann::json& report) {
    std::cout << "method   k_hat  mean_misclassification\n";
    for (const auto& row : report["results"]) {
        std::printf("%-8s %5zu  %.4f\n", row["method"].get<std::string>().c_str(),
                    row["k_hat"].get<std::size_t>(), row["mean_misclassification"].get<double>());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Performance-based clustering and online ensemble prediction"};
    app.require_subcommand(1);

    CommonArgs fit_args, stream_args, bench_args;
    auto* fit = app.add_subcommand("fit", "Cluster a training set and write a model bundle");
    auto* stream = app.add_subcommand("stream", "Replay a test stream through the weighted ensemble");
    auto* bench = app.add_subcommand("synth-bench", "Seeded synthetic misclassification benchmark");
    add_common(fit, fit_args);
    add_common(stream, stream_args);
    add_common(bench, bench_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (fit->parsed()) {
            const auto report = pbc::cmd_fit(resolve(fit_args), fit_args.out);
            std::cout << "fit: " << report["iterations"] << " iterations, converged="
                      << report["converged"] << ", final_loss=" << report["final_loss"] << '\n';
        } else if (stream->parsed()) {
            const auto report = pbc::cmd_stream(resolve(stream_args), stream_args.out);
            std::cout << "stream: " << report["n_batches"] << " batches, ensemble_mse=" << report["ensemble_mse"];
            if (report.contains("baseline_mse")) std::cout << ", baseline_mse=" << report["baseline_mse"];
            std::cout << '\n';
        } else {
            print_synth_summary(pbc::cmd_synth_bench(resolve(bench_args), bench_args.out));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
