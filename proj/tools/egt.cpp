// egt: command-line front end.
//
//   egt run        --config FILE [--seed N] [--out CSV] [--topology-out FILE]
//   egt sweep      --config FILE [--out CSV] [--plot-out FILE] [--parallel N]
//   egt replicator --matrix FILE --initial x0,x1,... [--horizon T] [--step h] [--out CSV]
//   egt validate   --config FILE
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "egt/harness.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file.open(path, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
        os = &file;
    }
    void finish() {
        os->flush();
        if (!*os) throw std::runtime_error("write failed");
    }
};

void note(bool quiet, const std::string& msg) {
    if (!quiet) std::cerr << msg << '\n';
}

std::vector<double> parse_initial(const std::string& text) {
    std::vector<double> out;
    for (const auto& tok : egt::detail::split_list(text)) out.push_back(egt::detail::to_double("initial", tok));
    if (out.empty()) throw egt::ConfigError("initial: expected a comma-separated list of proportions");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agent-based evolutionary game simulations and replicator trajectories"};
    app.require_subcommand(1);

    std::string config_path, out_path, plot_path, topology_path, matrix_path, initial;
    std::uint64_t seed = 0;
    int parallel = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    double horizon = 50.0, step = egt::kDefaultReplicatorStep;
    bool quiet = false;
    app.add_flag("--quiet,-q", quiet, "Suppress progress and summary messages");

    auto* run = app.add_subcommand("run", "Run one simulation and write per-generation metrics");
    run->add_option("--config,-c", config_path, "Config file")->required()->check(CLI::ExistingFile);
    auto* seed_opt = run->add_option("--seed,-s", seed, "Run seed (default: run.seed from the config)");
    run->add_option("--out,-o", out_path, "Output CSV (default: stdout)");
    run->add_option("--topology-out", topology_path, "Write the interaction graph as an edge list");
    run->add_flag("--quiet,-q", quiet);

    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write aggregate CSV");
    sweep->add_option("--config,-c", config_path, "Sweep file (config plus a [sweep] section)")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--out,-o", out_path, "Output CSV (default: stdout)");
    sweep->add_option("--plot-out", plot_path, "Also write plot-data blocks");
    sweep->add_option("--parallel,-j", parallel, "Worker threads")->check(CLI::PositiveNumber);
    auto* sweep_seed_opt = sweep->add_option("--seed,-s", seed, "Override sweep.seed_base");
    sweep->add_flag("--quiet,-q", quiet);

    auto* repl = app.add_subcommand("replicator", "Integrate the replicator dynamic for a payoff matrix");
    repl->add_option("--matrix,-m,--config,-c", matrix_path, "Payoff matrix file, one row per line")
        ->required()
        ->check(CLI::ExistingFile);
    repl->add_option("--initial,-i", initial, "Initial proportions, comma separated")->required();
    repl->add_option("--horizon,-t", horizon, "Integration horizon");
    repl->add_option("--step", step, "Euler step");
    repl->add_option("--out,-o", out_path, "Output CSV (default: stdout)");
    repl->add_flag("--quiet,-q", quiet);

    auto* val = app.add_subcommand("validate", "Check a config or sweep file and exit");
    val->add_option("--config,-c", config_path, "Config or sweep file")->required()->check(CLI::ExistingFile);
    val->add_flag("--quiet,-q", quiet);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) {
            auto cfg = egt::load_config(config_path);
            const std::uint64_t s = *seed_opt ? seed : cfg.seed;
            egt::Simulation sim(cfg, s);
            if (!topology_path.empty()) egt::write_edge_list(sim.topology(), topology_path);
            std::vector<egt::MetricsRecord> records;
            records.reserve(static_cast<std::size_t>(cfg.generations));
            for (int g = 0; g < cfg.generations; ++g) records.push_back(sim.run_generation());
            Output out(out_path);
            egt::write_generation_csv(cfg, records, *out.os);
            out.finish();
            if (!records.empty())
                note(quiet, "final cooperation rate " + egt::format_value(records.back().cooperation_rate));
        } else if (*sweep) {
            auto spec = egt::load_sweep(config_path);
            if (*sweep_seed_opt) spec.seed_base = seed;
            egt::SweepProgress progress;
            if (!quiet)
                progress = [](std::size_t done, std::size_t total) {
                    std::fprintf(stderr, "\r%zu/%zu runs", done, total);
                    if (done == total) std::fputc('\n', stderr);
                };
            const auto result = egt::run_sweep(spec, parallel, progress);
            Output out(out_path);
            egt::write_csv(result, *out.os);
            out.finish();
            if (!plot_path.empty()) egt::emit_plot_data(result, plot_path);
        } else if (*repl) {
            std::ifstream in(matrix_path);
            if (!in) throw egt::ConfigError("cannot open matrix file '" + matrix_path + "'");
            const auto matrix = egt::read_payoff_matrix(in, matrix_path);
            std::unique_ptr<egt::MixedState> x0;
            try {
                x0 = std::make_unique<egt::MixedState>(parse_initial(initial));
            } catch (const std::invalid_argument& e) {
                throw egt::ConfigError(std::string("initial: ") + e.what());
            }
            if (x0->size() != matrix.size())
                throw egt::ConfigError("initial: " + std::to_string(x0->size()) + " proportions for a " +
                                       std::to_string(matrix.size()) + "-strategy matrix");
            if (!(horizon >= 0.0) || !(step > 0.0)) throw egt::ConfigError("horizon must be >= 0 and step > 0");
            const auto traj = egt::replicator_trajectory(*x0, matrix, horizon, step);
            Output out(out_path);
            egt::write_trajectory_csv(traj, step, horizon, *out.os);
            out.finish();
        } else if (*val) {
            std::ifstream in(config_path);
            if (!in) throw egt::ConfigError("cannot open '" + config_path + "'");
            const auto entries = egt::read_ini(in, config_path);
            bool has_sweep = false;
            for (const auto& e : entries) has_sweep = has_sweep || e.section == "sweep";
            if (has_sweep) {
                const auto spec = egt::sweep_from_entries(entries, config_path);
                note(quiet, config_path + ": ok (sweep of " + spec.parameter_path + " over " +
                                std::to_string(spec.values.size()) + " values)");
            } else {
                const auto cfg = egt::config_from_entries(entries, config_path, {});
                note(quiet, config_path + ": ok (" + egt::family_name(*cfg.family) + ")");
            }
        }
    } catch (const egt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
