#include "hdp/cli.hpp"

#include <chrono>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "hdp/io.hpp"
#include "hdp/validation.hpp"

namespace hdp {

namespace {

template <class Family>
void fit_family(const RunConfig& config, const HdpModel<Family>& model, std::ostream& out) {
    const auto data = parse_dataset(config.input, Family::kind);
    const auto results = run_chains(data, model, config.sampler, config.chains);
    for (std::size_t c = 0; c < results.size(); ++c) {
        const auto dir = config.output_dir / ("chain_" + std::to_string(c));
        write_results(results[c], data, model, config, c, dir);
        out << "chain " << c << ": modal K = " << results[c].trace.modal_num_dishes()
            << ", final log joint = " << results[c].trace.log_joint.back() << " -> " << dir.string() << '\n';
    }
}

int cmd_fit(const std::string& config_path, std::ostream& out) {
    const RunConfig config = load_run_config(config_path);
    if (config.input.empty()) throw InputError("config has no input dataset");
    if (config.kind() == ObsKind::Count) fit_family(config, config.gp_model(), out);
    else fit_family(config, config.ng_model(), out);
    return kExitOk;
}

int cmd_generate(const std::string& scenario, const std::string& config_path, const std::string& out_path,
                 std::ostream& out) {
    const std::filesystem::path target(out_path);
    const std::filesystem::path truth = target.string() + ".truth.json";
    if (!scenario.empty()) {
        const auto sc = fixed_scenario(scenario);
        write_dataset(sc.data, target);
        write_ground_truth(sc, truth);
        out << "scenario " << scenario << ": " << sc.data.total_size() << " observations -> " << target.string() << '\n';
        return kExitOk;
    }
    const RunConfig config = load_run_config(config_path);
    if (config.group_sizes.empty()) throw InputError("generate --config needs group_sizes");
    Rng rng = make_rng(config.sampler.rng_seed);
    if (config.kind() == ObsKind::Count) {
        const auto sample = forward_sample(config.gp_model(), config.group_sizes, rng);
        write_dataset(sample.data, target);
        write_ground_truth(sample, truth);
        out << "forward sample: " << sample.seating.num_dishes << " dishes -> " << target.string() << '\n';
    } else {
        const auto sample = forward_sample(config.ng_model(), config.group_sizes, rng);
        write_dataset(sample.data, target);
        write_ground_truth(sample, truth);
        out << "forward sample: " << sample.seating.num_dishes << " dishes -> " << target.string() << '\n';
    }
    return kExitOk;
}

int cmd_validate(const std::string& grid_name, std::ostream& out) {
    const Grid grid = grid_name == "full" ? Grid::Full : Grid::Quick;
    const auto start = std::chrono::steady_clock::now();
    const auto report = run_validation(grid);
    report.print(out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << report.size() - report.failures() << "/" << report.size() << " checks passed (" << grid_name << " grid, "
        << secs << " s)\n";
    return report.all_passed() ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hierarchical Dirichlet process mixtures with conjugate Gamma-Poisson and Normal-Gamma families"};
    app.require_subcommand(1);

    std::string fit_config;
    auto* fit = app.add_subcommand("fit", "Run Gibbs chains on a dataset");
    fit->add_option("--config", fit_config, "Run configuration (JSON)")->required();

    std::string scenario, gen_config, gen_out;
    auto* generate = app.add_subcommand("generate", "Write a synthetic dataset and its ground truth");
    auto* scenario_opt = generate->add_option("--scenario", scenario, "Canned scenario name")
                             ->check(CLI::IsMember(scenario_names()));
    auto* config_opt = generate->add_option("--config", gen_config, "Forward-sample from this configuration");
    scenario_opt->excludes(config_opt);
    generate->add_option("--out", gen_out, "Output dataset path (JSON lines)")->required();

    std::string grid = "quick";
    auto* validate = app.add_subcommand("validate", "Run the closed-form verification suite");
    validate->add_option("--grid", grid, "Validation grid")->check(CLI::IsMember({"quick", "full"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_config, out);
        if (generate->parsed()) {
            if (scenario.empty() && gen_config.empty()) {
                err << "generate needs --scenario or --config\n";
                return kExitUsage;
            }
            return cmd_generate(scenario, gen_config, gen_out, out);
        }
        return cmd_validate(grid, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace hdp
