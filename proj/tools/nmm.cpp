#include "nmm/checks.hpp"
#include "nmm/datasets.hpp"
#include "nmm/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

int cmd_run(const std::string& path) {
    nmm::ExperimentConfig cfg = nmm::parse_config(path);
    if (const char* out = std::getenv("NMM_OUT"); out && *out) {
        cfg.output_dir = out;
    }
    const nmm::SummaryTable table = nmm::run_experiment(cfg, &std::cerr);
    std::cout << "variant,problem,runs,censored,mean_cost,spread_pct\n";
    for (const nmm::SummaryRow& r : table.rows) {
        std::cout << r.variant << ',' << r.problem << ',' << r.runs << ',' << r.censored << ','
                  << nmm::format_double(r.mean_cost) << ',' << nmm::format_double(r.spread_pct)
                  << '\n';
    }
    std::cerr << "wrote " << (cfg.output_dir / "summary.csv").string() << '\n';
    return kExitOk;
}

int cmd_check(std::uint64_t seed) {
    bool ok = true;
    for (const nmm::CheckResult& r : nmm::run_all_checks(seed)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(44) << r.name
                  << r.detail << '\n';
        ok = ok && r.passed;
    }
    return ok ? kExitOk : kExitNumerical;
}

int cmd_gen_data(const std::string& name, nmm::Index n, std::uint64_t seed,
                 const std::string& out) {
    if (name != "blobs" && name != "spiral" && name != "smiley") {
        throw nmm::ConfigError("unknown dataset '" + name + "' (allowed: blobs, spiral, smiley)");
    }
    nmm::write_dataset_csv(nmm::generate_named(name, n, seed), out);
    std::cerr << "wrote " << n << " samples to " << out << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear multilevel minimization experiments"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config_path, "key=value config file")->required();

    std::uint64_t check_seed = 0;
    auto* check = app.add_subcommand("check", "Run the invariant and oracle suites");
    check->add_option("--seed", check_seed, "Seed for the random samples");

    std::string dataset;
    nmm::Index n_samples = 0;
    std::uint64_t data_seed = 0;
    std::string out_csv;
    auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset as CSV");
    gen->add_option("dataset", dataset, "blobs | spiral | smiley")->required();
    gen->add_option("n", n_samples, "Number of samples")->required();
    gen->add_option("seed", data_seed, "Generator seed")->required();
    gen->add_option("out", out_csv, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) {
            return cmd_run(config_path);
        }
        if (*check) {
            return cmd_check(check_seed);
        }
        return cmd_gen_data(dataset, n_samples, data_seed, out_csv);
    } catch (const nmm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const nmm::ContractViolation& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const nmm::NumericalAbort& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}
