#pragma once

#include "nmm/rmtr.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nmm {

enum class ProblemKind { quadratic, nonconvex1d, resnet_blobs, resnet_smiley, resnet_spiral };

const char* to_string(ProblemKind kind);
bool is_resnet(ProblemKind kind);

/// One coarse-model variant to compare. `name` is the canonical spelling used
/// in file names and the summary table, e.g. "mix-bayes(inf)".
struct Variant {
    std::string name;
    ModelKind kind = ModelKind::additive;
    WeightStrategy weights;
    bool single_level = false;
};

/// Parses add | mult | mix-fixed(w) | mix-mfv | mix-bayes(d) | mix-bayes(inf) | single.
/// Throws ConfigError naming the allowed spellings.
Variant parse_variant(const std::string& text);

struct ExperimentConfig {
    ProblemKind problem = ProblemKind::quadratic;
    int levels = 3;
    Index n_coarse = 15;
    std::vector<Variant> variants;
    std::vector<std::uint64_t> seeds;

    // resnet problems
    Index width = 8;
    Index samples = 256;
    Index coarse_blocks = 3;
    std::uint64_t data_seed = 0;
    double init_scale = 1.0;

    // grid problems: initial iterate entries ~ N(0, init_amplitude^2)
    double init_amplitude = 1.0;

    VCycleConfig solver;
    std::filesystem::path output_dir = "nmm_out";

    /// Resolved settings as key=value pairs, in a fixed order.
    std::vector<std::pair<std::string, std::string>> echo() const;
    void validate() const;
};

/// Strict key=value parsing with `#` comments. `origin` labels error messages.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "config");
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Fresh hierarchy (with zeroed counters) for one run.
ProblemHierarchy build_problem(const ExperimentConfig& cfg);

/// Seed-derived initial iterate on the finest level.
Vector initial_point(const ExperimentConfig& cfg, const ProblemHierarchy& hier, std::uint64_t seed);

struct RunResult {
    std::string variant;
    std::uint64_t seed = 0;
    RunReport report;
    bool censored = false;
};

struct SummaryRow {
    std::string variant;
    std::string problem;
    int runs = 0;
    int censored = 0;
    double mean_cost = 0.0;
    /// Population standard deviation of the cost in percent of the mean.
    double spread_pct = 0.0;
};

struct SummaryTable {
    std::vector<SummaryRow> rows;
};

/// One minimize run for (variant, seed).
RunResult run_single(const ExperimentConfig& cfg, const Variant& variant, std::uint64_t seed);

SummaryTable summarize(const ExperimentConfig& cfg, const std::vector<RunResult>& runs);

/// Runs every (variant, seed) pair and writes
///   <out>/<variant>_<seed>.csv, <out>/runs.csv, <out>/summary.csv.
/// Progress lines go to `log` when given.
SummaryTable run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

void write_run_csv(const RunReport& report, std::size_t levels, bool single_level,
                   const std::filesystem::path& path);
void write_summary_csv(const ExperimentConfig& cfg, const SummaryTable& table,
                       const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

} // namespace nmm
