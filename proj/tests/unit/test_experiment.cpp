#include "nmm/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace nmm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nmm_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string quick_config(const fs::path& out, const std::string& extra) {
    return "problem=quadratic\nn_coarse=7\nlevels=3\nmax_cycles=40\noutput=" + out.string() +
           "\n" + extra;
}

std::string error_of(const std::string& text) {
    try {
        parse_config_text(text, "test.cfg");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(ParseConfig, MinimalFileGetsDefaults) {
    const ExperimentConfig c = parse_config_text("problem=quadratic\n");
    EXPECT_EQ(c.levels, 3);
    ASSERT_EQ(c.variants.size(), 1u);
    EXPECT_EQ(c.variants[0].name, "add");
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1}));
    EXPECT_EQ(c.solver.mu_pre, 2);
    EXPECT_FALSE(c.solver.target_value.has_value());

    const ExperimentConfig r = parse_config_text("problem=resnet-spiral # trailing comment\n");
    EXPECT_EQ(r.levels, 4);
    ASSERT_TRUE(r.solver.target_value.has_value());
}

TEST(ParseConfig, ListsAndVariants) {
    const ExperimentConfig c = parse_config_text(
        "# comment\nproblem = nonconvex1d\nseeds=1,2,3\n"
        "model=add, mult ,mix-fixed(0.25),mix-mfv,mix-bayes(3),mix-bayes(inf),single\n");
    EXPECT_EQ(c.seeds.size(), 3u);
    ASSERT_EQ(c.variants.size(), 7u);
    EXPECT_EQ(c.variants[2].name, "mix-fixed(0.25)");
    EXPECT_EQ(c.variants[2].weights.kind, WeightStrategy::Kind::fixed);
    EXPECT_DOUBLE_EQ(c.variants[2].weights.fixed_w_add, 0.25);
    EXPECT_EQ(c.variants[4].weights.capacity, 3u);
    EXPECT_EQ(c.variants[5].weights.capacity, 0u);
    EXPECT_TRUE(c.variants[6].single_level);
}

TEST(ParseConfig, Errors) {
    const std::string bad_model = error_of("problem=quadratic\nmodel=frobnicate\n");
    EXPECT_NE(bad_model.find("'model'"), std::string::npos);
    EXPECT_NE(bad_model.find("mix-bayes(d)"), std::string::npos);
    EXPECT_NE(bad_model.find("test.cfg:2"), std::string::npos);

    EXPECT_NE(error_of("levels=3\n").find("missing mandatory key 'problem'"), std::string::npos);
    EXPECT_NE(error_of("problem=quadratic\ncolour=blue\n").find("unknown key 'colour'"),
              std::string::npos);
    EXPECT_NE(error_of("problem=quadratic\nlevels=three\n").find("malformed"), std::string::npos);
    EXPECT_NE(error_of("problem=cubic\n").find("allowed"), std::string::npos);
    EXPECT_FALSE(error_of("problem=quadratic\nmodel=mix-fixed(1.5)\n").empty());
    EXPECT_FALSE(error_of("problem=quadratic\nmodel=mix-bayes(0)\n").empty());
    EXPECT_FALSE(error_of("problem=quadratic\nmodel=add,add\n").empty());
    EXPECT_FALSE(error_of("problem=quadratic\nlevels=1\n").empty());
    EXPECT_FALSE(error_of("problem=quadratic\nproblem=quadratic\n").empty());
    EXPECT_FALSE(error_of("problem=quadratic\njust words\n").empty());
    EXPECT_FALSE(error_of("problem=quadratic\neta1=0.9\neta2=0.5\n").empty());
    EXPECT_FALSE(error_of("problem=quadratic\nseeds=-1\n").empty());
    EXPECT_THROW(parse_config("/nonexistent/nmm.cfg"), ConfigError);
}

TEST(RunExperiment, SingleRunSummary) {
    const fs::path out = scratch("single");
    const ExperimentConfig c = parse_config_text(quick_config(out, ""));
    const SummaryTable t = run_experiment(c);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0].runs, 1);
    EXPECT_EQ(t.rows[0].spread_pct, 0.0);
    EXPECT_GT(t.rows[0].mean_cost, 0.0);
    EXPECT_TRUE(fs::exists(out / "add_1.csv"));
    const std::string summary = slurp(out / "summary.csv");
    EXPECT_NE(summary.find("# problem=quadratic"), std::string::npos);
    EXPECT_NE(summary.find("# mu_coarse=20"), std::string::npos);
    EXPECT_NE(summary.find("variant,problem,runs,censored,mean_cost,spread_pct"), std::string::npos);
    fs::remove_all(out);
}

TEST(RunExperiment, RepeatedSeedsHaveNoSpread) {
    const fs::path out = scratch("repeat");
    const SummaryTable t =
        run_experiment(parse_config_text(quick_config(out, "seeds=7,7,7\n")));
    EXPECT_EQ(t.rows[0].runs, 3);
    EXPECT_EQ(t.rows[0].spread_pct, 0.0);
    fs::remove_all(out);
}

TEST(RunExperiment, FileCountsAndMeans) {
    const fs::path out = scratch("count");
    const ExperimentConfig c =
        parse_config_text(quick_config(out, "model=add,mix-mfv\nseeds=1,2,3,4,5\n"));
    const SummaryTable t = run_experiment(c);
    int csvs = 0;
    for (const auto& e : fs::directory_iterator(out)) {
        const std::string n = e.path().filename().string();
        csvs += n != "summary.csv" && n != "runs.csv" ? 1 : 0;
    }
    EXPECT_EQ(csvs, 10);
    ASSERT_EQ(t.rows.size(), 2u);

    // Means are recomputable from the last row of each run file.
    for (const SummaryRow& row : t.rows) {
        double sum = 0.0;
        for (int seed = 1; seed <= 5; ++seed) {
            std::ifstream in(out / (row.variant + "_" + std::to_string(seed) + ".csv"));
            std::string line;
            std::string last;
            while (std::getline(in, line)) {
                last = line;
            }
            std::stringstream ss(last);
            std::string cell;
            for (int col = 0; col < 4; ++col) {
                std::getline(ss, cell, ',');
            }
            sum += std::stod(cell);
        }
        EXPECT_NEAR(row.mean_cost, sum / 5.0, 1e-9 * row.mean_cost);
    }
    const std::string header = slurp(out / "mix-mfv_1.csv").substr(0, 80);
    EXPECT_EQ(header.rfind("cycle,f_value,grad_norm,work_units,accepted_coarse_steps,w_add_2,w_add_1\n", 0), 0u);
    fs::remove_all(out);
}

TEST(RunExperiment, CensoredRunsAreFlagged) {
    const fs::path out = scratch("censor");
    const SummaryTable t = run_experiment(parse_config_text(
        "problem=quadratic\nn_coarse=7\ngrad_tol=0\nmax_cycles=3\nmodel=single\noutput=" +
        out.string() + "\n"));
    EXPECT_EQ(t.rows[0].censored, 1);
    EXPECT_NE(slurp(out / "runs.csv").find("single,1,3,"), std::string::npos);
    fs::remove_all(out);
}

TEST(RunExperiment, ByteIdenticalReruns) {
    const fs::path out = scratch("det");
    const ExperimentConfig c =
        parse_config_text(quick_config(out, "model=add,mult,mix-bayes(2)\nseeds=3,4\n"));
    run_experiment(c);
    std::map<std::string, std::string> first;
    for (const auto& e : fs::directory_iterator(out)) {
        first[e.path().filename().string()] = slurp(e.path());
    }
    run_experiment(c);
    EXPECT_EQ(first.size(), 8u);
    for (const auto& [name, bytes] : first) {
        EXPECT_EQ(slurp(out / name), bytes) << name;
    }
    fs::remove_all(out);
}

TEST(FormatDouble, RoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) {
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
}
