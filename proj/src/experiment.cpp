#include "nmm/experiment.hpp"

#include "nmm/datasets.hpp"
#include "nmm/problems.hpp"
#include "nmm/resnet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace nmm {

namespace {

constexpr const char* kAllowedVariants =
    "add, mult, mix-fixed(w), mix-mfv, mix-bayes(d), mix-bayes(inf), single";
constexpr const char* kAllowedProblems =
    "quadratic, nonconvex1d, resnet-blobs, resnet-smiley, resnet-spiral";

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    // Commas inside parentheses belong to the item.
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
        }
        if (c == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
    throw ConfigError("malformed value for '" + key + "': '" + value + "' (expected " + want + ")");
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
        bad_value(key, v, "a finite number");
    }
    return out;
}

long long parse_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        bad_value(key, v, "an integer");
    }
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        bad_value(key, v, "a non-negative integer");
    }
    return out;
}

ProblemKind parse_problem(const std::string& v) {
    static const std::map<std::string, ProblemKind> names = {
        {"quadratic", ProblemKind::quadratic},
        {"nonconvex1d", ProblemKind::nonconvex1d},
        {"resnet-blobs", ProblemKind::resnet_blobs},
        {"resnet-smiley", ProblemKind::resnet_smiley},
        {"resnet-spiral", ProblemKind::resnet_spiral},
    };
    const auto it = names.find(v);
    if (it == names.end()) {
        throw ConfigError("unknown value for 'problem': '" + v + "' (allowed: " +
                          kAllowedProblems + ")");
    }
    return it->second;
}

std::string variant_argument(const std::string& text, const std::string& prefix) {
    if (text.size() <= prefix.size() + 1 || text.back() != ')') {
        throw ConfigError("unknown value for 'model': '" + text + "' (allowed: " +
                          kAllowedVariants + ")");
    }
    return trim(text.substr(prefix.size(), text.size() - prefix.size() - 1));
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
    std::string s;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        s += (i ? "," : "") + std::to_string(seeds[i]);
    }
    return s;
}

std::string dataset_name(ProblemKind p) {
    switch (p) {
    case ProblemKind::resnet_blobs:
        return "blobs";
    case ProblemKind::resnet_smiley:
        return "smiley";
    case ProblemKind::resnet_spiral:
        return "spiral";
    default:
        return {};
    }
}

} // namespace

const char* to_string(ProblemKind kind) {
    switch (kind) {
    case ProblemKind::quadratic:
        return "quadratic";
    case ProblemKind::nonconvex1d:
        return "nonconvex1d";
    case ProblemKind::resnet_blobs:
        return "resnet-blobs";
    case ProblemKind::resnet_smiley:
        return "resnet-smiley";
    case ProblemKind::resnet_spiral:
        return "resnet-spiral";
    }
    return "unknown";
}

bool is_resnet(ProblemKind kind) {
    return kind == ProblemKind::resnet_blobs || kind == ProblemKind::resnet_smiley ||
           kind == ProblemKind::resnet_spiral;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

Variant parse_variant(const std::string& raw) {
    const std::string text = trim(raw);
    Variant v;
    v.name = text;
    if (text == "add") {
        v.kind = ModelKind::additive;
    } else if (text == "mult") {
        v.kind = ModelKind::multiplicative;
    } else if (text == "single") {
        v.single_level = true;
    } else if (text == "mix-mfv") {
        v.kind = ModelKind::hybrid;
        v.weights = WeightStrategy::mfv();
    } else if (text.rfind("mix-fixed(", 0) == 0) {
        const std::string arg = variant_argument(text, "mix-fixed(");
        const double w = parse_double("model", arg);
        if (w < 0.0 || w > 1.0) {
            bad_value("model", text, "mix-fixed(w) with w in [0, 1]");
        }
        v.kind = ModelKind::hybrid;
        v.weights = WeightStrategy::fixed(w);
        v.name = "mix-fixed(" + format_double(w) + ")";
    } else if (text.rfind("mix-bayes(", 0) == 0) {
        const std::string arg = variant_argument(text, "mix-bayes(");
        v.kind = ModelKind::hybrid;
        if (arg == "inf") {
            v.weights = WeightStrategy::bayes(0);
        } else {
            const long long d = parse_int("model", arg);
            if (d < 1) {
                bad_value("model", text, "mix-bayes(d) with d >= 1 or d = inf");
            }
            v.weights = WeightStrategy::bayes(static_cast<std::size_t>(d));
        }
        v.name = "mix-bayes(" + arg + ")";
    } else {
        throw ConfigError("unknown value for 'model': '" + text + "' (allowed: " +
                          kAllowedVariants + ")");
    }
    return v;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
    std::string models;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        models += (i ? "," : "") + variants[i].name;
    }
    std::vector<std::pair<std::string, std::string>> e = {
        {"problem", to_string(problem)},
        {"levels", std::to_string(levels)},
        {"model", models},
        {"seeds", join_seeds(seeds)},
        {"data_seed", std::to_string(data_seed)},
    };
    if (is_resnet(problem)) {
        e.emplace_back("width", std::to_string(width));
        e.emplace_back("samples", std::to_string(samples));
        e.emplace_back("coarse_blocks", std::to_string(coarse_blocks));
        e.emplace_back("init_scale", format_double(init_scale));
    } else {
        e.emplace_back("n_coarse", std::to_string(n_coarse));
        e.emplace_back("init_amplitude", format_double(init_amplitude));
    }
    e.emplace_back("mu_pre", std::to_string(solver.mu_pre));
    e.emplace_back("mu_post", std::to_string(solver.mu_post));
    e.emplace_back("mu_coarse", std::to_string(solver.mu_coarse));
    e.emplace_back("kappa", format_double(solver.kappa));
    e.emplace_back("grad_tol", format_double(solver.grad_tol));
    e.emplace_back("target_loss", solver.target_value ? format_double(*solver.target_value) : "none");
    e.emplace_back("max_cycles", std::to_string(solver.max_cycles));
    e.emplace_back("delta0", format_double(solver.tr.delta0));
    e.emplace_back("delta_max", format_double(solver.tr.delta_max));
    e.emplace_back("eta1", format_double(solver.tr.eta1));
    e.emplace_back("eta2", format_double(solver.tr.eta2));
    e.emplace_back("shrink", format_double(solver.tr.shrink));
    e.emplace_back("grow", format_double(solver.tr.grow));
    e.emplace_back("output", output_dir.string());
    return e;
}

void ExperimentConfig::validate() const {
    if (variants.empty()) {
        throw ConfigError("config: at least one model variant is required");
    }
    if (seeds.empty()) {
        throw ConfigError("config: at least one seed is required");
    }
    std::set<std::string> names;
    for (const Variant& v : variants) {
        if (!names.insert(v.name).second) {
            throw ConfigError("config: model variant '" + v.name + "' listed twice");
        }
    }
    if (levels < 2) {
        throw ConfigError("config: levels must be at least 2");
    }
    if (is_resnet(problem)) {
        if (width < 1 || coarse_blocks < 2) {
            throw ConfigError("config: need width >= 1 and coarse_blocks >= 2");
        }
        if (samples < 16) {
            throw ConfigError("config: samples must be at least 16");
        }
        if (!(init_scale > 0.0)) {
            throw ConfigError("config: init_scale must be positive");
        }
    } else {
        if (n_coarse < 1) {
            throw ConfigError("config: n_coarse must be positive");
        }
        if (!(init_amplitude >= 0.0)) {
            throw ConfigError("config: init_amplitude must be non-negative");
        }
    }
    solver.validate();
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::optional<ProblemKind> problem;
    std::optional<int> levels;
    std::optional<double> target;
    bool target_none = false;
    std::set<std::string> seen;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    try {
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) {
                line.erase(hash);
            }
            line = trim(line);
            if (line.empty()) {
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("expected key=value, got '" + line + "'");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (!seen.insert(key).second) {
                throw ConfigError("duplicate key '" + key + "'");
            }
            if (val.empty()) {
                throw ConfigError("empty value for '" + key + "'");
            }

            auto as_int = [&] { return static_cast<int>(parse_int(key, val)); };
            if (key == "problem") {
                problem = parse_problem(val);
            } else if (key == "levels") {
                levels = as_int();
            } else if (key == "n_coarse") {
                cfg.n_coarse = parse_int(key, val);
            } else if (key == "model") {
                for (const std::string& item : split_list(val)) {
                    cfg.variants.push_back(parse_variant(item));
                }
            } else if (key == "seeds") {
                for (const std::string& item : split_list(val)) {
                    cfg.seeds.push_back(parse_uint(key, item));
                }
            } else if (key == "width") {
                cfg.width = parse_int(key, val);
            } else if (key == "samples") {
                cfg.samples = parse_int(key, val);
            } else if (key == "coarse_blocks") {
                cfg.coarse_blocks = parse_int(key, val);
            } else if (key == "data_seed") {
                cfg.data_seed = parse_uint(key, val);
            } else if (key == "init_scale") {
                cfg.init_scale = parse_double(key, val);
            } else if (key == "init_amplitude") {
                cfg.init_amplitude = parse_double(key, val);
            } else if (key == "mu_pre") {
                cfg.solver.mu_pre = as_int();
            } else if (key == "mu_post") {
                cfg.solver.mu_post = as_int();
            } else if (key == "mu_coarse") {
                cfg.solver.mu_coarse = as_int();
            } else if (key == "kappa") {
                cfg.solver.kappa = parse_double(key, val);
            } else if (key == "grad_tol") {
                cfg.solver.grad_tol = parse_double(key, val);
            } else if (key == "target_loss") {
                if (val == "none") {
                    target_none = true;
                } else {
                    target = parse_double(key, val);
                }
            } else if (key == "max_cycles") {
                cfg.solver.max_cycles = as_int();
            } else if (key == "delta0") {
                cfg.solver.tr.delta0 = parse_double(key, val);
            } else if (key == "delta_max") {
                cfg.solver.tr.delta_max = parse_double(key, val);
            } else if (key == "eta1") {
                cfg.solver.tr.eta1 = parse_double(key, val);
            } else if (key == "eta2") {
                cfg.solver.tr.eta2 = parse_double(key, val);
            } else if (key == "shrink") {
                cfg.solver.tr.shrink = parse_double(key, val);
            } else if (key == "grow") {
                cfg.solver.tr.grow = parse_double(key, val);
            } else if (key == "output") {
                cfg.output_dir = val;
            } else {
                throw ConfigError("unknown key '" + key + "'");
            }
        }
        if (!problem) {
            throw ConfigError("missing mandatory key 'problem' (allowed: " +
                              std::string(kAllowedProblems) + ")");
        }
    } catch (const ConfigError& e) {
        const std::string where = lineno > 0 && !in.eof() ? origin + ":" + std::to_string(lineno)
                                                          : origin;
        throw ConfigError(where + ": " + e.what());
    }

    cfg.problem = *problem;
    if (is_resnet(cfg.problem)) {
        cfg.levels = levels.value_or(4);
        if (target) {
            cfg.solver.target_value = target;
        } else if (!target_none) {
            cfg.solver.target_value = 0.25;
        }
        if (!seen.count("grad_tol")) {
            cfg.solver.grad_tol = 1e-4;
        }
        if (!seen.count("max_cycles")) {
            cfg.solver.max_cycles = 200;
        }
    } else {
        cfg.levels = levels.value_or(3);
        if (target) {
            cfg.solver.target_value = target;
        }
    }
    if (cfg.variants.empty()) {
        cfg.variants.push_back(parse_variant("add"));
    }
    if (cfg.seeds.empty()) {
        cfg.seeds.push_back(1);
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

ProblemHierarchy build_problem(const ExperimentConfig& cfg) {
    switch (cfg.problem) {
    case ProblemKind::quadratic:
        return build_quadratic_hierarchy(cfg.n_coarse, cfg.levels, cfg.data_seed);
    case ProblemKind::nonconvex1d:
        return build_nonconvex_1d_hierarchy(cfg.n_coarse, cfg.levels, cfg.data_seed);
    default:
        break;
    }
    auto data = std::make_shared<const Dataset>(
        generate_named(dataset_name(cfg.problem), cfg.samples, cfg.data_seed));
    ResNetSpec spec;
    spec.blocks = cfg.coarse_blocks;
    spec.width = cfg.width;
    spec.n_in = data->n_in();
    spec.n_out = data->n_out();
    ProblemHierarchy h = build_resnet_hierarchy(spec, cfg.levels - 1, std::move(data));
    h.name = to_string(cfg.problem);
    return h;
}

Vector initial_point(const ExperimentConfig& cfg, const ProblemHierarchy& hier,
                     std::uint64_t seed) {
    if (is_resnet(cfg.problem)) {
        // Draw on the finest network directly so every level count sees the
        // same distribution.
        const auto& fine = dynamic_cast<const ResNetObjective&>(hier.finest());
        return resnet_initial_params(fine.spec(), seed, cfg.init_scale);
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, cfg.init_amplitude);
    Vector x(hier.finest().dim());
    for (Index i = 0; i < x.size(); ++i) {
        x[i] = gauss(rng);
    }
    return x;
}

RunResult run_single(const ExperimentConfig& cfg, const Variant& variant, std::uint64_t seed) {
    const ProblemHierarchy hier = build_problem(cfg);
    VCycleConfig vc = cfg.solver;
    vc.model_kind = variant.kind;
    vc.weights = variant.weights;
    vc.single_level = variant.single_level;
    RunResult r;
    r.variant = variant.name;
    r.seed = seed;
    r.report = minimize(hier, vc, initial_point(cfg, hier, seed));
    r.censored = !r.report.converged;
    return r;
}

SummaryTable summarize(const ExperimentConfig& cfg, const std::vector<RunResult>& runs) {
    SummaryTable table;
    for (const Variant& v : cfg.variants) {
        std::vector<double> costs;
        SummaryRow row;
        row.variant = v.name;
        row.problem = to_string(cfg.problem);
        for (const RunResult& r : runs) {
            if (r.variant != v.name) {
                continue;
            }
            costs.push_back(r.report.cost);
            ++row.runs;
            row.censored += r.censored ? 1 : 0;
        }
        if (!costs.empty()) {
            double sum = 0.0;
            for (double c : costs) {
                sum += c;
            }
            row.mean_cost = sum / static_cast<double>(costs.size());
            double var = 0.0;
            for (double c : costs) {
                var += (c - row.mean_cost) * (c - row.mean_cost);
            }
            const auto [lo, hi] = std::minmax_element(costs.begin(), costs.end());
            const double sd =
                *lo == *hi ? 0.0 : std::sqrt(var / static_cast<double>(costs.size()));
            row.spread_pct = row.mean_cost > 0.0 ? 100.0 * sd / row.mean_cost : 0.0;
        }
        table.rows.push_back(row);
    }
    return table;
}

void write_run_csv(const RunReport& report, std::size_t levels, bool single_level,
                   const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    out << "cycle,f_value,grad_norm,work_units,accepted_coarse_steps";
    if (!single_level) {
        for (std::size_t l = levels - 1; l >= 1; --l) {
            out << ",w_add_" << l;
        }
    }
    out << '\n';
    for (const CycleRecord& row : report.rows) {
        out << row.cycle << ',' << format_double(row.f_value) << ','
            << format_double(row.grad_norm) << ',' << format_double(row.work_units) << ','
            << row.accepted_coarse_steps;
        for (double w : row.w_add) {
            out << ',' << format_double(w);
        }
        out << '\n';
    }
}

void write_summary_csv(const ExperimentConfig& cfg, const SummaryTable& table,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    for (const auto& [k, v] : cfg.echo()) {
        out << "# " << k << '=' << v << '\n';
    }
    out << "# cost unit: work units (gradient on level l = n_l/n_L, value = half)\n";
    out << "variant,problem,runs,censored,mean_cost,spread_pct\n";
    for (const SummaryRow& r : table.rows) {
        out << r.variant << ',' << r.problem << ',' << r.runs << ',' << r.censored << ','
            << format_double(r.mean_cost) << ',' << format_double(r.spread_pct) << '\n';
    }
}

SummaryTable run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
    cfg.validate();
    std::filesystem::create_directories(cfg.output_dir);

    std::vector<RunResult> runs;
    for (const Variant& v : cfg.variants) {
        for (std::uint64_t seed : cfg.seeds) {
            RunResult r = run_single(cfg, v, seed);
            write_run_csv(r.report, static_cast<std::size_t>(cfg.levels), v.single_level,
                          cfg.output_dir / (v.name + "_" + std::to_string(seed) + ".csv"));
            if (log) {
                *log << v.name << " seed=" << seed << " cycles=" << r.report.cycles
                     << " cost=" << format_double(r.report.cost)
                     << (r.censored ? " (censored)" : "") << '\n';
            }
            runs.push_back(std::move(r));
        }
    }

    {
        const auto path = cfg.output_dir / "runs.csv";
        std::ofstream out(path);
        if (!out) {
            throw ConfigError("cannot write '" + path.string() + "'");
        }
        out << "variant,seed,cycles,cost,censored,final_f,final_grad_norm\n";
        for (const RunResult& r : runs) {
            const CycleRecord& last = r.report.rows.back();
            out << r.variant << ',' << r.seed << ',' << r.report.cycles << ','
                << format_double(r.report.cost) << ',' << (r.censored ? 1 : 0) << ','
                << format_double(last.f_value) << ',' << format_double(last.grad_norm) << '\n';
        }
    }

    SummaryTable table = summarize(cfg, runs);
    write_summary_csv(cfg, table, cfg.output_dir / "summary.csv");
    return table;
}

} // namespace nmm
