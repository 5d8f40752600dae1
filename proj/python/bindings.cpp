#include "nmm/checks.hpp"
#include "nmm/datasets.hpp"
#include "nmm/experiment.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace nmm;

namespace {

// A parsed config together with one freshly built hierarchy.
struct Problem {
    ExperimentConfig cfg;
    ProblemHierarchy hier;

    const Objective& level(std::size_t l) const {
        if (l >= hier.levels()) {
            throw py::index_error("level out of range");
        }
        return *hier.objectives[l];
    }
};

py::dict run_to_dict(const RunResult& r) {
    py::list rows;
    for (const CycleRecord& c : r.report.rows) {
        py::dict d;
        d["cycle"] = c.cycle;
        d["f_value"] = c.f_value;
        d["grad_norm"] = c.grad_norm;
        d["work_units"] = c.work_units;
        d["accepted_coarse_steps"] = c.accepted_coarse_steps;
        d["w_add"] = c.w_add;
        rows.append(d);
    }
    py::dict out;
    out["variant"] = r.variant;
    out["seed"] = r.seed;
    out["cycles"] = r.report.cycles;
    out["cost"] = r.report.cost;
    out["converged"] = r.report.converged;
    out["censored"] = r.censored;
    out["x"] = r.report.x;
    out["accepted_fine_values"] = r.report.accepted_fine_values;
    out["rows"] = rows;
    return out;
}

py::list summary_to_list(const SummaryTable& t) {
    py::list out;
    for (const SummaryRow& r : t.rows) {
        py::dict d;
        d["variant"] = r.variant;
        d["problem"] = r.problem;
        d["runs"] = r.runs;
        d["censored"] = r.censored;
        d["mean_cost"] = r.mean_cost;
        d["spread_pct"] = r.spread_pct;
        out.append(d);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_nmm, m) {
    m.doc() = "Nonlinear multilevel minimization core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
    py::register_exception<NumericalAbort>(m, "NumericalAbort", PyExc_ArithmeticError);

    m.def(
        "parse_config",
        [](const std::string& text) {
            py::dict d;
            for (const auto& [k, v] : parse_config_text(text).echo()) {
                d[py::str(k)] = v;
            }
            return d;
        },
        py::arg("text"), "Resolved settings of a key=value config as a dict of strings.");

    py::class_<Problem>(m, "Problem")
        .def(py::init([](const std::string& text) {
                 ExperimentConfig cfg = parse_config_text(text);
                 ProblemHierarchy h = build_problem(cfg);
                 return Problem{std::move(cfg), std::move(h)};
             }),
             py::arg("config_text"))
        .def_property_readonly("levels", [](const Problem& p) { return p.hier.levels(); })
        .def_property_readonly("dims", [](const Problem& p) { return p.hier.dims(); })
        .def(
            "value", [](const Problem& p, std::size_t l, const Vector& x) { return p.level(l).value(x); },
            py::arg("level"), py::arg("x"))
        .def(
            "gradient",
            [](const Problem& p, std::size_t l, const Vector& x) { return p.level(l).gradient(x); },
            py::arg("level"), py::arg("x"))
        .def(
            "initial_point",
            [](const Problem& p, std::uint64_t seed) { return initial_point(p.cfg, p.hier, seed); },
            py::arg("seed"))
        .def(
            "run",
            [](const Problem& p, const std::string& variant, std::uint64_t seed) {
                RunResult r;
                {
                    py::gil_scoped_release release;
                    r = run_single(p.cfg, parse_variant(variant), seed);
                }
                return run_to_dict(r);
            },
            py::arg("variant"), py::arg("seed"));

    m.def(
        "run_experiment",
        [](const std::string& text, std::optional<std::filesystem::path> output_dir) {
            ExperimentConfig cfg = parse_config_text(text);
            if (output_dir) {
                cfg.output_dir = *output_dir;
            }
            SummaryTable t;
            {
                py::gil_scoped_release release;
                t = run_experiment(cfg);
            }
            return summary_to_list(t);
        },
        py::arg("config_text"), py::arg("output_dir") = py::none(),
        "Runs every variant and seed, writes the CSVs and returns the summary rows.");

    m.def(
        "run_checks",
        [](std::uint64_t seed) {
            py::list out;
            for (const CheckResult& r : run_all_checks(seed)) {
                py::dict d;
                d["name"] = r.name;
                d["passed"] = r.passed;
                d["worst"] = r.worst;
                d["tolerance"] = r.tolerance;
                d["detail"] = r.detail;
                out.append(d);
            }
            return out;
        },
        py::arg("seed") = 0);

    m.def(
        "generate_dataset",
        [](const std::string& name, Index n, std::uint64_t seed) {
            const Dataset d = generate_named(name, n, seed);
            return py::make_tuple(d.inputs, d.class_indices());
        },
        py::arg("name"), py::arg("n"), py::arg("seed"),
        "Returns (points, class indices) for blobs, spiral or smiley.");
}
