#include "nmm/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace nmm {

std::vector<int> Dataset::class_indices() const {
    std::vector<int> c(static_cast<std::size_t>(samples()));
    for (Index i = 0; i < samples(); ++i) {
        Index j = 0;
        labels.row(i).maxCoeff(&j);
        c[static_cast<std::size_t>(i)] = static_cast<int>(j);
    }
    return c;
}

Dataset make_dataset(const Matrix& points, const std::vector<int>& classes, int n_classes,
                     std::uint64_t seed) {
    if (points.rows() != static_cast<Index>(classes.size())) {
        throw ContractViolation("make_dataset: point and label counts differ");
    }
    if (n_classes < 1) {
        throw ContractViolation("make_dataset: need at least one class");
    }
    Dataset d;
    d.inputs = points;
    d.labels = Matrix::Zero(points.rows(), n_classes);
    d.seed = seed;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] < 0 || classes[i] >= n_classes) {
            throw ContractViolation("make_dataset: class index out of range");
        }
        d.labels(static_cast<Index>(i), classes[i]) = 1.0;
    }
    return d;
}

namespace {

void require_samples(const char* where, Index n_s, int classes) {
    if (classes < 1 || n_s < classes) {
        throw ContractViolation(std::string(where) + ": need n_s >= classes >= 1");
    }
}

} // namespace

Dataset generate_blobs(Index n_s, int classes, std::uint64_t seed, double noise) {
    require_samples("generate_blobs", n_s, classes);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix pts(n_s, 2);
    std::vector<int> cls(static_cast<std::size_t>(n_s));
    for (Index i = 0; i < n_s; ++i) {
        const int c = static_cast<int>(i % classes);
        const double angle = 2.0 * std::numbers::pi * c / classes;
        const double gx = gauss(rng);
        const double gy = gauss(rng);
        pts(i, 0) = 2.0 * std::cos(angle) + noise * gx;
        pts(i, 1) = 2.0 * std::sin(angle) + noise * gy;
        cls[static_cast<std::size_t>(i)] = c;
    }
    return make_dataset(pts, cls, classes, seed);
}

Dataset generate_spiral(Index n_s, std::uint64_t seed, double noise) {
    require_samples("generate_spiral", n_s, 2);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    constexpr double kTurns = 1.75;
    Matrix pts(n_s, 2);
    std::vector<int> cls(static_cast<std::size_t>(n_s));
    for (Index i = 0; i < n_s; ++i) {
        const int c = static_cast<int>(i % 2);
        const double t = 0.1 + 0.9 * unit(rng);
        const double theta = 2.0 * std::numbers::pi * kTurns * t + c * std::numbers::pi;
        const double r = t + noise * gauss(rng);
        pts(i, 0) = r * std::cos(theta);
        pts(i, 1) = r * std::sin(theta);
        cls[static_cast<std::size_t>(i)] = c;
    }
    return make_dataset(pts, cls, 2, seed);
}

Dataset generate_smiley(Index n_s, std::uint64_t seed, double noise) {
    require_samples("generate_smiley", n_s, 4);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix pts(n_s, 2);
    std::vector<int> cls(static_cast<std::size_t>(n_s));
    for (Index i = 0; i < n_s; ++i) {
        const int c = static_cast<int>(i % 4);
        double x = 0.0;
        double y = 0.0;
        switch (c) {
        case 0: // left eye
        case 1: // right eye
            x = (c == 0 ? -0.35 : 0.35) + 1.5 * noise * gauss(rng);
            y = 0.35 + 1.5 * noise * gauss(rng);
            break;
        case 2: { // mouth: lower arc from 200 to 340 degrees
            const double a = (200.0 + 140.0 * unit(rng)) * std::numbers::pi / 180.0;
            const double r = 0.55 + noise * gauss(rng);
            x = r * std::cos(a);
            y = r * std::sin(a);
            break;
        }
        default: { // ring
            const double a = 2.0 * std::numbers::pi * unit(rng);
            const double r = 1.0 + noise * gauss(rng);
            x = r * std::cos(a);
            y = r * std::sin(a);
            break;
        }
        }
        pts(i, 0) = x;
        pts(i, 1) = y;
        cls[static_cast<std::size_t>(i)] = c;
    }
    return make_dataset(pts, cls, 4, seed);
}

Dataset generate_named(const std::string& name, Index n_s, std::uint64_t seed) {
    if (name == "blobs") {
        return generate_blobs(n_s, 3, seed);
    }
    if (name == "spiral") {
        return generate_spiral(n_s, seed);
    }
    if (name == "smiley") {
        return generate_smiley(n_s, seed);
    }
    throw ContractViolation("unknown dataset '" + name + "' (allowed: blobs, smiley, spiral)");
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
    if (data.n_in() != 2) {
        throw ContractViolation("write_dataset_csv: only 2-D inputs are supported");
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out.precision(17);
    out << "x1,x2,label\n";
    const auto cls = data.class_indices();
    for (Index i = 0; i < data.samples(); ++i) {
        out << data.inputs(i, 0) << ',' << data.inputs(i, 1) << ','
            << cls[static_cast<std::size_t>(i)] << '\n';
    }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != "x1,x2,label") {
        throw std::runtime_error(path.string() + ": expected header 'x1,x2,label'");
    }
    std::vector<double> xs;
    std::vector<int> cls;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        double x1 = 0.0;
        double x2 = 0.0;
        int label = 0;
        char c1 = 0;
        char c2 = 0;
        if (!(row >> x1 >> c1 >> x2 >> c2 >> label) || c1 != ',' || c2 != ',') {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": malformed row");
        }
        xs.push_back(x1);
        xs.push_back(x2);
        cls.push_back(label);
    }
    Matrix pts(static_cast<Index>(cls.size()), 2);
    for (std::size_t i = 0; i < cls.size(); ++i) {
        pts(static_cast<Index>(i), 0) = xs[2 * i];
        pts(static_cast<Index>(i), 1) = xs[2 * i + 1];
    }
    const int n_classes = cls.empty() ? 1 : *std::max_element(cls.begin(), cls.end()) + 1;
    return make_dataset(pts, cls, n_classes, 0);
}

} // namespace nmm
