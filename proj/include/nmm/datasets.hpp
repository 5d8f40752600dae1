#pragma once

#include "nmm/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace nmm {

/// Labelled 2-D classification data: one row per sample, one-hot labels.
struct Dataset {
    Matrix inputs;  // n_s x n_in
    Matrix labels;  // n_s x n_out, one-hot
    std::uint64_t seed = 0;

    Index samples() const { return inputs.rows(); }
    Index n_in() const { return inputs.cols(); }
    Index n_out() const { return labels.cols(); }

    /// Index of the hot entry per row.
    std::vector<int> class_indices() const;
};

/// Builds a dataset from 2-D points and class indices in [0, classes).
Dataset make_dataset(const Matrix& points, const std::vector<int>& classes, int n_classes,
                     std::uint64_t seed);

/// Isotropic Gaussian clusters around `classes` centres on a circle of radius 2.
/// Sample i belongs to class i % classes.
Dataset generate_blobs(Index n_s, int classes, std::uint64_t seed, double noise = 0.4);

/// Two interleaved Archimedean arms with radial noise, 2 classes.
Dataset generate_spiral(Index n_s, std::uint64_t seed, double noise = 0.04);

/// Four classes: left eye, right eye, mouth arc and a surrounding ring.
Dataset generate_smiley(Index n_s, std::uint64_t seed, double noise = 0.05);

/// Dispatch on "blobs" | "spiral" | "smiley"; blobs uses 3 classes.
Dataset generate_named(const std::string& name, Index n_s, std::uint64_t seed);

/// CSV with header `x1,x2,label`, one row per sample, label = class index.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

} // namespace nmm
