#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pfl/numerics.hpp"

namespace pfl {

struct Dataset {
    std::vector<double> inputs;  // n x feature_dim, row-major
    std::vector<int> labels;
    int num_classes = 0;
    int feature_dim = 0;

    int size() const { return static_cast<int>(labels.size()); }
    std::span<const double> row(int i) const {
        return {inputs.data() + static_cast<std::size_t>(i) * feature_dim,
                static_cast<std::size_t>(feature_dim)};
    }
};

// Gathers the given rows into an owning batch.
Batch gather_batch(const Dataset& data, std::span<const int> rows);
Batch full_batch(const Dataset& data);

// IDX image/label pair (big-endian, magics 0x00000803 / 0x00000801).
// Pixels are scaled to [0,1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Rectangular numeric CSV with a header row; the named column holds
// integer class labels, remaining columns are features in file order.
Dataset load_csv(const std::string& path, const std::string& label_column);

// Gaussian class clusters: centers ~ N(0, center_scale^2 I) drawn once
// from the seed, samples ~ center + N(0, noise_sigma^2 I). Samples are
// emitted class-major (all of class 0, then class 1, ...).
Dataset synth_clusters(int num_classes, int feature_dim, int samples_per_class,
                       double class_center_scale, double noise_sigma, std::uint64_t seed);

// Row indices of each class, ascending within a class.
std::vector<std::vector<int>> rows_by_class(const Dataset& data);

Dataset subset(const Dataset& data, std::span<const int> rows);

}  // namespace pfl
