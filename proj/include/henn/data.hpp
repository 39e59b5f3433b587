#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "henn/hyperdomain.hpp"

namespace henn {

struct Sample {
    std::vector<double> features;
    LabelVector label;

    friend bool operator==(const Sample&, const Sample&) = default;
};

/// Synthetic composite-label data: one isotropic Gaussian cluster per class.
/// A sample whose class belongs to a composite group is, with probability
/// `composite_ratio`, "blurred": its features are redrawn around the group
/// centroid with standard deviation `within_std * blur_scale` and its label
/// becomes the group indicator.
struct DatasetSpec {
    std::shared_ptr<const Partition> partition;
    std::size_t dim = 2;
    /// Class means; empty places them evenly on a circle of `radius` in the
    /// first two coordinates.
    std::vector<std::vector<double>> means;
    double radius = 4.0;
    double within_std = 1.0;
    double blur_scale = 2.0;
    double composite_ratio = 0.5;
    std::size_t n_train = 2000;
    std::size_t n_val = 500;
    std::size_t n_test = 500;
    std::uint64_t seed = 1;
};

/// K = 6 with composite groups {0,1} and {2,3}; classes 4 and 5 stand alone.
std::shared_ptr<const Partition> default_partition();
DatasetSpec default_dataset_spec();

struct DatasetSplits {
    std::vector<Sample> train;
    std::vector<Sample> val;
    std::vector<Sample> test;
};

std::vector<std::vector<double>> class_means(const DatasetSpec& spec);
DatasetSplits generate(const DatasetSpec& spec);

/// One JSON object per line: {"x": [reals], "y": [0/1 bits]}.
void write_jsonl(const std::vector<Sample>& samples, const std::filesystem::path& path);
/// Throws ParseError (malformed line) or ValidationError (label invalid for the
/// partition); both name the 1-based line number.
std::vector<Sample> read_jsonl(const std::filesystem::path& path, const Partition& partition);

/// Domain sidecar: {"k": K, "groups": [[...], ...]} with 0-based class indices.
void write_domain(const Partition& partition, const std::filesystem::path& path);
std::shared_ptr<const Partition> read_domain(const std::filesystem::path& path);

}  // namespace henn
