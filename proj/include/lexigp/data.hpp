#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lexigp/matrix.hpp"

namespace lexigp {

/// Squared errors are capped here so every downstream selector sees finite,
/// totally ordered values.
inline constexpr double kErrorCeiling = 1e60;

class IngestionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Dataset {
    std::string name;
    std::vector<std::string> feature_names;
    Matrix features; ///< instances x num_features
    std::vector<double> targets;

    std::size_t num_instances() const noexcept { return targets.size(); }
    std::size_t num_features() const noexcept { return features.cols(); }
};

/// One part of a split: feature rows plus their targets.
struct Partition {
    Matrix features;
    std::vector<double> targets;
    std::vector<std::size_t> source_rows; ///< row indices in the original dataset

    std::size_t size() const noexcept { return targets.size(); }
};

struct SplitDataset {
    Partition train;
    Partition validation;
    Partition test;
    std::uint64_t split_seed = 0;

    std::size_t num_features() const noexcept { return train.features.cols(); }
};

/// Reads a CSV or TSV file (delimiter taken from the header line) with a
/// `target` column. All other columns become features, in header order.
Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::istream& in, std::string name);

/// Seeded 70/15/15 split: floor for train and validation, remainder to test.
SplitDataset split(const Dataset& dataset, std::uint64_t seed);

std::vector<double> squared_errors(std::span<const double> predictions, std::span<const double> targets);
double mse(std::span<const double> predictions, std::span<const double> targets);

} // namespace lexigp
