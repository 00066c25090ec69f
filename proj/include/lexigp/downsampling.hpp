#pragma once

/// @file downsampling.hpp
/// @brief Per-generation choice of the active training cases.
///
/// Random down-sampling draws a fresh uniform subset each generation. Informed
/// down-sampling runs farthest-first traversal over pairwise case distances,
/// where a case's position is its vector of squared errors across a small
/// sample of parents. Distances are only recomputed every g generations.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lexigp/matrix.hpp"
#include "lexigp/numeric.hpp"

namespace lexigp {

enum class Strategy { kNone, kRandom, kInformed };

/// nds, rds, ids
std::string_view strategy_id(Strategy s) noexcept;
Strategy parse_strategy(std::string_view id);

struct DownsampleConfig {
    Strategy strategy = Strategy::kNone;
    double rate = 0.1;          ///< d
    double parent_rate = 0.01;  ///< s
    int schedule_interval = 10; ///< g
    /// Reuse the subset built at the last recomputation instead of re-running
    /// farthest-first each generation.
    bool freeze_between_recomputations = false;

    /// Down-sample rate in effect (1 for kNone).
    double effective_rate() const noexcept { return strategy == Strategy::kNone ? 1.0 : rate; }
    void validate() const;
};

using CaseSubset = std::vector<std::size_t>;

/// max(1, round(d * n))
std::size_t subset_size(std::size_t num_cases, double rate);

/// ceil(s * population), at least 1.
std::size_t parent_sample_size(double parent_rate, std::size_t population);

/// Uniform sample without replacement, returned in ascending order.
CaseSubset random_subsample(std::size_t num_cases, double rate, Rng& rng);

class CaseDistanceMatrix {
  public:
    CaseDistanceMatrix(std::size_t num_cases, std::vector<double> distances, int generation_computed);

    std::size_t num_cases() const noexcept { return n_; }
    double operator()(std::size_t a, std::size_t b) const { return d_[a * n_ + b]; }
    int generation_computed() const noexcept { return generation_; }

  private:
    std::size_t n_;
    std::vector<double> d_;
    int generation_;
};

/// Euclidean distance between the columns of `parent_errors`
/// (sampled parents x all training cases).
CaseDistanceMatrix case_distance_matrix(const Matrix& parent_errors, int generation = 0);

/// Farthest-first traversal from a uniformly random start; ties in the
/// max-min step are broken uniformly. Output is in insertion order.
CaseSubset farthest_first_subset(const CaseDistanceMatrix& dm, std::size_t size, Rng& rng);
CaseSubset farthest_first_from(const CaseDistanceMatrix& dm, std::size_t size, std::size_t start, Rng& rng);

/// True on generations where informed down-sampling needs fresh distances.
bool distance_recompute_due(const DownsampleConfig& cfg, int generation) noexcept;

struct DownsampleState {
    std::optional<CaseDistanceMatrix> distances;
    CaseSubset frozen;
    std::vector<int> recompute_generations;
};

/// Active cases for `generation`. On recomputation generations of the informed
/// strategy `parent_errors` must hold the full-training-set errors of the
/// sampled parents; otherwise it is ignored.
CaseSubset next_subset(const DownsampleConfig& cfg, int generation, std::size_t num_cases, DownsampleState& state,
                       const Matrix* parent_errors, Rng& rng);

} // namespace lexigp
