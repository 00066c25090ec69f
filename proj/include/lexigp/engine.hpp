#pragma once

/// @file engine.hpp
/// @brief Generational GP loop: evaluate on the active cases, select, vary,
/// keep a validation-based hall of fame and log every generation.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lexigp/data.hpp"
#include "lexigp/downsampling.hpp"
#include "lexigp/expr.hpp"
#include "lexigp/selection.hpp"

namespace lexigp {

struct RunConfig {
    std::string problem;
    Method method = Method::kTournament;
    SelectionParams selection;
    DownsampleConfig downsampling;
    std::size_t population_size = 500;
    int base_generations = 100; ///< G, before down-sampling adjustment
    /// Scale G by the down-sampling budget formula. When false, G is used as is.
    bool scale_generations = true;
    int max_depth = kMaxTreeDepth;
    int init_min_depth = 0;
    int init_max_depth = 4;
    double crossover_probability = 0.8;
    double mutation_probability = 0.05;
    /// Wall-clock budget; checked at generation boundaries.
    std::optional<double> time_budget_seconds;
    /// Ignore the generational limit (time budget only).
    bool unlimited_generations = false;
    std::uint64_t seed = 0;
    std::uint64_t split_seed = 0;

    void validate() const;
    /// Generation index at which a generation-limited run stops.
    int generation_limit() const;
};

/// Number of generations that spends the same number of training-case
/// evaluations as G generations without down-sampling.
int generational_limit(int base_generations, const DownsampleConfig& cfg);

struct HallOfFame {
    std::optional<Expr> best;
    double validation_mse = std::numeric_limits<double>::infinity();
    int generation = -1;

    bool empty() const noexcept { return !best.has_value(); }
};

/// Replaces the incumbent only on a strictly lower validation MSE. Returns
/// true if it was replaced.
bool update_hall_of_fame(HallOfFame& hof, std::span<const Expr> candidates, const Partition& validation,
                         int generation);

struct GenerationRecord {
    int generation = 0;
    double elapsed_ms = 0.0;
    double val_mse = 0.0;
    double test_mse = 0.0;
    double median_tree_size = 0.0;
    std::size_t subset_size = 0;

    bool same_except_time(const GenerationRecord& o) const noexcept {
        return generation == o.generation && val_mse == o.val_mse && test_mse == o.test_mse &&
               median_tree_size == o.median_tree_size && subset_size == o.subset_size;
    }
};

enum class Termination { kGenerations, kTime };
std::string_view termination_id(Termination t) noexcept;

struct RunCounters {
    std::uint64_t training_case_evaluations = 0; ///< includes informed-down-sampling parent probes
    std::uint64_t parent_probe_evaluations = 0;
    std::uint64_t validation_case_evaluations = 0;
    std::vector<int> distance_recompute_generations;
    std::vector<std::size_t> parent_probe_sizes;
};

struct RunResult {
    std::vector<GenerationRecord> records;
    HallOfFame hall_of_fame;
    double test_mse = 0.0;
    int generations_completed = 0;
    Termination termination = Termination::kGenerations;
    RunCounters counters;
};

/// Called after each generation is logged, with the population that was
/// evaluated in that generation.
using GenerationObserver = std::function<void(const GenerationRecord&, std::span<const Expr> population)>;

RunResult run(const RunConfig& config, const SplitDataset& data, const GenerationObserver& observer = {});

} // namespace lexigp
