#pragma once

/// @file harness.hpp
/// @brief Campaign orchestration over problems x strategies x methods, an
/// append-only on-disk results store, budget snapshots and report emission.
///
/// Store layout under the campaign output directory:
///
///     runs/<problem>/<cell>/run_<i>.jsonl   one GenerationRecord per line
///     runs/<problem>/<cell>/run_<i>.json    run summary, written last
///     failures.json                         cells that could not run
///     batch_choice.csv                      winning batch size per problem
///
/// where <cell> is "<strategy>-<method>" with a "-b<fraction>" suffix for
/// batch methods. A run counts as complete once its summary exists.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lexigp/engine.hpp"
#include "lexigp/stats.hpp"

namespace lexigp {

enum class SplitSeedPolicy {
    kPerProblem, ///< one split per problem for every run and method
    kPerRun,     ///< split re-drawn per run index, shared across methods
};

struct CampaignSpec {
    std::vector<std::filesystem::path> problems;
    std::vector<Method> methods;
    std::vector<Strategy> strategies;
    std::vector<double> batch_sizes{0.05, 0.075, 0.1};
    int runs = 30;
    /// Base generations G (scaled per strategy) unless a time budget is set.
    int base_generations = 100;
    std::optional<double> time_budget_seconds;
    std::uint64_t seed = 0;
    SplitSeedPolicy split_policy = SplitSeedPolicy::kPerProblem;
    int workers = 1;
    std::filesystem::path output_dir = "results";

    std::size_t population_size = 500;
    DownsampleConfig downsampling; ///< strategy field is overridden per cell
    SelectionParams selection;     ///< batch_fraction is overridden per cell

    void validate() const;
};

CampaignSpec parse_campaign_spec(const nlohmann::json& j);
CampaignSpec load_campaign_spec(const std::filesystem::path& path);

struct CellKey {
    std::string problem;
    Strategy strategy = Strategy::kNone;
    Method method = Method::kTournament;
    std::optional<double> batch_size;

    /// "<strategy>-<method>", e.g. "rds-eps-lex"
    std::string method_label() const;
    /// method_label() plus "-b<fraction>" for batch methods
    std::string cell_label() const;
};

std::uint64_t run_seed(std::uint64_t campaign_seed, const CellKey& cell, int run_index);
std::uint64_t split_seed(std::uint64_t campaign_seed, std::string_view problem, SplitSeedPolicy policy, int run_index);

struct RunSummary {
    CellKey cell;
    int run_index = 0;
    std::uint64_t seed = 0;
    std::uint64_t split_seed = 0;
    std::string best_expr;
    double val_mse = 0.0;
    double test_mse = 0.0;
    int generations = 0;
    Termination termination = Termination::kGenerations;
    std::uint64_t training_case_evaluations = 0;
};

struct StoredRun {
    RunSummary summary;
    std::vector<GenerationRecord> records;
};

nlohmann::json to_json(const GenerationRecord& r);
GenerationRecord record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunSummary& s);
RunSummary summary_from_json(const nlohmann::json& j);

class ResultsStore {
  public:
    explicit ResultsStore(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const noexcept { return root_; }
    std::filesystem::path log_path(const CellKey& cell, int run_index) const;
    std::filesystem::path summary_path(const CellKey& cell, int run_index) const;
    bool has_run(const CellKey& cell, int run_index) const;

    /// Writes the log, then atomically publishes the summary.
    void save(const RunSummary& summary, std::span<const GenerationRecord> records) const;
    std::vector<StoredRun> load_all() const;

  private:
    std::filesystem::path root_;
};

struct CellFailure {
    std::string problem;
    std::string cell;
    std::string message;
};

struct CampaignOutcome {
    int runs_executed = 0;
    int runs_skipped = 0; ///< already present in the store
    std::vector<CellFailure> failures;
};

using ProgressLog = std::function<void(const std::string&)>;

CampaignOutcome run_campaign(const CampaignSpec& spec, const ProgressLog& log = {});

/// One RunConfig for a cell of a campaign.
RunConfig make_run_config(const CampaignSpec& spec, const CellKey& cell, int run_index);

// --- budgets and snapshots ---------------------------------------------------

struct BudgetPoint {
    enum class Kind { kEvaluations, kSeconds };
    Kind kind = Kind::kEvaluations;
    double seconds = 0.0;

    /// "eval", or a duration such as "900", "900s", "15m", "1h", "24h".
    static BudgetPoint parse(std::string_view text);
    std::string label() const;
};

struct Snapshot {
    int generation = 0;
    double elapsed_ms = 0.0;
    double val_mse = 0.0;
    double test_mse = 0.0;
    double median_tree_size = 0.0;
};

/// Evaluation budget: the final record. Time budget: the last record whose
/// elapsed time does not exceed it; throws if generation 0 already does.
Snapshot snapshot_at(std::span<const GenerationRecord> records, const BudgetPoint& budget);

/// Batch size per (problem, strategy, method) with the lowest mean validation
/// MSE at the budget point.
struct BatchChoice {
    std::string problem;
    Strategy strategy = Strategy::kNone;
    Method method = Method::kBatchTournament;
    double batch_size = 0.0;
    double mean_val_mse = 0.0;
};
std::vector<BatchChoice> choose_batch_sizes(std::span<const StoredRun> runs, const BudgetPoint& budget);

/// Problems x method-labels matrix of a per-run metric's median, after
/// resolving batch methods to their chosen batch size. Problems missing any
/// method are dropped.
struct MedianTable {
    std::vector<std::string> problems;
    std::vector<std::string> methods;
    Matrix test_mse;
    Matrix tree_size;
};
MedianTable median_table(std::span<const StoredRun> runs, const BudgetPoint& budget);

/// Writes the per-budget CSV reports into `out_dir` and returns the paths.
std::vector<std::filesystem::path> emit_reports(std::span<const StoredRun> runs, std::span<const BudgetPoint> budgets,
                                                const std::filesystem::path& out_dir);

} // namespace lexigp
