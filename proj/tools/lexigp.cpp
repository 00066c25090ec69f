#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lexigp/harness.hpp"

using namespace lexigp;

namespace {

struct RunArgs {
    std::string problem;
    std::string selection = "eps-lex";
    std::string downsampling = "nds";
    double d = 0.1;
    double s = 0.01;
    int g = 10;
    double batch_size = 0.1;
    std::optional<int> k;
    double alpha = 1.0;
    std::optional<int> generations;
    std::optional<double> time_budget;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> split_seed;
    std::size_t pop = 500;
    std::string out = "results";
    int run_index = 0;
};

int do_run(const RunArgs& a) {
    const Dataset ds = load_dataset(a.problem);
    CellKey cell{ds.name, parse_strategy(a.downsampling), parse_method(a.selection), std::nullopt};
    if (is_batch_method(cell.method)) cell.batch_size = a.batch_size;

    RunConfig cfg;
    cfg.problem = ds.name;
    cfg.method = cell.method;
    cfg.selection.alpha = a.alpha;
    cfg.selection.batch_fraction = a.batch_size;
    if (a.k) {
        cfg.selection.tournament_size = *a.k;
        cfg.selection.batch_tournament_size = *a.k;
    }
    cfg.downsampling.strategy = cell.strategy;
    cfg.downsampling.rate = a.d;
    cfg.downsampling.parent_rate = a.s;
    cfg.downsampling.schedule_interval = a.g;
    cfg.population_size = a.pop;
    if (a.generations) cfg.base_generations = *a.generations;
    if (a.time_budget) {
        cfg.time_budget_seconds = a.time_budget;
        cfg.unlimited_generations = !a.generations.has_value();
    }
    cfg.seed = a.seed;
    cfg.split_seed = a.split_seed.value_or(split_seed(a.seed, ds.name, SplitSeedPolicy::kPerProblem, 0));

    const SplitDataset data = split(ds, cfg.split_seed);
    const RunResult result = run(cfg, data);

    RunSummary summary;
    summary.cell = cell;
    summary.run_index = a.run_index;
    summary.seed = cfg.seed;
    summary.split_seed = cfg.split_seed;
    summary.best_expr = result.hall_of_fame.best->to_string();
    summary.val_mse = result.hall_of_fame.validation_mse;
    summary.test_mse = result.test_mse;
    summary.generations = result.generations_completed;
    summary.termination = result.termination;
    summary.training_case_evaluations = result.counters.training_case_evaluations;

    const ResultsStore store(a.out);
    store.save(summary, result.records);
    std::cout << to_json(summary).dump(2) << '\n';
    std::cerr << "log: " << store.log_path(cell, a.run_index).string() << '\n';
    return 0;
}

int do_campaign(const std::string& path) {
    const CampaignSpec spec = load_campaign_spec(path);
    const CampaignOutcome outcome = run_campaign(spec, [](const std::string& line) { std::cerr << line << '\n'; });
    std::cout << "executed " << outcome.runs_executed << ", skipped " << outcome.runs_skipped << ", failed cells "
              << outcome.failures.size() << '\n';
    return outcome.failures.empty() ? 0 : 2;
}

int do_report(const std::string& in, const std::vector<std::string>& at, const std::string& out) {
    std::vector<BudgetPoint> budgets;
    for (const auto& b : at) budgets.push_back(BudgetPoint::parse(b));
    if (budgets.empty()) budgets.push_back(BudgetPoint{});
    const auto runs = ResultsStore(in).load_all();
    if (runs.empty()) throw std::runtime_error("no completed runs under " + in);
    for (const auto& p : emit_reports(runs, budgets, out.empty() ? std::filesystem::path(in) / "reports" : std::filesystem::path(out))) {
        std::cout << p.string() << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symbolic regression GP with lexicase-family selection and case down-sampling"};
    app.require_subcommand(1);

    RunArgs ra;
    auto* run_cmd = app.add_subcommand("run", "single run; writes a JSONL log and a summary");
    run_cmd->add_option("--problem", ra.problem, "dataset (CSV/TSV with a target column)")->required()->check(
        CLI::ExistingFile);
    run_cmd->add_option("--selection", ra.selection, "tourn|fps|lex|eps-lex|eps-plex|batch-tourn|batch-eps-lex");
    run_cmd->add_option("--downsampling", ra.downsampling, "nds|rds|ids");
    run_cmd->add_option("--d", ra.d, "down-sampling rate");
    run_cmd->add_option("--s", ra.s, "parent sampling rate (ids)");
    run_cmd->add_option("--g", ra.g, "distance recompute interval (ids)");
    run_cmd->add_option("--batch-size", ra.batch_size, "batch fraction for batch methods");
    run_cmd->add_option("--k", ra.k, "tournament size");
    run_cmd->add_option("--alpha", ra.alpha, "plexicase sharpening exponent");
    auto* gens = run_cmd->add_option("--generations", ra.generations, "base generations G");
    auto* budget = run_cmd->add_option("--time-budget", ra.time_budget, "wall-clock seconds");
    run_cmd->add_option("--seed", ra.seed);
    run_cmd->add_option("--split-seed", ra.split_seed);
    run_cmd->add_option("--pop", ra.pop, "population size");
    run_cmd->add_option("--run-index", ra.run_index);
    run_cmd->add_option("--out", ra.out, "results directory");
    run_cmd->callback([&] {
        if (gens->count() == 0 && budget->count() == 0) throw CLI::ValidationError("need --generations or --time-budget");
    });

    std::string spec_path;
    auto* camp_cmd = app.add_subcommand("campaign", "run a campaign described by a JSON spec");
    camp_cmd->add_option("--spec", spec_path)->required()->check(CLI::ExistingFile);

    std::string report_in;
    std::string report_out;
    std::vector<std::string> report_at;
    auto* rep_cmd = app.add_subcommand("report", "emit CSV reports from a results directory");
    rep_cmd->add_option("--in", report_in)->required()->check(CLI::ExistingDirectory);
    rep_cmd->add_option("--at", report_at, "eval, or a duration like 900, 15m, 1h, 24h");
    rep_cmd->add_option("--out", report_out, "report directory (default <in>/reports)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return do_run(ra);
        if (*camp_cmd) return do_campaign(spec_path);
        if (*rep_cmd) return do_report(report_in, report_at, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
