#include "lexigp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace lexigp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_fraction(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string run_stem(int run_index) {
    std::string digits = std::to_string(run_index);
    if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
    return "run_" + digits;
}

void write_text_atomically(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    emit(header);
    for (const auto& r : rows) emit(r);
    write_text_atomically(path, out.str());
}

std::string num(double v) {
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
}

} // namespace

// ---------------------------------------------------------------------------
// Campaign spec

void CampaignSpec::validate() const {
    if (runs < 1) throw std::invalid_argument("campaign: runs must be >= 1");
    if (problems.empty() || methods.empty() || strategies.empty()) {
        throw std::invalid_argument("campaign: problems, methods and strategies must be nonempty");
    }
    if (workers < 1) throw std::invalid_argument("campaign: workers must be >= 1");
    if (population_size < 2) throw std::invalid_argument("campaign: population must be >= 2");
    for (const double b : batch_sizes) {
        if (!(b > 0.0 && b <= 1.0)) throw std::invalid_argument("campaign: batch sizes must be in (0, 1]");
    }
    const bool any_batch = std::any_of(methods.begin(), methods.end(), is_batch_method);
    if (any_batch && batch_sizes.empty()) throw std::invalid_argument("campaign: batch methods need batch sizes");
    downsampling.validate();
}

CampaignSpec parse_campaign_spec(const json& j) {
    CampaignSpec spec;
    for (const auto& p : j.at("problems")) spec.problems.emplace_back(p.get<std::string>());
    for (const auto& m : j.at("selections")) spec.methods.push_back(parse_method(m.get<std::string>()));
    if (j.contains("strategies")) {
        for (const auto& s : j.at("strategies")) spec.strategies.push_back(parse_strategy(s.get<std::string>()));
    } else {
        spec.strategies = {Strategy::kNone};
    }
    if (j.contains("batch_sizes")) spec.batch_sizes = j.at("batch_sizes").get<std::vector<double>>();
    spec.runs = j.value("runs", spec.runs);
    if (j.contains("budget")) {
        const auto& b = j.at("budget");
        if (b.contains("seconds")) spec.time_budget_seconds = b.at("seconds").get<double>();
        spec.base_generations = b.value("generations", spec.base_generations);
    }
    spec.seed = j.value("seed", spec.seed);
    const std::string policy = j.value("split_seed_policy", std::string("per_problem"));
    if (policy == "per_problem") {
        spec.split_policy = SplitSeedPolicy::kPerProblem;
    } else if (policy == "per_run") {
        spec.split_policy = SplitSeedPolicy::kPerRun;
    } else {
        throw std::invalid_argument("campaign: unknown split_seed_policy '" + policy + "'");
    }
    spec.workers = j.value("workers", spec.workers);
    spec.output_dir = j.value("out", spec.output_dir.string());
    spec.population_size = j.value("population_size", spec.population_size);
    spec.downsampling.rate = j.value("d", spec.downsampling.rate);
    spec.downsampling.parent_rate = j.value("s", spec.downsampling.parent_rate);
    spec.downsampling.schedule_interval = j.value("g", spec.downsampling.schedule_interval);
    spec.downsampling.freeze_between_recomputations =
        j.value("freeze_informed_subset", spec.downsampling.freeze_between_recomputations);
    spec.selection.tournament_size = j.value("k", spec.selection.tournament_size);
    spec.selection.batch_tournament_size = j.value("batch_k", spec.selection.batch_tournament_size);
    spec.selection.alpha = j.value("alpha", spec.selection.alpha);
    const std::string eps = j.value("epsilon", std::string("pool"));
    if (eps == "pool") {
        spec.selection.epsilon_policy = EpsilonPolicy::kCandidatePool;
    } else if (eps == "population") {
        spec.selection.epsilon_policy = EpsilonPolicy::kPopulation;
    } else {
        throw std::invalid_argument("campaign: unknown epsilon policy '" + eps + "'");
    }
    spec.validate();
    return spec;
}

CampaignSpec load_campaign_spec(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open campaign spec " + path.string());
    CampaignSpec spec = parse_campaign_spec(json::parse(in, nullptr, true, /*ignore_comments=*/true));
    // Relative dataset paths are resolved against the campaign file.
    for (auto& p : spec.problems) {
        if (p.is_relative()) p = path.parent_path() / p;
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Cells and seeds

std::string CellKey::method_label() const {
    return std::string(strategy_id(strategy)) + "-" + std::string(method_id(method));
}

std::string CellKey::cell_label() const {
    std::string label = method_label();
    if (batch_size) label += "-b" + format_fraction(*batch_size);
    return label;
}

std::uint64_t run_seed(std::uint64_t campaign_seed, const CellKey& cell, int run_index) {
    std::uint64_t h = hash_combine(campaign_seed, cell.problem);
    h = hash_combine(h, method_id(cell.method));
    h = hash_combine(h, strategy_id(cell.strategy));
    if (cell.batch_size) h = hash_combine(h, format_fraction(*cell.batch_size));
    return hash_combine(h, static_cast<std::uint64_t>(run_index));
}

std::uint64_t split_seed(std::uint64_t campaign_seed, std::string_view problem, SplitSeedPolicy policy,
                         int run_index) {
    std::uint64_t h = hash_combine(hash_combine(campaign_seed, std::string_view("split")), problem);
    if (policy == SplitSeedPolicy::kPerRun) h = hash_combine(h, static_cast<std::uint64_t>(run_index));
    return h;
}

RunConfig make_run_config(const CampaignSpec& spec, const CellKey& cell, int run_index) {
    RunConfig cfg;
    cfg.problem = cell.problem;
    cfg.method = cell.method;
    cfg.selection = spec.selection;
    if (cell.batch_size) cfg.selection.batch_fraction = *cell.batch_size;
    cfg.downsampling = spec.downsampling;
    cfg.downsampling.strategy = cell.strategy;
    cfg.population_size = spec.population_size;
    cfg.base_generations = spec.base_generations;
    if (spec.time_budget_seconds) {
        cfg.time_budget_seconds = spec.time_budget_seconds;
        cfg.unlimited_generations = true;
    }
    cfg.seed = run_seed(spec.seed, cell, run_index);
    cfg.split_seed = split_seed(spec.seed, cell.problem, spec.split_policy, run_index);
    return cfg;
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const GenerationRecord& r) {
    return json{{"gen", r.generation},       {"elapsed_ms", r.elapsed_ms},
                {"val_mse", r.val_mse},      {"test_mse", r.test_mse},
                {"median_tree_size", r.median_tree_size}, {"subset_size", r.subset_size}};
}

GenerationRecord record_from_json(const json& j) {
    GenerationRecord r;
    r.generation = j.at("gen").get<int>();
    r.elapsed_ms = j.at("elapsed_ms").get<double>();
    r.val_mse = j.at("val_mse").get<double>();
    r.test_mse = j.at("test_mse").get<double>();
    r.median_tree_size = j.at("median_tree_size").get<double>();
    r.subset_size = j.at("subset_size").get<std::size_t>();
    return r;
}

json to_json(const RunSummary& s) {
    json j{{"problem", s.cell.problem},
           {"selection", std::string(method_id(s.cell.method))},
           {"downsampling", std::string(strategy_id(s.cell.strategy))},
           {"batch_size", nullptr},
           {"run", s.run_index},
           {"seed", s.seed},
           {"split_seed", s.split_seed},
           {"best_expr", s.best_expr},
           {"val_mse", s.val_mse},
           {"test_mse", s.test_mse},
           {"generations", s.generations},
           {"termination", std::string(termination_id(s.termination))},
           {"training_case_evaluations", s.training_case_evaluations}};
    if (s.cell.batch_size) j["batch_size"] = *s.cell.batch_size;
    return j;
}

RunSummary summary_from_json(const json& j) {
    RunSummary s;
    s.cell.problem = j.at("problem").get<std::string>();
    s.cell.method = parse_method(j.at("selection").get<std::string>());
    s.cell.strategy = parse_strategy(j.at("downsampling").get<std::string>());
    if (j.contains("batch_size") && !j.at("batch_size").is_null()) s.cell.batch_size = j.at("batch_size").get<double>();
    s.run_index = j.at("run").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.split_seed = j.at("split_seed").get<std::uint64_t>();
    s.best_expr = j.at("best_expr").get<std::string>();
    s.val_mse = j.at("val_mse").get<double>();
    s.test_mse = j.at("test_mse").get<double>();
    s.generations = j.at("generations").get<int>();
    s.termination = j.at("termination").get<std::string>() == "time" ? Termination::kTime : Termination::kGenerations;
    s.training_case_evaluations = j.value("training_case_evaluations", std::uint64_t{0});
    return s;
}

// ---------------------------------------------------------------------------
// ResultsStore

fs::path ResultsStore::log_path(const CellKey& cell, int run_index) const {
    return root_ / "runs" / cell.problem / cell.cell_label() / (run_stem(run_index) + ".jsonl");
}

fs::path ResultsStore::summary_path(const CellKey& cell, int run_index) const {
    return root_ / "runs" / cell.problem / cell.cell_label() / (run_stem(run_index) + ".json");
}

bool ResultsStore::has_run(const CellKey& cell, int run_index) const {
    return fs::exists(summary_path(cell, run_index));
}

void ResultsStore::save(const RunSummary& summary, std::span<const GenerationRecord> records) const {
    std::string log;
    for (const auto& r : records) {
        log += to_json(r).dump();
        log += '\n';
    }
    write_text_atomically(log_path(summary.cell, summary.run_index), log);
    write_text_atomically(summary_path(summary.cell, summary.run_index), to_json(summary).dump(2) + "\n");
}

std::vector<StoredRun> ResultsStore::load_all() const {
    std::vector<StoredRun> out;
    const fs::path runs = root_ / "runs";
    if (!fs::exists(runs)) return out;
    std::vector<fs::path> summaries;
    for (const auto& entry : fs::recursive_directory_iterator(runs)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") summaries.push_back(entry.path());
    }
    std::sort(summaries.begin(), summaries.end());
    for (const auto& path : summaries) {
        std::ifstream in(path);
        StoredRun run;
        run.summary = summary_from_json(json::parse(in));
        fs::path log = path;
        log.replace_extension(".jsonl");
        std::ifstream lin(log);
        if (!lin) throw std::runtime_error("missing log for " + path.string());
        std::string line;
        while (std::getline(lin, line)) {
            if (!line.empty()) run.records.push_back(record_from_json(json::parse(line)));
        }
        out.push_back(std::move(run));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Campaign

CampaignOutcome run_campaign(const CampaignSpec& spec, const ProgressLog& log) {
    spec.validate();
    const ResultsStore store(spec.output_dir);
    CampaignOutcome outcome;

    struct Task {
        CellKey cell;
        int run_index;
        const SplitDataset* data;
    };
    std::map<std::string, std::map<std::uint64_t, SplitDataset>> splits;
    std::vector<Task> tasks;

    for (const auto& path : spec.problems) {
        Dataset ds;
        std::string problem = path.stem().string();
        try {
            ds = load_dataset(path);
            problem = ds.name;
        } catch (const std::exception& e) {
            for (Strategy s : spec.strategies) {
                for (Method m : spec.methods) {
                    outcome.failures.push_back({problem, CellKey{problem, s, m, {}}.method_label(), e.what()});
                }
            }
            if (log) log("failed to load " + path.string() + ": " + e.what());
            continue;
        }
        for (int r = 0; r < spec.runs; ++r) {
            const auto seed = split_seed(spec.seed, problem, spec.split_policy, r);
            if (!splits[problem].contains(seed)) splits[problem].emplace(seed, split(ds, seed));
        }
        for (Strategy s : spec.strategies) {
            for (Method m : spec.methods) {
                std::vector<std::optional<double>> sizes{std::nullopt};
                if (is_batch_method(m)) sizes.assign(spec.batch_sizes.begin(), spec.batch_sizes.end());
                for (const auto& b : sizes) {
                    const CellKey cell{problem, s, m, b};
                    for (int r = 0; r < spec.runs; ++r) {
                        if (store.has_run(cell, r)) {
                            ++outcome.runs_skipped;
                            continue;
                        }
                        const auto seed = split_seed(spec.seed, problem, spec.split_policy, r);
                        tasks.push_back({cell, r, &splits[problem].at(seed)});
                    }
                }
            }
        }
    }

    // Time-budgeted campaigns run one run at a time so wall-clock figures stay comparable.
    const int workers = spec.time_budget_seconds ? 1 : std::max(1, spec.workers);
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::set<std::string> failed_cells;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            {
                std::lock_guard lock(mu);
                if (failed_cells.contains(task.cell.problem + "/" + task.cell.cell_label())) continue;
            }
            try {
                const RunConfig cfg = make_run_config(spec, task.cell, task.run_index);
                const RunResult result = run(cfg, *task.data);
                RunSummary summary;
                summary.cell = task.cell;
                summary.run_index = task.run_index;
                summary.seed = cfg.seed;
                summary.split_seed = cfg.split_seed;
                summary.best_expr = result.hall_of_fame.best->to_string();
                summary.val_mse = result.hall_of_fame.validation_mse;
                summary.test_mse = result.test_mse;
                summary.generations = result.generations_completed;
                summary.termination = result.termination;
                summary.training_case_evaluations = result.counters.training_case_evaluations;
                store.save(summary, result.records);
                std::lock_guard lock(mu);
                ++outcome.runs_executed;
                if (log) {
                    log(task.cell.problem + " " + task.cell.cell_label() + " run " + std::to_string(task.run_index) +
                        ": test_mse=" + num(result.test_mse) + " gens=" + std::to_string(result.generations_completed));
                }
            } catch (const std::exception& e) {
                std::lock_guard lock(mu);
                failed_cells.insert(task.cell.problem + "/" + task.cell.cell_label());
                outcome.failures.push_back({task.cell.problem, task.cell.cell_label(), e.what()});
                if (log) log("cell " + task.cell.problem + "/" + task.cell.cell_label() + " failed: " + e.what());
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }

    fs::create_directories(spec.output_dir);
    json failures = json::array();
    for (const auto& f : outcome.failures) {
        failures.push_back({{"problem", f.problem}, {"cell", f.cell}, {"message", f.message}});
    }
    write_text_atomically(spec.output_dir / "failures.json", failures.dump(2) + "\n");

    const auto runs = store.load_all();
    const BudgetPoint final_point{};
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : choose_batch_sizes(runs, final_point)) {
        rows.push_back({c.problem, std::string(strategy_id(c.strategy)), std::string(method_id(c.method)),
                        format_fraction(c.batch_size), num(c.mean_val_mse)});
    }
    write_csv(spec.output_dir / "batch_choice.csv", {"problem", "strategy", "method", "batch_size", "mean_val_mse"},
              rows);
    return outcome;
}

// ---------------------------------------------------------------------------
// Budgets and snapshots

BudgetPoint BudgetPoint::parse(std::string_view text) {
    if (text == "eval" || text == "evaluations") return BudgetPoint{};
    double scale = 1.0;
    if (!text.empty()) {
        switch (text.back()) {
        case 's': scale = 1.0; text.remove_suffix(1); break;
        case 'm': scale = 60.0; text.remove_suffix(1); break;
        case 'h': scale = 3600.0; text.remove_suffix(1); break;
        default: break;
        }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !(v > 0.0)) {
        throw std::invalid_argument("bad budget '" + std::string(text) + "'");
    }
    return BudgetPoint{Kind::kSeconds, v * scale};
}

std::string BudgetPoint::label() const {
    if (kind == Kind::kEvaluations) return "eval";
    if (std::fmod(seconds, 3600.0) == 0.0) return format_fraction(seconds / 3600.0) + "h";
    if (std::fmod(seconds, 60.0) == 0.0) return format_fraction(seconds / 60.0) + "m";
    return format_fraction(seconds) + "s";
}

Snapshot snapshot_at(std::span<const GenerationRecord> records, const BudgetPoint& budget) {
    if (records.empty()) throw std::invalid_argument("snapshot_at: empty log");
    const GenerationRecord* pick = &records.back();
    if (budget.kind == BudgetPoint::Kind::kSeconds) {
        const double limit_ms = budget.seconds * 1000.0;
        if (records.front().elapsed_ms > limit_ms) {
            throw std::invalid_argument("snapshot_at: budget " + budget.label() + " ends before generation 0");
        }
        for (const auto& r : records) {
            if (r.elapsed_ms <= limit_ms) pick = &r;
        }
    }
    return Snapshot{pick->generation, pick->elapsed_ms, pick->val_mse, pick->test_mse, pick->median_tree_size};
}

std::vector<BatchChoice> choose_batch_sizes(std::span<const StoredRun> runs, const BudgetPoint& budget) {
    // (problem, strategy, method) -> batch size -> validation MSEs
    std::map<std::tuple<std::string, Strategy, Method>, std::map<double, std::vector<double>>> groups;
    for (const auto& r : runs) {
        if (!r.summary.cell.batch_size) continue;
        const auto& c = r.summary.cell;
        groups[{c.problem, c.strategy, c.method}][*c.batch_size].push_back(snapshot_at(r.records, budget).val_mse);
    }
    std::vector<BatchChoice> out;
    for (const auto& [key, by_size] : groups) {
        BatchChoice best{std::get<0>(key), std::get<1>(key), std::get<2>(key), 0.0,
                         std::numeric_limits<double>::infinity()};
        for (const auto& [size, vals] : by_size) {
            const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
            if (mean < best.mean_val_mse) {
                best.batch_size = size;
                best.mean_val_mse = mean;
            }
        }
        out.push_back(best);
    }
    return out;
}

MedianTable median_table(std::span<const StoredRun> runs, const BudgetPoint& budget) {
    std::map<std::tuple<std::string, Strategy, Method>, double> chosen;
    for (const auto& c : choose_batch_sizes(runs, budget)) chosen[{c.problem, c.strategy, c.method}] = c.batch_size;

    std::map<std::string, std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>> cells;
    std::set<std::string> labels;
    for (const auto& r : runs) {
        const auto& c = r.summary.cell;
        if (c.batch_size && chosen.at({c.problem, c.strategy, c.method}) != *c.batch_size) continue;
        const Snapshot s = snapshot_at(r.records, budget);
        auto& cell = cells[c.problem][c.method_label()];
        cell.first.push_back(s.test_mse);
        cell.second.push_back(s.median_tree_size);
        labels.insert(c.method_label());
    }
    if (labels.empty()) throw std::invalid_argument("median_table: no methods in results");

    MedianTable t;
    t.methods.assign(labels.begin(), labels.end());
    for (const auto& [problem, by_label] : cells) {
        if (by_label.size() == labels.size()) t.problems.push_back(problem);
    }
    t.test_mse = Matrix(t.problems.size(), t.methods.size());
    t.tree_size = Matrix(t.problems.size(), t.methods.size());
    for (std::size_t p = 0; p < t.problems.size(); ++p) {
        for (std::size_t m = 0; m < t.methods.size(); ++m) {
            const auto& cell = cells.at(t.problems[p]).at(t.methods[m]);
            t.test_mse(p, m) = median(cell.first);
            t.tree_size(p, m) = median(cell.second);
        }
    }
    return t;
}

std::vector<fs::path> emit_reports(std::span<const StoredRun> runs, std::span<const BudgetPoint> budgets,
                                   const fs::path& out_dir) {
    if (budgets.empty()) throw std::invalid_argument("emit_reports: no budget points");
    std::vector<fs::path> written;
    auto matrix_csv = [&](const fs::path& path, const std::vector<std::string>& row_labels,
                          const std::vector<std::string>& col_labels, const Matrix& m, const std::string& corner) {
        std::vector<std::string> header{corner};
        header.insert(header.end(), col_labels.begin(), col_labels.end());
        std::vector<std::vector<std::string>> rows;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            std::vector<std::string> row{row_labels[r]};
            for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(num(m(r, c)));
            rows.push_back(std::move(row));
        }
        write_csv(path, header, rows);
        written.push_back(path);
    };

    std::vector<std::string> ranking_methods;
    std::vector<std::vector<double>> ranking_columns;
    std::vector<std::vector<std::string>> friedman_rows;

    for (const auto& budget : budgets) {
        const std::string tag = budget.label();
        const MedianTable t = median_table(runs, budget);
        matrix_csv(out_dir / ("median_test_mse_" + tag + ".csv"), t.problems, t.methods, t.test_mse, "problem");
        matrix_csv(out_dir / ("median_tree_size_" + tag + ".csv"), t.problems, t.methods, t.tree_size, "problem");

        std::vector<std::vector<std::string>> choice_rows;
        for (const auto& c : choose_batch_sizes(runs, budget)) {
            choice_rows.push_back({c.problem, std::string(strategy_id(c.strategy)), std::string(method_id(c.method)),
                                   format_fraction(c.batch_size), num(c.mean_val_mse)});
        }
        const fs::path choice_path = out_dir / ("batch_choice_" + tag + ".csv");
        write_csv(choice_path, {"problem", "strategy", "method", "batch_size", "mean_val_mse"}, choice_rows);
        written.push_back(choice_path);

        if (t.problems.empty()) continue;
        const RankTable ranks = rank_methods(t.test_mse, t.problems, t.methods);
        matrix_csv(out_dir / ("ranks_" + tag + ".csv"), ranks.problems, ranks.methods, ranks.ranks, "problem");

        std::vector<std::vector<std::string>> dist_rows;
        for (std::size_t m = 0; m < ranks.num_methods(); ++m) {
            for (std::size_t p = 0; p < ranks.num_problems(); ++p) {
                dist_rows.push_back({ranks.methods[m], ranks.problems[p], num(ranks.ranks(p, m))});
            }
        }
        const fs::path dist_path = out_dir / ("rank_distribution_" + tag + ".csv");
        write_csv(dist_path, {"method", "problem", "rank"}, dist_rows);
        written.push_back(dist_path);

        ranking_methods = ranks.methods;
        ranking_columns.push_back(median_ranks(ranks));

        if (ranks.num_problems() >= 2 && ranks.num_methods() >= 2) {
            const FriedmanResult f = friedman_test(ranks);
            friedman_rows.push_back({tag, num(f.statistic), std::to_string(f.degrees_of_freedom), num(f.p_value),
                                     std::to_string(ranks.num_problems()), std::to_string(ranks.num_methods()),
                                     f.p_value < 0.05 ? "1" : "0"});
            matrix_csv(out_dir / ("nemenyi_" + tag + ".csv"), ranks.methods, ranks.methods, nemenyi_posthoc(ranks),
                       "method");
        }
    }

    if (!ranking_columns.empty()) {
        std::vector<std::string> header{"method"};
        for (const auto& b : budgets) header.push_back(b.label());
        std::vector<std::vector<std::string>> rows;
        for (std::size_t m = 0; m < ranking_methods.size(); ++m) {
            std::vector<std::string> row{ranking_methods[m]};
            for (const auto& col : ranking_columns) row.push_back(m < col.size() ? num(col[m]) : "");
            rows.push_back(std::move(row));
        }
        write_csv(out_dir / "median_ranking.csv", header, rows);
        written.push_back(out_dir / "median_ranking.csv");
    }
    write_csv(out_dir / "friedman.csv", {"budget", "statistic", "dof", "p_value", "problems", "methods", "reject"},
              friedman_rows);
    written.push_back(out_dir / "friedman.csv");
    return written;
}

} // namespace lexigp
