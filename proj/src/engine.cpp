#include "lexigp/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iterator>
#include <numeric>
#include <stdexcept>

namespace lexigp {

void RunConfig::validate() const {
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(crossover_probability) || !in_unit(mutation_probability)) {
        throw std::invalid_argument("RunConfig: probabilities must be in [0, 1]");
    }
    if (population_size < 2) throw std::invalid_argument("RunConfig: population must be >= 2");
    if (base_generations < 1 && !unlimited_generations) throw std::invalid_argument("RunConfig: G must be >= 1");
    if (init_min_depth < 0 || init_min_depth > init_max_depth || init_max_depth > max_depth) {
        throw std::invalid_argument("RunConfig: bad initial depth range");
    }
    if (unlimited_generations && !time_budget_seconds) {
        throw std::invalid_argument("RunConfig: unlimited generations needs a time budget");
    }
    if (time_budget_seconds && !(*time_budget_seconds > 0.0)) {
        throw std::invalid_argument("RunConfig: time budget must be positive");
    }
    downsampling.validate();
}

int RunConfig::generation_limit() const {
    if (unlimited_generations) return std::numeric_limits<int>::max();
    return scale_generations ? generational_limit(base_generations, downsampling) : base_generations;
}

int generational_limit(int base_generations, const DownsampleConfig& cfg) {
    cfg.validate();
    const double g = static_cast<double>(base_generations);
    double limit = g;
    switch (cfg.strategy) {
    case Strategy::kNone: return base_generations;
    case Strategy::kRandom: limit = g / cfg.rate; break;
    case Strategy::kInformed:
        limit = g / (cfg.rate + cfg.parent_rate * (1.0 - cfg.rate) / static_cast<double>(cfg.schedule_interval));
        break;
    }
    // The tolerance absorbs representation error, e.g. 100 / 0.1.
    return static_cast<int>(std::floor(limit + 1e-9));
}

std::string_view termination_id(Termination t) noexcept {
    return t == Termination::kGenerations ? "generations" : "time";
}

bool update_hall_of_fame(HallOfFame& hof, std::span<const Expr> candidates, const Partition& validation,
                         int generation) {
    if (candidates.empty()) throw std::invalid_argument("update_hall_of_fame: no candidates");
    bool replaced = false;
    for (const Expr& c : candidates) {
        const double v = mse(evaluate(c, validation.features), validation.targets);
        if (hof.empty() || v < hof.validation_mse) {
            hof.best = c;
            hof.validation_mse = v;
            hof.generation = generation;
            replaced = true;
        }
    }
    return replaced;
}

namespace {

std::vector<double> subset_squared_errors(const Expr& e, const Partition& train, std::span<const std::size_t> cases) {
    std::vector<double> pred = evaluate(e, train.features, cases);
    std::vector<double> targets(cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i) targets[i] = train.targets[cases[i]];
    return squared_errors(pred, targets);
}

double median_tree_size(std::span<const Expr> population) {
    std::vector<double> sizes;
    sizes.reserve(population.size());
    for (const Expr& e : population) sizes.push_back(static_cast<double>(e.size()));
    return median(std::move(sizes));
}

void check_depth(const Expr& e, int max_depth) {
    if (e.depth() > max_depth) throw std::logic_error("variation produced a tree deeper than the limit");
}

} // namespace

RunResult run(const RunConfig& config, const SplitDataset& data, const GenerationObserver& observer) {
    config.validate();
    if (data.train.size() == 0 || data.validation.size() == 0 || data.test.size() == 0) {
        throw std::invalid_argument("run: train, validation and test partitions must be nonempty");
    }
    using Clock = std::chrono::steady_clock;
    const auto started = Clock::now();
    auto elapsed_ms = [&] { return std::chrono::duration<double, std::milli>(Clock::now() - started).count(); };

    Rng rng(config.seed);
    const PrimitiveSet pset(data.num_features());
    const Partition& train = data.train;
    const std::size_t num_train = train.size();
    const std::size_t pop_size = config.population_size;
    const int limit = config.generation_limit();

    std::vector<std::size_t> all_cases(num_train);
    std::iota(all_cases.begin(), all_cases.end(), std::size_t{0});

    std::vector<Expr> population =
        ramped_half_and_half(pset, pop_size, config.init_min_depth, config.init_max_depth, rng);

    RunResult result;
    DownsampleState ds_state;
    HallOfFame& hof = result.hall_of_fame;
    double hof_test_mse = 0.0;

    for (int gen = 0;; ++gen) {
        Matrix parent_errors;
        const Matrix* parent_errors_ptr = nullptr;
        if (distance_recompute_due(config.downsampling, gen)) {
            const std::size_t probe = parent_sample_size(config.downsampling.parent_rate, pop_size);
            std::vector<std::size_t> idx(pop_size);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            std::vector<std::size_t> sampled;
            std::sample(idx.begin(), idx.end(), std::back_inserter(sampled), probe, rng);
            parent_errors = Matrix(sampled.size(), num_train);
            for (std::size_t r = 0; r < sampled.size(); ++r) {
                const auto se = subset_squared_errors(population[sampled[r]], train, all_cases);
                std::copy(se.begin(), se.end(), parent_errors.row(r).begin());
            }
            parent_errors_ptr = &parent_errors;
            const auto evals = static_cast<std::uint64_t>(sampled.size() * num_train);
            result.counters.training_case_evaluations += evals;
            result.counters.parent_probe_evaluations += evals;
            result.counters.distance_recompute_generations.push_back(gen);
            result.counters.parent_probe_sizes.push_back(sampled.size());
        }

        const CaseSubset subset = next_subset(config.downsampling, gen, num_train, ds_state, parent_errors_ptr, rng);

        Matrix errors(pop_size, subset.size());
        for (std::size_t i = 0; i < pop_size; ++i) {
            const auto se = subset_squared_errors(population[i], train, subset);
            std::copy(se.begin(), se.end(), errors.row(i).begin());
        }
        result.counters.training_case_evaluations += static_cast<std::uint64_t>(pop_size * subset.size());
        const ErrorMatrix em(std::move(errors));
        const std::vector<double> fitness = aggregate_mse(em);

        const auto best = static_cast<std::size_t>(
            std::distance(fitness.begin(), std::min_element(fitness.begin(), fitness.end())));
        result.counters.validation_case_evaluations += data.validation.size();
        if (update_hall_of_fame(hof, std::span<const Expr>(&population[best], 1), data.validation, gen)) {
            hof_test_mse = mse(evaluate(*hof.best, data.test.features), data.test.targets);
        }

        GenerationRecord rec;
        rec.generation = gen;
        rec.elapsed_ms = elapsed_ms();
        rec.val_mse = hof.validation_mse;
        rec.test_mse = hof_test_mse;
        rec.median_tree_size = median_tree_size(population);
        rec.subset_size = subset.size();
        result.records.push_back(rec);
        if (observer) observer(rec, population);

        if (gen >= limit) {
            result.termination = Termination::kGenerations;
            result.generations_completed = gen;
            break;
        }
        if (config.time_budget_seconds && rec.elapsed_ms >= *config.time_budget_seconds * 1000.0) {
            result.termination = Termination::kTime;
            result.generations_completed = gen;
            break;
        }

        ParentSelector selector(config.method, config.selection, em, rng);
        std::vector<Expr> offspring;
        offspring.reserve(pop_size);
        while (offspring.size() < pop_size) {
            const Expr& first = population[selector.select(rng)];
            Expr child = first;
            if (uniform_unit(rng) < config.crossover_probability) {
                const Expr& second = population[selector.select(rng)];
                child = subtree_crossover(first, second, config.max_depth, rng);
            }
            if (uniform_unit(rng) < config.mutation_probability) {
                child = subtree_mutation(child, pset, config.max_depth, rng);
            }
            check_depth(child, config.max_depth);
            offspring.push_back(std::move(child));
        }
        population = std::move(offspring);
    }

    result.test_mse = hof_test_mse;
    return result;
}

} // namespace lexigp
