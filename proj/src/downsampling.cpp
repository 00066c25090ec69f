#include "lexigp/downsampling.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lexigp {

std::string_view strategy_id(Strategy s) noexcept {
    switch (s) {
    case Strategy::kNone: return "nds";
    case Strategy::kRandom: return "rds";
    case Strategy::kInformed: return "ids";
    }
    return "?";
}

Strategy parse_strategy(std::string_view id) {
    for (Strategy s : {Strategy::kNone, Strategy::kRandom, Strategy::kInformed}) {
        if (strategy_id(s) == id) return s;
    }
    throw std::invalid_argument("unknown down-sampling strategy '" + std::string(id) + "'");
}

void DownsampleConfig::validate() const {
    if (!(rate > 0.0 && rate <= 1.0)) throw std::invalid_argument("down-sample rate d must be in (0, 1]");
    if (!(parent_rate > 0.0 && parent_rate <= 1.0)) throw std::invalid_argument("parent rate s must be in (0, 1]");
    if (schedule_interval < 1) throw std::invalid_argument("schedule interval g must be >= 1");
}

std::size_t subset_size(std::size_t num_cases, double rate) {
    const auto size = static_cast<std::size_t>(std::llround(rate * static_cast<double>(num_cases)));
    return std::clamp<std::size_t>(size, 1, std::max<std::size_t>(1, num_cases));
}

std::size_t parent_sample_size(double parent_rate, std::size_t population) {
    // The tolerance absorbs representation error, e.g. 0.01 * 500.
    const double raw = parent_rate * static_cast<double>(population);
    const auto size = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return std::clamp<std::size_t>(size, 1, population);
}

CaseSubset random_subsample(std::size_t num_cases, double rate, Rng& rng) {
    if (num_cases < 1) throw std::invalid_argument("random_subsample: no cases");
    std::vector<std::size_t> all(num_cases);
    std::iota(all.begin(), all.end(), std::size_t{0});
    CaseSubset out;
    out.reserve(subset_size(num_cases, rate));
    std::sample(all.begin(), all.end(), std::back_inserter(out), subset_size(num_cases, rate), rng);
    return out;
}

CaseDistanceMatrix::CaseDistanceMatrix(std::size_t num_cases, std::vector<double> distances, int generation_computed)
    : n_(num_cases), d_(std::move(distances)), generation_(generation_computed) {
    if (d_.size() != n_ * n_) throw std::invalid_argument("CaseDistanceMatrix: size mismatch");
}

CaseDistanceMatrix case_distance_matrix(const Matrix& parent_errors, int generation) {
    if (parent_errors.rows() < 1) throw std::invalid_argument("case_distance_matrix: no parent rows");
    const std::size_t n = parent_errors.cols();
    const std::size_t p = parent_errors.rows();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            double sum = 0.0;
            for (std::size_t r = 0; r < p; ++r) {
                const double diff = parent_errors(r, a) - parent_errors(r, b);
                sum += diff * diff;
            }
            double dist = std::sqrt(sum);
            if (!std::isfinite(dist)) dist = std::numeric_limits<double>::max();
            d[a * n + b] = dist;
            d[b * n + a] = dist;
        }
    }
    return CaseDistanceMatrix(n, std::move(d), generation);
}

CaseSubset farthest_first_from(const CaseDistanceMatrix& dm, std::size_t size, std::size_t start, Rng& rng) {
    const std::size_t n = dm.num_cases();
    if (size < 1 || size > n) throw std::invalid_argument("farthest_first: size out of range");
    if (start >= n) throw std::invalid_argument("farthest_first: start out of range");

    CaseSubset chosen{start};
    std::vector<bool> taken(n, false);
    taken[start] = true;
    std::vector<double> nearest(n);
    for (std::size_t c = 0; c < n; ++c) nearest[c] = dm(c, start);

    std::vector<std::size_t> ties;
    while (chosen.size() < size) {
        double best = -1.0;
        ties.clear();
        for (std::size_t c = 0; c < n; ++c) {
            if (taken[c]) continue;
            if (nearest[c] > best) {
                best = nearest[c];
                ties.assign(1, c);
            } else if (nearest[c] == best) {
                ties.push_back(c);
            }
        }
        const std::size_t next = ties.size() == 1 ? ties.front() : ties[uniform_index(rng, ties.size())];
        chosen.push_back(next);
        taken[next] = true;
        for (std::size_t c = 0; c < n; ++c) nearest[c] = std::min(nearest[c], dm(c, next));
    }
    return chosen;
}

CaseSubset farthest_first_subset(const CaseDistanceMatrix& dm, std::size_t size, Rng& rng) {
    if (dm.num_cases() < 1) throw std::invalid_argument("farthest_first: empty distance matrix");
    const std::size_t start = uniform_index(rng, dm.num_cases());
    return farthest_first_from(dm, size, start, rng);
}

bool distance_recompute_due(const DownsampleConfig& cfg, int generation) noexcept {
    return cfg.strategy == Strategy::kInformed && generation % cfg.schedule_interval == 0;
}

CaseSubset next_subset(const DownsampleConfig& cfg, int generation, std::size_t num_cases, DownsampleState& state,
                       const Matrix* parent_errors, Rng& rng) {
    if (num_cases < 1) throw std::invalid_argument("next_subset: no training cases");
    switch (cfg.strategy) {
    case Strategy::kNone: {
        CaseSubset all(num_cases);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    case Strategy::kRandom: return random_subsample(num_cases, cfg.rate, rng);
    case Strategy::kInformed: break;
    }

    const std::size_t size = subset_size(num_cases, cfg.rate);
    if (distance_recompute_due(cfg, generation) || !state.distances) {
        if (parent_errors == nullptr) {
            throw std::invalid_argument("next_subset: informed down-sampling needs parent errors at generation " +
                                        std::to_string(generation));
        }
        if (parent_errors->cols() != num_cases) throw std::invalid_argument("next_subset: parent error width mismatch");
        state.distances.emplace(case_distance_matrix(*parent_errors, generation));
        state.recompute_generations.push_back(generation);
        state.frozen = farthest_first_subset(*state.distances, size, rng);
        return state.frozen;
    }
    if (cfg.freeze_between_recomputations) return state.frozen;
    return farthest_first_subset(*state.distances, size, rng);
}

} // namespace lexigp
