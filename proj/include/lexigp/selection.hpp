#pragma once

/// @file selection.hpp
/// @brief Parent selection operators over an ErrorMatrix.
///
/// Tournament and fitness-proportionate selection look only at the per-row
/// mean (aggregate MSE). Lexicase, epsilon-lexicase and epsilon-plexicase use
/// the per-case columns. The batch variants first collapse the columns into
/// per-batch MSE columns and then run tournament or epsilon-lexicase on those.
///
/// Every selector takes the caller's random stream and returns a row index in
/// [0, rows).

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "lexigp/matrix.hpp"
#include "lexigp/numeric.hpp"

namespace lexigp {

enum class Method { kTournament, kFps, kLexicase, kEpsLexicase, kEpsPlexicase, kBatchTournament, kBatchEpsLexicase };

/// Stable identifiers: tourn, fps, lex, eps-lex, eps-plex, batch-tourn, batch-eps-lex.
std::string_view method_id(Method m) noexcept;
Method parse_method(std::string_view id);
bool is_batch_method(Method m) noexcept;

/// How the epsilon of the relaxed pass condition is obtained.
enum class EpsilonPolicy {
    kCandidatePool, ///< MAD of the case's errors over the current pool, per filtering step
    kPopulation,    ///< MAD over the whole population, fixed for the selection event
    kZero,          ///< epsilon = 0 (reduces to plain lexicase)
};

struct SelectionParams {
    std::size_t tournament_size = 5;
    std::size_t batch_tournament_size = 64;
    double batch_fraction = 0.1;
    double alpha = 1.0;
    EpsilonPolicy epsilon_policy = EpsilonPolicy::kCandidatePool;
};

std::vector<double> aggregate_mse(const ErrorMatrix& em);

// --- aggregate-fitness selectors --------------------------------------------

/// Winner among explicit participants: lowest fitness, ties uniform among the
/// distinct tied indices.
std::size_t tournament_winner(std::span<const double> fitness, std::span<const std::size_t> participants, Rng& rng);

/// k participants drawn uniformly with replacement.
std::size_t tournament_select(std::span<const double> fitness, std::size_t k, Rng& rng);

/// Selection probabilities proportional to 1 / MSE. If any MSE is zero, 1e-10
/// is added to every MSE first.
std::vector<double> fps_probabilities(std::span<const double> mse);
std::size_t fps_select(std::span<const double> mse, Rng& rng);

/// Draws an index from a probability vector (need not be exactly normalised).
std::size_t sample_index(std::span<const double> probabilities, Rng& rng);

// --- lexicase family ----------------------------------------------------------

/// Median absolute deviation.
double mad(std::span<const double> values);

/// Per-column MAD over all rows.
std::vector<double> population_epsilons(const ErrorMatrix& em);

/// Record of one lexicase-style selection event.
struct LexicaseTrace {
    std::vector<std::size_t> case_order; ///< cases consumed, in order
    std::vector<std::size_t> survivors;  ///< final candidate pool
    std::size_t selected = 0;
};

/// Filters the full population through `order` with the exact pass condition
/// and returns the surviving pool. Stops early once one candidate remains.
std::vector<std::size_t> lexicase_survivors(const ErrorMatrix& em, std::span<const std::size_t> order);
std::vector<std::size_t> epsilon_lexicase_survivors(const ErrorMatrix& em, std::span<const std::size_t> order,
                                                    EpsilonPolicy policy = EpsilonPolicy::kCandidatePool);

LexicaseTrace lexicase_trace(const ErrorMatrix& em, Rng& rng);
LexicaseTrace epsilon_lexicase_trace(const ErrorMatrix& em, Rng& rng,
                                     EpsilonPolicy policy = EpsilonPolicy::kCandidatePool);

std::size_t lexicase_select(const ErrorMatrix& em, Rng& rng);
std::size_t epsilon_lexicase_select(const ErrorMatrix& em, Rng& rng,
                                    EpsilonPolicy policy = EpsilonPolicy::kCandidatePool);

// --- epsilon-plexicase ------------------------------------------------------

/// w_i^alpha / sum_j w_j^alpha. Computed relative to the largest weight.
std::vector<double> sharpen(std::span<const double> weights, double alpha);

/// Selection distribution over the epsilon-relaxed Pareto boundary.
///
/// Per case, epsilon is the population MAD. Individual i is dominated by j when
/// j is never worse than i by more than epsilon and i is worse than j by more
/// than epsilon on at least one case; dominated individuals get weight 0.
/// A boundary individual beats another boundary individual when it is better by
/// more than epsilon on more cases than the reverse. Its raw weight is its win
/// count plus one; weights are then sharpened by alpha.
std::vector<double> plexicase_probabilities(const ErrorMatrix& em, double alpha);

// --- batches ----------------------------------------------------------------

using Batches = std::vector<std::vector<std::size_t>>;

/// max(1, round(b * n))
std::size_t batch_size_for(std::size_t num_cases, double fraction);

/// Shuffles the cases and cuts them into consecutive groups; the last group
/// may be short.
Batches make_batches(std::span<const std::size_t> case_indices, double fraction, Rng& rng);

/// Population x num_batches matrix of per-batch MSE. Batches hold column
/// indices of `em` and must partition them.
ErrorMatrix batch_error_matrix(const ErrorMatrix& em, const Batches& batches);

/// Per-generation state for batch methods.
struct SelectionContext {
    Method method = Method::kBatchTournament;
    SelectionParams params;
    Batches batches;
    std::size_t cursor = 0; ///< batch used by the next BTSS event
};

/// BTSS: tournament of size params.batch_tournament_size on the batch column
/// at the cursor; the cursor then advances cyclically.
std::size_t batch_tournament_select(SelectionContext& ctx, const ErrorMatrix& batch_em, Rng& rng);

std::size_t batch_epsilon_lexicase_select(const ErrorMatrix& batch_em, Rng& rng,
                                          EpsilonPolicy policy = EpsilonPolicy::kCandidatePool);

/// One generation's worth of selection state for any method. Construction does
/// the per-generation preparation (aggregation, batching, plexicase weights).
class ParentSelector {
  public:
    ParentSelector(Method method, const SelectionParams& params, const ErrorMatrix& em, Rng& rng);

    std::size_t select(Rng& rng);

    Method method() const noexcept { return method_; }
    const std::vector<double>& fitness() const noexcept { return fitness_; }
    const SelectionContext& context() const noexcept { return ctx_; }

  private:
    Method method_;
    SelectionParams params_;
    const ErrorMatrix* em_;
    std::vector<double> fitness_;
    std::vector<double> probabilities_;
    std::discrete_distribution<std::size_t> distribution_;
    std::vector<double> epsilons_;
    SelectionContext ctx_;
    std::optional<ErrorMatrix> batch_em_;
};

} // namespace lexigp
