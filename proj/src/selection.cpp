#include "lexigp/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace lexigp {

namespace {

constexpr double kFpsZeroShift = 1e-10;

std::vector<std::size_t> iota_vector(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

} // namespace

// ---------------------------------------------------------------------------
// ErrorMatrix

ErrorMatrix::ErrorMatrix(std::size_t rows, std::size_t cols, std::vector<double> errors)
    : m_(rows, cols, std::move(errors)) {
    validate();
}

ErrorMatrix::ErrorMatrix(Matrix errors) : m_(std::move(errors)) { validate(); }

void ErrorMatrix::validate() const {
    if (m_.rows() < 1 || m_.cols() < 1) throw std::invalid_argument("ErrorMatrix: needs at least one row and column");
    for (const double e : m_.values()) {
        if (!std::isfinite(e) || e < 0.0) throw std::invalid_argument("ErrorMatrix: entries must be finite and >= 0");
    }
}

ErrorMatrix ErrorMatrix::scaled(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("ErrorMatrix::scaled: factor must be > 0");
    std::vector<double> v(m_.values().begin(), m_.values().end());
    for (double& e : v) e *= factor;
    return ErrorMatrix(rows(), cols(), std::move(v));
}

// ---------------------------------------------------------------------------
// Method ids

std::string_view method_id(Method m) noexcept {
    switch (m) {
    case Method::kTournament: return "tourn";
    case Method::kFps: return "fps";
    case Method::kLexicase: return "lex";
    case Method::kEpsLexicase: return "eps-lex";
    case Method::kEpsPlexicase: return "eps-plex";
    case Method::kBatchTournament: return "batch-tourn";
    case Method::kBatchEpsLexicase: return "batch-eps-lex";
    }
    return "?";
}

Method parse_method(std::string_view id) {
    for (Method m : {Method::kTournament, Method::kFps, Method::kLexicase, Method::kEpsLexicase, Method::kEpsPlexicase,
                     Method::kBatchTournament, Method::kBatchEpsLexicase}) {
        if (method_id(m) == id) return m;
    }
    throw std::invalid_argument("unknown selection method '" + std::string(id) + "'");
}

bool is_batch_method(Method m) noexcept { return m == Method::kBatchTournament || m == Method::kBatchEpsLexicase; }

// ---------------------------------------------------------------------------
// Aggregate selectors

std::vector<double> aggregate_mse(const ErrorMatrix& em) {
    std::vector<double> out(em.rows());
    for (std::size_t i = 0; i < em.rows(); ++i) {
        const auto r = em.row(i);
        out[i] = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(em.cols());
    }
    return out;
}

std::size_t tournament_winner(std::span<const double> fitness, std::span<const std::size_t> participants, Rng& rng) {
    if (participants.empty()) throw std::invalid_argument("tournament_winner: no participants");
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> tied;
    for (const std::size_t p : participants) {
        if (fitness[p] < best) {
            best = fitness[p];
            tied.assign(1, p);
        } else if (fitness[p] == best && std::find(tied.begin(), tied.end(), p) == tied.end()) {
            tied.push_back(p);
        }
    }
    if (tied.empty()) return participants.front(); // all NaN; ErrorMatrix never produces this
    return tied.size() == 1 ? tied.front() : tied[uniform_index(rng, tied.size())];
}

std::size_t tournament_select(std::span<const double> fitness, std::size_t k, Rng& rng) {
    if (fitness.empty()) throw std::invalid_argument("tournament_select: empty population");
    if (k < 1) throw std::invalid_argument("tournament_select: k must be >= 1");
    std::vector<std::size_t> participants(k);
    for (auto& p : participants) p = uniform_index(rng, fitness.size());
    return tournament_winner(fitness, participants, rng);
}

std::vector<double> fps_probabilities(std::span<const double> mse) {
    if (mse.empty()) throw std::invalid_argument("fps: empty population");
    const bool has_zero = std::any_of(mse.begin(), mse.end(), [](double v) { return v == 0.0; });
    const double shift = has_zero ? kFpsZeroShift : 0.0;
    std::vector<double> p(mse.size());
    double total = 0.0;
    for (std::size_t i = 0; i < mse.size(); ++i) {
        p[i] = 1.0 / (mse[i] + shift);
        total += p[i];
    }
    for (double& v : p) v /= total;
    return p;
}

std::size_t sample_index(std::span<const double> probabilities, Rng& rng) {
    if (probabilities.empty()) throw std::invalid_argument("sample_index: empty distribution");
    std::discrete_distribution<std::size_t> dist(probabilities.begin(), probabilities.end());
    return dist(rng);
}

std::size_t fps_select(std::span<const double> mse, Rng& rng) { return sample_index(fps_probabilities(mse), rng); }

// ---------------------------------------------------------------------------
// Lexicase family

double mad(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mad: empty input");
    const double m = median(values);
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - m);
    return median(std::move(dev));
}

std::vector<double> population_epsilons(const ErrorMatrix& em) {
    std::vector<double> eps(em.cols());
    for (std::size_t t = 0; t < em.cols(); ++t) eps[t] = mad(em.matrix().column(t));
    return eps;
}

namespace {

enum class PassRule { kExact, kEpsilon };

struct FilterSpec {
    PassRule rule = PassRule::kExact;
    EpsilonPolicy policy = EpsilonPolicy::kCandidatePool;
    const std::vector<double>* population_eps = nullptr;
};

// Keeps the pool members that pass case t.
void filter_step(const ErrorMatrix& em, std::vector<std::size_t>& pool, std::size_t t, const FilterSpec& spec,
                 std::vector<double>& scratch) {
    double best = std::numeric_limits<double>::infinity();
    for (const std::size_t i : pool) best = std::min(best, em(i, t));

    double threshold = best;
    if (spec.rule == PassRule::kEpsilon) {
        double eps = 0.0;
        switch (spec.policy) {
        case EpsilonPolicy::kCandidatePool:
            scratch.clear();
            for (const std::size_t i : pool) scratch.push_back(em(i, t));
            eps = mad(scratch);
            break;
        case EpsilonPolicy::kPopulation: eps = (*spec.population_eps)[t]; break;
        case EpsilonPolicy::kZero: eps = 0.0; break;
        }
        threshold = best + eps;
    }
    std::erase_if(pool, [&](std::size_t i) { return em(i, t) > threshold; });
}

std::vector<std::size_t> survivors_for_order(const ErrorMatrix& em, std::span<const std::size_t> order,
                                             const FilterSpec& spec) {
    std::vector<std::size_t> pool = iota_vector(em.rows());
    std::vector<double> scratch;
    for (std::size_t k = 0; k < order.size() && pool.size() > 1; ++k) {
        if (order[k] >= em.cols()) throw std::invalid_argument("lexicase: case index out of range");
        filter_step(em, pool, order[k], spec, scratch);
    }
    return pool;
}

// Cases are shuffled lazily: each step draws the next case uniformly from the
// ones not yet used, which yields a uniformly random permutation prefix.
LexicaseTrace run_lexicase(const ErrorMatrix& em, Rng& rng, const FilterSpec& spec) {
    LexicaseTrace trace;
    std::vector<std::size_t> pool = iota_vector(em.rows());
    std::vector<std::size_t> cases = iota_vector(em.cols());
    std::vector<double> scratch;
    std::size_t used = 0;
    while (used < cases.size() && pool.size() > 1) {
        const std::size_t j = used + uniform_index(rng, cases.size() - used);
        std::swap(cases[used], cases[j]);
        filter_step(em, pool, cases[used], spec, scratch);
        ++used;
    }
    cases.resize(used);
    trace.case_order = std::move(cases);
    trace.selected = pool.size() == 1 ? pool.front() : pool[uniform_index(rng, pool.size())];
    trace.survivors = std::move(pool);
    return trace;
}

FilterSpec epsilon_spec(EpsilonPolicy policy, const std::vector<double>* population_eps) {
    return FilterSpec{PassRule::kEpsilon, policy, population_eps};
}

} // namespace

std::vector<std::size_t> lexicase_survivors(const ErrorMatrix& em, std::span<const std::size_t> order) {
    return survivors_for_order(em, order, FilterSpec{});
}

std::vector<std::size_t> epsilon_lexicase_survivors(const ErrorMatrix& em, std::span<const std::size_t> order,
                                                    EpsilonPolicy policy) {
    std::vector<double> eps;
    if (policy == EpsilonPolicy::kPopulation) eps = population_epsilons(em);
    return survivors_for_order(em, order, epsilon_spec(policy, &eps));
}

LexicaseTrace lexicase_trace(const ErrorMatrix& em, Rng& rng) { return run_lexicase(em, rng, FilterSpec{}); }

LexicaseTrace epsilon_lexicase_trace(const ErrorMatrix& em, Rng& rng, EpsilonPolicy policy) {
    std::vector<double> eps;
    if (policy == EpsilonPolicy::kPopulation) eps = population_epsilons(em);
    return run_lexicase(em, rng, epsilon_spec(policy, &eps));
}

std::size_t lexicase_select(const ErrorMatrix& em, Rng& rng) { return lexicase_trace(em, rng).selected; }

std::size_t epsilon_lexicase_select(const ErrorMatrix& em, Rng& rng, EpsilonPolicy policy) {
    return epsilon_lexicase_trace(em, rng, policy).selected;
}

// ---------------------------------------------------------------------------
// epsilon-plexicase

std::vector<double> sharpen(std::span<const double> weights, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("sharpen: alpha must be > 0");
    if (weights.empty()) return {};
    const double top = *std::max_element(weights.begin(), weights.end());
    std::vector<double> out(weights.size(), 0.0);
    if (!(top > 0.0)) throw std::invalid_argument("sharpen: need at least one positive weight");
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) out[i] = std::pow(weights[i] / top, alpha);
        total += out[i];
    }
    for (double& w : out) w /= total;
    return out;
}

std::vector<double> plexicase_probabilities(const ErrorMatrix& em, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("plexicase: alpha must be > 0");
    const std::size_t n = em.rows();
    const std::size_t m = em.cols();
    const std::vector<double> eps = population_epsilons(em);

    // better(i, j): cases where i beats j by more than epsilon.
    std::vector<std::size_t> better(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ri = em.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto rj = em.row(j);
            std::size_t ij = 0;
            std::size_t ji = 0;
            for (std::size_t t = 0; t < m; ++t) {
                if (ri[t] + eps[t] < rj[t]) {
                    ++ij;
                } else if (rj[t] + eps[t] < ri[t]) {
                    ++ji;
                }
            }
            better[i * n + j] = ij;
            better[j * n + i] = ji;
        }
    }

    std::vector<bool> boundary(n, true);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n && boundary[i]; ++j) {
            if (j != i && better[i * n + j] == 0 && better[j * n + i] > 0) boundary[i] = false;
        }
    }
    if (std::none_of(boundary.begin(), boundary.end(), [](bool b) { return b; })) {
        // Relaxed dominance is not transitive, so a full cycle is possible.
        boundary.assign(n, true);
    }

    std::vector<double> weights(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!boundary[i]) continue;
        std::size_t wins = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && boundary[j] && better[i * n + j] > better[j * n + i]) ++wins;
        }
        weights[i] = static_cast<double>(wins + 1);
    }
    return sharpen(weights, alpha);
}

// ---------------------------------------------------------------------------
// Batches

std::size_t batch_size_for(std::size_t num_cases, double fraction) {
    const auto size = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(num_cases)));
    return std::max<std::size_t>(1, size);
}

Batches make_batches(std::span<const std::size_t> case_indices, double fraction, Rng& rng) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("make_batches: need 0 < b <= 1");
    if (case_indices.empty()) throw std::invalid_argument("make_batches: no cases");
    std::vector<std::size_t> cases(case_indices.begin(), case_indices.end());
    std::shuffle(cases.begin(), cases.end(), rng);
    const std::size_t size = batch_size_for(cases.size(), fraction);
    Batches out;
    for (std::size_t start = 0; start < cases.size(); start += size) {
        const std::size_t end = std::min(cases.size(), start + size);
        out.emplace_back(cases.begin() + static_cast<std::ptrdiff_t>(start),
                         cases.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

ErrorMatrix batch_error_matrix(const ErrorMatrix& em, const Batches& batches) {
    if (batches.empty()) throw std::invalid_argument("batch_error_matrix: no batches");
    Matrix out(em.rows(), batches.size());
    for (std::size_t b = 0; b < batches.size(); ++b) {
        // Summing in ascending column order keeps a single all-cases batch
        // bit-identical to aggregate_mse.
        std::vector<std::size_t> cols = batches[b];
        if (cols.empty()) throw std::invalid_argument("batch_error_matrix: empty batch");
        std::sort(cols.begin(), cols.end());
        for (std::size_t i = 0; i < em.rows(); ++i) {
            double sum = 0.0;
            for (const std::size_t c : cols) sum += em(i, c);
            out(i, b) = sum / static_cast<double>(cols.size());
        }
    }
    return ErrorMatrix(std::move(out));
}

std::size_t batch_tournament_select(SelectionContext& ctx, const ErrorMatrix& batch_em, Rng& rng) {
    if (ctx.cursor >= batch_em.cols()) throw std::invalid_argument("batch_tournament_select: cursor out of range");
    const std::vector<double> fitness = batch_em.matrix().column(ctx.cursor);
    ctx.cursor = (ctx.cursor + 1) % batch_em.cols();
    return tournament_select(fitness, ctx.params.batch_tournament_size, rng);
}

std::size_t batch_epsilon_lexicase_select(const ErrorMatrix& batch_em, Rng& rng, EpsilonPolicy policy) {
    return epsilon_lexicase_select(batch_em, rng, policy);
}

// ---------------------------------------------------------------------------
// ParentSelector

namespace {

class SelectorError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

} // namespace

ParentSelector::ParentSelector(Method method, const SelectionParams& params, const ErrorMatrix& em, Rng& rng)
    : method_(method), params_(params), em_(&em), fitness_(aggregate_mse(em)) {
    if (params.tournament_size < 1 || params.batch_tournament_size < 1) {
        throw SelectorError("ParentSelector: tournament sizes must be >= 1");
    }
    if (!(params.alpha > 0.0)) throw SelectorError("ParentSelector: alpha must be > 0");
    if (!(params.batch_fraction > 0.0 && params.batch_fraction <= 1.0)) {
        throw SelectorError("ParentSelector: batch fraction must be in (0, 1]");
    }
    ctx_.method = method;
    ctx_.params = params;
    switch (method) {
    case Method::kFps: probabilities_ = fps_probabilities(fitness_); break;
    case Method::kEpsPlexicase: probabilities_ = plexicase_probabilities(em, params.alpha); break;
    case Method::kEpsLexicase:
        if (params.epsilon_policy == EpsilonPolicy::kPopulation) epsilons_ = population_epsilons(em);
        break;
    case Method::kBatchTournament:
    case Method::kBatchEpsLexicase: {
        const auto cols = iota_vector(em.cols());
        ctx_.batches = make_batches(cols, params.batch_fraction, rng);
        ctx_.cursor = 0;
        batch_em_.emplace(batch_error_matrix(em, ctx_.batches));
        if (method == Method::kBatchEpsLexicase && params.epsilon_policy == EpsilonPolicy::kPopulation) {
            epsilons_ = population_epsilons(*batch_em_);
        }
        break;
    }
    default: break;
    }
    if (!probabilities_.empty()) {
        distribution_ = std::discrete_distribution<std::size_t>(probabilities_.begin(), probabilities_.end());
    }
}

std::size_t ParentSelector::select(Rng& rng) {
    switch (method_) {
    case Method::kTournament: return tournament_select(fitness_, params_.tournament_size, rng);
    case Method::kFps:
    case Method::kEpsPlexicase: return distribution_(rng);
    case Method::kLexicase: return run_lexicase(*em_, rng, FilterSpec{}).selected;
    case Method::kEpsLexicase:
        return run_lexicase(*em_, rng, epsilon_spec(params_.epsilon_policy, &epsilons_)).selected;
    case Method::kBatchTournament: return batch_tournament_select(ctx_, *batch_em_, rng);
    case Method::kBatchEpsLexicase:
        return run_lexicase(*batch_em_, rng, epsilon_spec(params_.epsilon_policy, &epsilons_)).selected;
    }
    throw SelectorError("ParentSelector: unknown method");
}

} // namespace lexigp
