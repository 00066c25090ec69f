#pragma once

/// @file expr.hpp
/// @brief Expression trees for symbolic regression: representation, random
/// generation, vectorised evaluation and subtree variation.
///
/// Trees are stored as a flat prefix-ordered node list. A subtree rooted at
/// position i occupies the contiguous range [i, subtree_end(i)), which makes
/// subtree extraction and replacement plain vector splices.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexigp/matrix.hpp"
#include "lexigp/numeric.hpp"

namespace lexigp {

enum class Op : std::uint8_t { kFeature, kConstant, kAdd, kSub, kMul, kAq, kSin, kCos, kNeg };

int arity(Op op) noexcept;

/// Name used in s-expressions ("add", "AQ", ...). Terminals have no name.
std::string_view op_name(Op op) noexcept;

/// Prediction substituted for any non-finite model output.
inline constexpr double kPredictionSentinel = 1e30;

/// Maximum depth of any individual admitted to a population.
inline constexpr int kMaxTreeDepth = 17;

struct Node {
    Op op = Op::kConstant;
    std::uint32_t feature = 0; ///< valid when op == kFeature
    double value = 0.0;        ///< valid when op == kConstant

    bool operator==(const Node&) const = default;
};

/// Functions {+, -, *, AQ, sin, cos, neg}, the input features and an
/// ephemeral random constant drawn from {-1, 0, 1}.
class PrimitiveSet {
  public:
    static constexpr std::array<Op, 7> kFunctions{Op::kAdd, Op::kSub, Op::kMul, Op::kAq,
                                                  Op::kSin, Op::kCos, Op::kNeg};
    static constexpr std::array<double, 3> kErcValues{-1.0, 0.0, 1.0};

    explicit PrimitiveSet(std::size_t num_features);

    std::size_t num_features() const noexcept { return num_features_; }
    /// Features plus one ERC slot.
    std::size_t num_terminals() const noexcept { return num_features_ + 1; }

  private:
    std::size_t num_features_;
};

class Expr {
  public:
    static Expr feature(std::uint32_t index);
    static Expr constant(double value);
    static Expr apply(Op op, std::span<const Expr> children);
    static Expr apply(Op op, std::initializer_list<Expr> children);

    /// Builds from a prefix node list; throws std::invalid_argument if the
    /// arities do not describe exactly one complete tree.
    static Expr from_prefix(std::vector<Node> nodes);

    /// Parses the s-expression form produced by to_string().
    static Expr parse(std::string_view text);

    std::span<const Node> nodes() const noexcept { return nodes_; }
    const Node& root() const noexcept { return nodes_.front(); }

    /// Node count.
    std::size_t size() const noexcept { return nodes_.size(); }
    /// Longest root-to-leaf edge count; a lone terminal has depth 0.
    int depth() const;
    /// Depth of every leaf, in prefix order.
    std::vector<int> leaf_depths() const;

    /// One past the last node of the subtree rooted at `index`.
    std::size_t subtree_end(std::size_t index) const;
    Expr subtree(std::size_t index) const;
    Expr replace_subtree(std::size_t index, const Expr& replacement) const;

    /// Largest feature index referenced plus one (0 if none).
    std::size_t required_features() const noexcept;

    std::string to_string() const;

    bool operator==(const Expr&) const = default;

  private:
    explicit Expr(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}
    std::vector<Node> nodes_;
};

struct TreeMetrics {
    int depth = 0;
    std::size_t size = 0;
    bool operator==(const TreeMetrics&) const = default;
};

TreeMetrics tree_metrics(const Expr& expr);

enum class GrowMethod { kFull, kGrow };

Expr generate_tree(const PrimitiveSet& pset, GrowMethod method, int max_depth, Rng& rng);

/// Ramped half-and-half. Tree i (for i < 2*(pop_size/2)) uses the full method
/// when i is even and grow when odd, with depth depth_min + (i/2) mod levels.
/// An odd final tree picks its method by a coin flip.
std::vector<Expr> ramped_half_and_half(const PrimitiveSet& pset, std::size_t pop_size, int depth_min,
                                       int depth_max, Rng& rng);

/// Evaluates on every row of `cases`.
std::vector<double> evaluate(const Expr& expr, const Matrix& cases);
/// Evaluates on the listed rows of `cases` only.
std::vector<double> evaluate(const Expr& expr, const Matrix& cases, std::span<const std::size_t> rows);

inline double analytic_quotient(double a, double b) { return a / std::sqrt(1.0 + b * b); }

/// One-point subtree crossover: a uniformly chosen node of `a` is replaced by a
/// uniformly chosen subtree of `b`. Returns `a` if the child exceeds max_depth.
Expr subtree_crossover(const Expr& a, const Expr& b, int max_depth, Rng& rng);

/// A uniformly chosen node is replaced by a grow tree of depth <= 2. Returns
/// `a` if the result exceeds max_depth.
Expr subtree_mutation(const Expr& a, const PrimitiveSet& pset, int max_depth, Rng& rng);

} // namespace lexigp
