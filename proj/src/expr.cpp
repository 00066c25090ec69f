#include "lexigp/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>
#include <stdexcept>

namespace lexigp {

int arity(Op op) noexcept {
    switch (op) {
    case Op::kFeature:
    case Op::kConstant: return 0;
    case Op::kSin:
    case Op::kCos:
    case Op::kNeg: return 1;
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kAq: return 2;
    }
    return 0;
}

std::string_view op_name(Op op) noexcept {
    switch (op) {
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kAq: return "AQ";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kNeg: return "neg";
    case Op::kFeature:
    case Op::kConstant: break;
    }
    return {};
}

PrimitiveSet::PrimitiveSet(std::size_t num_features) : num_features_(num_features) {}

// ---------------------------------------------------------------------------
// Expr

Expr Expr::feature(std::uint32_t index) { return Expr({Node{Op::kFeature, index, 0.0}}); }

Expr Expr::constant(double value) { return Expr({Node{Op::kConstant, 0, value}}); }

Expr Expr::apply(Op op, std::span<const Expr> children) {
    if (arity(op) == 0 || static_cast<std::size_t>(arity(op)) != children.size()) {
        throw std::invalid_argument("Expr::apply: child count does not match arity");
    }
    std::vector<Node> nodes{Node{op, 0, 0.0}};
    for (const Expr& c : children) nodes.insert(nodes.end(), c.nodes_.begin(), c.nodes_.end());
    return Expr(std::move(nodes));
}

Expr Expr::apply(Op op, std::initializer_list<Expr> children) {
    return apply(op, std::span<const Expr>(children.begin(), children.size()));
}

Expr Expr::from_prefix(std::vector<Node> nodes) {
    // Each node fills one open slot and opens arity(op) new ones.
    std::size_t open = 1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (open == 0) throw std::invalid_argument("Expr::from_prefix: trailing nodes");
        open += static_cast<std::size_t>(arity(nodes[i].op));
        --open;
    }
    if (open != 0 || nodes.empty()) throw std::invalid_argument("Expr::from_prefix: incomplete tree");
    return Expr(std::move(nodes));
}

std::size_t Expr::subtree_end(std::size_t index) const {
    std::size_t open = 1;
    std::size_t i = index;
    while (open > 0) {
        open += static_cast<std::size_t>(arity(nodes_[i].op));
        --open;
        ++i;
    }
    return i;
}

Expr Expr::subtree(std::size_t index) const {
    const auto end = subtree_end(index);
    return Expr(std::vector<Node>(nodes_.begin() + static_cast<std::ptrdiff_t>(index),
                                  nodes_.begin() + static_cast<std::ptrdiff_t>(end)));
}

Expr Expr::replace_subtree(std::size_t index, const Expr& replacement) const {
    const auto end = subtree_end(index);
    std::vector<Node> out;
    out.reserve(nodes_.size() - (end - index) + replacement.size());
    out.insert(out.end(), nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(index));
    out.insert(out.end(), replacement.nodes_.begin(), replacement.nodes_.end());
    out.insert(out.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(end), nodes_.end());
    return Expr(std::move(out));
}

std::vector<int> Expr::leaf_depths() const {
    std::vector<int> leaves;
    std::vector<int> pending; // depths of slots still to be filled, top = next
    pending.push_back(0);
    for (const Node& n : nodes_) {
        const int d = pending.back();
        pending.pop_back();
        const int a = arity(n.op);
        if (a == 0) leaves.push_back(d);
        for (int k = 0; k < a; ++k) pending.push_back(d + 1);
    }
    return leaves;
}

int Expr::depth() const {
    int best = 0;
    std::vector<int> pending{0};
    for (const Node& n : nodes_) {
        const int d = pending.back();
        pending.pop_back();
        best = std::max(best, d);
        for (int k = 0; k < arity(n.op); ++k) pending.push_back(d + 1);
    }
    return best;
}

std::size_t Expr::required_features() const noexcept {
    std::size_t out = 0;
    for (const Node& n : nodes_) {
        if (n.op == Op::kFeature) out = std::max<std::size_t>(out, n.feature + 1);
    }
    return out;
}

namespace {

void format_double(std::string& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

void write_sexpr(std::span<const Node> nodes, std::size_t& pos, std::string& out) {
    const Node& n = nodes[pos++];
    switch (n.op) {
    case Op::kFeature:
        out += 'x';
        out += std::to_string(n.feature);
        return;
    case Op::kConstant: format_double(out, n.value); return;
    default: break;
    }
    out += '(';
    out += op_name(n.op);
    for (int k = 0; k < arity(n.op); ++k) {
        out += ' ';
        write_sexpr(nodes, pos, out);
    }
    out += ')';
}

class SexprParser {
  public:
    explicit SexprParser(std::string_view text) : text_(text) {}

    std::vector<Node> parse() {
        std::vector<Node> nodes;
        parse_node(nodes);
        skip_space();
        if (pos_ != text_.size()) fail("trailing characters");
        return nodes;
    }

  private:
    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("Expr::parse: " + what + " at offset " + std::to_string(pos_));
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string_view token() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
               text_[pos_] != '(' && text_[pos_] != ')') {
            ++pos_;
        }
        if (start == pos_) fail("expected token");
        return text_.substr(start, pos_ - start);
    }

    void parse_node(std::vector<Node>& nodes) {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end");
        if (text_[pos_] == '(') {
            ++pos_;
            const std::string_view name = token();
            Op op{};
            bool found = false;
            for (Op f : PrimitiveSet::kFunctions) {
                if (op_name(f) == name) {
                    op = f;
                    found = true;
                }
            }
            if (!found) fail("unknown function '" + std::string(name) + "'");
            nodes.push_back(Node{op, 0, 0.0});
            for (int k = 0; k < arity(op); ++k) parse_node(nodes);
            skip_space();
            if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
            ++pos_;
            return;
        }
        const std::string_view tok = token();
        if (tok.front() == 'x') {
            std::uint32_t idx = 0;
            auto [p, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), idx);
            if (ec != std::errc{} || p != tok.data() + tok.size()) fail("bad feature '" + std::string(tok) + "'");
            nodes.push_back(Node{Op::kFeature, idx, 0.0});
            return;
        }
        double v = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || p != tok.data() + tok.size()) fail("bad constant '" + std::string(tok) + "'");
        nodes.push_back(Node{Op::kConstant, 0, v});
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace

std::string Expr::to_string() const {
    std::string out;
    std::size_t pos = 0;
    write_sexpr(nodes_, pos, out);
    return out;
}

Expr Expr::parse(std::string_view text) { return from_prefix(SexprParser(text).parse()); }

TreeMetrics tree_metrics(const Expr& expr) { return {expr.depth(), expr.size()}; }

// ---------------------------------------------------------------------------
// Generation

namespace {

Node random_terminal(const PrimitiveSet& pset, std::size_t choice, Rng& rng) {
    if (choice < pset.num_features()) return Node{Op::kFeature, static_cast<std::uint32_t>(choice), 0.0};
    const auto& erc = PrimitiveSet::kErcValues;
    return Node{Op::kConstant, 0, erc[uniform_index(rng, erc.size())]};
}

void grow_into(std::vector<Node>& out, const PrimitiveSet& pset, GrowMethod method, int depth, int max_depth,
               Rng& rng) {
    const std::size_t num_functions = PrimitiveSet::kFunctions.size();
    Op op;
    if (depth >= max_depth) {
        out.push_back(random_terminal(pset, uniform_index(rng, pset.num_terminals()), rng));
        return;
    }
    if (method == GrowMethod::kFull) {
        op = PrimitiveSet::kFunctions[uniform_index(rng, num_functions)];
    } else {
        const std::size_t pick = uniform_index(rng, num_functions + pset.num_terminals());
        if (pick >= num_functions) {
            out.push_back(random_terminal(pset, pick - num_functions, rng));
            return;
        }
        op = PrimitiveSet::kFunctions[pick];
    }
    out.push_back(Node{op, 0, 0.0});
    for (int k = 0; k < arity(op); ++k) grow_into(out, pset, method, depth + 1, max_depth, rng);
}

} // namespace

Expr generate_tree(const PrimitiveSet& pset, GrowMethod method, int max_depth, Rng& rng) {
    if (max_depth < 0) throw std::invalid_argument("generate_tree: max_depth must be >= 0");
    std::vector<Node> nodes;
    grow_into(nodes, pset, method, 0, max_depth, rng);
    return Expr::from_prefix(std::move(nodes));
}

std::vector<Expr> ramped_half_and_half(const PrimitiveSet& pset, std::size_t pop_size, int depth_min,
                                       int depth_max, Rng& rng) {
    if (pop_size < 1) throw std::invalid_argument("ramped_half_and_half: pop_size must be >= 1");
    if (depth_min < 0 || depth_min > depth_max) {
        throw std::invalid_argument("ramped_half_and_half: need 0 <= depth_min <= depth_max");
    }
    const auto levels = static_cast<std::size_t>(depth_max - depth_min + 1);
    const std::size_t paired = 2 * (pop_size / 2);
    std::vector<Expr> out;
    out.reserve(pop_size);
    for (std::size_t i = 0; i < paired; ++i) {
        const int d = depth_min + static_cast<int>((i / 2) % levels);
        out.push_back(generate_tree(pset, i % 2 == 0 ? GrowMethod::kFull : GrowMethod::kGrow, d, rng));
    }
    if (paired < pop_size) {
        const int d = depth_min + static_cast<int>((paired / 2) % levels);
        const GrowMethod m = uniform_index(rng, 2) == 0 ? GrowMethod::kFull : GrowMethod::kGrow;
        out.push_back(generate_tree(pset, m, d, rng));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

std::vector<double> evaluate(const Expr& expr, const Matrix& cases, std::span<const std::size_t> rows) {
    const std::size_t m = rows.size();
    const auto nodes = expr.nodes();
    std::vector<std::vector<double>> stack;
    std::vector<std::vector<double>> spare;
    auto fresh = [&]() {
        if (spare.empty()) return std::vector<double>(m);
        auto v = std::move(spare.back());
        spare.pop_back();
        return v;
    };

    for (std::size_t i = nodes.size(); i-- > 0;) {
        const Node& n = nodes[i];
        switch (n.op) {
        case Op::kFeature: {
            if (n.feature >= cases.cols()) throw std::invalid_argument("evaluate: feature index out of range");
            auto v = fresh();
            for (std::size_t r = 0; r < m; ++r) v[r] = cases(rows[r], n.feature);
            stack.push_back(std::move(v));
            break;
        }
        case Op::kConstant: {
            auto v = fresh();
            std::fill(v.begin(), v.end(), n.value);
            stack.push_back(std::move(v));
            break;
        }
        case Op::kSin:
            for (double& x : stack.back()) x = std::sin(x);
            break;
        case Op::kCos:
            for (double& x : stack.back()) x = std::cos(x);
            break;
        case Op::kNeg:
            for (double& x : stack.back()) x = -x;
            break;
        default: {
            // Children were pushed last-first, so the top is the left operand.
            std::vector<double> lhs = std::move(stack.back());
            stack.pop_back();
            std::vector<double>& rhs = stack.back();
            switch (n.op) {
            case Op::kAdd:
                for (std::size_t r = 0; r < m; ++r) rhs[r] = lhs[r] + rhs[r];
                break;
            case Op::kSub:
                for (std::size_t r = 0; r < m; ++r) rhs[r] = lhs[r] - rhs[r];
                break;
            case Op::kMul:
                for (std::size_t r = 0; r < m; ++r) rhs[r] = lhs[r] * rhs[r];
                break;
            case Op::kAq:
                for (std::size_t r = 0; r < m; ++r) rhs[r] = analytic_quotient(lhs[r], rhs[r]);
                break;
            default: break;
            }
            spare.push_back(std::move(lhs));
            break;
        }
        }
    }
    std::vector<double> out = std::move(stack.back());
    for (double& x : out) {
        if (!std::isfinite(x)) x = kPredictionSentinel;
    }
    return out;
}

std::vector<double> evaluate(const Expr& expr, const Matrix& cases) {
    std::vector<std::size_t> rows(cases.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return evaluate(expr, cases, rows);
}

// ---------------------------------------------------------------------------
// Variation

Expr subtree_crossover(const Expr& a, const Expr& b, int max_depth, Rng& rng) {
    const std::size_t at = uniform_index(rng, a.size());
    const std::size_t from = uniform_index(rng, b.size());
    Expr child = a.replace_subtree(at, b.subtree(from));
    if (child.depth() > max_depth) return a;
    return child;
}

Expr subtree_mutation(const Expr& a, const PrimitiveSet& pset, int max_depth, Rng& rng) {
    const std::size_t at = uniform_index(rng, a.size());
    const Expr replacement = generate_tree(pset, GrowMethod::kGrow, 2, rng);
    Expr child = a.replace_subtree(at, replacement);
    if (child.depth() > max_depth) return a;
    return child;
}

} // namespace lexigp
