#pragma once

#include "rational.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gdyn {

struct ContextError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Letter {
    NodeId tail;
    NodeId head;

    bool is_loop() const { return tail == head; }
    Letter swapped() const { return {head, tail}; }
    friend auto operator<=>(const Letter&, const Letter&) = default;
    friend bool operator==(const Letter&, const Letter&) = default;
};

using Word = std::vector<Letter>;
using Edge = std::pair<NodeId, NodeId>;

inline std::string to_string(const Letter& l) { return "l(" + l.tail.str() + "," + l.head.str() + ")"; }

inline std::string to_string(const Word& w) {
    if (w.empty()) return "1";
    std::string s;
    for (const auto& l : w) s += to_string(l);
    return s;
}

enum class Direction { Ascending, Descending };

// Node set, edge set and the components of the generated equivalence relation.
// Immutable once built. A linear order stores its nodes in ⪯-ascending order.
class EdgeContext {
public:
    static EdgeContext from_edges(std::vector<NodeId> nodes, const std::vector<Edge>& edges) {
        EdgeContext c;
        c.init_nodes(std::move(nodes));
        for (const auto& [u, v] : edges) {
            if (!c.has_node(u) || !c.has_node(v))
                throw ContextError("edge (" + u.str() + "," + v.str() + ") references an unknown node");
            c.edges_.insert({u, v});
        }
        c.build_components();
        return c;
    }

    // E = Ω × Ω.
    static EdgeContext complete(std::vector<NodeId> nodes) {
        EdgeContext c;
        c.init_nodes(std::move(nodes));
        c.complete_ = true;
        c.build_components();
        return c;
    }

    // E = {(u, v) : u ⪯ v}; `order` lists the nodes ⪯-ascending.
    static EdgeContext linear_order(std::vector<NodeId> order) {
        EdgeContext c;
        c.init_nodes(std::move(order));
        c.linear_ = true;
        c.build_components();
        return c;
    }

    static EdgeContext linear_order(std::vector<NodeId> keys, Direction dir) {
        std::sort(keys.begin(), keys.end());
        if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) throw ContextError("duplicate node key");
        if (dir == Direction::Descending) std::reverse(keys.begin(), keys.end());
        return linear_order(std::move(keys));
    }

    const std::vector<NodeId>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    bool is_linear_order() const { return linear_; }
    bool is_complete() const { return complete_; }
    bool has_node(const NodeId& u) const { return index_.count(u) != 0; }

    std::size_t index(const NodeId& u) const {
        auto it = index_.find(u);
        if (it == index_.end()) throw ContextError("unknown node " + u.str());
        return it->second;
    }

    // (u, v) ∈ Ĕ
    bool in_closure(const NodeId& u, const NodeId& v) const {
        if (!has_node(u) || !has_node(v)) return false;
        return u == v || comp_[index(u)] == comp_[index(v)];
    }

    // (u, v) ∈ E
    bool has_edge(const NodeId& u, const NodeId& v) const {
        if (!has_node(u) || !has_node(v)) return false;
        if (complete_) return true;
        if (linear_) return index(u) <= index(v);
        return edges_.count({u, v}) != 0;
    }

    // Order helpers; only meaningful on linear orders, where the node index is the rank.
    std::size_t rank(const NodeId& u) const {
        require_linear("rank");
        return index(u);
    }
    bool preceq(const NodeId& u, const NodeId& v) const { return rank(u) <= rank(v); }
    const NodeId& order_min(const NodeId& u, const NodeId& v) const { return preceq(u, v) ? u : v; }
    const NodeId& order_max(const NodeId& u, const NodeId& v) const { return preceq(u, v) ? v : u; }

    void require_linear(const char* what) const {
        if (!linear_) throw ContextError(std::string(what) + ": graph is not linearly ordered");
    }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        if (complete_ || linear_) {
            for (std::size_t i = 0; i < nodes_.size(); ++i)
                for (std::size_t j = 0; j < nodes_.size(); ++j)
                    if (complete_ || i <= j) out.push_back({nodes_[i], nodes_[j]});
            return out;
        }
        return {edges_.begin(), edges_.end()};
    }

    // Γ: every letter ℓ(u, v) with (u, v) ∈ Ĕ, loops included.
    std::vector<Letter> alphabet() const {
        std::vector<Letter> out;
        for (const auto& u : nodes_)
            for (const auto& v : nodes_)
                if (in_closure(u, v)) out.push_back({u, v});
        return out;
    }

    void check_letter(const Letter& l) const {
        if (!in_closure(l.tail, l.head))
            throw ContextError("letter " + to_string(l) + " is not in the equivalence closure of E");
    }
    void check_word(const Word& w) const {
        for (const auto& l : w) check_letter(l);
    }

private:
    std::vector<NodeId> nodes_;
    std::unordered_map<NodeId, std::size_t> index_;
    std::vector<std::size_t> comp_;
    std::set<Edge> edges_;
    bool linear_ = false;
    bool complete_ = false;

    void init_nodes(std::vector<NodeId> nodes) {
        nodes_ = std::move(nodes);
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (!index_.emplace(nodes_[i], i).second) throw ContextError("duplicate node " + nodes_[i].str());
    }

    void build_components() {
        std::vector<std::size_t> parent(nodes_.size());
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };
        if (complete_ || linear_) {
            for (std::size_t i = 1; i < nodes_.size(); ++i) unite(i - 1, i);
        } else {
            for (const auto& [u, v] : edges_) unite(index_.at(u), index_.at(v));
        }
        comp_.resize(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) comp_[i] = find(i);
    }
};

// One application of a rule of R_G.
struct ReductionStep {
    enum Kind { Loop, Fuse } kind;
    std::size_t position;
    Word result;
};

namespace detail {

// Leftmost stack pass. L is any letter representation; fuse(a, b) returns the fused letter when the
// head of a is the tail of b, is_loop(a) says whether a is ℓ(u, u). After each rule application
// on_step gets (kind, position, index of the next unread input letter[, fused letter still pending]).
template <class L, class IsLoop, class Fuse, class OnStep>
void stack_normalize(const L* in, std::size_t n, std::vector<L>& stack, IsLoop is_loop, Fuse fuse, OnStep on_step) {
    stack.clear();
    for (std::size_t i = 0; i < n; ++i) {
        L cur = in[i];
        for (;;) {
            if (is_loop(cur)) {
                on_step(ReductionStep::Loop, stack.size(), i + 1);
                break;
            }
            if (!stack.empty()) {
                if (auto f = fuse(stack.back(), cur)) {
                    stack.pop_back();
                    cur = *f;
                    on_step(ReductionStep::Fuse, stack.size(), i + 1, &cur);
                    continue;
                }
            }
            stack.push_back(cur);
            break;
        }
    }
}

inline std::optional<Letter> fuse_letters(const Letter& a, const Letter& b) {
    if (a.head == b.tail) return Letter{a.tail, b.head};
    return std::nullopt;
}

}  // namespace detail

// Every word reachable from w by one rule application.
inline std::set<Word> reduce_once_all(const EdgeContext& ctx, const Word& w) {
    ctx.check_word(w);
    std::set<Word> out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i].is_loop()) {
            Word r = w;
            r.erase(r.begin() + static_cast<std::ptrdiff_t>(i));
            out.insert(std::move(r));
        }
        if (i + 1 < w.size() && w[i].head == w[i + 1].tail) {
            Word r(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i));
            r.push_back({w[i].tail, w[i + 1].head});
            r.insert(r.end(), w.begin() + static_cast<std::ptrdiff_t>(i + 2), w.end());
            out.insert(std::move(r));
        }
    }
    return out;
}

inline bool is_irreducible(const Word& w) {
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i].is_loop()) return false;
        if (i + 1 < w.size() && w[i].head == w[i + 1].tail) return false;
    }
    return true;
}

struct GroupElement {
    Word normal_form;

    std::size_t length() const { return normal_form.size(); }
    bool is_identity() const { return normal_form.empty(); }
    friend bool operator==(const GroupElement&, const GroupElement&) = default;
    friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
};

inline std::string to_string(const GroupElement& g) { return "[" + to_string(g.normal_form) + "]"; }

inline Word normalize_word(const Word& w, std::vector<ReductionStep>* trace = nullptr) {
    Word stack;
    auto is_loop = [](const Letter& l) { return l.is_loop(); };
    if (!trace) {
        detail::stack_normalize(w.data(), w.size(), stack, is_loop, detail::fuse_letters,
                                [](auto&&...) {});
        return stack;
    }
    // Recorded word after each step: the current stack, then the fused letter (if any) still being
    // processed, then the unread input.
    auto on_step = [&](ReductionStep::Kind k, std::size_t pos, std::size_t next, const Letter* pending = nullptr) {
        Word cur = stack;
        if (pending) cur.push_back(*pending);
        cur.insert(cur.end(), w.begin() + static_cast<std::ptrdiff_t>(next), w.end());
        trace->push_back({k, pos, std::move(cur)});
    };
    detail::stack_normalize(w.data(), w.size(), stack, is_loop, detail::fuse_letters, on_step);
    return stack;
}

inline GroupElement normalize(const EdgeContext& ctx, const Word& w, std::vector<ReductionStep>* trace = nullptr) {
    ctx.check_word(w);
    return GroupElement{normalize_word(w, trace)};
}

inline GroupElement identity_element() { return {}; }

inline GroupElement mul(const EdgeContext& ctx, const GroupElement& g, const GroupElement& h) {
    Word w = g.normal_form;
    w.insert(w.end(), h.normal_form.begin(), h.normal_form.end());
    return normalize(ctx, w);
}

inline GroupElement inv(const GroupElement& g) {
    GroupElement out;
    out.normal_form.reserve(g.length());
    for (auto it = g.normal_form.rbegin(); it != g.normal_form.rend(); ++it) out.normal_form.push_back(it->swapped());
    return out;
}

inline GroupElement iota(const EdgeContext& ctx, const Edge& e) {
    if (!ctx.in_closure(e.first, e.second))
        throw ContextError("(" + e.first.str() + "," + e.second.str() + ") is not in the equivalence closure of E");
    return normalize(ctx, Word{{e.first, e.second}});
}

inline GroupElement iota(const EdgeContext& ctx, const NodeId& u, const NodeId& v) { return iota(ctx, Edge{u, v}); }

// Random word over the finite alphabet of ctx, then normalized.
template <class R>
Word random_word(const EdgeContext& ctx, R& rng, std::size_t len) {
    const auto alpha = ctx.alphabet();
    std::uniform_int_distribution<std::size_t> pick(0, alpha.size() - 1);
    Word w;
    for (std::size_t i = 0; i < len; ++i) w.push_back(alpha[pick(rng)]);
    return w;
}

template <class R>
GroupElement random_element(const EdgeContext& ctx, R& rng, std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    return normalize(ctx, random_word(ctx, rng, len(rng)));
}

// Breadth-first closure under single reductions; returns the irreducible descendants.
inline std::set<Word> irreducible_descendants(const EdgeContext& ctx, const Word& w) {
    std::set<Word> seen{w}, out;
    std::deque<Word> queue{w};
    while (!queue.empty()) {
        Word cur = std::move(queue.front());
        queue.pop_front();
        auto next = reduce_once_all(ctx, cur);
        if (next.empty()) out.insert(cur);
        for (auto& n : next)
            if (seen.insert(n).second) queue.push_back(n);
    }
    return out;
}

struct AxiomReport {
    std::string name;
    std::size_t instances = 0;
    std::vector<std::string> violations;
    bool pass() const { return violations.empty(); }
};

// PA1 and PA2 over the rule table of the finite node set, materialized explicitly.
inline std::pair<AxiomReport, AxiomReport> check_pre_algebraic(const EdgeContext& ctx) {
    const auto alpha = ctx.alphabet();
    std::set<Letter> erasable;
    std::map<std::pair<Letter, Letter>, Letter> pair_rules;
    for (const auto& x : alpha) {
        if (x.is_loop()) erasable.insert(x);
        for (const auto& y : alpha)
            if (x.head == y.tail && ctx.in_closure(x.tail, y.head)) pair_rules[{x, y}] = Letter{x.tail, y.head};
    }
    AxiomReport pa1, pa2;
    pa1.name = "PA1 pre-identity";
    pa2.name = "PA2 pre-associativity";
    for (const auto& [xy, z] : pair_rules) {
        const auto& [x, y] = xy;
        ++pa1.instances;
        if (erasable.count(x) && !(y == z))
            pa1.violations.push_back("rule (" + to_string(x) + to_string(y) + " -> " + to_string(z) + "): y != z");
        if (erasable.count(y) && !(x == z))
            pa1.violations.push_back("rule (" + to_string(x) + to_string(y) + " -> " + to_string(z) + "): x != z");
    }
    for (const auto& [xy, z] : pair_rules) {
        const auto& [x, y] = xy;
        for (auto it = pair_rules.begin(); it != pair_rules.end(); ++it) {
            if (!(it->first.first == y)) continue;
            const Letter& yp = it->first.second;
            const Letter& zp = it->second;
            ++pa2.instances;
            auto a = pair_rules.find({x, zp});
            auto b = pair_rules.find({z, yp});
            if (a == pair_rules.end() || b == pair_rules.end() || !(a->second == b->second))
                pa2.violations.push_back("rules " + to_string(x) + to_string(y) + ", " + to_string(y) + to_string(yp));
        }
    }
    return {pa1, pa2};
}

struct ConfluenceReport {
    std::size_t max_len = 0;
    std::size_t alphabet_size = 0;
    std::size_t words_checked = 0;
    std::size_t violations = 0;
    std::vector<std::string> examples;  // first few offending words
    bool pass() const { return violations == 0; }
};

// Exhaustive check over all words up to max_len. Words are processed by increasing length; a word is
// confluent when all of its one-step reducts (already processed) share one terminal irreducible word,
// and that terminal must also equal the stack normal form.
inline ConfluenceReport check_confluence_bruteforce(const EdgeContext& ctx, std::size_t max_len) {
    const auto alpha = ctx.alphabet();
    const std::size_t A = alpha.size();
    ConfluenceReport rep;
    rep.max_len = max_len;
    rep.alphabet_size = A;

    std::map<Letter, std::int32_t> idx;
    for (std::size_t i = 0; i < A; ++i) idx[alpha[i]] = static_cast<std::int32_t>(i);
    std::vector<std::int32_t> fuse(A * A, -1);
    std::vector<char> loop(A, 0);
    for (std::size_t a = 0; a < A; ++a) {
        loop[a] = alpha[a].is_loop();
        for (std::size_t b = 0; b < A; ++b)
            if (alpha[a].head == alpha[b].tail) fuse[a * A + b] = idx.at({alpha[a].tail, alpha[b].head});
    }

    std::vector<std::uint64_t> offset(max_len + 2, 0), power(max_len + 1, 1);
    for (std::size_t n = 1; n <= max_len; ++n) power[n] = power[n - 1] * A;
    for (std::size_t n = 0; n <= max_len; ++n) offset[n + 1] = offset[n] + power[n];
    const std::uint64_t total = offset[max_len + 1];
    if (total > 200'000'000ULL) throw std::length_error("confluence check: too many words");

    constexpr std::uint32_t kBad = UINT32_MAX;
    std::vector<std::uint32_t> terminal(total);
    auto encode = [&](const std::int32_t* d, std::size_t n) {
        std::uint64_t c = 0;
        for (std::size_t i = n; i-- > 0;) c = c * A + static_cast<std::uint64_t>(d[i]);
        return offset[n] + c;
    };
    auto describe = [&](const std::int32_t* d, std::size_t n) {
        Word w;
        for (std::size_t i = 0; i < n; ++i) w.push_back(alpha[d[i]]);
        return to_string(w);
    };

    std::int32_t digits[64], red[64];
    std::vector<std::int32_t> stack;
    for (std::size_t n = 0; n <= max_len; ++n) {
        for (std::uint64_t code = 0; code < power[n]; ++code) {
            std::uint64_t c = code;
            for (std::size_t i = 0; i < n; ++i) { digits[i] = static_cast<std::int32_t>(c % A); c /= A; }
            const std::uint64_t self = offset[n] + code;
            std::uint32_t term = kBad;
            bool reducible = false, ok = true;
            auto visit = [&](std::size_t m) {
                std::uint32_t t = terminal[encode(red, m)];
                if (t == kBad || (reducible && t != term)) ok = false;
                term = t;
                reducible = true;
            };
            for (std::size_t i = 0; i < n && ok; ++i) {
                if (loop[digits[i]]) {
                    std::size_t m = 0;
                    for (std::size_t k = 0; k < n; ++k)
                        if (k != i) red[m++] = digits[k];
                    visit(m);
                }
                if (ok && i + 1 < n && fuse[digits[i] * A + digits[i + 1]] >= 0) {
                    std::size_t m = 0;
                    for (std::size_t k = 0; k < i; ++k) red[m++] = digits[k];
                    red[m++] = fuse[digits[i] * A + digits[i + 1]];
                    for (std::size_t k = i + 2; k < n; ++k) red[m++] = digits[k];
                    visit(m);
                }
            }
            if (!reducible) term = static_cast<std::uint32_t>(self);
            // the stack normal form of the same word
            detail::stack_normalize(
                digits, n, stack, [&](std::int32_t a) { return loop[a] != 0; },
                [&](std::int32_t a, std::int32_t b) -> std::optional<std::int32_t> {
                    std::int32_t f = fuse[a * A + b];
                    if (f < 0) return std::nullopt;
                    return f;
                },
                [](auto&&...) {});
            if (ok && encode(stack.data(), stack.size()) != term) ok = false;
            ++rep.words_checked;
            if (!ok) {
                ++rep.violations;
                if (rep.examples.size() < 10) rep.examples.push_back(describe(digits, n));
                terminal[self] = kBad;
            } else {
                terminal[self] = term;
            }
        }
    }
    return rep;
}

}  // namespace gdyn

template <>
struct std::hash<gdyn::GroupElement> {
    std::size_t operator()(const gdyn::GroupElement& g) const noexcept {
        std::size_t h = 0x9e3779b97f4a7c15ULL;
        std::hash<gdyn::Rational> hr;
        for (const auto& l : g.normal_form) {
            h ^= hr(l.tail) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h ^= hr(l.head) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};
