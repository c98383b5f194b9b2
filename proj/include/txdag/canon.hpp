// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "txdag/core.hpp"
#include "txdag/tdag.hpp"

namespace txdag {

// Canonical labels are the stable cross-run identity of an isomorphism class
// (label format v1): decimal child ids joined by ',', one clause per vertex
// joined by ':', terminated by ';'.
using CanonicalLabel = std::string;

enum class Ordering : std::int8_t { LT = -1, EQ = 0, GT = 1 };

// Sub-DAG induced on everything reachable from `root` within `graph`. The
// reach set is closed under out-edges by construction.
struct SubDagView {
    const TDag* graph = nullptr;
    std::uint32_t root = 0;

    std::vector<std::uint32_t> reach() const {
        std::vector<char> seen(graph->vertex_count(), 0);
        std::vector<std::uint32_t> out{root};
        seen[root] = 1;
        for (std::size_t i = 0; i < out.size(); ++i)
            for (auto w : graph->children[out[i]])
                if (!seen[w]) {
                    seen[w] = 1;
                    out.push_back(w);
                }
        std::sort(out.begin(), out.end());
        return out;
    }

    std::size_t size() const { return reach().size(); }
};

struct ClassRepresentative {
    TDag tdag;  // child order fixed at every vertex
};

CanonicalLabel canonical_label(const TDag& tdag);

namespace canon_detail {

// Bare structural copy of the sub-DAG reachable from root; payloads dropped,
// child order preserved.
inline TDag extract_subdag(const TDag& g, std::uint32_t root) {
    std::vector<std::int32_t> remap(g.vertex_count(), -1);
    std::vector<std::uint32_t> order;
    order.push_back(root);
    remap[root] = 0;
    for (std::size_t i = 0; i < order.size(); ++i)
        for (auto w : g.children[order[i]])
            if (remap[w] < 0) {
                remap[w] = static_cast<std::int32_t>(order.size());
                order.push_back(w);
            }
    TDag sub;
    sub.vertices.resize(order.size());
    sub.children.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        for (auto w : g.children[order[i]])
            sub.children[i].push_back(static_cast<std::uint32_t>(remap[w]));
    sub.recompute_roles();
    return sub;
}

// Per-graph order data: reach sizes, heights, indegrees, and the child order
// fixed bottom-up by the total ordering, the indegree operator, and the
// residual label tie-break.
class Context {
public:
    enum class Mode { Full, DeltaOnly };

    Context(const TDag& g, Mode mode) : g_(&g) {
        std::size_t n = g.vertex_count();
        indeg_ = g.indegrees();
        height_ = vertex_heights(g);
        kids_ = g.children;

        // reach set sizes and shared-descendant flags by per-vertex BFS
        reach_.assign(n, 0);
        shared_.assign(n, 0);
        std::vector<std::uint32_t> stamp(n, 0), stack;
        std::uint32_t epoch = 0;
        for (std::uint32_t v = 0; v < n; ++v) {
            ++epoch;
            stack.assign(1, v);
            stamp[v] = epoch;
            std::uint32_t count = 0;
            bool shared = false;
            while (!stack.empty()) {
                std::uint32_t u = stack.back();
                stack.pop_back();
                ++count;
                if (indeg_[u] >= 2) shared = true;
                for (auto w : g.children[u])
                    if (stamp[w] != epoch) {
                        stamp[w] = epoch;
                        stack.push_back(w);
                    }
            }
            reach_[v] = count;
            shared_[v] = shared ? 1 : 0;
        }

        // fix child order bottom-up by height
        std::vector<std::uint32_t> order(n);
        for (std::uint32_t v = 0; v < n; ++v) order[v] = v;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return height_[a] < height_[b]; });
        for (std::uint32_t v : order) {
            auto& kids = kids_[v];
            if (kids.size() < 2) continue;
            if (mode == Mode::Full) {
                std::stable_sort(kids.begin(), kids.end(),
                                 [&](std::uint32_t a, std::uint32_t b) { return before(a, b); });
            } else {
                // pre: already sorted by the total ordering; reorder only
                // maximal runs of equivalent siblings by the indegree operator
                std::size_t i = 0;
                while (i < kids.size()) {
                    std::size_t j = i + 1;
                    while (j < kids.size() && cmp(kids[i], kids[j]) == Ordering::EQ) ++j;
                    std::stable_sort(kids.begin() + i, kids.begin() + j,
                                     [&](std::uint32_t a, std::uint32_t b) {
                                         return delta_key(a) < delta_key(b);
                                     });
                    i = j;
                }
            }
        }
    }

    const TDag& graph() const { return *g_; }
    std::uint32_t reach_size(std::uint32_t v) const { return reach_[v]; }
    std::uint32_t outdeg(std::uint32_t v) const { return static_cast<std::uint32_t>(kids_[v].size()); }
    const std::vector<std::vector<std::uint32_t>>& ordered_children() const { return kids_; }

    Ordering cmp(std::uint32_t a, std::uint32_t b) { return compare(*this, a, *this, b, memo_); }

    // Non-decreasing multiset of the children's indegrees, taken in the whole
    // graph.
    std::vector<std::uint32_t> delta_key(std::uint32_t v) const {
        std::vector<std::uint32_t> key;
        key.reserve(kids_[v].size());
        for (auto w : kids_[v]) key.push_back(indeg_[w]);
        std::sort(key.begin(), key.end());
        return key;
    }

    const std::string& sub_label(std::uint32_t v) {
        auto it = sublabel_.find(v);
        if (it != sublabel_.end()) return it->second;
        TDag sub = extract_subdag(*g_, v);
        return sublabel_.emplace(v, canonical_label(sub)).first->second;
    }

    // Sorted whole-graph indegrees of the reach set: a cheap invariant that
    // sees how the sub-DAG is entangled with the rest of the graph.
    const std::vector<std::uint32_t>& reach_profile(std::uint32_t v) {
        auto it = profile_.find(v);
        if (it != profile_.end()) return it->second;
        std::vector<char> seen(g_->vertex_count(), 0);
        std::vector<std::uint32_t> stack{v}, profile;
        seen[v] = 1;
        while (!stack.empty()) {
            std::uint32_t u = stack.back();
            stack.pop_back();
            profile.push_back(indeg_[u]);
            for (auto w : g_->children[u])
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
        }
        std::sort(profile.begin(), profile.end());
        return profile_.emplace(v, std::move(profile)).first->second;
    }

    static Ordering compare(Context& A, std::uint32_t a, Context& B, std::uint32_t b,
                            std::unordered_map<std::uint64_t, Ordering>& memo) {
        if (&A == &B && a == b) return Ordering::EQ;
        std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        Ordering result = Ordering::EQ;
        if (A.reach_[a] != B.reach_[b]) {
            result = A.reach_[a] < B.reach_[b] ? Ordering::LT : Ordering::GT;
        } else if (A.outdeg(a) != B.outdeg(b)) {
            result = A.outdeg(a) < B.outdeg(b) ? Ordering::LT : Ordering::GT;
        } else {
            for (std::size_t i = 0; i < A.kids_[a].size(); ++i) {
                Ordering r = compare(A, A.kids_[a][i], B, B.kids_[b][i], memo);
                if (r != Ordering::EQ) {
                    result = r;
                    break;
                }
            }
        }
        memo.emplace(key, result);
        return result;
    }

    // Strict-less for the final child order: the total ordering, then the
    // indegree operator, then (only when sharing is involved) the recursive
    // canonical label. Pure-tree ties are interchangeable; stable sort keeps
    // them in place.
    bool before(std::uint32_t a, std::uint32_t b) {
        Ordering r = cmp(a, b);
        if (r != Ordering::EQ) return r == Ordering::LT;
        auto ka = delta_key(a), kb = delta_key(b);
        if (ka != kb) return ka < kb;
        if (shared_[a] || shared_[b]) {
            if (indeg_[a] != indeg_[b]) return indeg_[a] < indeg_[b];
            const auto& pa = reach_profile(a);
            const auto& pb = reach_profile(b);
            if (pa != pb) return pa < pb;
            return sub_label(a) < sub_label(b);
        }
        return false;
    }

private:
    const TDag* g_;
    std::vector<std::uint32_t> indeg_, height_, reach_;
    std::vector<char> shared_;
    std::vector<std::vector<std::uint32_t>> kids_;
    std::unordered_map<std::uint64_t, Ordering> memo_;
    std::unordered_map<std::uint32_t, std::string> sublabel_;
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> profile_;
};

}  // namespace canon_detail

// Total ordering over sub-DAG views: size, then root outdegree, then the
// lexicographic comparison of the sorted child sub-DAG sequences.
inline Ordering compare(const SubDagView& s, const SubDagView& t) {
    canon_detail::Context a(*s.graph, canon_detail::Context::Mode::Full);
    canon_detail::Context b(*t.graph, canon_detail::Context::Mode::Full);
    std::unordered_map<std::uint64_t, Ordering> memo;
    if (s.graph == t.graph) return canon_detail::Context::compare(a, s.root, a, t.root, memo);
    return canon_detail::Context::compare(a, s.root, b, t.root, memo);
}

// Applies the indegree operator to a T-DAG whose sibling sub-DAGs are already
// sorted by the total ordering.
inline ClassRepresentative delta_reorder(const TDag& sorted) {
    canon_detail::Context ctx(sorted, canon_detail::Context::Mode::DeltaOnly);
    TDag out = sorted;
    out.children = ctx.ordered_children();
    return ClassRepresentative{std::move(out)};
}

// Isomorphism class representative: per-vertex child order fixed bottom-up.
inline ClassRepresentative representative(const TDag& tdag) {
    if (tdag.roots.size() != 1)
        throw GraphError("representative: multi-root input, super-root it first");
    canon_detail::Context ctx(tdag, canon_detail::Context::Mode::Full);
    TDag out = tdag;
    out.children = ctx.ordered_children();
    return ClassRepresentative{std::move(out)};
}

// Two-pass breadth-first labeling of a representative: ids by dequeue order
// of first discovery, then one clause of children ids per vertex.
inline CanonicalLabel label(const ClassRepresentative& rep) {
    const TDag& t = rep.tdag;
    if (t.roots.size() != 1) throw GraphError("label: multi-root input");
    std::size_t n = t.vertex_count();
    std::vector<std::int64_t> id(n, -1);
    std::vector<std::uint32_t> by_id;
    by_id.reserve(n);
    std::deque<std::uint32_t> queue;
    queue.push_back(t.roots[0]);
    while (!queue.empty()) {
        std::uint32_t v = queue.front();
        queue.pop_front();
        if (id[v] >= 0) continue;
        id[v] = static_cast<std::int64_t>(by_id.size());
        by_id.push_back(v);
        for (auto c : t.children[v]) queue.push_back(c);
    }
    if (by_id.size() != n) throw GraphError("label: graph is not connected from its root");

    std::string text;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) text.push_back(':');
        const auto& kids = t.children[by_id[i]];
        for (std::size_t k = 0; k < kids.size(); ++k) {
            if (k) text.push_back(',');
            text += std::to_string(id[kids[k]]);
        }
    }
    text.push_back(';');
    return text;
}

inline CanonicalLabel canonical_label(const TDag& tdag) {
    return label(representative(tdag));
}

// Algorithm: max-id scan, then a FIFO replay of the clauses assigning each
// clause's length to the next unprocessed id. Linear in the number of edges.
inline std::vector<std::uint32_t> outdegree_from_label(const std::string& lbl) {
    if (lbl.empty()) throw LabelParseError(0, "empty label");
    if (lbl.back() != ';') throw LabelParseError(lbl.size(), "label must end with ';'");

    struct Clause {
        std::size_t offset;
        std::vector<std::uint32_t> ids;
    };
    std::vector<Clause> clauses;
    clauses.push_back({0, {}});
    std::uint64_t max_id = 0;
    std::size_t token_start = 0;
    bool in_token = false;
    std::uint64_t token_value = 0;

    auto flush_token = [&](std::size_t at, bool required) {
        if (!in_token) {
            if (required) throw LabelParseError(at, "expected an identifier");
            return;
        }
        if (lbl[token_start] == '0' && at - token_start > 1)
            throw LabelParseError(token_start, "identifier has a leading zero");
        clauses.back().ids.push_back(static_cast<std::uint32_t>(token_value));
        max_id = std::max(max_id, token_value);
        in_token = false;
    };

    for (std::size_t i = 0; i + 1 < lbl.size(); ++i) {
        char c = lbl[i];
        if (c >= '0' && c <= '9') {
            if (!in_token) {
                in_token = true;
                token_start = i;
                token_value = 0;
            }
            token_value = token_value * 10 + static_cast<std::uint64_t>(c - '0');
            if (token_value > 0xffffffffull) throw LabelParseError(token_start, "identifier out of range");
        } else if (c == ',') {
            flush_token(i, true);
            if (i + 2 >= lbl.size() || !(lbl[i + 1] >= '0' && lbl[i + 1] <= '9'))
                throw LabelParseError(i + 1, "expected an identifier after ','");
        } else if (c == ':') {
            flush_token(i, false);
            clauses.push_back({i + 1, {}});
        } else if (c == ';') {
            throw LabelParseError(i, "';' before end of label");
        } else {
            throw LabelParseError(i, std::string("invalid character '") + c + "'");
        }
    }
    flush_token(lbl.size() - 1, false);

    std::size_t n = max_id + 1;
    bool any_ids = false;
    for (const Clause& c : clauses) any_ids = any_ids || !c.ids.empty();
    if (!any_ids) n = 1;  // ";" is the single-vertex label
    if (clauses.size() != n)
        throw LabelParseError(lbl.size() - 1,
                              "clause count " + std::to_string(clauses.size()) +
                                  " does not match vertex count " + std::to_string(n));

    std::vector<std::uint32_t> out_deg(n, 0);
    std::vector<char> processed(n, 0);
    std::deque<std::uint32_t> queue;
    std::uint32_t n_id = 0;
    for (const Clause& clause : clauses) {
        while (!queue.empty()) {
            n_id = queue.front();
            queue.pop_front();
            if (!processed[n_id]) break;
        }
        if (processed[n_id])
            throw LabelParseError(clause.offset, "no vertex left for this clause");
        processed[n_id] = 1;
        out_deg[n_id] = static_cast<std::uint32_t>(clause.ids.size());
        for (auto cid : clause.ids) {
            if (cid >= n) throw LabelParseError(clause.offset, "identifier out of range");
            queue.push_back(cid);
        }
    }
    for (std::size_t v = 0; v < n; ++v)
        if (!processed[v])
            throw LabelParseError(lbl.size() - 1, "vertex " + std::to_string(v) + " has no clause");
    return out_deg;
}

inline bool isomorphic(const TDag& a, const TDag& b) {
    return canonical_label(a) == canonical_label(b);
}

// Exhaustive root-preserving bijection search; the validation oracle, kept
// independent of the labeling path. Factorial bound: |V| <= 9.
inline bool brute_force_isomorphic(const TDag& a, const TDag& b) {
    if (a.roots.size() != 1 || b.roots.size() != 1)
        throw Error("brute_force_isomorphic: single-source inputs required");
    if (a.vertex_count() > 9 || b.vertex_count() > 9)
        throw Error("brute_force_isomorphic: size bound (9) exceeded");
    std::size_t n = a.vertex_count();
    if (n != b.vertex_count() || a.edge_count() != b.edge_count()) return false;

    auto rows = [](const TDag& t) {
        std::vector<std::uint16_t> m(t.vertex_count(), 0);
        for (std::uint32_t v = 0; v < t.vertex_count(); ++v)
            for (auto w : t.children[v]) m[v] |= static_cast<std::uint16_t>(1u << w);
        return m;
    };
    std::vector<std::uint16_t> ma = rows(a), mb = rows(b);
    std::vector<std::uint32_t> ina = a.indegrees(), inb = b.indegrees();

    std::vector<std::uint32_t> order;
    order.push_back(a.roots[0]);
    for (std::uint32_t v = 0; v < n; ++v)
        if (v != a.roots[0]) order.push_back(v);

    std::vector<std::int32_t> map(n, -1);
    std::vector<char> used(n, 0);
    auto assign = [&](auto&& self, std::size_t i) -> bool {
        if (i == n) return true;
        std::uint32_t va = order[i];
        for (std::uint32_t vb = 0; vb < n; ++vb) {
            if (used[vb]) continue;
            if (i == 0 && vb != b.roots[0]) continue;
            if (ina[va] != inb[vb] || std::popcount(ma[va]) != std::popcount(mb[vb])) continue;
            bool ok = true;
            for (std::size_t j = 0; j < i && ok; ++j) {
                std::uint32_t wa = order[j];
                std::uint32_t wb = static_cast<std::uint32_t>(map[wa]);
                bool e1 = ma[va] & (1u << wa), f1 = mb[vb] & (1u << wb);
                bool e2 = ma[wa] & (1u << va), f2 = mb[wb] & (1u << vb);
                ok = e1 == f1 && e2 == f2;
            }
            if (!ok) continue;
            map[va] = static_cast<std::int32_t>(vb);
            used[vb] = 1;
            if (self(self, i + 1)) return true;
            map[va] = -1;
            used[vb] = 0;
        }
        return false;
    };
    return assign(assign, 0);
}

}  // namespace txdag
