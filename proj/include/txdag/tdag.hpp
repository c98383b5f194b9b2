// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "txdag/core.hpp"
#include "txdag/ledger.hpp"
#include "txdag/script.hpp"
#include "txdag/tiograph.hpp"

namespace txdag {

enum class VertexRole : std::uint8_t { Root, Internal, Leaf };

struct AlphaInfo {
    Hash32 txid{};
    Hash32 blockhash{};
    AlphaKind kind = AlphaKind::Coinbase;

    friend bool operator==(const AlphaInfo&, const AlphaInfo&) = default;
};

struct TdagVertex {
    VertexRole role = VertexRole::Leaf;
    bool synthetic = false;  // super-root
    std::optional<Tio> tio;
    std::optional<std::string> address;
    std::optional<std::vector<std::uint8_t>> script;
    std::optional<AlphaInfo> alpha;  // set on root vertices

    friend bool operator==(const TdagVertex&, const TdagVertex&) = default;
};

// Single-source (after normalization) weakly connected DAG extracted from the
// ledger. Vertex ids are dense; children lists carry the child order.
struct TDag {
    std::vector<TdagVertex> vertices;
    std::vector<std::vector<std::uint32_t>> children;
    std::vector<std::uint32_t> roots;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t edge_count() const {
        std::size_t m = 0;
        for (const auto& c : children) m += c.size();
        return m;
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
        out.reserve(edge_count());
        for (std::uint32_t v = 0; v < children.size(); ++v)
            for (auto w : children[v]) out.emplace_back(v, w);
        return out;
    }

    std::vector<std::uint32_t> indegrees() const {
        std::vector<std::uint32_t> indeg(vertices.size(), 0);
        for (const auto& c : children)
            for (auto w : c) ++indeg[w];
        return indeg;
    }

    void recompute_roles() {
        auto indeg = indegrees();
        roots.clear();
        for (std::uint32_t v = 0; v < vertices.size(); ++v) {
            if (indeg[v] == 0) {
                vertices[v].role = VertexRole::Root;
                roots.push_back(v);
            } else if (children[v].empty()) {
                vertices[v].role = VertexRole::Leaf;
            } else {
                vertices[v].role = VertexRole::Internal;
            }
        }
    }

    friend bool operator==(const TDag&, const TDag&) = default;
};

// Longest path (in edges) from v to a sink, for every vertex.
inline std::vector<std::uint32_t> vertex_heights(const TDag& t) {
    std::size_t n = t.vertex_count();
    std::vector<std::uint32_t> indeg = t.indegrees();
    std::vector<std::uint32_t> topo;
    topo.reserve(n);
    for (std::uint32_t v = 0; v < n; ++v)
        if (indeg[v] == 0) topo.push_back(v);
    for (std::size_t i = 0; i < topo.size(); ++i)
        for (auto w : t.children[topo[i]])
            if (--indeg[w] == 0) topo.push_back(w);
    if (topo.size() != n) throw GraphError("height: graph has a cycle");
    std::vector<std::uint32_t> h(n, 0);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it)
        for (auto w : t.children[*it]) h[*it] = std::max(h[*it], h[w] + 1);
    return h;
}

// Longest root-to-sink path; the max over roots for multi-root components.
inline std::uint32_t height(const TDag& t) {
    if (t.vertices.empty()) return 0;
    auto h = vertex_heights(t);
    std::uint32_t best = 0;
    for (auto r : t.roots) best = std::max(best, h[r]);
    return best;
}

struct Forest {
    std::vector<TDag> components;

    std::size_t component_count() const { return components.size(); }
    std::size_t node_count() const {
        std::size_t n = 0;
        for (const auto& c : components) n += c.vertex_count();
        return n;
    }
    std::size_t edge_count() const {
        std::size_t m = 0;
        for (const auto& c : components) m += c.edge_count();
        return m;
    }
};

namespace detail {

inline TdagVertex make_output_vertex(const Ledger& ledger, std::uint32_t pos, std::uint32_t vout) {
    const OutputRecord& rec = ledger.txs[pos].vout[vout];
    TdagVertex v;
    v.tio = ledger.output_tio(pos, vout);
    v.address = rec.address;
    v.script = rec.script;
    return v;
}

inline TdagVertex make_root_vertex(const Ledger& ledger, const AlphaNode& alpha) {
    const Tx& tx = ledger.tx_at(alpha.tx_pos);
    TdagVertex v;
    v.role = VertexRole::Root;
    v.alpha = AlphaInfo{tx.hash, tx.blockhash, alpha.kind};
    return v;
}

struct Dsu {
    std::vector<std::uint32_t> parent;

    std::uint32_t make() {
        parent.push_back(static_cast<std::uint32_t>(parent.size()));
        return parent.back();
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a > b) std::swap(a, b);  // lower id wins: merge order independent
        parent[b] = a;
    }
};

}  // namespace detail

// Stack-driven expansion from one alpha root. Unknown spent
// outputs are followed through their funded input to that input's funded
// outputs; addressed and unspent outputs terminate expansion.
inline TDag generate_tdag(const Ledger& ledger, const AlphaNode& alpha) {
    if (!ledger.linked()) throw Error("generate_tdag: ledger is not linked");
    TDag t;
    t.vertices.push_back(detail::make_root_vertex(ledger, alpha));
    t.children.emplace_back();
    t.roots.push_back(0);

    std::unordered_map<std::uint64_t, std::uint32_t> seen;  // (tx_pos, vout) -> vertex id
    auto key = [](std::uint32_t pos, std::uint32_t vout) {
        return (static_cast<std::uint64_t>(pos) << 32) | vout;
    };
    std::vector<std::pair<std::uint32_t, std::uint32_t>> stack;

    auto visit = [&](std::uint32_t parent, std::uint32_t pos, std::uint32_t vout) {
        auto [it, fresh] = seen.emplace(key(pos, vout), static_cast<std::uint32_t>(t.vertices.size()));
        if (fresh) {
            t.vertices.push_back(detail::make_output_vertex(ledger, pos, vout));
            t.children.emplace_back();
            stack.emplace_back(pos, vout);
        }
        t.children[parent].push_back(it->second);
    };

    const Tx& root_tx = ledger.tx_at(alpha.tx_pos);
    for (std::uint32_t o = 0; o < root_tx.vout.size(); ++o) visit(0, alpha.tx_pos, o);

    while (!stack.empty()) {
        auto [pos, vout] = stack.back();
        stack.pop_back();
        const OutputRecord& rec = ledger.txs[pos].vout[vout];
        if (is_unknown_output(rec) != 0 || !rec.spent_by) continue;
        std::uint32_t cur = seen.at(key(pos, vout));
        std::uint32_t spender = rec.spent_by->tx_pos;
        for (std::uint32_t o = 0; o < ledger.txs[spender].vout.size(); ++o) visit(cur, spender, o);
    }
    t.recompute_roles();
    return t;
}

// Expands every alpha node, merging weakly connected
// results with a union-find over shared output vertices. Components of fewer
// than two vertices are not part of the forest.
inline Forest build_forest(const Ledger& ledger) {
    if (!ledger.linked()) throw Error("build_forest: ledger is not linked");
    auto alphas = find_alpha_nodes(ledger);

    detail::Dsu dsu;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // global vertex ids
    std::unordered_map<std::uint64_t, std::uint32_t> output_gid;
    std::vector<std::optional<AlphaNode>> gid_alpha;  // per gid: alpha descriptor
    std::vector<std::uint64_t> gid_output;            // per gid: output key (when !alpha)
    auto key = [](std::uint32_t pos, std::uint32_t vout) {
        return (static_cast<std::uint64_t>(pos) << 32) | vout;
    };

    std::vector<std::pair<std::uint32_t, std::uint32_t>> stack;
    for (const AlphaNode& alpha : alphas) {
        std::uint32_t root_gid = dsu.make();
        gid_alpha.push_back(alpha);
        gid_output.push_back(0);

        auto visit = [&](std::uint32_t parent_gid, std::uint32_t pos, std::uint32_t vout) {
            auto [it, fresh] = output_gid.emplace(key(pos, vout), 0);
            if (fresh) {
                it->second = dsu.make();
                gid_alpha.push_back(std::nullopt);
                gid_output.push_back(key(pos, vout));
                stack.emplace_back(pos, vout);
            }
            edges.emplace_back(parent_gid, it->second);
            dsu.unite(parent_gid, it->second);
        };

        const Tx& root_tx = ledger.tx_at(alpha.tx_pos);
        for (std::uint32_t o = 0; o < root_tx.vout.size(); ++o) visit(root_gid, alpha.tx_pos, o);

        while (!stack.empty()) {
            auto [pos, vout] = stack.back();
            stack.pop_back();
            const OutputRecord& rec = ledger.txs[pos].vout[vout];
            if (is_unknown_output(rec) != 0 || !rec.spent_by) continue;
            std::uint32_t cur = output_gid.at(key(pos, vout));
            std::uint32_t spender = rec.spent_by->tx_pos;
            for (std::uint32_t o = 0; o < ledger.txs[spender].vout.size(); ++o)
                visit(cur, spender, o);
        }
    }

    // bucket vertices and edges by component representative, in gid order
    std::size_t n = dsu.parent.size();
    std::unordered_map<std::uint32_t, std::uint32_t> comp_index;
    std::vector<std::vector<std::uint32_t>> comp_vertices;
    for (std::uint32_t g = 0; g < n; ++g) {
        std::uint32_t rep = dsu.find(g);
        auto [it, fresh] = comp_index.emplace(rep, static_cast<std::uint32_t>(comp_vertices.size()));
        if (fresh) comp_vertices.emplace_back();
        comp_vertices[it->second].push_back(g);
    }

    std::vector<std::uint32_t> local_id(n, 0);
    Forest forest;
    std::vector<std::int32_t> comp_of_gid(n, -1);
    for (std::uint32_t c = 0; c < comp_vertices.size(); ++c) {
        if (comp_vertices[c].size() < 2) continue;  // lone roots are not T-DAGs
        TDag t;
        for (std::uint32_t g : comp_vertices[c]) {
            comp_of_gid[g] = static_cast<std::int32_t>(forest.components.size());
            local_id[g] = static_cast<std::uint32_t>(t.vertices.size());
            if (gid_alpha[g]) {
                t.vertices.push_back(detail::make_root_vertex(ledger, *gid_alpha[g]));
            } else {
                std::uint64_t k = gid_output[g];
                t.vertices.push_back(detail::make_output_vertex(
                    ledger, static_cast<std::uint32_t>(k >> 32), static_cast<std::uint32_t>(k)));
            }
            t.children.emplace_back();
        }
        forest.components.push_back(std::move(t));
    }
    for (const auto& [u, v] : edges) {
        std::int32_t c = comp_of_gid[u];
        if (c < 0) continue;
        forest.components[c].children[local_id[u]].push_back(local_id[v]);
    }
    for (TDag& t : forest.components) {
        for (auto& lst : t.children) {
            std::sort(lst.begin(), lst.end());
            lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
        }
        t.recompute_roles();
    }
    return forest;
}

// Drops components whose longest root-to-sink path is a single edge. With
// keep_two_vertex, two-vertex components (root plus one terminal output)
// survive despite having height 1.
inline Forest prune_height1(const Forest& forest, bool keep_two_vertex = false) {
    Forest kept;
    for (const TDag& t : forest.components) {
        if (height(t) == 1 && !(keep_two_vertex && t.vertex_count() == 2)) continue;
        kept.components.push_back(t);
    }
    return kept;
}

// Removes every internal vertex whose script matches the trivial matcher and
// reconnects its predecessors to the outputs downstream of its spender.
inline TDag compress(const TDag& tdag, const ScriptMatcher& trivial) {
    std::size_t n = tdag.vertex_count();
    std::vector<char> doomed(n, 0);
    for (std::uint32_t v = 0; v < n; ++v) {
        const TdagVertex& vert = tdag.vertices[v];
        if (vert.role == VertexRole::Internal && vert.script && trivial.match(*vert.script))
            doomed[v] = 1;
    }
    if (std::find(doomed.begin(), doomed.end(), 1) == doomed.end()) return tdag;

    // resolve(v): the non-doomed vertices reached by skipping doomed chains
    std::vector<std::vector<std::uint32_t>> resolved(n);
    std::vector<char> done(n, 0);
    auto resolve = [&](auto&& self, std::uint32_t v) -> const std::vector<std::uint32_t>& {
        if (done[v]) return resolved[v];
        done[v] = 1;
        std::vector<std::uint32_t> acc;
        if (!doomed[v]) {
            acc.push_back(v);
        } else {
            for (auto w : tdag.children[v]) {
                const auto& sub = self(self, w);
                acc.insert(acc.end(), sub.begin(), sub.end());
            }
            std::sort(acc.begin(), acc.end());
            acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
        }
        resolved[v] = std::move(acc);
        return resolved[v];
    };

    std::vector<std::uint32_t> remap(n, 0);
    TDag out;
    for (std::uint32_t v = 0; v < n; ++v) {
        if (doomed[v]) continue;
        remap[v] = static_cast<std::uint32_t>(out.vertices.size());
        out.vertices.push_back(tdag.vertices[v]);
    }
    out.children.resize(out.vertices.size());
    for (std::uint32_t v = 0; v < n; ++v) {
        if (doomed[v]) continue;
        std::vector<std::uint32_t> kids;
        for (auto w : tdag.children[v]) {
            const auto& sub = resolve(resolve, w);
            for (auto x : sub) kids.push_back(remap[x]);
        }
        std::sort(kids.begin(), kids.end());
        kids.erase(std::unique(kids.begin(), kids.end()), kids.end());
        out.children[remap[v]] = std::move(kids);
    }
    out.recompute_roles();
    return out;
}

// Multi-root normalization: one synthetic vertex with an edge to every old
// root. Single-root inputs are returned unchanged.
inline TDag add_super_root(const TDag& tdag) {
    if (tdag.roots.size() <= 1) return tdag;
    TDag out = tdag;
    TdagVertex v;
    v.role = VertexRole::Root;
    v.synthetic = true;
    out.vertices.push_back(std::move(v));
    out.children.push_back(tdag.roots);
    out.recompute_roles();
    return out;
}

// ---- forest dump: one JSON object per component, newline delimited ----

inline nlohmann::json tdag_to_json(const TDag& t) {
    nlohmann::json jverts = nlohmann::json::array();
    for (std::uint32_t v = 0; v < t.vertex_count(); ++v) {
        const TdagVertex& vert = t.vertices[v];
        nlohmann::json jv;
        jv["id"] = v;
        jv["role"] = vert.role == VertexRole::Root      ? "root"
                     : vert.role == VertexRole::Internal ? "internal"
                                                         : "leaf";
        if (vert.synthetic) jv["synthetic"] = true;
        if (vert.tio)
            jv["tio"] = {{"kind", vert.tio->kind == TioKind::Input ? "input" : "output"},
                         {"txid", hex::encode(vert.tio->txid)},
                         {"blockhash", hex::encode(vert.tio->blockhash)},
                         {"index", vert.tio->index}};
        if (vert.address) jv["address"] = *vert.address;
        if (vert.script) jv["script"] = hex::encode(*vert.script);
        if (vert.alpha)
            jv["alpha"] = {{"txid", hex::encode(vert.alpha->txid)},
                           {"blockhash", hex::encode(vert.alpha->blockhash)},
                           {"kind", vert.alpha->kind == AlphaKind::Coinbase ? "coinbase"
                                                                            : "addressed_spend"}};
        jverts.push_back(std::move(jv));
    }
    nlohmann::json jedges = nlohmann::json::array();
    for (const auto& [u, v] : t.edges()) jedges.push_back({u, v});
    return {{"roots", t.roots},
            {"vertices", jverts},
            {"edges", jedges},
            {"height", height(t)},
            {"cardinality", t.vertex_count()}};
}

inline TDag tdag_from_json(const nlohmann::json& j) {
    TDag t;
    const auto& jverts = j.at("vertices");
    t.vertices.resize(jverts.size());
    t.children.resize(jverts.size());
    for (const auto& jv : jverts) {
        std::uint32_t id = jv.at("id").get<std::uint32_t>();
        if (id >= t.vertices.size()) throw Error("forest dump: vertex id out of range");
        TdagVertex vert;
        std::string role = jv.at("role").get<std::string>();
        vert.role = role == "root" ? VertexRole::Root
                    : role == "internal" ? VertexRole::Internal
                                         : VertexRole::Leaf;
        if (jv.contains("synthetic")) vert.synthetic = jv.at("synthetic").get<bool>();
        if (jv.contains("tio")) {
            const auto& jt = jv.at("tio");
            Tio tio;
            tio.kind = jt.at("kind").get<std::string>() == "input" ? TioKind::Input : TioKind::Output;
            auto txid = hex::decode_hash(jt.at("txid").get<std::string>());
            auto bh = hex::decode_hash(jt.at("blockhash").get<std::string>());
            if (!txid || !bh) throw Error("forest dump: bad tio hash");
            tio.txid = *txid;
            tio.blockhash = *bh;
            tio.index = jt.at("index").get<std::uint32_t>();
            vert.tio = tio;
        }
        if (jv.contains("address")) vert.address = jv.at("address").get<std::string>();
        if (jv.contains("script")) {
            auto bytes = hex::decode_bytes(jv.at("script").get<std::string>());
            if (!bytes) throw Error("forest dump: bad script hex");
            vert.script = std::move(*bytes);
        }
        if (jv.contains("alpha")) {
            const auto& ja = jv.at("alpha");
            AlphaInfo info;
            auto txid = hex::decode_hash(ja.at("txid").get<std::string>());
            auto bh = hex::decode_hash(ja.at("blockhash").get<std::string>());
            if (!txid || !bh) throw Error("forest dump: bad alpha hash");
            info.txid = *txid;
            info.blockhash = *bh;
            info.kind = ja.at("kind").get<std::string>() == "coinbase" ? AlphaKind::Coinbase
                                                                       : AlphaKind::AddressedSpend;
            vert.alpha = info;
        }
        t.vertices[id] = std::move(vert);
    }
    for (const auto& je : j.at("edges")) {
        std::uint32_t u = je.at(0).get<std::uint32_t>(), v = je.at(1).get<std::uint32_t>();
        if (u >= t.vertices.size() || v >= t.vertices.size())
            throw Error("forest dump: edge endpoint out of range");
        t.children[u].push_back(v);
    }
    t.recompute_roles();
    return t;
}

inline void dump_forest(const Forest& forest, std::ostream& out) {
    for (const TDag& t : forest.components) out << tdag_to_json(t).dump() << '\n';
}

inline Forest load_forest(std::istream& in) {
    Forest forest;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw SchemaError(line_no, "forest dump: invalid JSON");
        forest.components.push_back(tdag_from_json(j));
    }
    return forest;
}

}  // namespace txdag
