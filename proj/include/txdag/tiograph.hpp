// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "txdag/core.hpp"
#include "txdag/ledger.hpp"

namespace txdag {

// Topological check over plain adjacency lists. Throws GraphError with a
// cycle witness when no topological order exists.
inline void assert_acyclic(const std::vector<std::vector<std::uint32_t>>& adj) {
    std::size_t n = adj.size();
    std::vector<std::uint32_t> indeg(n, 0);
    for (const auto& out : adj)
        for (auto v : out) ++indeg[v];
    std::vector<std::uint32_t> queue;
    for (std::uint32_t v = 0; v < n; ++v)
        if (indeg[v] == 0) queue.push_back(v);
    std::size_t seen = 0;
    while (!queue.empty()) {
        std::uint32_t v = queue.back();
        queue.pop_back();
        ++seen;
        for (auto w : adj[v])
            if (--indeg[w] == 0) queue.push_back(w);
    }
    if (seen == n) return;

    // Every remaining vertex lies on or feeds a cycle; walk until a repeat.
    std::uint32_t start = 0;
    while (indeg[start] == 0) ++start;
    std::vector<std::uint32_t> path;
    std::vector<std::int32_t> at(n, -1);
    std::uint32_t v = start;
    while (at[v] < 0) {
        at[v] = static_cast<std::int32_t>(path.size());
        path.push_back(v);
        for (auto w : adj[v])
            if (indeg[w] > 0) {
                v = w;
                break;
            }
    }
    std::string witness;
    for (std::size_t i = static_cast<std::size_t>(at[v]); i < path.size(); ++i)
        witness += std::to_string(path[i]) + " -> ";
    witness += std::to_string(v);
    throw GraphError("cycle found: " + witness);
}

enum class AlphaKind : std::uint8_t { Coinbase, AddressedSpend };

// A transaction's input set qualifying as a pattern root: either a coinbase
// or a set containing an input that spends an addressed output. For
// coinbases the vertex is synthetic, keyed by the transaction position.
struct AlphaNode {
    std::uint32_t tx_pos = 0;
    AlphaKind kind = AlphaKind::Coinbase;

    friend bool operator==(const AlphaNode&, const AlphaNode&) = default;

    std::vector<Tio> inputs(const Ledger& ledger) const {
        const Tx& tx = ledger.tx_at(tx_pos);
        std::vector<Tio> tios;
        for (std::uint32_t i = 0; i < tx.vin.size(); ++i) tios.push_back(ledger.input_tio(tx_pos, i));
        return tios;
    }
};

inline std::vector<AlphaNode> find_alpha_nodes(const Ledger& ledger) {
    if (!ledger.linked()) throw Error("find_alpha_nodes: ledger is not linked");
    std::vector<AlphaNode> alphas;
    for (std::uint32_t pos = 0; pos < ledger.txs.size(); ++pos) {
        const Tx& tx = ledger.txs[pos];
        if (tx.coinbase) {
            alphas.push_back(AlphaNode{pos, AlphaKind::Coinbase});
            continue;
        }
        for (std::uint32_t i = 0; i < tx.vin.size(); ++i) {
            auto prev = ledger.resolve_prev(tx.vin[i].prev_txid, pos);
            if (!prev) throw Error("find_alpha_nodes: unresolved input");
            if (ledger.txs[*prev].vout[tx.vin[i].prev_vout].has_address()) {
                alphas.push_back(AlphaNode{pos, AlphaKind::AddressedSpend});
                break;
            }
        }
    }
    return alphas;
}

// Materialized TIO graph: every input and output is a vertex; per transaction
// the complete bipartite input x output edges, plus one edge from each spent
// output to its funded input. Intended for tests and small ledgers; the
// extraction pipeline never builds it.
class TioGraph {
public:
    explicit TioGraph(const Ledger& ledger) : ledger_(&ledger) {
        if (!ledger.linked()) throw Error("build_tio_graph: ledger is not linked");
        std::uint32_t id = 0;
        out_base_.reserve(ledger.txs.size());
        in_base_.reserve(ledger.txs.size());
        for (const Tx& tx : ledger.txs) {
            out_base_.push_back(id);
            id += static_cast<std::uint32_t>(tx.vout.size());
            in_base_.push_back(id);
            id += static_cast<std::uint32_t>(tx.vin.size());
        }
        adj_.assign(id, {});
        edge_count_ = 0;
        for (std::uint32_t pos = 0; pos < ledger.txs.size(); ++pos) {
            const Tx& tx = ledger.txs[pos];
            for (std::uint32_t i = 0; i < tx.vin.size(); ++i)
                for (std::uint32_t o = 0; o < tx.vout.size(); ++o)
                    add_edge(input_id(pos, i), output_id(pos, o));
            for (std::uint32_t o = 0; o < tx.vout.size(); ++o)
                if (const auto& spent = tx.vout[o].spent_by)
                    add_edge(output_id(pos, o), input_id(spent->tx_pos, spent->vin_index));
        }
    }

    std::size_t vertex_count() const { return adj_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    const std::vector<std::vector<std::uint32_t>>& adjacency() const { return adj_; }

    std::uint32_t output_id(std::uint32_t tx_pos, std::uint32_t vout) const {
        return out_base_[tx_pos] + vout;
    }
    std::uint32_t input_id(std::uint32_t tx_pos, std::uint32_t vin) const {
        return in_base_[tx_pos] + vin;
    }

    bool is_input_vertex(std::uint32_t id) const {
        std::uint32_t pos = tx_of(id);
        return id >= in_base_[pos];
    }

    std::uint32_t tx_of(std::uint32_t id) const {
        auto it = std::upper_bound(out_base_.begin(), out_base_.end(), id);
        return static_cast<std::uint32_t>(it - out_base_.begin()) - 1;
    }

    Tio tio_of(std::uint32_t id) const {
        std::uint32_t pos = tx_of(id);
        if (id >= in_base_[pos]) return ledger_->input_tio(pos, id - in_base_[pos]);
        return ledger_->output_tio(pos, id - out_base_[pos]);
    }

    const Ledger& ledger() const { return *ledger_; }

private:
    void add_edge(std::uint32_t a, std::uint32_t b) {
        adj_[a].push_back(b);
        ++edge_count_;
    }

    const Ledger* ledger_;
    std::vector<std::uint32_t> out_base_, in_base_;
    std::vector<std::vector<std::uint32_t>> adj_;
    std::size_t edge_count_ = 0;
};

inline TioGraph build_tio_graph(const Ledger& ledger) {
    return TioGraph(ledger);
}

inline void assert_acyclic(const TioGraph& g) {
    assert_acyclic(g.adjacency());
}

// Debug dump: one `tail<TAB>head` line per edge.
inline void dump_edges(const TioGraph& g, std::ostream& out) {
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v)
        for (std::uint32_t w : g.adjacency()[v]) out << v << '\t' << w << '\n';
}

// Sidecar mapping node ids to TIO descriptors, one JSON object per line.
inline void dump_tio_sidecar(const TioGraph& g, std::ostream& out) {
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
        Tio tio = g.tio_of(v);
        nlohmann::json j = {{"id", v},
                            {"kind", tio.kind == TioKind::Input ? "input" : "output"},
                            {"txid", hex::encode(tio.txid)},
                            {"blockhash", hex::encode(tio.blockhash)},
                            {"index", tio.index}};
        out << j.dump() << '\n';
    }
}

// Result of contracting alpha input sets to single vertices and eliding the
// all-unknown input sets: only alpha vertices and output vertices remain.
class ContractedTioGraph {
public:
    struct Node {
        bool is_alpha = false;
        std::uint32_t tx_pos = 0;
        std::uint32_t vout = 0;  // meaningful for output nodes only
    };

    std::vector<Node> nodes;
    std::vector<std::vector<std::uint32_t>> adj;

    std::size_t vertex_count() const { return nodes.size(); }
    std::size_t edge_count() const {
        std::size_t m = 0;
        for (const auto& out : adj) m += out.size();
        return m;
    }
    const std::vector<std::vector<std::uint32_t>>& adjacency() const { return adj; }
};

inline void assert_acyclic(const ContractedTioGraph& g) {
    assert_acyclic(g.adjacency());
}

inline ContractedTioGraph contract(const TioGraph& g, const std::vector<AlphaNode>& alphas,
                                   const Ledger& ledger) {
    ContractedTioGraph out;
    std::vector<std::int32_t> alpha_of_tx(ledger.txs.size(), -1);
    for (std::size_t a = 0; a < alphas.size(); ++a) alpha_of_tx[alphas[a].tx_pos] = static_cast<std::int32_t>(a);

    // output vertices first (ledger order), then one vertex per alpha node
    std::vector<std::uint32_t> out_base(ledger.txs.size());
    std::uint32_t id = 0;
    for (std::uint32_t pos = 0; pos < ledger.txs.size(); ++pos) {
        out_base[pos] = id;
        for (std::uint32_t o = 0; o < ledger.txs[pos].vout.size(); ++o)
            out.nodes.push_back(ContractedTioGraph::Node{false, pos, o});
        id += static_cast<std::uint32_t>(ledger.txs[pos].vout.size());
    }
    std::vector<std::uint32_t> alpha_vertex(alphas.size());
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        alpha_vertex[a] = id++;
        out.nodes.push_back(ContractedTioGraph::Node{true, alphas[a].tx_pos, 0});
    }
    out.adj.assign(id, {});

    // transformation (i): each alpha vertex keeps the bipartite edges to its
    // transaction's outputs (synthesized for empty coinbase input sets)
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        std::uint32_t pos = alphas[a].tx_pos;
        for (std::uint32_t o = 0; o < ledger.txs[pos].vout.size(); ++o)
            out.adj[alpha_vertex[a]].push_back(out_base[pos] + o);
    }

    // spent-output edges: o -> funded input becomes o -> alpha vertex when the
    // spender is an alpha transaction, otherwise transformation (ii) rewires o
    // to every output of the spender
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
        if (g.is_input_vertex(v)) continue;
        std::uint32_t pos = g.tx_of(v);
        const Tio tio = g.tio_of(v);
        std::uint32_t src = out_base[pos] + tio.index;
        for (std::uint32_t w : g.adjacency()[v]) {
            std::uint32_t spender = g.tx_of(w);
            if (alpha_of_tx[spender] >= 0) {
                out.adj[src].push_back(alpha_vertex[alpha_of_tx[spender]]);
            } else {
                for (std::uint32_t o = 0; o < ledger.txs[spender].vout.size(); ++o)
                    out.adj[src].push_back(out_base[spender] + o);
            }
        }
    }

    // collapse parallel edges
    for (auto& lst : out.adj) {
        std::sort(lst.begin(), lst.end());
        lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
    }
    return out;
}

}  // namespace txdag
