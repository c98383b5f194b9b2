// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "txdag/ledger.hpp"
#include "txdag/synth.hpp"
#include "txdag/tdag.hpp"

namespace testutil {

inline std::uint64_t mix(std::uint64_t& state) {
    return txdag::detail::splitmix64(state);
}

inline std::uint64_t bounded(std::uint64_t& state, std::uint64_t n) {
    return mix(state) % n;
}

inline txdag::Hash32 h32(std::uint64_t tag) {
    std::uint64_t state = tag * 0x9e3779b97f4a7c15ull + 1;
    return txdag::detail::derive_hash(state, 7, tag);
}

// Hand-built ledgers for unit fixtures.
class LedgerBuilder {
public:
    // txs are placed into blocks of `per_block` transactions, height order
    explicit LedgerBuilder(std::uint32_t per_block = 100) : per_block_(per_block) {}

    std::uint32_t coinbase(std::vector<txdag::OutputRecord> outs) {
        txdag::Tx tx;
        tx.coinbase = true;
        tx.vout = std::move(outs);
        txs_.push_back(std::move(tx));
        return static_cast<std::uint32_t>(txs_.size() - 1);
    }

    std::uint32_t spend(std::vector<std::pair<std::uint32_t, std::uint32_t>> ins,
                        std::vector<txdag::OutputRecord> outs) {
        txdag::Tx tx;
        for (auto [t, o] : ins) tx.vin.push_back(txdag::InputRef{h32(1000 + t), o});
        tx.vout = std::move(outs);
        txs_.push_back(std::move(tx));
        return static_cast<std::uint32_t>(txs_.size() - 1);
    }

    txdag::Ledger build() const {
        txdag::Ledger ledger;
        for (std::size_t i = 0; i < txs_.size(); ++i) {
            if (i % per_block_ == 0) {
                txdag::Block b;
                b.hash = h32(2000 + ledger.blocks.size());
                b.height = ledger.blocks.size();
                b.first_tx = static_cast<std::uint32_t>(i);
                ledger.blocks.push_back(b);
            }
            txdag::Tx tx = txs_[i];
            tx.hash = h32(1000 + i);
            tx.blockhash = ledger.blocks.back().hash;
            ledger.txs.push_back(std::move(tx));
            ++ledger.blocks.back().tx_count;
        }
        ledger.index_blocks();
        return ledger;
    }

private:
    std::uint32_t per_block_;
    std::vector<txdag::Tx> txs_;
};

inline txdag::OutputRecord addressed(const std::string& addr) {
    txdag::OutputRecord out;
    out.address = addr;
    out.script = {0x76, 0xa9, 0x14, 0xab, 0x88, 0xac};
    out.value = 1000;
    return out;
}

inline txdag::OutputRecord unknown(std::vector<std::uint8_t> script = {0x6a, 0x01, 0x42}) {
    txdag::OutputRecord out;
    out.script = std::move(script);
    out.value = 1000;
    return out;
}

// Structure-only T-DAG from parent assignments: parent[i] < i, vertex 0 root.
inline txdag::TDag tdag_from_parents(const std::vector<int>& parent) {
    txdag::TDag t;
    std::size_t n = parent.size() + 1;
    t.vertices.resize(n);
    t.children.resize(n);
    for (std::size_t i = 1; i < n; ++i)
        t.children[parent[i - 1]].push_back(static_cast<std::uint32_t>(i));
    t.recompute_roles();
    return t;
}

// Random rooted tree: each vertex picks an earlier parent.
inline txdag::TDag random_tree(std::uint64_t& state, std::size_t n) {
    std::vector<int> parent;
    for (std::size_t i = 1; i < n; ++i) parent.push_back(static_cast<int>(bounded(state, i)));
    return tdag_from_parents(parent);
}

// Random single-source DAG on a topological order; every non-root vertex
// gets at least one earlier parent, extra edges create shared vertices.
inline txdag::TDag random_shared_dag(std::uint64_t& state, std::size_t n) {
    txdag::TDag t;
    t.vertices.resize(n);
    t.children.resize(n);
    for (std::size_t i = 1; i < n; ++i) {
        std::uint64_t first = bounded(state, i);
        t.children[first].push_back(static_cast<std::uint32_t>(i));
        for (std::size_t p = 0; p < i; ++p) {
            if (p == first) continue;
            if (bounded(state, 100) < 25)
                t.children[p].push_back(static_cast<std::uint32_t>(i));
        }
    }
    t.recompute_roles();
    return t;
}

// Renames vertices by a random permutation; the abstract graph is unchanged.
inline txdag::TDag permuted_copy(const txdag::TDag& t, std::uint64_t& state) {
    std::size_t n = t.vertex_count();
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[bounded(state, i)]);
    txdag::TDag out;
    out.vertices.resize(n);
    out.children.resize(n);
    for (std::uint32_t v = 0; v < n; ++v) {
        out.vertices[perm[v]] = t.vertices[v];
        for (auto w : t.children[v]) out.children[perm[v]].push_back(perm[w]);
    }
    out.recompute_roles();
    return out;
}

}  // namespace testutil
