// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "txdag/core.hpp"
#include "txdag/ledger.hpp"

namespace txdag {

// Planted pattern families. Each instance becomes one weakly connected
// component of the extracted forest (plus a shared funding component when
// root_kind == "spend").
//
//   chain         root -> unknown^(length-2) -> addressed leaf
//   trivial_chain chain whose first unknown carries a trivial script
//   fanout        root -> unknown -> `width` addressed leaves
//   bundle        root with `unknowns`+`addressed` outputs; one tx spends all
//                 unknowns and pays `leaves` addressed outputs
//   join          `roots` root txs, one unknown each, all spent by one tx
//                 paying `leaves` addressed outputs
//   mixed_join    root1 -> unknown (+`addressed` extras); the spender also
//                 consumes an addressed output, making it a second root
//   star          root -> `width` addressed leaves        (height 1)
//   unspent       root -> one unspent unknown output      (height 1)
struct PatternSpec {
    std::string shape;
    std::uint32_t count = 1;
    std::uint32_t length = 3;
    std::uint32_t width = 1;
    std::uint32_t unknowns = 1;
    std::uint32_t addressed = 0;
    std::uint32_t leaves = 1;
    std::uint32_t roots = 1;
    std::string root_kind = "coinbase";               // coinbase | spend
    std::optional<std::vector<std::uint8_t>> root_script;  // script for root unknowns
};

struct GeneratorSpec {
    std::uint32_t txs_per_block = 256;
    std::uint32_t plain_blocks = 0;  // coinbase-only blocks; default 2 when no patterns
    std::vector<PatternSpec> patterns;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline Hash32 derive_hash(std::uint64_t seed, std::uint64_t domain, std::uint64_t counter) {
    std::uint64_t state = seed ^ (domain * 0x517cc1b727220a95ull) ^ (counter * 0x2545f4914f6cdd1dull);
    Hash32 h;
    for (int i = 0; i < 4; ++i) {
        std::uint64_t v = splitmix64(state);
        for (int b = 0; b < 8; ++b) h[i * 8 + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
    return h;
}

struct DraftOutput {
    std::optional<std::string> address;
    std::vector<std::uint8_t> script;
    std::int64_t value = 100000;
};

struct DraftInput {
    std::size_t tx;
    std::uint32_t vout;
};

struct DraftTx {
    bool coinbase = false;
    std::vector<DraftInput> vin;
    std::vector<DraftOutput> vout;
};

class SynthBuilder {
public:
    SynthBuilder(std::uint64_t seed) : seed_(seed) {
        // Slot 0 is the shared funding coinbase for "spend"-kind roots. It is
        // dropped at materialize time when nothing claimed an output from it.
        drafts_.emplace_back();
        drafts_[0].coinbase = true;
    }

    DraftOutput addressed_output() {
        DraftOutput out;
        out.address = "addr" + std::to_string(addr_counter_);
        std::uint64_t state = seed_ ^ 0xadd4e55ull ^ addr_counter_;
        out.script = {0x76, 0xa9, 0x14};
        for (int i = 0; i < 20; i += 8) {
            std::uint64_t v = splitmix64(state);
            for (int b = 0; b < 8 && i + b < 20; ++b)
                out.script.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
        }
        out.script.push_back(0x88);
        out.script.push_back(0xac);
        ++addr_counter_;
        return out;
    }

    DraftOutput unknown_output(const std::optional<std::vector<std::uint8_t>>& script) {
        DraftOutput out;
        if (script) {
            out.script = *script;
        } else {
            out.script = {0x6a, 0x08};
            std::uint64_t v = ++unknown_counter_;
            for (int b = 0; b < 8; ++b) out.script.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
        }
        return out;
    }

    // Root transaction with the given outputs: a coinbase, or a tx spending
    // one addressed output of the shared funding coinbase.
    std::size_t emit_root(const std::string& kind, std::vector<DraftOutput> outs) {
        DraftTx tx;
        tx.vout = std::move(outs);
        if (kind == "spend") {
            tx.vin.push_back(claim_funding());
        } else {
            tx.coinbase = true;
        }
        drafts_.push_back(std::move(tx));
        return drafts_.size() - 1;
    }

    std::size_t emit_spender(std::vector<DraftInput> ins, std::vector<DraftOutput> outs) {
        DraftTx tx;
        tx.vin = std::move(ins);
        tx.vout = std::move(outs);
        drafts_.push_back(std::move(tx));
        return drafts_.size() - 1;
    }

    DraftInput claim_funding() {
        auto& funding = drafts_[0];
        funding.vout.push_back(addressed_output());
        funding.vout.back().value = 5000000000ll;
        return DraftInput{0, static_cast<std::uint32_t>(funding.vout.size() - 1)};
    }

    Ledger materialize(std::uint32_t txs_per_block) const {
        std::vector<std::size_t> emit;
        for (std::size_t i = 0; i < drafts_.size(); ++i)
            if (i != 0 || !drafts_[0].vout.empty()) emit.push_back(i);

        std::vector<Hash32> tx_hashes(drafts_.size());
        for (std::size_t i = 0; i < drafts_.size(); ++i) tx_hashes[i] = derive_hash(seed_, 1, i);

        Ledger ledger;
        std::size_t pos = 0;
        std::uint64_t block_no = 0;
        while (pos < emit.size() || block_no == 0) {
            Block block;
            block.hash = derive_hash(seed_, 2, block_no);
            block.height = block_no;
            block.first_tx = static_cast<std::uint32_t>(ledger.txs.size());
            std::size_t end = std::min(emit.size(), pos + txs_per_block);
            for (; pos < end; ++pos) {
                const DraftTx& d = drafts_[emit[pos]];
                Tx tx;
                tx.hash = tx_hashes[emit[pos]];
                tx.blockhash = block.hash;
                tx.coinbase = d.coinbase;
                for (const DraftInput& in : d.vin)
                    tx.vin.push_back(InputRef{tx_hashes[in.tx], in.vout});
                for (const DraftOutput& out : d.vout) {
                    OutputRecord rec;
                    rec.address = out.address;
                    rec.script = out.script;
                    rec.value = out.value;
                    tx.vout.push_back(std::move(rec));
                }
                ledger.txs.push_back(std::move(tx));
            }
            block.tx_count = static_cast<std::uint32_t>(ledger.txs.size()) - block.first_tx;
            ledger.blocks.push_back(block);
            ++block_no;
            if (pos >= emit.size()) break;
        }
        ledger.index_blocks();
        return ledger;
    }

    void emit_plain_block_txs(std::uint32_t n) {
        for (std::uint32_t i = 0; i < n; ++i) {
            DraftTx tx;
            tx.coinbase = true;
            tx.vout.push_back(addressed_output());
            tx.vout.back().value = 5000000000ll;
            drafts_.push_back(std::move(tx));
        }
    }

private:
    std::uint64_t seed_;
    std::vector<DraftTx> drafts_;
    std::uint64_t addr_counter_ = 0;
    std::uint64_t unknown_counter_ = 0;
};

inline const std::vector<std::uint8_t> kTrivialScript = {0x51};  // OP_1

}  // namespace detail

inline void emit_pattern(detail::SynthBuilder& b, const PatternSpec& p) {
    using detail::DraftInput;
    using detail::DraftOutput;

    if (p.shape == "chain" || p.shape == "trivial_chain") {
        if (p.length < 2) throw Error("generator: chain length must be >= 2");
        if (p.shape == "trivial_chain" && p.length < 4)
            throw Error("generator: trivial_chain length must be >= 4");
        if (p.length == 2) {
            b.emit_root(p.root_kind, {b.addressed_output()});
            return;
        }
        auto first = b.unknown_output(p.root_script);
        if (p.shape == "trivial_chain") first.script = detail::kTrivialScript;
        std::size_t prev = b.emit_root(p.root_kind, {std::move(first)});
        for (std::uint32_t v = 0; v + 3 < p.length; ++v)
            prev = b.emit_spender({DraftInput{prev, 0}}, {b.unknown_output(std::nullopt)});
        b.emit_spender({DraftInput{prev, 0}}, {b.addressed_output()});
    } else if (p.shape == "fanout") {
        if (p.width < 1) throw Error("generator: fanout width must be >= 1");
        std::size_t root = b.emit_root(p.root_kind, {b.unknown_output(p.root_script)});
        std::vector<DraftOutput> outs;
        for (std::uint32_t i = 0; i < p.width; ++i) outs.push_back(b.addressed_output());
        b.emit_spender({DraftInput{root, 0}}, std::move(outs));
    } else if (p.shape == "bundle") {
        if (p.unknowns < 1) throw Error("generator: bundle needs >= 1 unknown output");
        if (p.leaves < 1) throw Error("generator: zero-output tx requested");
        std::vector<DraftOutput> root_outs;
        for (std::uint32_t i = 0; i < p.unknowns; ++i)
            root_outs.push_back(b.unknown_output(p.root_script));
        for (std::uint32_t i = 0; i < p.addressed; ++i) root_outs.push_back(b.addressed_output());
        std::size_t root = b.emit_root(p.root_kind, std::move(root_outs));
        std::vector<DraftInput> ins;
        for (std::uint32_t i = 0; i < p.unknowns; ++i) ins.push_back(DraftInput{root, i});
        std::vector<DraftOutput> leaf_outs;
        for (std::uint32_t i = 0; i < p.leaves; ++i) leaf_outs.push_back(b.addressed_output());
        b.emit_spender(std::move(ins), std::move(leaf_outs));
    } else if (p.shape == "join") {
        if (p.roots < 1) throw Error("generator: join needs >= 1 root");
        if (p.leaves < 1) throw Error("generator: zero-output tx requested");
        std::vector<DraftInput> ins;
        for (std::uint32_t r = 0; r < p.roots; ++r) {
            std::size_t root = b.emit_root(p.root_kind, {b.unknown_output(p.root_script)});
            ins.push_back(DraftInput{root, 0});
        }
        std::vector<DraftOutput> leaf_outs;
        for (std::uint32_t i = 0; i < p.leaves; ++i) leaf_outs.push_back(b.addressed_output());
        b.emit_spender(std::move(ins), std::move(leaf_outs));
    } else if (p.shape == "mixed_join") {
        if (p.leaves < 1) throw Error("generator: zero-output tx requested");
        std::vector<DraftOutput> root_outs;
        root_outs.push_back(b.unknown_output(p.root_script));
        for (std::uint32_t i = 0; i < p.addressed; ++i) root_outs.push_back(b.addressed_output());
        std::size_t root = b.emit_root(p.root_kind, std::move(root_outs));
        std::vector<DraftInput> ins;
        ins.push_back(DraftInput{root, 0});
        ins.push_back(b.claim_funding());  // addressed spend: the spender is a root too
        std::vector<DraftOutput> leaf_outs;
        for (std::uint32_t i = 0; i < p.leaves; ++i) leaf_outs.push_back(b.addressed_output());
        b.emit_spender(std::move(ins), std::move(leaf_outs));
    } else if (p.shape == "star") {
        if (p.width < 1) throw Error("generator: zero-output tx requested");
        std::vector<DraftOutput> outs;
        for (std::uint32_t i = 0; i < p.width; ++i) outs.push_back(b.addressed_output());
        b.emit_root(p.root_kind, std::move(outs));
    } else if (p.shape == "unspent") {
        b.emit_root(p.root_kind, {b.unknown_output(p.root_script)});
    } else {
        throw Error("generator: unknown shape '" + p.shape + "'");
    }
}

// Deterministic for a fixed (spec, seed): repeated runs are byte-identical.
inline Ledger synth(const GeneratorSpec& spec, std::uint64_t seed) {
    detail::SynthBuilder builder(seed);
    for (const PatternSpec& p : spec.patterns)
        for (std::uint32_t i = 0; i < p.count; ++i) emit_pattern(builder, p);
    std::uint32_t plain = spec.plain_blocks;
    if (spec.patterns.empty() && plain == 0) plain = 2;
    builder.emit_plain_block_txs(plain);
    if (spec.txs_per_block == 0) throw Error("generator: txs_per_block must be positive");
    return builder.materialize(spec.txs_per_block);
}

inline GeneratorSpec parse_generator_spec(const nlohmann::json& j) {
    if (!j.is_object()) throw Error("generator spec must be a JSON object");
    GeneratorSpec spec;
    if (j.contains("txs_per_block")) spec.txs_per_block = j.at("txs_per_block").get<std::uint32_t>();
    if (j.contains("blocks")) spec.plain_blocks = j.at("blocks").get<std::uint32_t>();
    if (j.contains("patterns")) {
        for (const auto& jp : j.at("patterns")) {
            PatternSpec p;
            p.shape = jp.at("shape").get<std::string>();
            if (jp.contains("count")) p.count = jp.at("count").get<std::uint32_t>();
            if (jp.contains("length")) p.length = jp.at("length").get<std::uint32_t>();
            if (jp.contains("width")) p.width = jp.at("width").get<std::uint32_t>();
            if (jp.contains("unknowns")) p.unknowns = jp.at("unknowns").get<std::uint32_t>();
            if (jp.contains("addressed")) p.addressed = jp.at("addressed").get<std::uint32_t>();
            if (jp.contains("leaves")) p.leaves = jp.at("leaves").get<std::uint32_t>();
            if (jp.contains("roots")) p.roots = jp.at("roots").get<std::uint32_t>();
            if (jp.contains("root_kind")) p.root_kind = jp.at("root_kind").get<std::string>();
            if (p.root_kind != "coinbase" && p.root_kind != "spend")
                throw Error("generator: root_kind must be 'coinbase' or 'spend'");
            if (jp.contains("root_script")) {
                auto bytes = hex::decode_bytes(jp.at("root_script").get<std::string>());
                if (!bytes) throw Error("generator: root_script must be lowercase hex");
                p.root_script = std::move(*bytes);
            }
            spec.patterns.push_back(std::move(p));
        }
    }
    return spec;
}

inline GeneratorSpec load_generator_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open generator spec " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error("generator spec is not valid JSON: " + path);
    return parse_generator_spec(j);
}

}  // namespace txdag
