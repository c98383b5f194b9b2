// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "txdag/core.hpp"

namespace txdag {

enum class TioKind : std::uint8_t { Input, Output };

// Globally unique identifier of one transaction input or output.
// (blockhash, txid) disambiguates duplicated transaction hashes.
struct Tio {
    TioKind kind = TioKind::Output;
    Hash32 txid{};
    Hash32 blockhash{};
    std::uint32_t index = 0;

    friend bool operator==(const Tio&, const Tio&) = default;
};

struct TioHasher {
    std::size_t operator()(const Tio& t) const noexcept {
        std::size_t h = Hash32Hasher{}(t.txid);
        h ^= Hash32Hasher{}(t.blockhash) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h ^= (static_cast<std::size_t>(t.index) << 1) | static_cast<std::size_t>(t.kind);
        return h;
    }
};

struct InputRef {
    Hash32 prev_txid{};
    std::uint32_t prev_vout = 0;
};

// Position of the spending input, in flat transaction order.
struct SpentBy {
    std::uint32_t tx_pos = 0;
    std::uint32_t vin_index = 0;
};

struct OutputRecord {
    std::optional<std::string> address;  // absent == Null address
    std::vector<std::uint8_t> script;    // locking script bytes
    std::int64_t value = 0;
    std::optional<SpentBy> spent_by;     // absent until link(); absent after == UTXO

    bool has_address() const { return address.has_value(); }
};

struct Tx {
    Hash32 hash{};
    Hash32 blockhash{};
    bool coinbase = false;
    std::vector<InputRef> vin;
    std::vector<OutputRecord> vout;
};

struct Block {
    Hash32 hash{};
    std::uint64_t height = 0;
    std::uint32_t first_tx = 0;  // index into Ledger::txs
    std::uint32_t tx_count = 0;
};

// Termination application f: 1 if the output carries an address, 0 for Null.
inline int is_unknown_output(const OutputRecord& out) {
    return out.has_address() ? 1 : 0;
}

class Ledger {
public:
    std::vector<Block> blocks;
    std::vector<Tx> txs;  // flat, (height, in-block index) order
    std::vector<std::string> warnings;

    bool linked() const { return linked_; }
    std::size_t input_count() const { return input_count_; }
    std::size_t spent_count() const { return spent_count_; }
    std::size_t utxo_count() const { return output_count_ - spent_count_; }
    std::size_t output_count() const { return output_count_; }

    const Tx& tx_at(std::uint32_t pos) const { return txs.at(pos); }

    std::optional<std::uint32_t> find_tx(const Hash32& blockhash, const Hash32& txid) const {
        auto it = tx_index_.find(txid);
        if (it == tx_index_.end()) return std::nullopt;
        for (auto pos : it->second)
            if (txs[pos].blockhash == blockhash) return pos;
        return std::nullopt;
    }

    // Consensus duplicate-hash rule: the reference an input names resolves to
    // the latest occurrence of that hash strictly before the spender.
    std::optional<std::uint32_t> resolve_prev(const Hash32& txid, std::uint32_t before_pos) const {
        auto it = tx_index_.find(txid);
        if (it == tx_index_.end()) return std::nullopt;
        std::optional<std::uint32_t> best;
        for (auto pos : it->second)
            if (pos < before_pos && (!best || pos > *best)) best = pos;
        return best;
    }

    std::optional<std::uint32_t> resolve_tio_tx(const Tio& tio) const {
        auto pos = find_tx(tio.blockhash, tio.txid);
        if (!pos) return std::nullopt;
        const Tx& tx = txs[*pos];
        std::size_t bound = tio.kind == TioKind::Input ? tx.vin.size() : tx.vout.size();
        if (tio.index >= bound) return std::nullopt;
        return pos;
    }

    Tio input_tio(std::uint32_t pos, std::uint32_t vin_index) const {
        const Tx& tx = txs[pos];
        return Tio{TioKind::Input, tx.hash, tx.blockhash, vin_index};
    }

    Tio output_tio(std::uint32_t pos, std::uint32_t vout_index) const {
        const Tx& tx = txs[pos];
        return Tio{TioKind::Output, tx.hash, tx.blockhash, vout_index};
    }

    // Populates every OutputRecord::spent_by. Fatal on dangling references and
    // double spends; the result is a bijection between non-coinbase inputs and
    // spent outputs.
    void link() {
        spent_count_ = 0;
        for (auto& tx : txs)
            for (auto& out : tx.vout) out.spent_by.reset();
        for (std::uint32_t pos = 0; pos < txs.size(); ++pos) {
            const Tx& tx = txs[pos];
            if (tx.coinbase) continue;
            for (std::uint32_t i = 0; i < tx.vin.size(); ++i) {
                const InputRef& ref = tx.vin[i];
                auto prev = resolve_prev(ref.prev_txid, pos);
                if (!prev || ref.prev_vout >= txs[*prev].vout.size())
                    throw LinkError("dangling input: block " + hex::encode(tx.blockhash) +
                                    " tx " + hex::encode(tx.hash) + " vin " + std::to_string(i));
                OutputRecord& out = txs[*prev].vout[ref.prev_vout];
                if (out.spent_by)
                    throw LinkError("double spend: block " + hex::encode(tx.blockhash) +
                                    " tx " + hex::encode(tx.hash) + " vin " + std::to_string(i));
                out.spent_by = SpentBy{pos, i};
                ++spent_count_;
            }
        }
        linked_ = true;
    }

    void index_blocks() {
        tx_index_.clear();
        block_index_.clear();
        input_count_ = 0;
        output_count_ = 0;
        for (std::uint32_t pos = 0; pos < txs.size(); ++pos) {
            tx_index_[txs[pos].hash].push_back(pos);
            input_count_ += txs[pos].vin.size();
            output_count_ += txs[pos].vout.size();
        }
        for (std::uint32_t b = 0; b < blocks.size(); ++b)
            block_index_[blocks[b].hash] = b;
    }

private:
    std::unordered_map<Hash32, std::vector<std::uint32_t>, Hash32Hasher> tx_index_;
    std::unordered_map<Hash32, std::uint32_t, Hash32Hasher> block_index_;
    std::size_t input_count_ = 0;
    std::size_t output_count_ = 0;
    std::size_t spent_count_ = 0;
    bool linked_ = false;
};

// If the output is spent, the input consuming it; absent for UTXO members.
// The spender is asserted to sit strictly later in flat transaction order.
inline std::optional<Tio> funded_input(const Ledger& ledger, const Tio& out) {
    if (out.kind != TioKind::Output) throw Error("funded_input: not an output TIO");
    auto pos = ledger.resolve_tio_tx(out);
    if (!pos) throw Error("funded_input: unresolvable TIO " + hex::encode(out.txid));
    const OutputRecord& rec = ledger.txs[*pos].vout[out.index];
    if (!rec.spent_by) return std::nullopt;
    if (rec.spent_by->tx_pos <= *pos)
        throw GraphError("temporal order violated by spend of " + hex::encode(out.txid));
    return ledger.input_tio(rec.spent_by->tx_pos, rec.spent_by->vin_index);
}

// All outputs of the transaction containing the input, in vout order.
inline std::vector<Tio> funded_outputs(const Ledger& ledger, const Tio& inp) {
    if (inp.kind != TioKind::Input) throw Error("funded_outputs: not an input TIO");
    auto pos = ledger.resolve_tio_tx(inp);
    if (!pos) throw Error("funded_outputs: unresolvable TIO " + hex::encode(inp.txid));
    const Tx& tx = ledger.txs[*pos];
    std::vector<Tio> outs;
    outs.reserve(tx.vout.size());
    for (std::uint32_t i = 0; i < tx.vout.size(); ++i) outs.push_back(ledger.output_tio(*pos, i));
    return outs;
}

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* key,
                                           std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(line, std::string("missing field '") + key + "'");
    return *it;
}

inline Hash32 parse_hash_field(const nlohmann::json& v, const char* key, std::size_t line) {
    if (!v.is_string()) throw SchemaError(line, std::string("field '") + key + "' must be a string");
    auto h = hex::decode_hash(v.get_ref<const std::string&>());
    if (!h) throw SchemaError(line, std::string("field '") + key + "' must be 64 lowercase hex chars");
    return *h;
}

}  // namespace detail

// Reads the newline-delimited JSON interchange format, one block per line.
inline Ledger ingest_stream(std::istream& in) {
    Ledger ledger;
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::uint64_t> prev_height;
    std::unordered_map<Hash32, std::size_t, Hash32Hasher> seen_blocks;

    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xef &&
            static_cast<unsigned char>(line[1]) == 0xbb && static_cast<unsigned char>(line[2]) == 0xbf)
            throw SchemaError(1, "byte order mark not allowed");
        if (line.empty()) continue;

        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw SchemaError(line_no, "invalid JSON");
        if (!j.is_object()) throw SchemaError(line_no, "block must be a JSON object");

        Block block;
        block.hash = detail::parse_hash_field(detail::require_field(j, "hash", line_no), "hash", line_no);
        const auto& jheight = detail::require_field(j, "height", line_no);
        if (!jheight.is_number_unsigned())
            throw SchemaError(line_no, "field 'height' must be a non-negative integer");
        block.height = jheight.get<std::uint64_t>();

        if (auto [it, fresh] = seen_blocks.emplace(block.hash, line_no); !fresh)
            throw SchemaError(line_no, "duplicate block hash " + hex::encode(block.hash) +
                                           " (first seen line " + std::to_string(it->second) + ")");
        if (prev_height) {
            if (block.height <= *prev_height)
                throw SchemaError(line_no, "block height " + std::to_string(block.height) +
                                               " not increasing");
            if (block.height != *prev_height + 1)
                ledger.warnings.push_back("line " + std::to_string(line_no) +
                                          ": non-contiguous height " + std::to_string(block.height));
        }
        prev_height = block.height;

        const auto& jtxs = detail::require_field(j, "tx", line_no);
        if (!jtxs.is_array()) throw SchemaError(line_no, "field 'tx' must be an array");

        block.first_tx = static_cast<std::uint32_t>(ledger.txs.size());
        std::unordered_map<Hash32, char, Hash32Hasher> block_txs;  // (blockhash, hash) is unique
        for (const auto& jtx : jtxs) {
            if (!jtx.is_object()) throw SchemaError(line_no, "tx must be a JSON object");
            Tx tx;
            tx.hash = detail::parse_hash_field(detail::require_field(jtx, "hash", line_no), "hash", line_no);
            if (!block_txs.emplace(tx.hash, 0).second)
                throw SchemaError(line_no, "duplicate tx hash " + hex::encode(tx.hash) +
                                               " within one block");
            tx.blockhash = block.hash;
            const auto& jcb = detail::require_field(jtx, "coinbase", line_no);
            if (!jcb.is_boolean()) throw SchemaError(line_no, "field 'coinbase' must be a boolean");
            tx.coinbase = jcb.get<bool>();

            const auto& jvin = detail::require_field(jtx, "vin", line_no);
            if (!jvin.is_array()) throw SchemaError(line_no, "field 'vin' must be an array");
            for (const auto& jin : jvin) {
                InputRef ref;
                ref.prev_txid = detail::parse_hash_field(detail::require_field(jin, "prev_txid", line_no),
                                                         "prev_txid", line_no);
                const auto& jvoutidx = detail::require_field(jin, "prev_vout", line_no);
                if (!jvoutidx.is_number_unsigned())
                    throw SchemaError(line_no, "field 'prev_vout' must be a non-negative integer");
                ref.prev_vout = jvoutidx.get<std::uint32_t>();
                tx.vin.push_back(ref);
            }
            if (tx.coinbase != tx.vin.empty())
                throw SchemaError(line_no, "coinbase flag must match empty vin");

            const auto& jvout = detail::require_field(jtx, "vout", line_no);
            if (!jvout.is_array()) throw SchemaError(line_no, "field 'vout' must be an array");
            for (const auto& jout : jvout) {
                OutputRecord out;
                const auto& jaddr = detail::require_field(jout, "address", line_no);
                if (jaddr.is_string())
                    out.address = jaddr.get<std::string>();
                else if (!jaddr.is_null())
                    throw SchemaError(line_no, "field 'address' must be a string or null");
                const auto& jscript = detail::require_field(jout, "script", line_no);
                if (!jscript.is_string())
                    throw SchemaError(line_no, "field 'script' must be a hex string");
                auto bytes = hex::decode_bytes(jscript.get_ref<const std::string&>());
                if (!bytes) throw SchemaError(line_no, "field 'script' must be lowercase hex");
                out.script = std::move(*bytes);
                const auto& jval = detail::require_field(jout, "value", line_no);
                if (!jval.is_number_integer() || jval.get<std::int64_t>() < 0)
                    throw SchemaError(line_no, "field 'value' must be a non-negative integer");
                out.value = jval.get<std::int64_t>();
                tx.vout.push_back(std::move(out));
            }
            ledger.txs.push_back(std::move(tx));
        }
        block.tx_count = static_cast<std::uint32_t>(ledger.txs.size()) - block.first_tx;
        ledger.blocks.push_back(block);
    }
    ledger.index_blocks();
    return ledger;
}

inline Ledger ingest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open ledger file " + path);
    return ingest_stream(in);
}

inline void write_stream(const Ledger& ledger, std::ostream& out) {
    for (const Block& block : ledger.blocks) {
        nlohmann::json jtxs = nlohmann::json::array();
        for (std::uint32_t i = 0; i < block.tx_count; ++i) {
            const Tx& tx = ledger.txs[block.first_tx + i];
            nlohmann::json jvin = nlohmann::json::array();
            for (const InputRef& ref : tx.vin)
                jvin.push_back({{"prev_txid", hex::encode(ref.prev_txid)},
                                {"prev_vout", ref.prev_vout}});
            nlohmann::json jvout = nlohmann::json::array();
            for (const OutputRecord& rec : tx.vout) {
                nlohmann::json jaddr;
                if (rec.address) jaddr = *rec.address;
                jvout.push_back({{"address", jaddr},
                                 {"script", hex::encode(rec.script)},
                                 {"value", rec.value}});
            }
            jtxs.push_back({{"hash", hex::encode(tx.hash)},
                            {"coinbase", tx.coinbase},
                            {"vin", jvin},
                            {"vout", jvout}});
        }
        nlohmann::json jblock = {{"hash", hex::encode(block.hash)},
                                 {"height", block.height},
                                 {"tx", jtxs}};
        out << jblock.dump() << '\n';
    }
}

inline void write(const Ledger& ledger, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file " + path);
    write_stream(ledger, out);
}

}  // namespace txdag
