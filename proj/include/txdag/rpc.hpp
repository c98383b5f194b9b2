// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "txdag/core.hpp"
#include "txdag/ledger.hpp"

namespace txdag {

// Minimal JSON-RPC client for a reference node: getblockhash and
// getblock(verbosity=2). Fetched data is written to the interchange format;
// nothing downstream talks to the network.
class RpcClient {
public:
    // auth is "user:password" (HTTP basic), empty for none.
    RpcClient(const std::string& url, const std::string& auth) : client_(url.c_str()) {
        client_.set_connection_timeout(10);
        client_.set_read_timeout(60);
        if (!auth.empty()) {
            auto colon = auth.find(':');
            if (colon == std::string::npos) throw RpcError("auth must be user:password");
            client_.set_basic_auth(auth.substr(0, colon), auth.substr(colon + 1));
        }
    }

    nlohmann::json call(const std::string& method, const nlohmann::json& params) {
        nlohmann::json request = {
            {"jsonrpc", "1.0"}, {"id", "txdag"}, {"method", method}, {"params", params}};
        auto res = client_.Post("/", request.dump(), "application/json");
        if (!res) throw RpcError("rpc " + method + ": no response from node");
        if (res->status == 401 || res->status == 403)
            throw RpcError("rpc " + method + ": authentication failed (" +
                           std::to_string(res->status) + ")");
        nlohmann::json body = nlohmann::json::parse(res->body, nullptr, false);
        if (body.is_discarded()) throw RpcError("rpc " + method + ": invalid JSON response");
        if (body.contains("error") && !body.at("error").is_null())
            throw RpcError("rpc " + method + ": " + body.at("error").dump());
        if (!body.contains("result")) throw RpcError("rpc " + method + ": missing result");
        return body.at("result");
    }

    std::string getblockhash(std::uint64_t height) {
        auto r = call("getblockhash", nlohmann::json::array({height}));
        if (!r.is_string()) throw RpcError("getblockhash: expected a hex string");
        return r.get<std::string>();
    }

    nlohmann::json getblock(const std::string& hash) {
        return call("getblock", nlohmann::json::array({hash, 2}));
    }

private:
    httplib::Client client_;
};

namespace detail {

inline Hash32 rpc_hash(const nlohmann::json& v, const char* what) {
    if (!v.is_string()) throw RpcError(std::string(what) + ": expected hex string");
    auto h = hex::decode_hash(v.get<std::string>());
    if (!h) throw RpcError(std::string(what) + ": bad hash " + v.dump());
    return *h;
}

// Core reports values in BTC; the interchange stores integer satoshis.
inline std::int64_t btc_to_satoshi(const nlohmann::json& v) {
    if (v.is_number_integer()) return v.get<std::int64_t>() * 100000000ll;
    return std::llround(v.get<double>() * 1e8);
}

}  // namespace detail

// Maps one verbosity-2 block to the in-memory model. The node's absence of an
// address field becomes the Null address.
inline void append_rpc_block(Ledger& ledger, const nlohmann::json& jblock) {
    Block block;
    block.hash = detail::rpc_hash(jblock.at("hash"), "block hash");
    block.height = jblock.at("height").get<std::uint64_t>();
    block.first_tx = static_cast<std::uint32_t>(ledger.txs.size());
    for (const auto& jtx : jblock.at("tx")) {
        Tx tx;
        tx.hash = detail::rpc_hash(jtx.at("txid"), "txid");
        tx.blockhash = block.hash;
        for (const auto& jin : jtx.at("vin")) {
            if (jin.contains("coinbase")) {
                tx.coinbase = true;
                continue;
            }
            InputRef ref;
            ref.prev_txid = detail::rpc_hash(jin.at("txid"), "vin txid");
            ref.prev_vout = jin.at("vout").get<std::uint32_t>();
            tx.vin.push_back(ref);
        }
        if (tx.coinbase && !tx.vin.empty()) throw RpcError("coinbase tx with real inputs");
        for (const auto& jout : jtx.at("vout")) {
            OutputRecord out;
            out.value = detail::btc_to_satoshi(jout.at("value"));
            const auto& spk = jout.at("scriptPubKey");
            auto bytes = hex::decode_bytes(spk.at("hex").get<std::string>());
            if (!bytes) throw RpcError("vout scriptPubKey.hex: bad hex");
            out.script = std::move(*bytes);
            if (spk.contains("address")) {
                out.address = spk.at("address").get<std::string>();
            } else if (spk.contains("addresses") && spk.at("addresses").is_array() &&
                       !spk.at("addresses").empty()) {
                out.address = spk.at("addresses").at(0).get<std::string>();
            }
            tx.vout.push_back(std::move(out));
        }
        ledger.txs.push_back(std::move(tx));
    }
    block.tx_count = static_cast<std::uint32_t>(ledger.txs.size()) - block.first_tx;
    ledger.blocks.push_back(block);
}

// Scans an existing interchange file for the height to resume from.
inline std::optional<std::uint64_t> last_fetched_height(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::optional<std::uint64_t> last;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("height")) throw IoError("resume: corrupt output file " + path);
        last = j.at("height").get<std::uint64_t>();
    }
    return last;
}

struct FetchResult {
    std::uint64_t first_written = 0;
    std::uint64_t blocks_written = 0;
    std::optional<std::uint64_t> last_good_height;
};

// Streams blocks [from_height, to_height] into the interchange file,
// appending after the last fetched height when the file already exists.
inline FetchResult fetch_blocks(RpcClient& client, std::uint64_t from_height,
                                std::uint64_t to_height, const std::string& out_path,
                                const std::function<void(std::uint64_t)>& progress = {}) {
    FetchResult result;
    std::uint64_t start = from_height;
    auto resume = last_fetched_height(out_path);
    if (resume && *resume + 1 > start) start = *resume + 1;
    result.first_written = start;
    result.last_good_height = resume;
    if (start > to_height) return result;

    std::ofstream out(out_path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot open output file " + out_path);
    for (std::uint64_t h = start; h <= to_height; ++h) {
        Ledger one;
        append_rpc_block(one, client.getblock(client.getblockhash(h)));
        write_stream(one, out);
        out.flush();
        result.last_good_height = h;
        ++result.blocks_written;
        if (progress) progress(h);
    }
    return result;
}

}  // namespace txdag
