// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace txdag {

using Hash32 = std::array<std::uint8_t, 32>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ingest-time interchange violations. Carries the 1-based line number.
struct SchemaError : Error {
    std::size_t line = 0;
    SchemaError(std::size_t line_, const std::string& what_)
        : Error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
};

// Linking failures: dangling input references and double spends.
struct LinkError : Error {
    using Error::Error;
};

// Structural graph failures (cycles, multi-root canonical input, ...).
struct GraphError : Error {
    using Error::Error;
};

// Label text failures. offset is the byte position of the offending token.
struct LabelParseError : Error {
    std::size_t offset = 0;
    LabelParseError(std::size_t offset_, const std::string& what_)
        : Error("offset " + std::to_string(offset_) + ": " + what_), offset(offset_) {}
};

struct IoError : Error {
    using Error::Error;
};

struct RpcError : Error {
    using Error::Error;
};

namespace hex {

inline constexpr char kDigits[] = "0123456789abcdef";

inline std::string encode(const std::uint8_t* data, std::size_t n) {
    std::string out(n * 2, '0');
    for (std::size_t i = 0; i < n; ++i) {
        out[2 * i] = kDigits[data[i] >> 4];
        out[2 * i + 1] = kDigits[data[i] & 0x0f];
    }
    return out;
}

inline std::string encode(const std::vector<std::uint8_t>& bytes) {
    return encode(bytes.data(), bytes.size());
}

inline std::string encode(const Hash32& h) {
    return encode(h.data(), h.size());
}

inline int nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;  // uppercase is rejected: interchange is lowercase hex
}

inline bool decode(std::string_view text, std::uint8_t* out, std::size_t n) {
    if (text.size() != n * 2) return false;
    for (std::size_t i = 0; i < n; ++i) {
        int hi = nibble(text[2 * i]);
        int lo = nibble(text[2 * i + 1]);
        if (hi < 0 || lo < 0) return false;
        out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return true;
}

inline std::optional<Hash32> decode_hash(std::string_view text) {
    Hash32 h{};
    if (!decode(text, h.data(), h.size())) return std::nullopt;
    return h;
}

inline std::optional<std::vector<std::uint8_t>> decode_bytes(std::string_view text) {
    if (text.size() % 2 != 0) return std::nullopt;
    std::vector<std::uint8_t> out(text.size() / 2);
    if (!decode(text, out.data(), out.size())) return std::nullopt;
    return out;
}

}  // namespace hex

struct Hash32Hasher {
    std::size_t operator()(const Hash32& h) const noexcept {
        std::uint64_t v;
        std::memcpy(&v, h.data(), sizeof(v));
        return static_cast<std::size_t>(v);
    }
};

}  // namespace txdag
