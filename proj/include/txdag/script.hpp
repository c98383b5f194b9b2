// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <regex>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "txdag/core.hpp"

namespace txdag {

namespace script {

inline const char* opcode_name(std::uint8_t op) {
    switch (op) {
        case 0x00: return "OP_0";
        case 0x4f: return "OP_1NEGATE";
        case 0x50: return "OP_RESERVED";
        case 0x51: return "OP_1";
        case 0x52: return "OP_2";
        case 0x53: return "OP_3";
        case 0x54: return "OP_4";
        case 0x55: return "OP_5";
        case 0x56: return "OP_6";
        case 0x57: return "OP_7";
        case 0x58: return "OP_8";
        case 0x59: return "OP_9";
        case 0x5a: return "OP_10";
        case 0x5b: return "OP_11";
        case 0x5c: return "OP_12";
        case 0x5d: return "OP_13";
        case 0x5e: return "OP_14";
        case 0x5f: return "OP_15";
        case 0x60: return "OP_16";
        case 0x61: return "OP_NOP";
        case 0x62: return "OP_VER";
        case 0x63: return "OP_IF";
        case 0x64: return "OP_NOTIF";
        case 0x65: return "OP_VERIF";
        case 0x66: return "OP_VERNOTIF";
        case 0x67: return "OP_ELSE";
        case 0x68: return "OP_ENDIF";
        case 0x69: return "OP_VERIFY";
        case 0x6a: return "OP_RETURN";
        case 0x6b: return "OP_TOALTSTACK";
        case 0x6c: return "OP_FROMALTSTACK";
        case 0x6d: return "OP_2DROP";
        case 0x6e: return "OP_2DUP";
        case 0x6f: return "OP_3DUP";
        case 0x70: return "OP_2OVER";
        case 0x71: return "OP_2ROT";
        case 0x72: return "OP_2SWAP";
        case 0x73: return "OP_IFDUP";
        case 0x74: return "OP_DEPTH";
        case 0x75: return "OP_DROP";
        case 0x76: return "OP_DUP";
        case 0x77: return "OP_NIP";
        case 0x78: return "OP_OVER";
        case 0x79: return "OP_PICK";
        case 0x7a: return "OP_ROLL";
        case 0x7b: return "OP_ROT";
        case 0x7c: return "OP_SWAP";
        case 0x7d: return "OP_TUCK";
        case 0x7e: return "OP_CAT";
        case 0x7f: return "OP_SUBSTR";
        case 0x80: return "OP_LEFT";
        case 0x81: return "OP_RIGHT";
        case 0x82: return "OP_SIZE";
        case 0x83: return "OP_INVERT";
        case 0x84: return "OP_AND";
        case 0x85: return "OP_OR";
        case 0x86: return "OP_XOR";
        case 0x87: return "OP_EQUAL";
        case 0x88: return "OP_EQUALVERIFY";
        case 0x89: return "OP_RESERVED1";
        case 0x8a: return "OP_RESERVED2";
        case 0x8b: return "OP_1ADD";
        case 0x8c: return "OP_1SUB";
        case 0x8d: return "OP_2MUL";
        case 0x8e: return "OP_2DIV";
        case 0x8f: return "OP_NEGATE";
        case 0x90: return "OP_ABS";
        case 0x91: return "OP_NOT";
        case 0x92: return "OP_0NOTEQUAL";
        case 0x93: return "OP_ADD";
        case 0x94: return "OP_SUB";
        case 0x95: return "OP_MUL";
        case 0x96: return "OP_DIV";
        case 0x97: return "OP_MOD";
        case 0x98: return "OP_LSHIFT";
        case 0x99: return "OP_RSHIFT";
        case 0x9a: return "OP_BOOLAND";
        case 0x9b: return "OP_BOOLOR";
        case 0x9c: return "OP_NUMEQUAL";
        case 0x9d: return "OP_NUMEQUALVERIFY";
        case 0x9e: return "OP_NUMNOTEQUAL";
        case 0x9f: return "OP_LESSTHAN";
        case 0xa0: return "OP_GREATERTHAN";
        case 0xa1: return "OP_LESSTHANOREQUAL";
        case 0xa2: return "OP_GREATERTHANOREQUAL";
        case 0xa3: return "OP_MIN";
        case 0xa4: return "OP_MAX";
        case 0xa5: return "OP_WITHIN";
        case 0xa6: return "OP_RIPEMD160";
        case 0xa7: return "OP_SHA1";
        case 0xa8: return "OP_SHA256";
        case 0xa9: return "OP_HASH160";
        case 0xaa: return "OP_HASH256";
        case 0xab: return "OP_CODESEPARATOR";
        case 0xac: return "OP_CHECKSIG";
        case 0xad: return "OP_CHECKSIGVERIFY";
        case 0xae: return "OP_CHECKMULTISIG";
        case 0xaf: return "OP_CHECKMULTISIGVERIFY";
        case 0xb0: return "OP_NOP1";
        case 0xb1: return "OP_NOP2";
        case 0xb2: return "OP_NOP3";
        case 0xb3: return "OP_NOP4";
        case 0xb4: return "OP_NOP5";
        case 0xb5: return "OP_NOP6";
        case 0xb6: return "OP_NOP7";
        case 0xb7: return "OP_NOP8";
        case 0xb8: return "OP_NOP9";
        case 0xb9: return "OP_NOP10";
        default: return nullptr;
    }
}

// Space-separated asm-style text: named opcodes, push payloads as lowercase
// hex, empty pushes as OP_0. Truncated pushes end the text with OP_TRUNCATED.
inline std::string disassemble(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    std::size_t i = 0;
    auto append = [&](const std::string& token) {
        if (!out.empty()) out.push_back(' ');
        out += token;
    };
    while (i < bytes.size()) {
        std::uint8_t op = bytes[i++];
        std::size_t push_len = 0;
        bool is_push = false;
        if (op >= 0x01 && op <= 0x4b) {
            push_len = op;
            is_push = true;
        } else if (op == 0x4c || op == 0x4d || op == 0x4e) {
            std::size_t len_bytes = op == 0x4c ? 1 : op == 0x4d ? 2 : 4;
            if (i + len_bytes > bytes.size()) {
                append("OP_TRUNCATED");
                break;
            }
            for (std::size_t b = 0; b < len_bytes; ++b)
                push_len |= static_cast<std::size_t>(bytes[i + b]) << (8 * b);
            i += len_bytes;
            is_push = true;
        }
        if (is_push) {
            if (i + push_len > bytes.size()) {
                append("OP_TRUNCATED");
                break;
            }
            if (push_len == 0)
                append("OP_0");
            else
                append(hex::encode(bytes.data() + i, push_len));
            i += push_len;
            continue;
        }
        if (const char* name = opcode_name(op)) {
            append(name);
        } else {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "OP_UNKNOWN_%02x", op);
            append(buf);
        }
    }
    return out;
}

}  // namespace script

// Ordered list of named regular expressions over disassembled opcode text.
class ScriptMatcher {
public:
    struct Rule {
        std::string name;
        std::string pattern;
        std::regex compiled;
    };

    void add_rule(const std::string& name, const std::string& pattern) {
        if (names_.count(name)) throw Error("script matcher: duplicate rule name " + name);
        try {
            rules_.push_back(Rule{name, pattern, std::regex(pattern)});
        } catch (const std::regex_error& e) {
            throw Error("script matcher: rule " + name + " does not compile: " + e.what());
        }
        names_.insert(name);
    }

    const std::vector<Rule>& rules() const { return rules_; }
    bool empty() const { return rules_.empty(); }

    // First matching rule name, in rule order.
    std::optional<std::string> match(const std::vector<std::uint8_t>& script_bytes) const {
        return match_text(script::disassemble(script_bytes));
    }

    std::optional<std::string> match_text(const std::string& text) const {
        for (const Rule& rule : rules_)
            if (std::regex_search(text, rule.compiled)) return rule.name;
        return std::nullopt;
    }

private:
    std::vector<Rule> rules_;
    std::unordered_set<std::string> names_;
};

// Compression targets: outputs published without a locking mechanism.
inline ScriptMatcher trivial_matcher() {
    ScriptMatcher m;
    m.add_rule("EMPTY", "^$");
    m.add_rule("OP_TRUE", "^OP_1$");
    return m;
}

// The five filter families of known trivial / known-semantics root scripts.
inline ScriptMatcher default_matcher() {
    ScriptMatcher m;
    // P2PKH template with appended NOPs, used to probe the OP_NOP operators.
    m.add_rule("P2PKH_NOP",
               "^OP_DUP OP_HASH160 [0-9a-f]{40} OP_EQUALVERIFY OP_CHECKSIG( OP_NOP[0-9]*)+$");
    // Arithmetic locks anyone can satisfy without a key.
    m.add_rule("OP_MIN_OP_EQUAL", "OP_MIN OP_EQUAL$");
    // Hash-preimage "contest" outputs.
    m.add_rule("PAY_TO_HASH", "^OP_(RIPEMD160|SHA1|SHA256|HASH160|HASH256) [0-9a-f]+ OP_EQUAL$");
    // Scripts gated on a bare leading OP_IF (redeem-script reveal unlocks).
    m.add_rule("OP_IF", "^OP_IF( |$)");
    // Zero-of-n multisig: no signature required.
    m.add_rule("OP_CHECKMULTISIG_TRIVIAL", "^OP_0 .*OP_CHECKMULTISIG$");
    return m;
}

inline ScriptMatcher load_matcher(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open rules file " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw Error("rules file must be a JSON array: " + path);
    ScriptMatcher m;
    for (const auto& jr : j)
        m.add_rule(jr.at("name").get<std::string>(), jr.at("pattern").get<std::string>());
    return m;
}

}  // namespace txdag
