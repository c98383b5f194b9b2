// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "txdag/cluster.hpp"
#include "txdag/core.hpp"
#include "txdag/ledger.hpp"
#include "txdag/script.hpp"
#include "txdag/tdag.hpp"
#include "txdag/tiograph.hpp"

namespace txdag {

struct PipelineConfig {
    std::string ledger_path;
    std::string output_dir;
    bool prune_height1 = true;
    bool keep_two_vertex = false;
    std::optional<std::string> trivial_rules_path;
    std::optional<std::string> filter_rules_path;
    std::optional<std::int64_t> seed;
    unsigned threads = 1;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::string parse_config_value(const std::string& raw, std::size_t line_no) {
    std::string v = trim(raw);
    if (!v.empty() && v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw SchemaError(line_no, "unterminated string value");
        return v.substr(1, v.size() - 2);
    }
    // bare values run to an optional trailing comment
    auto hash = v.find(" #");
    if (hash != std::string::npos) v = trim(v.substr(0, hash));
    return v;
}

inline bool parse_bool(const std::string& v, std::size_t line_no) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw SchemaError(line_no, "expected true or false, got '" + v + "'");
}

}  // namespace detail

// Line-oriented key = value text. '#' starts a comment, strings may be
// double-quoted, booleans are true/false. See the README for the grammar.
inline PipelineConfig parse_config(const std::string& text) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) throw SchemaError(line_no, "expected key = value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::parse_config_value(t.substr(eq + 1), line_no);
        if (key == "ledger_path") cfg.ledger_path = value;
        else if (key == "output_dir") cfg.output_dir = value;
        else if (key == "prune_height1") cfg.prune_height1 = detail::parse_bool(value, line_no);
        else if (key == "keep_two_vertex") cfg.keep_two_vertex = detail::parse_bool(value, line_no);
        else if (key == "trivial_rules_path") cfg.trivial_rules_path = value;
        else if (key == "filter_rules_path") cfg.filter_rules_path = value;
        else if (key == "seed") cfg.seed = std::stoll(value);
        else if (key == "threads") cfg.threads = static_cast<unsigned>(std::stoul(value));
        else throw SchemaError(line_no, "unknown key '" + key + "'");
    }
    if (cfg.ledger_path.empty()) throw Error("config: ledger_path is required");
    if (cfg.output_dir.empty()) throw Error("config: output_dir is required");
    if (cfg.threads == 0) throw Error("config: threads must be positive");
    return cfg;
}

inline std::string serialize_config(const PipelineConfig& cfg) {
    std::string out;
    out += "ledger_path = \"" + cfg.ledger_path + "\"\n";
    out += "output_dir = \"" + cfg.output_dir + "\"\n";
    out += std::string("prune_height1 = ") + (cfg.prune_height1 ? "true" : "false") + "\n";
    out += std::string("keep_two_vertex = ") + (cfg.keep_two_vertex ? "true" : "false") + "\n";
    if (cfg.trivial_rules_path) out += "trivial_rules_path = \"" + *cfg.trivial_rules_path + "\"\n";
    if (cfg.filter_rules_path) out += "filter_rules_path = \"" + *cfg.filter_rules_path + "\"\n";
    if (cfg.seed) out += "seed = " + std::to_string(*cfg.seed) + "\n";
    out += "threads = " + std::to_string(cfg.threads) + "\n";
    return out;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    return hex::encode(digest, len);
}

inline std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot hash missing file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

struct StageTiming {
    std::string name;
    double seconds = 0;
};

struct RunResult {
    std::size_t blocks = 0;
    std::size_t txs = 0;
    std::size_t alpha_count = 0;
    std::size_t components_extracted = 0;
    std::size_t pruned_components = 0;
    std::size_t compressed_components = 0;
    Forest forest;  // post-prune, post-compress, pre-filter
    std::map<std::string, std::size_t> dropped;
    std::vector<IsoClassReport> report;
    std::vector<StageTiming> stages;
    std::vector<std::string> output_files;
};

using ProgressFn = std::function<void(const std::string& stage, std::size_t done, std::size_t total)>;

// ingest -> link -> alpha detection -> extraction -> prune -> compress ->
// super-root normalization + canonical labels -> script filter -> cluster.
// Stage failures propagate with the stage name; partial outputs are removed.
inline RunResult run_pipeline(const PipelineConfig& cfg, const ProgressFn& progress = {}) {
    namespace fs = std::filesystem;
    if (!fs::exists(cfg.ledger_path)) throw Error("config: ledger_path not found: " + cfg.ledger_path);
    if (cfg.trivial_rules_path && !fs::exists(*cfg.trivial_rules_path))
        throw Error("config: trivial_rules_path not found: " + *cfg.trivial_rules_path);
    if (cfg.filter_rules_path && !fs::exists(*cfg.filter_rules_path))
        throw Error("config: filter_rules_path not found: " + *cfg.filter_rules_path);

    RunResult result;
    auto timed = [&](const std::string& stage, auto&& fn) {
        auto t0 = std::chrono::steady_clock::now();
        try {
            fn();
        } catch (const std::exception& e) {
            throw Error("stage " + stage + ": " + e.what());
        }
        auto t1 = std::chrono::steady_clock::now();
        result.stages.push_back({stage, std::chrono::duration<double>(t1 - t0).count()});
        if (progress) progress(stage, 1, 1);
    };

    Ledger ledger;
    timed("ingest", [&] { ledger = ingest(cfg.ledger_path); });
    result.blocks = ledger.blocks.size();
    result.txs = ledger.txs.size();

    timed("link", [&] { ledger.link(); });

    std::vector<AlphaNode> alphas;
    timed("alpha", [&] { alphas = find_alpha_nodes(ledger); });
    result.alpha_count = alphas.size();

    Forest forest;
    timed("extract", [&] { forest = build_forest(ledger); });
    result.components_extracted = forest.component_count();

    timed("prune", [&] {
        if (!cfg.prune_height1) return;
        std::size_t before = forest.component_count();
        forest = prune_height1(forest, cfg.keep_two_vertex);
        result.pruned_components = before - forest.component_count();
    });

    timed("compress", [&] {
        ScriptMatcher trivial =
            cfg.trivial_rules_path ? load_matcher(*cfg.trivial_rules_path) : trivial_matcher();
        for (TDag& comp : forest.components) {
            TDag compressed = compress(comp, trivial);
            if (compressed.vertex_count() != comp.vertex_count()) {
                ++result.compressed_components;
                comp = std::move(compressed);
            }
        }
    });
    result.forest = forest;

    FilterResult filtered;
    timed("filter", [&] {
        ScriptMatcher rules =
            cfg.filter_rules_path ? load_matcher(*cfg.filter_rules_path) : default_matcher();
        filtered = filter_by_script(forest, rules);
    });
    result.dropped = filtered.dropped;

    timed("cluster", [&] { result.report = cluster(filtered.kept, cfg.threads); });
    return result;
}

// Runs the pipeline and writes forest.jsonl, classes.csv, classes.json,
// dropped.json and manifest.json under output_dir. Files are staged with a
// .tmp suffix and renamed once the run completes.
inline RunResult run_pipeline_to_dir(const PipelineConfig& cfg, const std::string& config_text,
                                     const ProgressFn& progress = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    RunResult result = run_pipeline(cfg, progress);

    std::vector<std::pair<std::string, std::string>> files;  // name -> content
    {
        std::ostringstream forest_out;
        dump_forest(result.forest, forest_out);
        files.emplace_back("forest.jsonl", forest_out.str());
    }
    files.emplace_back("classes.csv", report_to_csv(result.report));
    files.emplace_back("classes.json", report_to_json(result.report).dump(2) + "\n");
    files.emplace_back("dropped.json", dropped_to_json(result.dropped).dump(2) + "\n");

    std::vector<fs::path> staged;
    try {
        for (const auto& [name, content] : files) {
            fs::path tmp = fs::path(cfg.output_dir) / (name + ".tmp");
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot write " + tmp.string());
            out << content;
            out.close();
            staged.push_back(tmp);
        }

        nlohmann::json manifest;
        manifest["tool"] = "txdag";
        manifest["version"] = "1.0.0";
        manifest["label_format"] = "v1";
        manifest["config_hash"] = sha256_hex(config_text);
        manifest["input_hash"] = sha256_file(cfg.ledger_path);
        manifest["threads"] = cfg.threads;
        if (cfg.seed) manifest["seed"] = *cfg.seed;
        manifest["stats"] = {{"blocks", result.blocks},
                             {"txs", result.txs},
                             {"alpha_nodes", result.alpha_count},
                             {"components_extracted", result.components_extracted},
                             {"pruned_components", result.pruned_components},
                             {"compressed_components", result.compressed_components},
                             {"kept_components", result.forest.component_count() -
                                                     [&] {
                                                         std::size_t d = 0;
                                                         for (auto& [k, v] : result.dropped) d += v;
                                                         return d;
                                                     }()},
                             {"classes", result.report.size()}};
        nlohmann::json jstages = nlohmann::json::array();
        for (const StageTiming& s : result.stages)
            jstages.push_back({{"name", s.name}, {"seconds", s.seconds}});
        manifest["stages"] = jstages;
        nlohmann::json joutputs = nlohmann::json::array();
        for (const auto& [name, content] : files)
            joutputs.push_back(
                {{"path", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
        manifest["outputs"] = joutputs;

        fs::path manifest_tmp = fs::path(cfg.output_dir) / "manifest.json.tmp";
        std::ofstream mout(manifest_tmp, std::ios::binary | std::ios::trunc);
        mout << manifest.dump(2) << "\n";
        mout.close();
        staged.push_back(manifest_tmp);

        for (const fs::path& tmp : staged) {
            fs::path final = tmp;
            final.replace_extension("");
            fs::rename(tmp, final);
            result.output_files.push_back(final.string());
        }
    } catch (...) {
        for (const fs::path& tmp : staged) {
            std::error_code ec;
            fs::remove(tmp, ec);
        }
        throw;
    }
    return result;
}

}  // namespace txdag
