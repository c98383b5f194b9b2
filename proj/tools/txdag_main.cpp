// SPDX-License-Identifier: Apache-2.0
//
// txdag: extracts unknown-transaction T-DAG patterns from portable ledger
// data, canonically labels them and clusters them by isomorphism class.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "txdag/canon.hpp"
#include "txdag/cluster.hpp"
#include "txdag/oracle.hpp"
#include "txdag/pipeline.hpp"
#include "txdag/rpc.hpp"
#include "txdag/synth.hpp"
#include "txdag/tdag.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitRemote = 3;

int cmd_synth(const std::string& spec_path, std::uint64_t seed, const std::string& out_path) {
    txdag::GeneratorSpec spec;
    try {
        spec = txdag::load_generator_spec(spec_path);
    } catch (const txdag::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    txdag::Ledger ledger = txdag::synth(spec, seed);
    txdag::write(ledger, out_path);
    std::cerr << "stage=synth done=" << ledger.txs.size() << " total=" << ledger.txs.size() << "\n";
    return kExitOk;
}

int cmd_fetch(const std::string& url, const std::string& auth, std::uint64_t from_height,
              std::uint64_t to_height, const std::string& out_path) {
    txdag::RpcClient client(url, auth);
    try {
        auto result = txdag::fetch_blocks(client, from_height, to_height, out_path,
                                          [&](std::uint64_t h) {
                                              std::cerr << "stage=fetch done=" << h
                                                        << " total=" << to_height << "\n";
                                          });
        std::cerr << "fetched " << result.blocks_written << " blocks into " << out_path << "\n";
        return kExitOk;
    } catch (const txdag::RpcError& e) {
        auto last = txdag::last_fetched_height(out_path);
        std::cerr << "error: " << e.what() << "\n";
        if (last) std::cerr << "last good height: " << *last << "\n";
        return kExitRemote;
    }
}

int cmd_run(const std::string& config_path, bool to_stdout) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open config file " << config_path << "\n";
        return kExitBadInput;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    txdag::PipelineConfig cfg = txdag::parse_config(buf.str());
    txdag::RunResult result = txdag::run_pipeline_to_dir(
        cfg, buf.str(), [](const std::string& stage, std::size_t done, std::size_t total) {
            std::cerr << "stage=" << stage << " done=" << done << " total=" << total << "\n";
        });
    if (to_stdout) std::cout << txdag::report_to_json(result.report).dump(2) << "\n";
    return kExitOk;
}

int cmd_label(const std::string& dump_path, const std::string& out_path) {
    std::ifstream in(dump_path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open forest dump " << dump_path << "\n";
        return kExitBadInput;
    }
    txdag::Forest forest = txdag::load_forest(in);
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary | std::ios::trunc);
        if (!file) {
            std::cerr << "error: cannot open output " << out_path << "\n";
            return kExitRemote;
        }
        out = &file;
    }
    *out << "component_id,label\n";
    for (std::size_t i = 0; i < forest.component_count(); ++i) {
        auto lbl = txdag::canonical_label(txdag::add_super_root(forest.components[i]));
        *out << i << ',' << txdag::csv_quote(lbl) << "\n";
    }
    return kExitOk;
}

int cmd_cluster(const std::string& dump_path, const std::string& rules_path, bool post_filter,
                bool as_json, unsigned threads) {
    std::ifstream in(dump_path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open forest dump " << dump_path << "\n";
        return kExitBadInput;
    }
    txdag::Forest forest = txdag::load_forest(in);
    std::map<std::string, std::size_t> dropped;
    if (!rules_path.empty() && !post_filter) {
        auto filtered = txdag::filter_by_script(forest, txdag::load_matcher(rules_path));
        forest = std::move(filtered.kept);
        dropped = std::move(filtered.dropped);
    } else if (!rules_path.empty()) {
        // post-cluster exploration: report drop counts without removing rows
        dropped = txdag::filter_by_script(forest, txdag::load_matcher(rules_path)).dropped;
    }
    auto report = txdag::cluster(forest, threads);
    if (as_json)
        std::cout << txdag::report_to_json(report).dump(2) << "\n";
    else
        std::cout << txdag::report_to_csv(report);
    if (!rules_path.empty())
        std::cerr << txdag::dropped_to_json(dropped).dump() << "\n";
    return kExitOk;
}

int cmd_oracle_check(int max_n) {
    if (max_n < 1 || max_n > 9) {
        std::cerr << "error: max-n must be in 1..9 (brute-force bound)\n";
        return kExitBadInput;
    }
    bool ok = true;
    for (int n = 1; n <= max_n; ++n) {
        auto trees = txdag::enumerate_rooted_trees(n);
        std::set<std::string> labels;
        for (const auto& t : trees) labels.insert(txdag::canonical_label(t));
        std::size_t disagreements = 0;
        for (std::size_t i = 0; i < trees.size(); ++i)
            for (std::size_t j = i + 1; j < trees.size(); ++j) {
                bool by_label = txdag::isomorphic(trees[i], trees[j]);
                bool by_brute = txdag::brute_force_isomorphic(trees[i], trees[j]);
                if (by_label != by_brute) ++disagreements;
            }
        bool n_ok = labels.size() == trees.size() && disagreements == 0;
        ok = ok && n_ok;
        std::cout << "n=" << n << " trees=" << trees.size() << " labels=" << labels.size()
                  << " disagreements=" << disagreements << (n_ok ? " ok" : " MISMATCH") << "\n";
    }
    return ok ? kExitOk : kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"unknown-transaction T-DAG extraction, canonical labeling and clustering"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "generate a synthetic interchange ledger");
    std::string synth_spec, synth_out;
    std::uint64_t synth_seed = 0;
    synth->add_option("--spec", synth_spec, "generator spec (JSON)")->required();
    synth->add_option("--seed", synth_seed, "generator seed")->required();
    synth->add_option("--out", synth_out, "output ledger path")->required();

    auto* fetch = app.add_subcommand("fetch", "fetch blocks from a node into interchange format");
    std::string fetch_url, fetch_auth, fetch_out;
    std::uint64_t fetch_from = 0, fetch_to = 0;
    fetch->add_option("--url", fetch_url, "node RPC URL")->envname("NODE_RPC_URL")->required();
    fetch->add_option("--auth", fetch_auth, "user:password")->envname("NODE_RPC_AUTH");
    fetch->add_option("--from", fetch_from, "first height")->required();
    fetch->add_option("--to", fetch_to, "last height")->required();
    fetch->add_option("--out", fetch_out, "output ledger path")->required();

    auto* run = app.add_subcommand("run", "run the full pipeline from a config file");
    std::string run_config;
    bool run_stdout = false;
    run->add_option("config", run_config, "pipeline config file")->required();
    run->add_flag("--stdout", run_stdout, "also print the class report JSON to stdout");

    auto* label = app.add_subcommand("label", "canonical labels for a forest dump");
    std::string label_dump, label_out;
    label->add_option("forest-dump", label_dump, "forest dump (JSONL)")->required();
    label->add_option("--out", label_out, "output CSV path (default stdout)");

    auto* clus = app.add_subcommand("cluster", "cluster a forest dump by isomorphism class");
    std::string cluster_dump, cluster_rules;
    bool cluster_post = false, cluster_json = false;
    unsigned cluster_threads = 1;
    clus->add_option("forest-dump", cluster_dump, "forest dump (JSONL)")->required();
    clus->add_option("--rules", cluster_rules, "script filter rules (JSON)");
    clus->add_flag("--post", cluster_post, "report drop counts without removing components");
    clus->add_flag("--json", cluster_json, "emit JSON instead of CSV");
    clus->add_option("--threads", cluster_threads, "labeling threads");

    auto* oracle = app.add_subcommand("oracle-check", "cross-check labels against the tree oracle");
    int oracle_n = 7;
    oracle->add_option("max-n", oracle_n, "largest tree size to enumerate (<= 9)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_spec, synth_seed, synth_out);
        if (fetch->parsed()) return cmd_fetch(fetch_url, fetch_auth, fetch_from, fetch_to, fetch_out);
        if (run->parsed()) return cmd_run(run_config, run_stdout);
        if (label->parsed()) return cmd_label(label_dump, label_out);
        if (clus->parsed())
            return cmd_cluster(cluster_dump, cluster_rules, cluster_post, cluster_json,
                               cluster_threads);
        if (oracle->parsed()) return cmd_oracle_check(oracle_n);
    } catch (const txdag::RpcError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRemote;
    } catch (const txdag::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRemote;
    } catch (const txdag::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const txdag::LabelParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const txdag::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}
