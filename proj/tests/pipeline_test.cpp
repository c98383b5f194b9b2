// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "txdag/pipeline.hpp"
#include "txdag/synth.hpp"

using namespace txdag;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "txdag_pipeline_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

GeneratorSpec fixture_spec() {
    GeneratorSpec spec;
    spec.patterns.push_back(PatternSpec{.shape = "chain", .count = 4, .length = 3});
    spec.patterns.push_back(PatternSpec{.shape = "bundle", .count = 2, .unknowns = 2,
                                        .addressed = 1, .leaves = 2});
    spec.patterns.push_back(PatternSpec{.shape = "star", .count = 3, .width = 2});
    spec.patterns.push_back(
        PatternSpec{.shape = "trivial_chain", .count = 1, .length = 5});
    return spec;
}

PipelineConfig write_fixture(const fs::path& dir, bool prune = true, unsigned threads = 1) {
    Ledger ledger = synth(fixture_spec(), 2020);
    write(ledger, (dir / "ledger.jsonl").string());
    PipelineConfig cfg;
    cfg.ledger_path = (dir / "ledger.jsonl").string();
    cfg.output_dir = (dir / "out").string();
    cfg.prune_height1 = prune;
    cfg.threads = threads;
    return cfg;
}

}  // namespace

TEST_CASE("config parses and round-trips") {
    std::string text =
        "# pipeline config\n"
        "ledger_path = \"data/ledger.jsonl\"\n"
        "output_dir = out  # bare value with comment\n"
        "prune_height1 = false\n"
        "keep_two_vertex = true\n"
        "seed = 42\n"
        "threads = 3\n";
    PipelineConfig cfg = parse_config(text);
    REQUIRE(cfg.ledger_path == "data/ledger.jsonl");
    REQUIRE(cfg.output_dir == "out");
    REQUIRE_FALSE(cfg.prune_height1);
    REQUIRE(cfg.keep_two_vertex);
    REQUIRE(cfg.seed == 42);
    REQUIRE(cfg.threads == 3);
    REQUIRE(parse_config(serialize_config(cfg)) == cfg);

    REQUIRE_THROWS_AS(parse_config("nonsense = 1\nledger_path = x\noutput_dir = y\n"), SchemaError);
    REQUIRE_THROWS_AS(parse_config("output_dir = y\n"), Error);
}

TEST_CASE("pipeline reproduces planted ground truth") {
    fs::path dir = scratch("ground_truth");
    PipelineConfig cfg = write_fixture(dir);
    RunResult result = run_pipeline(cfg);

    REQUIRE(result.pruned_components == 3);      // the stars
    REQUIRE(result.compressed_components == 1);  // the trivial chain
    REQUIRE(result.forest.component_count() == 7);
    REQUIRE(result.report.size() == 3);
    REQUIRE(result.report[0].count == 4);  // chain3 class
    REQUIRE(result.report[0].label == "1:2:;");
    REQUIRE(result.report[1].count == 2);  // bundle class
    REQUIRE(result.report[2].count == 1);  // compressed trivial chain -> 4-vertex path
    REQUIRE(result.report[2].label == "1:2:3:;");
}

TEST_CASE("pipeline outputs are byte-identical across reruns and thread counts") {
    fs::path dir = scratch("determinism");
    PipelineConfig cfg = write_fixture(dir);
    std::string config_text = serialize_config(cfg);

    run_pipeline_to_dir(cfg, config_text);
    std::string forest1 = slurp(dir / "out" / "forest.jsonl");
    std::string csv1 = slurp(dir / "out" / "classes.csv");
    std::string json1 = slurp(dir / "out" / "classes.json");
    std::string dropped1 = slurp(dir / "out" / "dropped.json");

    PipelineConfig threaded = cfg;
    threaded.threads = 4;
    threaded.output_dir = (dir / "out2").string();
    run_pipeline_to_dir(threaded, serialize_config(threaded));
    REQUIRE(slurp(dir / "out2" / "forest.jsonl") == forest1);
    REQUIRE(slurp(dir / "out2" / "classes.csv") == csv1);
    REQUIRE(slurp(dir / "out2" / "classes.json") == json1);
    REQUIRE(slurp(dir / "out2" / "dropped.json") == dropped1);
}

TEST_CASE("manifest lists every output with its content hash") {
    fs::path dir = scratch("manifest");
    PipelineConfig cfg = write_fixture(dir);
    run_pipeline_to_dir(cfg, serialize_config(cfg));

    auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
    REQUIRE(manifest.at("label_format") == "v1");
    REQUIRE(manifest.at("outputs").size() == 4);
    for (const auto& entry : manifest.at("outputs")) {
        fs::path p = dir / "out" / entry.at("path").get<std::string>();
        REQUIRE(fs::exists(p));
        REQUIRE(sha256_file(p.string()) == entry.at("sha256").get<std::string>());
    }
    REQUIRE(manifest.at("stats").at("pruned_components") == 3);
    REQUIRE(manifest.at("stats").at("compressed_components") == 1);
    for (const auto& stage : manifest.at("stages"))
        REQUIRE(stage.at("seconds").get<double>() >= 0.0);
}

TEST_CASE("prune toggle exposes height-1 components as single-edge classes") {
    fs::path dir = scratch("prune_toggle");
    PipelineConfig cfg = write_fixture(dir, /*prune=*/false);
    RunResult result = run_pipeline(cfg);
    REQUIRE(result.pruned_components == 0);
    bool saw_star = false;
    for (const auto& row : result.report)
        if (row.height == 1 && row.label == "1,2::;") saw_star = true;
    REQUIRE(saw_star);
}

TEST_CASE("unresolvable paths are rejected at startup") {
    fs::path dir = scratch("startup");
    PipelineConfig cfg;
    cfg.ledger_path = (dir / "missing.jsonl").string();
    cfg.output_dir = (dir / "out").string();
    try {
        run_pipeline(cfg);
        FAIL("expected Error");
    } catch (const Error& e) {
        REQUIRE(std::string(e.what()).find("ledger_path") != std::string::npos);
    }
}

TEST_CASE("stage failures carry the stage name and leave no partial outputs") {
    fs::path dir = scratch("failure");
    std::ofstream bad(dir / "corrupt.jsonl");
    bad << "{\"hash\": 12}\n";
    bad.close();
    PipelineConfig cfg;
    cfg.ledger_path = (dir / "corrupt.jsonl").string();
    cfg.output_dir = (dir / "out").string();
    try {
        run_pipeline_to_dir(cfg, serialize_config(cfg));
        FAIL("expected Error");
    } catch (const Error& e) {
        REQUIRE(std::string(e.what()).find("stage ingest") != std::string::npos);
    }
    REQUIRE_FALSE(fs::exists(dir / "out" / "classes.csv"));
    REQUIRE_FALSE(fs::exists(dir / "out" / "classes.csv.tmp"));
}
