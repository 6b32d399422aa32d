#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "topoeval/cli.hpp"
#include "topoeval/io.hpp"
#include "topoeval/metrics.hpp"

#include "helpers.hpp"

using namespace topoeval;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    const fs::path d =
        fs::temp_directory_path() / ("topoeval_cli_test_" + std::to_string(counter++));
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("usage errors exit 1; version exits 0") {
    CHECK(cli::run({"--version"}) == 0);
    CHECK(cli::run({}) == 1);
    CHECK(cli::run({"frobnicate"}) == 1);
    CHECK(cli::run({"metrics", "--no-such-flag"}) == 1);
    CHECK(cli::run({"metrics", "--pred", "p.pgm"}) == 1);  // missing ground truth
}

TEST_CASE("data errors exit 2") {
    const fs::path d = temp_dir();
    CHECK(cli::run({"skeletonize", "--in", (d / "missing.pgm").string(), "--out",
                    (d / "out.pgm").string()}) == 2);

    std::mt19937_64 rng(157);
    write_binary_mask(testutil::random_mask(rng, 16, 16, 0.3), d / "a.pgm");
    write_binary_mask(testutil::random_mask(rng, 8, 8, 0.3), d / "b.pgm");
    CHECK(cli::run({"metrics", "--pred", (d / "a.pgm").string(), "--gt",
                    (d / "b.pgm").string()}) == 2);
}

TEST_CASE("metrics on identical inputs: all ones, byte-identical reruns") {
    const fs::path d = temp_dir();
    std::mt19937_64 rng(163);
    const BinaryMask gt = testutil::random_road_mask(rng, 64, 64, 4, 1);
    write_binary_mask(gt, d / "gt.pgm");
    write_binary_mask(gt, d / "pred.pgm");

    const auto args = std::vector<std::string>{
        "metrics", "--pred", (d / "pred.pgm").string(), "--gt", (d / "gt.pgm").string(),
        "--out",   (d / "r1.json").string(), "--samples", "100", "--hm-samples", "100",
        "--seed",  "0"};
    REQUIRE(cli::run(args) == 0);
    const Report r = read_report(d / "r1.json");
    for (const char* key : {"ccq_correctness", "ccq_completeness", "ccq_quality", "tlts",
                            "apls", "junct_f1", "hm_f1"})
        CHECK(r.metrics.at(key) == 1.0);

    auto args2 = args;
    args2[6] = (d / "r2.json").string();
    REQUIRE(cli::run(args2) == 0);
    CHECK(slurp(d / "r1.json") == slurp(d / "r2.json"));
}

TEST_CASE("batch metrics: per-pair reports, summary, worker-count independence") {
    const fs::path d = temp_dir();
    fs::create_directories(d / "pred");
    fs::create_directories(d / "gt");
    std::mt19937_64 rng(167);
    for (const char* stem : {"tile_a", "tile_b", "tile_c"}) {
        const BinaryMask gt = testutil::random_road_mask(rng, 64, 64, 4, 1);
        write_binary_mask(gt, d / "gt" / (std::string(stem) + ".pgm"));
        write_binary_mask(gt, d / "pred" / (std::string(stem) + ".pgm"));
    }
    auto run_batch = [&](const std::string& out, const std::string& jobs) {
        return cli::run({"metrics", "--pred", (d / "pred").string(), "--gt",
                         (d / "gt").string(), "--out", (d / out).string(), "--samples", "50",
                         "--hm-samples", "50", "--jobs", jobs});
    };
    REQUIRE(run_batch("out1", "1") == 0);
    REQUIRE(run_batch("out4", "4") == 0);
    for (const char* name : {"tile_a.json", "tile_b.json", "tile_c.json", "summary.json"})
        CHECK(slurp(d / "out1" / name) == slurp(d / "out4" / name));
    const Report summary = read_report(d / "out1" / "summary.json");
    CHECK(summary.metrics.at("apls") == 1.0);
    CHECK(summary.params.at("pair_count").get<int>() == 3);
}

TEST_CASE("metrics against a ground-truth graph") {
    const fs::path d = temp_dir();
    std::mt19937_64 rng(173);
    const RoadGraph gt = testutil::random_tree_45(rng, 64, 6);
    write_graph_file(gt, d / "gt.txt");
    const BinaryMask rendered = render_graph(gt, 64, 64, 1);
    write_binary_mask(rendered, d / "pred.pgm");
    REQUIRE(cli::run({"metrics", "--pred", (d / "pred.pgm").string(), "--gt-graph",
                      (d / "gt.txt").string(), "--out", (d / "r.json").string(),
                      "--samples", "50", "--hm-samples", "50"}) == 0);
    const Report r = read_report(d / "r.json");
    CHECK(r.metrics.at("apls") == 1.0);
    CHECK(r.metrics.at("tlts") == 1.0);
}

TEST_CASE("skeletonize and mask2graph round-trip through files") {
    const fs::path d = temp_dir();
    BinaryMask bar(26, 9);
    for (int y = 3; y <= 5; ++y)
        for (int x = 3; x < 23; ++x) bar.at(x, y) = 1;
    write_binary_mask(bar, d / "bar.pgm");
    REQUIRE(cli::run({"skeletonize", "--in", (d / "bar.pgm").string(), "--out",
                      (d / "skel.pgm").string()}) == 0);
    CHECK(read_binary_mask(d / "skel.pgm") == skeletonize(bar));

    REQUIRE(cli::run({"mask2graph", "--in", (d / "bar.pgm").string(), "--out",
                      (d / "bar.txt").string()}) == 0);
    const RoadGraph g = read_graph_file(d / "bar.txt");
    CHECK(g.node_count() == 2);
    CHECK(g.edge_count() == 1);
}

TEST_CASE("render honors scale 0.5") {
    const fs::path d = temp_dir();
    RoadGraph g;
    g.add_node({0, 10});
    g.add_node({18, 10});
    g.add_edge(0, 1);
    write_graph_file(g, d / "g.txt");
    REQUIRE(cli::run({"render", "--graph", (d / "g.txt").string(), "--out",
                      (d / "half.pgm").string(), "--width", "20", "--height", "20",
                      "--scale", "0.5", "--thickness", "1"}) == 0);
    const BinaryMask half = read_binary_mask(d / "half.pgm");
    CHECK(half.width == 10);
    CHECK(half.height == 10);
    for (int x = 0; x <= 9; ++x) CHECK(half.at(x, 5) == 1);
}

TEST_CASE("labels subcommand writes the expected pyramid and T0") {
    const fs::path d = temp_dir();
    BinaryMask gt(256, 256);
    for (int x = 10; x <= 240; ++x) gt.at(x, 100) = 1;
    ProbabilityMap prob = testutil::confident(gt);
    for (int x = 68; x <= 73; ++x) prob.at(x, 100) = 0.1;
    write_binary_mask(gt, d / "gt.pgm");
    write_probability_map(prob, d / "pred.pgm");
    REQUIRE(cli::run({"labels", "--pred", (d / "pred.pgm").string(), "--gt",
                      (d / "gt.pgm").string(), "--out", (d / "py.json").string(), "--t0-out",
                      (d / "t0.pgm").string()}) == 0);
    const LabelPyramid p = read_label_pyramid(d / "py.json");
    REQUIRE(p.levels.size() == 4);
    CHECK(p.levels[3].matrix.at(3, 2) == 0);
    CHECK(p.levels[0].matrix.at(0, 0) == 0);
    const BinaryMask t0 = read_binary_mask(d / "t0.pgm");
    CHECK(t0.at(70, 100) == 0);
    CHECK(t0.at(30, 100) == 1);
}

TEST_CASE("loss subcommand emits bce and is deterministic") {
    const fs::path d = temp_dir();
    std::mt19937_64 rng(179);
    const BinaryMask gt = testutil::random_mask(rng, 32, 32, 0.4);
    write_binary_mask(gt, d / "gt.pgm");
    write_probability_map(testutil::confident(gt), d / "pred.pgm");
    const auto args = std::vector<std::string>{
        "loss", "--pred", (d / "pred.pgm").string(), "--gt", (d / "gt.pgm").string(),
        "--out", (d / "l1.json").string()};
    REQUIRE(cli::run(args) == 0);
    const Report r = read_report(d / "l1.json");
    CHECK(r.metrics.at("bce") > 0.0);
    CHECK(r.params.at("lambda_a").get<double>() == 0.005);

    auto args2 = args;
    args2[6] = (d / "l2.json").string();
    REQUIRE(cli::run(args2) == 0);
    CHECK(slurp(d / "l1.json") == slurp(d / "l2.json"));
}
