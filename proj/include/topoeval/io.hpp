#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "topoeval/graph.hpp"
#include "topoeval/labelgen.hpp"
#include "topoeval/raster.hpp"

namespace topoeval {

// 8-bit single-channel raster as stored on disk (PGM P5, maxval 255).
struct PgmImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, top-left origin
};

PgmImage read_pgm(const std::filesystem::path& path);
void write_pgm(const PgmImage& img, const std::filesystem::path& path);

// Binary interpretation: {0 -> 0, 255 -> 1}; any other value is rejected
// with the offending pixel named.
BinaryMask read_binary_mask(const std::filesystem::path& path);
void write_binary_mask(const BinaryMask& m, const std::filesystem::path& path);

// Probability interpretation: v -> v/255.
ProbabilityMap read_probability_map(const std::filesystem::path& path);
void write_probability_map(const ProbabilityMap& p, const std::filesystem::path& path);

// Line-oriented text graphs: "N id x y" node records, "E id_a id_b" edge
// records, '#' starts a comment line. Arbitrary non-negative ids are remapped
// to a dense 0..n-1 range in ascending original-id order.
RoadGraph read_graph_file(const std::filesystem::path& path);
RoadGraph parse_graph(const std::string& text);
void write_graph_file(const RoadGraph& g, const std::filesystem::path& path);
std::string graph_to_string(const RoadGraph& g);

// Label pyramids as JSON documents with per-level {level, patch_size, rows}.
void write_label_pyramid(const LabelPyramid& p, const std::filesystem::path& path);
LabelPyramid read_label_pyramid(const std::filesystem::path& path);
std::string label_pyramid_to_string(const LabelPyramid& p);
LabelPyramid parse_label_pyramid(const std::string& text);

// Real-valued pyramids (discriminator outputs) share the same document shape.
std::vector<std::vector<std::vector<double>>> read_real_pyramid(
    const std::filesystem::path& path);

// Metric report: metrics, parameters (seeds included for every randomized
// metric), and provenance. Keys are emitted in sorted order so diffs are
// meaningful and reruns are byte-identical.
struct Report {
    std::map<std::string, double> metrics;
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json provenance = nlohmann::json::object();
};

std::string report_to_string(const Report& r);
void write_report(const Report& r, const std::filesystem::path& path);
Report parse_report(const std::string& text);
Report read_report(const std::filesystem::path& path);

}  // namespace topoeval
