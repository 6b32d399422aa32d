#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "topoeval/raster.hpp"

namespace topoeval {

struct LabelMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> labels;  // row-major {0,1}

    LabelMatrix() = default;
    LabelMatrix(int r, int c, std::uint8_t fill = 1)
        : rows(r), cols(c),
          labels(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

    std::uint8_t& at(int row, int col) { return labels[static_cast<std::size_t>(row) * cols + col]; }
    std::uint8_t at(int row, int col) const {
        return labels[static_cast<std::size_t>(row) * cols + col];
    }

    bool operator==(const LabelMatrix&) const = default;
};

struct LabelLevel {
    int patch_size = 0;  // H_k = W_k in pixels
    LabelMatrix matrix;

    bool operator==(const LabelLevel&) const = default;
};

// Levels ordered coarse to fine: patch sizes {256,128,64,32} for 256x256 input.
// Invariant: a label at any level is the AND of its 2x2 children one level down.
struct LabelPyramid {
    std::vector<LabelLevel> levels;

    bool operator==(const LabelPyramid&) const = default;
};

// Maximal 8-connected component of false-negative skeleton pixels.
struct Interruption {
    std::vector<std::pair<int, int>> pixels;  // (x, y), sorted by row-major index
    std::size_t size() const { return pixels.size(); }
};

// Multi-channel raster carrier for the optional companion image.
struct MultiChannelImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> planes;  // channel-major: plane c at offset c*width*height

    MultiChannelImage() = default;
    MultiChannelImage(int w, int h, int c)
        : width(w), height(h), channels(c),
          planes(static_cast<std::size_t>(w) * h * c, 0.0) {}
};

// Channel-stacked discriminator input: mask plane first, image planes after.
struct DiscriminatorInput {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> planes;
};

struct LabelConfig {
    double threshold = 0.5;
    int dilation_radius = 3;
    int cell_size = 32;
    int min_interruption = 4;
};

// Skeleton pixels not covered by t0.
BinaryMask false_negative_set(const BinaryMask& gt_skeleton, const BinaryMask& t0);

// Maximal 8-connected components of the false-negative set, ordered by their
// smallest row-major pixel index.
std::vector<Interruption> interruptions(const BinaryMask& fn_set);

// Cell label 0 iff some single interruption has >= min_len of its pixels
// inside that cell.
LabelMatrix finest_labels(const BinaryMask& gt_skeleton, const BinaryMask& t0, int cell = 32,
                          int min_len = 4);

// Full pipeline: t0 from (prob, gt), skeleton of gt, finest labels, then
// AND-reduction of 2x2 blocks up to the 1x1 level.
LabelPyramid build_label_pyramid(const BinaryMask& gt_mask, const ProbabilityMap& prob,
                                 const LabelConfig& config = {});

// Patch sizes (coarse to fine) that build_label_pyramid produces for a square
// side length; throws ShapeError if the side is unsupported.
std::vector<int> pyramid_patch_sizes(int side, int cell = 32);

DiscriminatorInput build_discriminator_input(const BinaryMask& t0,
                                             const std::optional<MultiChannelImage>& image = {});

}  // namespace topoeval
