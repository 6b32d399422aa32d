#include "topoeval/labelgen.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace topoeval {

BinaryMask false_negative_set(const BinaryMask& gt_skeleton, const BinaryMask& t0) {
    if (gt_skeleton.width != t0.width || gt_skeleton.height != t0.height)
        throw ShapeError("false_negative_set: skeleton " + std::to_string(gt_skeleton.width) +
                         "x" + std::to_string(gt_skeleton.height) + " vs t0 " +
                         std::to_string(t0.width) + "x" + std::to_string(t0.height));
    BinaryMask out(gt_skeleton.width, gt_skeleton.height);
    for (std::size_t i = 0; i < out.bits.size(); ++i)
        out.bits[i] = gt_skeleton.bits[i] && !t0.bits[i] ? 1 : 0;
    return out;
}

std::vector<Interruption> interruptions(const BinaryMask& fn_set) {
    const int w = fn_set.width, h = fn_set.height;
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<Interruption> out;
    std::vector<int> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (!fn_set.bits[idx] || label[idx] >= 0) continue;
            // Flood-fill one 8-connected component. Scan order guarantees the
            // component list is ordered by smallest row-major pixel index.
            Interruption comp;
            const int id = static_cast<int>(out.size());
            label[idx] = id;
            stack.assign(1, static_cast<int>(idx));
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                const int cx = cur % w, cy = cur / w;
                comp.pixels.emplace_back(cx, cy);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                        if (fn_set.bits[nidx] && label[nidx] < 0) {
                            label[nidx] = id;
                            stack.push_back(static_cast<int>(nidx));
                        }
                    }
                }
            }
            std::sort(comp.pixels.begin(), comp.pixels.end(),
                      [w](const auto& a, const auto& b) {
                          return a.second * w + a.first < b.second * w + b.first;
                      });
            out.push_back(std::move(comp));
        }
    }
    return out;
}

LabelMatrix finest_labels(const BinaryMask& gt_skeleton, const BinaryMask& t0, int cell,
                          int min_len) {
    if (gt_skeleton.width % cell != 0 || gt_skeleton.height % cell != 0)
        throw ShapeError("finest_labels: dimensions " + std::to_string(gt_skeleton.width) + "x" +
                         std::to_string(gt_skeleton.height) + " not divisible by cell size " +
                         std::to_string(cell));
    const int rows = gt_skeleton.height / cell;
    const int cols = gt_skeleton.width / cell;
    LabelMatrix labels(rows, cols, 1);
    const BinaryMask fn = false_negative_set(gt_skeleton, t0);
    for (const Interruption& comp : interruptions(fn)) {
        // Per-cell pixel count of this single component; a cell is only
        // blamed when >= min_len of one component's pixels fall inside it.
        std::map<std::pair<int, int>, int> per_cell;
        for (const auto& [x, y] : comp.pixels) ++per_cell[{y / cell, x / cell}];
        for (const auto& [rc, n] : per_cell)
            if (n >= min_len) labels.at(rc.first, rc.second) = 0;
    }
    return labels;
}

std::vector<int> pyramid_patch_sizes(int side, int cell) {
    if (side <= 0 || side % cell != 0)
        throw ShapeError("pyramid: side " + std::to_string(side) + " not divisible by cell " +
                         std::to_string(cell));
    const int finest = side / cell;
    if ((finest & (finest - 1)) != 0)
        throw ShapeError("pyramid: side " + std::to_string(side) +
                         " does not reduce to a 1x1 top level by halving");
    std::vector<int> sizes;
    for (int p = side; p >= cell; p /= 2) sizes.push_back(p);
    return sizes;
}

LabelPyramid build_label_pyramid(const BinaryMask& gt_mask, const ProbabilityMap& prob,
                                 const LabelConfig& config) {
    if (gt_mask.width != prob.width || gt_mask.height != prob.height)
        throw ShapeError("build_label_pyramid: ground truth " + std::to_string(gt_mask.width) +
                         "x" + std::to_string(gt_mask.height) + " vs prediction " +
                         std::to_string(prob.width) + "x" + std::to_string(prob.height));
    if (gt_mask.width != gt_mask.height)
        throw ShapeError("build_label_pyramid: input must be square, got " +
                         std::to_string(gt_mask.width) + "x" + std::to_string(gt_mask.height));
    const std::vector<int> sizes = pyramid_patch_sizes(gt_mask.width, config.cell_size);

    const BinaryMask t0 = build_t0(prob, gt_mask, config.threshold, config.dilation_radius);
    const BinaryMask gt_skeleton = skeletonize(gt_mask);
    LabelMatrix fine =
        finest_labels(gt_skeleton, t0, config.cell_size, config.min_interruption);

    LabelPyramid pyramid;
    pyramid.levels.resize(sizes.size());
    pyramid.levels.back() = {sizes.back(), fine};
    for (int k = static_cast<int>(sizes.size()) - 2; k >= 0; --k) {
        const LabelMatrix& child = pyramid.levels[k + 1].matrix;
        LabelMatrix coarse(child.rows / 2, child.cols / 2, 1);
        for (int r = 0; r < coarse.rows; ++r)
            for (int c = 0; c < coarse.cols; ++c)
                coarse.at(r, c) = child.at(2 * r, 2 * c) & child.at(2 * r, 2 * c + 1) &
                                  child.at(2 * r + 1, 2 * c) & child.at(2 * r + 1, 2 * c + 1);
        pyramid.levels[k] = {sizes[k], std::move(coarse)};
    }
    return pyramid;
}

DiscriminatorInput build_discriminator_input(const BinaryMask& t0,
                                             const std::optional<MultiChannelImage>& image) {
    if (image && (image->width != t0.width || image->height != t0.height))
        throw ShapeError("build_discriminator_input: mask " + std::to_string(t0.width) + "x" +
                         std::to_string(t0.height) + " vs image " + std::to_string(image->width) +
                         "x" + std::to_string(image->height));
    DiscriminatorInput in;
    in.width = t0.width;
    in.height = t0.height;
    in.channels = 1 + (image ? image->channels : 0);
    in.planes.reserve(static_cast<std::size_t>(in.width) * in.height * in.channels);
    for (std::uint8_t b : t0.bits) in.planes.push_back(static_cast<double>(b));
    if (image) in.planes.insert(in.planes.end(), image->planes.begin(), image->planes.end());
    return in;
}

}  // namespace topoeval
