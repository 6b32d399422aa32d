#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "topoeval/errors.hpp"

namespace topoeval {

// Row-major {0,1} raster. Origin at top-left, x rightward, y downward.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

    std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }

    // Out-of-canvas pixels read as background.
    std::uint8_t get(int x, int y) const {
        if (x < 0 || y < 0 || x >= width || y >= height) return 0;
        return at(x, y);
    }

    std::size_t count() const;
    bool same_shape(int w, int h) const { return width == w && height == h; }

    bool operator==(const BinaryMask&) const = default;
};

// Row-major raster of probabilities in [0,1].
struct ProbabilityMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    ProbabilityMap() = default;
    ProbabilityMap(int w, int h, double fill = 0.0)
        : width(w), height(h),
          values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const ProbabilityMap&) const = default;
};

// Row-major raster of unconstrained reals (gradients and the like).
struct RealImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    RealImage() = default;
    RealImage(int w, int h, double fill = 0.0)
        : width(w), height(h),
          values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const RealImage&) const = default;
};

// Forward pass of the straight-through binarization: bit is 1 iff p >= t.
// Requires 0 < t < 1.
BinaryMask threshold_forward(const ProbabilityMap& p, double t = 0.5);

// Backward pass of the straight-through binarization: the identity Jacobian.
RealImage ste_backward(const RealImage& grad_out, const ProbabilityMap& p);

// Morphological dilation with a (2r+1)x(2r+1) square (Chebyshev) element.
BinaryMask dilate(const BinaryMask& m, int r);

// Zhang-Suen iterative thinning, 8-connectivity, zero-padded borders.
// Deletions within a sub-iteration are applied sequentially in raster order
// with the deletability conditions re-checked against the current image, so
// the 8-connected foreground component count is preserved.
BinaryMask skeletonize(const BinaryMask& m);

// Elementwise AND.
BinaryMask mask_intersect(const BinaryMask& a, const BinaryMask& b);

// Thresholded prediction restricted to the dilated ground-truth band.
BinaryMask build_t0(const ProbabilityMap& p, const BinaryMask& gt, double t = 0.5, int r = 3);

}  // namespace topoeval
