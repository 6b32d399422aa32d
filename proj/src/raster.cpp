#include "topoeval/raster.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace topoeval {

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

BinaryMask threshold_forward(const ProbabilityMap& p, double t) {
    if (!(t > 0.0 && t < 1.0))
        throw DomainError("threshold must lie strictly inside (0,1), got " + std::to_string(t));
    BinaryMask out(p.width, p.height);
    for (std::size_t i = 0; i < p.values.size(); ++i)
        out.bits[i] = p.values[i] >= t ? 1 : 0;
    return out;
}

RealImage ste_backward(const RealImage& grad_out, const ProbabilityMap& p) {
    if (grad_out.width != p.width || grad_out.height != p.height)
        throw ShapeError("ste_backward: gradient " + std::to_string(grad_out.width) + "x" +
                         std::to_string(grad_out.height) + " vs map " + std::to_string(p.width) +
                         "x" + std::to_string(p.height));
    return grad_out;
}

BinaryMask dilate(const BinaryMask& m, int r) {
    if (r < 0) throw DomainError("dilation radius must be non-negative");
    if (r == 0) return m;
    // Chebyshev dilation is separable: horizontal window max, then vertical.
    BinaryMask tmp(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            std::uint8_t v = 0;
            for (int dx = -r; dx <= r && !v; ++dx) v = m.get(x + dx, y);
            tmp.at(x, y) = v;
        }
    }
    BinaryMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            std::uint8_t v = 0;
            for (int dy = -r; dy <= r && !v; ++dy) v = tmp.get(x, y + dy);
            out.at(x, y) = v;
        }
    }
    return out;
}

namespace {

// Neighbors in Zhang-Suen order P2..P9: N, NE, E, SE, S, SW, W, NW.
constexpr int kNx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kNy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

bool zs_deletable(const BinaryMask& m, int x, int y, int subiter) {
    std::uint8_t n[8];
    for (int k = 0; k < 8; ++k) n[k] = m.get(x + kNx[k], y + kNy[k]);
    int b = 0;
    for (int k = 0; k < 8; ++k) b += n[k];
    if (b < 2 || b > 6) return false;
    int a = 0;
    for (int k = 0; k < 8; ++k)
        if (n[k] == 0 && n[(k + 1) % 8] == 1) ++a;
    if (a != 1) return false;
    const std::uint8_t p2 = n[0], p4 = n[2], p6 = n[4], p8 = n[6];
    if (subiter == 0) return (p2 * p4 * p6 == 0) && (p4 * p6 * p8 == 0);
    return (p2 * p4 * p8 == 0) && (p2 * p6 * p8 == 0);
}

}  // namespace

BinaryMask skeletonize(const BinaryMask& m) {
    BinaryMask cur = m;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int subiter = 0; subiter < 2; ++subiter) {
            const BinaryMask snapshot = cur;
            for (int y = 0; y < cur.height; ++y) {
                for (int x = 0; x < cur.width; ++x) {
                    if (!cur.at(x, y)) continue;
                    // Flag against the snapshot (parallel semantics), then
                    // re-check against the current image before removing so a
                    // deletion can never split or erase a component.
                    if (zs_deletable(snapshot, x, y, subiter) &&
                        zs_deletable(cur, x, y, subiter)) {
                        cur.at(x, y) = 0;
                        changed = true;
                    }
                }
            }
        }
    }
    return cur;
}

BinaryMask mask_intersect(const BinaryMask& a, const BinaryMask& b) {
    if (a.width != b.width || a.height != b.height)
        throw ShapeError("mask_intersect: " + std::to_string(a.width) + "x" +
                         std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                         std::to_string(b.height));
    BinaryMask out(a.width, a.height);
    for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = a.bits[i] & b.bits[i];
    return out;
}

BinaryMask build_t0(const ProbabilityMap& p, const BinaryMask& gt, double t, int r) {
    if (p.width != gt.width || p.height != gt.height)
        throw ShapeError("build_t0: prediction " + std::to_string(p.width) + "x" +
                         std::to_string(p.height) + " vs ground truth " +
                         std::to_string(gt.width) + "x" + std::to_string(gt.height));
    return mask_intersect(threshold_forward(p, t), dilate(gt, r));
}

}  // namespace topoeval
