#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "topoeval/graph.hpp"
#include "topoeval/raster.hpp"

namespace testutil {

using topoeval::BinaryMask;
using topoeval::Point;
using topoeval::ProbabilityMap;
using topoeval::RoadGraph;

inline BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
    std::bernoulli_distribution bit(density);
    BinaryMask m(w, h);
    for (auto& b : m.bits) b = bit(rng) ? 1 : 0;
    return m;
}

// Marks a thin segment with naive DDA; good enough for fixture inputs.
inline void draw_segment(BinaryMask& m, double x0, double y0, double x1, double y1) {
    const double len = std::hypot(x1 - x0, y1 - y0);
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 2)));
    for (int s = 0; s <= steps; ++s) {
        const double t = double(s) / steps;
        const int x = static_cast<int>(std::lround(x0 + (x1 - x0) * t));
        const int y = static_cast<int>(std::lround(y0 + (y1 - y0) * t));
        if (x >= 0 && y >= 0 && x < m.width && y < m.height) m.at(x, y) = 1;
    }
}

// Road-like mask: a handful of straight strokes, optionally thickened.
inline BinaryMask random_road_mask(std::mt19937_64& rng, int w, int h, int n_lines,
                                   int thickness_radius = 1) {
    BinaryMask m(w, h);
    std::uniform_int_distribution<int> px(0, w - 1), py(0, h - 1);
    for (int i = 0; i < n_lines; ++i)
        draw_segment(m, px(rng), py(rng), px(rng), py(rng));
    return thickness_radius > 0 ? topoeval::dilate(m, thickness_radius) : m;
}

// Confident probability rendering of a mask.
inline ProbabilityMap confident(const BinaryMask& m, double hi = 0.9, double lo = 0.1) {
    ProbabilityMap p(m.width, m.height);
    for (std::size_t i = 0; i < m.bits.size(); ++i) p.values[i] = m.bits[i] ? hi : lo;
    return p;
}

inline int count_components_8(const BinaryMask& m) {
    std::vector<char> seen(m.bits.size(), 0);
    std::vector<int> stack;
    int n = 0;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            const std::size_t idx = std::size_t(y) * m.width + x;
            if (!m.bits[idx] || seen[idx]) continue;
            ++n;
            seen[idx] = 1;
            stack.assign(1, int(idx));
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                const int cx = cur % m.width, cy = cur / m.width;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
                        const std::size_t ni = std::size_t(ny) * m.width + nx;
                        if (m.bits[ni] && !seen[ni]) {
                            seen[ni] = 1;
                            stack.push_back(int(ni));
                        }
                    }
            }
        }
    }
    return n;
}

inline bool subset_of(const BinaryMask& a, const BinaryMask& b) {
    for (std::size_t i = 0; i < a.bits.size(); ++i)
        if (a.bits[i] && !b.bits[i]) return false;
    return true;
}

// Brute-force Chebyshev dilation, the oracle for the fast implementation.
inline BinaryMask dilate_oracle(const BinaryMask& m, int r) {
    BinaryMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            for (int dy = -r; dy <= r && !out.at(x, y); ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    if (m.get(x + dx, y + dy)) {
                        out.at(x, y) = 1;
                        break;
                    }
        }
    return out;
}

// Random self-avoiding tree whose edges run at multiples of 45 degrees, so
// rasterized length matches Euclidean length and edges never overlap.
inline RoadGraph random_tree_45(std::mt19937_64& rng, int canvas, int n_nodes) {
    RoadGraph g;
    BinaryMask occupied(canvas, canvas);
    std::uniform_int_distribution<int> start(canvas / 4, 3 * canvas / 4);
    const Point p0{double(start(rng)), double(start(rng))};
    g.add_node(p0);
    occupied.at(int(p0.x), int(p0.y)) = 1;
    std::uniform_int_distribution<int> dir8(0, 7);
    std::uniform_int_distribution<int> len(6, 18);
    static const int dx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
    static const int dy[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    int attempts = 0;
    while (g.node_count() < n_nodes && attempts++ < 2000) {
        std::uniform_int_distribution<int> pick(0, g.node_count() - 1);
        const int parent = pick(rng);
        const int d = dir8(rng), L = len(rng);
        const Point p = g.node(parent);
        const Point q{p.x + dx[d] * L, p.y + dy[d] * L};
        if (q.x < 1 || q.y < 1 || q.x > canvas - 2 || q.y > canvas - 2) continue;
        // Keep new pixels clear of everything drawn so far, except right at
        // the parent node where the branch attaches.
        bool clash = false;
        for (int s = 1; s <= L && !clash; ++s) {
            const int x = int(p.x) + dx[d] * s, y = int(p.y) + dy[d] * s;
            for (int oy = -2; oy <= 2 && !clash; ++oy)
                for (int ox = -2; ox <= 2; ++ox) {
                    if (occupied.get(x + ox, y + oy) &&
                        std::max(std::abs(x + ox - int(p.x)), std::abs(y + oy - int(p.y))) > 1) {
                        clash = true;
                        break;
                    }
                }
        }
        if (clash) continue;
        const int child = g.add_node(q);
        g.add_edge(parent, child);
        for (int s = 1; s <= L; ++s)
            occupied.at(int(p.x) + dx[d] * s, int(p.y) + dy[d] * s) = 1;
    }
    return g;
}

// Floyd-Warshall all-pairs distances; independent of the Dijkstra path.
inline std::vector<std::vector<double>> all_pairs_fw(const RoadGraph& g) {
    const int n = g.node_count();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
    for (int i = 0; i < n; ++i) {
        d[i][i] = 0.0;
        for (const auto& e : g.neighbors(i)) d[i][e.to] = e.length;
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    return d;
}

}  // namespace testutil
