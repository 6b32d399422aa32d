#include "topoeval/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

namespace topoeval {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

int RoadGraph::add_node(Point p) {
    nodes_.push_back(p);
    adj_.emplace_back();
    return static_cast<int>(nodes_.size()) - 1;
}

void RoadGraph::check_node(int id) const {
    if (id < 0 || id >= node_count())
        throw DomainError("invalid node id " + std::to_string(id) + " (graph has " +
                          std::to_string(node_count()) + " nodes)");
}

void RoadGraph::add_edge(int a, int b) {
    check_node(a);
    check_node(b);
    if (a == b) throw DomainError("self-loop on node " + std::to_string(a));
    if (has_edge(a, b))
        throw DomainError("duplicate edge " + std::to_string(a) + "-" + std::to_string(b));
    const double len = distance(nodes_[a], nodes_[b]);
    auto insert_sorted = [](std::vector<Halfedge>& v, Halfedge e) {
        v.insert(std::lower_bound(v.begin(), v.end(), e,
                                  [](const Halfedge& x, const Halfedge& y) { return x.to < y.to; }),
                 e);
    };
    insert_sorted(adj_[a], {b, len});
    insert_sorted(adj_[b], {a, len});
}

std::size_t RoadGraph::edge_count() const {
    std::size_t half = 0;
    for (const auto& v : adj_) half += v.size();
    return half / 2;
}

Point RoadGraph::node(int id) const {
    check_node(id);
    return nodes_[id];
}

const std::vector<RoadGraph::Halfedge>& RoadGraph::neighbors(int id) const {
    check_node(id);
    return adj_[id];
}

bool RoadGraph::has_edge(int a, int b) const {
    const auto& v = adj_[a];
    return std::any_of(v.begin(), v.end(), [b](const Halfedge& e) { return e.to == b; });
}

namespace {

// Neighbor scan order: N, NE, E, SE, S, SW, W, NW.
constexpr int kNx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kNy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

// Pixel adjacency over the skeleton: 4-neighbors always; a diagonal neighbor
// only counts when both orthogonal intermediates are background, so corners
// do not create spurious triangles.
void skeleton_neighbors(const BinaryMask& s, int x, int y, int dirs[8], int& n) {
    n = 0;
    for (int d = 0; d < 8; ++d) {
        const int nx = x + kNx[d], ny = y + kNy[d];
        if (!s.get(nx, ny)) continue;
        if (kNx[d] != 0 && kNy[d] != 0 && (s.get(x + kNx[d], y) || s.get(x, y + kNy[d])))
            continue;
        dirs[n++] = d;
    }
}

int reverse_dir(int d) { return (d + 4) % 8; }

}  // namespace

RoadGraph mask_to_graph(const BinaryMask& m) {
    const BinaryMask s = skeletonize(m);
    const int w = s.width, h = s.height;
    RoadGraph g;
    if (w == 0 || h == 0) return g;

    // Node pixels: anything but an interior pixel of a straight run.
    std::vector<int> node_id(static_cast<std::size_t>(w) * h, -1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!s.at(x, y)) continue;
            int dirs[8], n;
            skeleton_neighbors(s, x, y, dirs, n);
            const bool straight = n == 2 && dirs[1] == reverse_dir(dirs[0]);
            if (!straight)
                node_id[static_cast<std::size_t>(y) * w + x] =
                    g.add_node({static_cast<double>(x), static_cast<double>(y)});
        }
    }

    // Walk each straight run once, from a node pixel to the next node pixel.
    std::vector<std::uint8_t> step_done(static_cast<std::size_t>(w) * h * 8, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (node_id[idx] < 0) continue;
            int dirs[8], n;
            skeleton_neighbors(s, x, y, dirs, n);
            for (int k = 0; k < n; ++k) {
                const int d0 = dirs[k];
                if (step_done[idx * 8 + d0]) continue;
                step_done[idx * 8 + d0] = 1;
                int cx = x + kNx[d0], cy = y + kNy[d0];
                int came = d0;
                std::size_t cidx = static_cast<std::size_t>(cy) * w + cx;
                while (node_id[cidx] < 0) {
                    // Interior run pixel: exactly two collinear neighbors.
                    cx += kNx[came];
                    cy += kNy[came];
                    cidx = static_cast<std::size_t>(cy) * w + cx;
                }
                step_done[cidx * 8 + reverse_dir(came)] = 1;
                const int u = node_id[idx], v = node_id[cidx];
                if (u != v && !g.has_edge(u, v)) g.add_edge(u, v);
            }
        }
    }
    return g;
}

namespace {

void set_clipped(BinaryMask& m, int x, int y) {
    if (x >= 0 && y >= 0 && x < m.width && y < m.height) m.at(x, y) = 1;
}

// Supercover traversal: marks every cell whose interior the segment crosses.
// Exact corner crossings step diagonally so 45-degree segments stay one pixel
// wide; the result is 8-connected end to end and thinning-stable.
void rasterize_segment(BinaryMask& out, Point a, Point b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    int i = static_cast<int>(std::lround(a.x)), j = static_cast<int>(std::lround(a.y));
    const int i1 = static_cast<int>(std::lround(b.x)), j1 = static_cast<int>(std::lround(b.y));
    set_clipped(out, i, j);
    const int stepx = dx > 0 ? 1 : -1, stepy = dy > 0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    double t_max_x = dx != 0 ? ((i + 0.5 * stepx) - a.x) / dx : inf;
    double t_max_y = dy != 0 ? ((j + 0.5 * stepy) - a.y) / dy : inf;
    const double t_delta_x = dx != 0 ? std::abs(1.0 / dx) : inf;
    const double t_delta_y = dy != 0 ? std::abs(1.0 / dy) : inf;
    const long max_steps = 2L * (std::labs(i1 - i) + std::labs(j1 - j)) + 4;
    long steps = 0;
    const double eps = 1e-12;
    while ((i != i1 || j != j1) && steps++ < max_steps) {
        if (t_max_x < t_max_y - eps) {
            i += stepx;
            t_max_x += t_delta_x;
        } else if (t_max_y < t_max_x - eps) {
            j += stepy;
            t_max_y += t_delta_y;
        } else {
            i += stepx;
            j += stepy;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        }
        set_clipped(out, i, j);
    }
}

}  // namespace

BinaryMask render_graph(const RoadGraph& g, int width, int height, int thickness) {
    if (width <= 0 || height <= 0)
        throw DomainError("render_graph: non-positive canvas " + std::to_string(width) + "x" +
                          std::to_string(height));
    if (thickness < 1) throw DomainError("render_graph: thickness must be >= 1");
    BinaryMask out(width, height);
    for (int a = 0; a < g.node_count(); ++a) {
        if (g.degree(a) == 0) {
            const Point p = g.node(a);
            set_clipped(out, static_cast<int>(std::lround(p.x)),
                        static_cast<int>(std::lround(p.y)));
        }
        for (const auto& e : g.neighbors(a))
            if (a < e.to) rasterize_segment(out, g.node(a), g.node(e.to));
    }
    const int r = thickness / 2;
    return r > 0 ? dilate(out, r) : out;
}

std::vector<double> shortest_path_from(const RoadGraph& g, int src, double cutoff) {
    g.check_node(src);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.node_count(), inf);
    using Entry = std::pair<double, int>;  // (distance, node); id breaks ties
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    dist[src] = 0.0;
    heap.emplace(0.0, src);
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        if (d > cutoff) break;
        for (const auto& e : g.neighbors(u)) {
            const double nd = d + e.length;
            if (nd < dist[e.to]) {
                dist[e.to] = nd;
                heap.emplace(nd, e.to);
            }
        }
    }
    if (std::isfinite(cutoff))
        for (double& d : dist)
            if (d > cutoff) d = inf;
    return dist;
}

std::optional<double> shortest_path_length(const RoadGraph& g, PathQuery q) {
    g.check_node(q.source);
    g.check_node(q.target);
    const std::vector<double> dist = shortest_path_from(g, q.source);
    if (!std::isfinite(dist[q.target])) return std::nullopt;
    return dist[q.target];
}

std::optional<int> snap_node(const RoadGraph& g, Point p, double max_dist) {
    if (max_dist < 0) throw DomainError("snap_node: max_dist must be >= 0");
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.node_count(); ++i) {
        const double d = distance(g.node(i), p);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    if (best < 0 || best_d > max_dist) return std::nullopt;
    return best;
}

std::vector<int> junctions(const RoadGraph& g) {
    std::vector<int> out;
    for (int i = 0; i < g.node_count(); ++i)
        if (g.degree(i) >= 3) out.push_back(i);
    return out;
}

RoadGraph subgraph_within(const RoadGraph& g, int center, double radius) {
    g.check_node(center);
    if (radius < 0) throw DomainError("subgraph_within: radius must be >= 0");
    const std::vector<double> dist = shortest_path_from(g, center, radius);
    RoadGraph out;
    std::vector<int> remap(g.node_count(), -1);
    for (int i = 0; i < g.node_count(); ++i)
        if (dist[i] <= radius) remap[i] = out.add_node(g.node(i));
    for (int a = 0; a < g.node_count(); ++a) {
        if (remap[a] < 0) continue;
        for (const auto& e : g.neighbors(a)) {
            if (remap[e.to] >= 0) {
                if (a < e.to) out.add_edge(remap[a], remap[e.to]);
                continue;
            }
            // Edge leaves the radius: truncate it at the radius point.
            const double rem = radius - dist[a];
            if (rem <= 0.0) continue;
            const Point pa = g.node(a), pb = g.node(e.to);
            const double f = std::min(1.0, rem / e.length);
            const int bnode =
                out.add_node({pa.x + (pb.x - pa.x) * f, pa.y + (pb.y - pa.y) * f});
            out.add_edge(remap[a], bnode);
        }
    }
    return out;
}

std::vector<Point> walk_points(const RoadGraph& g, int start, double max_dist, double spacing) {
    g.check_node(start);
    if (spacing <= 0) throw DomainError("walk_points: spacing must be positive");
    if (max_dist < 0) throw DomainError("walk_points: max_dist must be >= 0");
    const std::vector<double> dist = shortest_path_from(g, start, max_dist);
    const double eps = 1e-9;

    struct Candidate {
        double geo;  // geodesic distance, a multiple of spacing
        Point p;
    };
    std::vector<Candidate> cands;
    for (int u = 0; u < g.node_count(); ++u) {
        if (!std::isfinite(dist[u])) continue;
        const double k = std::round(dist[u] / spacing);
        if (std::abs(dist[u] - k * spacing) <= eps) cands.push_back({k * spacing, g.node(u)});
        for (const auto& e : g.neighbors(u)) {
            // Points reached via u first: geodesic distance dist[u] + t along
            // the edge, valid while that beats the route through the far end.
            const double dv =
                std::isfinite(dist[e.to]) ? dist[e.to] : std::numeric_limits<double>::infinity();
            const double lo = dist[u], hi = std::min({dist[u] + e.length, max_dist + eps});
            for (double m = std::ceil((lo - eps) / spacing) * spacing; m <= hi;
                 m += spacing) {
                const double t = m - dist[u];
                if (t < -eps || t > e.length + eps) continue;
                if (dist[u] + t > dv + (e.length - t) + eps) continue;
                const Point pu = g.node(u), pv = g.node(e.to);
                const double f = e.length > 0 ? t / e.length : 0.0;
                cands.push_back({m, {pu.x + (pv.x - pu.x) * f, pu.y + (pv.y - pu.y) * f}});
            }
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.geo != b.geo) return a.geo < b.geo;
        if (a.p.x != b.p.x) return a.p.x < b.p.x;
        return a.p.y < b.p.y;
    });
    std::vector<Point> out;
    for (const Candidate& c : cands) {
        bool dup = false;
        for (const Point& q : out) {
            if (distance(c.p, q) < spacing / 2) {
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(c.p);
    }
    return out;
}

}  // namespace topoeval
