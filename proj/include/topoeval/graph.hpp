#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "topoeval/raster.hpp"

namespace topoeval {

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

// Undirected geometric graph of road centerlines. Dense node ids, sorted
// neighbor lists, Euclidean edge lengths, no self-loops or parallel edges.
class RoadGraph {
public:
    struct Halfedge {
        int to = -1;
        double length = 0.0;
    };

    int add_node(Point p);
    void add_edge(int a, int b);

    int node_count() const { return static_cast<int>(nodes_.size()); }
    std::size_t edge_count() const;
    Point node(int id) const;
    const std::vector<Point>& nodes() const { return nodes_; }
    const std::vector<Halfedge>& neighbors(int id) const;
    int degree(int id) const { return static_cast<int>(neighbors(id).size()); }
    bool has_edge(int a, int b) const;
    bool empty() const { return nodes_.empty(); }

    void check_node(int id) const;

private:
    std::vector<Point> nodes_;
    std::vector<std::vector<Halfedge>> adj_;
};

struct PathQuery {
    int source = -1;
    int target = -1;
};

// Skeletonize the mask and vectorize it: junction, terminal, and bend pixels
// become nodes; straight degree-2 runs collapse into single edges. Connected
// components correspond one-to-one to the skeleton's 8-connected components,
// and total edge length equals the pixel-adjacency graph's total length.
RoadGraph mask_to_graph(const BinaryMask& m);

// Rasterize every edge with supercover line drawing, then thicken by
// floor(thickness/2) Chebyshev dilation. Out-of-canvas pixels are clipped.
BinaryMask render_graph(const RoadGraph& g, int width, int height, int thickness = 1);

// Exact Dijkstra distance; nullopt when unreachable.
std::optional<double> shortest_path_length(const RoadGraph& g, PathQuery q);

// Distances from src to every node; infinity marks unreachable. With a
// finite cutoff, distances beyond it are left at infinity.
std::vector<double> shortest_path_from(const RoadGraph& g, int src,
                                       double cutoff = std::numeric_limits<double>::infinity());

// Nearest node within Euclidean max_dist; ties break to the smaller id.
std::optional<int> snap_node(const RoadGraph& g, Point p, double max_dist = 25.0);

// Node ids with degree >= 3, ascending.
std::vector<int> junctions(const RoadGraph& g);

// Induced subgraph on nodes within geodesic radius of center; edges crossing
// the radius are truncated at the radius point via inserted boundary nodes.
RoadGraph subgraph_within(const RoadGraph& g, int center, double radius);

// Points at geodesic distances {0, spacing, 2*spacing, ... <= max_dist} from
// start along every reachable path, deduplicated within spacing/2.
std::vector<Point> walk_points(const RoadGraph& g, int start, double max_dist, double spacing);

}  // namespace topoeval
