#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "topoeval/graph.hpp"

#include "helpers.hpp"

using namespace topoeval;
using namespace testutil;

namespace {

// Pixel-adjacency total length of a skeleton: 4-neighbors count 1, diagonal
// neighbors count sqrt(2) when no orthogonal shortcut exists between them.
double pixel_graph_length(const BinaryMask& s) {
    double total = 0.0;
    for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x) {
            if (!s.at(x, y)) continue;
            if (s.get(x + 1, y)) total += 1.0;
            if (s.get(x, y + 1)) total += 1.0;
            if (s.get(x + 1, y + 1) && !s.get(x + 1, y) && !s.get(x, y + 1))
                total += std::sqrt(2.0);
            if (s.get(x - 1, y + 1) && !s.get(x - 1, y) && !s.get(x, y + 1))
                total += std::sqrt(2.0);
        }
    return total;
}

double total_length(const RoadGraph& g) {
    double total = 0.0;
    for (int a = 0; a < g.node_count(); ++a)
        for (const auto& e : g.neighbors(a))
            if (a < e.to) total += e.length;
    return total;
}

bool contains_point(const RoadGraph& g, Point p, double tol = 1e-9) {
    for (const Point& q : g.nodes())
        if (distance(p, q) <= tol) return true;
    return false;
}

}  // namespace

TEST_CASE("RoadGraph rejects self-loops, duplicates, bad ids") {
    RoadGraph g;
    g.add_node({0, 0});
    g.add_node({1, 0});
    g.add_edge(0, 1);
    CHECK_THROWS_AS(g.add_edge(0, 0), DomainError);
    CHECK_THROWS_AS(g.add_edge(0, 1), DomainError);
    CHECK_THROWS_AS(g.add_edge(0, 5), DomainError);
    CHECK(g.has_edge(1, 0));
    CHECK(g.neighbors(0)[0].length == doctest::Approx(1.0));
}

TEST_CASE("mask_to_graph: empty, straight line, plus shape") {
    CHECK(mask_to_graph(BinaryMask(8, 8)).empty());

    BinaryMask line(14, 5);
    for (int x = 2; x < 12; ++x) line.at(x, 2) = 1;
    const RoadGraph lg = mask_to_graph(line);
    REQUIRE(lg.node_count() == 2);
    REQUIRE(lg.edge_count() == 1);
    CHECK(lg.neighbors(0)[0].length == doctest::Approx(9.0).epsilon(1e-12));

    BinaryMask plus(25, 25);
    for (int i = 2; i <= 22; ++i) {
        plus.at(i, 12) = 1;
        plus.at(12, i) = 1;
    }
    const RoadGraph pg = mask_to_graph(plus);
    REQUIRE(pg.node_count() == 5);
    REQUIRE(pg.edge_count() == 4);
    int center = -1;
    for (int i = 0; i < 5; ++i)
        if (pg.degree(i) == 4) center = i;
    REQUIRE(center >= 0);
    CHECK(pg.node(center) == Point{12, 12});
    for (const auto& e : pg.neighbors(center))
        CHECK(e.length == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("mask_to_graph conserves pixel-graph length and components") {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 20; ++trial) {
        const BinaryMask m = random_road_mask(rng, 96, 96, 5, 1);
        const BinaryMask s = skeletonize(m);
        const RoadGraph g = mask_to_graph(m);
        CHECK(total_length(g) == doctest::Approx(pixel_graph_length(s)).epsilon(1e-9));
    }
}

TEST_CASE("render_graph: axis-aligned edge, empty graph, thickness") {
    RoadGraph g;
    g.add_node({0, 5});
    g.add_node({9, 5});
    g.add_edge(0, 1);
    const BinaryMask thin = render_graph(g, 10, 10, 1);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) CHECK(thin.at(x, y) == (y == 5 ? 1 : 0));

    CHECK(render_graph(RoadGraph{}, 6, 6).count() == 0);

    const BinaryMask thick = render_graph(g, 10, 10, 3);
    CHECK(thick.count() == 30);  // rows 4..6 fully set
    CHECK_THROWS_AS(render_graph(g, 0, 10), DomainError);
    CHECK_THROWS_AS(render_graph(g, 10, 10, 0), DomainError);
}

TEST_CASE("render round-trip preserves components and length within 5%") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const RoadGraph tree = random_tree_45(rng, 128, 8);
        const BinaryMask r = render_graph(tree, 128, 128, 1);
        CHECK(count_components_8(r) == 1);
        const RoadGraph back = mask_to_graph(r);
        const double lt = total_length(tree), lb = total_length(back);
        CHECK(std::abs(lb - lt) <= 0.05 * lt);
    }
}

TEST_CASE("shortest paths: self, detour sum, relaxation, unreachable") {
    RoadGraph g;
    g.add_node({0, 0});
    g.add_node({3, 0});
    g.add_node({3, 4});
    g.add_node({100, 100});  // isolated
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    CHECK(shortest_path_length(g, {0, 0}) == doctest::Approx(0.0));
    CHECK(shortest_path_length(g, {0, 2}) == doctest::Approx(7.0).epsilon(1e-12));
    g.add_edge(0, 2);  // direct 3-4-5 hypotenuse
    CHECK(shortest_path_length(g, {0, 2}) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(!shortest_path_length(g, {0, 3}).has_value());
    CHECK_THROWS_AS(shortest_path_length(g, {0, 9}), DomainError);
}

TEST_CASE("shortest paths agree with Floyd-Warshall, symmetric, triangle") {
    std::mt19937_64 rng(57);
    for (int trial = 0; trial < 10; ++trial) {
        const RoadGraph g = random_tree_45(rng, 160, 12);
        const auto fw = all_pairs_fw(g);
        const int n = g.node_count();
        for (int i = 0; i < n; ++i) {
            const auto dist = shortest_path_from(g, i);
            for (int j = 0; j < n; ++j) {
                CHECK(dist[j] == doctest::Approx(fw[i][j]).epsilon(1e-9));
                CHECK(fw[i][j] == doctest::Approx(fw[j][i]).epsilon(1e-12));
                for (int k = 0; k < n; ++k)
                    CHECK(fw[i][j] <= fw[i][k] + fw[k][j] + 1e-9);
            }
        }
    }
}

TEST_CASE("shortest_path_from honors the cutoff") {
    RoadGraph g;
    for (int i = 0; i < 4; ++i) g.add_node({double(10 * i), 0});
    for (int i = 0; i < 3; ++i) g.add_edge(i, i + 1);
    const auto dist = shortest_path_from(g, 0, 15.0);
    CHECK(dist[0] == 0.0);
    CHECK(dist[1] == 10.0);
    CHECK(std::isinf(dist[2]));
    CHECK(std::isinf(dist[3]));
}

TEST_CASE("snap_node: match, miss, id tie-break") {
    RoadGraph g;
    g.add_node({0, 0});
    g.add_node({40, 0});
    CHECK(snap_node(g, {3, 4}, 25.0) == 0);
    CHECK(!snap_node(g, {100, 100}, 25.0).has_value());
    CHECK(snap_node(g, {20, 0}, 25.0) == 0);  // equidistant, smaller id wins
    CHECK(!snap_node(RoadGraph{}, {0, 0}, 25.0).has_value());
}

TEST_CASE("junctions: path, star, plus fixture") {
    RoadGraph path;
    for (int i = 0; i < 4; ++i) path.add_node({double(i), 0});
    for (int i = 0; i < 3; ++i) path.add_edge(i, i + 1);
    CHECK(junctions(path).empty());

    RoadGraph star;
    star.add_node({0, 0});
    for (int i = 0; i < 4; ++i) {
        star.add_node({std::cos(i * 1.5) * 10, std::sin(i * 1.5) * 10});
        star.add_edge(0, i + 1);
    }
    CHECK(junctions(star) == std::vector<int>{0});

    BinaryMask plus(25, 25);
    for (int i = 2; i <= 22; ++i) {
        plus.at(i, 12) = 1;
        plus.at(12, i) = 1;
    }
    const RoadGraph pg = mask_to_graph(plus);
    const auto j = junctions(pg);
    REQUIRE(j.size() == 1);
    CHECK(pg.degree(j[0]) == 4);
}

TEST_CASE("subgraph_within: radius 0, whole component, boundary insertion") {
    RoadGraph g;
    g.add_node({0, 0});
    g.add_node({200, 0});
    g.add_node({200, 200});
    g.add_edge(0, 1);
    g.add_edge(1, 2);

    const RoadGraph r0 = subgraph_within(g, 0, 0.0);
    CHECK(r0.node_count() == 1);
    CHECK(r0.edge_count() == 0);

    const RoadGraph whole = subgraph_within(g, 0, 1000.0);
    CHECK(whole.node_count() == 3);
    CHECK(whole.edge_count() == 2);

    const RoadGraph cut = subgraph_within(g, 0, 300.0);
    REQUIRE(cut.node_count() == 3);  // A, B, boundary 100 px along B-C
    CHECK(contains_point(cut, {200, 100}));
    CHECK(total_length(cut) == doctest::Approx(300.0).epsilon(1e-12));
    CHECK_THROWS_AS(subgraph_within(g, 9, 10.0), DomainError);
}

TEST_CASE("walk_points: isolated node, single edge, Y fixture") {
    RoadGraph lone;
    lone.add_node({7, 8});
    const auto only = walk_points(lone, 0, 100, 10);
    REQUIRE(only.size() == 1);
    CHECK(only[0] == Point{7, 8});

    RoadGraph edge;
    edge.add_node({0, 0});
    edge.add_node({30, 0});
    edge.add_edge(0, 1);
    const auto pts = walk_points(edge, 0, 30, 10);
    REQUIRE(pts.size() == 4);
    CHECK(pts[0] == Point{0, 0});
    CHECK(pts[1] == Point{10, 0});
    CHECK(pts[2] == Point{20, 0});
    CHECK(pts[3] == Point{30, 0});

    // Y: tip (0,0) - fork (20,0), branches to (20,15) and (35,0).
    RoadGraph y;
    y.add_node({0, 0});
    y.add_node({20, 0});
    y.add_node({20, 15});
    y.add_node({35, 0});
    y.add_edge(0, 1);
    y.add_edge(1, 2);
    y.add_edge(1, 3);
    const auto ypts = walk_points(y, 0, 30, 10);
    const std::vector<Point> expected{{0, 0}, {10, 0}, {20, 0}, {20, 10}, {30, 0}};
    REQUIRE(ypts.size() == expected.size());
    for (const Point& e : expected) {
        const bool found = std::any_of(ypts.begin(), ypts.end(),
                                       [&](Point p) { return distance(p, e) < 1e-9; });
        CHECK(found);
    }
    CHECK_THROWS_AS(walk_points(y, 0, 30, 0.0), DomainError);
}

TEST_CASE("geometric operations are translation equivariant") {
    std::mt19937_64 rng(59);
    const RoadGraph g = random_tree_45(rng, 100, 8);
    RoadGraph shifted;
    for (const Point& p : g.nodes()) shifted.add_node({p.x + 17, p.y - 6});
    for (int a = 0; a < g.node_count(); ++a)
        for (const auto& e : g.neighbors(a))
            if (a < e.to) shifted.add_edge(a, e.to);
    for (int i = 0; i < g.node_count(); ++i) {
        const auto d1 = shortest_path_from(g, i);
        const auto d2 = shortest_path_from(shifted, i);
        for (int j = 0; j < g.node_count(); ++j)
            CHECK(d1[j] == doctest::Approx(d2[j]).epsilon(1e-12));
    }
    CHECK(junctions(g) == junctions(shifted));
}
