#include "topoeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <unordered_map>

#include "topoeval/version.hpp"

namespace topoeval {

PrecisionRecall make_precision_recall(double precision, double recall) {
    PrecisionRecall pr;
    pr.precision = precision;
    pr.recall = recall;
    pr.f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    return pr;
}

CcqResult ccq(const BinaryMask& pred, const BinaryMask& gt, double tol) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw ShapeError("ccq: prediction " + std::to_string(pred.width) + "x" +
                         std::to_string(pred.height) + " vs ground truth " +
                         std::to_string(gt.width) + "x" + std::to_string(gt.height));
    if (tol < 0) throw DomainError("ccq: tolerance must be >= 0");
    const BinaryMask ps = skeletonize(pred);
    const BinaryMask gs = skeletonize(gt);

    // Integer offsets within Euclidean distance tol; matching a pixel against
    // the dilated other skeleton is exact buffered matching on the grid.
    std::vector<std::pair<int, int>> disk;
    const int r = static_cast<int>(std::floor(tol));
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            if (dx * dx + dy * dy <= tol * tol) disk.emplace_back(dx, dy);

    auto matched_count = [&disk](const BinaryMask& a, const BinaryMask& b) {
        long long n = 0;
        for (int y = 0; y < a.height; ++y)
            for (int x = 0; x < a.width; ++x) {
                if (!a.at(x, y)) continue;
                for (const auto& [dx, dy] : disk) {
                    if (b.get(x + dx, y + dy)) {
                        ++n;
                        break;
                    }
                }
            }
        return n;
    };

    const long long n_pred = static_cast<long long>(ps.count());
    const long long n_gt = static_cast<long long>(gs.count());
    CcqResult res;
    if (n_pred == 0 && n_gt == 0) {
        res.correctness = res.completeness = res.quality = 1.0;
        return res;
    }
    const long long tp_pred = matched_count(ps, gs);
    const long long tp_gt = matched_count(gs, ps);
    res.correctness = n_pred > 0 ? double(tp_pred) / double(n_pred) : 1.0;
    res.completeness = n_gt > 0 ? double(tp_gt) / double(n_gt) : 1.0;
    res.quality = double(tp_pred) / double(n_pred + n_gt - tp_gt);
    return res;
}

namespace {

std::vector<int> components(const RoadGraph& g) {
    std::vector<int> comp(g.node_count(), -1);
    int next = 0;
    std::vector<int> stack;
    for (int i = 0; i < g.node_count(); ++i) {
        if (comp[i] >= 0) continue;
        comp[i] = next;
        stack.assign(1, i);
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (const auto& e : g.neighbors(u)) {
                if (comp[e.to] < 0) {
                    comp[e.to] = next;
                    stack.push_back(e.to);
                }
            }
        }
        ++next;
    }
    return comp;
}

std::vector<std::pair<int, int>> all_connected_pairs(const RoadGraph& g) {
    const std::vector<int> comp = components(g);
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < g.node_count(); ++a)
        for (int b = a + 1; b < g.node_count(); ++b)
            if (comp[a] == comp[b]) pairs.emplace_back(a, b);
    return pairs;
}

std::vector<std::pair<int, int>> sample_connected_pairs(const RoadGraph& g, int n,
                                                        std::mt19937_64& rng) {
    const std::vector<int> comp = components(g);
    std::vector<std::vector<int>> members;
    for (int i = 0; i < g.node_count(); ++i) {
        if (comp[i] >= static_cast<int>(members.size())) members.resize(comp[i] + 1);
        members[comp[i]].push_back(i);
    }
    std::vector<unsigned long long> weights;  // pairs per component
    unsigned long long total = 0;
    for (const auto& m : members) {
        const unsigned long long w =
            static_cast<unsigned long long>(m.size()) * (m.size() - 1) / 2;
        weights.push_back(w);
        total += w;
    }
    if (total == 0) throw DomainError("graph has no connected node pair");
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(n);
    std::uniform_int_distribution<unsigned long long> pick(0, total - 1);
    for (int s = 0; s < n; ++s) {
        unsigned long long r = pick(rng);
        std::size_t c = 0;
        while (r >= weights[c]) r -= weights[c++];
        const auto& m = members[c];
        std::uniform_int_distribution<std::size_t> di(0, m.size() - 1);
        std::uniform_int_distribution<std::size_t> dj(0, m.size() - 2);
        const std::size_t i = di(rng);
        std::size_t j = dj(rng);
        if (j >= i) ++j;
        pairs.emplace_back(m[i], m[j]);
    }
    return pairs;
}

struct PathSampleEval {
    bool matched = false;   // both endpoints snapped and connected in pred
    double ref_len = 0.0;   // L(a,b)
    double pred_len = 0.0;  // L(a^,b^), valid when matched
};

// Evaluates every sample with one Dijkstra per distinct source, grouping
// pairs by source so only one distance vector is alive at a time.
std::vector<PathSampleEval> eval_path_samples(const RoadGraph& ref, const RoadGraph& other,
                                              const std::vector<std::pair<int, int>>& pairs,
                                              double match_dist) {
    std::vector<PathSampleEval> evals(pairs.size());

    std::unordered_map<int, std::optional<int>> snaps;  // ref node -> other node
    auto snap = [&](int ref_node) -> std::optional<int> {
        auto it = snaps.find(ref_node);
        if (it == snaps.end())
            it = snaps.emplace(ref_node, snap_node(other, ref.node(ref_node), match_dist)).first;
        return it->second;
    };

    std::unordered_map<int, std::vector<std::size_t>> by_ref_src;
    std::unordered_map<int, std::vector<std::size_t>> by_other_src;
    std::vector<std::pair<int, int>> snapped(pairs.size(), {-1, -1});
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        by_ref_src[pairs[i].first].push_back(i);
        const auto a = snap(pairs[i].first);
        const auto b = snap(pairs[i].second);
        if (a && b) {
            snapped[i] = {*a, *b};
            by_other_src[*a].push_back(i);
        }
    }

    // Dijkstra that stops once every requested target is settled; settled
    // distances are exactly those of the full run.
    const auto distances_to = [](const RoadGraph& g, int src, const std::vector<int>& targets) {
        std::unordered_map<int, double> out;
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<char> wanted(g.node_count(), 0);
        int remaining = 0;
        for (const int t : targets)
            if (!wanted[t]) {
                wanted[t] = 1;
                ++remaining;
            }
        std::vector<double> dist(g.node_count(), inf);
        using Entry = std::pair<double, int>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
        dist[src] = 0.0;
        heap.emplace(0.0, src);
        while (!heap.empty() && remaining > 0) {
            const auto [d, u] = heap.top();
            heap.pop();
            if (d > dist[u]) continue;
            if (wanted[u]) {
                wanted[u] = 0;
                --remaining;
            }
            for (const auto& e : g.neighbors(u)) {
                const double nd = d + e.length;
                if (nd < dist[e.to]) {
                    dist[e.to] = nd;
                    heap.emplace(nd, e.to);
                }
            }
        }
        for (const int t : targets) out[t] = dist[t];
        return out;
    };

    for (const auto& [src, idxs] : by_ref_src) {
        std::vector<int> targets;
        for (const std::size_t i : idxs) targets.push_back(pairs[i].second);
        const auto dist = distances_to(ref, src, targets);
        for (const std::size_t i : idxs) evals[i].ref_len = dist.at(pairs[i].second);
    }
    for (const auto& [src, idxs] : by_other_src) {
        std::vector<int> targets;
        for (const std::size_t i : idxs) targets.push_back(snapped[i].second);
        const auto dist = distances_to(other, src, targets);
        for (const std::size_t i : idxs) {
            const double d = dist.at(snapped[i].second);
            if (std::isfinite(d)) {
                evals[i].matched = true;
                evals[i].pred_len = d;
            }
        }
    }
    return evals;
}

}  // namespace

double tlts(const RoadGraph& pred, const RoadGraph& gt, const SampleParams& sp, double rel_tol,
            double match_dist) {
    std::mt19937_64 rng(sp.seed);
    const auto pairs = sp.exhaustive ? all_connected_pairs(gt)
                                     : sample_connected_pairs(gt, sp.n_samples, rng);
    if (pairs.empty()) throw DomainError("tlts: ground truth has no connected node pair");
    long long correct = 0;
    for (const PathSampleEval& ev : eval_path_samples(gt, pred, pairs, match_dist))
        if (ev.matched && std::abs(ev.pred_len - ev.ref_len) <= rel_tol * ev.ref_len) ++correct;
    return double(correct) / double(pairs.size());
}

namespace {

// One directional APLS score with `ref` as the reference graph.
double apls_directional(const RoadGraph& ref, const RoadGraph& other,
                        const std::vector<std::pair<int, int>>& pairs, double match_dist) {
    if (pairs.empty()) return 1.0;  // vacuous direction
    double sum = 0.0;
    for (const PathSampleEval& ev : eval_path_samples(ref, other, pairs, match_dist)) {
        if (!ev.matched) {
            sum += 1.0;
        } else if (ev.ref_len <= 0.0) {
            sum += ev.pred_len > 0.0 ? 1.0 : 0.0;
        } else {
            sum += std::min(1.0, std::abs(ev.ref_len - ev.pred_len) / ev.ref_len);
        }
    }
    return 1.0 - sum / double(pairs.size());
}

}  // namespace

double apls(const RoadGraph& pred, const RoadGraph& gt, const SampleParams& sp,
            double match_dist) {
    std::mt19937_64 fwd_rng(sp.seed);
    const auto gt_pairs = sp.exhaustive ? all_connected_pairs(gt)
                                        : sample_connected_pairs(gt, sp.n_samples, fwd_rng);
    if (gt_pairs.empty()) throw DomainError("apls: ground truth has no connected node pair");
    std::vector<std::pair<int, int>> pred_pairs;
    if (sp.exhaustive) {
        pred_pairs = all_connected_pairs(pred);
    } else {
        std::mt19937_64 rev_rng(sp.seed ^ 0x517cc1b727220a95ULL);
        try {
            pred_pairs = sample_connected_pairs(pred, sp.n_samples, rev_rng);
        } catch (const DomainError&) {
            // Prediction has no connected pair; the reverse direction is
            // vacuous and the forward direction decides the score.
        }
    }
    const double s_fwd = apls_directional(gt, pred, gt_pairs, match_dist);
    const double s_rev = apls_directional(pred, gt, pred_pairs, match_dist);
    if (s_fwd <= 0.0 || s_rev <= 0.0) return 0.0;
    return 2.0 * s_fwd * s_rev / (s_fwd + s_rev);
}

namespace {

double angular_difference(double a, double b) {
    double d = std::abs(a - b);
    while (d > std::numbers::pi) d = std::abs(d - 2.0 * std::numbers::pi);
    return d;
}

std::vector<double> incident_angles(const RoadGraph& g, int v) {
    std::vector<double> out;
    const Point pv = g.node(v);
    for (const auto& e : g.neighbors(v)) {
        const Point pn = g.node(e.to);
        out.push_back(std::atan2(pn.y - pv.y, pn.x - pv.x));
    }
    return out;
}

// One-to-one greedy matching of edge directions within the angular tolerance.
int captured_edges(const std::vector<double>& ref, const std::vector<double>& cand,
                   double tol_rad) {
    struct Pair {
        double diff;
        int i, j;
    };
    std::vector<Pair> pairs;
    for (int i = 0; i < static_cast<int>(ref.size()); ++i)
        for (int j = 0; j < static_cast<int>(cand.size()); ++j) {
            const double d = angular_difference(ref[i], cand[j]);
            if (d <= tol_rad) pairs.push_back({d, i, j});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.diff != b.diff) return a.diff < b.diff;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    std::vector<char> used_i(ref.size(), 0), used_j(cand.size(), 0);
    int n = 0;
    for (const Pair& p : pairs) {
        if (used_i[p.i] || used_j[p.j]) continue;
        used_i[p.i] = used_j[p.j] = 1;
        ++n;
    }
    return n;
}

}  // namespace

PrecisionRecall junct(const RoadGraph& pred, const RoadGraph& gt, double match_dist,
                      double angle_tol_deg) {
    const std::vector<int> gt_j = junctions(gt);
    const std::vector<int> pred_j = junctions(pred);
    const double tol_rad = angle_tol_deg * std::numbers::pi / 180.0;

    // Greedy closest-pair correspondence within match_dist.
    struct Pair {
        double dist;
        int gi, pi;  // indices into gt_j / pred_j
    };
    // Candidate pairs via a uniform grid of cell size match_dist, so only
    // junctions in the 3x3 neighborhood of a cell are distance-tested.
    const double cell = std::max(match_dist, 1e-9);
    std::unordered_map<long long, std::vector<int>> grid;
    auto cell_index = [cell](double v) {
        return static_cast<long long>(std::floor(v / cell));
    };
    auto key = [](long long ix, long long iy) { return (ix << 32) ^ (iy & 0xffffffffLL); };
    for (int pi = 0; pi < static_cast<int>(pred_j.size()); ++pi) {
        const Point p = pred.node(pred_j[pi]);
        grid[key(cell_index(p.x), cell_index(p.y))].push_back(pi);
    }
    std::vector<Pair> pairs;
    for (int gi = 0; gi < static_cast<int>(gt_j.size()); ++gi) {
        const Point pv = gt.node(gt_j[gi]);
        const long long ix = cell_index(pv.x), iy = cell_index(pv.y);
        for (long long oy = -1; oy <= 1; ++oy)
            for (long long ox = -1; ox <= 1; ++ox) {
                const auto it = grid.find(key(ix + ox, iy + oy));
                if (it == grid.end()) continue;
                for (const int pi : it->second) {
                    const double d = distance(pv, pred.node(pred_j[pi]));
                    if (d <= match_dist) pairs.push_back({d, gi, pi});
                }
            }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.gi != b.gi) return a.gi < b.gi;
        return a.pi < b.pi;
    });
    std::vector<int> gt_match(gt_j.size(), -1), pred_match(pred_j.size(), -1);
    for (const Pair& p : pairs) {
        if (gt_match[p.gi] >= 0 || pred_match[p.pi] >= 0) continue;
        gt_match[p.gi] = p.pi;
        pred_match[p.pi] = p.gi;
    }

    double recall_sum = 0.0, precision_sum = 0.0;
    for (std::size_t gi = 0; gi < gt_j.size(); ++gi) {
        if (gt_match[gi] < 0) continue;
        const int v = gt_j[gi], u = pred_j[gt_match[gi]];
        const auto ref = incident_angles(gt, v);
        const auto cand = incident_angles(pred, u);
        const int captured = captured_edges(ref, cand, tol_rad);
        recall_sum += double(captured) / double(ref.size());
        // 1 - f_error for the matched prediction junction.
        precision_sum += double(captured) / double(cand.size());
    }
    const double recall = gt_j.empty() ? 1.0 : recall_sum / double(gt_j.size());
    const double precision = pred_j.empty() ? 1.0 : precision_sum / double(pred_j.size());
    return make_precision_recall(precision, recall);
}

PrecisionRecall holes_and_marbles(const RoadGraph& pred, const RoadGraph& gt,
                                  const HmParams& hp) {
    if (gt.empty()) throw DomainError("holes_and_marbles: empty ground truth graph");
    std::vector<int> starts;
    if (hp.exhaustive) {
        starts.resize(gt.node_count());
        for (int i = 0; i < gt.node_count(); ++i) starts[i] = i;
    } else {
        std::mt19937_64 rng(hp.seed);
        std::uniform_int_distribution<int> pick(0, gt.node_count() - 1);
        starts.reserve(hp.n_subgraphs);
        for (int s = 0; s < hp.n_subgraphs; ++s) starts.push_back(pick(rng));
    }

    long long total_holes = 0, matched_holes = 0, total_marbles = 0, matched_marbles = 0;
    for (const int start : starts) {
        const std::vector<Point> holes = walk_points(gt, start, hp.radius, hp.spacing);
        total_holes += static_cast<long long>(holes.size());
        const auto snapped = snap_node(pred, gt.node(start), hp.match_dist);
        if (!snapped) continue;
        const std::vector<Point> marbles = walk_points(pred, *snapped, hp.radius, hp.spacing);
        total_marbles += static_cast<long long>(marbles.size());
        for (const Point& h : holes) {
            for (const Point& m : marbles) {
                if (distance(h, m) <= hp.match_dist) {
                    ++matched_holes;
                    break;
                }
            }
        }
        for (const Point& m : marbles) {
            for (const Point& h : holes) {
                if (distance(m, h) <= hp.match_dist) {
                    ++matched_marbles;
                    break;
                }
            }
        }
    }
    const double recall = total_holes > 0 ? double(matched_holes) / double(total_holes) : 1.0;
    const double precision =
        total_marbles > 0 ? double(matched_marbles) / double(total_marbles) : 1.0;
    return make_precision_recall(precision, recall);
}

nlohmann::json eval_params_json(const EvalParams& p, int pyramid_side) {
    nlohmann::json j;
    j["threshold"] = p.threshold;
    j["dilation_radius"] = p.dilation_radius;
    j["cell_size"] = p.cell_size;
    j["min_interruption"] = p.min_interruption;
    j["ccq_tolerance"] = p.ccq_tolerance;
    j["tlts_rel_tol"] = p.tlts_rel_tol;
    j["match_dist"] = p.match_dist;
    j["n_samples"] = p.n_samples;
    j["hm_radius"] = p.hm_radius;
    j["hm_samples"] = p.hm_samples;
    j["hm_spacing"] = p.hm_spacing;
    j["lambda_a"] = p.lambda_a;
    j["render_thickness"] = p.render_thickness;
    j["seed"] = p.seed;
    j["exhaustive"] = p.exhaustive;
    std::vector<int> sizes;
    try {
        sizes = pyramid_patch_sizes(pyramid_side, p.cell_size);
    } catch (const ShapeError&) {
        sizes = pyramid_patch_sizes(256, p.cell_size);
    }
    j["patch_sizes"] = sizes;
    return j;
}

Report evaluate_all(const ProbabilityMap& pred, const BinaryMask* gt_mask,
                    const RoadGraph* gt_graph, const EvalParams& p,
                    const std::string& pred_path, const std::string& gt_path) {
    if ((gt_mask == nullptr) == (gt_graph == nullptr))
        throw DomainError("evaluate_all: exactly one ground-truth representation required");
    const BinaryMask pred_mask = threshold_forward(pred, p.threshold);
    BinaryMask gt_m;
    RoadGraph gt_g;
    if (gt_mask) {
        if (gt_mask->width != pred.width || gt_mask->height != pred.height)
            throw ShapeError("evaluate_all: prediction '" + pred_path + "' is " +
                             std::to_string(pred.width) + "x" + std::to_string(pred.height) +
                             " but ground truth '" + gt_path + "' is " +
                             std::to_string(gt_mask->width) + "x" +
                             std::to_string(gt_mask->height));
        gt_m = *gt_mask;
        gt_g = mask_to_graph(gt_m);
    } else {
        gt_g = *gt_graph;
        gt_m = render_graph(gt_g, pred.width, pred.height, p.render_thickness);
    }
    const RoadGraph pred_g = mask_to_graph(pred_mask);

    Report r;
    const CcqResult c = ccq(pred_mask, gt_m, p.ccq_tolerance);
    r.metrics["ccq_correctness"] = c.correctness;
    r.metrics["ccq_completeness"] = c.completeness;
    r.metrics["ccq_quality"] = c.quality;
    const SampleParams sp{p.n_samples, p.seed, p.exhaustive};
    r.metrics["tlts"] = tlts(pred_g, gt_g, sp, p.tlts_rel_tol, p.match_dist);
    r.metrics["apls"] = apls(pred_g, gt_g, sp, p.match_dist);
    const PrecisionRecall jr = junct(pred_g, gt_g, p.match_dist);
    r.metrics["junct_precision"] = jr.precision;
    r.metrics["junct_recall"] = jr.recall;
    r.metrics["junct_f1"] = jr.f1;
    const HmParams hp{p.hm_radius, p.hm_samples, p.match_dist, p.hm_spacing, p.seed,
                      p.exhaustive};
    const PrecisionRecall hm = holes_and_marbles(pred_g, gt_g, hp);
    r.metrics["hm_precision"] = hm.precision;
    r.metrics["hm_recall"] = hm.recall;
    r.metrics["hm_f1"] = hm.f1;

    r.params = eval_params_json(p, pred.width == pred.height ? pred.width : 256);
    r.provenance["pred"] = pred_path;
    r.provenance["gt"] = gt_path;
    r.provenance["tool"] = "topoeval";
    r.provenance["tool_version"] = kToolVersion;
    r.provenance["format_version"] = kFormatVersion;
    return r;
}

}  // namespace topoeval
