#pragma once

#include <cstdint>
#include <string>

#include "topoeval/graph.hpp"
#include "topoeval/io.hpp"
#include "topoeval/raster.hpp"

namespace topoeval {

struct CcqResult {
    double correctness = 0.0;
    double completeness = 0.0;
    double quality = 0.0;
};

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

PrecisionRecall make_precision_recall(double precision, double recall);

// Buffered pixel matching over skeletons: correctness = buffered precision,
// completeness = buffered recall, quality = TP / (pred + gt - TP_gt).
// Both masks are skeletonized internally.
CcqResult ccq(const BinaryMask& pred, const BinaryMask& gt, double tol = 2.0);

struct SampleParams {
    int n_samples = 500;
    std::uint64_t seed = 0;
    bool exhaustive = false;  // enumerate all connected pairs instead of sampling
};

// Fraction of sampled ground-truth shortest paths whose predicted counterpart
// exists and has length within rel_tol of the ground-truth length.
double tlts(const RoadGraph& pred, const RoadGraph& gt, const SampleParams& sp = {},
            double rel_tol = 0.05, double match_dist = 25.0);

// 1 - mean clamped relative path-length error, both directions, harmonic mean.
double apls(const RoadGraph& pred, const RoadGraph& gt, const SampleParams& sp = {},
            double match_dist = 25.0);

// Junction (degree >= 3) matching: greedy closest-pair correspondence, then
// per-junction incident-edge capture by smallest angular difference.
PrecisionRecall junct(const RoadGraph& pred, const RoadGraph& gt, double match_dist = 25.0,
                      double angle_tol_deg = 45.0);

struct HmParams {
    double radius = 300.0;
    int n_subgraphs = 1000;
    double match_dist = 25.0;
    double spacing = 10.0;
    std::uint64_t seed = 0;
    bool exhaustive = false;  // start a subgraph at every ground-truth node
};

// Control points dropped every `spacing` pixels within a geodesic radius on
// ground truth (holes) and prediction (marbles), matched within match_dist
// and pooled over all sampled subgraphs.
PrecisionRecall holes_and_marbles(const RoadGraph& pred, const RoadGraph& gt,
                                  const HmParams& hp = {});

// Every knob of the pipeline, paper defaults baked in.
struct EvalParams {
    double threshold = 0.5;
    int dilation_radius = 3;
    int cell_size = 32;
    int min_interruption = 4;
    double ccq_tolerance = 2.0;
    double tlts_rel_tol = 0.05;
    double match_dist = 25.0;
    int n_samples = 500;
    double hm_radius = 300.0;
    int hm_samples = 1000;
    double hm_spacing = 10.0;
    double lambda_a = 0.005;
    int render_thickness = 1;
    std::uint64_t seed = 0;
    bool exhaustive = false;
};

nlohmann::json eval_params_json(const EvalParams& p, int pyramid_side = 256);

// Runs CCQ on rasters and the four graph metrics on vectorized graphs.
// Exactly one of gt_mask / gt_graph must be non-null; the missing
// representation is derived (mask_to_graph, render_graph respectively).
Report evaluate_all(const ProbabilityMap& pred, const BinaryMask* gt_mask,
                    const RoadGraph* gt_graph, const EvalParams& p,
                    const std::string& pred_path = "", const std::string& gt_path = "");

}  // namespace topoeval
