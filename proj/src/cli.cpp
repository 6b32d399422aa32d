#include "topoeval/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "topoeval/io.hpp"
#include "topoeval/labelgen.hpp"
#include "topoeval/losses.hpp"
#include "topoeval/metrics.hpp"
#include "topoeval/version.hpp"

namespace fs = std::filesystem;

namespace topoeval::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void add_eval_options(CLI::App* cmd, EvalParams& p) {
    cmd->add_option("--threshold", p.threshold, "Binarization threshold")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--dilation", p.dilation_radius, "Ground-truth dilation radius (pixels)");
    cmd->add_option("--cell", p.cell_size, "Finest label cell size (pixels)");
    cmd->add_option("--min-interruption", p.min_interruption,
                    "Minimum interruption length (pixels)");
    cmd->add_option("--ccq-tol", p.ccq_tolerance, "CCQ pixel shift tolerance");
    cmd->add_option("--tlts-rel-tol", p.tlts_rel_tol, "TLTS relative length tolerance");
    cmd->add_option("--match-dist", p.match_dist, "Node matching distance (pixels)");
    cmd->add_option("--samples", p.n_samples, "Path samples for TLTS/APLS");
    cmd->add_option("--hm-radius", p.hm_radius, "Holes-and-marbles subgraph radius");
    cmd->add_option("--hm-samples", p.hm_samples, "Holes-and-marbles subgraph count");
    cmd->add_option("--hm-spacing", p.hm_spacing, "Holes-and-marbles control point spacing");
    cmd->add_option("--lambda-a", p.lambda_a, "Adversarial loss weight");
    cmd->add_option("--render-thickness", p.render_thickness,
                    "Line thickness when rendering a ground-truth graph");
    cmd->add_option("--seed", p.seed, "Seed for all randomized metrics");
    cmd->add_flag("--exhaustive", p.exhaustive,
                  "Enumerate all pairs/starts instead of sampling");
}

Report run_single_metrics(const fs::path& pred_path, const fs::path& gt_path,
                          bool gt_is_graph, const EvalParams& p) {
    const ProbabilityMap pred = read_probability_map(pred_path);
    if (gt_is_graph) {
        const RoadGraph gt = read_graph_file(gt_path);
        return evaluate_all(pred, nullptr, &gt, p, pred_path.string(), gt_path.string());
    }
    const BinaryMask gt = read_binary_mask(gt_path);
    return evaluate_all(pred, &gt, nullptr, p, pred_path.string(), gt_path.string());
}

int run_batch_metrics(const fs::path& pred_dir, const fs::path& gt_dir, const fs::path& out_dir,
                      const EvalParams& p, int jobs) {
    std::vector<std::pair<fs::path, fs::path>> pairs;  // (pred, gt), sorted by stem
    std::vector<fs::path> preds;
    for (const auto& e : fs::directory_iterator(pred_dir))
        if (e.is_regular_file() && e.path().extension() == ".pgm") preds.push_back(e.path());
    std::sort(preds.begin(), preds.end());
    for (const auto& pp : preds) {
        const fs::path mask = gt_dir / (pp.stem().string() + ".pgm");
        const fs::path graph = gt_dir / (pp.stem().string() + ".txt");
        if (fs::exists(mask))
            pairs.emplace_back(pp, mask);
        else if (fs::exists(graph))
            pairs.emplace_back(pp, graph);
        else
            throw IoError("no ground truth for '" + pp.string() + "' in " + gt_dir.string());
    }
    if (pairs.empty()) throw IoError("no .pgm predictions found in " + pred_dir.string());
    fs::create_directories(out_dir);

    std::vector<Report> reports(pairs.size());
    std::vector<std::string> errors(pairs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < pairs.size(); i = next.fetch_add(1)) {
            try {
                reports[i] = run_single_metrics(pairs[i].first, pairs[i].second,
                                                pairs[i].second.extension() == ".txt", p);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    jobs = std::max(1, jobs);
    std::vector<std::thread> threads;
    for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (!errors[i].empty()) throw IoError(pairs[i].first.string() + ": " + errors[i]);

    // Per-pair reports plus a pooled summary of per-pair means. Iteration is
    // in sorted-stem order, so results do not depend on the worker count.
    Report summary;
    std::map<std::string, double> sums;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        write_report(reports[i], out_dir / (pairs[i].first.stem().string() + ".json"));
        for (const auto& [k, v] : reports[i].metrics) sums[k] += v;
    }
    for (const auto& [k, v] : sums) summary.metrics[k] = v / double(pairs.size());
    summary.params = eval_params_json(p);
    summary.params["pair_count"] = pairs.size();
    summary.provenance["pred"] = pred_dir.string();
    summary.provenance["gt"] = gt_dir.string();
    summary.provenance["tool"] = "topoeval";
    summary.provenance["tool_version"] = kToolVersion;
    summary.provenance["format_version"] = kFormatVersion;
    write_report(summary, out_dir / "summary.json");
    return kExitOk;
}

void write_real_image_json(const RealImage& img, const fs::path& path) {
    nlohmann::json j;
    j["width"] = img.width;
    j["height"] = img.height;
    j["values"] = img.values;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
}

OutputPyramid to_output_pyramid(const std::vector<std::vector<std::vector<double>>>& raw) {
    OutputPyramid out;
    for (const auto& rows : raw) {
        RealMatrix m(static_cast<int>(rows.size()),
                     rows.empty() ? 0 : static_cast<int>(rows[0].size()));
        for (int r = 0; r < m.rows; ++r) {
            if (static_cast<int>(rows[r].size()) != m.cols)
                throw FormatError("pyramid document has ragged rows");
            for (int c = 0; c < m.cols; ++c) m.at(r, c) = rows[r][c];
        }
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Topology-aware road segmentation evaluation toolkit"};
    app.set_version_flag("--version", std::string("topoeval ") + kToolVersion +
                                          " (format version " +
                                          std::to_string(kFormatVersion) + ")");
    app.set_config("--config");
    app.require_subcommand(1);

    // metrics
    EvalParams eval_params;
    std::string m_pred, m_gt, m_gt_graph, m_out;
    int m_jobs = 1;
    CLI::App* metrics_cmd =
        app.add_subcommand("metrics", "Evaluate a prediction against ground truth");
    metrics_cmd->add_option("--pred", m_pred, "Prediction raster (PGM) or directory")
        ->required();
    metrics_cmd->add_option("--gt", m_gt, "Ground-truth mask (PGM) or directory");
    metrics_cmd->add_option("--gt-graph", m_gt_graph, "Ground-truth graph file");
    metrics_cmd->add_option("--out", m_out, "Report path (directory in batch mode)");
    metrics_cmd->add_option("--jobs", m_jobs, "Parallel workers in batch mode");
    add_eval_options(metrics_cmd, eval_params);

    // labels
    LabelConfig label_config;
    std::string l_pred, l_gt, l_out, l_t0_out;
    CLI::App* labels_cmd =
        app.add_subcommand("labels", "Generate the dynamic multi-scale label pyramid");
    labels_cmd->add_option("--pred", l_pred, "Prediction raster (PGM)")->required();
    labels_cmd->add_option("--gt", l_gt, "Ground-truth mask (PGM)")->required();
    labels_cmd->add_option("--out", l_out, "Pyramid document path")->required();
    labels_cmd->add_option("--t0-out", l_t0_out, "Also write the masked prediction T0");
    labels_cmd->add_option("--threshold", label_config.threshold, "Binarization threshold");
    labels_cmd->add_option("--dilation", label_config.dilation_radius, "Dilation radius");
    labels_cmd->add_option("--cell", label_config.cell_size, "Finest cell size");
    labels_cmd->add_option("--min-interruption", label_config.min_interruption,
                           "Minimum interruption length");

    // skeletonize
    std::string s_in, s_out;
    CLI::App* skel_cmd = app.add_subcommand("skeletonize", "Thin a binary mask");
    skel_cmd->add_option("--in", s_in, "Input mask (PGM)")->required();
    skel_cmd->add_option("--out", s_out, "Output skeleton (PGM)")->required();

    // mask2graph
    std::string g_in, g_out;
    CLI::App* m2g_cmd = app.add_subcommand("mask2graph", "Vectorize a mask into a road graph");
    m2g_cmd->add_option("--in", g_in, "Input mask (PGM)")->required();
    m2g_cmd->add_option("--out", g_out, "Output graph file")->required();

    // render
    std::string r_graph, r_out;
    int r_width = 0, r_height = 0, r_thickness = 1;
    double r_scale = 1.0;
    CLI::App* render_cmd = app.add_subcommand("render", "Rasterize a road graph");
    render_cmd->add_option("--graph", r_graph, "Input graph file")->required();
    render_cmd->add_option("--out", r_out, "Output raster (PGM)")->required();
    render_cmd->add_option("--width", r_width, "Canvas width before scaling")->required();
    render_cmd->add_option("--height", r_height, "Canvas height before scaling")->required();
    render_cmd->add_option("--thickness", r_thickness, "Line thickness in pixels");
    render_cmd->add_option("--scale", r_scale, "Coordinate and canvas scale factor");

    // loss
    std::string lo_pred, lo_gt, lo_labels, lo_d_pred, lo_d_real, lo_out, lo_grad_out;
    double lo_lambda = 0.005;
    bool lo_normalize = false;
    CLI::App* loss_cmd = app.add_subcommand("loss", "Evaluate the reference loss kernels");
    loss_cmd->add_option("--pred", lo_pred, "Prediction raster (PGM)")->required();
    loss_cmd->add_option("--gt", lo_gt, "Ground-truth mask (PGM)")->required();
    loss_cmd->add_option("--labels", lo_labels, "Label pyramid document");
    loss_cmd->add_option("--d-pred", lo_d_pred, "Discriminator outputs on the prediction");
    loss_cmd->add_option("--d-real", lo_d_real, "Discriminator outputs on the real branch");
    loss_cmd->add_option("--lambda-a", lo_lambda, "Adversarial loss weight");
    loss_cmd->add_flag("--normalize", lo_normalize, "Divide losses by element count");
    loss_cmd->add_option("--out", lo_out, "Loss report path")->required();
    loss_cmd->add_option("--grad-out", lo_grad_out, "Write d loss / d pred as JSON");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (metrics_cmd->parsed() && (m_gt.empty() == m_gt_graph.empty())) {
        std::cerr << (m_gt.empty() ? "error: one of --gt or --gt-graph is required\n"
                                   : "error: give either --gt or --gt-graph, not both\n");
        return kExitUsage;
    }

    try {
        if (metrics_cmd->parsed()) {
            if (!m_gt.empty() && fs::is_directory(m_pred)) {
                if (m_out.empty()) throw DomainError("batch mode requires --out directory");
                return run_batch_metrics(m_pred, m_gt, m_out, eval_params, m_jobs);
            }
            const bool gt_is_graph = m_gt.empty();
            const Report r = run_single_metrics(m_pred, gt_is_graph ? m_gt_graph : m_gt,
                                                gt_is_graph, eval_params);
            if (m_out.empty())
                std::cout << report_to_string(r);
            else
                write_report(r, m_out);
            return kExitOk;
        }
        if (labels_cmd->parsed()) {
            const ProbabilityMap pred = read_probability_map(l_pred);
            const BinaryMask gt = read_binary_mask(l_gt);
            if (pred.width != gt.width || pred.height != gt.height)
                throw ShapeError("prediction '" + l_pred + "' is " + std::to_string(pred.width) +
                                 "x" + std::to_string(pred.height) + " but ground truth '" +
                                 l_gt + "' is " + std::to_string(gt.width) + "x" +
                                 std::to_string(gt.height));
            write_label_pyramid(build_label_pyramid(gt, pred, label_config), l_out);
            if (!l_t0_out.empty())
                write_binary_mask(build_t0(pred, gt, label_config.threshold,
                                           label_config.dilation_radius),
                                  l_t0_out);
            return kExitOk;
        }
        if (skel_cmd->parsed()) {
            write_binary_mask(skeletonize(read_binary_mask(s_in)), s_out);
            return kExitOk;
        }
        if (m2g_cmd->parsed()) {
            write_graph_file(mask_to_graph(read_binary_mask(g_in)), g_out);
            return kExitOk;
        }
        if (render_cmd->parsed()) {
            RoadGraph g = read_graph_file(r_graph);
            RoadGraph scaled;
            for (const Point& p : g.nodes())
                scaled.add_node({p.x * r_scale, p.y * r_scale});
            for (int a = 0; a < g.node_count(); ++a)
                for (const auto& e : g.neighbors(a))
                    if (a < e.to) scaled.add_edge(a, e.to);
            const int w = std::max(1, static_cast<int>(std::lround(r_width * r_scale)));
            const int h = std::max(1, static_cast<int>(std::lround(r_height * r_scale)));
            write_binary_mask(render_graph(scaled, w, h, r_thickness), r_out);
            return kExitOk;
        }
        if (loss_cmd->parsed()) {
            const ProbabilityMap pred = read_probability_map(lo_pred);
            const BinaryMask gt = read_binary_mask(lo_gt);
            Report r;
            const BceResult bce = bce_loss(pred, gt, /*with_grad=*/true, lo_normalize);
            r.metrics["bce"] = bce.loss;
            RealImage grad = bce.grad;
            if (!lo_d_pred.empty()) {
                const OutputPyramid d_pred = to_output_pyramid(read_real_pyramid(lo_d_pred));
                const GeneratorLossResult gen =
                    generator_loss(pred, gt, d_pred, lo_lambda, lo_normalize);
                r.metrics["generator_loss"] = gen.loss;
                r.metrics["generator_adversarial_term"] = gen.adversarial_term;
                grad = gen.grad_pred;
                if (!lo_labels.empty() && !lo_d_real.empty()) {
                    const LabelPyramid labels = read_label_pyramid(lo_labels);
                    const OutputPyramid d_real =
                        to_output_pyramid(read_real_pyramid(lo_d_real));
                    r.metrics["discriminator_loss"] =
                        discriminator_loss(d_pred, labels, d_real, lo_normalize).loss;
                }
            }
            r.params["lambda_a"] = lo_lambda;
            r.params["normalize"] = lo_normalize;
            r.params["log_epsilon"] = kLogEps;
            r.provenance["pred"] = lo_pred;
            r.provenance["gt"] = lo_gt;
            r.provenance["tool"] = "topoeval";
            r.provenance["tool_version"] = kToolVersion;
            r.provenance["format_version"] = kFormatVersion;
            write_report(r, lo_out);
            if (!lo_grad_out.empty()) write_real_image_json(grad, lo_grad_out);
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace topoeval::cli
