#include "topoeval/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace topoeval {

namespace {

double clamp_prob(double p) { return std::clamp(p, kLogEps, 1.0 - kLogEps); }
bool clamped(double p) { return p <= kLogEps || p >= 1.0 - kLogEps; }

// Summed BCE of one probability matrix against one binary target matrix.
// Row-major accumulation keeps losses bit-reproducible.
double bce_cell_sum(const RealMatrix& p, const LabelMatrix& d, RealMatrix* grad) {
    double loss = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double y = d.labels[i];
        const double q = clamp_prob(p.values[i]);
        loss -= (1.0 - y) * std::log(1.0 - q) + y * std::log(q);
        if (grad) grad->values[i] = clamped(p.values[i]) ? 0.0 : (q - y) / (q * (1.0 - q));
    }
    return loss;
}

void check_pyramid_shapes(const OutputPyramid& p, const LabelPyramid& labels,
                          const char* what) {
    if (p.size() != labels.levels.size())
        throw ShapeError(std::string(what) + ": " + std::to_string(p.size()) +
                         " levels vs " + std::to_string(labels.levels.size()) + " label levels");
    for (std::size_t k = 0; k < p.size(); ++k) {
        const auto& m = labels.levels[k].matrix;
        if (p[k].rows != m.rows || p[k].cols != m.cols)
            throw ShapeError(std::string(what) + ": level " + std::to_string(k) + " is " +
                             std::to_string(p[k].rows) + "x" + std::to_string(p[k].cols) +
                             " vs labels " + std::to_string(m.rows) + "x" +
                             std::to_string(m.cols));
    }
}

std::size_t pyramid_cells(const OutputPyramid& p) {
    std::size_t n = 0;
    for (const auto& m : p) n += m.values.size();
    return n;
}

}  // namespace

OutputPyramid pyramid_like(const LabelPyramid& labels, double fill) {
    OutputPyramid out;
    for (const auto& lvl : labels.levels)
        out.emplace_back(lvl.matrix.rows, lvl.matrix.cols, fill);
    return out;
}

BceResult bce_loss(const ProbabilityMap& pred, const BinaryMask& gt, bool with_grad,
                   bool normalize) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw ShapeError("bce_loss: prediction " + std::to_string(pred.width) + "x" +
                         std::to_string(pred.height) + " vs target " + std::to_string(gt.width) +
                         "x" + std::to_string(gt.height));
    BceResult res;
    if (with_grad) res.grad = RealImage(pred.width, pred.height);
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
        const double y = gt.bits[i];
        const double q = clamp_prob(pred.values[i]);
        loss -= (1.0 - y) * std::log(1.0 - q) + y * std::log(q);
        if (with_grad)
            res.grad.values[i] =
                clamped(pred.values[i]) ? 0.0 : (q - y) / (q * (1.0 - q));
    }
    const double scale = normalize && !pred.values.empty() ? 1.0 / double(pred.values.size()) : 1.0;
    res.loss = loss * scale;
    if (with_grad && scale != 1.0)
        for (double& g : res.grad.values) g *= scale;
    return res;
}

DiscriminatorLossResult discriminator_loss(const OutputPyramid& d_on_pred,
                                           const LabelPyramid& labels,
                                           const OutputPyramid& d_on_real, bool normalize) {
    check_pyramid_shapes(d_on_pred, labels, "discriminator_loss: d_on_pred");
    check_pyramid_shapes(d_on_real, labels, "discriminator_loss: d_on_real");
    DiscriminatorLossResult res;
    double loss = 0.0;
    for (std::size_t k = 0; k < d_on_pred.size(); ++k) {
        RealMatrix gp(d_on_pred[k].rows, d_on_pred[k].cols);
        loss += bce_cell_sum(d_on_pred[k], labels.levels[k].matrix, &gp);
        res.grad_on_pred.push_back(std::move(gp));

        RealMatrix gr(d_on_real[k].rows, d_on_real[k].cols);
        for (std::size_t i = 0; i < d_on_real[k].values.size(); ++i) {
            const double q = clamp_prob(d_on_real[k].values[i]);
            loss -= std::log(q);
            gr.values[i] = clamped(d_on_real[k].values[i]) ? 0.0 : -1.0 / q;
        }
        res.grad_on_real.push_back(std::move(gr));
    }
    const std::size_t cells = pyramid_cells(d_on_pred) + pyramid_cells(d_on_real);
    const double scale = normalize && cells > 0 ? 1.0 / double(cells) : 1.0;
    res.loss = loss * scale;
    if (scale != 1.0) {
        for (auto& m : res.grad_on_pred)
            for (double& g : m.values) g *= scale;
        for (auto& m : res.grad_on_real)
            for (double& g : m.values) g *= scale;
    }
    return res;
}

GeneratorLossResult generator_loss(const ProbabilityMap& pred, const BinaryMask& gt,
                                   const OutputPyramid& d_on_pred, double lambda_a,
                                   bool normalize) {
    if (lambda_a < 0) throw DomainError("generator_loss: lambda_a must be >= 0");
    GeneratorLossResult res;
    BceResult bce = bce_loss(pred, gt, /*with_grad=*/true, normalize);
    res.bce_term = bce.loss;
    res.grad_pred = std::move(bce.grad);

    double adv = 0.0;
    std::size_t cells = 0;
    for (const auto& level : d_on_pred) {
        RealMatrix g(level.rows, level.cols);
        for (std::size_t i = 0; i < level.values.size(); ++i) {
            const double q = clamp_prob(level.values[i]);
            adv -= std::log(q);
            g.values[i] = clamped(level.values[i]) ? 0.0 : -lambda_a / q;
        }
        cells += level.values.size();
        res.grad_d_on_pred.push_back(std::move(g));
    }
    const double scale = normalize && cells > 0 ? 1.0 / double(cells) : 1.0;
    res.adversarial_term = lambda_a * adv * scale;
    if (scale != 1.0)
        for (auto& m : res.grad_d_on_pred)
            for (double& g : m.values) g *= scale;
    res.loss = res.bce_term + res.adversarial_term;
    return res;
}

VanillaGanResult vanilla_gan_reduction(double d_scalar_on_pred, double d_scalar_on_real) {
    VanillaGanResult res;
    const double qp = clamp_prob(d_scalar_on_pred);
    const double qr = clamp_prob(d_scalar_on_real);
    res.loss = -std::log(1.0 - qp) - std::log(qr);
    res.grad_on_pred = clamped(d_scalar_on_pred) ? 0.0 : 1.0 / (1.0 - qp);
    res.grad_on_real = clamped(d_scalar_on_real) ? 0.0 : -1.0 / qr;
    return res;
}

}  // namespace topoeval
