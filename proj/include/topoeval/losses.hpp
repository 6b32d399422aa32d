#pragma once

#include <vector>

#include "topoeval/labelgen.hpp"
#include "topoeval/raster.hpp"

namespace topoeval {

// Clamp applied to every probability entering a logarithm. Gradients are
// zeroed where the clamp is active; a training stack must mirror this.
inline constexpr double kLogEps = 1e-7;

// Real-valued matrix, shape-matched to a LabelMatrix level.
struct RealMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    RealMatrix() = default;
    RealMatrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c),
          values(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }

    bool operator==(const RealMatrix&) const = default;
};

// Discriminator-output surrogate: one probability matrix per pyramid level,
// coarse to fine, shapes matching the paired LabelPyramid.
using OutputPyramid = std::vector<RealMatrix>;

OutputPyramid pyramid_like(const LabelPyramid& labels, double fill);

struct BceResult {
    double loss = 0.0;
    RealImage grad;  // d loss / d pred, empty unless requested
};

// Pixel-wise binary cross-entropy, summed (not averaged). Set normalize to
// divide by the element count.
BceResult bce_loss(const ProbabilityMap& pred, const BinaryMask& gt, bool with_grad = false,
                   bool normalize = false);

struct DiscriminatorLossResult {
    double loss = 0.0;
    OutputPyramid grad_on_pred;
    OutputPyramid grad_on_real;
};

// BCE of the prediction-branch outputs against the dynamic labels, plus
// -log of every real-branch output (real labels are uniformly 1).
DiscriminatorLossResult discriminator_loss(const OutputPyramid& d_on_pred,
                                           const LabelPyramid& labels,
                                           const OutputPyramid& d_on_real,
                                           bool normalize = false);

struct GeneratorLossResult {
    double loss = 0.0;
    double bce_term = 0.0;
    double adversarial_term = 0.0;
    RealImage grad_pred;
    OutputPyramid grad_d_on_pred;
};

// Pixel BCE plus lambda_a times -log of every discriminator output on the
// prediction branch. The gradient path from those outputs back to the
// prediction runs through the external discriminator network; the
// straight-through stage of that path is the identity (ste_backward).
GeneratorLossResult generator_loss(const ProbabilityMap& pred, const BinaryMask& gt,
                                   const OutputPyramid& d_on_pred, double lambda_a = 0.005,
                                   bool normalize = false);

struct VanillaGanResult {
    double loss = 0.0;
    double grad_on_pred = 0.0;
    double grad_on_real = 0.0;
};

// Single-level reduction with a predefined zero label:
// -log(1 - d_on_pred) - log(d_on_real).
VanillaGanResult vanilla_gan_reduction(double d_scalar_on_pred, double d_scalar_on_real);

}  // namespace topoeval
