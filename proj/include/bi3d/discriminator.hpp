#pragma once
// Domain discriminator H: scene vector -> probability that the frame comes
// from the target domain (source = 0, target = 1).
//
// A small fully connected network with leaky-ReLU hidden layers and a single
// sigmoid output, trained with plain mini-batch gradient descent on the mean
// binary cross-entropy plus an L2 penalty on the weights.

#include "bi3d/core.hpp"
#include "bi3d/scoring.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace bi3d {

struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights; // outputs x inputs, row-major
    std::vector<double> biases;  // outputs

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct TrainConfig {
    double learning_rate = 1e-2;
    std::size_t epochs = 300;
    std::size_t batch_size = 32;
    double l2 = 1e-4;
    std::uint64_t seed = 0;

    void validate() const;
};

class DiscriminatorModel {
public:
    static constexpr double kOutputEpsilon = 1e-7;

    DiscriminatorModel() = default;

    // Glorot-uniform initialisation, zero biases. `layer_dims` = [C, h1, ..., 1].
    DiscriminatorModel(std::vector<std::size_t> layer_dims, double leak, std::uint64_t seed);

    // Every weight and bias zero: outputs 0.5 for any input.
    static DiscriminatorModel zeros(std::vector<std::size_t> layer_dims, double leak = 0.01);

    // Assembles a model from explicit layers (checkpoint loading, tests).
    static DiscriminatorModel from_layers(std::vector<DenseLayer> layers, double leak, std::uint64_t seed);

    std::size_t input_dim() const;
    std::vector<std::size_t> layer_dims() const;
    double leak() const noexcept { return leak_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }

    // Pre-sigmoid output. Throws DataError on dimension mismatch.
    double logit(std::span<const double> x) const;

    // sigmoid(logit) clamped to [eps, 1 - eps].
    double forward(std::span<const double> x) const;
    double forward(const scoring::SceneVector& v) const { return forward(v.values); }

    // Mean BCE (+ l2/2 * sum of squared weights) over a labelled set and its
    // gradient, laid out layer by layer as [weights..., biases...].
    double loss_and_gradient(std::span<const std::vector<double>> inputs, std::span<const int> labels, double l2,
                             std::vector<double>* gradient) const;

    // Flat parameter view matching the gradient layout.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> params);

    friend bool operator==(const DiscriminatorModel&, const DiscriminatorModel&) = default;

private:
    std::vector<DenseLayer> layers_;
    double leak_ = 0.01;
    std::uint64_t seed_ = 0;
};

// Mean binary cross-entropy, natural log. Label 0 = source, 1 = target.
double bce_loss(std::span<const double> preds, std::span<const int> labels);

struct TrainResult {
    DiscriminatorModel model;
    std::vector<double> loss_history; // full-set mean BCE after each epoch
};

// Mini-batch gradient descent. Source vectors are labelled 0, target 1.
// Throws NumericalError if the loss becomes non-finite.
TrainResult train(const DiscriminatorModel& model, std::span<const scoring::SceneVector> source_vs,
                  std::span<const scoring::SceneVector> target_vs, const TrainConfig& cfg);

// H(GAP(enhance(frame))).
Score domainness(const DiscriminatorModel& model, const FrameRecord& frame,
                 scoring::EntropyBase base = scoring::EntropyBase::Bits);

// Area under the ROC curve of `scores` for the positive class (label 1);
// ties count one half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

} // namespace bi3d
