#include "bi3d/discriminator.hpp"

#include "bi3d/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace bi3d {
namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double clamp_probability(double p) {
    return std::clamp(p, DiscriminatorModel::kOutputEpsilon, 1.0 - DiscriminatorModel::kOutputEpsilon);
}

void check_dims(const std::vector<std::size_t>& dims) {
    if (dims.size() < 3) throw DataError("discriminator needs at least one hidden layer");
    if (dims.back() != 1) throw DataError("discriminator output layer must have width 1");
    for (auto d : dims) {
        if (d == 0) throw DataError("discriminator layer of width 0");
    }
}

} // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw DataError("learning_rate must be positive");
    if (batch_size == 0) throw DataError("batch_size must be positive");
    if (!(l2 >= 0.0)) throw DataError("l2 must be non-negative");
}

DiscriminatorModel::DiscriminatorModel(std::vector<std::size_t> layer_dims, double leak, std::uint64_t seed)
    : leak_(leak), seed_(seed) {
    check_dims(layer_dims);
    if (!(leak > 0.0 && leak < 1.0)) throw DataError("leaky slope must lie in (0,1)");
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        DenseLayer layer;
        layer.inputs = layer_dims[l];
        layer.outputs = layer_dims[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
        layer.weights.resize(layer.inputs * layer.outputs);
        for (auto& w : layer.weights) w = uniform(rng, -limit, limit);
        layer.biases.assign(layer.outputs, 0.0);
        layers_.push_back(std::move(layer));
    }
}

DiscriminatorModel DiscriminatorModel::zeros(std::vector<std::size_t> layer_dims, double leak) {
    DiscriminatorModel m(std::move(layer_dims), leak, 0);
    for (auto& layer : m.layers_) {
        std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    }
    return m;
}

DiscriminatorModel DiscriminatorModel::from_layers(std::vector<DenseLayer> layers, double leak, std::uint64_t seed) {
    if (layers.empty()) throw DataError("discriminator without layers");
    std::vector<std::size_t> dims{layers.front().inputs};
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (l > 0 && layer.inputs != layers[l - 1].outputs) throw DataError("discriminator layer shapes do not chain");
        if (layer.weights.size() != layer.inputs * layer.outputs || layer.biases.size() != layer.outputs) {
            throw DataError("discriminator layer payload does not match its shape");
        }
        dims.push_back(layer.outputs);
    }
    check_dims(dims);
    if (!(leak > 0.0 && leak < 1.0)) throw DataError("leaky slope must lie in (0,1)");
    DiscriminatorModel m;
    m.layers_ = std::move(layers);
    m.leak_ = leak;
    m.seed_ = seed;
    return m;
}

std::size_t DiscriminatorModel::input_dim() const {
    return layers_.empty() ? 0 : layers_.front().inputs;
}

std::vector<std::size_t> DiscriminatorModel::layer_dims() const {
    std::vector<std::size_t> dims;
    if (layers_.empty()) return dims;
    dims.push_back(layers_.front().inputs);
    for (const auto& layer : layers_) dims.push_back(layer.outputs);
    return dims;
}

double DiscriminatorModel::logit(std::span<const double> x) const {
    if (layers_.empty()) throw DataError("discriminator is empty");
    if (x.size() != input_dim()) {
        throw DataError("discriminator input has dimension " + std::to_string(x.size()) + ", expected " +
                        std::to_string(input_dim()));
    }
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        next.assign(layer.outputs, 0.0);
        for (std::size_t o = 0; o < layer.outputs; ++o) {
            const double* w = layer.weights.data() + o * layer.inputs;
            double z = layer.biases[o];
            for (std::size_t i = 0; i < layer.inputs; ++i) z += w[i] * cur[i];
            if (l + 1 < layers_.size() && z < 0.0) z *= leak_;
            next[o] = z;
        }
        cur.swap(next);
    }
    return cur[0];
}

double DiscriminatorModel::forward(std::span<const double> x) const {
    return clamp_probability(sigmoid(logit(x)));
}

double DiscriminatorModel::loss_and_gradient(std::span<const std::vector<double>> inputs, std::span<const int> labels,
                                             double l2, std::vector<double>* gradient) const {
    if (inputs.empty() || inputs.size() != labels.size()) {
        throw DataError("loss_and_gradient: inputs and labels must be non-empty and aligned");
    }
    const std::size_t n_layers = layers_.size();
    std::vector<std::size_t> offsets(n_layers);
    std::size_t n_params = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        offsets[l] = n_params;
        n_params += layers_[l].weights.size() + layers_[l].biases.size();
    }
    if (gradient) gradient->assign(n_params, 0.0);

    // acts[0] = input, acts[l+1] = post-activation of layer l; pre[l] = pre-activation.
    std::vector<std::vector<double>> acts(n_layers + 1);
    std::vector<std::vector<double>> pre(n_layers);
    std::vector<double> delta;
    std::vector<double> delta_prev;
    const double inv_n = 1.0 / static_cast<double>(inputs.size());
    double loss = 0.0;

    for (std::size_t s = 0; s < inputs.size(); ++s) {
        const auto& x = inputs[s];
        if (x.size() != input_dim()) throw DataError("loss_and_gradient: input dimension mismatch");
        const int y = labels[s];
        if (y != 0 && y != 1) throw DataError("loss_and_gradient: labels must be 0 or 1");

        acts[0].assign(x.begin(), x.end());
        for (std::size_t l = 0; l < n_layers; ++l) {
            const auto& layer = layers_[l];
            pre[l].assign(layer.outputs, 0.0);
            acts[l + 1].assign(layer.outputs, 0.0);
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                const double* w = layer.weights.data() + o * layer.inputs;
                double z = layer.biases[o];
                for (std::size_t i = 0; i < layer.inputs; ++i) z += w[i] * acts[l][i];
                pre[l][o] = z;
                acts[l + 1][o] = (l + 1 < n_layers && z < 0.0) ? z * leak_ : z;
            }
        }
        const double raw = sigmoid(acts[n_layers][0]);
        const double p = clamp_probability(raw);
        loss += -(y == 1 ? std::log(p) : std::log(1.0 - p)) * inv_n;

        if (!gradient) continue;
        // d(loss)/d(logit); zero where the output clamp is active.
        const bool clamped = raw != p;
        delta.assign(1, clamped ? 0.0 : (raw - static_cast<double>(y)) * inv_n);
        for (std::size_t l = n_layers; l-- > 0;) {
            const auto& layer = layers_[l];
            double* gw = gradient->data() + offsets[l];
            double* gb = gw + layer.weights.size();
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                gb[o] += d;
                for (std::size_t i = 0; i < layer.inputs; ++i) gw[o * layer.inputs + i] += d * acts[l][i];
            }
            if (l == 0) break;
            delta_prev.assign(layer.inputs, 0.0);
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                const double* w = layer.weights.data() + o * layer.inputs;
                for (std::size_t i = 0; i < layer.inputs; ++i) delta_prev[i] += d * w[i];
            }
            for (std::size_t i = 0; i < layer.inputs; ++i) {
                if (pre[l - 1][i] < 0.0) delta_prev[i] *= leak_;
            }
            delta.swap(delta_prev);
        }
    }

    if (l2 > 0.0) {
        for (std::size_t l = 0; l < n_layers; ++l) {
            const auto& layer = layers_[l];
            for (std::size_t k = 0; k < layer.weights.size(); ++k) {
                const double w = layer.weights[k];
                loss += 0.5 * l2 * w * w;
                if (gradient) (*gradient)[offsets[l] + k] += l2 * w;
            }
        }
    }
    return loss;
}

std::vector<double> DiscriminatorModel::parameters() const {
    std::vector<double> out;
    for (const auto& layer : layers_) {
        out.insert(out.end(), layer.weights.begin(), layer.weights.end());
        out.insert(out.end(), layer.biases.begin(), layer.biases.end());
    }
    return out;
}

void DiscriminatorModel::set_parameters(std::span<const double> params) {
    std::size_t k = 0;
    for (auto& layer : layers_) {
        if (k + layer.weights.size() + layer.biases.size() > params.size()) break;
        std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(k), layer.weights.size(), layer.weights.begin());
        k += layer.weights.size();
        std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(k), layer.biases.size(), layer.biases.begin());
        k += layer.biases.size();
    }
    if (k != params.size()) throw DataError("set_parameters: parameter count mismatch");
}

double bce_loss(std::span<const double> preds, std::span<const int> labels) {
    if (preds.empty()) throw DataError("bce_loss: empty input");
    if (preds.size() != labels.size()) throw DataError("bce_loss: preds and labels differ in length");
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double p = preds[i];
        if (!(p >= 0.0 && p <= 1.0)) throw DataError("bce_loss: prediction outside [0,1]");
        const int y = labels[i];
        if (y == 1) {
            sum += -std::log(clamp_probability(p));
        } else if (y == 0) {
            sum += -std::log(clamp_probability(1.0 - p));
        } else {
            throw DataError("bce_loss: labels must be 0 or 1");
        }
    }
    return sum / static_cast<double>(preds.size());
}

TrainResult train(const DiscriminatorModel& model, std::span<const scoring::SceneVector> source_vs,
                  std::span<const scoring::SceneVector> target_vs, const TrainConfig& cfg) {
    cfg.validate();
    if (source_vs.empty() || target_vs.empty()) throw DataError("train: both domains need at least one vector");

    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    xs.reserve(source_vs.size() + target_vs.size());
    for (const auto& v : source_vs) {
        xs.push_back(v.values);
        ys.push_back(0);
    }
    for (const auto& v : target_vs) {
        xs.push_back(v.values);
        ys.push_back(1);
    }
    for (const auto& x : xs) {
        if (x.size() != model.input_dim()) {
            throw DataError("train: scene vector of dimension " + std::to_string(x.size()) + ", model expects " +
                            std::to_string(model.input_dim()));
        }
    }

    TrainResult result{model, {}};
    result.loss_history.reserve(cfg.epochs);
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<double>> batch_x;
    std::vector<int> batch_y;
    std::vector<double> grad;
    std::vector<double> params = result.model.parameters();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(order, rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            batch_x.clear();
            batch_y.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch_x.push_back(xs[order[i]]);
                batch_y.push_back(ys[order[i]]);
            }
            const double batch_loss = result.model.loss_and_gradient(batch_x, batch_y, cfg.l2, &grad);
            if (!std::isfinite(batch_loss)) {
                throw NumericalError("discriminator training diverged at epoch " + std::to_string(epoch));
            }
            for (std::size_t k = 0; k < params.size(); ++k) params[k] -= cfg.learning_rate * grad[k];
            result.model.set_parameters(params);
        }
        const double epoch_loss = result.model.loss_and_gradient(xs, ys, 0.0, nullptr);
        if (!std::isfinite(epoch_loss)) {
            throw NumericalError("discriminator loss is not finite after epoch " + std::to_string(epoch));
        }
        result.loss_history.push_back(epoch_loss);
    }
    return result;
}

Score domainness(const DiscriminatorModel& model, const FrameRecord& frame, scoring::EntropyBase base) {
    return Score{frame.id, model.forward(scoring::scene_vector(frame, base))};
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw DataError("roc_auc: scores and labels differ in length");
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j); // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[idx[k]] == 1) {
                rank_sum += avg_rank;
                ++positives;
            }
        }
        i = j;
    }
    const std::size_t negatives = scores.size() - positives;
    if (positives == 0 || negatives == 0) throw DataError("roc_auc: need both classes");
    const double p = static_cast<double>(positives);
    return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

} // namespace bi3d
