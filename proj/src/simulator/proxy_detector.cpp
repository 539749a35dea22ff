#include "bi3d/label_access.hpp"
#include "bi3d/random.hpp"
#include "bi3d/simulator.hpp"
#include "bi3d/target_sampler.hpp"

#include <algorithm>
#include <cmath>

namespace bi3d::simulator {
namespace {

// [unit(sum_m conf_m * roi_m), 1]
std::vector<double> design_row(const FrameRecord& frame, std::size_t roi_dim) {
    auto summary = target_sampler::reweight(frame, roi_dim).vector;
    double norm = 0.0;
    for (double x : summary) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > target_sampler::kNormFloor) {
        for (auto& x : summary) x /= norm;
    }
    summary.push_back(1.0);
    return summary;
}

std::vector<double> class_logits(const std::vector<double>& params, std::size_t classes,
                                 std::span<const double> row) {
    const std::size_t width = row.size();
    std::vector<double> z(classes, 0.0);
    for (std::size_t k = 0; k < classes; ++k) {
        const double* w = params.data() + k * width;
        double s = 0.0;
        for (std::size_t i = 0; i < width; ++i) s += w[i] * row[i];
        z[k] = s;
    }
    return z;
}

void softmax_inplace(std::vector<double>& z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (auto& v : z) {
        v = std::exp(v - mx);
        total += v;
    }
    for (auto& v : z) v /= total;
}

std::size_t parse_class(const std::string& label, std::size_t classes) {
    std::size_t used = 0;
    unsigned long value = 0;
    try {
        value = std::stoul(label, &used);
    } catch (const std::logic_error&) {
        throw DataError("proxy detector: label '" + label + "' is not a class index");
    }
    if (used != label.size() || value >= classes) {
        throw DataError("proxy detector: label '" + label + "' outside [0, " + std::to_string(classes) + ")");
    }
    return value;
}

} // namespace

void ProxyConfig::validate() const {
    if (classes < 2) throw DataError("proxy detector needs at least two classes");
    if (!(learning_rate > 0.0)) throw DataError("proxy learning_rate must be positive");
    if (!(l2 >= 0.0)) throw DataError("proxy l2 must be non-negative");
    if (steps_per_epoch == 0) throw DataError("proxy steps_per_epoch must be positive");
    if (!(target_weight > 0.0)) throw DataError("proxy target_weight must be positive");
}

ProxyDetector::ProxyDetector(ProxyConfig cfg) : cfg_(cfg) {
    cfg_.validate();
}

pipeline::DetectorState ProxyDetector::initial_state(std::uint64_t seed) const {
    pipeline::DetectorState s;
    s.parameters.assign(cfg_.classes * input_dim_, 0.0);
    if (seed != 0) {
        Rng rng(seed);
        for (auto& w : s.parameters) w = uniform(rng, -0.5, 0.5);
    }
    return s;
}

void ProxyDetector::descend(pipeline::DetectorState& state, std::span<const pipeline::LabeledFrame> labeled,
                            std::size_t steps) const {
    if (labeled.empty() || steps == 0) return;
    const std::size_t width = input_dim_;
    const std::size_t classes = cfg_.classes;
    if (state.parameters.size() != classes * width) throw DataError("proxy detector: state has the wrong size");

    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> ys;
    std::vector<double> weights;
    rows.reserve(labeled.size());
    double total_weight = 0.0;
    for (const auto& lf : labeled) {
        rows.push_back(design_row(*lf.frame, width - 1));
        ys.push_back(parse_class(lf.label, classes));
        const double w = lf.frame->domain == Domain::Target ? cfg_.target_weight : 1.0;
        weights.push_back(w);
        total_weight += w;
    }

    std::vector<double> grad(state.parameters.size());
    for (std::size_t step = 0; step < steps; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t n = 0; n < rows.size(); ++n) {
            auto p = class_logits(state.parameters, classes, rows[n]);
            softmax_inplace(p);
            p[ys[n]] -= 1.0;
            const double scale = weights[n] / total_weight;
            for (std::size_t k = 0; k < classes; ++k) {
                const double g = p[k] * scale;
                double* gk = grad.data() + k * width;
                for (std::size_t i = 0; i < width; ++i) gk[i] += g * rows[n][i];
            }
        }
        for (std::size_t k = 0; k < classes; ++k) {
            for (std::size_t i = 0; i + 1 < width; ++i) grad[k * width + i] += cfg_.l2 * state.parameters[k * width + i];
        }
        for (std::size_t j = 0; j < grad.size(); ++j) state.parameters[j] -= cfg_.learning_rate * grad[j];
    }
    for (double w : state.parameters) {
        if (!std::isfinite(w)) throw NumericalError("proxy detector diverged");
    }
}

pipeline::DetectorState ProxyDetector::pretrain(std::span<const pipeline::LabeledFrame> source) {
    if (source.empty()) throw DataError("proxy detector: pretraining needs labelled frames");
    input_dim_ = 0;
    for (const auto& lf : source) {
        for (const auto& roi : lf.frame->roi_features) {
            input_dim_ = std::max(input_dim_, roi.size());
        }
    }
    input_dim_ = std::max<std::size_t>(input_dim_, 1) + 1;
    auto state = initial_state(0);
    descend(state, source, cfg_.pretrain_epochs * cfg_.steps_per_epoch);
    return state;
}

pipeline::DetectorState ProxyDetector::finetune(const pipeline::DetectorState& state,
                                                std::span<const pipeline::LabeledFrame> labeled,
                                                std::size_t epochs) {
    auto next = state;
    descend(next, labeled, epochs * cfg_.steps_per_epoch);
    return next;
}

pipeline::DetectorState ProxyDetector::train_head(std::span<const pipeline::LabeledFrame> labeled,
                                                  std::uint64_t init_seed, std::size_t epochs) const {
    auto state = initial_state(mix_seed(init_seed) | 1);
    descend(state, labeled, epochs * cfg_.steps_per_epoch);
    return state;
}

std::vector<double> ProxyDetector::logits(const pipeline::DetectorState& state, const FrameRecord& frame) const {
    if (input_dim_ == 0) throw DataError("proxy detector used before pretraining");
    return class_logits(state.parameters, cfg_.classes, design_row(frame, input_dim_ - 1));
}

double ProxyDetector::evaluate(const pipeline::DetectorState& state, std::span<const FrameRecord> eval) const {
    if (eval.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& f : eval) {
        const auto& label = LabelAccess::reveal(f);
        if (!label) throw DataError("proxy detector: evaluation frame '" + f.id + "' has no label");
        const auto z = logits(state, f);
        const auto predicted = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
        if (predicted == parse_class(*label, cfg_.classes)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(eval.size());
}

FrameRecord ProxyDetector::features(const pipeline::DetectorState& state, const FrameRecord& frame) const {
    if (input_dim_ == 0) throw DataError("proxy detector used before pretraining");
    FrameRecord out = frame;
    for (std::size_t m = 0; m < out.roi_features.size(); ++m) {
        std::vector<double> row(out.roi_features[m].begin(), out.roi_features[m].end());
        if (row.size() + 1 != input_dim_) throw DataError("proxy detector: ROI dimension mismatch in '" + frame.id + "'");
        row.push_back(1.0);
        auto p = class_logits(state.parameters, cfg_.classes, row);
        softmax_inplace(p);
        out.roi_confidences[m] = static_cast<float>(*std::max_element(p.begin(), p.end()));
    }
    return out;
}

} // namespace bi3d::simulator
