#pragma once
// Synthetic two-domain data, a proxy detector, baseline samplers and the
// seeded benchmark harness used to evaluate sampling strategies at desk scale.

#include "bi3d/core.hpp"
#include "bi3d/pipeline.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace bi3d::simulator {

struct FeatureDims {
    std::size_t channels = 8;        // C
    std::size_t height = 8;          // H
    std::size_t width = 8;           // W
    std::size_t anchor_channels = 2; // C'
    std::size_t roi_dim = 8;         // d_roi

    friend bool operator==(const FeatureDims&, const FeatureDims&) = default;
};

struct SyntheticConfig {
    std::size_t n_source = 1000;
    std::size_t n_target = 1000;
    std::size_t n_eval = 500;
    std::size_t clusters_per_domain = 6;
    FeatureDims dims;
    double domain_shift = 3.0;      // per-cluster centroid displacement, feature units
    double label_noise = 0.0;       // probability of a wrong hidden label, in [0, 0.5)
    std::uint64_t seed = 0;

    double centroid_radius = 4.0;   // norm of source cluster centroids
    double roi_noise = 1.0;         // per-dimension ROI jitter around the centroid
    double scene_noise = 0.5;       // per-frame jitter shared by a frame's ROIs
    double feature_noise = 0.2;     // additive noise on the feature map
    double imbalance = 1.0;         // Zipf exponent of cluster frequencies
    std::size_t max_rois = 4;       // ROIs per frame drawn from [1, max_rois]
    // Source centroids on a regular simplex (pairwise cosine -1/(K-1)) instead
    // of independent random directions; ignored unless 2 <= K <= roi_dim.
    bool spread_centroids = false;

    void validate() const;
    friend bool operator==(const SyntheticConfig&, const SyntheticConfig&) = default;
};

struct SyntheticData {
    std::vector<FrameRecord> source;
    std::vector<FrameRecord> target;
    std::vector<FrameRecord> eval; // target-domain held-out split
    std::vector<std::vector<double>> source_centroids;
    std::vector<std::vector<double>> target_centroids;
};

SyntheticData generate(const SyntheticConfig& cfg);

// ---------------------------------------------------------------------------
// Proxy detector: multinomial logistic regression on the unit-normalised
// confidence-weighted ROI sum. Labels are cluster ids "0".."K-1".

struct ProxyConfig {
    std::size_t classes = 6;
    double learning_rate = 0.5;
    double l2 = 1e-3;
    std::size_t pretrain_epochs = 50;
    std::size_t steps_per_epoch = 5; // full-batch gradient steps per oracle epoch
    double target_weight = 1.0;      // loss weight of target-domain frames during fine-tuning
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const ProxyConfig&, const ProxyConfig&) = default;
};

class ProxyDetector final : public pipeline::DetectorOracle {
public:
    explicit ProxyDetector(ProxyConfig cfg);

    pipeline::DetectorState pretrain(std::span<const pipeline::LabeledFrame> source) override;
    pipeline::DetectorState finetune(const pipeline::DetectorState& state,
                                     std::span<const pipeline::LabeledFrame> labeled, std::size_t epochs) override;
    double evaluate(const pipeline::DetectorState& state, std::span<const FrameRecord> eval) const override;
    // Replaces ROI confidences by the classifier's top-class probability.
    FrameRecord features(const pipeline::DetectorState& state, const FrameRecord& frame) const override;

    // Randomly initialised head trained on `labeled` (committee members).
    pipeline::DetectorState train_head(std::span<const pipeline::LabeledFrame> labeled, std::uint64_t init_seed,
                                       std::size_t epochs) const;

    // Class logits of a frame under `state`.
    std::vector<double> logits(const pipeline::DetectorState& state, const FrameRecord& frame) const;

    const ProxyConfig& config() const noexcept { return cfg_; }
    std::size_t input_dim() const noexcept { return input_dim_; }

private:
    pipeline::DetectorState initial_state(std::uint64_t seed) const;
    void descend(pipeline::DetectorState& state, std::span<const pipeline::LabeledFrame> labeled,
                 std::size_t steps) const;

    ProxyConfig cfg_;
    std::size_t input_dim_ = 0; // fixed at pretrain
};

// ---------------------------------------------------------------------------
// Baseline samplers.

// Uniform without replacement; deterministic per seed.
std::vector<std::string> sample_random(std::span<const FrameRecord> unlabeled, std::size_t budget,
                                       std::uint64_t seed);

// Mean binary entropy of a frame's ROI confidences (0 for a frame without ROIs).
double mean_confidence_entropy(const FrameRecord& frame);

// Top-budget by mean confidence entropy, ties by ascending id.
std::vector<std::string> sample_entropy(std::span<const FrameRecord> unlabeled, std::size_t budget);

// Committee disagreement per frame: mean L2 distance between the logits of
// every pair of heads (for two heads, simply their distance).
std::vector<Score> committee_disagreement(std::span<const FrameRecord> unlabeled, const ProxyDetector& detector,
                                          std::span<const pipeline::DetectorState> heads);

// Trains one head per seed on `labeled` and returns the top-budget frames by
// disagreement, ties by ascending id.
std::vector<std::string> sample_committee(std::span<const FrameRecord> unlabeled,
                                          std::span<const pipeline::LabeledFrame> labeled,
                                          const ProxyDetector& detector, std::size_t budget,
                                          std::span<const std::uint64_t> head_seeds, std::size_t head_epochs);

class RandomSelector final : public pipeline::TargetSelector {
public:
    explicit RandomSelector(std::uint64_t stream = 0) : stream_(stream) {}
    std::string name() const override { return "random"; }
    pipeline::Selection select(std::span<const FrameRecord> unlabeled, const pipeline::RoundContext& ctx) override;

private:
    std::uint64_t stream_;
};

class EntropySelector final : public pipeline::TargetSelector {
public:
    std::string name() const override { return "entropy"; }
    pipeline::Selection select(std::span<const FrameRecord> unlabeled, const pipeline::RoundContext& ctx) override;
};

class CommitteeSelector final : public pipeline::TargetSelector {
public:
    CommitteeSelector(const ProxyDetector& detector, std::uint64_t stream = 0, std::size_t head_epochs = 10,
                      std::size_t heads = 2);
    std::string name() const override { return "committee"; }
    pipeline::Selection select(std::span<const FrameRecord> unlabeled, const pipeline::RoundContext& ctx) override;

private:
    const ProxyDetector& detector_;
    std::uint64_t stream_;
    std::size_t head_epochs_;
    std::size_t heads_;
};

// ---------------------------------------------------------------------------
// Benchmark harness.

enum class Strategy { Bi3D, Random, Entropy, Committee };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct BudgetLevel {
    double fraction = 0.01;                  // of n_target
    std::vector<std::size_t> trigger_epochs; // rounds share the budget equally

    friend bool operator==(const BudgetLevel&, const BudgetLevel&) = default;
};

struct BenchmarkConfig {
    SyntheticConfig data;
    pipeline::PipelineConfig pipeline; // schedule is replaced per budget level
    ProxyConfig proxy;
    std::vector<BudgetLevel> budgets{{0.01, {0, 5}}, {0.05, {0, 2, 4, 6, 8}}};
    std::vector<Strategy> strategies{Strategy::Bi3D, Strategy::Random, Strategy::Entropy, Strategy::Committee};
    std::vector<std::uint64_t> seeds;
    // Baselines keep the whole source domain; Bi3D uses pipeline.source_mode.
    bool baselines_select_source = false;
    std::size_t committee_head_epochs = 10;
    std::size_t committee_heads = 2;

    void validate() const;
};

struct BenchmarkRow {
    std::string strategy;       // name, suffixed "#k" when a strategy repeats
    std::uint64_t seed = 0;
    double budget_fraction = 0.0;
    std::size_t budget_frames = 0;
    double accuracy = 0.0;
    double diversity = 0.0;     // mean pairwise cosine distance of selected summaries
    std::size_t labeled = 0;
    std::size_t selected_source = 0;
};

struct SummaryRow {
    std::string strategy;
    double budget_fraction = 0.0;
    std::size_t budget_frames = 0;
    std::size_t runs = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    double mean_diversity = 0.0;
    // Paired against the first "random" strategy at the same budget.
    std::optional<double> mean_diff_vs_random;
    std::optional<double> p_value_vs_random; // one-sided: strategy > random
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;    // strategy x seed x budget
    std::vector<SummaryRow> summary;   // strategy x budget
};

// Paired sign-flip permutation test of mean(diffs) > 0. Exact for up to 20
// pairs, otherwise `samples` seeded Monte Carlo draws.
double paired_permutation_p(std::span<const double> diffs, std::size_t samples = 200000, std::uint64_t seed = 0);

// Mean pairwise (1 - cosine) over the given vectors; 0 for fewer than two.
double mean_pairwise_cosine_distance(std::span<const std::vector<double>> vectors);

BenchmarkReport benchmark(const BenchmarkConfig& cfg);

} // namespace bi3d::simulator
