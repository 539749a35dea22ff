#pragma once
// Bi-domain sampling and training loop.
//
//   1. pretrain the detector on the labelled source domain;
//   2. train the domain discriminator on detector features of both domains
//      (detector frozen);
//   3. select target-like source frames and fine-tune on them;
//   4. for each pipeline epoch: at trigger epochs, pick b_k unlabeled target
//      frames, have them annotated, then fine-tune on the selected source plus
//      labelled target frames.

#include "bi3d/core.hpp"
#include "bi3d/discriminator.hpp"
#include "bi3d/source_sampler.hpp"
#include "bi3d/target_sampler.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bi3d::pipeline {

// Opaque detector parameters. Oracles decide the layout.
struct DetectorState {
    std::vector<double> parameters;

    // FNV-1a over the parameter bytes, hex encoded.
    std::string fingerprint() const;

    friend bool operator==(const DetectorState&, const DetectorState&) = default;
};

struct LabeledFrame {
    const FrameRecord* frame = nullptr;
    std::string label;
};

// Stand-in for the 3D detector and its training losses.
class DetectorOracle {
public:
    virtual ~DetectorOracle() = default;

    virtual DetectorState pretrain(std::span<const LabeledFrame> source) = 0;
    // Must return `state` unchanged for an empty set or zero epochs.
    virtual DetectorState finetune(const DetectorState& state, std::span<const LabeledFrame> labeled,
                                   std::size_t epochs) = 0;
    // Accuracy in [0,1]; deterministic in (state, frames).
    virtual double evaluate(const DetectorState& state, std::span<const FrameRecord> eval) const = 0;
    // Detector-side view of a frame (maps, ROIs, confidences) under `state`.
    virtual FrameRecord features(const DetectorState& state, const FrameRecord& frame) const = 0;
};

// The human annotator: returns the label of a frame, if one can be obtained.
class Annotator {
public:
    virtual ~Annotator() = default;
    virtual std::optional<std::string> annotate(const FrameRecord& frame) const = 0;
};

// Reveals the simulator's hidden label.
class HiddenLabelAnnotator final : public Annotator {
public:
    std::optional<std::string> annotate(const FrameRecord& frame) const override;
};

struct RoundContext {
    std::size_t round = 0;
    std::size_t budget = 0;
    std::uint64_t seed = 0;
    const DetectorOracle* oracle = nullptr;
    const DetectorState* detector = nullptr;
    const DiscriminatorModel* discriminator = nullptr;
    std::span<const LabeledFrame> labeled; // current D~s u D~t with labels
};

struct Selection {
    std::vector<std::string> ids;
    std::vector<Score> scores; // per-candidate scores the selector ranked by (may be empty)
};

// Picks at most ctx.budget frames from `unlabeled` (detector-featurised,
// ascending id). Implementations must not read hidden labels.
class TargetSelector {
public:
    virtual ~TargetSelector() = default;
    virtual std::string name() const = 0;
    virtual bool needs_discriminator() const { return false; }
    virtual Selection select(std::span<const FrameRecord> unlabeled, const RoundContext& ctx) = 0;
};

class DiversitySelector final : public TargetSelector {
public:
    explicit DiversitySelector(target_sampler::BankOptions options = {},
                               scoring::EntropyBase base = scoring::EntropyBase::Bits)
        : options_(options), base_(base) {}

    std::string name() const override { return "bi3d"; }
    bool needs_discriminator() const override { return true; }
    Selection select(std::span<const FrameRecord> unlabeled, const RoundContext& ctx) override;

private:
    target_sampler::BankOptions options_;
    scoring::EntropyBase base_;
};

struct PipelineConfig {
    BudgetSchedule schedule;
    // nullopt: keep the whole source domain (no domainness-aware selection).
    std::optional<source_sampler::SelectionMode> source_mode = source_sampler::Threshold{0.0};
    std::size_t source_finetune_epochs = 15;
    std::size_t total_epochs = 10;
    TrainConfig discriminator;
    std::vector<std::size_t> discriminator_hidden{64, 32};
    double discriminator_leak = 0.01;
    std::uint64_t seed = 0;
    bool rescore_each_round = true;
    target_sampler::BankOptions banks;
    scoring::EntropyBase entropy_base = scoring::EntropyBase::Bits;

    void validate() const;
};

struct RoundRecord {
    std::size_t round = 0;
    std::size_t epoch = 0;
    std::size_t budget = 0;
    std::vector<std::string> selected;
    std::vector<Score> candidate_scores;
    std::size_t labeled_total = 0;
};

struct RunReport {
    std::string strategy;
    std::uint64_t seed = 0;
    std::string detector_before_discriminator; // fingerprints; equal when the detector stayed frozen
    std::string detector_after_discriminator;
    std::vector<double> discriminator_loss;
    std::vector<Score> source_scores;
    std::vector<std::string> selected_source;
    std::optional<double> accuracy_pretrained;
    std::optional<double> accuracy_after_source;
    std::vector<RoundRecord> rounds;
    std::vector<double> epoch_accuracy;
    std::optional<double> final_accuracy;
    std::vector<std::string> warnings;
    bool halted = false;
    std::vector<std::string> manifest; // frames awaiting offline annotation when halted
};

struct RunResult {
    DetectorState detector;
    PipelineState state;
    RunReport report;
    std::optional<DiscriminatorModel> discriminator;
};

// D~t <- D~t u delta; round + 1. Throws DataError when delta overlaps the
// labelled pools or repeats an id.
PipelineState update_labeled_pool(const PipelineState& state, std::span<const std::string> delta);

// Generic loop with any target selector. `eval` may be empty (no metrics).
RunResult run_pipeline(std::span<const FrameRecord> source, std::span<const FrameRecord> target,
                       std::span<const FrameRecord> eval, DetectorOracle& oracle, TargetSelector& selector,
                       const PipelineConfig& cfg, const Annotator& annotator = HiddenLabelAnnotator{});

// The full method: domainness-aware source selection + diversity-based
// target selection.
RunResult run_bi3d(std::span<const FrameRecord> source, std::span<const FrameRecord> target,
                   std::span<const FrameRecord> eval, DetectorOracle& oracle, const PipelineConfig& cfg,
                   const Annotator& annotator = HiddenLabelAnnotator{});

// Supplement presets, e.g. "kitti-1%" -> 18 frames at epochs 0 and 5.
BudgetSchedule preset_schedule(const std::string& name);

} // namespace bi3d::pipeline
