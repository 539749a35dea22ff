#pragma once
// Diversity-based target selection.
//
// Every unlabeled target frame is summarised by its confidence-weighted ROI
// feature sum. Frames are streamed (ascending id) into at most b_k similarity
// banks, each represented by a prototype vector:
//
//   * while there are fewer than b_k banks, each frame founds a bank;
//   * afterwards, let a = max cosine(frame, prototype) and
//     t = min cosine over all prototype pairs. If a < t the two most similar
//     banks are merged (count-weighted prototype mean) and the frame founds a
//     new bank; otherwise the frame joins its most similar bank.
//
// One frame per bank, the one the discriminator finds most target-like, is
// sent for annotation.

#include "bi3d/core.hpp"
#include "bi3d/discriminator.hpp"

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace bi3d::target_sampler {

inline constexpr double kNormFloor = 1e-12;

struct ReweightedROI {
    std::string frame_id;
    std::vector<double> vector;
};

struct SimilarityBank {
    std::vector<double> prototype;
    std::vector<std::string> members;

    std::size_t count() const noexcept { return members.size(); }
    // Smallest member id; the bank's identity for tie-breaking.
    const std::string& key() const;
};

struct BankSet {
    std::vector<SimilarityBank> banks; // creation order; a merge keeps the earlier slot
    std::size_t capacity = 0;
};

enum class MergeCriterion {
    // Open a new bank when the frame's best prototype similarity falls below
    // the most similar prototype pair (the pair that gets merged).
    MaxPairwise,
    // Literal variant: compare against the least similar prototype pair.
    // Tends to leave a cluster without a bank of its own.
    MinPairwise,
};

struct BankOptions {
    MergeCriterion criterion = MergeCriterion::MaxPairwise;
    // Running-mean prototype update when a frame joins a bank (ablation).
    bool update_prototype_on_join = false;
};

// sum_m confidences[m] * roi_features[m]; zero vector of `roi_dim` when the
// frame has no ROIs. Throws DataError on inconsistent ROI dimensions.
ReweightedROI reweight(const FrameRecord& frame, std::size_t roi_dim);

// Common ROI dimension of the frames that carry ROIs (1 when none do).
std::size_t infer_roi_dim(std::span<const FrameRecord> frames);

// u.v / (|u||v|); 0 when either norm is below kNormFloor.
double cosine(std::span<const double> u, std::span<const double> v);

// Count-weighted prototype mean; members of `a` precede those of `b`.
SimilarityBank merge_banks(const SimilarityBank& a, const SimilarityBank& b);

using StepObserver = std::function<void(const BankSet&)>;

// Streams `rois` in the given order. `observer`, if set, sees the bank set
// after every frame.
BankSet build_banks(std::span<const ReweightedROI> rois, std::size_t capacity, const BankOptions& options = {},
                    const StepObserver& observer = {});

// Highest-scoring member of each bank (ties: smaller id), in bank order.
// Throws DataError when a member has no score.
std::vector<std::string> select_targets(const BankSet& banks, const std::map<std::string, double>& domainness);

struct RoundResult {
    std::vector<std::string> selected; // the round's annotation set
    BankSet banks;
    std::vector<Score> scores;         // domainness of every candidate, id order
};

// Selection from precomputed summaries and scores. `rois` must already be in
// processing order.
RoundResult select_round(std::span<const ReweightedROI> rois, const std::map<std::string, double>& domainness,
                         std::size_t budget, const BankOptions& options = {});

// Full round: reweight -> banks -> domainness -> per-bank top-1. Frames are
// processed in ascending id order. Throws DataError on a source-tagged frame.
RoundResult sample_round(std::span<const FrameRecord> unlabeled, const DiscriminatorModel& model, std::size_t budget,
                         const BankOptions& options = {},
                         scoring::EntropyBase base = scoring::EntropyBase::Bits);

} // namespace bi3d::target_sampler
