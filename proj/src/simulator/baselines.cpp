#include "bi3d/random.hpp"
#include "bi3d/scoring.hpp"
#include "bi3d/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace bi3d::simulator {
namespace {

std::vector<std::string> top_by_score(std::vector<Score> scores, std::size_t budget) {
    std::sort(scores.begin(), scores.end(), [](const Score& a, const Score& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.frame_id < b.frame_id;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(budget, scores.size()); ++i) out.push_back(scores[i].frame_id);
    return out;
}

} // namespace

std::vector<std::string> sample_random(std::span<const FrameRecord> unlabeled, std::size_t budget,
                                       std::uint64_t seed) {
    std::vector<std::string> ids;
    ids.reserve(unlabeled.size());
    for (const auto& f : unlabeled) ids.push_back(f.id);
    std::sort(ids.begin(), ids.end());
    Rng rng(seed);
    shuffle(ids, rng);
    ids.resize(std::min(budget, ids.size()));
    return ids;
}

double mean_confidence_entropy(const FrameRecord& frame) {
    if (frame.roi_confidences.empty()) return 0.0;
    double total = 0.0;
    for (float c : frame.roi_confidences) total += scoring::binary_entropy(static_cast<double>(c));
    return total / static_cast<double>(frame.roi_confidences.size());
}

std::vector<std::string> sample_entropy(std::span<const FrameRecord> unlabeled, std::size_t budget) {
    std::vector<Score> scores;
    scores.reserve(unlabeled.size());
    for (const auto& f : unlabeled) scores.push_back(Score{f.id, mean_confidence_entropy(f)});
    return top_by_score(std::move(scores), budget);
}

std::vector<Score> committee_disagreement(std::span<const FrameRecord> unlabeled, const ProxyDetector& detector,
                                          std::span<const pipeline::DetectorState> heads) {
    if (heads.size() < 2) throw DataError("committee needs at least two heads");
    std::vector<Score> scores;
    scores.reserve(unlabeled.size());
    std::vector<std::vector<double>> z(heads.size());
    const double pairs = static_cast<double>(heads.size() * (heads.size() - 1) / 2);
    for (const auto& f : unlabeled) {
        for (std::size_t h = 0; h < heads.size(); ++h) z[h] = detector.logits(heads[h], f);
        double total = 0.0;
        for (std::size_t a = 0; a < heads.size(); ++a) {
            for (std::size_t b = a + 1; b < heads.size(); ++b) {
                double d2 = 0.0;
                for (std::size_t k = 0; k < z[a].size(); ++k) d2 += (z[a][k] - z[b][k]) * (z[a][k] - z[b][k]);
                total += std::sqrt(d2);
            }
        }
        scores.push_back(Score{f.id, total / pairs});
    }
    return scores;
}

std::vector<std::string> sample_committee(std::span<const FrameRecord> unlabeled,
                                          std::span<const pipeline::LabeledFrame> labeled,
                                          const ProxyDetector& detector, std::size_t budget,
                                          std::span<const std::uint64_t> head_seeds, std::size_t head_epochs) {
    if (budget == 0 || unlabeled.empty()) return {};
    std::vector<pipeline::DetectorState> heads;
    for (auto seed : head_seeds) heads.push_back(detector.train_head(labeled, seed, head_epochs));
    return top_by_score(committee_disagreement(unlabeled, detector, heads), budget);
}

pipeline::Selection RandomSelector::select(std::span<const FrameRecord> unlabeled, const pipeline::RoundContext& ctx) {
    return pipeline::Selection{sample_random(unlabeled, ctx.budget, derive_seed(ctx.seed, 0x52414E44ULL + stream_)), {}};
}

pipeline::Selection EntropySelector::select(std::span<const FrameRecord> unlabeled, const pipeline::RoundContext& ctx) {
    pipeline::Selection sel;
    for (const auto& f : unlabeled) sel.scores.push_back(Score{f.id, mean_confidence_entropy(f)});
    sel.ids = sample_entropy(unlabeled, ctx.budget);
    return sel;
}

CommitteeSelector::CommitteeSelector(const ProxyDetector& detector, std::uint64_t stream, std::size_t head_epochs,
                                     std::size_t heads)
    : detector_(detector), stream_(stream), head_epochs_(head_epochs), heads_(heads) {
    if (heads_ < 2) throw DataError("committee needs at least two heads");
}

pipeline::Selection CommitteeSelector::select(std::span<const FrameRecord> unlabeled,
                                              const pipeline::RoundContext& ctx) {
    const std::uint64_t base = derive_seed(ctx.seed, 0x434F4D4DULL + stream_);
    std::vector<pipeline::DetectorState> heads;
    for (std::size_t h = 0; h < heads_; ++h) {
        heads.push_back(detector_.train_head(ctx.labeled, derive_seed(base, h + 1), head_epochs_));
    }
    pipeline::Selection sel;
    sel.scores = committee_disagreement(unlabeled, detector_, heads);
    sel.ids = top_by_score(sel.scores, ctx.budget);
    return sel;
}

} // namespace bi3d::simulator
