#pragma once
// Domainness-aware source selection: rank source frames by how target-like
// the discriminator finds them and keep the head of the ranking.

#include "bi3d/core.hpp"
#include "bi3d/discriminator.hpp"

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace bi3d::source_sampler {

struct Proportion {
    double fraction = 0.01; // in (0, 1]
};

struct Threshold {
    double logit = 0.0; // keep frames whose logit exceeds this
};

struct TopK {
    std::size_t k = 1;
};

using SelectionMode = std::variant<Proportion, Threshold, TopK>;

void validate(const SelectionMode& mode);
std::string describe(const SelectionMode& mode);

// Parses "threshold:<logit>", "proportion:<p>" or "topk:<k>".
SelectionMode parse_mode(const std::string& text);

// One domainness score per frame, aligned with the input.
// Throws DataError if a target-tagged frame is present.
std::vector<Score> score_source(std::span<const FrameRecord> frames, const DiscriminatorModel& model,
                                scoring::EntropyBase base = scoring::EntropyBase::Bits);

// Descending by value, ties by ascending id.
std::vector<Score> rank(std::span<const Score> scores);

// The selected ids in ranking order.
std::vector<std::string> select_source(std::span<const Score> scores, const SelectionMode& mode);

// log(s / (1 - s)).
double logit_of(double probability);

} // namespace bi3d::source_sampler
