#include "bi3d/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bi3d {

std::string to_string(Domain d) {
    return d == Domain::Source ? "source" : "target";
}

Domain domain_from_string(const std::string& s) {
    if (s == "source") return Domain::Source;
    if (s == "target") return Domain::Target;
    throw DataError("unknown domain tag '" + s + "'");
}

std::vector<std::string> validate_frame(const FrameRecord& frame) {
    std::vector<std::string> errors;
    if (frame.id.empty()) errors.emplace_back("empty frame id");

    const auto& f = frame.feature_map;
    const auto& o = frame.objectness_map;
    if (f.channels == 0 || f.height == 0 || f.width == 0) errors.emplace_back("feature map has a zero dimension");
    if (!f.shape_consistent()) errors.emplace_back("feature map payload does not match its shape");
    if (o.channels == 0 || o.height == 0 || o.width == 0) errors.emplace_back("objectness map has a zero dimension");
    if (!o.shape_consistent()) errors.emplace_back("objectness map payload does not match its shape");
    if (o.height != f.height || o.width != f.width) errors.emplace_back("objectness spatial shape differs from feature map");

    for (float v : f.data) {
        if (!std::isfinite(v)) {
            errors.emplace_back("non-finite feature value");
            break;
        }
    }
    for (float p : o.data) {
        if (!(p >= 0.0f && p <= 1.0f)) {
            errors.emplace_back("objectness out of [0,1]");
            break;
        }
    }

    if (frame.roi_features.size() != frame.roi_confidences.size()) errors.emplace_back("roi length mismatch");
    if (!frame.roi_features.empty()) {
        const std::size_t dim = frame.roi_features.front().size();
        if (dim == 0) errors.emplace_back("roi feature of dimension 0");
        for (const auto& roi : frame.roi_features) {
            if (roi.size() != dim) {
                errors.emplace_back("roi dimension mismatch");
                break;
            }
        }
    }
    for (float c : frame.roi_confidences) {
        if (!(c >= 0.0f && c <= 1.0f)) {
            errors.emplace_back("roi confidence out of [0,1]");
            break;
        }
    }
    return errors;
}

std::size_t BudgetSchedule::total_budget() const noexcept {
    std::size_t total = 0;
    for (auto b : per_round) total += b;
    return total;
}

void BudgetSchedule::validate() const {
    if (per_round.size() != trigger_epochs.size()) {
        throw DataError("budget schedule: per_round and trigger_epochs differ in length");
    }
    for (auto b : per_round) {
        if (b == 0) throw DataError("budget schedule: per-round budget must be positive");
    }
    for (std::size_t k = 1; k < trigger_epochs.size(); ++k) {
        if (trigger_epochs[k] <= trigger_epochs[k - 1]) {
            throw DataError("budget schedule: trigger epochs must be strictly increasing");
        }
    }
}

BudgetSchedule BudgetSchedule::equal_split(std::size_t budget, std::vector<std::size_t> trigger_epochs) {
    BudgetSchedule s;
    const std::size_t rounds = trigger_epochs.size();
    if (rounds == 0) {
        if (budget != 0) throw DataError("budget schedule: non-zero budget with no rounds");
        return s;
    }
    if (budget < rounds) throw DataError("budget schedule: budget smaller than round count");
    s.trigger_epochs = std::move(trigger_epochs);
    for (std::size_t k = 0; k < rounds; ++k) {
        s.per_round.push_back(budget / rounds + (k < budget % rounds ? 1 : 0));
    }
    s.validate();
    return s;
}

std::vector<const FrameRecord*> sorted_by_id(std::span<const FrameRecord> frames) {
    std::vector<const FrameRecord*> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(&f);
    std::sort(out.begin(), out.end(), [](const FrameRecord* a, const FrameRecord* b) { return a->id < b->id; });
    return out;
}

} // namespace bi3d
