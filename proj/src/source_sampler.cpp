#include "bi3d/source_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bi3d::source_sampler {

void validate(const SelectionMode& mode) {
    if (const auto* p = std::get_if<Proportion>(&mode)) {
        if (!(p->fraction > 0.0 && p->fraction <= 1.0)) throw DataError("proportion must lie in (0,1]");
    } else if (const auto* t = std::get_if<TopK>(&mode)) {
        if (t->k == 0) throw DataError("top-k needs k >= 1");
    } else if (const auto* th = std::get_if<Threshold>(&mode)) {
        if (!std::isfinite(th->logit)) throw DataError("threshold must be finite");
    }
}

std::string describe(const SelectionMode& mode) {
    std::ostringstream os;
    os.precision(17);
    if (const auto* p = std::get_if<Proportion>(&mode)) {
        os << "proportion:" << p->fraction;
    } else if (const auto* t = std::get_if<TopK>(&mode)) {
        os << "topk:" << t->k;
    } else {
        os << "threshold:" << std::get<Threshold>(mode).logit;
    }
    return os.str();
}

SelectionMode parse_mode(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw DataError("selection mode '" + text + "' lacks ':<value>'");
    const std::string kind = text.substr(0, colon);
    const std::string value = text.substr(colon + 1);
    SelectionMode mode;
    try {
        std::size_t used = 0;
        if (kind == "threshold") {
            mode = Threshold{std::stod(value, &used)};
        } else if (kind == "proportion") {
            mode = Proportion{std::stod(value, &used)};
        } else if (kind == "topk") {
            const long long k = std::stoll(value, &used);
            if (k <= 0) throw DataError("top-k needs k >= 1");
            mode = TopK{static_cast<std::size_t>(k)};
        } else {
            throw DataError("unknown selection mode '" + kind + "'");
        }
        if (used != value.size()) throw DataError("trailing characters in selection mode '" + text + "'");
    } catch (const std::logic_error&) {
        throw DataError("cannot parse selection mode '" + text + "'");
    }
    validate(mode);
    return mode;
}

std::vector<Score> score_source(std::span<const FrameRecord> frames, const DiscriminatorModel& model,
                                scoring::EntropyBase base) {
    std::vector<Score> scores;
    scores.reserve(frames.size());
    for (const auto& f : frames) {
        if (f.domain != Domain::Source) throw DataError("score_source: frame '" + f.id + "' is target-tagged");
        scores.push_back(domainness(model, f, base));
    }
    return scores;
}

std::vector<Score> rank(std::span<const Score> scores) {
    std::vector<Score> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end(), [](const Score& a, const Score& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.frame_id < b.frame_id;
    });
    return sorted;
}

double logit_of(double probability) {
    return std::log(probability / (1.0 - probability));
}

std::vector<std::string> select_source(std::span<const Score> scores, const SelectionMode& mode) {
    validate(mode);
    const auto ranked = rank(scores);
    std::size_t take = 0;
    if (const auto* p = std::get_if<Proportion>(&mode)) {
        if (ranked.empty()) throw DataError("select_source: proportion mode on empty score list");
        // ceil(p * n), forgiving products like 0.07 * 100 = 7.000000000000001.
        const double exact = p->fraction * static_cast<double>(ranked.size());
        const double nearest = std::nearbyint(exact);
        const double count = std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact) ? nearest : std::ceil(exact);
        take = static_cast<std::size_t>(std::max(1.0, count));
        take = std::min(take, ranked.size());
    } else if (const auto* t = std::get_if<TopK>(&mode)) {
        if (ranked.empty()) throw DataError("select_source: top-k mode on empty score list");
        take = std::min(t->k, ranked.size());
    } else {
        const double tau = std::get<Threshold>(mode).logit;
        // Ranking is monotone in the logit, so the kept set is a prefix.
        while (take < ranked.size() && logit_of(ranked[take].value) > tau) ++take;
    }
    std::vector<std::string> ids;
    ids.reserve(take);
    for (std::size_t i = 0; i < take; ++i) ids.push_back(ranked[i].frame_id);
    return ids;
}

} // namespace bi3d::source_sampler
