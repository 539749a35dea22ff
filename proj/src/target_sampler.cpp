#include "bi3d/target_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bi3d::target_sampler {

const std::string& SimilarityBank::key() const {
    if (members.empty()) throw DataError("similarity bank without members");
    return *std::min_element(members.begin(), members.end());
}

ReweightedROI reweight(const FrameRecord& frame, std::size_t roi_dim) {
    if (frame.roi_features.size() != frame.roi_confidences.size()) {
        throw DataError("reweight: frame '" + frame.id + "' has mismatched ROI and confidence counts");
    }
    ReweightedROI out{frame.id, std::vector<double>(roi_dim, 0.0)};
    for (std::size_t m = 0; m < frame.roi_features.size(); ++m) {
        const auto& roi = frame.roi_features[m];
        if (roi.size() != roi_dim) {
            throw DataError("reweight: frame '" + frame.id + "' has an ROI of dimension " + std::to_string(roi.size()) +
                            ", expected " + std::to_string(roi_dim));
        }
        const double w = frame.roi_confidences[m];
        for (std::size_t i = 0; i < roi_dim; ++i) out.vector[i] += w * static_cast<double>(roi[i]);
    }
    return out;
}

std::size_t infer_roi_dim(std::span<const FrameRecord> frames) {
    std::size_t dim = 0;
    for (const auto& f : frames) {
        for (const auto& roi : f.roi_features) {
            if (dim == 0) {
                dim = roi.size();
            } else if (roi.size() != dim) {
                throw DataError("frame '" + f.id + "' has ROI dimension " + std::to_string(roi.size()) +
                                ", others have " + std::to_string(dim));
            }
        }
    }
    return dim == 0 ? 1 : dim;
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw DataError("cosine: dimension mismatch");
    double dot = 0.0;
    double nu = 0.0;
    double nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    if (nu < kNormFloor || nv < kNormFloor) return 0.0;
    return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

SimilarityBank merge_banks(const SimilarityBank& a, const SimilarityBank& b) {
    if (a.prototype.size() != b.prototype.size()) throw DataError("merge_banks: prototype dimension mismatch");
    if (a.members.empty() || b.members.empty()) throw DataError("merge_banks: empty bank");
    const double na = static_cast<double>(a.count());
    const double nb = static_cast<double>(b.count());
    SimilarityBank out;
    out.prototype.resize(a.prototype.size());
    for (std::size_t i = 0; i < a.prototype.size(); ++i) {
        out.prototype[i] = (na * a.prototype[i] + nb * b.prototype[i]) / (na + nb);
    }
    out.members = a.members;
    out.members.insert(out.members.end(), b.members.begin(), b.members.end());
    return out;
}

namespace {

struct PairStats {
    double min_similarity = std::numeric_limits<double>::infinity();
    double max_similarity = -std::numeric_limits<double>::infinity();
    std::size_t first = 0; // argmax pair, first < second as bank indices
    std::size_t second = 0;
    bool any = false;
};

PairStats prototype_pairs(const std::vector<SimilarityBank>& banks, const std::vector<std::string>& keys) {
    PairStats st;
    const std::string* best_lo = nullptr;
    const std::string* best_hi = nullptr;
    for (std::size_t m = 0; m < banks.size(); ++m) {
        for (std::size_t n = m + 1; n < banks.size(); ++n) {
            const double s = cosine(banks[m].prototype, banks[n].prototype);
            st.min_similarity = std::min(st.min_similarity, s);
            const auto [lo, hi] = std::minmax(keys[m], keys[n]);
            const bool better = !st.any || s > st.max_similarity ||
                                (s == st.max_similarity && (lo < *best_lo || (lo == *best_lo && hi < *best_hi)));
            if (better) {
                st.max_similarity = s;
                st.first = m;
                st.second = n;
                best_lo = &lo;
                best_hi = &hi;
                st.any = true;
            }
        }
    }
    return st;
}

} // namespace

BankSet build_banks(std::span<const ReweightedROI> rois, std::size_t capacity, const BankOptions& options,
                    const StepObserver& observer) {
    if (capacity == 0) throw DataError("build_banks: capacity must be at least 1");
    BankSet set;
    set.capacity = capacity;
    std::vector<std::string> keys; // cached smallest member id per bank

    for (const auto& roi : rois) {
        if (!set.banks.empty() && roi.vector.size() != set.banks.front().prototype.size()) {
            throw DataError("build_banks: frame '" + roi.frame_id + "' has a summary of different dimension");
        }
        if (set.banks.size() < capacity) {
            set.banks.push_back(SimilarityBank{roi.vector, {roi.frame_id}});
            keys.push_back(roi.frame_id);
        } else {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t best_bank = 0;
            for (std::size_t m = 0; m < set.banks.size(); ++m) {
                const double s = cosine(roi.vector, set.banks[m].prototype);
                if (s > best || (s == best && keys[m] < keys[best_bank])) {
                    best = s;
                    best_bank = m;
                }
            }
            const PairStats pairs = prototype_pairs(set.banks, keys);
            const double threshold =
                options.criterion == MergeCriterion::MinPairwise ? pairs.min_similarity : pairs.max_similarity;

            if (pairs.any && best < threshold) {
                set.banks[pairs.first] = merge_banks(set.banks[pairs.first], set.banks[pairs.second]);
                keys[pairs.first] = std::min(keys[pairs.first], keys[pairs.second]);
                set.banks.erase(set.banks.begin() + static_cast<std::ptrdiff_t>(pairs.second));
                keys.erase(keys.begin() + static_cast<std::ptrdiff_t>(pairs.second));
                set.banks.push_back(SimilarityBank{roi.vector, {roi.frame_id}});
                keys.push_back(roi.frame_id);
            } else {
                auto& bank = set.banks[best_bank];
                if (options.update_prototype_on_join) {
                    const double n = static_cast<double>(bank.count());
                    for (std::size_t i = 0; i < bank.prototype.size(); ++i) {
                        bank.prototype[i] = (n * bank.prototype[i] + roi.vector[i]) / (n + 1.0);
                    }
                }
                bank.members.push_back(roi.frame_id);
                keys[best_bank] = std::min(keys[best_bank], roi.frame_id);
            }
        }
        if (observer) observer(set);
    }
    return set;
}

std::vector<std::string> select_targets(const BankSet& banks, const std::map<std::string, double>& domainness) {
    std::vector<std::string> out;
    out.reserve(banks.banks.size());
    for (const auto& bank : banks.banks) {
        const std::string* best_id = nullptr;
        double best = 0.0;
        for (const auto& id : bank.members) {
            const auto it = domainness.find(id);
            if (it == domainness.end()) throw DataError("select_targets: no domainness score for frame '" + id + "'");
            if (!best_id || it->second > best || (it->second == best && id < *best_id)) {
                best = it->second;
                best_id = &id;
            }
        }
        if (best_id) out.push_back(*best_id);
    }
    return out;
}

RoundResult select_round(std::span<const ReweightedROI> rois, const std::map<std::string, double>& domainness,
                         std::size_t budget, const BankOptions& options) {
    RoundResult result;
    for (const auto& r : rois) {
        const auto it = domainness.find(r.frame_id);
        if (it == domainness.end()) throw DataError("select_round: no domainness score for frame '" + r.frame_id + "'");
        result.scores.push_back(Score{r.frame_id, it->second});
    }
    std::sort(result.scores.begin(), result.scores.end(),
              [](const Score& a, const Score& b) { return a.frame_id < b.frame_id; });
    if (budget == 0 || rois.empty()) {
        result.banks.capacity = budget;
        return result;
    }
    result.banks = build_banks(rois, budget, options);
    result.selected = select_targets(result.banks, domainness);
    return result;
}

RoundResult sample_round(std::span<const FrameRecord> unlabeled, const DiscriminatorModel& model, std::size_t budget,
                         const BankOptions& options, scoring::EntropyBase base) {
    const std::size_t roi_dim = infer_roi_dim(unlabeled);
    std::vector<ReweightedROI> rois;
    std::map<std::string, double> scores;
    rois.reserve(unlabeled.size());
    for (const FrameRecord* f : sorted_by_id(unlabeled)) {
        if (f->domain != Domain::Target) throw DataError("sample_round: frame '" + f->id + "' is not a target frame");
        rois.push_back(reweight(*f, roi_dim));
        scores.emplace(f->id, domainness(model, *f, base).value);
    }
    return select_round(rois, scores, budget, options);
}

} // namespace bi3d::target_sampler
