#pragma once
// Domain types shared by every bi3d module.
//
// A FrameRecord is one scene as seen by the detector: a BEV-style feature
// map, an anchor objectness map, and the post-NMS ROI features with their
// confidences. Samplers only ever see these detector-side artifacts; the
// simulator's ground truth rides along in an opaque HiddenLabel.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bi3d {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (exit code 2 at the CLI).
class DataError : public Error {
public:
    using Error::Error;
};

// NaN/Inf produced during a numerical routine (exit code 3 at the CLI).
class NumericalError : public Error {
public:
    using Error::Error;
};

enum class Domain : std::uint8_t { Source, Target };

std::string to_string(Domain d);
Domain domain_from_string(const std::string& s);

// Dense C x H x W tensor, row-major with channel outermost.
template <class T>
struct BasicTensor3 {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<T> data;

    BasicTensor3() = default;
    BasicTensor3(std::size_t c, std::size_t h, std::size_t w, T fill = T{})
        : channels(c), height(h), width(w), data(c * h * w, fill) {}

    std::size_t plane() const noexcept { return height * width; }
    std::size_t size() const noexcept { return data.size(); }
    bool shape_consistent() const noexcept { return data.size() == channels * height * width; }

    T& at(std::size_t c, std::size_t h, std::size_t w) { return data[(c * height + h) * width + w]; }
    T at(std::size_t c, std::size_t h, std::size_t w) const { return data[(c * height + h) * width + w]; }

    friend bool operator==(const BasicTensor3&, const BasicTensor3&) = default;
};

// Frame payloads are single precision (the on-disk format); derived maps are double.
using Tensor3 = BasicTensor3<float>;
using Tensor3d = BasicTensor3<double>;

// Simulator ground truth attached to a frame. Its payload can only be read
// through LabelAccess (label_access.hpp), which sampler code never includes.
class HiddenLabel {
public:
    HiddenLabel() = default;
    explicit HiddenLabel(std::string payload) : payload_(std::move(payload)) {}

    bool present() const noexcept { return payload_.has_value(); }

    friend bool operator==(const HiddenLabel&, const HiddenLabel&) = default;

private:
    friend class LabelAccess;
    std::optional<std::string> payload_;
};

struct FrameRecord {
    std::string id;
    Domain domain = Domain::Source;
    Tensor3 feature_map;                     // C x H x W
    Tensor3 objectness_map;                  // C' x H x W, entries in [0,1]
    std::vector<std::vector<float>> roi_features;
    std::vector<float> roi_confidences;
    HiddenLabel hidden_label;

    friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

// Returns every invariant violation of `frame`; empty means valid.
std::vector<std::string> validate_frame(const FrameRecord& frame);

struct BudgetSchedule {
    std::vector<std::size_t> per_round;      // b_k, frames per round
    std::vector<std::size_t> trigger_epochs; // pipeline epoch at which round k fires

    std::size_t rounds() const noexcept { return per_round.size(); }
    std::size_t total_budget() const noexcept;

    // Throws DataError when the schedule is malformed.
    void validate() const;

    // Splits `budget` over the given trigger epochs as evenly as possible,
    // earlier rounds receiving the remainder.
    static BudgetSchedule equal_split(std::size_t budget, std::vector<std::size_t> trigger_epochs);

    friend bool operator==(const BudgetSchedule&, const BudgetSchedule&) = default;
};

struct PipelineState {
    std::vector<std::string> selected_source; // D~s, in selection order
    std::vector<std::string> labeled_target;  // D~t, in labeling order
    std::size_t round = 0;
    std::uint64_t rng_seed = 0;

    friend bool operator==(const PipelineState&, const PipelineState&) = default;
};

struct Score {
    std::string frame_id;
    double value = 0.0;

    friend bool operator==(const Score&, const Score&) = default;
};

// Ascending-id order, the canonical processing order for frame sets.
std::vector<const FrameRecord*> sorted_by_id(std::span<const FrameRecord> frames);

} // namespace bi3d
