#pragma once
// Read/write access to HiddenLabel payloads.
//
// Only the annotation side of the system (simulated annotator, proxy
// detector evaluation, frame I/O) includes this header. Sampler code must
// not, which is what keeps ground truth out of every selection path.

#include "bi3d/core.hpp"

#include <optional>
#include <string>

namespace bi3d {

class LabelAccess {
public:
    static const std::optional<std::string>& reveal(const HiddenLabel& label) { return label.payload_; }
    static const std::optional<std::string>& reveal(const FrameRecord& frame) { return reveal(frame.hidden_label); }

    static void strip(FrameRecord& frame) { frame.hidden_label = HiddenLabel{}; }
};

} // namespace bi3d
