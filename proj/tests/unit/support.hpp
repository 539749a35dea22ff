#pragma once
// Shared builders for the test suites.

#include "bi3d/core.hpp"
#include "bi3d/random.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace bi3d::testing {

inline std::string padded_id(const char* prefix, std::size_t i, int width = 4) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
    return buf;
}

inline FrameRecord blank_frame(std::string id, Domain domain, std::size_t c = 2, std::size_t h = 2, std::size_t w = 2,
                               std::size_t c_obj = 1) {
    FrameRecord f;
    f.id = std::move(id);
    f.domain = domain;
    f.feature_map = Tensor3(c, h, w, 1.0f);
    f.objectness_map = Tensor3(c_obj, h, w, 0.0f);
    return f;
}

inline FrameRecord roi_frame(std::string id, Domain domain, std::vector<std::vector<float>> rois,
                             std::vector<float> confidences) {
    FrameRecord f = blank_frame(std::move(id), domain);
    f.roi_features = std::move(rois);
    f.roi_confidences = std::move(confidences);
    return f;
}

// Random valid frame; feature entries ~ N(offset, 1), objectness uniform.
inline FrameRecord random_frame(Rng& rng, std::string id, Domain domain, std::size_t c = 4, std::size_t h = 3,
                                std::size_t w = 3, std::size_t c_obj = 2, std::size_t roi_dim = 3,
                                double offset = 0.0) {
    FrameRecord f = blank_frame(std::move(id), domain, c, h, w, c_obj);
    for (auto& x : f.feature_map.data) x = static_cast<float>(offset + standard_normal(rng));
    for (auto& x : f.objectness_map.data) x = static_cast<float>(uniform01(rng));
    const auto k = static_cast<std::size_t>(uniform_index(rng, 4));
    for (std::size_t m = 0; m < k; ++m) {
        std::vector<float> roi(roi_dim);
        for (auto& x : roi) x = static_cast<float>(standard_normal(rng));
        f.roi_features.push_back(std::move(roi));
        f.roi_confidences.push_back(static_cast<float>(uniform(rng, 0.05, 1.0)));
    }
    return f;
}

} // namespace bi3d::testing
