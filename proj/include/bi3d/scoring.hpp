#pragma once
// Foreground region-aware scene features.
//
//   S_ent    = H2(S_obj)                        (binary entropy, per entry)
//   A[h,w]   = 1 + (max_c S_obj + max_c S_ent) / 2
//   f_hat    = A (.) f_bev                      (A broadcast over channels)
//   scene    = GAP(f_hat)                       (per-channel spatial mean)

#include "bi3d/core.hpp"

#include <algorithm>
#include <vector>

namespace bi3d::scoring {

enum class EntropyBase { Bits, Nats };

// Row-major H x W map.
struct Map2 {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> data;

    double at(std::size_t h, std::size_t w) const { return data[h * width + w]; }
};

struct EnhancedFeature {
    Tensor3d map;    // C x H x W
    Map2 attention;  // entries in [1, 2]
};

struct SceneVector {
    std::vector<double> values;
};

// Binary entropy of a single probability; 0 log 0 is taken as 0.
double binary_entropy(double p, EntropyBase base = EntropyBase::Bits);

// Elementwise binary entropy. Throws DataError on entries outside [0,1].
Tensor3d entropy_map(const Tensor3& objectness, EntropyBase base = EntropyBase::Bits);

// Per-location maximum over channels. Throws DataError when C' == 0.
template <class T>
Map2 channel_max(const BasicTensor3<T>& t) {
    if (t.channels == 0) throw DataError("channel_max: empty channel dimension");
    Map2 out{t.height, t.width, std::vector<double>(t.plane())};
    for (std::size_t i = 0; i < t.plane(); ++i) out.data[i] = static_cast<double>(t.data[i]);
    for (std::size_t c = 1; c < t.channels; ++c) {
        const T* slice = t.data.data() + c * t.plane();
        for (std::size_t i = 0; i < t.plane(); ++i) {
            out.data[i] = std::max(out.data[i], static_cast<double>(slice[i]));
        }
    }
    return out;
}

EnhancedFeature enhance(const FrameRecord& frame, EntropyBase base = EntropyBase::Bits);

SceneVector pool(const EnhancedFeature& e);

inline SceneVector scene_vector(const FrameRecord& frame, EntropyBase base = EntropyBase::Bits) {
    return pool(enhance(frame, base));
}

} // namespace bi3d::scoring
