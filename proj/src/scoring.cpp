#include "bi3d/scoring.hpp"

#include <cmath>
#include <numbers>

namespace bi3d::scoring {

double binary_entropy(double p, EntropyBase base) {
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("entropy: probability outside [0,1]");
    const double q = 1.0 - p;
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (q > 0.0) h -= q * std::log2(q);
    return base == EntropyBase::Bits ? h : h * std::numbers::ln2;
}

Tensor3d entropy_map(const Tensor3& objectness, EntropyBase base) {
    Tensor3d out(objectness.channels, objectness.height, objectness.width);
    for (std::size_t i = 0; i < objectness.size(); ++i) {
        out.data[i] = binary_entropy(static_cast<double>(objectness.data[i]), base);
    }
    return out;
}

EnhancedFeature enhance(const FrameRecord& frame, EntropyBase base) {
    const auto& f = frame.feature_map;
    const auto& obj = frame.objectness_map;
    if (obj.height != f.height || obj.width != f.width) {
        throw DataError("enhance: objectness and feature maps differ in spatial shape");
    }
    const Map2 obj_max = channel_max(obj);
    const Map2 ent_max = channel_max(entropy_map(obj, base));

    EnhancedFeature e;
    e.attention = Map2{f.height, f.width, std::vector<double>(f.plane())};
    for (std::size_t i = 0; i < f.plane(); ++i) {
        e.attention.data[i] = 1.0 + (obj_max.data[i] + ent_max.data[i]) / 2.0;
    }
    e.map = Tensor3d(f.channels, f.height, f.width);
    for (std::size_t c = 0; c < f.channels; ++c) {
        const std::size_t off = c * f.plane();
        for (std::size_t i = 0; i < f.plane(); ++i) {
            e.map.data[off + i] = e.attention.data[i] * static_cast<double>(f.data[off + i]);
        }
    }
    return e;
}

SceneVector pool(const EnhancedFeature& e) {
    const auto& m = e.map;
    SceneVector v{std::vector<double>(m.channels, 0.0)};
    if (m.plane() == 0) return v;
    for (std::size_t c = 0; c < m.channels; ++c) {
        double sum = 0.0;
        const std::size_t off = c * m.plane();
        for (std::size_t i = 0; i < m.plane(); ++i) sum += m.data[off + i];
        v.values[c] = sum / static_cast<double>(m.plane());
    }
    return v;
}

} // namespace bi3d::scoring
