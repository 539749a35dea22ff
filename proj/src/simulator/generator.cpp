#include "bi3d/random.hpp"
#include "bi3d/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace bi3d::simulator {
namespace {

std::vector<double> gaussian_vector(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    for (auto& x : v) x = standard_normal(rng);
    return v;
}

std::vector<double> unit_vector(Rng& rng, std::size_t dim) {
    for (;;) {
        auto v = gaussian_vector(rng, dim);
        double n = 0.0;
        for (double x : v) n += x * x;
        n = std::sqrt(n);
        if (n > 1e-9) {
            for (auto& x : v) x /= n;
            return v;
        }
    }
}

// k unit vectors with pairwise cosine -1/(k-1), a regular simplex in random
// orientation: an orthonormal k-frame with its mean removed. Needs 2 <= k <= dim.
std::vector<std::vector<double>> simplex_directions(Rng& rng, std::size_t k, std::size_t dim) {
    std::vector<std::vector<double>> basis;
    while (basis.size() < k) {
        auto v = gaussian_vector(rng, dim);
        for (const auto& b : basis) {
            double dot = 0.0;
            for (std::size_t i = 0; i < dim; ++i) dot += v[i] * b[i];
            for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * b[i];
        }
        double n = 0.0;
        for (double x : v) n += x * x;
        n = std::sqrt(n);
        if (n < 1e-6) continue;
        for (auto& x : v) x /= n;
        basis.push_back(std::move(v));
    }
    std::vector<double> mean(dim, 0.0);
    for (const auto& b : basis) {
        for (std::size_t i = 0; i < dim; ++i) mean[i] += b[i] / static_cast<double>(k);
    }
    for (auto& b : basis) {
        double n = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            b[i] -= mean[i];
            n += b[i] * b[i];
        }
        n = std::sqrt(n);
        for (auto& x : b) x /= n;
    }
    return basis;
}

std::string frame_id(char prefix, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%07zu", prefix, index);
    return buf;
}

// Fixed per-dataset quantities shared by all splits.
struct World {
    std::vector<std::vector<double>> source_centroids;
    std::vector<std::vector<double>> target_centroids;
    std::vector<double> foreground_density;
    std::vector<double> projection; // C x d_roi
    std::vector<double> source_weights;
    std::vector<double> target_weights;
};

std::vector<double> cluster_weights(std::size_t k, double exponent, Rng& rng) {
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), exponent);
    shuffle(w, rng);
    double total = 0.0;
    for (double x : w) total += x;
    for (auto& x : w) x /= total;
    return w;
}

std::size_t draw_cluster(const std::vector<double>& weights, Rng& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        acc += weights[k];
        if (u < acc) return k;
    }
    return weights.size() - 1;
}

FrameRecord make_frame(const SyntheticConfig& cfg, const World& world, Domain domain, char prefix,
                       std::size_t index, Rng& rng) {
    const auto& dims = cfg.dims;
    const std::size_t d = dims.roi_dim;
    const auto& centroids = domain == Domain::Source ? world.source_centroids : world.target_centroids;
    const auto& weights = domain == Domain::Source ? world.source_weights : world.target_weights;
    const std::size_t cluster = draw_cluster(weights, rng);

    FrameRecord f;
    f.id = frame_id(prefix, index);
    f.domain = domain;

    std::vector<double> latent = centroids[cluster];
    for (auto& x : latent) x += cfg.scene_noise * standard_normal(rng);

    const std::size_t n_rois = 1 + static_cast<std::size_t>(uniform_index(rng, cfg.max_rois));
    for (std::size_t m = 0; m < n_rois; ++m) {
        std::vector<double> roi = latent;
        for (auto& x : roi) x += cfg.roi_noise * standard_normal(rng);
        double norm = 0.0;
        for (double x : roi) norm += x * x;
        norm = std::sqrt(norm);
        std::vector<float> stored(d);
        for (std::size_t i = 0; i < d; ++i) stored[i] = static_cast<float>(norm > 1e-12 ? roi[i] / norm : 0.0);
        f.roi_features.push_back(std::move(stored));
        f.roi_confidences.push_back(static_cast<float>(uniform(rng, 0.5, 1.0)));
    }

    f.objectness_map = Tensor3(dims.anchor_channels, dims.height, dims.width);
    std::vector<double> obj_max(dims.height * dims.width, 0.0);
    const double rho = world.foreground_density[cluster];
    for (std::size_t i = 0; i < dims.height * dims.width; ++i) {
        const bool foreground = uniform01(rng) < rho;
        for (std::size_t a = 0; a < dims.anchor_channels; ++a) {
            const double p = foreground ? uniform(rng, 0.6, 0.99) : uniform(rng, 0.0, 0.25);
            const float pf = static_cast<float>(p);
            f.objectness_map.data[a * dims.height * dims.width + i] = pf;
            obj_max[i] = std::max(obj_max[i], static_cast<double>(pf));
        }
    }

    std::vector<double> embedding(dims.channels, 0.0);
    for (std::size_t c = 0; c < dims.channels; ++c) {
        for (std::size_t i = 0; i < d; ++i) embedding[c] += world.projection[c * d + i] * latent[i];
        embedding[c] /= cfg.centroid_radius;
    }
    f.feature_map = Tensor3(dims.channels, dims.height, dims.width);
    for (std::size_t c = 0; c < dims.channels; ++c) {
        for (std::size_t i = 0; i < dims.height * dims.width; ++i) {
            const double v = embedding[c] * (0.5 + obj_max[i]) + cfg.feature_noise * standard_normal(rng);
            f.feature_map.data[c * dims.height * dims.width + i] = static_cast<float>(v);
        }
    }

    std::size_t label = cluster;
    if (cfg.label_noise > 0.0 && centroids.size() > 1 && uniform01(rng) < cfg.label_noise) {
        label = (cluster + 1 + uniform_index(rng, centroids.size() - 1)) % centroids.size();
    }
    f.hidden_label = HiddenLabel(std::to_string(label));
    return f;
}

} // namespace

void SyntheticConfig::validate() const {
    if (n_source == 0 || n_target == 0) throw DataError("synthetic config: n_source and n_target must be positive");
    if (clusters_per_domain == 0) throw DataError("synthetic config: clusters_per_domain must be positive");
    if (dims.channels == 0 || dims.height == 0 || dims.width == 0 || dims.anchor_channels == 0 || dims.roi_dim == 0) {
        throw DataError("synthetic config: feature dimensions must be positive");
    }
    if (!(domain_shift >= 0.0)) throw DataError("synthetic config: domain_shift must be non-negative");
    if (!(label_noise >= 0.0 && label_noise < 0.5)) throw DataError("synthetic config: label_noise must lie in [0,0.5)");
    if (!(centroid_radius > 0.0)) throw DataError("synthetic config: centroid_radius must be positive");
    if (!(roi_noise >= 0.0 && scene_noise >= 0.0 && feature_noise >= 0.0)) {
        throw DataError("synthetic config: noise levels must be non-negative");
    }
    if (!(imbalance >= 0.0)) throw DataError("synthetic config: imbalance must be non-negative");
    if (max_rois == 0) throw DataError("synthetic config: max_rois must be positive");
}

SyntheticData generate(const SyntheticConfig& cfg) {
    cfg.validate();
    const std::size_t k = cfg.clusters_per_domain;
    const std::size_t d = cfg.dims.roi_dim;

    Rng world_rng(derive_seed(cfg.seed, 0));
    World world;
    const bool simplex = cfg.spread_centroids && k >= 2 && k <= d;
    const auto directions = simplex ? simplex_directions(world_rng, k, d) : std::vector<std::vector<double>>{};
    for (std::size_t i = 0; i < k; ++i) {
        auto c = simplex ? directions[i] : unit_vector(world_rng, d);
        for (auto& x : c) x *= cfg.centroid_radius;
        world.source_centroids.push_back(c);
        const auto shift = unit_vector(world_rng, d);
        for (std::size_t j = 0; j < d; ++j) c[j] += cfg.domain_shift * shift[j];
        world.target_centroids.push_back(std::move(c));
        world.foreground_density.push_back(uniform(world_rng, 0.05, 0.35));
    }
    world.projection.resize(cfg.dims.channels * d);
    for (auto& x : world.projection) x = standard_normal(world_rng) / std::sqrt(static_cast<double>(d));
    world.source_weights = cluster_weights(k, cfg.imbalance, world_rng);
    world.target_weights = cluster_weights(k, cfg.imbalance, world_rng);

    SyntheticData data;
    data.source_centroids = world.source_centroids;
    data.target_centroids = world.target_centroids;

    Rng source_rng(derive_seed(cfg.seed, 1));
    Rng target_rng(derive_seed(cfg.seed, 2));
    Rng eval_rng(derive_seed(cfg.seed, 3));
    data.source.reserve(cfg.n_source);
    for (std::size_t i = 0; i < cfg.n_source; ++i) {
        data.source.push_back(make_frame(cfg, world, Domain::Source, 's', i, source_rng));
    }
    data.target.reserve(cfg.n_target);
    for (std::size_t i = 0; i < cfg.n_target; ++i) {
        data.target.push_back(make_frame(cfg, world, Domain::Target, 't', i, target_rng));
    }
    data.eval.reserve(cfg.n_eval);
    for (std::size_t i = 0; i < cfg.n_eval; ++i) {
        data.eval.push_back(make_frame(cfg, world, Domain::Target, 'e', i, eval_rng));
    }
    return data;
}

} // namespace bi3d::simulator
