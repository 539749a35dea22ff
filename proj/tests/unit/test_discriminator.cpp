#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bi3d/discriminator.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace bi3d;

namespace {

DiscriminatorModel tiny_model() {
    // 1 -> 1 -> 1; the hidden unit passes non-negative inputs through unchanged.
    std::vector<DenseLayer> layers{DenseLayer{1, 1, {1.0}, {0.0}}, DenseLayer{1, 1, {2.0}, {0.0}}};
    return DiscriminatorModel::from_layers(std::move(layers), 0.01, 0);
}

std::vector<scoring::SceneVector> gaussian_cloud(Rng& rng, std::size_t n, std::size_t dim, double center) {
    std::vector<scoring::SceneVector> out(n);
    for (auto& v : out) {
        v.values.resize(dim);
        for (auto& x : v.values) x = standard_normal(rng);
        v.values[0] += center;
    }
    return out;
}

} // namespace

TEST_CASE("forward of an all-zero model is one half") {
    const auto m = DiscriminatorModel::zeros({4, 8, 3, 1});
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = standard_normal(rng) * 10;
        CHECK(m.forward(x) == 0.5);
    }
}

TEST_CASE("forward of a tiny model") {
    const auto m = tiny_model();
    CHECK(m.forward(std::vector<double>{0.0}) == 0.5);
    // sigmoid(2), 30 significant digits from mpmath
    CHECK(m.forward(std::vector<double>{1.0}) == doctest::Approx(0.880797077977882444).epsilon(1e-15));
    CHECK(m.logit(std::vector<double>{1.0}) == 2.0);
}

TEST_CASE("forward clamps to [eps, 1 - eps]") {
    std::vector<DenseLayer> layers{DenseLayer{1, 1, {1.0}, {0.0}}, DenseLayer{1, 1, {100.0}, {0.0}}};
    const auto m = DiscriminatorModel::from_layers(std::move(layers), 0.01, 0);
    CHECK(m.forward(std::vector<double>{1.0}) == 1.0 - DiscriminatorModel::kOutputEpsilon);
    CHECK(m.forward(std::vector<double>{-100.0}) > 0.0);
}

TEST_CASE("forward rejects a dimension mismatch") {
    const auto m = DiscriminatorModel::zeros({3, 4, 1});
    CHECK_THROWS_AS(m.forward(std::vector<double>{1.0, 2.0}), DataError);
}

TEST_CASE("model construction checks shapes") {
    CHECK_THROWS_AS(DiscriminatorModel({3, 1}, 0.01, 0), DataError);
    CHECK_THROWS_AS(DiscriminatorModel({3, 4, 2}, 0.01, 0), DataError);
    CHECK_THROWS_AS(DiscriminatorModel({3, 4, 1}, 0.0, 0), DataError);
    CHECK_THROWS_AS(DiscriminatorModel::from_layers({DenseLayer{2, 2, {1, 2, 3}, {0, 0}}, DenseLayer{2, 1, {1, 1}, {0}}},
                                                    0.01, 0),
                    DataError);
}

TEST_CASE("Glorot initialisation bounds and seeding") {
    const DiscriminatorModel a({8, 64, 32, 1}, 0.01, 42);
    const DiscriminatorModel b({8, 64, 32, 1}, 0.01, 42);
    const DiscriminatorModel c({8, 64, 32, 1}, 0.01, 43);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    for (const auto& layer : a.layers()) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
        for (double w : layer.weights) CHECK(std::abs(w) <= limit);
        for (double bias : layer.biases) CHECK(bias == 0.0);
    }
}

TEST_CASE("bce loss examples") {
    const double eps = DiscriminatorModel::kOutputEpsilon;
    CHECK(bce_loss(std::vector<double>{0.5, 0.5}, std::vector<int>{0, 1}) == doctest::Approx(std::log(2.0)));
    CHECK(bce_loss(std::vector<double>{eps, 1.0 - eps}, std::vector<int>{0, 1}) <= 1e-6);
    // -ln(0.1), mpmath
    CHECK(bce_loss(std::vector<double>{0.9}, std::vector<int>{0}) == doctest::Approx(2.30258509299404568).epsilon(1e-14));
}

TEST_CASE("bce loss errors") {
    CHECK_THROWS_AS(bce_loss(std::vector<double>{}, std::vector<int>{}), DataError);
    CHECK_THROWS_AS(bce_loss(std::vector<double>{0.5}, std::vector<int>{0, 1}), DataError);
    CHECK_THROWS_AS(bce_loss(std::vector<double>{0.5}, std::vector<int>{2}), DataError);
}

TEST_CASE("bce loss label-swap symmetry") {
    // Dyadic predictions make 1 - p exact, so the symmetry holds bit for bit.
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + uniform_index(rng, 20);
        std::vector<double> p(n), q(n);
        std::vector<int> y(n), z(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = static_cast<double>(1 + uniform_index(rng, 1023)) / 1024.0;
            q[i] = 1.0 - p[i];
            y[i] = static_cast<int>(uniform_index(rng, 2));
            z[i] = 1 - y[i];
        }
        CHECK(bce_loss(p, y) == bce_loss(q, z));
    }
}

TEST_CASE("analytic gradient matches central differences") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t in = 1 + uniform_index(rng, 8);
        const std::size_t hidden = 1 + uniform_index(rng, 4);
        const DiscriminatorModel model({in, hidden, 1}, 0.01, 100 + trial);
        std::vector<std::vector<double>> xs(16, std::vector<double>(in));
        std::vector<int> ys(16);
        for (std::size_t i = 0; i < 16; ++i) {
            for (auto& v : xs[i]) v = standard_normal(rng);
            ys[i] = static_cast<int>(i % 2);
        }
        std::vector<double> grad;
        model.loss_and_gradient(xs, ys, 1e-3, &grad);
        auto params = model.parameters();
        REQUIRE(grad.size() == params.size());
        auto probe = model;
        const double h = 1e-5;
        for (std::size_t k = 0; k < params.size(); ++k) {
            auto p = params;
            p[k] += h;
            probe.set_parameters(p);
            const double up = probe.loss_and_gradient(xs, ys, 1e-3, nullptr);
            p[k] -= 2 * h;
            probe.set_parameters(p);
            const double down = probe.loss_and_gradient(xs, ys, 1e-3, nullptr);
            const double numeric = (up - down) / (2 * h);
            const double scale = std::max({std::abs(numeric), std::abs(grad[k]), 1e-6});
            CHECK(std::abs(numeric - grad[k]) / scale <= 1e-4);
        }
    }
}

TEST_CASE("loss includes the L2 penalty on weights only") {
    const DiscriminatorModel m({2, 3, 1}, 0.01, 5);
    std::vector<std::vector<double>> xs{{0.3, -0.2}, {1.0, 0.5}};
    std::vector<int> ys{0, 1};
    const double plain = m.loss_and_gradient(xs, ys, 0.0, nullptr);
    const double l2 = 0.1;
    double sq = 0.0;
    for (const auto& layer : m.layers()) {
        for (double w : layer.weights) sq += w * w;
    }
    CHECK(m.loss_and_gradient(xs, ys, l2, nullptr) == doctest::Approx(plain + 0.5 * l2 * sq).epsilon(1e-14));
}

TEST_CASE("training separates two Gaussian clouds") {
    Rng rng(7);
    const auto src = gaussian_cloud(rng, 200, 4, -3.0);
    const auto tgt = gaussian_cloud(rng, 200, 4, 3.0);
    const DiscriminatorModel init({4, 16, 8, 1}, 0.01, 1);
    TrainConfig cfg;
    cfg.epochs = 150;
    cfg.seed = 2;
    const auto result = train(init, src, tgt, cfg);
    REQUIRE(result.loss_history.size() == 150);
    CHECK(result.loss_history.back() < 0.1);
    CHECK(result.loss_history.back() < result.loss_history.front());

    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& v : gaussian_cloud(rng, 100, 4, -3.0)) {
        scores.push_back(result.model.forward(v));
        labels.push_back(0);
    }
    for (const auto& v : gaussian_cloud(rng, 100, 4, 3.0)) {
        scores.push_back(result.model.forward(v));
        labels.push_back(1);
    }
    CHECK(roc_auc(scores, labels) >= 0.99);

    SUBCASE("exemplars score on the right side of one half") {
        CHECK(result.model.forward(tgt.front()) > 0.5);
        CHECK(result.model.forward(src.front()) < 0.5);
    }
}

TEST_CASE("identical domains stay at chance") {
    Rng rng(3);
    const auto both = gaussian_cloud(rng, 100, 3, 0.0);
    TrainConfig cfg;
    cfg.epochs = 100;
    const auto result = train(DiscriminatorModel({3, 8, 1}, 0.01, 4), both, both, cfg);
    CHECK(result.loss_history.back() >= std::log(2.0) - 0.05);
}

TEST_CASE("zero epochs leave the model untouched") {
    Rng rng(3);
    const auto a = gaussian_cloud(rng, 10, 3, 0.0);
    const DiscriminatorModel m({3, 4, 1}, 0.01, 4);
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto result = train(m, a, a, cfg);
    CHECK(result.model == m);
    CHECK(result.loss_history.empty());
}

TEST_CASE("training is bit-deterministic") {
    Rng rng(12);
    const auto a = gaussian_cloud(rng, 40, 3, -1.0);
    const auto b = gaussian_cloud(rng, 40, 3, 1.0);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.seed = 77;
    const DiscriminatorModel m({3, 5, 1}, 0.01, 4);
    const auto r1 = train(m, a, b, cfg);
    const auto r2 = train(m, a, b, cfg);
    CHECK(r1.model == r2.model);
    CHECK(r1.loss_history == r2.loss_history);
}

TEST_CASE("training rejects bad input") {
    Rng rng(1);
    const auto a = gaussian_cloud(rng, 5, 3, 0.0);
    const auto wrong = gaussian_cloud(rng, 5, 2, 0.0);
    const DiscriminatorModel m({3, 4, 1}, 0.01, 4);
    TrainConfig cfg;
    CHECK_THROWS_AS(train(m, a, wrong, cfg), DataError);
    CHECK_THROWS_AS(train(m, a, {}, cfg), DataError);
    cfg.learning_rate = -1.0;
    CHECK_THROWS_AS(train(m, a, a, cfg), DataError);
}

TEST_CASE("divergence raises a numerical error") {
    std::vector<scoring::SceneVector> a{{{1.0, 0.5}}, {{0.2, -0.3}}}, b{{{-1.0, 0.4}}, {{0.1, 0.9}}};
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.learning_rate = 1e30;
    CHECK_THROWS_AS(train(DiscriminatorModel({2, 4, 1}, 0.01, 1), a, b, cfg), NumericalError);
}

TEST_CASE("domainness of a zero model is one half for any frame") {
    Rng rng(2);
    const auto m = DiscriminatorModel::zeros({4, 8, 1});
    for (int i = 0; i < 10; ++i) {
        const auto f = bi3d::testing::random_frame(rng, "f" + std::to_string(i), Domain::Target);
        const auto s = domainness(m, f);
        CHECK(s.frame_id == f.id);
        CHECK(s.value == 0.5);
    }
}

TEST_CASE("ranking by probability equals ranking by logit") {
    Rng rng(6);
    const DiscriminatorModel m({4, 6, 1}, 0.01, 8);
    std::vector<double> probs, logits;
    for (int i = 0; i < 200; ++i) {
        const auto f = bi3d::testing::random_frame(rng, "f", Domain::Target);
        const auto v = scoring::scene_vector(f);
        probs.push_back(m.forward(v));
        logits.push_back(m.logit(v.values));
    }
    std::vector<std::size_t> a(probs.size()), b(probs.size());
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    std::stable_sort(a.begin(), a.end(), [&](auto i, auto j) { return probs[i] > probs[j]; });
    std::stable_sort(b.begin(), b.end(), [&](auto i, auto j) { return logits[i] > logits[j]; });
    CHECK(a == b);
}

TEST_CASE("roc auc") {
    CHECK(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}) == 1.0);
    CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{0, 0, 1, 1}) == 0.0);
    CHECK(roc_auc(std::vector<double>{0.5, 0.5}, std::vector<int>{0, 1}) == 0.5);
    CHECK_THROWS_AS(roc_auc(std::vector<double>{0.5}, std::vector<int>{1}), DataError);
}
