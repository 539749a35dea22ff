#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bi3d/target_sampler.hpp"
#include "reference_banks.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace bi3d;
using namespace bi3d::target_sampler;
using bi3d::testing::roi_frame;

namespace {

std::vector<ReweightedROI> rois_from(const std::vector<std::vector<double>>& vs) {
    std::vector<ReweightedROI> out;
    for (std::size_t i = 0; i < vs.size(); ++i) out.push_back(ReweightedROI{bi3d::testing::padded_id("f", i), vs[i]});
    return out;
}

std::vector<std::pair<std::string, std::vector<double>>> as_pairs(const std::vector<ReweightedROI>& rois) {
    std::vector<std::pair<std::string, std::vector<double>>> out;
    for (const auto& r : rois) out.emplace_back(r.frame_id, r.vector);
    return out;
}

bool same_banks(const BankSet& got, const std::vector<reference::Bank>& want) {
    if (got.banks.size() != want.size()) return false;
    for (std::size_t m = 0; m < want.size(); ++m) {
        if (got.banks[m].members != want[m].P || got.banks[m].prototype != want[m].c) return false;
    }
    return true;
}

} // namespace

TEST_CASE("reweight examples") {
    CHECK(reweight(roi_frame("a", Domain::Target, {{1, 2}}, {1.0f}), 2).vector == std::vector<double>{1, 2});
    CHECK(reweight(roi_frame("a", Domain::Target, {{1, 0}, {0, 1}}, {0.5f, 0.5f}), 2).vector ==
          std::vector<double>{0.5, 0.5});
    CHECK(reweight(roi_frame("a", Domain::Target, {{2, 0}, {0, 4}}, {0.25f, 0.5f}), 2).vector ==
          std::vector<double>{0.5, 2.0});
    CHECK(reweight(roi_frame("a", Domain::Target, {}, {}), 3).vector == std::vector<double>{0, 0, 0});
    CHECK_THROWS_AS(reweight(roi_frame("a", Domain::Target, {{1, 2}, {1, 2, 3}}, {1.0f, 1.0f}), 2), DataError);
}

TEST_CASE("infer_roi_dim") {
    std::vector<FrameRecord> frames{roi_frame("a", Domain::Target, {}, {}),
                                    roi_frame("b", Domain::Target, {{1, 2, 3}}, {1.0f})};
    CHECK(infer_roi_dim(frames) == 3);
    CHECK(infer_roi_dim(std::span<const FrameRecord>(frames.data(), 1)) == 1);
    frames.push_back(roi_frame("c", Domain::Target, {{1, 2}}, {1.0f}));
    CHECK_THROWS_AS(infer_roi_dim(frames), DataError);
}

TEST_CASE("cosine examples") {
    const std::vector<double> u{0.3, -1.2, 2.0};
    CHECK(cosine(u, u) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
    CHECK(cosine(std::vector<double>{1, 1}, std::vector<double>{1, 0}) == doctest::Approx(std::sqrt(2.0) / 2.0));
    CHECK(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0}) == 0.0);
    CHECK(cosine(std::vector<double>{1e-13, 0}, std::vector<double>{1, 0}) == 0.0);
    CHECK_THROWS_AS(cosine(std::vector<double>{1, 0}, std::vector<double>{1, 0, 0}), DataError);
}

TEST_CASE("merge_banks examples") {
    const SimilarityBank a{{1, 0}, {"a1", "a2"}};
    const SimilarityBank b{{4, 3}, {"b1"}};
    const auto m = merge_banks(a, b);
    CHECK(m.prototype == std::vector<double>{2, 1});
    CHECK(m.count() == 3);
    CHECK(m.members == std::vector<std::string>{"a1", "a2", "b1"});

    const SimilarityBank c{{0.3, -0.7}, {"x", "y"}};
    CHECK(merge_banks(c, SimilarityBank{{0.3, -0.7}, {"z", "w"}}).prototype == c.prototype);
    CHECK(merge_banks(SimilarityBank{{0, 2}, {"p"}}, SimilarityBank{{2, 0}, {"q"}}).prototype ==
          std::vector<double>{1, 1});
    CHECK_THROWS_AS(merge_banks(a, SimilarityBank{{1, 2, 3}, {"z"}}), DataError);
}

TEST_CASE("build_banks examples") {
    SUBCASE("under capacity every frame founds a bank") {
        const auto rois = rois_from({{1, 2}, {3, -1}});
        const auto set = build_banks(rois, 2);
        REQUIRE(set.banks.size() == 2);
        CHECK(set.banks[0].prototype == rois[0].vector);
        CHECK(set.banks[1].prototype == rois[1].vector);
    }
    SUBCASE("a close frame joins without moving the prototype") {
        const double n = std::hypot(0.99, 0.14);
        const auto rois = rois_from({{1, 0}, {0, 1}, {0.99 / n, 0.14 / n}});
        const auto set = build_banks(rois, 2);
        REQUIRE(set.banks.size() == 2);
        CHECK(set.banks[0].members == std::vector<std::string>{"f0000", "f0002"});
        CHECK(set.banks[0].prototype == std::vector<double>{1, 0});
    }
    SUBCASE("a frame unlike every prototype forces a merge") {
        // prototypes [1,0] and [0.8,0.6] are close; [-1,0] is far from both
        const auto rois = rois_from({{1, 0}, {0.8, 0.6}, {0, 1}, {-1, -0.1}});
        const auto set = build_banks(rois, 3);
        REQUIRE(set.banks.size() == 3);
        CHECK(set.banks[0].members == std::vector<std::string>{"f0000", "f0001"});
        CHECK(set.banks[0].prototype[0] == doctest::Approx(0.9));
        CHECK(set.banks[0].prototype[1] == doctest::Approx(0.3));
        CHECK(set.banks[2].members == std::vector<std::string>{"f0003"});
    }
    SUBCASE("capacity one never merges") {
        const auto rois = rois_from({{1, 0}, {-1, 0}, {0, 1}});
        const auto set = build_banks(rois, 1);
        REQUIRE(set.banks.size() == 1);
        CHECK(set.banks[0].count() == 3);
    }
    SUBCASE("empty input and zero capacity") {
        CHECK(build_banks({}, 3).banks.empty());
        CHECK_THROWS_AS(build_banks(rois_from({{1, 0}}), 0), DataError);
    }
    SUBCASE("prototype update on join") {
        BankOptions opt;
        opt.update_prototype_on_join = true;
        const auto set = build_banks(rois_from({{1, 0}, {0, 1}, {1, 0.2}}), 2, opt);
        CHECK(set.banks[0].prototype[0] == doctest::Approx(1.0));
        CHECK(set.banks[0].prototype[1] == doctest::Approx(0.1));
    }
}

TEST_CASE("select_targets examples") {
    BankSet singles{{SimilarityBank{{1}, {"a"}}, SimilarityBank{{1}, {"b"}}}, 2};
    CHECK(select_targets(singles, {{"a", 0.1}, {"b", 0.2}}) == std::vector<std::string>{"a", "b"});
    BankSet one{{SimilarityBank{{1}, {"a", "b"}}}, 1};
    CHECK(select_targets(one, {{"a", 0.3}, {"b", 0.9}}) == std::vector<std::string>{"b"});
    BankSet tie{{SimilarityBank{{1}, {"d", "c"}}, SimilarityBank{{1}, {"a"}}}, 2};
    CHECK(select_targets(tie, {{"a", 0.5}, {"c", 0.7}, {"d", 0.7}}) == std::vector<std::string>{"c", "a"});
    CHECK_THROWS_AS(select_targets(one, {{"a", 0.3}}), DataError);
}

TEST_CASE("agreement with the reference transcription on a value grid") {
    const double grid[3] = {-1.0, 0.0, 1.0};
    Rng rng(2024);
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t n = uniform_index(rng, 9);
        const std::size_t d = 1 + uniform_index(rng, 3);
        const std::size_t b = 1 + uniform_index(rng, 3);
        std::vector<std::vector<double>> vs(n, std::vector<double>(d));
        for (auto& v : vs) {
            for (auto& x : v) x = grid[uniform_index(rng, 3)];
        }
        const auto rois = rois_from(vs);
        const bool variant = uniform_index(rng, 2) == 1;
        BankOptions opt;
        opt.criterion = variant ? MergeCriterion::MaxPairwise : MergeCriterion::MinPairwise;
        const auto want = reference::banks(as_pairs(rois), b, variant);
        const auto got = build_banks(rois, b, opt);
        CHECK(same_banks(got, want));

        std::map<std::string, double> s;
        for (const auto& r : rois) s[r.frame_id] = 0.25 * static_cast<double>(uniform_index(rng, 4));
        if (n > 0) CHECK(select_targets(got, s) == reference::pick(want, s));
    }
}

TEST_CASE("bank invariants hold at every step") {
    Rng rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = uniform_index(rng, 40);
        const std::size_t b = 1 + uniform_index(rng, 6);
        std::vector<std::vector<double>> vs(n, std::vector<double>(3));
        for (auto& v : vs) {
            for (auto& x : v) x = standard_normal(rng);
        }
        const auto rois = rois_from(vs);
        std::size_t step = 0;
        const auto set = build_banks(rois, b, {}, [&](const BankSet& s) {
            ++step;
            CHECK(s.banks.size() <= b);
            std::multiset<std::string> seen;
            for (const auto& bank : s.banks) seen.insert(bank.members.begin(), bank.members.end());
            CHECK(seen.size() == step);
            std::set<std::string> unique(seen.begin(), seen.end());
            CHECK(unique.size() == step);
            for (std::size_t i = 0; i < step; ++i) CHECK(unique.count(rois[i].frame_id) == 1);
        });
        CHECK(step == n);
        std::map<std::string, double> scores;
        for (const auto& r : rois) scores[r.frame_id] = uniform01(rng);
        CHECK(select_round(rois, scores, b).selected.size() == std::min(b, n));
    }
}

TEST_CASE("merged prototypes are founder means") {
    Rng rng(17);
    std::vector<SimilarityBank> banks;
    std::map<std::string, std::vector<double>> founder;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> v(4);
        for (auto& x : v) x = standard_normal(rng);
        const auto id = bi3d::testing::padded_id("f", i);
        founder[id] = v;
        banks.push_back(SimilarityBank{v, {id}});
    }
    while (banks.size() > 1) {
        const std::size_t i = uniform_index(rng, banks.size());
        std::size_t j = uniform_index(rng, banks.size() - 1);
        if (j >= i) ++j;
        banks[std::min(i, j)] = merge_banks(banks[i], banks[j]);
        banks.erase(banks.begin() + static_cast<long>(std::max(i, j)));
        for (const auto& bank : banks) {
            for (std::size_t k = 0; k < 4; ++k) {
                double mean = 0.0;
                for (const auto& id : bank.members) mean += founder[id][k];
                mean /= static_cast<double>(bank.count());
                CHECK(std::abs(bank.prototype[k] - mean) <= 1e-9);
            }
        }
    }
}

TEST_CASE("sample_round") {
    Rng rng(4);
    std::vector<FrameRecord> frames;
    for (int i = 0; i < 50; ++i) {
        frames.push_back(bi3d::testing::random_frame(rng, bi3d::testing::padded_id("t", 49 - i), Domain::Target));
    }
    const DiscriminatorModel model({4, 6, 1}, 0.01, 5);

    SUBCASE("budget at least the pool selects everything") {
        const std::span<const FrameRecord> few(frames.data(), 4);
        const auto r = sample_round(few, model, 4);
        CHECK(std::set<std::string>(r.selected.begin(), r.selected.end()).size() == 4);
        CHECK(sample_round(few, model, 10).selected.size() == 4);
    }
    SUBCASE("empty pool and zero budget") {
        CHECK(sample_round({}, model, 3).selected.empty());
        CHECK(sample_round(frames, model, 0).selected.empty());
    }
    SUBCASE("matches the reference pipeline") {
        std::vector<const FrameRecord*> order;
        for (const auto& f : frames) order.push_back(&f);
        std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id < b->id; });
        std::vector<std::pair<std::string, std::vector<double>>> summaries;
        std::map<std::string, double> s;
        for (const auto* f : order) {
            std::vector<double> v(3, 0.0);
            for (std::size_t m = 0; m < f->roi_features.size(); ++m) {
                for (std::size_t i = 0; i < 3; ++i) v[i] += f->roi_confidences[m] * static_cast<double>(f->roi_features[m][i]);
            }
            summaries.emplace_back(f->id, v);
            s[f->id] = domainness(model, *f).value;
        }
        const auto want = reference::pick(reference::banks(summaries, 5, true), s);
        CHECK(sample_round(frames, model, 5).selected == want);
    }
    SUBCASE("source frames are rejected") {
        frames[3].domain = Domain::Source;
        CHECK_THROWS_AS(sample_round(frames, model, 3), DataError);
    }
}
