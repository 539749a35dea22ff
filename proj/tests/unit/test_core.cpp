#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bi3d/core.hpp"
#include "bi3d/label_access.hpp"
#include "bi3d/random.hpp"
#include "support.hpp"

#include <algorithm>

using namespace bi3d;
using bi3d::testing::blank_frame;

namespace {

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
    return std::any_of(problems.begin(), problems.end(),
                       [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

} // namespace

TEST_CASE("validate_frame flags objectness above one") {
    auto f = blank_frame("a", Domain::Source);
    f.objectness_map.data[1] = 1.3f;
    const auto problems = validate_frame(f);
    REQUIRE_FALSE(problems.empty());
    CHECK(mentions(problems, "objectness out of [0,1]"));
}

TEST_CASE("validate_frame accepts a frame without ROIs") {
    CHECK(validate_frame(blank_frame("a", Domain::Target)).empty());
}

TEST_CASE("validate_frame flags ROI/confidence count mismatch") {
    auto f = blank_frame("a", Domain::Source);
    f.roi_features = {{1, 2}, {3, 4}, {5, 6}};
    f.roi_confidences = {0.5f, 0.5f};
    CHECK(mentions(validate_frame(f), "roi length mismatch"));
}

TEST_CASE("validate_frame reports every violation at once") {
    auto f = blank_frame("", Domain::Source);
    f.objectness_map.data[0] = -0.1f;
    f.feature_map.data.pop_back();
    f.roi_features = {{1, 2}};
    const auto problems = validate_frame(f);
    CHECK(problems.size() >= 3);
}

TEST_CASE("validate_frame rejects non-finite features and bad confidences") {
    auto f = blank_frame("a", Domain::Source);
    f.feature_map.data[0] = std::numeric_limits<float>::quiet_NaN();
    CHECK_FALSE(validate_frame(f).empty());
    auto g = blank_frame("b", Domain::Source);
    g.roi_features = {{1, 2}};
    g.roi_confidences = {1.5f};
    CHECK_FALSE(validate_frame(g).empty());
}

TEST_CASE("validate_frame is pure") {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        auto f = bi3d::testing::random_frame(rng, "f", Domain::Source);
        if (i % 3 == 0) f.objectness_map.data[0] = 2.0f;
        const auto copy = f;
        const auto a = validate_frame(f);
        const auto b = validate_frame(f);
        CHECK(a == b);
        CHECK(f == copy);
    }
}

TEST_CASE("domain names round trip") {
    CHECK(to_string(Domain::Source) == "source");
    CHECK(to_string(Domain::Target) == "target");
    CHECK(domain_from_string("source") == Domain::Source);
    CHECK(domain_from_string("target") == Domain::Target);
    CHECK_THROWS_AS(domain_from_string("Target"), DataError);
}

TEST_CASE("budget schedules") {
    SUBCASE("equal split gives the remainder to early rounds") {
        const auto s = BudgetSchedule::equal_split(20, {0, 2, 4});
        CHECK(s.per_round == std::vector<std::size_t>{7, 7, 6});
        CHECK(s.total_budget() == 20);
        CHECK(s.rounds() == 3);
    }
    SUBCASE("budget below the round count is rejected") {
        CHECK_THROWS_AS(BudgetSchedule::equal_split(1, {0, 5}), DataError);
    }
    SUBCASE("no rounds") {
        const auto s = BudgetSchedule::equal_split(0, {});
        CHECK(s.rounds() == 0);
        CHECK_NOTHROW(s.validate());
    }
    SUBCASE("malformed schedules") {
        CHECK_THROWS_AS((BudgetSchedule{{5, 5}, {0}}.validate()), DataError);
        CHECK_THROWS_AS((BudgetSchedule{{5, 0}, {0, 1}}.validate()), DataError);
        CHECK_THROWS_AS((BudgetSchedule{{5, 5}, {3, 3}}.validate()), DataError);
    }
}

TEST_CASE("sorted_by_id orders lexicographically") {
    std::vector<FrameRecord> frames{blank_frame("b", Domain::Source), blank_frame("a10", Domain::Source),
                                    blank_frame("a2", Domain::Source)};
    const auto sorted = sorted_by_id(frames);
    REQUIRE(sorted.size() == 3);
    CHECK(sorted[0]->id == "a10");
    CHECK(sorted[1]->id == "a2");
    CHECK(sorted[2]->id == "b");
}

TEST_CASE("hidden labels are opaque outside LabelAccess") {
    auto f = blank_frame("a", Domain::Target);
    CHECK_FALSE(f.hidden_label.present());
    f.hidden_label = HiddenLabel("3");
    CHECK(f.hidden_label.present());
    CHECK(LabelAccess::reveal(f).value() == "3");
    LabelAccess::strip(f);
    CHECK_FALSE(f.hidden_label.present());
}

TEST_CASE("portable random helpers") {
    SUBCASE("uniform01 stays in [0,1)") {
        Rng rng(1);
        for (int i = 0; i < 10000; ++i) {
            const double u = uniform01(rng);
            CHECK((u >= 0.0 && u < 1.0));
        }
    }
    SUBCASE("uniform_index covers its range") {
        Rng rng(2);
        std::vector<int> hits(7, 0);
        for (int i = 0; i < 7000; ++i) ++hits[uniform_index(rng, 7)];
        for (int h : hits) CHECK(h > 800);
    }
    SUBCASE("standard_normal moments") {
        Rng rng(4);
        double s = 0.0, s2 = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double z = standard_normal(rng);
            s += z;
            s2 += z * z;
        }
        CHECK(std::abs(s / n) < 0.02);
        CHECK(std::abs(s2 / n - 1.0) < 0.03);
    }
    SUBCASE("shuffle is a permutation") {
        Rng rng(5);
        std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
        shuffle(v, rng);
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    }
    SUBCASE("derived seeds differ per stream") {
        CHECK(derive_seed(1, 0) != derive_seed(1, 1));
        CHECK(derive_seed(1, 0) != derive_seed(2, 0));
        CHECK(derive_seed(7, 3) == derive_seed(7, 3));
    }
}
