#include "memexplain/agreement.hpp"
#include "memexplain/error.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace memexplain;

namespace {

AnnotationRating rating(const std::string& item, const std::string& who, int f, int c, int p, int i) {
    return {item, who,
            {{LikertMetric::faithfulness, f},
             {LikertMetric::clarity, c},
             {LikertMetric::plausibility, p},
             {LikertMetric::informativeness, i}}};
}

}  // namespace

TEST(Agreement, MaxVarianceAndRwgReferenceValues) {
    EXPECT_DOUBLE_EQ(max_variance({1, 5}), 4.0);
    EXPECT_DOUBLE_EQ(rwg_star(std::vector<int>{4, 4, 4}), 1.0);
    EXPECT_DOUBLE_EQ(rwg_star(std::vector<int>{3, 4, 5}), 0.75);
    EXPECT_DOUBLE_EQ(rwg_star(std::vector<int>{1, 5}), -1.0);
    EXPECT_DOUBLE_EQ(rwg_star(std::vector<int>{3, 4, 5}, {1, 5}, VarianceDenominator::population), 1.0 - (2.0 / 3) / 4);
    EXPECT_THROW(rwg_star(std::vector<int>{3}), ValidationError);
    EXPECT_THROW(rwg_star(std::vector<int>{0, 3}), ValidationError);
}

TEST(Agreement, RatingValidationNamesField) {
    json j = to_json(rating("a", "x", 1, 2, 3, 4));
    EXPECT_EQ(rating_from_json(j), rating("a", "x", 1, 2, 3, 4));
    j["scores"]["clarity"] = 6;
    try {
        rating_from_json(j);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "scores.clarity");
    }
    j["scores"].erase("clarity");
    EXPECT_THROW(rating_from_json(j), ValidationError);
}

TEST(Agreement, AggregateSmallCase) {
    const std::vector<AnnotationRating> rs{rating("a", "x", 4, 3, 1, 5), rating("a", "y", 4, 4, 5, 5),
                                           rating("a", "z", 4, 5, 3, 5), rating("b", "x", 2, 2, 2, 2)};
    const auto rep = aggregate(rs);
    EXPECT_EQ(rep.items, 2u);
    EXPECT_EQ(rep.complete_items, 1u);
    EXPECT_EQ(rep.incomplete_items, std::vector<std::string>{"b"});
    EXPECT_DOUBLE_EQ(rep.metrics.at(LikertMetric::faithfulness).rwg_mean, 1.0);
    EXPECT_DOUBLE_EQ(rep.metrics.at(LikertMetric::clarity).rwg_mean, 0.75);
    EXPECT_DOUBLE_EQ(rep.metrics.at(LikertMetric::plausibility).rwg_mean, 0.0);
    EXPECT_DOUBLE_EQ(rep.metrics.at(LikertMetric::clarity).mean, 4.0);
    const auto j = to_json(rep);
    EXPECT_EQ(j["columns"], json({"faithfulness", "clarity", "plausibility", "informativeness"}));
}

TEST(Agreement, NegativeRwgCountedNotTruncated) {
    const std::vector<AnnotationRating> rs{rating("a", "x", 1, 1, 1, 1), rating("a", "y", 5, 5, 5, 5),
                                           rating("a", "z", 1, 1, 1, 1)};
    const auto rep = aggregate(rs);
    EXPECT_LT(rep.metrics.at(LikertMetric::faithfulness).rwg_mean, 0.0);
    EXPECT_EQ(rep.metrics.at(LikertMetric::faithfulness).negative_rwg, 1u);
}

TEST(Agreement, AggregateErrors) {
    EXPECT_THROW(aggregate({}), ValidationError);
    const std::vector<AnnotationRating> dup{rating("a", "x", 1, 1, 1, 1), rating("a", "x", 2, 2, 2, 2)};
    EXPECT_THROW(aggregate(dup), RecordError);
    const std::vector<AnnotationRating> lonely{rating("a", "x", 1, 1, 1, 1)};
    EXPECT_THROW(aggregate(lonely), ValidationError);
}

TEST(Agreement, RandomItemsMatchBruteForce) {
    std::mt19937_64 rng(9);
    std::vector<AnnotationRating> rs;
    std::map<LikertMetric, std::vector<std::vector<int>>> per_metric;
    for (int item = 0; item < 50; ++item) {
        std::map<LikertMetric, std::vector<int>> cols;
        for (int a = 0; a < 3; ++a) {
            AnnotationRating r{"i" + std::to_string(item), "a" + std::to_string(a), {}};
            for (auto m : kLikertMetrics) {
                r.scores[m] = 1 + static_cast<int>(rng() % 5);
                cols[m].push_back(r.scores[m]);
            }
            rs.push_back(r);
        }
        for (auto& [m, v] : cols) per_metric[m].push_back(v);
    }
    std::shuffle(rs.begin(), rs.end(), rng);
    const auto rep = aggregate(rs);
    for (auto m : kLikertMetrics) {
        double rwg = 0, mean = 0;
        for (const auto& v : per_metric[m]) {
            rwg += testsupport::brute_rwg(v);
            mean += (v[0] + v[1] + v[2]) / 3.0;
        }
        EXPECT_NEAR(rep.metrics.at(m).rwg_mean, rwg / 50, 1e-12);
        EXPECT_NEAR(rep.metrics.at(m).mean, mean / 50, 1e-12);
    }
}
