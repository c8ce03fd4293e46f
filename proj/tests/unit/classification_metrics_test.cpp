#include "frozen_values.hpp"
#include "memexplain/classification_metrics.hpp"
#include "memexplain/error.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace memexplain;

TEST(ClassificationMetrics, SmallCaseMatchesFrozenReference) {
    const LabelSet ls{"ab", {"A", "B"}};
    const std::vector<std::string> preds{"A", "A", "B", "B"}, golds{"A", "B", "B", "B"};
    const auto m = classification_metrics(preds, golds, ls);
    EXPECT_NEAR(m.accuracy, frozen::kSmallAccuracy, 1e-12);
    EXPECT_NEAR(m.macro_f1, frozen::kSmallMacroF1, 1e-12);
    EXPECT_NEAR(m.weighted_f1, frozen::kSmallWeightedF1, 1e-12);
    ASSERT_EQ(m.per_class.size(), 2u);
    EXPECT_EQ(m.per_class[1].support, 3u);
}

TEST(ClassificationMetrics, AbsentClassCountsAsZeroInMacro) {
    const LabelSet ls{"abc", {"A", "B", "C"}};
    const std::vector<std::string> preds{"A", "B"}, golds{"A", "B"};
    const auto m = classification_metrics(preds, golds, ls);
    EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(m.weighted_f1, 1.0);
    EXPECT_NEAR(m.macro_f1, 2.0 / 3.0, 1e-15);
}

TEST(ClassificationMetrics, PredictionOutsideSetIsWrong) {
    const LabelSet ls{"ab", {"A", "B"}};
    const std::vector<std::string> preds{"?", "B"}, golds{"A", "B"};
    const auto m = classification_metrics(preds, golds, ls);
    EXPECT_DOUBLE_EQ(m.accuracy, 0.5);
}

TEST(ClassificationMetrics, InputErrors) {
    const LabelSet ls{"ab", {"A", "B"}};
    const std::vector<std::string> one{"A"}, two{"A", "B"}, bad{"Z"};
    EXPECT_THROW(classification_metrics(one, two, ls), ValidationError);
    EXPECT_THROW(classification_metrics(one, bad, ls), ValidationError);
}

TEST(ClassificationMetrics, RandomSetsAgreeWithBruteForce) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + rng() % 3;
        LabelSet ls{"r", {}};
        for (std::size_t c = 0; c < k; ++c) ls.labels.push_back("c" + std::to_string(c));
        const std::size_t n = 10 + rng() % 291;
        std::vector<std::string> preds(n), golds(n);
        for (std::size_t i = 0; i < n; ++i) {
            golds[i] = ls.labels[rng() % k];
            preds[i] = ls.labels[rng() % k];
        }
        const auto m = classification_metrics(preds, golds, ls);
        const auto b = testsupport::brute_classification(preds, golds, ls.labels);
        ASSERT_NEAR(m.accuracy, b.accuracy, 1e-9);
        ASSERT_NEAR(m.macro_f1, b.macro_f1, 1e-9);
        ASSERT_NEAR(m.weighted_f1, b.weighted_f1, 1e-9);
    }
}
