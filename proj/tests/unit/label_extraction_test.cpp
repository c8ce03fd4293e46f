#include "memexplain/instruct_builder.hpp"
#include "memexplain/label_extraction.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace memexplain;

TEST(LabelExtraction, NotPropagandaIsNotReadAsPropaganda) {
    const auto ls = LabelSet::armeme();
    EXPECT_EQ(extract_label("Label: Not propaganda", ls).label, "Not propaganda");
    EXPECT_EQ(extract_label("label:  not propaganda.", ls).label, "Not propaganda");
    EXPECT_EQ(extract_label("Label: Propaganda\nExplanation: not propaganda at all", ls).label, "Propaganda");
    EXPECT_EQ(extract_label("The meme is not propaganda", ls).label, "Not propaganda");
    EXPECT_EQ(extract_label("LABEL: **Not-meme**", ls).label, "Not-meme");
}

TEST(LabelExtraction, HatefulAmbiguity) {
    const auto ls = LabelSet::hateful();
    EXPECT_EQ(extract_label("Label: Not Hateful", ls).label, "Not Hateful");
    EXPECT_EQ(extract_label("Label: Hateful", ls).label, "Hateful");
    EXPECT_EQ(extract_label("it looks not hateful to me", ls).label, "Not Hateful");
}

TEST(LabelExtraction, FallbackWhenNothingMatches) {
    const auto ls = LabelSet::armeme();
    auto r = extract_label("I cannot tell.", ls);
    EXPECT_FALSE(r.parsed);
    EXPECT_EQ(r.label, "Not propaganda");
    r = extract_label("", ls, "Other");
    EXPECT_FALSE(r.parsed);
    EXPECT_EQ(r.label, "Other");
}

TEST(LabelExtraction, RandomRoundTrip) {
    std::mt19937_64 rng(5);
    const std::vector<LabelSet> sets{LabelSet::armeme(), LabelSet::hateful()};
    for (int i = 0; i < 1000; ++i) {
        const auto& ls = sets[rng() % 2];
        const auto& label = ls.labels[rng() % ls.labels.size()];
        MemeRecord m{"x", "i.png", "t", label, Split::test};
        ExplainedRecord r{m, {}, {}};
        r.explanations[Language::en] = "The text says Propaganda and Not Hateful, but ignore that.";
        const auto s = (i % 2) ? build_classification_sample(m, "i") : build_joint_sample(r, Language::en, "i");
        const auto got = extract_label(s.target, ls);
        EXPECT_TRUE(got.parsed);
        EXPECT_EQ(got.label, label) << s.target;
    }
}
