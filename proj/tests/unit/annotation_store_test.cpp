#include "memexplain/annotation_store.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace memexplain;
using testsupport::TempDir;

namespace {

std::vector<AnnotationTask> items(int n) {
    std::vector<AnnotationTask> out;
    for (int i = 0; i < n; ++i) {
        out.push_back({"it" + std::to_string(i), "img/" + std::to_string(i) + ".png", "Propaganda", "because",
                       Language::ar, "guide-v1"});
    }
    return out;
}

AnnotationRating rate(const std::string& item, const std::string& who, int v = 4) {
    AnnotationRating r{item, who, {}};
    for (auto m : kLikertMetrics) r.scores[m] = v;
    return r;
}

StoreError::Kind submit_kind(AnnotationStore& s, const AnnotationRating& r) {
    try {
        s.submit(r);
    } catch (const StoreError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "submit accepted";
    return StoreError::Kind::invalid;
}

}  // namespace

TEST(AnnotationStore, TasksFromRecordsSkipsUnexplained) {
    std::vector<ExplainedRecord> recs(2);
    recs[0].base = {"a", "a.png", "", "Other", Split::test};
    recs[0].explanations[Language::ar] = "شرح";
    recs[1].base = {"b", "b.png", "", "Other", Split::test};
    const auto t = tasks_from_records(recs, Language::ar, "g");
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].item_id, "a");
    EXPECT_EQ(t[0].explanation, "شرح");
}

TEST(AnnotationStore, HandsOutLowestIndexAndEnforcesQuota) {
    TempDir dir;
    AnnotationStore s(items(2), {"a", "b", "c", "d"}, dir / "r.jsonl");
    EXPECT_EQ(s.next_task("a")->item_id, "it0");
    EXPECT_EQ(s.next_task("a")->item_id, "it0");
    s.submit(rate("it0", "a"));
    EXPECT_EQ(s.next_task("a")->item_id, "it1");
    s.submit(rate("it0", "b"));
    s.submit(rate("it0", "c"));
    EXPECT_EQ(s.next_task("d")->item_id, "it1");
    EXPECT_EQ(submit_kind(s, rate("it0", "d")), StoreError::Kind::quota_full);
    EXPECT_EQ(submit_kind(s, rate("it0", "a")), StoreError::Kind::duplicate);
    EXPECT_EQ(s.progress("a").completed, 1u);
    EXPECT_EQ(s.progress("a").full_items, 1u);
}

TEST(AnnotationStore, RejectsUnknownUnassignedAndInvalid) {
    TempDir dir;
    AnnotationStore s(items(3), {"a"}, dir / "r.jsonl");
    EXPECT_EQ(submit_kind(s, rate("it0", "zz")), StoreError::Kind::unknown_annotator);
    EXPECT_EQ(submit_kind(s, rate("nope", "a")), StoreError::Kind::unknown_item);
    EXPECT_EQ(submit_kind(s, rate("it2", "a")), StoreError::Kind::unassigned);
    EXPECT_EQ(submit_kind(s, rate("it0", "a", 9)), StoreError::Kind::invalid);
    EXPECT_NO_THROW(s.submit(rate("it0", "a")));
}

TEST(AnnotationStore, RestartResumesFromFile) {
    TempDir dir;
    {
        AnnotationStore s(items(3), {"a", "b"}, dir / "r.jsonl");
        s.submit(rate("it0", "a"));
        s.submit(rate("it0", "b"));
        s.next_task("a");
        s.submit(rate("it1", "a", 2));
    }
    AnnotationStore again(items(3), {"a", "b"}, dir / "r.jsonl");
    EXPECT_EQ(again.next_task("a")->item_id, "it2");
    EXPECT_EQ(again.next_task("b")->item_id, "it1");
    const auto all = again.export_ratings();
    ASSERT_EQ(all.size(), 3u);
    EXPECT_EQ(all[0].item_id, "it0");
    EXPECT_EQ(all[0].annotator_id, "a");
    EXPECT_EQ(all[2], rate("it1", "a", 2));
}

TEST(AnnotationStore, DoneWhenEverythingRated) {
    TempDir dir;
    AnnotationStore s(items(1), {"a"}, dir / "r.jsonl", {1, {}});
    s.submit(rate("it0", "a"));
    EXPECT_FALSE(s.next_task("a"));
    EXPECT_EQ(s.progress("a").available, 0u);
}
