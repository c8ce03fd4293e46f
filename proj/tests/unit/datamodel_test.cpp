#include "memexplain/datamodel.hpp"
#include "memexplain/error.hpp"
#include "memexplain/text.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>

using namespace memexplain;
using testsupport::TempDir;

namespace {

json row(const std::string& id, const std::string& label, const std::string& split, const std::string& text = "a b") {
    return {{"id", id}, {"img_path", "img/" + id + ".png"}, {"text", text}, {"class_label", label}, {"split", split}};
}

void write_rows(const std::filesystem::path& p, const std::vector<json>& rows) { write_jsonl(p, rows); }

}  // namespace

TEST(LabelSet, Builtins) {
    EXPECT_EQ(LabelSet::armeme().labels,
              (std::vector<std::string>{"Not propaganda", "Propaganda", "Not-meme", "Other"}));
    EXPECT_EQ(LabelSet::hateful().labels, (std::vector<std::string>{"Not Hateful", "Hateful"}));
    EXPECT_EQ(LabelSet::by_name("ArMeme").name, "armeme");
    EXPECT_THROW(LabelSet::by_name("mnist"), ValidationError);
}

TEST(LoadDataset, GroupsBySplitAndCounts) {
    TempDir dir;
    write_rows(dir / "m.jsonl", {row("1", "Propaganda", "train"), row("2", "Not propaganda", "train"),
                                 row("3", "Other", "dev"), row("4", "Not-meme", "test")});
    const auto ds = load_dataset({}, dir / "m.jsonl", LabelSet::armeme());
    EXPECT_EQ(ds.train.size(), 2u);
    EXPECT_EQ(ds.dev.size(), 1u);
    EXPECT_EQ(ds.test.size(), 1u);
    EXPECT_EQ(ds.counts.at(Split::train).at("Propaganda"), 1u);
    EXPECT_EQ(ds.counts.at(Split::dev).at("Propaganda"), 0u);
    for (Split s : kAllSplits) {
        std::size_t sum = 0;
        for (const auto& [label, n] : ds.counts.at(s)) sum += n;
        EXPECT_EQ(sum, ds.split_total(s));
    }
    EXPECT_EQ(ds.total(), 4u);
}

TEST(LoadDataset, EmptyManifestGivesZeroCounts) {
    TempDir dir;
    std::ofstream(dir / "empty.jsonl").close();
    const auto ds = load_dataset({}, dir / "empty.jsonl", LabelSet::hateful());
    EXPECT_EQ(ds.total(), 0u);
    EXPECT_EQ(ds.counts.at(Split::test).at("Hateful"), 0u);
}

TEST(LoadDataset, UnknownLabelNamesTheRow) {
    TempDir dir;
    std::vector<json> rows;
    for (int i = 0; i < 6; ++i) rows.push_back(row("r" + std::to_string(i), "Propaganda", "train"));
    rows[4]["class_label"] = "Satire";
    write_rows(dir / "m.jsonl", rows);
    try {
        load_dataset({}, dir / "m.jsonl", LabelSet::armeme());
        FAIL() << "expected RecordError";
    } catch (const RecordError& e) {
        EXPECT_EQ(e.ids(), std::vector<std::string>{"r4"});
    }
}

TEST(LoadDataset, DuplicateIdRejected) {
    TempDir dir;
    write_rows(dir / "m.jsonl", {row("x", "Hateful", "train"), row("x", "Not Hateful", "dev")});
    EXPECT_THROW(load_dataset({}, dir / "m.jsonl", LabelSet::hateful()), RecordError);
}

TEST(LoadDataset, MissingFilesFollowPolicy) {
    TempDir dir;
    std::filesystem::create_directories(dir / "img");
    std::ofstream(dir / "img" / "a.png") << "png";
    write_rows(dir / "m.jsonl", {row("a", "Hateful", "train"), row("b", "Hateful", "train")});
    const auto ds = load_dataset(dir.path(), dir / "m.jsonl", LabelSet::hateful());
    EXPECT_EQ(ds.missing_files, std::vector<std::string>{"b"});
    EXPECT_EQ(ds.total(), 2u);
    EXPECT_THROW(load_dataset(dir.path(), dir / "m.jsonl", LabelSet::hateful(), {MissingFilePolicy::error}),
                 ValidationError);
}

TEST(LoadDataset, MalformedLineReportsLocation) {
    TempDir dir;
    std::ofstream(dir / "m.jsonl") << row("a", "Hateful", "train").dump() << "\n{not json\n";
    try {
        load_dataset({}, dir / "m.jsonl", LabelSet::hateful());
        FAIL();
    } catch (const std::exception& e) {
        EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
    }
}

TEST(Dataset, SerializeReloadIsIdentity) {
    TempDir dir;
    ExplainedRecord r;
    r.base = {"id-1", "img/1.png", "نص الميم", "Propaganda", Split::dev};
    r.explanations[Language::en] = "An explanation.";
    r.explanations[Language::ar] = "شرح.";
    r.gen_meta[Language::en] = {"mock", "v1", "abc", "armeme_en", "2025-01-01T00:00:00Z"};
    r.gen_meta[Language::ar] = {"mock", "v1", "def", "armeme_ar", "2025-01-01T00:00:00Z"};
    ExplainedRecord plain;
    plain.base = {"id-2", "img/2.png", "", "Other", Split::train};
    const std::vector<ExplainedRecord> records{r, plain};
    save_dataset(dir / "out.jsonl", records);
    const auto ds = load_dataset({}, dir / "out.jsonl", LabelSet::armeme(), {MissingFilePolicy::ignore});
    ASSERT_EQ(ds.dev.size(), 1u);
    ASSERT_EQ(ds.train.size(), 1u);
    EXPECT_EQ(ds.dev[0], r);
    EXPECT_EQ(ds.train[0], plain);
}

TEST(CorpusStats, SingleRecord) {
    ExplainedRecord r;
    r.base.text = "a b c";
    const std::vector<ExplainedRecord> records{r};
    const auto s = corpus_stats(records);
    EXPECT_EQ(s.total_words, 3u);
    EXPECT_EQ(s.avg_words, 3u);
    EXPECT_TRUE(s.total_expl_words.empty());
}

TEST(CorpusStats, EmptyInputIsZero) {
    const auto s = corpus_stats({});
    EXPECT_EQ(s.record_count, 0u);
    EXPECT_EQ(s.total_words, 0u);
    EXPECT_EQ(s.avg_words, 0u);
}

TEST(CorpusStats, MatchesRecountAndIsPermutationInvariant) {
    std::vector<ExplainedRecord> records(3);
    records[0].base.text = "one two three four";
    records[1].base.text = "  خمسة ستة ";
    records[2].base.text = "";
    records[0].explanations[Language::en] = "x y z";
    records[2].explanations[Language::en] = "p q";
    // independent recount: number of maximal runs of non-space characters
    auto recount = [](const std::string& s) {
        std::size_t n = 0;
        bool in_word = false;
        for (char c : s) {
            const bool space = c == ' ' || c == '\t' || c == '\n';
            if (!space && !in_word) ++n;
            in_word = !space;
        }
        return n;
    };
    std::size_t expected = 0;
    for (const auto& r : records) expected += recount(r.base.text);
    const auto s = corpus_stats(records);
    EXPECT_EQ(s.total_words, expected);
    EXPECT_EQ(s.total_expl_words.at(Language::en), 5u);
    EXPECT_EQ(s.avg_words, 2u);  // 6 / 3
    EXPECT_EQ(s.avg_expl_words.at(Language::en), 3u);  // 5 / 2 = 2.5 rounds half-up

    std::mt19937 rng(3);
    for (int i = 0; i < 5; ++i) {
        std::shuffle(records.begin(), records.end(), rng);
        const auto t = corpus_stats(records);
        EXPECT_EQ(t.total_words, s.total_words);
        EXPECT_EQ(t.avg_words_raw, s.avg_words_raw);
        EXPECT_EQ(t.total_expl_words, s.total_expl_words);
    }
}

TEST(CorpusStats, RoundHalfUp) {
    EXPECT_EQ(round_half_up(2.5), 3u);
    EXPECT_EQ(round_half_up(2.4999), 2u);
    EXPECT_EQ(round_half_up(0.0), 0u);
}

TEST(DatasetStats, TotalAveragesAreMeanOfSplitAverages) {
    std::vector<ExplainedRecord> records;
    auto add = [&](Split s, const std::string& text) {
        ExplainedRecord r;
        r.base = {"id" + std::to_string(records.size()), "x.png", text, "Hateful", s};
        records.push_back(r);
    };
    for (int i = 0; i < 3; ++i) add(Split::train, "a b c d e f");
    add(Split::dev, "a b");
    add(Split::test, "a b c d");
    const auto ds = dataset_from_records(records, LabelSet::hateful(), {}, {MissingFilePolicy::ignore});
    const auto stats = dataset_stats(ds);
    EXPECT_EQ(stats.splits.at(Split::train).avg_words, 6u);
    EXPECT_DOUBLE_EQ(stats.total.avg_words_raw, 4.0);       // (6 + 2 + 4) / 3
    EXPECT_DOUBLE_EQ(stats.pooled_avg_words_raw, 24.0 / 5);  // record-weighted
    EXPECT_EQ(stats.total.total_words, 24u);
}
