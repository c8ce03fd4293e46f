#include "memexplain/error.hpp"
#include "memexplain/pipeline.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <chrono>

using namespace memexplain;
using testsupport::TempDir;

namespace {

const std::filesystem::path kFixture = MEMEXPLAIN_FIXTURE_DIR;

RunConfig fixture_config(const TempDir& out, std::vector<std::string> overrides = {}) {
    auto c = load_run_config(kFixture / "config.json", overrides);
    c.output_root = out.path();
    return c;
}

std::size_t checkpoint_lines(const std::filesystem::path& run_dir) {
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(run_dir / "enhance")) {
        if (e.path().string().ends_with(".checkpoint.jsonl")) n += read_jsonl(e.path()).size();
    }
    return n;
}

}  // namespace

TEST(Pipeline, FullRunOnFixtureOffline) {
    const auto start = std::chrono::steady_clock::now();
    TempDir out;
    const auto config = fixture_config(out);
    const auto run_dir = make_run_dir(config);

    const auto enh = enhance(config, run_dir);
    EXPECT_EQ(enh.records, 20u);
    EXPECT_EQ(enh.failures, 0u);
    EXPECT_EQ(enh.provider_calls, 40u);
    EXPECT_FALSE(enh.exceeds_threshold);

    const auto ins = build_instructions(config, enh.output, run_dir);
    EXPECT_EQ(ins.files.at("classify_train.jsonl"), 12u);
    EXPECT_EQ(ins.files.at("classify_explain_ar_test.jsonl"), 4u);

    const auto ms = train(config, TrainMode::multi_stage, ins.directory, run_dir);
    const auto manifest = read_json(ms.manifest);
    const auto& s1 = manifest["stages"][0];
    EXPECT_EQ(manifest["stages"][1]["init_from"], s1["selected_ref"]);
    EXPECT_EQ(s1["selected_ref"], s1["checkpoints"][s1["selected_index"].get<std::size_t>()]["storage_ref"]);
    EXPECT_TRUE(std::filesystem::exists(ms.final_model));

    const auto ss = train(config, TrainMode::single_stage, ins.directory, run_dir);
    EXPECT_EQ(read_json(ss.manifest)["mode"], "ss");

    EvaluateRequest req{ins.directory, ms.final_model.string()};
    const auto ev = evaluate(config, req, run_dir);
    EXPECT_EQ(ev.metrics.n, 4u);
    EXPECT_TRUE(ev.metrics.bleu);
    EXPECT_TRUE(std::filesystem::exists(ev.predictions));

    EvaluateRequest echo{ins.directory, "echo"};
    echo.name = "eval-echo";
    const auto gold = evaluate(config, echo, run_dir);
    EXPECT_DOUBLE_EQ(gold.metrics.accuracy, 1.0);
    EXPECT_NEAR(*gold.metrics.bleu, 1.0, 1e-12);

    const auto st = read_json(stats(config, enh.output, run_dir));
    EXPECT_EQ(st["total"], 20);
    EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(60));
}

TEST(Pipeline, InterruptedEnhanceResumesWithRemainingCallsOnly) {
    TempDir out;
    const auto interrupted = fixture_config(out, {"generation.mock.interrupt_after=9"});
    const auto run_dir = make_run_dir(interrupted);
    EXPECT_THROW(enhance(interrupted, run_dir), std::exception);
    const std::size_t done = checkpoint_lines(run_dir);
    EXPECT_GE(done, 1u);
    EXPECT_LT(done, 40u);

    const auto clean = fixture_config(out);
    const auto resumed = enhance(clean, run_dir);
    EXPECT_EQ(resumed.provider_calls, 40u - done);
    EXPECT_EQ(resumed.failures, 0u);

    // same manifest as a run that was never interrupted
    TempDir other;
    const auto fresh_cfg = fixture_config(other);
    const auto fresh = enhance(fresh_cfg, make_run_dir(fresh_cfg));
    EXPECT_EQ(read_jsonl(fresh.output), read_jsonl(resumed.output));
}

TEST(Pipeline, MajorityLabelBreaksTiesBySetOrder) {
    const auto ls = LabelSet::armeme();
    std::vector<InstructionSample> s(2);
    s[0].target = "Label: Other";
    s[1].target = "Label: Propaganda";
    EXPECT_EQ(majority_label(s, ls), "Propaganda");
    EXPECT_EQ(parse_train_mode("ms"), TrainMode::multi_stage);
    EXPECT_THROW(parse_train_mode("xs"), ValidationError);
}
