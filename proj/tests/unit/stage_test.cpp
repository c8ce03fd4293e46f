#include "memexplain/error.hpp"
#include "memexplain/stage.hpp"

#include <gtest/gtest.h>

using namespace memexplain;

TEST(Stage, TotalLossSchedule) {
    const auto s1 = StageConfig::defaults(StageId::stage1);
    const auto s2 = StageConfig::defaults(StageId::stage2);
    const auto ss = StageConfig::defaults(StageId::single_stage);
    EXPECT_EQ(total_loss(2.5, 7.0, s1), 2.5);
    EXPECT_EQ(total_loss(2.5, 7.0, s2), 9.5);
    EXPECT_EQ(total_loss(2.5, 7.0, ss), 9.5);
    EXPECT_EQ(total_loss(2.5, std::nullopt, s1), 2.5);
    EXPECT_THROW(total_loss(2.5, std::nullopt, s2), ValidationError);
}

TEST(Stage, WeightRuleEnforced) {
    auto s1 = StageConfig::defaults(StageId::stage1);
    s1.expl_weight = 1.0;
    EXPECT_THROW(s1.validate(), ValidationError);
    auto s2 = StageConfig::defaults(StageId::stage2);
    s2.expl_weight = 0.0;
    EXPECT_THROW(s2.validate(), ValidationError);
    EXPECT_THROW(stage_config_from_json({{"expl_weight", 0.5}}, StageId::stage1), ValidationError);
}

TEST(Stage, DerivedStage2Profile) {
    auto s1 = StageConfig::defaults(StageId::stage1);
    s1.learning_rate = 2e-4;
    s1.epochs = 3;
    const auto s2 = derive_stage2(s1);
    EXPECT_EQ(s2.stage_id, StageId::stage2);
    EXPECT_EQ(s2.expl_weight, 1.0);
    EXPECT_DOUBLE_EQ(s2.learning_rate, 1e-4);
    EXPECT_EQ(s2.epochs, 6u);
    EXPECT_EQ(s2.adapter, s1.adapter);
    EXPECT_NO_THROW(s2.validate());
}

TEST(Stage, JsonRoundTripAndPartialOverrides) {
    auto s = StageConfig::defaults(StageId::single_stage);
    s.adapter.rank = 8;
    s.adapter.target_submodules = {Submodule::language, Submodule::mlp};
    s.scheduler.name = "constant";
    EXPECT_EQ(stage_config_from_json(to_json(s), StageId::single_stage), s);

    auto base = StageConfig::defaults(StageId::stage2);
    base.batch_size = 7;
    const auto partial = stage_config_from_json({{"epochs", 9}}, base);
    EXPECT_EQ(partial.epochs, 9u);
    EXPECT_EQ(partial.batch_size, 7u);
    EXPECT_THROW(stage_config_from_json({{"scheduler", {{"name", "cosine"}}}}, StageId::stage1), ValidationError);
}

TEST(Stage, AdapterValidation) {
    AdapterConfig a;
    EXPECT_NO_THROW(a.validate());
    a.quantization_bits = 3;
    EXPECT_THROW(a.validate(), ValidationError);
    a = {};
    a.target_submodules.clear();
    EXPECT_THROW(a.validate(), ValidationError);
    a = {};
    a.dropout = 1.0;
    EXPECT_THROW(a.validate(), ValidationError);
    EXPECT_THROW(parse_submodule("decoder"), ValidationError);
}

TEST(Stage, LinearWarmupSchedule) {
    auto s = StageConfig::defaults(StageId::stage1);
    s.learning_rate = 1.0;
    s.scheduler.warmup_steps = 2;
    EXPECT_DOUBLE_EQ(scheduled_learning_rate(s, 0, 10), 0.0);
    EXPECT_DOUBLE_EQ(scheduled_learning_rate(s, 1, 10), 0.5);
    EXPECT_DOUBLE_EQ(scheduled_learning_rate(s, 2, 10), 1.0);
    EXPECT_DOUBLE_EQ(scheduled_learning_rate(s, 6, 10), 0.5);
    EXPECT_DOUBLE_EQ(scheduled_learning_rate(s, 10, 10), 0.0);
    s.scheduler.name = "constant";
    EXPECT_DOUBLE_EQ(scheduled_learning_rate(s, 0, 10), 1.0);
}
