#include <gtest/gtest.h>

#include "pqos/config_json.hpp"
#include "pqos/errors.hpp"

namespace pqos::config {
namespace {

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(ConfigParse, EmptyDocumentGivesDefaults) {
  const auto cfg = parse("{}");
  EXPECT_EQ(cfg.campaign.n_vehicles, radio::CampaignConfig{}.n_vehicles);
  EXPECT_EQ(cfg.gbt.n_rounds, 200);
  EXPECT_DOUBLE_EQ(cfg.experiment.round_length_m, 2.0 * cfg.environment.road_length_m);
  EXPECT_EQ(cfg.experiment.next_ids, (std::vector<int>{1, 3}));
}

TEST(ConfigParse, ReadsNestedValues) {
  const auto cfg = parse(R"({
    "environment": {"road_length_m": 12000, "cell_positions_m": [2000, 6000, 10000],
                    "load_process": {"mean_load": 0.3}},
    "campaign": {"n_vehicles": 3, "seed": 9},
    "gbt": {"max_depth": 2, "learning_rate": 0.2},
    "experiment": {"self_id": 3, "next_ids": [1], "feature_sets": ["baseline", "next-phy"]}
  })");
  EXPECT_DOUBLE_EQ(cfg.environment.road_length_m, 12000.0);
  EXPECT_EQ(cfg.environment.cell_positions_m.size(), 3u);
  EXPECT_DOUBLE_EQ(cfg.environment.load_process.mean_load, 0.3);
  EXPECT_EQ(cfg.campaign.n_vehicles, 3);
  EXPECT_EQ(cfg.campaign.seed, 9u);
  EXPECT_EQ(cfg.gbt.max_depth, 2);
  EXPECT_EQ(cfg.experiment.gbt.max_depth, 2);
  EXPECT_DOUBLE_EQ(cfg.experiment.gbt.learning_rate, 0.2);
  EXPECT_DOUBLE_EQ(cfg.experiment.round_length_m, 24000.0);
  EXPECT_EQ(cfg.experiment.feature_sets,
            (std::vector<alignment::FeatureSetKind>{alignment::FeatureSetKind::kBaseline,
                                                    alignment::FeatureSetKind::kNextPhy}));
}

TEST(ConfigParse, ExplicitRoundLengthWins) {
  EXPECT_DOUBLE_EQ(parse(R"({"experiment": {"round_length_m": 500}})").experiment.round_length_m, 500.0);
}

TEST(ConfigParse, UnknownKeysNameTheirPath) {
  EXPECT_NE(error_of(R"({"bogus": 1})").find("bogus"), std::string::npos);
  EXPECT_NE(error_of(R"({"campaign": {"n_vehicle": 2}})").find("campaign.n_vehicle"), std::string::npos);
  EXPECT_NE(error_of(R"({"environment": {"load_process": {"sigma": 2}}})").find("environment.load_process.sigma"),
            std::string::npos);
}

TEST(ConfigParse, TypeAndRangeErrorsNameTheField) {
  EXPECT_NE(error_of(R"({"campaign": {"n_vehicles": "four"}})").find("n_vehicles"), std::string::npos);
  EXPECT_NE(error_of(R"({"gbt": {"subsample": 0}})").find("subsample"), std::string::npos);
  EXPECT_NE(error_of(R"({"campaign": {"speed_jitter": 0.5}})").find("speed_jitter"), std::string::npos);
  EXPECT_FALSE(error_of(R"([1, 2])").empty());
}

TEST(ConfigParse, MalformedJsonIsRejected) { EXPECT_THROW(parse("{\"gbt\": "), Error); }

TEST(ConfigJson, SerializedFormParsesBack) {
  auto cfg = parse(R"({"campaign": {"n_vehicles": 5}, "gbt": {"seed": 3}, "experiment": {"test_round": 1}})");
  const auto text = to_json(cfg).dump();
  const auto back = parse(text);
  EXPECT_EQ(to_json(back).dump(), text);
  EXPECT_EQ(back.campaign.n_vehicles, 5);
  EXPECT_EQ(back.experiment.test_round, 1);
}

}  // namespace
}  // namespace pqos::config
