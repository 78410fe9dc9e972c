#include "pqos/config_json.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pqos/errors.hpp"

namespace pqos::config {
namespace {

using nlohmann::json;

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(name(key), "unknown key");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(name(key), "expected a number");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(name(key), "expected an integer");
      }
      out = v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(name(key), "wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

radio::EnvironmentConfig read_environment(const json& j, const std::string& path) {
  radio::EnvironmentConfig env;
  Section s(j, path);
  s.get("road_length_m", env.road_length_m);
  s.get("cell_positions_m", env.cell_positions_m);
  s.get("cells_per_site", env.cells_per_site);
  s.get("site_offset_m", env.site_offset_m);
  s.get("tx_power_dbm", env.tx_power_dbm);
  s.get("pathloss_exponent", env.pathloss_exponent);
  s.get("pathloss_ref_db", env.pathloss_ref_db);
  s.get("shadowing_sigma_db", env.shadowing_sigma_db);
  s.get("shadowing_corr_length_m", env.shadowing_corr_length_m);
  s.get("effective_bandwidth_mhz", env.effective_bandwidth_mhz);
  s.get("n_resource_blocks", env.n_resource_blocks);
  s.get("noise_floor_dbm", env.noise_floor_dbm);
  s.get("max_devices", env.max_devices);
  s.get("throughput_noise_std", env.throughput_noise_std);
  if (const auto* lp = s.child("load_process")) {
    Section l(*lp, s.name("load_process"));
    l.get("mean_load", env.load_process.mean_load);
    l.get("std", env.load_process.std);
    l.get("correlation_time_s", env.load_process.correlation_time_s);
    l.get("shared_fraction", env.load_process.shared_fraction);
    l.finish();
  }
  s.finish();
  return env;
}

radio::CampaignConfig read_campaign(const json& j, const std::string& path) {
  radio::CampaignConfig c;
  Section s(j, path);
  s.get("n_vehicles", c.n_vehicles);
  s.get("start_gap_s", c.start_gap_s);
  s.get("nominal_speed_mps", c.nominal_speed_mps);
  s.get("speed_jitter", c.speed_jitter);
  s.get("speed_corr_time_s", c.speed_corr_time_s);
  s.get("n_rounds", c.n_rounds);
  s.get("sample_period_s", c.sample_period_s);
  s.get("seed", c.seed);
  s.finish();
  return c;
}

gbt::GbtConfig read_gbt(const json& j, const std::string& path) {
  gbt::GbtConfig c;
  Section s(j, path);
  s.get("n_rounds", c.n_rounds);
  s.get("max_depth", c.max_depth);
  s.get("learning_rate", c.learning_rate);
  s.get("min_samples_leaf", c.min_samples_leaf);
  s.get("subsample", c.subsample);
  s.get("l2_leaf_reg", c.l2_leaf_reg);
  s.get("seed", c.seed);
  s.finish();
  return c;
}

evaluation::ExperimentConfig read_experiment(const json& j, const std::string& path) {
  evaluation::ExperimentConfig c;
  Section s(j, path);
  s.get("self_id", c.self_id);
  s.get("next_ids", c.next_ids);
  if (const auto* fs = s.child("feature_sets")) {
    if (!fs->is_array()) throw ConfigError(s.name("feature_sets"), "expected an array of names");
    c.feature_sets.clear();
    for (const auto& name : *fs) {
      try {
        c.feature_sets.push_back(alignment::parse_feature_set(name.get<std::string>()));
      } catch (const std::exception& e) {
        throw ConfigError(s.name("feature_sets"), e.what());
      }
    }
  }
  s.get("period_s", c.period_s);
  s.get("v_min_mps", c.v_min_mps);
  s.get("round_length_m", c.round_length_m);
  if (const auto* tr = s.child("test_round"); tr && !tr->is_null()) {
    if (!tr->is_number_integer()) throw ConfigError(s.name("test_round"), "expected an integer or null");
    c.test_round = tr->get<int>();
  }
  s.get("importance_repeats", c.importance_repeats);
  s.get("clamp_mbps", c.clamp_mbps);
  s.get("seed", c.seed);
  s.finish();
  return c;
}

}  // namespace

radio::EnvironmentConfig environment_from_json(const json& j) { return read_environment(j, "environment"); }
radio::CampaignConfig campaign_from_json(const json& j) { return read_campaign(j, "campaign"); }
gbt::GbtConfig gbt_from_json(const json& j) { return read_gbt(j, "gbt"); }
evaluation::ExperimentConfig experiment_from_json(const json& j) { return read_experiment(j, "experiment"); }

PipelineConfig parse(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
  }
  PipelineConfig cfg;
  bool explicit_round_length = false;
  {
    Section root(doc, "");
    if (const auto* e = root.child("environment")) cfg.environment = read_environment(*e, "environment");
    if (const auto* c = root.child("campaign")) cfg.campaign = read_campaign(*c, "campaign");
    if (const auto* g = root.child("gbt")) cfg.gbt = read_gbt(*g, "gbt");
    if (const auto* x = root.child("experiment")) {
      cfg.experiment = read_experiment(*x, "experiment");
      explicit_round_length = x->contains("round_length_m");
    }
    root.finish();
  }
  if (!explicit_round_length) cfg.experiment.round_length_m = radio::round_length_m(cfg.environment);
  cfg.experiment.gbt = cfg.gbt;
  radio::validate(cfg.environment);
  radio::validate(cfg.campaign);
  evaluation::validate(cfg.experiment);
  return cfg;
}

PipelineConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

json to_json(const radio::EnvironmentConfig& env) {
  return {{"road_length_m", env.road_length_m},
          {"cell_positions_m", env.cell_positions_m},
          {"cells_per_site", env.cells_per_site},
          {"site_offset_m", env.site_offset_m},
          {"tx_power_dbm", env.tx_power_dbm},
          {"pathloss_exponent", env.pathloss_exponent},
          {"pathloss_ref_db", env.pathloss_ref_db},
          {"shadowing_sigma_db", env.shadowing_sigma_db},
          {"shadowing_corr_length_m", env.shadowing_corr_length_m},
          {"effective_bandwidth_mhz", env.effective_bandwidth_mhz},
          {"n_resource_blocks", env.n_resource_blocks},
          {"noise_floor_dbm", env.noise_floor_dbm},
          {"max_devices", env.max_devices},
          {"throughput_noise_std", env.throughput_noise_std},
          {"load_process",
           {{"mean_load", env.load_process.mean_load},
            {"std", env.load_process.std},
            {"correlation_time_s", env.load_process.correlation_time_s},
            {"shared_fraction", env.load_process.shared_fraction}}}};
}

json to_json(const radio::CampaignConfig& c) {
  return {{"n_vehicles", c.n_vehicles},         {"start_gap_s", c.start_gap_s},
          {"nominal_speed_mps", c.nominal_speed_mps}, {"speed_jitter", c.speed_jitter},
          {"speed_corr_time_s", c.speed_corr_time_s}, {"n_rounds", c.n_rounds},
          {"sample_period_s", c.sample_period_s}, {"seed", c.seed}};
}

json to_json(const gbt::GbtConfig& c) {
  return {{"n_rounds", c.n_rounds},       {"max_depth", c.max_depth},
          {"learning_rate", c.learning_rate}, {"min_samples_leaf", c.min_samples_leaf},
          {"subsample", c.subsample},     {"l2_leaf_reg", c.l2_leaf_reg},
          {"seed", c.seed}};
}

json to_json(const evaluation::ExperimentConfig& c) {
  json sets = json::array();
  for (auto k : c.feature_sets) sets.push_back(std::string(alignment::to_string(k)));
  return {{"self_id", c.self_id},
          {"next_ids", c.next_ids},
          {"feature_sets", sets},
          {"period_s", c.period_s},
          {"v_min_mps", c.v_min_mps},
          {"round_length_m", c.round_length_m},
          {"test_round", c.test_round ? json(*c.test_round) : json(nullptr)},
          {"importance_repeats", c.importance_repeats},
          {"clamp_mbps", c.clamp_mbps},
          {"seed", c.seed}};
}

json to_json(const PipelineConfig& c) {
  return {{"environment", to_json(c.environment)},
          {"campaign", to_json(c.campaign)},
          {"gbt", to_json(c.gbt)},
          {"experiment", to_json(c.experiment)}};
}

}  // namespace pqos::config
