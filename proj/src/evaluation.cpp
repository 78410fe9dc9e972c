#include "pqos/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "pqos/config_json.hpp"
#include "pqos/errors.hpp"
#include "pqos/svg_plot.hpp"
#include "pqos/trace_store.hpp"

namespace pqos::evaluation {
namespace {

using nlohmann::json;
using alignment::FeatureSetKind;
using alignment::SupervisedDataset;

constexpr const char* kReportFormat = "pqos-experiment-report";
constexpr int kReportVersion = 1;

std::string split_description(const ExperimentConfig& c) {
  const std::string held_out =
      c.test_round ? "round " + std::to_string(*c.test_round) : "the last round present in each dataset";
  return "train on all other round trips of the self vehicle, test on " + held_out;
}

std::vector<double> column_targets(const SupervisedDataset& ds) {
  std::vector<double> y;
  y.reserve(ds.rows.size());
  for (const auto& r : ds.rows) y.push_back(r.target_mbps);
  return y;
}

std::vector<std::vector<double>> feature_rows(const SupervisedDataset& ds) {
  std::vector<std::vector<double>> x;
  x.reserve(ds.rows.size());
  for (const auto& r : ds.rows) x.push_back(r.features);
  return x;
}

CellResult run_cell(const VehicleTrace& self, const VehicleTrace& next, FeatureSetKind kind,
                    const ExperimentConfig& config) {
  CellResult cell;
  cell.self_id = self.vehicle_id;
  cell.next_id = next.vehicle_id;
  cell.feature_set = kind;

  const alignment::AlignmentOptions options{config.period_s, config.v_min_mps, config.round_length_m};
  auto dataset = alignment::build_dataset(self, next, kind, options);
  cell.dropped = dataset.dropped;

  int test_round = 0;
  if (config.test_round) {
    test_round = *config.test_round;
  } else {
    for (const auto& r : dataset.rows) test_round = std::max(test_round, r.round);
  }
  cell.test_round = test_round;

  SupervisedDataset train, test;
  train.self_id = test.self_id = dataset.self_id;
  train.next_id = test.next_id = dataset.next_id;
  train.feature_schema = test.feature_schema = dataset.feature_schema;
  std::set<int> train_rounds;
  for (auto& r : dataset.rows) {
    if (r.round == test_round) {
      test.rows.push_back(std::move(r));
    } else {
      train_rounds.insert(r.round);
      cell.train_rows.emplace_back(r.round, r.t_s);
      train.rows.push_back(std::move(r));
    }
  }
  cell.train_rounds.assign(train_rounds.begin(), train_rounds.end());
  cell.n_train = train.rows.size();
  cell.n_test = test.rows.size();
  if (train.rows.empty()) throw DomainError("no training rows outside round " + std::to_string(test_round));
  if (test.rows.empty()) throw DomainError("no held-out rows in round " + std::to_string(test_round));

  gbt::GbtConfig gbt_config = config.gbt;
  gbt_config.seed = config.seed;
  const auto model = gbt::fit(train, gbt_config);

  const auto predicted = model.predict_rows(feature_rows(test));
  const auto targets = column_targets(test);
  cell.mrpe = mrpe(predicted, targets, config.clamp_mbps);
  double tau_sum = 0.0;
  for (std::size_t i = 0; i < test.rows.size(); ++i) {
    const auto& r = test.rows[i];
    cell.predictions.push_back(Prediction{r.t_s, r.round, r.tau_s, r.target_mbps, predicted[i]});
    tau_sum += r.tau_s;
  }
  cell.mean_tau_s = tau_sum / static_cast<double>(test.rows.size());
  cell.importance =
      permutation_importance(model, test, config.importance_repeats, config.seed + 1, config.clamp_mbps);
  cell.ok = true;
  return cell;
}

json cell_to_json(const CellResult& c) {
  json j = {{"self_id", c.self_id},
            {"next_id", c.next_id},
            {"feature_set", std::string(alignment::to_string(c.feature_set))},
            {"status", c.ok ? "ok" : "failed"},
            {"dropped", c.dropped}};
  if (!c.ok) {
    j["reason"] = c.failure_reason;
    return j;
  }
  j["mrpe_percent"] = c.mrpe.mrpe_percent;
  j["clamp_mbps"] = c.mrpe.clamp_mbps;
  j["test_round"] = c.test_round;
  j["train_rounds"] = c.train_rounds;
  j["n_train"] = c.n_train;
  j["n_test"] = c.n_test;
  j["mean_tau_s"] = c.mean_tau_s;
  json imp = json::array();
  for (const auto& f : c.importance) imp.push_back({{"feature", f.feature}, {"importance", f.importance}});
  j["importance"] = std::move(imp);
  json preds = json::array();
  for (const auto& p : c.predictions) {
    preds.push_back(json::array({p.t_s, p.round, p.tau_s, p.target_mbps, p.predicted_mbps}));
  }
  j["predictions"] = std::move(preds);
  return j;
}

CellResult cell_from_json(const json& j) {
  CellResult c;
  c.self_id = j.at("self_id").get<int>();
  c.next_id = j.at("next_id").get<int>();
  c.feature_set = alignment::parse_feature_set(j.at("feature_set").get<std::string>());
  c.ok = j.at("status").get<std::string>() == "ok";
  c.dropped = j.at("dropped").get<alignment::DropCounts>();
  if (!c.ok) {
    c.failure_reason = j.at("reason").get<std::string>();
    return c;
  }
  c.mrpe.mrpe_percent = j.at("mrpe_percent").get<double>();
  c.mrpe.clamp_mbps = j.at("clamp_mbps").get<double>();
  c.test_round = j.at("test_round").get<int>();
  c.train_rounds = j.at("train_rounds").get<std::vector<int>>();
  c.n_train = j.at("n_train").get<std::size_t>();
  c.n_test = j.at("n_test").get<std::size_t>();
  c.mrpe.n_rows = c.n_test;
  c.mean_tau_s = j.at("mean_tau_s").get<double>();
  for (const auto& f : j.at("importance")) {
    c.importance.push_back({f.at("feature").get<std::string>(), f.at("importance").get<double>()});
  }
  for (const auto& p : j.at("predictions")) {
    c.predictions.push_back(Prediction{p.at(0).get<double>(), p.at(1).get<int>(), p.at(2).get<double>(),
                                       p.at(3).get<double>(), p.at(4).get<double>()});
  }
  return c;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::string pair_label(int self_id, int next_id) {
  return "self " + std::to_string(self_id) + " / next " + std::to_string(next_id);
}

}  // namespace

MrpeResult mrpe(std::span<const double> predictions, std::span<const double> targets, double clamp_mbps) {
  if (predictions.empty()) throw DomainError("MRPE needs at least one row");
  if (predictions.size() != targets.size()) {
    throw DomainError("MRPE inputs differ in length: " + std::to_string(predictions.size()) + " vs " +
                      std::to_string(targets.size()));
  }
  double abs_err = 0.0, denom = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    abs_err += std::abs(predictions[i] - targets[i]);
    denom += std::max(targets[i], clamp_mbps);
  }
  if (!(denom > 0.0)) throw DomainError("MRPE denominator is zero; use a positive clamp");
  return MrpeResult{100.0 * abs_err / denom, targets.size(), clamp_mbps};
}

std::vector<FeatureImportance> permutation_importance(const gbt::GbtModel& model, const SupervisedDataset& dataset,
                                                      int n_repeats, std::uint64_t seed, double clamp_mbps) {
  if (n_repeats < 1) throw DomainError("n_repeats must be >= 1");
  if (dataset.rows.empty()) throw DomainError("permutation importance needs a non-empty dataset");
  if (dataset.feature_schema != model.feature_schema) {
    throw SchemaError("dataset schema does not match the model's feature schema");
  }

  auto x = feature_rows(dataset);
  const auto y = column_targets(dataset);
  const double reference = mrpe(model.predict_rows(x), y, clamp_mbps).mrpe_percent;
  const std::size_t n = x.size();

  std::vector<FeatureImportance> out;
  std::vector<double> original(n), shuffled(n);
  for (std::size_t j = 0; j < model.feature_schema.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) original[i] = x[i][j];
    double total = 0.0;
    for (int rep = 0; rep < n_repeats; ++rep) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(rep)};
      std::mt19937_64 rng(seq);
      shuffled = original;
      for (std::size_t i = n; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(shuffled[i - 1], shuffled[pick(rng)]);
      }
      for (std::size_t i = 0; i < n; ++i) x[i][j] = shuffled[i];
      total += mrpe(model.predict_rows(x), y, clamp_mbps).mrpe_percent - reference;
    }
    for (std::size_t i = 0; i < n; ++i) x[i][j] = original[i];
    out.push_back({model.feature_schema[j], total / n_repeats});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.importance > b.importance; });
  return out;
}

void validate(const ExperimentConfig& c) {
  if (c.next_ids.empty()) throw ConfigError("experiment.next_ids", "at least one next vehicle required");
  for (int id : c.next_ids) {
    if (id == c.self_id) throw ConfigError("experiment.next_ids", "next vehicle equals the self vehicle");
  }
  if (c.feature_sets.empty()) throw ConfigError("experiment.feature_sets", "at least one feature set required");
  if (!(c.period_s > 0.0)) throw ConfigError("experiment.period_s", "must be > 0");
  if (!(c.v_min_mps >= 0.0)) throw ConfigError("experiment.v_min_mps", "must be >= 0");
  if (!(c.round_length_m > 0.0)) throw ConfigError("experiment.round_length_m", "must be > 0");
  if (c.importance_repeats < 1) throw ConfigError("experiment.importance_repeats", "must be >= 1");
  if (!(c.clamp_mbps > 0.0)) throw ConfigError("experiment.clamp_mbps", "must be > 0");
  gbt::validate(c.gbt);
}

ExperimentReport run_experiment(const std::vector<VehicleTrace>& all, const ExperimentConfig& config) {
  validate(config);
  ExperimentReport report;
  report.config = config;
  report.split = split_description(config);

  const auto self = traces::resample(traces::find_vehicle(all, config.self_id), config.period_s);
  for (int next_id : config.next_ids) {
    std::optional<VehicleTrace> next;
    std::string missing;
    try {
      next = traces::resample(traces::find_vehicle(all, next_id), config.period_s);
    } catch (const Error& e) {
      missing = e.what();
    }
    for (auto kind : config.feature_sets) {
      CellResult cell;
      try {
        if (!next) throw DomainError(missing);
        cell = run_cell(self, *next, kind, config);
      } catch (const Error& e) {
        cell.self_id = config.self_id;
        cell.next_id = next_id;
        cell.feature_set = kind;
        cell.ok = false;
        cell.failure_reason = e.what();
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

std::string to_json(const ExperimentReport& report) {
  json cells = json::array();
  for (const auto& c : report.cells) cells.push_back(cell_to_json(c));
  json doc = {{"format", kReportFormat},
              {"version", kReportVersion},
              {"config", {{"experiment", config::to_json(report.config)}, {"gbt", config::to_json(report.config.gbt)}}},
              {"split", report.split},
              {"seeds", {{"gbt", report.config.seed}, {"importance", report.config.seed + 1}}},
              {"cells", std::move(cells)}};
  return doc.dump(1);
}

ExperimentReport report_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("report is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kReportFormat) throw SchemaError("not an experiment report");
    if (doc.at("version").get<int>() != kReportVersion) throw SchemaError("unsupported report version");
    ExperimentReport r;
    r.config = config::experiment_from_json(doc.at("config").at("experiment"));
    r.config.gbt = config::gbt_from_json(doc.at("config").at("gbt"));
    r.split = doc.at("split").get<std::string>();
    for (const auto& c : doc.at("cells")) r.cells.push_back(cell_from_json(c));
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed experiment report: ") + e.what());
  }
}

void write_report_artifacts(const ExperimentReport& report, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  using traces::format_double;
  fs::create_directories(out_dir);

  // Pairs and feature sets in first-seen order.
  std::vector<std::pair<int, int>> pairs;
  std::vector<FeatureSetKind> kinds;
  for (const auto& c : report.cells) {
    if (std::find(pairs.begin(), pairs.end(), std::pair{c.self_id, c.next_id}) == pairs.end()) {
      pairs.emplace_back(c.self_id, c.next_id);
    }
    if (std::find(kinds.begin(), kinds.end(), c.feature_set) == kinds.end()) kinds.push_back(c.feature_set);
  }

  std::string bars = "self_id,next_id,feature_set,status,mrpe_percent,n_test,mean_tau_s\n";
  std::string scatter = "self_id,next_id,feature_set,t_s,target_mbps,predicted_mbps\n";
  std::string importance = "self_id,next_id,feature_set,rank,feature,importance\n";
  std::vector<plot::BarGroup> groups;
  for (const auto& [s, n] : pairs) {
    plot::BarGroup g;
    g.label = pair_label(s, n);
    for (auto k : kinds) {
      double v = std::nan("");
      for (const auto& c : report.cells) {
        if (c.self_id == s && c.next_id == n && c.feature_set == k && c.ok) v = c.mrpe.mrpe_percent;
      }
      g.values.push_back(v);
    }
    groups.push_back(std::move(g));
  }
  for (const auto& c : report.cells) {
    const std::string prefix = std::to_string(c.self_id) + "," + std::to_string(c.next_id) + "," +
                               std::string(alignment::to_string(c.feature_set)) + ",";
    bars += prefix + (c.ok ? "ok," + format_double(c.mrpe.mrpe_percent) + "," + std::to_string(c.n_test) + "," +
                                 format_double(c.mean_tau_s)
                           : "failed,,,");
    bars += '\n';
    for (const auto& p : c.predictions) {
      scatter += prefix + format_double(p.t_s) + "," + format_double(p.target_mbps) + "," +
                 format_double(p.predicted_mbps) + "\n";
    }
    for (std::size_t i = 0; i < c.importance.size(); ++i) {
      importance += prefix + std::to_string(i + 1) + "," + c.importance[i].feature + "," +
                    format_double(c.importance[i].importance) + "\n";
    }
  }

  std::vector<std::string> labels;
  for (auto k : kinds) labels.emplace_back(alignment::to_string(k));
  write_text(out_dir / "mrpe_bars.csv", bars);
  write_text(out_dir / "mrpe_bars.svg",
             plot::bar_chart({"Held-out MRPE by feature set", "", "MRPE [%]"}, labels, groups));
  write_text(out_dir / "scatter.csv", scatter);
  write_text(out_dir / "importance.csv", importance);

  for (const auto& [s, n] : pairs) {
    std::vector<plot::Series> series;
    for (const auto& c : report.cells) {
      if (c.self_id != s || c.next_id != n || !c.ok) continue;
      if (c.feature_set != FeatureSetKind::kPhyAndCell && c.feature_set != FeatureSetKind::kNextPhyAndCell) continue;
      plot::Series ser;
      ser.label = std::string(alignment::to_string(c.feature_set));
      for (const auto& p : c.predictions) {
        ser.x.push_back(p.target_mbps);
        ser.y.push_back(p.predicted_mbps);
      }
      series.push_back(std::move(ser));
    }
    const auto name = "scatter_self" + std::to_string(s) + "_next" + std::to_string(n) + ".svg";
    write_text(out_dir / name,
               plot::scatter_plot({"Real vs predicted throughput, " + pair_label(s, n), "real y [Mbps]",
                                   "predicted y' [Mbps]"},
                                  series, true));
  }
}

}  // namespace pqos::evaluation
