#include "pqos/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pqos/alignment.hpp"
#include "pqos/config_json.hpp"
#include "pqos/correlation.hpp"
#include "pqos/errors.hpp"
#include "pqos/evaluation.hpp"
#include "pqos/gbt.hpp"
#include "pqos/radio_sim.hpp"
#include "pqos/svg_plot.hpp"
#include "pqos/trace_store.hpp"

namespace pqos::cli {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

config::PipelineConfig load_config(const std::string& path) {
  return path.empty() ? config::parse("{}") : config::load(path);
}

struct Options {
  std::string config, out, traces, dataset, model, experiment, feature_set = "next-phy-cell", kpi = "rsrp";
  std::optional<std::uint64_t> seed;
  int self_id = 4;
  int next_id = 1;
  double max_lag_s = 600.0;
  double step_s = 1.0;
};

void simulate(const Options& o, std::ostream& out) {
  auto cfg = load_config(o.config);
  if (o.seed) cfg.campaign.seed = *o.seed;
  const auto traces = radio::simulate_campaign(cfg.environment, cfg.campaign);
  fs::create_directories(o.out);
  for (const auto& t : traces) {
    traces::store_csv({t}, fs::path(o.out) / ("vehicle_" + std::to_string(t.vehicle_id) + ".csv"));
  }
  out << "wrote " << traces.size() << " traces to " << o.out << '\n';
}

void analyze(const Options& o, std::ostream& out) {
  const auto all = traces::load_traces(o.traces);
  const auto kpi = correlation::parse_kpi(o.kpi);
  const auto self = traces::resample(traces::find_vehicle(all, o.self_id), o.step_s);
  const auto next = traces::resample(traces::find_vehicle(all, o.next_id), o.step_s);
  // Leader first: a positive peak lag means the self vehicle sees the leader's
  // conditions that many seconds later.
  const auto curve = correlation::cross_correlation(correlation::extract(next, kpi),
                                                    correlation::extract(self, kpi), o.max_lag_s, o.step_s);

  std::string csv = "lag_s,r,n\n";
  plot::Series series{"next " + std::to_string(o.next_id) + " vs self " + std::to_string(o.self_id), {}, {}};
  for (std::size_t i = 0; i < curve.lags_s.size(); ++i) {
    csv += traces::format_double(curve.lags_s[i]) + "," +
           (curve.r[i] ? traces::format_double(*curve.r[i]) : std::string()) + "," +
           std::to_string(curve.n_per_lag[i]) + "\n";
    series.x.push_back(curve.lags_s[i] / 60.0);
    series.y.push_back(curve.r[i] ? *curve.r[i] : std::nan(""));
  }
  fs::create_directories(o.out);
  write_file(fs::path(o.out) / "correlation.csv", csv);
  write_file(fs::path(o.out) / "correlation.svg",
             plot::line_plot({"Cross-correlation of " + std::string(correlation::kpi_name(kpi)), "lag [min]",
                              "Pearson r"},
                             {series}));
  out << "peak_lag_s=" << traces::format_double(correlation::peak_lag(curve)) << '\n';
}

void build_dataset(const Options& o, std::ostream& out) {
  const auto cfg = load_config(o.config);
  const auto all = traces::load_traces(o.traces);
  const double period = cfg.experiment.period_s;
  const auto self = traces::resample(traces::find_vehicle(all, o.self_id), period);
  const auto next = traces::resample(traces::find_vehicle(all, o.next_id), period);
  const auto ds = alignment::build_dataset(self, next, alignment::parse_feature_set(o.feature_set),
                                           {period, cfg.experiment.v_min_mps, cfg.experiment.round_length_m});
  std::ostringstream csv;
  alignment::write_dataset_csv(csv, ds);
  write_file(o.out, csv.str());
  out << "wrote " << ds.rows.size() << " rows to " << o.out << '\n';
}

alignment::SupervisedDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset " + path);
  return alignment::read_dataset_csv(in);
}

void train(const Options& o, std::ostream& out) {
  auto cfg = load_config(o.config);
  if (o.seed) cfg.gbt.seed = *o.seed;
  const auto ds = load_dataset(o.dataset);
  const auto model = gbt::fit(ds, cfg.gbt);
  write_file(o.model, gbt::to_json(model));
  out << "trained " << model.trees.size() << " trees on " << ds.rows.size() << " rows\n";
}

void evaluate(const Options& o, std::ostream& out) {
  auto cfg = load_config(o.config);
  if (o.seed) cfg.experiment.seed = *o.seed;
  if (!o.model.empty() || !o.dataset.empty()) {
    if (o.model.empty() || o.dataset.empty()) throw DomainError("--model and --dataset must be given together");
    const auto model = gbt::from_json(read_file(o.model));
    const auto ds = load_dataset(o.dataset);
    std::vector<double> y;
    for (const auto& r : ds.rows) y.push_back(r.target_mbps);
    std::vector<std::vector<double>> x;
    for (const auto& r : ds.rows) x.push_back(r.features);
    const auto m = evaluation::mrpe(model.predict_rows(x), y, cfg.experiment.clamp_mbps);
    const auto imp = evaluation::permutation_importance(model, ds, cfg.experiment.importance_repeats,
                                                        cfg.experiment.seed + 1, cfg.experiment.clamp_mbps);
    nlohmann::json doc = {{"mrpe_percent", m.mrpe_percent}, {"n_rows", m.n_rows}, {"clamp_mbps", m.clamp_mbps}};
    for (const auto& f : imp) doc["importance"].push_back({{"feature", f.feature}, {"importance", f.importance}});
    write_file(o.out, doc.dump(1));
    out << "mrpe_percent=" << traces::format_double(m.mrpe_percent) << '\n';
    return;
  }
  if (o.traces.empty()) throw DomainError("evaluate needs --traces, or --model with --dataset");
  const auto all = traces::load_traces(o.traces);
  const auto report = evaluation::run_experiment(all, cfg.experiment);
  write_file(o.out, evaluation::to_json(report));
  std::size_t ok = 0;
  for (const auto& c : report.cells) ok += c.ok;
  out << "evaluated " << report.cells.size() << " models (" << ok << " ok)\n";
}

void report(const Options& o, std::ostream& out) {
  const auto r = evaluation::report_from_json(read_file(o.experiment));
  evaluation::write_report_artifacts(r, o.out);
  out << "wrote report artifacts to " << o.out << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Predictive QoS lab: simulate, analyze, build-dataset, train, evaluate, report", "pqos"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "Simulate a multi-vehicle highway campaign");
  sim->add_option("--config", o.config, "JSON configuration file");
  sim->add_option("--seed", o.seed, "Campaign seed (overrides the config)");
  sim->add_option("--out", o.out, "Output directory for per-vehicle CSV traces")->required();

  auto* ana = app.add_subcommand("analyze", "Lagged cross-correlation between two vehicles");
  ana->add_option("--traces", o.traces, "Trace CSV file or directory")->required();
  ana->add_option("--self", o.self_id, "Self vehicle id")->required();
  ana->add_option("--next", o.next_id, "Leading vehicle id")->required();
  ana->add_option("--kpi", o.kpi, "Signal to correlate")
      ->check(CLI::IsMember({"rsrp", "rsrq", "rssi", "snr", "throughput"}))
      ->capture_default_str();
  ana->add_option("--max-lag-s", o.max_lag_s, "Largest lag in seconds")->capture_default_str();
  ana->add_option("--step-s", o.step_s, "Resample period and lag step")->capture_default_str();
  ana->add_option("--out", o.out, "Output directory for correlation.csv / .svg")->required();

  auto* bld = app.add_subcommand("build-dataset", "Build a look-ahead supervised dataset");
  bld->add_option("--traces", o.traces, "Trace CSV file or directory")->required();
  bld->add_option("--self", o.self_id, "Self vehicle id")->required();
  bld->add_option("--next", o.next_id, "Leading vehicle id")->required();
  bld->add_option("--feature-set", o.feature_set, "Feature set")
      ->check(CLI::IsMember({"baseline", "phy", "phy-cell", "next-phy", "next-phy-cell"}))
      ->capture_default_str();
  bld->add_option("--config", o.config, "JSON configuration file (experiment section)");
  bld->add_option("--out", o.out, "Output dataset CSV")->required();

  auto* trn = app.add_subcommand("train", "Fit a gradient-boosted tree model");
  trn->add_option("--dataset", o.dataset, "Dataset CSV from build-dataset")->required();
  trn->add_option("--model", o.model, "Output model JSON")->required();
  trn->add_option("--config", o.config, "JSON configuration file (gbt section)");
  trn->add_option("--seed", o.seed, "Learner seed (overrides the config)");

  auto* evl = app.add_subcommand("evaluate", "Run the experiment grid, or score one model");
  evl->add_option("--traces", o.traces, "Trace CSV file or directory (grid mode)");
  evl->add_option("--model", o.model, "Model JSON (single-model mode)");
  evl->add_option("--dataset", o.dataset, "Dataset CSV (single-model mode)");
  evl->add_option("--config", o.config, "JSON configuration file (gbt and experiment sections)");
  evl->add_option("--seed", o.seed, "Experiment seed (overrides the config)");
  evl->add_option("--out", o.out, "Output JSON report")->required();

  auto* rep = app.add_subcommand("report", "Render bar, scatter and importance artifacts");
  rep->add_option("--experiment", o.experiment, "Experiment report JSON from evaluate")->required();
  rep->add_option("--out", o.out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) simulate(o, out);
    if (ana->parsed()) analyze(o, out);
    if (bld->parsed()) build_dataset(o, out);
    if (trn->parsed()) train(o, out);
    if (evl->parsed()) evaluate(o, out);
    if (rep->parsed()) report(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitOk;
}

}  // namespace pqos::cli
