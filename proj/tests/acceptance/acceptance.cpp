// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pqos/alignment.hpp"
#include "pqos/cli.hpp"
#include "pqos/correlation.hpp"
#include "pqos/errors.hpp"
#include "pqos/evaluation.hpp"
#include "pqos/gbt.hpp"
#include "pqos/radio_sim.hpp"

namespace {

namespace fs = std::filesystem;
using pqos::alignment::FeatureSetKind;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed checks; the detail string keeps the first few messages.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ < 5) detail_ += (detail_.empty() ? "" : "; ") + what;
  }
  Outcome result(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, std::to_string(failures_) + " failed check(s): " + detail_};
  }

 private:
  int failures_ = 0;
  std::string detail_;
};

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// --- 1: MRPE arithmetic ------------------------------------------------------

Outcome mrpe_oracle() {
  using pqos::evaluation::mrpe;
  Checker c;
  const std::vector<double> y{3.0, 0.4, 12.0};
  c.expect(std::abs(mrpe(y, y).mrpe_percent) <= 1e-9, "identity is not 0");
  c.expect(std::abs(mrpe(std::vector<double>{2, 4}, std::vector<double>{1, 2}).mrpe_percent - 100.0) <= 1e-9,
           "[2,4] vs [1,2] is not 100");
  c.expect(std::abs(mrpe(std::vector<double>{0.5}, std::vector<double>{0.2}, 1.0).mrpe_percent - 30.0) <= 1e-9,
           "[0.5] vs [0.2] is not 30");

  // Targets below the clamp contribute the clamp to the denominator.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> small(0.0, 1.0), any(0.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(8), t(8);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < 8; ++i) {
      p[i] = any(rng);
      t[i] = trial % 2 ? small(rng) : any(rng);
      num += std::abs(p[i] - t[i]);
      den += t[i] < 1.0 ? 1.0 : t[i];
    }
    c.expect(std::abs(mrpe(p, t, 1.0).mrpe_percent - 100.0 * num / den) <= 1e-9, "clamp arithmetic");
  }
  std::vector<double> zeros(5, 0.0), big{2, 3, 4, 5, 6};
  c.expect(std::abs(mrpe(zeros, big).mrpe_percent - 100.0) <= 1e-9, "all-zero predictor is not 100");
  return c.result("3 examples exact, 1000 clamp cases");
}

// --- 2: look-ahead construction ---------------------------------------------

pqos::VehicleTrace toy_trace(int id, std::mt19937_64& rng, double x0, double t0, int n, bool stalls) {
  std::uniform_real_distribution<double> speed(stalls ? 0.0 : 5.0, 25.0), coin(0.0, 1.0), tput(1.0, 60.0);
  pqos::VehicleTrace tr{id, {}};
  double x = x0;
  for (int i = 0; i < n; ++i) {
    const double v = speed(rng);
    if (coin(rng) > 0.2) {
      pqos::TraceSample s;
      s.t_s = t0 + i;
      s.position_m = x;
      s.speed_mps = v;
      s.throughput_mbps = tput(rng);
      s.phy = {-80 - x / 100, -10, -60, 15 - x / 200, 1};
      tr.samples.push_back(s);
    }
    x += v;
  }
  return tr;
}

struct ExpectedRow {
  double t, tau, target;
};

std::vector<ExpectedRow> enumerate_rows(const pqos::VehicleTrace& self, const pqos::VehicleTrace& next) {
  auto closest = [](const pqos::VehicleTrace& tr, double t) -> const pqos::TraceSample* {
    const pqos::TraceSample* best = nullptr;
    for (const auto& s : tr.samples) {
      const double dt = std::abs(s.t_s - t);
      if (dt <= 0.5 && (!best || dt < std::abs(best->t_s - t))) best = &s;
    }
    return best;
  };
  std::vector<ExpectedRow> rows;
  for (const auto& s : self.samples) {
    const auto* n = closest(next, s.t_s);
    if (!n) continue;
    const double d = n->position_m - s.position_m;
    if (d < 0 || s.speed_mps <= 1.0) continue;
    const double tau = d / s.speed_mps;
    const auto* target = closest(self, s.t_s + tau);
    if (target) rows.push_back({s.t_s, tau, target->throughput_mbps});
  }
  return rows;
}

Outcome construction_oracle() {
  Checker c;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> len(5, 20);
  std::uniform_real_distribution<double> gap(0.0, 120.0), shift(-3.0, 3.0);
  int compared = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto self = toy_trace(2, rng, 0.0, 0.0, len(rng), trial % 3 == 0);
    const auto next = toy_trace(1, rng, gap(rng), std::round(shift(rng)), len(rng), false);
    const auto expected = enumerate_rows(self, next);
    for (auto kind : pqos::alignment::kAllFeatureSets) {
      std::vector<pqos::alignment::AlignedRow> rows;
      try {
        rows = pqos::alignment::build_dataset(self, next, kind).rows;
      } catch (const pqos::DomainError&) {
      }
      c.expect(rows.size() == expected.size(), "row count differs in trial " + std::to_string(trial));
      if (rows.size() != expected.size()) continue;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        c.expect(rows[i].t_s == expected[i].t && rows[i].tau_s == expected[i].tau &&
                     rows[i].target_mbps == expected[i].target,
                 "row mismatch in trial " + std::to_string(trial));
        ++compared;
      }
    }
  }
  return c.result(std::to_string(compared) + " rows match exactly over 500 toy pairs");
}

// --- 3: correlation peak ------------------------------------------------------

Outcome correlation_peak() {
  pqos::radio::EnvironmentConfig env;
  env.load_process.std = 0.0;
  env.throughput_noise_std = 0.0;
  int hits = 0;
  std::string peaks;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    pqos::radio::CampaignConfig campaign;
    campaign.n_vehicles = 2;
    campaign.start_gap_s = 180.0;
    campaign.n_rounds = 1;
    campaign.seed = seed;
    const auto traces = pqos::radio::simulate_campaign(env, campaign);
    using namespace pqos::correlation;
    const auto curve =
        cross_correlation(extract(traces[0], Kpi::kRsrp), extract(traces[1], Kpi::kRsrp), 400.0);
    const double lag = peak_lag(curve);
    if (std::abs(lag - 180.0) <= 10.0) ++hits;
    peaks += (peaks.empty() ? "" : ",") + fmt(lag, 0);
  }
  return {hits >= 4, std::to_string(hits) + "/5 seeds within 180+-10 s (peaks " + peaks + ")"};
}

// --- 4 and 5: experiment grid -------------------------------------------------

struct GridStats {
  bool complete = true;
  std::string complete_detail;
  std::map<FeatureSetKind, double> mean_all;    // over seeds and pairs
  std::map<FeatureSetKind, double> mean_next1;  // over seeds, longest gap pair
  int n_seeds = 0;
};

GridStats run_grid() {
  GridStats g;
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::map<FeatureSetKind, int> n_all, n_next1;
  for (auto seed : seeds) {
    pqos::radio::CampaignConfig campaign;
    campaign.seed = seed;
    const auto traces = pqos::radio::simulate_campaign(pqos::radio::EnvironmentConfig{}, campaign);
    pqos::evaluation::ExperimentConfig cfg;
    cfg.seed = seed;
    const auto report = pqos::evaluation::run_experiment(traces, cfg);
    std::size_t ok = 0;
    for (const auto& cell : report.cells) {
      if (!cell.ok) continue;
      ++ok;
      g.mean_all[cell.feature_set] += cell.mrpe.mrpe_percent;
      ++n_all[cell.feature_set];
      if (cell.next_id == 1) {
        g.mean_next1[cell.feature_set] += cell.mrpe.mrpe_percent;
        ++n_next1[cell.feature_set];
      }
    }
    if (report.cells.size() != 10 || ok != 10) {
      g.complete = false;
      g.complete_detail += "seed " + std::to_string(seed) + ": " + std::to_string(report.cells.size()) +
                           " cells, " + std::to_string(ok) + " ok; ";
    }
    ++g.n_seeds;
  }
  for (auto& [k, v] : g.mean_all) v /= n_all[k];
  for (auto& [k, v] : g.mean_next1) v /= n_next1[k];
  return g;
}

Outcome feature_ordering(const GridStats& g) {
  const double base = g.mean_all.at(FeatureSetKind::kBaseline);
  const double best = g.mean_all.at(FeatureSetKind::kNextPhyAndCell);
  const double reduction = 100.0 * (base - best) / base;
  const double phy = g.mean_next1.at(FeatureSetKind::kPhy);
  const double next_phy = g.mean_next1.at(FeatureSetKind::kNextPhy);
  const bool pass = best < base && reduction >= 20.0 && next_phy < phy;
  return {pass, "mean MRPE baseline " + fmt(base, 2) + "%, next-phy-cell " + fmt(best, 2) + "% (reduction " +
                    fmt(reduction, 1) + "%, reference 45%); 9-min pair phy " + fmt(phy, 2) + "%, next-phy " +
                    fmt(next_phy, 2) + "% over " + std::to_string(g.n_seeds) + " seeds"};
}

Outcome grid_completeness(const GridStats& g) {
  if (g.complete) return {true, "10 of 10 cells succeeded for every seed"};
  return {false, g.complete_detail};
}

// --- 6: learner -------------------------------------------------------------

double train_mse(const pqos::gbt::GbtModel& m, const std::vector<std::vector<double>>& x,
                 const std::vector<double>& y, std::size_t n_trees) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = m.predict_partial(x[i], n_trees) - y[i];
    s += e * e;
  }
  return s / static_cast<double>(y.size());
}

Outcome learner() {
  Checker c;
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 200; ++i) {
    const double v = -1.0 + 2.0 * (i + 0.5) / 200.0;
    x.push_back({v});
    y.push_back(v > 0 ? 1.0 : 0.0);
  }
  pqos::gbt::GbtConfig step;
  step.max_depth = 1;
  step.n_rounds = 50;
  step.learning_rate = 0.3;
  const auto stump = pqos::gbt::fit(x, y, {"x"}, step);
  const double step_mse = train_mse(stump, x, y, stump.trees.size());
  c.expect(step_mse < 1e-3, "step MSE " + fmt(step_mse, 6));

  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> n_rows(10, 300), dims(1, 6), depth(1, 6), leaf(1, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = dims(rng);
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    std::vector<std::string> names;
    for (int j = 0; j < k; ++j) names.push_back("f" + std::to_string(j));
    const int n = n_rows(rng);
    for (int i = 0; i < n; ++i) {
      std::vector<double> row;
      for (int j = 0; j < k; ++j) row.push_back(g(rng));
      ys.push_back(std::tanh(2 * row[0]) + row[k - 1] * row[k - 1] + 0.5 * g(rng));
      xs.push_back(std::move(row));
    }
    pqos::gbt::GbtConfig cfg;
    cfg.n_rounds = 40;
    cfg.max_depth = depth(rng);
    cfg.min_samples_leaf = leaf(rng);
    cfg.learning_rate = 0.05 + 0.9 * std::uniform_real_distribution<double>(0, 1)(rng);
    const auto m = pqos::gbt::fit(xs, ys, names, cfg);
    double prev = train_mse(m, xs, ys, 0);
    for (std::size_t r = 1; r <= m.trees.size(); ++r) {
      const double cur = train_mse(m, xs, ys, r);
      c.expect(cur <= prev * (1 + 1e-12) + 1e-15, "loss rose in dataset " + std::to_string(trial));
      prev = cur;
    }
    if (trial % 10 == 0) {
      const auto back = pqos::gbt::from_json(pqos::gbt::to_json(m));
      std::uniform_real_distribution<double> u(-3.0, 3.0);
      for (int p = 0; p < 1000; ++p) {
        std::vector<double> probe;
        for (int j = 0; j < k; ++j) probe.push_back(u(rng));
        c.expect(back.predict(probe) == m.predict(probe), "round-trip prediction differs");
      }
    }
  }
  return c.result("step MSE " + fmt(step_mse, 8) + "; loss monotone on 100 datasets; 10x1000 probes identical");
}

// --- 7: end-to-end determinism ----------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> run_pipeline(const fs::path& root) {
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string r = root.string();
  const std::vector<std::vector<std::string>> steps = {
      {"simulate", "--seed", "7", "--out", r + "/traces"},
      {"build-dataset", "--traces", r + "/traces", "--self", "4", "--next", "1", "--feature-set", "next-phy-cell",
       "--out", r + "/dataset.csv"},
      {"train", "--dataset", r + "/dataset.csv", "--model", r + "/model.json", "--seed", "7"},
      {"evaluate", "--traces", r + "/traces", "--seed", "7", "--out", r + "/experiment.json"},
      {"report", "--experiment", r + "/experiment.json", "--out", r + "/figs"},
  };
  std::ostringstream sink;
  for (const auto& args : steps) {
    const int code = pqos::cli::run(args, sink, sink);
    if (code != 0) throw std::runtime_error(args[0] + " exited " + std::to_string(code) + ": " + sink.str());
  }
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / "pqos_acceptance_determinism";
  const auto a = run_pipeline(base / "a");
  const auto b = run_pipeline(base / "b");
  fs::remove_all(base);
  if (a.size() != b.size()) return {false, "file sets differ"};
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) return {false, name + " differs between runs"};
  }
  for (const char* needed : {"traces/vehicle_1.csv", "dataset.csv", "model.json", "experiment.json"}) {
    if (!a.count(needed)) return {false, std::string("missing ") + needed};
  }
  return {true, std::to_string(a.size()) + " files byte-identical"};
}

// --- 8: permutation importance ----------------------------------------------

Outcome importance() {
  Checker c;
  auto make = [](std::mt19937_64& rng, int n, bool copy) {
    std::normal_distribution<double> g(0.0, 1.0);
    pqos::alignment::SupervisedDataset ds;
    ds.feature_schema = {"signal", "noise", "copy"};
    for (int i = 0; i < n; ++i) {
      pqos::alignment::AlignedRow r;
      const double s = g(rng);
      r.target_mbps = 40.0 + 8.0 * s + 2.0 * g(rng);
      r.features = {s, g(rng), copy ? r.target_mbps : g(rng)};
      ds.rows.push_back(r);
    }
    return ds;
  };
  pqos::gbt::GbtConfig cfg;
  cfg.n_rounds = 100;
  cfg.max_depth = 3;
  double worst_noise = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    std::mt19937_64 rng(seed);
    const auto train = make(rng, 1000, false);
    const auto test = make(rng, 1000, false);
    const auto model = pqos::gbt::fit(train, cfg);
    for (const auto& fi : pqos::evaluation::permutation_importance(model, test, 5, seed)) {
      if (fi.feature == "noise" || fi.feature == "copy") {
        worst_noise = std::max(worst_noise, std::abs(fi.importance));
        c.expect(std::abs(fi.importance) <= 2.0, fi.feature + " importance " + fmt(fi.importance));
      }
    }
    const auto with_copy = make(rng, 600, true);
    const auto copy_model = pqos::gbt::fit(with_copy, cfg);
    const auto ranking = pqos::evaluation::permutation_importance(copy_model, with_copy, 5, seed);
    c.expect(ranking[0].feature == "copy" && ranking[0].importance > ranking[1].importance,
             "copy ranked " + ranking[0].feature);
  }
  return c.result("max |noise importance| " + fmt(worst_noise) + " pp; copy ranked first for 3 seeds");
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&failed](int id, const char* name, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << ", " << fmt(secs, 1)
              << " s): " << o.detail << std::endl;
  };

  report(1, "mrpe oracle", mrpe_oracle);
  report(2, "look-ahead construction", construction_oracle);
  report(3, "correlation peak", correlation_peak);
  GridStats grid;
  report(4, "feature-set ordering", [&] {
    grid = run_grid();
    return feature_ordering(grid);
  });
  report(5, "grid completeness", [&] {
    if (grid.n_seeds == 0) return Outcome{false, "grid did not run"};
    return grid_completeness(grid);
  });
  report(6, "gbt learner", learner);
  report(7, "pipeline determinism", determinism);
  report(8, "permutation importance", importance);
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
