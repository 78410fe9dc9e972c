#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pqos/alignment.hpp"
#include "pqos/gbt.hpp"
#include "pqos/types.hpp"

namespace pqos::evaluation {

struct MrpeResult {
  double mrpe_percent = 0.0;
  std::size_t n_rows = 0;
  double clamp_mbps = 1.0;
};

/// Mean relative percentage error: 100 * sum|yhat - y| / sum max(y, clamp).
/// Throws DomainError on empty or mismatched input.
MrpeResult mrpe(std::span<const double> predictions, std::span<const double> targets,
                double clamp_mbps = 1.0);

struct FeatureImportance {
  std::string feature;
  double importance = 0.0;  // mean MRPE increase, percentage points
};

/// Mean MRPE increase over n_repeats random permutations of each feature
/// column. Sorted by decreasing importance, ties in schema order.
std::vector<FeatureImportance> permutation_importance(const gbt::GbtModel& model,
                                                      const alignment::SupervisedDataset& dataset,
                                                      int n_repeats, std::uint64_t seed,
                                                      double clamp_mbps = 1.0);

struct ExperimentConfig {
  int self_id = 4;
  std::vector<int> next_ids = {1, 3};
  std::vector<alignment::FeatureSetKind> feature_sets{alignment::kAllFeatureSets.begin(),
                                                      alignment::kAllFeatureSets.end()};
  double period_s = 1.0;
  double v_min_mps = 1.0;
  double round_length_m = 36000.0;
  std::optional<int> test_round;  // default: last round present in each dataset
  int importance_repeats = 5;
  double clamp_mbps = 1.0;
  gbt::GbtConfig gbt;
  std::uint64_t seed = 0;  // drives the learner and the importance permutations
};

void validate(const ExperimentConfig& config);

struct Prediction {
  double t_s = 0.0;
  int round = 0;
  double tau_s = 0.0;
  double target_mbps = 0.0;
  double predicted_mbps = 0.0;
};

struct CellResult {
  int self_id = 0;
  int next_id = 0;
  alignment::FeatureSetKind feature_set = alignment::FeatureSetKind::kBaseline;
  bool ok = false;
  std::string failure_reason;
  MrpeResult mrpe;
  int test_round = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double mean_tau_s = 0.0;
  alignment::DropCounts dropped;
  std::vector<FeatureImportance> importance;
  std::vector<int> train_rounds;
  std::vector<Prediction> predictions;  // held-out rows
  // (round, t_s) of every training row. Kept in memory only, for split audits.
  std::vector<std::pair<int, double>> train_rows;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string split;
  std::vector<CellResult> cells;  // ordered by next id, then feature set
};

/// Trains and scores one model per (next vehicle, feature set). A cell that
/// cannot be built or split is recorded as failed and the run continues.
ExperimentReport run_experiment(const std::vector<VehicleTrace>& traces, const ExperimentConfig& config);

std::string to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

/// Writes mrpe_bars.{csv,svg}, scatter.csv, one scatter_self<S>_next<N>.svg
/// per vehicle pair, and importance.csv into out_dir.
void write_report_artifacts(const ExperimentReport& report, const std::filesystem::path& out_dir);

}  // namespace pqos::evaluation
