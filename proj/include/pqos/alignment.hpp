#pragma once

// Supervised dataset construction for look-ahead throughput prediction.
// A row at time t pairs features measured at t with the self vehicle's
// throughput at t + tau, where tau = d_sn(t) / v_s(t) is the time the self
// vehicle needs to reach the next vehicle's current position.

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pqos/types.hpp"

namespace pqos::alignment {

enum class FeatureSetKind { kBaseline, kPhy, kPhyAndCell, kNextPhy, kNextPhyAndCell };

inline constexpr std::array<FeatureSetKind, 5> kAllFeatureSets = {
    FeatureSetKind::kBaseline, FeatureSetKind::kPhy, FeatureSetKind::kPhyAndCell,
    FeatureSetKind::kNextPhy, FeatureSetKind::kNextPhyAndCell};

/// CLI spelling: baseline, phy, phy-cell, next-phy, next-phy-cell.
std::string_view to_string(FeatureSetKind kind);
FeatureSetKind parse_feature_set(std::string_view name);

std::vector<std::string> feature_schema(FeatureSetKind kind);

struct AlignedRow {
  double t_s = 0.0;
  int round = 0;  // route round trip of the self vehicle at t
  std::vector<double> features;
  double target_mbps = 0.0;
  double tau_s = 0.0;
  double d_sn_m = 0.0;
};

/// Why candidate rows were rejected, keyed by reason.
using DropCounts = std::map<std::string, std::size_t>;

struct SupervisedDataset {
  int self_id = 0;
  int next_id = 0;
  std::vector<std::string> feature_schema;
  std::vector<AlignedRow> rows;
  DropCounts dropped;
};

struct AlignmentOptions {
  double period_s = 1.0;  // common resample period of both traces
  double v_min_mps = 1.0;
  double round_length_m = 36000.0;  // route length of one round trip
};

/// Sample closest in time to t, provided it is within tolerance_s.
const TraceSample* nearest_sample(const VehicleTrace& trace, double t_s, double tolerance_s);

/// |position_next(t) - position_self(t)| using the samples nearest to t, or
/// nullopt when either trace has no sample within tolerance_s of t.
std::optional<double> pair_distance(const VehicleTrace& self, const VehicleTrace& next, double t_s,
                                    double tolerance_s = 0.5);

/// d / v, or nullopt when v <= v_min (near standstill).
std::optional<double> lookahead_delay(double d_sn_m, double v_s_mps, double v_min_mps = 1.0);

/// Throws DomainError listing drop reasons if no row survives.
SupervisedDataset build_dataset(const VehicleTrace& self, const VehicleTrace& next, FeatureSetKind kind,
                                const AlignmentOptions& options = {});

/// Columns: self_id, next_id, t_s, round, <features...>, tau_s, d_sn_m, target_mbps.
void write_dataset_csv(std::ostream& out, const SupervisedDataset& dataset);
SupervisedDataset read_dataset_csv(std::istream& in);

}  // namespace pqos::alignment
