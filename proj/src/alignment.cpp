#include "pqos/alignment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "pqos/errors.hpp"
#include "pqos/trace_store.hpp"

namespace pqos::alignment {
namespace {

const std::vector<std::string> kPhyNames = {"snr", "rsrp", "rsrq", "rssi"};

void append_phy(std::vector<double>& out, const PhyMeasurement& phy) {
  out.insert(out.end(), {phy.snr_db, phy.rsrp_dbm, phy.rsrq_db, phy.rssi_dbm});
}

void append_cell(std::vector<double>& out, const CellState& cell) {
  out.insert(out.end(), {cell.load, cell.connected_devices});
}

std::vector<double> assemble(FeatureSetKind kind, const TraceSample& self, const TraceSample& next) {
  std::vector<double> f;
  switch (kind) {
    case FeatureSetKind::kBaseline:
      f.push_back(self.throughput_mbps);
      break;
    case FeatureSetKind::kPhy:
      append_phy(f, self.phy);
      break;
    case FeatureSetKind::kPhyAndCell:
      append_phy(f, self.phy);
      append_cell(f, self.cell);
      break;
    case FeatureSetKind::kNextPhy:
      append_phy(f, next.phy);
      break;
    case FeatureSetKind::kNextPhyAndCell:
      append_phy(f, next.phy);
      append_cell(f, self.cell);
      break;
  }
  return f;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, std::size_t line) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError(line, "cannot parse number '" + text + "'");
  }
  return v;
}

}  // namespace

std::string_view to_string(FeatureSetKind kind) {
  switch (kind) {
    case FeatureSetKind::kBaseline: return "baseline";
    case FeatureSetKind::kPhy: return "phy";
    case FeatureSetKind::kPhyAndCell: return "phy-cell";
    case FeatureSetKind::kNextPhy: return "next-phy";
    case FeatureSetKind::kNextPhyAndCell: return "next-phy-cell";
  }
  return "?";
}

FeatureSetKind parse_feature_set(std::string_view name) {
  for (auto kind : kAllFeatureSets) {
    if (to_string(kind) == name) return kind;
  }
  throw DomainError("unknown feature set '" + std::string(name) + "'");
}

std::vector<std::string> feature_schema(FeatureSetKind kind) {
  std::vector<std::string> names;
  auto phy = [&](const char* who) {
    for (const auto& k : kPhyNames) names.push_back(std::string(who) + "_" + k);
  };
  auto cell = [&] {
    names.emplace_back("self_cell_load");
    names.emplace_back("self_connected_devices");
  };
  switch (kind) {
    case FeatureSetKind::kBaseline: names.emplace_back("self_throughput"); break;
    case FeatureSetKind::kPhy: phy("self"); break;
    case FeatureSetKind::kPhyAndCell: phy("self"); cell(); break;
    case FeatureSetKind::kNextPhy: phy("next"); break;
    case FeatureSetKind::kNextPhyAndCell: phy("next"); cell(); break;
  }
  return names;
}

const TraceSample* nearest_sample(const VehicleTrace& trace, double t_s, double tolerance_s) {
  const auto& s = trace.samples;
  auto it = std::lower_bound(s.begin(), s.end(), t_s,
                             [](const TraceSample& x, double t) { return x.t_s < t; });
  const TraceSample* best = nullptr;
  double best_dt = tolerance_s;
  if (it != s.begin()) {
    const auto& prev = *std::prev(it);
    if (t_s - prev.t_s <= best_dt) {
      best = &prev;
      best_dt = t_s - prev.t_s;
    }
  }
  if (it != s.end() && it->t_s - t_s <= tolerance_s && (!best || it->t_s - t_s < best_dt)) {
    best = &*it;
  }
  return best;
}

std::optional<double> pair_distance(const VehicleTrace& self, const VehicleTrace& next, double t_s,
                                    double tolerance_s) {
  const auto* a = nearest_sample(self, t_s, tolerance_s);
  const auto* b = nearest_sample(next, t_s, tolerance_s);
  if (!a || !b) return std::nullopt;
  return std::abs(b->position_m - a->position_m);
}

std::optional<double> lookahead_delay(double d_sn_m, double v_s_mps, double v_min_mps) {
  if (!(v_s_mps > v_min_mps)) return std::nullopt;
  return d_sn_m / v_s_mps;
}

SupervisedDataset build_dataset(const VehicleTrace& self, const VehicleTrace& next, FeatureSetKind kind,
                                const AlignmentOptions& options) {
  if (!(options.period_s > 0.0)) throw DomainError("period_s must be > 0");
  if (!(options.round_length_m > 0.0)) throw DomainError("round_length_m must be > 0");
  const double tol = 0.5 * options.period_s;

  SupervisedDataset ds;
  ds.self_id = self.vehicle_id;
  ds.next_id = next.vehicle_id;
  ds.feature_schema = feature_schema(kind);

  for (const auto& s : self.samples) {
    const auto* n = nearest_sample(next, s.t_s, tol);
    if (!n) {
      ++ds.dropped["next_missing"];
      continue;
    }
    // Odometers share an origin, so a negative gap means the next vehicle is behind.
    const double gap = n->position_m - s.position_m;
    if (gap < 0.0) {
      ++ds.dropped["next_behind"];
      continue;
    }
    const auto tau = lookahead_delay(gap, s.speed_mps, options.v_min_mps);
    if (!tau) {
      ++ds.dropped["standstill"];
      continue;
    }
    const auto* target = nearest_sample(self, s.t_s + *tau, tol);
    if (!target) {
      ++ds.dropped["target_missing"];
      continue;
    }
    AlignedRow row;
    row.t_s = s.t_s;
    row.round = static_cast<int>(std::floor(s.position_m / options.round_length_m));
    row.features = assemble(kind, s, *n);
    row.target_mbps = target->throughput_mbps;
    row.tau_s = *tau;
    row.d_sn_m = gap;
    ds.rows.push_back(std::move(row));
  }

  if (ds.rows.empty()) {
    std::string reasons;
    for (const auto& [reason, count] : ds.dropped) {
      reasons += (reasons.empty() ? "" : ", ") + reason + "=" + std::to_string(count);
    }
    throw DomainError("no usable rows for self " + std::to_string(self.vehicle_id) + " / next " +
                      std::to_string(next.vehicle_id) + " (dropped: " +
                      (reasons.empty() ? "none" : reasons) + ")");
  }
  return ds;
}

void write_dataset_csv(std::ostream& out, const SupervisedDataset& ds) {
  using traces::format_double;
  out << "self_id,next_id,t_s,round";
  for (const auto& name : ds.feature_schema) out << ',' << name;
  out << ",tau_s,d_sn_m,target_mbps\n";
  for (const auto& r : ds.rows) {
    out << ds.self_id << ',' << ds.next_id << ',' << format_double(r.t_s) << ',' << r.round;
    for (double f : r.features) out << ',' << format_double(f);
    out << ',' << format_double(r.tau_s) << ',' << format_double(r.d_sn_m) << ','
        << format_double(r.target_mbps) << '\n';
  }
}

SupervisedDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  const std::vector<std::string> head = {"self_id", "next_id", "t_s", "round"};
  const std::vector<std::string> tail = {"tau_s", "d_sn_m", "target_mbps"};
  if (header.size() < head.size() + tail.size() + 1 ||
      !std::equal(head.begin(), head.end(), header.begin()) ||
      !std::equal(tail.begin(), tail.end(), header.end() - static_cast<long>(tail.size()))) {
    throw SchemaError("dataset header must be self_id,next_id,t_s,round,<features>,tau_s,d_sn_m,target_mbps");
  }

  SupervisedDataset ds;
  ds.feature_schema.assign(header.begin() + static_cast<long>(head.size()),
                           header.end() - static_cast<long>(tail.size()));
  const std::size_t nf = ds.feature_schema.size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    const int self_id = static_cast<int>(parse_double(fields[0], line_no));
    const int next_id = static_cast<int>(parse_double(fields[1], line_no));
    if (ds.rows.empty()) {
      ds.self_id = self_id;
      ds.next_id = next_id;
    } else if (self_id != ds.self_id || next_id != ds.next_id) {
      throw ParseError(line_no, "dataset mixes vehicle pairs");
    }
    AlignedRow r;
    r.t_s = parse_double(fields[2], line_no);
    r.round = static_cast<int>(parse_double(fields[3], line_no));
    for (std::size_t j = 0; j < nf; ++j) r.features.push_back(parse_double(fields[4 + j], line_no));
    r.tau_s = parse_double(fields[4 + nf], line_no);
    r.d_sn_m = parse_double(fields[5 + nf], line_no);
    r.target_mbps = parse_double(fields[6 + nf], line_no);
    ds.rows.push_back(std::move(r));
  }
  return ds;
}

}  // namespace pqos::alignment
