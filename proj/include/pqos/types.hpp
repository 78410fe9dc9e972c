#pragma once

#include <vector>

namespace pqos {

/// PHY-layer KPIs reported by a UE for its serving cell.
struct PhyMeasurement {
  double rsrp_dbm = 0.0;
  double rsrq_db = 0.0;
  double rssi_dbm = 0.0;
  double snr_db = 0.0;
  int serving_cell_id = 0;

  bool operator==(const PhyMeasurement&) const = default;
};

/// Load state of the serving cell at the time of a sample.
struct CellState {
  int cell_id = 0;
  double load = 0.0;               // fraction in [0, 1]
  double connected_devices = 0.0;  // count; fractional after resampling

  bool operator==(const CellState&) const = default;
};

struct TraceSample {
  double t_s = 0.0;         // seconds since campaign start
  double position_m = 0.0;  // distance travelled along the route
  double speed_mps = 0.0;
  PhyMeasurement phy;
  CellState cell;
  double throughput_mbps = 0.0;

  bool operator==(const TraceSample&) const = default;
};

/// Time-ordered samples of one vehicle. Timestamps are strictly increasing.
struct VehicleTrace {
  int vehicle_id = 0;
  std::vector<TraceSample> samples;

  bool operator==(const VehicleTrace&) const = default;
};

}  // namespace pqos
