#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pqos/types.hpp"

namespace pqos::traces {

/// Column order written by store_csv(). Readers key on header names, so any
/// permutation of these columns is accepted.
inline constexpr std::string_view kCsvColumns[] = {
    "vehicle_id",      "t_s",         "position_m", "speed_mps",
    "rsrp_dbm",        "rsrq_db",     "rssi_dbm",   "snr_db",
    "serving_cell_id", "cell_load",   "connected_devices", "throughput_mbps"};

/// Bins samples into [k*period, (k+1)*period) and emits one sample per
/// non-empty bin at t = k*period. Numeric fields are averaged; the serving
/// cell is the most frequent id in the bin, ties going to the id seen first.
VehicleTrace resample(const VehicleTrace& trace, double period_s);

/// Throws DomainError naming the violated invariant.
void check_invariants(const VehicleTrace& trace);

void write_csv(std::ostream& out, const std::vector<VehicleTrace>& traces);
std::vector<VehicleTrace> read_csv(std::istream& in);

void store_csv(const std::vector<VehicleTrace>& traces, const std::filesystem::path& path);
std::vector<VehicleTrace> load_csv(const std::filesystem::path& path);

/// Loads every *.csv file in a directory (sorted by file name) or a single
/// file, and returns the traces ordered by vehicle id.
std::vector<VehicleTrace> load_traces(const std::filesystem::path& path);

/// Returns the trace with the given id or throws DomainError.
const VehicleTrace& find_vehicle(const std::vector<VehicleTrace>& traces, int vehicle_id);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace pqos::traces
