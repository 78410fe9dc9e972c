#include "pqos/trace_store.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "pqos/errors.hpp"

namespace pqos::traces {
namespace {

constexpr std::size_t kNumColumns = std::size(kCsvColumns);

enum Col : std::size_t {
  kVehicle, kT, kPosition, kSpeed, kRsrp, kRsrq, kRssi, kSnr, kCell, kLoad, kDevices, kThroughput
};

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view text, std::size_t line, std::string_view column) {
  text = trim(text);
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError(line, "cannot parse '" + std::string(text) + "' in column " + std::string(column));
  }
  return value;
}

// Mode with ties resolved toward the value whose first occurrence is earliest.
int mode_of(const std::vector<int>& ids) {
  std::vector<std::pair<int, int>> counts;  // (id, count) in first-seen order
  for (int id : ids) {
    auto it = std::find_if(counts.begin(), counts.end(), [id](const auto& c) { return c.first == id; });
    if (it == counts.end()) {
      counts.emplace_back(id, 1);
    } else {
      ++it->second;
    }
  }
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

TraceSample aggregate(const std::vector<const TraceSample*>& bin, double t) {
  const double n = static_cast<double>(bin.size());
  TraceSample out;
  out.t_s = t;
  std::vector<int> serving, cells;
  for (const auto* s : bin) {
    out.position_m += s->position_m;
    out.speed_mps += s->speed_mps;
    out.phy.rsrp_dbm += s->phy.rsrp_dbm;
    out.phy.rsrq_db += s->phy.rsrq_db;
    out.phy.rssi_dbm += s->phy.rssi_dbm;
    out.phy.snr_db += s->phy.snr_db;
    out.cell.load += s->cell.load;
    out.cell.connected_devices += s->cell.connected_devices;
    out.throughput_mbps += s->throughput_mbps;
    serving.push_back(s->phy.serving_cell_id);
    cells.push_back(s->cell.cell_id);
  }
  out.position_m /= n;
  out.speed_mps /= n;
  out.phy.rsrp_dbm /= n;
  out.phy.rsrq_db /= n;
  out.phy.rssi_dbm /= n;
  out.phy.snr_db /= n;
  out.cell.load /= n;
  out.cell.connected_devices /= n;
  out.throughput_mbps /= n;
  out.phy.serving_cell_id = mode_of(serving);
  out.cell.cell_id = mode_of(cells);
  return out;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

VehicleTrace resample(const VehicleTrace& trace, double period_s) {
  if (!(period_s > 0.0)) throw DomainError("resample period must be > 0");
  if (trace.samples.empty()) throw DomainError("cannot resample an empty trace");

  VehicleTrace out;
  out.vehicle_id = trace.vehicle_id;
  std::vector<const TraceSample*> bin;
  long long current = 0;
  for (const auto& s : trace.samples) {
    // The small offset keeps grid-aligned timestamps in their own bin.
    const auto k = static_cast<long long>(std::floor(s.t_s / period_s + 1e-9));
    if (!bin.empty() && k != current) {
      out.samples.push_back(aggregate(bin, static_cast<double>(current) * period_s));
      bin.clear();
    }
    current = k;
    bin.push_back(&s);
  }
  out.samples.push_back(aggregate(bin, static_cast<double>(current) * period_s));
  return out;
}

void check_invariants(const VehicleTrace& trace) {
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& s = trace.samples[i];
    if (i > 0 && !(s.t_s > trace.samples[i - 1].t_s)) {
      throw DomainError("vehicle " + std::to_string(trace.vehicle_id) +
                        ": timestamps not strictly increasing at sample " + std::to_string(i));
    }
    if (s.speed_mps < 0.0) throw DomainError("negative speed at sample " + std::to_string(i));
    if (s.throughput_mbps < 0.0) throw DomainError("negative throughput at sample " + std::to_string(i));
  }
}

void write_csv(std::ostream& out, const std::vector<VehicleTrace>& traces) {
  for (std::size_t c = 0; c < kNumColumns; ++c) out << (c ? "," : "") << kCsvColumns[c];
  out << '\n';
  for (const auto& trace : traces) {
    for (const auto& s : trace.samples) {
      out << trace.vehicle_id << ',' << format_double(s.t_s) << ',' << format_double(s.position_m)
          << ',' << format_double(s.speed_mps) << ',' << format_double(s.phy.rsrp_dbm) << ','
          << format_double(s.phy.rsrq_db) << ',' << format_double(s.phy.rssi_dbm) << ','
          << format_double(s.phy.snr_db) << ',' << s.phy.serving_cell_id << ','
          << format_double(s.cell.load) << ',' << format_double(s.cell.connected_devices) << ','
          << format_double(s.throughput_mbps) << '\n';
    }
  }
}

std::vector<VehicleTrace> read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "missing header line");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split(line, ',');
  std::array<std::size_t, kNumColumns> index{};
  for (std::size_t c = 0; c < kNumColumns; ++c) {
    auto it = std::find_if(header.begin(), header.end(),
                           [&](std::string_view h) { return trim(h) == kCsvColumns[c]; });
    if (it == header.end()) throw SchemaError("missing column '" + std::string(kCsvColumns[c]) + "'");
    index[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<VehicleTrace> traces;
  std::map<int, std::size_t> slot;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    auto num = [&](Col c) { return parse_number<double>(fields[index[c]], line_no, kCsvColumns[c]); };
    auto integer = [&](Col c) { return parse_number<int>(fields[index[c]], line_no, kCsvColumns[c]); };

    const int id = integer(kVehicle);
    TraceSample s;
    s.t_s = num(kT);
    s.position_m = num(kPosition);
    s.speed_mps = num(kSpeed);
    s.phy.rsrp_dbm = num(kRsrp);
    s.phy.rsrq_db = num(kRsrq);
    s.phy.rssi_dbm = num(kRssi);
    s.phy.snr_db = num(kSnr);
    s.phy.serving_cell_id = integer(kCell);
    s.cell.cell_id = s.phy.serving_cell_id;
    s.cell.load = num(kLoad);
    s.cell.connected_devices = num(kDevices);
    s.throughput_mbps = num(kThroughput);

    auto [it, inserted] = slot.try_emplace(id, traces.size());
    if (inserted) traces.push_back(VehicleTrace{id, {}});
    auto& samples = traces[it->second].samples;
    if (!samples.empty() && !(s.t_s > samples.back().t_s)) {
      throw ParseError(line_no, "timestamps of vehicle " + std::to_string(id) + " not increasing");
    }
    samples.push_back(s);
  }
  return traces;
}

void store_csv(const std::vector<VehicleTrace>& traces, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_csv(out, traces);
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<VehicleTrace> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return read_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::vector<VehicleTrace> load_traces(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw Error("no such file or directory: " + path.string());
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error("no .csv traces in " + path.string());
  } else {
    files.push_back(path);
  }
  std::vector<VehicleTrace> all;
  for (const auto& f : files) {
    for (auto& t : load_csv(f)) {
      if (std::any_of(all.begin(), all.end(), [&](const auto& a) { return a.vehicle_id == t.vehicle_id; })) {
        throw DomainError("vehicle " + std::to_string(t.vehicle_id) + " appears in more than one file");
      }
      all.push_back(std::move(t));
    }
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.vehicle_id < b.vehicle_id; });
  return all;
}

const VehicleTrace& find_vehicle(const std::vector<VehicleTrace>& traces, int vehicle_id) {
  for (const auto& t : traces) {
    if (t.vehicle_id == vehicle_id) return t;
  }
  throw DomainError("no trace for vehicle " + std::to_string(vehicle_id));
}

}  // namespace pqos::traces
