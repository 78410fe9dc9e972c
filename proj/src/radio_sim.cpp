#include "pqos/radio_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pqos/errors.hpp"

namespace pqos::radio {
namespace {

constexpr double kSectorBeamwidthDeg = 65.0;
constexpr double kSectorMaxAttenuationDb = 20.0;
constexpr int kSubcarriersPerRb = 12;

enum class Stream : std::uint32_t { kShadow = 1, kLoadShared, kLoadCell, kSpeed, kThroughput };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint32_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), index};
  return std::mt19937_64(seq);
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

// Unit-variance Ornstein-Uhlenbeck path sampled every dt seconds.
std::vector<double> ou_path(std::size_t n, double dt, double corr_time, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double a = std::exp(-dt / corr_time);
  const double b = std::sqrt(1.0 - a * a);
  std::vector<double> path(n);
  double x = normal(rng);
  for (std::size_t i = 0; i < n; ++i) {
    path[i] = x;
    x = a * x + b * normal(rng);
  }
  return path;
}

double sector_gain_db(const EnvironmentConfig& env, int sector, double dx) {
  if (env.cells_per_site == 1) return 0.0;
  const double boresight = 2.0 * std::numbers::pi * sector / env.cells_per_site;
  double delta = std::atan2(-env.site_offset_m, dx) - boresight;
  delta = std::remainder(delta, 2.0 * std::numbers::pi);
  const double rel = delta * 180.0 / std::numbers::pi / kSectorBeamwidthDeg;
  return -std::min(12.0 * rel * rel, kSectorMaxAttenuationDb);
}

class CellLoadField {
 public:
  CellLoadField(const EnvironmentConfig& env, std::uint64_t seed, double dt, double horizon_s)
      : dt_(dt) {
    const auto& lp = env.load_process;
    const auto n = static_cast<std::size_t>(std::ceil(horizon_s / dt)) + 2;
    loads_.assign(static_cast<std::size_t>(env.n_cells()), std::vector<double>(n, lp.mean_load));
    if (lp.std <= 0.0) return;
    auto shared_rng = make_rng(seed, Stream::kLoadShared, 0);
    const auto shared = ou_path(n, dt, lp.correlation_time_s, shared_rng);
    const double ws = std::sqrt(lp.shared_fraction);
    const double wc = std::sqrt(1.0 - lp.shared_fraction);
    for (std::size_t c = 0; c < loads_.size(); ++c) {
      auto rng = make_rng(seed, Stream::kLoadCell, static_cast<std::uint32_t>(c));
      const auto own = ou_path(n, dt, lp.correlation_time_s, rng);
      for (std::size_t i = 0; i < n; ++i) {
        loads_[c][i] = std::clamp(lp.mean_load + lp.std * (ws * shared[i] + wc * own[i]), 0.0, 1.0);
      }
    }
  }

  double load(int cell_id, double t) const {
    const auto& series = loads_[static_cast<std::size_t>(cell_id - 1)];
    const auto i = static_cast<std::size_t>(std::max<long long>(0, std::llround(t / dt_)));
    return series[std::min(i, series.size() - 1)];
  }

 private:
  double dt_;
  std::vector<std::vector<double>> loads_;
};

struct Kinematics {
  std::vector<double> t, position, speed;
};

Kinematics drive(const EnvironmentConfig& env, const CampaignConfig& c, int vehicle) {
  auto rng = make_rng(c.seed, Stream::kSpeed, static_cast<std::uint32_t>(vehicle));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double dt = c.sample_period_s;
  const double a = std::exp(-dt / c.speed_corr_time_s);
  const double b = std::sqrt(1.0 - a * a);
  const double total = round_length_m(env) * c.n_rounds;
  const double t0 = vehicle * c.start_gap_s;

  Kinematics k;
  double g = normal(rng);
  double odometer = 0.0;
  for (std::size_t i = 0;; ++i) {
    const double v = c.nominal_speed_mps * (1.0 + c.speed_jitter * std::clamp(g, -3.0, 3.0));
    k.t.push_back(t0 + static_cast<double>(i) * dt);
    k.position.push_back(std::min(odometer, total));
    k.speed.push_back(v);
    if (odometer >= total) break;
    odometer += v * dt;
    g = a * g + b * normal(rng);
  }
  return k;
}

}  // namespace

void validate(const EnvironmentConfig& env) {
  require(std::isfinite(env.road_length_m) && env.road_length_m > 0, "road_length_m", "must be > 0");
  require(!env.cell_positions_m.empty(), "cell_positions_m", "at least one site required");
  for (double p : env.cell_positions_m) {
    require(std::isfinite(p) && p >= 0 && p <= env.road_length_m, "cell_positions_m",
            "positions must lie within [0, road_length_m]");
  }
  require(env.cells_per_site >= 1, "cells_per_site", "must be >= 1");
  require(std::isfinite(env.site_offset_m) && env.site_offset_m >= 0, "site_offset_m", "must be >= 0");
  require(std::isfinite(env.tx_power_dbm), "tx_power_dbm", "must be finite");
  require(std::isfinite(env.pathloss_exponent) && env.pathloss_exponent >= 2, "pathloss_exponent",
          "must be >= 2");
  require(std::isfinite(env.pathloss_ref_db), "pathloss_ref_db", "must be finite");
  require(std::isfinite(env.shadowing_sigma_db) && env.shadowing_sigma_db >= 0, "shadowing_sigma_db",
          "must be >= 0");
  require(std::isfinite(env.shadowing_corr_length_m) && env.shadowing_corr_length_m > 0,
          "shadowing_corr_length_m", "must be > 0");
  require(std::isfinite(env.effective_bandwidth_mhz) && env.effective_bandwidth_mhz > 0,
          "effective_bandwidth_mhz", "must be > 0");
  require(env.n_resource_blocks >= 1, "n_resource_blocks", "must be >= 1");
  require(std::isfinite(env.noise_floor_dbm), "noise_floor_dbm", "must be finite");
  const auto& lp = env.load_process;
  require(lp.mean_load >= 0 && lp.mean_load <= 1, "load_process.mean_load", "must lie in [0, 1]");
  require(std::isfinite(lp.std) && lp.std >= 0, "load_process.std", "must be >= 0");
  require(std::isfinite(lp.correlation_time_s) && lp.correlation_time_s > 0,
          "load_process.correlation_time_s", "must be > 0");
  require(lp.shared_fraction >= 0 && lp.shared_fraction <= 1, "load_process.shared_fraction",
          "must lie in [0, 1]");
  require(env.max_devices >= 0, "max_devices", "must be >= 0");
  require(std::isfinite(env.throughput_noise_std) && env.throughput_noise_std >= 0,
          "throughput_noise_std", "must be >= 0");
}

void validate(const CampaignConfig& c) {
  require(c.n_vehicles >= 2, "n_vehicles", "must be >= 2");
  require(std::isfinite(c.start_gap_s) && c.start_gap_s > 0, "start_gap_s", "must be > 0");
  require(std::isfinite(c.nominal_speed_mps) && c.nominal_speed_mps > 0, "nominal_speed_mps",
          "must be > 0");
  // Three standard deviations of jitter must keep the speed positive.
  require(std::isfinite(c.speed_jitter) && c.speed_jitter >= 0 && c.speed_jitter < 0.3,
          "speed_jitter", "must lie in [0, 0.3)");
  require(std::isfinite(c.speed_corr_time_s) && c.speed_corr_time_s > 0, "speed_corr_time_s",
          "must be > 0");
  require(c.n_rounds >= 1, "n_rounds", "must be >= 1");
  require(std::isfinite(c.sample_period_s) && c.sample_period_s > 0, "sample_period_s", "must be > 0");
}

double round_length_m(const EnvironmentConfig& env) { return 2.0 * env.road_length_m; }

double route_to_road(const EnvironmentConfig& env, double odometer_m) {
  const double r = std::fmod(odometer_m, round_length_m(env));
  return r <= env.road_length_m ? r : round_length_m(env) - r;
}

ShadowField::ShadowField(const EnvironmentConfig& env, std::uint64_t seed)
    : spacing_(std::min(1.0, env.shadowing_corr_length_m / 20.0)) {
  const auto n = static_cast<std::size_t>(std::ceil(env.road_length_m / spacing_)) + 2;
  grid_.reserve(static_cast<std::size_t>(env.n_cells()));
  for (int c = 0; c < env.n_cells(); ++c) {
    auto rng = make_rng(seed, Stream::kShadow, static_cast<std::uint32_t>(c));
    auto path = ou_path(n, spacing_, env.shadowing_corr_length_m, rng);
    for (auto& v : path) v *= env.shadowing_sigma_db;
    grid_.push_back(std::move(path));
  }
}

double ShadowField::value_db(int cell_index, double road_position_m) const {
  const auto& g = grid_.at(static_cast<std::size_t>(cell_index));
  const double u = std::max(0.0, road_position_m / spacing_);
  const auto i = std::min(static_cast<std::size_t>(u), g.size() - 2);
  const double frac = std::min(1.0, u - static_cast<double>(i));
  return g[i] + frac * (g[i + 1] - g[i]);
}

double mean_received_power_dbm(const EnvironmentConfig& env, int cell_index,
                               double road_position_m) {
  const int site = cell_index / env.cells_per_site;
  const int sector = cell_index % env.cells_per_site;
  const double dx = road_position_m - env.cell_positions_m[static_cast<std::size_t>(site)];
  const double d = std::max(1.0, std::hypot(dx, env.site_offset_m));
  const double pathloss = env.pathloss_ref_db + 10.0 * env.pathloss_exponent * std::log10(d);
  return env.tx_power_dbm - pathloss + sector_gain_db(env, sector, dx);
}

std::vector<double> received_powers_dbm(const EnvironmentConfig& env, const ShadowField& field,
                                        double road_position_m) {
  if (!(road_position_m >= 0.0 && road_position_m <= env.road_length_m)) {
    throw DomainError("position " + std::to_string(road_position_m) + " m is outside the road");
  }
  std::vector<double> p(static_cast<std::size_t>(env.n_cells()));
  for (int c = 0; c < env.n_cells(); ++c) {
    p[static_cast<std::size_t>(c)] =
        mean_received_power_dbm(env, c, road_position_m) - field.value_db(c, road_position_m);
  }
  return p;
}

PhyMeasurement link_quality(const EnvironmentConfig& env, const ShadowField& field,
                            double road_position_m, std::optional<int> current_serving) {
  const auto p = received_powers_dbm(env, field, road_position_m);
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c) {
    if (p[c] > p[best]) best = c;
  }
  std::size_t serving = best;
  if (current_serving) {
    if (*current_serving < 1 || *current_serving > env.n_cells()) {
      throw DomainError("unknown serving cell " + std::to_string(*current_serving));
    }
    const auto cur = static_cast<std::size_t>(*current_serving - 1);
    if (p[best] <= p[cur] + kHandoverHysteresisDb) serving = cur;
  }

  const double n_subcarriers = static_cast<double>(kSubcarriersPerRb * env.n_resource_blocks);
  const double noise_mw = dbm_to_mw(env.noise_floor_dbm);
  double total_mw = 0.0;
  double interference_mw = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    const double mw = dbm_to_mw(p[c]);
    total_mw += mw;
    if (c != serving) interference_mw += mw;
  }

  PhyMeasurement m;
  m.serving_cell_id = static_cast<int>(serving) + 1;
  m.rsrp_dbm = p[serving];
  m.snr_db = m.rsrp_dbm - mw_to_dbm(interference_mw + noise_mw / n_subcarriers);
  m.rssi_dbm = mw_to_dbm(n_subcarriers * total_mw + noise_mw);
  m.rsrq_db = 10.0 * std::log10(static_cast<double>(env.n_resource_blocks)) + m.rsrp_dbm - m.rssi_dbm;
  return m;
}

double throughput_sample(const EnvironmentConfig& env, const PhyMeasurement& phy,
                         const CellState& cell, std::mt19937_64& rng) {
  const double free_share = 1.0 - std::clamp(cell.load, 0.0, 1.0);
  double rate = env.effective_bandwidth_mhz * std::log2(1.0 + std::pow(10.0, phy.snr_db / 10.0)) *
                free_share;
  if (env.throughput_noise_std > 0.0) {
    std::normal_distribution<double> normal(0.0, env.throughput_noise_std);
    rate *= 1.0 + normal(rng);
  }
  return std::isfinite(rate) ? std::max(0.0, rate) : 0.0;
}

std::vector<VehicleTrace> simulate_campaign(const EnvironmentConfig& env,
                                            const CampaignConfig& campaign) {
  validate(env);
  validate(campaign);

  std::vector<Kinematics> paths;
  double horizon = 0.0;
  for (int k = 0; k < campaign.n_vehicles; ++k) {
    paths.push_back(drive(env, campaign, k));
    horizon = std::max(horizon, paths.back().t.back());
  }

  const ShadowField shadow(env, campaign.seed);
  const CellLoadField loads(env, campaign.seed, campaign.sample_period_s, horizon);

  std::vector<VehicleTrace> traces;
  traces.reserve(paths.size());
  for (int k = 0; k < campaign.n_vehicles; ++k) {
    const auto& path = paths[static_cast<std::size_t>(k)];
    auto rng = make_rng(campaign.seed, Stream::kThroughput, static_cast<std::uint32_t>(k));
    VehicleTrace trace;
    trace.vehicle_id = k + 1;
    trace.samples.reserve(path.t.size());
    std::optional<int> serving;
    for (std::size_t i = 0; i < path.t.size(); ++i) {
      TraceSample s;
      s.t_s = path.t[i];
      s.position_m = path.position[i];
      s.speed_mps = path.speed[i];
      s.phy = link_quality(env, shadow, route_to_road(env, s.position_m), serving);
      serving = s.phy.serving_cell_id;
      s.cell.cell_id = s.phy.serving_cell_id;
      s.cell.load = loads.load(s.cell.cell_id, s.t_s);
      s.cell.connected_devices = std::round(s.cell.load * env.max_devices);
      s.throughput_mbps = throughput_sample(env, s.phy, s.cell, rng);
      trace.samples.push_back(s);
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

}  // namespace pqos::radio
