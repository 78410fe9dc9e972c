#pragma once

// Synthetic highway radio environment: log-distance path loss, sectorised
// sites, spatially correlated log-normal shadowing frozen per cell, and a
// mean-reverting per-cell load process. simulate_campaign() drives a convoy of
// vehicles along a round-trip route through it.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "pqos/types.hpp"

namespace pqos::radio {

/// Mean-reverting (Ornstein-Uhlenbeck) cell load. The variance is split into
/// a component shared by all cells and an independent per-cell component.
struct LoadProcess {
  double mean_load = 0.4;
  double std = 0.1;
  double correlation_time_s = 300.0;
  double shared_fraction = 0.5;
};

struct EnvironmentConfig {
  double road_length_m = 18000.0;
  std::vector<double> cell_positions_m = {3000.0, 9000.0, 15000.0};  // one entry per site
  int cells_per_site = 2;
  double site_offset_m = 50.0;  // perpendicular distance from mast to road
  double tx_power_dbm = 30.0;   // reference-signal EIRP per resource element
  double pathloss_exponent = 2.8;
  double pathloss_ref_db = 40.7;
  double shadowing_sigma_db = 6.0;
  double shadowing_corr_length_m = 300.0;
  double effective_bandwidth_mhz = 8.0;
  int n_resource_blocks = 50;
  double noise_floor_dbm = -97.5;  // wideband, over all resource blocks
  LoadProcess load_process;
  int max_devices = 30;              // devices attached at load 1
  double throughput_noise_std = 0.05;  // relative

  int n_cells() const { return static_cast<int>(cell_positions_m.size()) * cells_per_site; }
};

struct CampaignConfig {
  int n_vehicles = 4;
  double start_gap_s = 180.0;
  double nominal_speed_mps = 30.0;
  double speed_jitter = 0.01;  // relative std of speed
  double speed_corr_time_s = 60.0;
  int n_rounds = 4;  // round trips per vehicle
  double sample_period_s = 1.0;
  std::uint64_t seed = 1;
};

inline constexpr double kHandoverHysteresisDb = 3.0;

/// Throws ConfigError naming the first invalid field.
void validate(const EnvironmentConfig& env);
void validate(const CampaignConfig& campaign);

/// Length of one round trip (out and back) in meters.
double round_length_m(const EnvironmentConfig& env);

/// Maps a route odometer reading onto a location along the road. The route
/// runs 0 -> road_length and back, repeatedly.
double route_to_road(const EnvironmentConfig& env, double odometer_m);

/// Per-cell shadowing as a function of road location, sampled on a fine grid
/// and linearly interpolated. First-order autoregressive along the road, so
/// the autocorrelation at separation d is exp(-d / corr_length).
class ShadowField {
 public:
  ShadowField() = default;
  ShadowField(const EnvironmentConfig& env, std::uint64_t seed);

  double value_db(int cell_index, double road_position_m) const;
  int n_cells() const { return static_cast<int>(grid_.size()); }
  double spacing_m() const { return spacing_; }

 private:
  double spacing_ = 1.0;
  std::vector<std::vector<double>> grid_;
};

/// Received per-resource-element power of every cell (index = cell_id - 1).
std::vector<double> received_powers_dbm(const EnvironmentConfig& env, const ShadowField& field,
                                        double road_position_m);

/// Mean (shadowing-free) received power of one cell.
double mean_received_power_dbm(const EnvironmentConfig& env, int cell_index,
                               double road_position_m);

/// KPIs at a road location. `current_serving` keeps the serving cell unless
/// another cell is stronger by more than the handover hysteresis. Without a
/// current cell the strongest cell serves, ties going to the lower id.
PhyMeasurement link_quality(const EnvironmentConfig& env, const ShadowField& field,
                            double road_position_m,
                            std::optional<int> current_serving = std::nullopt);

/// Shannon-style rate scaled by the free share of the cell, floored at 0.
double throughput_sample(const EnvironmentConfig& env, const PhyMeasurement& phy,
                         const CellState& cell, std::mt19937_64& rng);

/// Deterministic in (env, campaign). Vehicle ids are 1-based; vehicle k
/// (0-based) enters the route at t = k * start_gap_s.
std::vector<VehicleTrace> simulate_campaign(const EnvironmentConfig& env,
                                            const CampaignConfig& campaign);

}  // namespace pqos::radio
