#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "pqos/types.hpp"

namespace pqos::correlation {

/// A KPI sampled on a regular time grid. `t_s` is strictly increasing.
struct TimeSeries {
  std::vector<double> t_s;
  std::vector<double> values;
};

enum class Kpi { kRsrp, kRsrq, kRssi, kSnr, kThroughput };

Kpi parse_kpi(std::string_view name);
std::string_view kpi_name(Kpi kpi);

TimeSeries extract(const VehicleTrace& trace, Kpi kpi);

/// Lags with fewer overlapping pairs than this are left undefined.
inline constexpr std::size_t kMinOverlap = 30;

struct CorrelationCurve {
  std::vector<double> lags_s;
  std::vector<std::optional<double>> r;  // nullopt where undefined
  std::vector<std::size_t> n_per_lag;
};

/// r(lag) is the Pearson coefficient of the pairs (a(t), b(t + lag)) over the
/// timestamps present in both series. Timestamps are matched on the grid of
/// spacing `step_s`; lags run from -max_lag_s to +max_lag_s in steps of step_s.
CorrelationCurve cross_correlation(const TimeSeries& a, const TimeSeries& b, double max_lag_s,
                                   double step_s = 1.0);

/// Lag with the largest defined r. Ties go to the smallest |lag|, then to the
/// negative lag. Throws DomainError when no lag is defined.
double peak_lag(const CorrelationCurve& curve);

}  // namespace pqos::correlation
