#include "pqos/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pqos/errors.hpp"

namespace pqos::correlation {
namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Dense grid representation: values[k - first] holds the sample at grid index k.
struct Grid {
  long long first = 0;
  std::vector<double> values;

  double at(long long k) const {
    if (k < first || k >= first + static_cast<long long>(values.size())) return kMissing;
    return values[static_cast<std::size_t>(k - first)];
  }
};

Grid to_grid(const TimeSeries& s, double step) {
  if (s.t_s.size() != s.values.size()) throw DomainError("time series length mismatch");
  Grid g;
  if (s.t_s.empty()) return g;
  g.first = std::llround(s.t_s.front() / step);
  const long long last = std::llround(s.t_s.back() / step);
  g.values.assign(static_cast<std::size_t>(last - g.first + 1), kMissing);
  for (std::size_t i = 0; i < s.t_s.size(); ++i) {
    const long long k = std::llround(s.t_s[i] / step);
    if (k < g.first || k > last) throw DomainError("time series is not time-ordered");
    g.values[static_cast<std::size_t>(k - g.first)] = s.values[i];
  }
  return g;
}

}  // namespace

Kpi parse_kpi(std::string_view name) {
  if (name == "rsrp") return Kpi::kRsrp;
  if (name == "rsrq") return Kpi::kRsrq;
  if (name == "rssi") return Kpi::kRssi;
  if (name == "snr") return Kpi::kSnr;
  if (name == "throughput") return Kpi::kThroughput;
  throw DomainError("unknown KPI '" + std::string(name) + "'");
}

std::string_view kpi_name(Kpi kpi) {
  switch (kpi) {
    case Kpi::kRsrp: return "rsrp";
    case Kpi::kRsrq: return "rsrq";
    case Kpi::kRssi: return "rssi";
    case Kpi::kSnr: return "snr";
    case Kpi::kThroughput: return "throughput";
  }
  return "?";
}

TimeSeries extract(const VehicleTrace& trace, Kpi kpi) {
  TimeSeries s;
  s.t_s.reserve(trace.samples.size());
  s.values.reserve(trace.samples.size());
  for (const auto& x : trace.samples) {
    s.t_s.push_back(x.t_s);
    switch (kpi) {
      case Kpi::kRsrp: s.values.push_back(x.phy.rsrp_dbm); break;
      case Kpi::kRsrq: s.values.push_back(x.phy.rsrq_db); break;
      case Kpi::kRssi: s.values.push_back(x.phy.rssi_dbm); break;
      case Kpi::kSnr: s.values.push_back(x.phy.snr_db); break;
      case Kpi::kThroughput: s.values.push_back(x.throughput_mbps); break;
    }
  }
  return s;
}

CorrelationCurve cross_correlation(const TimeSeries& a, const TimeSeries& b, double max_lag_s,
                                   double step_s) {
  if (!(max_lag_s > 0.0)) throw DomainError("max_lag_s must be > 0");
  if (!(step_s > 0.0)) throw DomainError("step_s must be > 0");
  const Grid ga = to_grid(a, step_s);
  const Grid gb = to_grid(b, step_s);
  const long long max_steps = static_cast<long long>(std::floor(max_lag_s / step_s + 1e-9));

  CorrelationCurve curve;
  std::vector<double> xs, ys;
  for (long long m = -max_steps; m <= max_steps; ++m) {
    xs.clear();
    ys.clear();
    for (std::size_t i = 0; i < ga.values.size(); ++i) {
      const double x = ga.values[i];
      const double y = gb.at(ga.first + static_cast<long long>(i) + m);
      if (std::isnan(x) || std::isnan(y)) continue;
      xs.push_back(x);
      ys.push_back(y);
    }
    curve.lags_s.push_back(static_cast<double>(m) * step_s);
    curve.n_per_lag.push_back(xs.size());
    if (xs.size() < kMinOverlap) {
      curve.r.emplace_back();
      continue;
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double dx = xs[i] - mx;
      const double dy = ys[i] - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
      curve.r.emplace_back();
      continue;
    }
    curve.r.emplace_back(std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0));
  }
  return curve;
}

double peak_lag(const CorrelationCurve& curve) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < curve.r.size(); ++i) {
    if (!curve.r[i]) continue;
    if (!best) {
      best = i;
      continue;
    }
    const double r = *curve.r[i];
    const double rb = *curve.r[*best];
    const double lag = curve.lags_s[i];
    const double lb = curve.lags_s[*best];
    if (r > rb || (r == rb && (std::abs(lag) < std::abs(lb) ||
                               (std::abs(lag) == std::abs(lb) && lag < lb)))) {
      best = i;
    }
  }
  if (!best) throw DomainError("correlation curve has no defined lag");
  return curve.lags_s[*best];
}

}  // namespace pqos::correlation
