#include "pqos/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace pqos::plot {
namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  }
};

class Canvas {
 public:
  Canvas(const Axes& axes, Range x, Range y) : x_(x), y_(y) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
         << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
         << escape(axes.title) << "</text>\n"
         << "<text x=\"" << num(kLeft + plot_w() / 2) << "\" y=\"" << num(kHeight - 15)
         << "\" text-anchor=\"middle\">" << escape(axes.x_label) << "</text>\n"
         << "<text transform=\"translate(18," << num(kTop + plot_h() / 2)
         << ") rotate(-90)\" text-anchor=\"middle\">" << escape(axes.y_label) << "</text>\n"
         << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(plot_w())
         << "\" height=\"" << num(plot_h()) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double f = i / 4.0;
      const double yv = y_.lo + f * (y_.hi - y_.lo);
      out_ << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">"
           << num(yv) << "</text>\n";
    }
  }

  static double plot_w() { return kWidth - kLeft - kRight; }
  static double plot_h() { return kHeight - kTop - kBottom; }
  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * plot_w(); }
  double py(double y) const { return kTop + plot_h() - (y - y_.lo) / (y_.hi - y_.lo) * plot_h(); }

  void x_ticks() {
    for (int i = 0; i <= 4; ++i) {
      const double xv = x_.lo + i / 4.0 * (x_.hi - x_.lo);
      out_ << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + plot_h() + 16)
           << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    }
  }

  void legend(const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double y = kTop + 10 + 18 * static_cast<double>(i);
      out_ << "<rect x=\"" << num(kWidth - kRight + 12) << "\" y=\"" << num(y - 9)
           << "\" width=\"10\" height=\"10\" fill=\"" << color(i) << "\"/>\n"
           << "<text x=\"" << num(kWidth - kRight + 28) << "\" y=\"" << num(y) << "\">"
           << escape(labels[i]) << "</text>\n";
    }
  }

  std::ostringstream& raw() { return out_; }
  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  Range x_, y_;
  std::ostringstream out_;
};

std::vector<std::string> labels_of(const std::vector<Series>& series) {
  std::vector<std::string> out;
  for (const auto& s : series) out.push_back(s.label);
  return out;
}

}  // namespace

std::string line_plot(const Axes& axes, const std::vector<Series>& series) {
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.finish();
  yr.finish();
  Canvas c(axes, xr, yr);
  c.x_ticks();
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    bool open = false;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) {
        if (open) c.raw() << "\"/>\n";
        open = false;
        continue;
      }
      if (!open) {
        c.raw() << "<polyline fill=\"none\" stroke=\"" << color(k) << "\" stroke-width=\"1.5\" points=\"";
        open = true;
      }
      c.raw() << num(c.px(s.x[i])) << ',' << num(c.py(s.y[i])) << ' ';
    }
    if (open) c.raw() << "\"/>\n";
  }
  c.legend(labels_of(series));
  return c.finish();
}

std::string scatter_plot(const Axes& axes, const std::vector<Series>& series, bool diagonal) {
  Range r;
  for (const auto& s : series) {
    for (double v : s.x) r.add(v);
    for (double v : s.y) r.add(v);
  }
  r.finish();
  Canvas c(axes, r, r);
  c.x_ticks();
  if (diagonal) {
    c.raw() << "<line x1=\"" << num(c.px(r.lo)) << "\" y1=\"" << num(c.py(r.lo)) << "\" x2=\""
            << num(c.px(r.hi)) << "\" y2=\"" << num(c.py(r.hi)) << "\" stroke=\"#999999\" stroke-width=\"1.5\"/>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      c.raw() << "<circle cx=\"" << num(c.px(s.x[i])) << "\" cy=\"" << num(c.py(s.y[i]))
              << "\" r=\"1.8\" fill=\"" << color(k) << "\" fill-opacity=\"0.5\"/>\n";
    }
  }
  c.legend(labels_of(series));
  return c.finish();
}

std::string bar_chart(const Axes& axes, const std::vector<std::string>& series_labels,
                      const std::vector<BarGroup>& groups) {
  Range yr;
  yr.add(0.0);
  for (const auto& g : groups) {
    for (double v : g.values) yr.add(v);
  }
  yr.finish();
  yr.hi *= 1.05;
  Canvas c(axes, Range{0.0, 1.0}, yr);
  const double group_w = Canvas::plot_w() / static_cast<double>(std::max<std::size_t>(1, groups.size()));
  const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(1, series_labels.size()));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double x0 = kLeft + group_w * static_cast<double>(g) + group_w * 0.1;
    for (std::size_t k = 0; k < groups[g].values.size(); ++k) {
      const double v = groups[g].values[k];
      if (!std::isfinite(v)) continue;
      const double top = c.py(v);
      c.raw() << "<rect x=\"" << num(x0 + bar_w * static_cast<double>(k)) << "\" y=\"" << num(top)
              << "\" width=\"" << num(bar_w * 0.95) << "\" height=\"" << num(c.py(0.0) - top)
              << "\" fill=\"" << color(k) << "\"/>\n";
    }
    c.raw() << "<text x=\"" << num(x0 + group_w * 0.4) << "\" y=\"" << num(kTop + Canvas::plot_h() + 16)
            << "\" text-anchor=\"middle\">" << escape(groups[g].label) << "</text>\n";
  }
  c.legend(series_labels);
  return c.finish();
}

}  // namespace pqos::plot
