#include "cogs/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cogs/errors.hpp"

namespace cogs {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 440;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 25;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finalize() {
    if (!(hi > lo)) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

struct Axes {
  Range x, y;

  double px(double v) const {
    return kMarginLeft + (v - x.lo) / (x.hi - x.lo) *
                             (kWidth - kMarginLeft - kMarginRight);
  }
  double py(double v) const {
    return kHeight - kMarginBottom - (v - y.lo) / (y.hi - y.lo) *
                                         (kHeight - kMarginTop - kMarginBottom);
  }
};

std::string esc(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void open_svg(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
     << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"15\">" << esc(title)
     << "</text>\n";
}

void draw_axes(std::ostringstream& os, const Axes& axes,
               const std::string& x_label, const std::string& y_label) {
  const double x0 = kMarginLeft;
  const double y0 = kHeight - kMarginBottom;
  const double x1 = kWidth - kMarginRight;
  const double y1 = kMarginTop;
  os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1
     << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0
     << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = axes.x.lo + (axes.x.hi - axes.x.lo) * i / 5.0;
    const double fy = axes.y.lo + (axes.y.hi - axes.y.lo) * i / 5.0;
    os << "<line x1=\"" << axes.px(fx) << "\" y1=\"" << y0 << "\" x2=\""
       << axes.px(fx) << "\" y2=\"" << y0 + 4 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << axes.px(fx) << "\" y=\"" << y0 + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << format_number(fx) << "</text>\n";
    os << "<line x1=\"" << x0 - 4 << "\" y1=\"" << axes.py(fy) << "\" x2=\""
       << x0 << "\" y2=\"" << axes.py(fy) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << x0 - 8 << "\" y=\"" << axes.py(fy) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << format_number(fy) << "</text>\n";
  }
  os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\">"
     << esc(x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << (y0 + y1) / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
     << "transform=\"rotate(-90 18 " << (y0 + y1) / 2 << ")\">" << esc(y_label)
     << "</text>\n";
}

void draw_legend(std::ostringstream& os, std::span<const std::string> labels) {
  double y = kMarginTop + 8;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    os << "<rect x=\"" << kWidth - kMarginRight - 130 << "\" y=\"" << y - 9
       << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << kWidth - kMarginRight - 113 << "\" y=\"" << y + 2
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << esc(labels[i])
       << "</text>\n";
    y += 18;
  }
}

} // namespace

std::string format_number(double value) {
  std::ostringstream os;
  os.precision(6);
  os << value;
  return os.str();
}

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          std::span<const PlotSeries> series) {
  if (series.empty()) throw InvalidArgumentError("line plot: no series");
  Axes axes;
  axes.x = {std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
  axes.y = axes.x;
  for (const auto& s : series) {
    if (s.xs.size() != s.ys.size())
      throw InvalidArgumentError("line plot: x/y length mismatch in " + s.label);
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      axes.x.include(s.xs[i]);
      axes.y.include(s.ys[i]);
      if (!s.band_lo.empty()) {
        axes.y.include(s.band_lo[i]);
        axes.y.include(s.band_hi[i]);
      }
    }
  }
  axes.x.finalize();
  axes.y.finalize();

  std::ostringstream os;
  open_svg(os, title);
  draw_axes(os, axes, x_label, y_label);
  std::vector<std::string> labels;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    if (!s.band_lo.empty()) {
      os << "<polygon fill=\"" << color << "\" opacity=\"0.15\" points=\"";
      for (std::size_t i = 0; i < s.xs.size(); ++i)
        os << axes.px(s.xs[i]) << "," << axes.py(s.band_hi[i]) << " ";
      for (std::size_t i = s.xs.size(); i-- > 0;)
        os << axes.px(s.xs[i]) << "," << axes.py(s.band_lo[i]) << " ";
      os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < s.xs.size(); ++i)
      os << axes.px(s.xs[i]) << "," << axes.py(s.ys[i]) << " ";
    os << "\"/>\n";
    labels.push_back(s.label);
  }
  draw_legend(os, labels);
  os << "</svg>\n";
  return os.str();
}

std::string svg_scatter(const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        std::span<const ScatterGroup> groups) {
  if (groups.empty()) throw InvalidArgumentError("scatter: no groups");
  Axes axes;
  axes.x = {std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
  axes.y = axes.x;
  for (const auto& g : groups)
    for (const auto& p : g.points) {
      axes.x.include(p.x);
      axes.y.include(p.y);
    }
  axes.x.finalize();
  axes.y.finalize();

  std::ostringstream os;
  open_svg(os, title);
  draw_axes(os, axes, x_label, y_label);
  std::vector<std::string> labels;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const char* color = kPalette[gi % std::size(kPalette)];
    for (const auto& p : groups[gi].points)
      os << "<circle cx=\"" << axes.px(p.x) << "\" cy=\"" << axes.py(p.y)
         << "\" r=\"2.4\" fill=\"" << color << "\" fill-opacity=\"0.7\"/>\n";
    labels.push_back(groups[gi].label);
  }
  draw_legend(os, labels);
  os << "</svg>\n";
  return os.str();
}

std::string svg_instance_gallery(std::span<const TspInstance> instances,
                                 int columns, const std::string& title) {
  if (instances.empty()) throw InvalidArgumentError("gallery: no instances");
  if (columns < 1) throw InvalidArgumentError("gallery: columns must be >= 1");
  const int cell = 150;
  const int pad = 10;
  const int rows =
      (static_cast<int>(instances.size()) + columns - 1) / columns;
  const int width = columns * (cell + pad) + pad;
  const int height = rows * (cell + pad) + pad + 30;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"14\">" << esc(title)
     << "</text>\n";
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const int r = static_cast<int>(i) / columns;
    const int c = static_cast<int>(i) % columns;
    const double ox = pad + c * (cell + pad);
    const double oy = 30 + pad + r * (cell + pad);
    os << "<rect x=\"" << ox << "\" y=\"" << oy << "\" width=\"" << cell
       << "\" height=\"" << cell
       << "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
    for (const auto& p : instances[i].points)
      os << "<circle cx=\"" << ox + p.x * cell << "\" cy=\""
         << oy + (1.0 - p.y) * cell << "\" r=\"1.8\" fill=\"#1f77b4\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_tour_overlay(const TspInstance& instance,
                             std::span<const TourOverlay> tours,
                             const std::string& title) {
  const int size = 420;
  const int pad = 30;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * pad
     << "\" height=\"" << size + 2 * pad + 30 << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << (size + 2 * pad) / 2
     << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"14\">"
     << esc(title) << "</text>\n";
  const auto px = [&](double v) { return pad + v * size; };
  const auto py = [&](double v) { return 30 + pad + (1.0 - v) * size; };
  double legend_y = 46;
  for (const auto& t : tours) {
    if (!is_permutation_of_n(t.order, instance.n()))
      throw InvalidArgumentError("tour overlay: order is not a permutation");
    os << "<polygon fill=\"none\" stroke=\"" << t.color
       << "\" stroke-width=\"1.6\" points=\"";
    for (const int idx : t.order)
      os << px(instance.points[idx].x) << "," << py(instance.points[idx].y)
         << " ";
    os << "\"/>\n";
    os << "<text x=\"" << pad << "\" y=\"" << legend_y
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << t.color
       << "\">" << esc(t.label) << "</text>\n";
    legend_y += 16;
  }
  for (const auto& p : instance.points)
    os << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.y)
       << "\" r=\"3\" fill=\"black\"/>\n";
  os << "</svg>\n";
  return os.str();
}

std::string text_table(std::span<const std::string> columns,
                       std::span<const std::vector<std::string>> rows) {
  if (columns.empty()) throw InvalidArgumentError("table: no columns");
  std::vector<std::size_t> widths(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) widths[c] = columns[c].size();
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw InvalidArgumentError("table: row width mismatch");
    for (std::size_t c = 0; c < row.size(); ++c)
      widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream os;
  const auto emit_row = [&](std::span<const std::string> cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      os << cells[c];
      if (c + 1 < cells.size())
        os << std::string(widths[c] - cells[c].size() + 2, ' ');
    }
    os << '\n';
  };
  emit_row(columns);
  std::size_t total = 0;
  for (std::size_t c = 0; c < widths.size(); ++c)
    total += widths[c] + (c + 1 < widths.size() ? 2 : 0);
  os << std::string(total, '-') << '\n';
  for (const auto& row : rows) emit_row(row);
  return os.str();
}

std::string summary_table(const RunSummary& summary) {
  const std::vector<std::string> columns = {"Metric", "Model", "Gap (%)"};
  std::vector<std::vector<std::string>> rows;
  static const std::vector<std::pair<std::string, std::string>> metric_names = {
      {"mean_gap", "Average"},
      {"worst_1", "Worst 1%"},
      {"worst_05", "Worst 0.5%"},
      {"worst_01", "Worst 0.1%"},
  };
  for (const auto& [key, display] : metric_names) {
    for (const auto& [mode, metrics] : summary.modes) {
      const auto it = metrics.find(key);
      if (it == metrics.end()) continue;
      std::ostringstream cell;
      cell.precision(3);
      cell << std::fixed << it->second.mean * 100.0 << " +/- "
           << it->second.stddev * 100.0;
      rows.push_back({display, mode, cell.str()});
    }
  }
  return text_table(columns, rows);
}

} // namespace cogs
