#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cogs/core.hpp"
#include "cogs/pipeline.hpp"

namespace cogs {

/// One plotted curve; band_lo/band_hi, when nonempty, draw a shaded
/// deviation band around the line.
struct PlotSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> band_lo;
  std::vector<double> band_hi;
};

struct ScatterGroup {
  std::string label;
  std::vector<Point> points;
};

/// Line plot (e.g. gap vs epoch with per-seed deviation bands).
std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          std::span<const PlotSeries> series);

/// Scatter plot with one color per labeled group (size-vs-gap, latent PCA).
std::string svg_scatter(const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        std::span<const ScatterGroup> groups);

/// Grid of instance point clouds (distribution gallery).
std::string svg_instance_gallery(std::span<const TspInstance> instances,
                                 int columns, const std::string& title);

struct TourOverlay {
  std::string label;
  std::vector<int> order;
  std::string color;
};

/// One instance with one or more tours drawn over it (oracle vs model).
std::string svg_tour_overlay(const TspInstance& instance,
                             std::span<const TourOverlay> tours,
                             const std::string& title);

/// Aligned plain-text table; the golden-testable data behind every plot.
std::string text_table(std::span<const std::string> columns,
                       std::span<const std::vector<std::string>> rows);

/// Fixed-precision number formatting shared by tables (6 significant
/// digits, no trailing zeros beyond the decimals shown).
std::string format_number(double value);

/// The mean +/- stddev gap table (one row per metric x mode).
std::string summary_table(const RunSummary& summary);

} // namespace cogs
