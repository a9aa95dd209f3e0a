#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cogs/errors.hpp"
#include "cogs/plot.hpp"
#include "test_util.hpp"

using namespace cogs;

TEST_CASE("line plot") {
  PlotSeries s;
  s.label = "cogs";
  s.xs = {1, 2};
  s.ys = {0.4, 0.2};
  s.band_lo = {0.35, 0.15};
  s.band_hi = {0.45, 0.25};
  const std::string svg =
      svg_line_plot("gap vs epoch", "epoch", "gap (%)", std::vector{s});
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("gap vs epoch") != std::string::npos);
  CHECK(svg.find(">epoch</text>") != std::string::npos);
  CHECK(svg.find(">gap (%)</text>") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("polygon") != std::string::npos); // deviation band
  CHECK(svg.find("cogs") != std::string::npos);
  CHECK_THROWS_AS(svg_line_plot("t", "x", "y", std::vector<PlotSeries>{}),
                  InvalidArgumentError);
}

TEST_CASE("scatter plot") {
  ScatterGroup a{"training", {{0.0, 0.0}, {1.0, 1.0}}};
  ScatterGroup b{"inference", {{0.5, -0.5}}};
  const std::string svg =
      svg_scatter("latent PCA", "PC1", "PC2", std::vector{a, b});
  CHECK(svg.find("latent PCA") != std::string::npos);
  CHECK(svg.find("training") != std::string::npos);
  CHECK(svg.find("inference") != std::string::npos);
  CHECK(svg.find("circle") != std::string::npos);
}

TEST_CASE("gallery and tour overlay") {
  std::vector<TspInstance> instances;
  for (int i = 0; i < 4; ++i)
    instances.push_back(test::random_uniform_instance(10, i));
  const std::string gallery = svg_instance_gallery(instances, 2, "g");
  CHECK(gallery.find("<svg") != std::string::npos);
  CHECK(std::count(gallery.begin(), gallery.end(), 'c') > 0);

  std::vector<TourOverlay> overlays = {
      {"oracle", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, "#2ca02c"},
      {"model", {0, 2, 4, 6, 8, 1, 3, 5, 7, 9}, "#d62728"}};
  const std::string tour = svg_tour_overlay(instances[0], overlays, "worst");
  CHECK(tour.find("oracle") != std::string::npos);
  CHECK(tour.find("model") != std::string::npos);
  CHECK(tour.find("polygon") != std::string::npos);

  std::vector<TourOverlay> bad = {{"x", {0, 1, 2}, "#000"}};
  CHECK_THROWS_AS(svg_tour_overlay(instances[0], bad, "t"),
                  InvalidArgumentError);
}

TEST_CASE("text table golden") {
  const std::vector<std::string> columns = {"epoch", "uniform_mean",
                                            "uniform_std"};
  const std::vector<std::vector<std::string>> rows = {
      {"1", "40.5", "1.25"},
      {"2", "31.75", "0.5"},
  };
  const std::string table = text_table(columns, rows);
  const std::string expected =
      "epoch  uniform_mean  uniform_std\n"
      "--------------------------------\n"
      "1      40.5          1.25\n"
      "2      31.75         0.5\n";
  CHECK(table == expected);
}

TEST_CASE("summary table layout") {
  std::map<std::string, std::vector<GapReport>> runs;
  for (std::uint64_t s = 0; s < 3; ++s) {
    std::vector<double> g1(100, 0.05), g2(100, 0.20);
    g1[0] = 0.06 + 0.001 * s;
    g2[0] = 0.22 + 0.001 * s;
    runs["cogs"].push_back(make_gap_report(g1, "local_search", s, 1));
    runs["uniform"].push_back(make_gap_report(g2, "local_search", s, 1));
  }
  const RunSummary summary = aggregate_runs(runs);
  const std::string table = summary_table(summary);
  CHECK(table.find("Metric") != std::string::npos);
  CHECK(table.find("Gap (%)") != std::string::npos);
  CHECK(table.find("Worst 0.5%") != std::string::npos);
  CHECK(table.find("+/-") != std::string::npos);
  CHECK(table.find("cogs") != std::string::npos);
  CHECK(table.find("uniform") != std::string::npos);
}

TEST_CASE("format_number") {
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.955) == "0.955");
  CHECK(format_number(95.5) == "95.5");
}
