#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qdn {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> error;  // optional half-width band
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

std::string render_line_chart(const LineChart& chart);

struct FieldCell {
  double x = 0, y = 0;  // cell centre in the unit square
  double value = 0;
  double ax = 0, ay = 0;  // arrow direction; zero for none
};

/// Heatmap over the unit square with an optional arrow per cell.
std::string render_field(const std::string& title, const std::vector<FieldCell>& cells, double cell_size,
                         bool arrows);

/// Chooses the chart from the CSV file name (exploration_curve,
/// success_curve, novelty_field, saliency_map, saliency_profile,
/// explorer_loss, guesser_loss) and writes an SVG. A missing column is an
/// error that names it.
void emit_plot(const std::filesystem::path& csv, const std::filesystem::path& svg);

/// Known CSV stems emit_plot understands.
const std::vector<std::string>& plot_kinds();

}  // namespace qdn
