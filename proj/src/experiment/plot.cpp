#include "qdn/experiment/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "qdn/experiment/csv.hpp"

namespace qdn {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const std::string& extra = "") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\"" + extra + ">" + escape(s) + "</text>\n";
}

// Blue-to-yellow ramp.
std::string ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(68 + t * (253 - 68)));
  const int g = static_cast<int>(std::lround(1 + t * (231 - 1)));
  const int b = static_cast<int>(std::lround(84 + t * (37 - 84)));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << s;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

LineChart grouped_chart(const CsvTable& t, const std::string& group, const std::string& x, const std::string& y,
                        const std::string& err) {
  const std::size_t gc = t.column(group), xc = t.column(x), yc = t.column(y), ec = t.column(err);
  LineChart c;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& name = t.text(r, gc);
    auto it = index.find(name);
    if (it == index.end()) {
      it = index.emplace(name, c.series.size()).first;
      c.series.push_back({name, {}, {}, {}});
    }
    auto& s = c.series[it->second];
    s.x.push_back(t.number(r, xc));
    s.y.push_back(t.number(r, yc));
    s.error.push_back(t.number(r, ec));
  }
  return c;
}

std::vector<FieldCell> novelty_cells(const CsvTable& t) {
  const std::size_t xc = t.column("x"), yc = t.column("y"), vc = t.column("novelty"), axc = t.column("ax"),
                    ayc = t.column("ay");
  std::vector<FieldCell> cells;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    cells.push_back({t.number(r, xc), t.number(r, yc), t.number(r, vc), t.number(r, axc), t.number(r, ayc)});
  }
  return cells;
}

// Total weight per probe position, arrow along the weight-averaged action.
std::vector<FieldCell> saliency_cells(const CsvTable& t) {
  const std::size_t xc = t.column("x"), yc = t.column("y"), axc = t.column("ax"), ayc = t.column("ay"),
                    wc = t.column("weight");
  std::map<std::pair<double, double>, FieldCell> by_position;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double x = t.number(r, xc), y = t.number(r, yc), w = t.number(r, wc);
    auto& cell = by_position[{x, y}];
    cell.x = x;
    cell.y = y;
    cell.value += w;
    cell.ax += w * t.number(r, axc);
    cell.ay += w * t.number(r, ayc);
  }
  std::vector<FieldCell> cells;
  for (auto& [key, cell] : by_position) cells.push_back(cell);
  return cells;
}

double grid_spacing(const std::vector<FieldCell>& cells) {
  double best = 1.0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const double dx = std::abs(cells[i].x - cells[i - 1].x);
    if (dx > 1e-9) best = std::min(best, dx);
  }
  return best;
}

}  // namespace

std::string render_line_chart(const LineChart& chart) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : chart.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double e = i < s.error.size() ? s.error[i] : 0.0;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i] - e);
      y1 = std::max(y1, s.y[i] + e);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

  std::string svg = header(kWidth, kHeight);
  svg += text(kWidth / 2, 22, chart.title, " text-anchor=\"middle\" font-size=\"14\"");
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4, fy = y0 + (y1 - y0) * i / 4;
    svg += text(px(fx), kTop + ph + 16, tick(fx), " text-anchor=\"middle\"");
    svg += text(kLeft - 6, py(fy) + 4, tick(fy), " text-anchor=\"end\"");
  }
  svg += text(kLeft + pw / 2, kHeight - 10, chart.x_label, " text-anchor=\"middle\"");
  svg += text(16, kTop + ph / 2, chart.y_label,
              " text-anchor=\"middle\" transform=\"rotate(-90 16 " + num(kTop + ph / 2) + ")\"");

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const std::string colour = kPalette[k % std::size(kPalette)];
    if (!s.error.empty() && s.x.size() > 1) {
      std::string band;
      for (std::size_t i = 0; i < s.x.size(); ++i) band += num(px(s.x[i])) + "," + num(py(s.y[i] + s.error[i])) + " ";
      for (std::size_t i = s.x.size(); i-- > 0;) band += num(px(s.x[i])) + "," + num(py(s.y[i] - s.error[i])) + " ";
      svg += "<polygon points=\"" + band + "\" fill=\"" + colour + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    std::string line;
    for (std::size_t i = 0; i < s.x.size(); ++i) line += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
    svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    svg += "<line x1=\"" + num(kWidth - kRight + 10) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
           num(kWidth - kRight + 30) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + colour +
           "\" stroke-width=\"2\"/>\n";
    svg += text(kWidth - kRight + 35, ly, s.name);
  }
  return svg + "</svg>\n";
}

std::string render_field(const std::string& title, const std::vector<FieldCell>& cells, double cell_size,
                         bool arrows) {
  const double side = 400, margin = 40;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& c : cells) {
    lo = std::min(lo, c.value);
    hi = std::max(hi, c.value);
  }
  if (!(hi > lo)) hi = lo + 1;
  auto px = [&](double x) { return margin + x * side; };
  auto py = [&](double y) { return margin + (1 - y) * side; };
  std::string svg = header(side + 2 * margin, side + 2 * margin);
  svg += text(margin + side / 2, 24, title, " text-anchor=\"middle\" font-size=\"14\"");
  svg += "<rect x=\"" + num(margin) + "\" y=\"" + num(margin) + "\" width=\"" + num(side) + "\" height=\"" +
         num(side) + "\" fill=\"#222222\"/>\n";
  const double s = cell_size * side;
  for (const auto& c : cells) {
    svg += "<rect x=\"" + num(px(c.x) - s / 2) + "\" y=\"" + num(py(c.y) - s / 2) + "\" width=\"" + num(s) +
           "\" height=\"" + num(s) + "\" fill=\"" + ramp((c.value - lo) / (hi - lo)) + "\"/>\n";
  }
  if (arrows) {
    for (const auto& c : cells) {
      const double n = std::hypot(c.ax, c.ay);
      if (n <= 0) continue;
      const double len = 0.4 * s;
      const double ex = px(c.x) + len * c.ax / n, ey = py(c.y) - len * c.ay / n;
      svg += "<line x1=\"" + num(px(c.x)) + "\" y1=\"" + num(py(c.y)) + "\" x2=\"" + num(ex) + "\" y2=\"" +
             num(ey) + "\" stroke=\"white\" stroke-width=\"1\"/>\n";
      svg += "<circle cx=\"" + num(ex) + "\" cy=\"" + num(ey) + "\" r=\"1.2\" fill=\"white\"/>\n";
    }
  }
  svg += text(margin, side + margin + 20, "min " + tick(lo) + "  max " + tick(hi));
  return svg + "</svg>\n";
}

const std::vector<std::string>& plot_kinds() {
  static const std::vector<std::string> kinds = {"exploration_curve", "success_curve", "novelty_field",
                                                 "saliency_map",      "saliency_profile", "explorer_loss",
                                                 "guesser_loss"};
  return kinds;
}

void emit_plot(const std::filesystem::path& csv, const std::filesystem::path& svg) {
  const std::string kind = csv.stem().string();
  const CsvTable t = read_csv(csv);
  std::string out;
  if (kind == "exploration_curve") {
    LineChart c = grouped_chart(t, "policy", "step", "mean_cells", "stderr");
    c.title = "Grid coverage";
    c.x_label = "step";
    c.y_label = "cells visited (16 x 16)";
    out = render_line_chart(c);
  } else if (kind == "success_curve") {
    LineChart c = grouped_chart(t, "policy", "move", "success_rate", "stderr");
    c.title = "Success rate by move";
    c.x_label = "move";
    c.y_label = "fraction solved";
    out = render_line_chart(c);
  } else if (kind == "novelty_field") {
    const auto cells = novelty_cells(t);
    out = render_field("Novelty by position", cells, grid_spacing(cells), true);
  } else if (kind == "saliency_map") {
    const auto cells = saliency_cells(t);
    out = render_field("Question saliency", cells, grid_spacing(cells), true);
  } else if (kind == "saliency_profile") {
    const std::size_t mc = t.column("move"), lc = t.column("lookup_index"), cc = t.column("candidate"),
                      wc = t.column("weight");
    LineChart c;
    c.title = "Saliency over candidate guesses";
    c.x_label = "candidate";
    c.y_label = "weight";
    std::map<std::pair<int, int>, std::size_t> index;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const int move = static_cast<int>(t.number(r, mc)), lookup = static_cast<int>(t.number(r, lc));
      auto it = index.find({move, lookup});
      if (it == index.end()) {
        it = index.emplace(std::make_pair(move, lookup), c.series.size()).first;
        c.series.push_back({"move " + std::to_string(move) + " lookup " + std::to_string(lookup), {}, {}, {}});
      }
      c.series[it->second].x.push_back(t.number(r, cc));
      c.series[it->second].y.push_back(t.number(r, wc));
    }
    out = render_line_chart(c);
  } else if (kind == "explorer_loss" || kind == "guesser_loss") {
    const std::string x = kind == "explorer_loss" ? "batch" : "epoch";
    const std::size_t xc = t.column(x), sc = t.column("split"), lc = t.column("loss");
    LineChart c;
    c.title = kind == "explorer_loss" ? "Collision-prediction loss" : "Target-prediction loss";
    c.x_label = x;
    c.y_label = "loss";
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      auto it = index.find(t.text(r, sc));
      if (it == index.end()) {
        it = index.emplace(t.text(r, sc), c.series.size()).first;
        c.series.push_back({t.text(r, sc), {}, {}, {}});
      }
      c.series[it->second].x.push_back(t.number(r, xc));
      c.series[it->second].y.push_back(t.number(r, lc));
    }
    out = render_line_chart(c);
  } else {
    throw CsvError(csv.string() + ": no plot known for '" + kind + "'");
  }
  write_text(svg, out);
}

}  // namespace qdn
