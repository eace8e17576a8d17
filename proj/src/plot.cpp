// Copyright 2026 The muon-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "muonlab/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "muonlab/errors.hpp"
#include "muonlab/report.hpp"

namespace muonlab {
namespace {

namespace fs = std::filesystem;

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

const std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string xml_escape(const std::string& in) {
  std::string out;
  for (char c : in) {
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

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;
  double pixel_lo = 0.0;
  double pixel_hi = 1.0;

  double value(double v) const { return log ? std::log10(v) : v; }
  double map(double v) const {
    const double t = (value(v) - lo) / (hi - lo);
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

Axis make_axis(const std::vector<double>& vals, bool log, double p0, double p1) {
  Axis a;
  a.log = log;
  a.pixel_lo = p0;
  a.pixel_hi = p1;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : vals) {
    if (!usable(v, log)) continue;
    lo = std::min(lo, a.value(v));
    hi = std::max(hi, a.value(v));
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    const double pad = log ? 0.5 : std::max(std::abs(lo) * 0.1, 0.5);
    lo -= pad;
    hi += pad;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

void axis_ticks(std::ostringstream& out, const Axis& a, bool horizontal) {
  for (int i = 0; i <= 4; ++i) {
    const double t = a.lo + (a.hi - a.lo) * i / 4.0;
    const double v = a.log ? std::pow(10.0, t) : t;
    const double p = a.map(v);
    if (horizontal) {
      out << "<line x1=\"" << num(p) << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << num(p)
          << "\" y2=\"" << kHeight - kBottom + 5 << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << num(p) << "\" y=\"" << kHeight - kBottom + 18
          << "\" font-size=\"11\" text-anchor=\"middle\">" << num(v) << "</text>\n";
    } else {
      out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(p) << "\" x2=\"" << kLeft
          << "\" y2=\"" << num(p) << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(p + 4)
          << "\" font-size=\"11\" text-anchor=\"end\">" << num(v) << "</text>\n";
    }
  }
}

void frame(std::ostringstream& out, const PlotSpec& spec) {
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">"
      << xml_escape(spec.title) << "</text>\n";
  out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12
      << "\" font-size=\"12\" text-anchor=\"middle\">" << xml_escape(spec.x_label)
      << (spec.log_x ? " (log)" : "") << "</text>\n";
  out << "<text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (kTop + kHeight - kBottom) / 2 << ")\">" << xml_escape(spec.y_label)
      << (spec.log_y ? " (log)" : "") << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
      << "\" height=\"" << kHeight - kTop - kBottom
      << "\" fill=\"none\" stroke=\"black\"/>\n";
}

std::string color_for(double t) {
  // Dark blue to yellow ramp.
  static const std::array<std::array<double, 3>, 5> stops = {
      {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(i);
  char buf[8];
  const auto c = [&](int k) {
    return static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  };
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c(0), c(1), c(2));
  return buf;
}

std::string render_xy(const PlotSpec& spec) {
  std::vector<double> xs, ys;
  for (const auto& s : spec.series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
    if (spec.kind == PlotKind::band) {
      ys.insert(ys.end(), s.lo.begin(), s.lo.end());
      ys.insert(ys.end(), s.hi.begin(), s.hi.end());
    }
  }
  const Axis ax = make_axis(xs, spec.log_x, kLeft, kWidth - kRight);
  const Axis ay = make_axis(ys, spec.log_y, kHeight - kBottom, kTop);
  std::ostringstream out;
  frame(out, spec);
  axis_ticks(out, ax, true);
  axis_ticks(out, ay, false);
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const Series& s = spec.series[si];
    const char* color = kPalette[si % kPalette.size()];
    if (spec.kind == PlotKind::band && s.lo.size() == s.x.size() && s.hi.size() == s.x.size()) {
      std::string upper, lower;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!usable(s.x[i], spec.log_x) || !usable(s.hi[i], spec.log_y)) continue;
        upper += num(ax.map(s.x[i])) + "," + num(ay.map(s.hi[i])) + " ";
      }
      for (std::size_t i = s.x.size(); i-- > 0;) {
        if (!usable(s.x[i], spec.log_x) || !usable(s.lo[i], spec.log_y)) continue;
        lower += num(ax.map(s.x[i])) + "," + num(ay.map(s.lo[i])) + " ";
      }
      out << "<polygon points=\"" << upper << lower << "\" fill=\"" << color
          << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], spec.log_x) || !usable(s.y[i], spec.log_y)) continue;
      pts += num(ax.map(s.x[i])) + "," + num(ay.map(s.y[i])) + " ";
      if (s.x.size() < 64) {
        out << "<circle cx=\"" << num(ax.map(s.x[i])) << "\" cy=\"" << num(ay.map(s.y[i]))
            << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
      }
    }
    out << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
    const double ly = kTop + 14.0 + 16.0 * static_cast<double>(si);
    out << "<rect x=\"" << kWidth - kRight + 10 << "\" y=\"" << ly - 9
        << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << kWidth - kRight + 24 << "\" y=\"" << ly
        << "\" font-size=\"10\">" << xml_escape(s.name) << "</text>\n";
  }
  return out.str();
}

std::string render_heatmap(const PlotSpec& spec, const ColorScale& scale) {
  const std::size_t nx = spec.grid_x.size();
  const std::size_t ny = spec.grid_y.size();
  if (spec.values.size() != nx * ny) throw DomainError("heatmap: values do not match the grid");
  std::ostringstream out;
  frame(out, spec);
  const double w = (kWidth - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(nx, 1));
  const double h = (kHeight - kTop - kBottom) / static_cast<double>(std::max<std::size_t>(ny, 1));
  const double span = scale.max - scale.min;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const double v = spec.values[ix * ny + iy];
      if (!std::isfinite(v)) continue;
      const double t = span > 0.0 ? (v - scale.min) / span : 0.5;
      out << "<rect x=\"" << num(kLeft + w * ix) << "\" y=\""
          << num(kHeight - kBottom - h * (iy + 1)) << "\" width=\"" << num(w + 0.3)
          << "\" height=\"" << num(h + 0.3) << "\" fill=\"" << color_for(t) << "\"/>\n";
    }
  }
  if (nx > 0 && ny > 0) {
    Axis ax = make_axis({spec.grid_x.front(), spec.grid_x.back()}, false, kLeft, kWidth - kRight);
    ax.lo = spec.grid_x.front();
    ax.hi = spec.grid_x.back();
    Axis ay = make_axis({spec.grid_y.front(), spec.grid_y.back()}, false, kHeight - kBottom, kTop);
    ay.lo = spec.grid_y.front();
    ay.hi = spec.grid_y.back();
    if (ax.hi > ax.lo) axis_ticks(out, ax, true);
    if (ay.hi > ay.lo) axis_ticks(out, ay, false);
  }
  // Color bar.
  const double bx = kWidth - kRight + 20;
  for (int i = 0; i < 50; ++i) {
    const double t = i / 49.0;
    out << "<rect x=\"" << bx << "\" y=\"" << num(kHeight - kBottom - (i + 1) * 6.5)
        << "\" width=\"16\" height=\"7\" fill=\"" << color_for(t) << "\"/>\n";
  }
  out << "<text x=\"" << bx + 22 << "\" y=\"" << kHeight - kBottom << "\" font-size=\"10\">"
      << num(scale.min) << "</text>\n";
  out << "<text x=\"" << bx + 22 << "\" y=\"" << num(kHeight - kBottom - 50 * 6.5 + 8)
      << "\" font-size=\"10\">" << num(scale.max) << "</text>\n";
  return out.str();
}

std::string series_key(const CsvTable& t, std::size_t row, const std::vector<std::string>& cols) {
  std::string key;
  for (const auto& c : cols) {
    if (!key.empty()) key += " ";
    key += c + "=" + t.rows[row][t.column(c)];
  }
  return key;
}

PlotSpec sweep_plot(const CsvTable& t, const std::string& x_col, const std::string& x_label,
                    const std::vector<std::string>& group_cols) {
  PlotSpec spec;
  spec.kind = PlotKind::band;
  spec.title = "Escape steps vs " + x_label;
  spec.x_label = x_label;
  spec.y_label = "mean escape steps";
  spec.log_x = true;
  spec.log_y = true;
  const auto x = t.numeric(x_col);
  const auto mean = t.numeric("mean_steps");
  const auto ci = t.numeric("ci95_half_width");
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string key = series_key(t, r, group_cols);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, spec.series.size()).first;
      spec.series.push_back(Series{key, {}, {}, {}, {}});
    }
    Series& s = spec.series[it->second];
    s.x.push_back(x[r]);
    s.y.push_back(mean[r]);
    s.lo.push_back(std::max(mean[r] - ci[r], 1e-300));
    s.hi.push_back(mean[r] + ci[r]);
  }
  for (auto& s : spec.series) {
    std::vector<std::size_t> order(s.x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s.x[a] < s.x[b]; });
    Series sorted{s.name, {}, {}, {}, {}};
    for (auto i : order) {
      sorted.x.push_back(s.x[i]);
      sorted.y.push_back(s.y[i]);
      sorted.lo.push_back(s.lo[i]);
      sorted.hi.push_back(s.hi[i]);
    }
    s = std::move(sorted);
  }
  return spec;
}

std::string write_svg(const fs::path& path, const PlotSpec& spec) {
  write_file(path.string(), render_svg(spec));
  return path.string();
}

}  // namespace

ColorScale heatmap_scale(const PlotSpec& spec) {
  ColorScale s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (double v : spec.values) {
    if (!std::isfinite(v)) continue;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  if (!std::isfinite(s.min)) s = {0.0, 0.0};
  return s;
}

std::string render_svg(const PlotSpec& spec) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\"";
  std::string body;
  if (spec.kind == PlotKind::heatmap) {
    const ColorScale scale = heatmap_scale(spec);
    out << " data-min=\"" << format_real(scale.min) << "\" data-max=\""
        << format_real(scale.max) << "\"";
    body = render_heatmap(spec, scale);
  } else {
    body = render_xy(spec);
  }
  out << " font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << body << "</svg>\n";
  return out.str();
}

std::vector<std::string> render_plots(const std::string& dir, std::ostream& warnings) {
  std::vector<std::string> written;
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw InvalidInputError("'" + dir + "' is not a directory");

  const fs::path summary = root / "summary.csv";
  if (fs::exists(summary)) {
    const CsvTable t = read_csv(summary.string());
    if (!t.rows.empty()) {
      written.push_back(write_svg(root / "escape_vs_d.svg",
                                  sweep_plot(t, "d", "d", {"optimizer", "lambda", "kappa",
                                                           "noise_mode"})));
      written.push_back(write_svg(root / "escape_vs_lambda.svg",
                                  sweep_plot(t, "lambda", "lambda", {"optimizer", "d", "kappa",
                                                                     "noise_mode"})));
    }
  }

  std::vector<fs::path> traces, surfaces;
  for (const auto& e : fs::directory_iterator(root)) {
    const std::string name = e.path().filename().string();
    if (name.ends_with(".csv") && name.starts_with("trace_")) traces.push_back(e.path());
    if (name.ends_with(".csv") && name.starts_with("surface_step")) surfaces.push_back(e.path());
  }
  std::sort(traces.begin(), traces.end());
  std::sort(surfaces.begin(), surfaces.end());
  if (!traces.empty()) {
    PlotSpec loss{PlotKind::line, "Factorization loss", "step", "loss", false, true, {}, {}, {}, {}};
    PlotSpec rank{PlotKind::line, "Effective rank of A B^T", "step", "effective rank", false,
                  false, {}, {}, {}, {}};
    for (const auto& p : traces) {
      const CsvTable t = read_csv(p.string());
      const std::string name = p.stem().string().substr(6);
      loss.series.push_back(Series{name, t.numeric("step"), t.numeric("loss"), {}, {}});
      rank.series.push_back(Series{name, t.numeric("step"), t.numeric("effective_rank"), {}, {}});
    }
    written.push_back(write_svg(root / "matfac_loss.svg", loss));
    written.push_back(write_svg(root / "matfac_rank.svg", rank));
  }
  for (const auto& p : surfaces) {
    const CsvTable t = read_csv(p.string());
    const auto alpha = t.numeric("alpha");
    const auto beta = t.numeric("beta");
    const auto loss_v = t.numeric("loss");
    PlotSpec h;
    h.kind = PlotKind::heatmap;
    h.title = "Loss surface " + p.stem().string().substr(8);
    h.x_label = "alpha (spike)";
    h.y_label = "beta (bulk)";
    for (double a : alpha) {
      if (h.grid_x.empty() || h.grid_x.back() != a) h.grid_x.push_back(a);
    }
    for (std::size_t i = 0; i < beta.size() && (i == 0 || alpha[i] == alpha[0]); ++i) {
      h.grid_y.push_back(beta[i]);
    }
    h.values = loss_v;
    if (h.values.size() != h.grid_x.size() * h.grid_y.size()) {
      throw InvalidInputError("'" + p.string() + "' is not a complete alpha-major grid");
    }
    fs::path out = p;
    out.replace_extension(".svg");
    written.push_back(write_svg(out, h));
  }
  const fs::path spikes = root / "spike_ranges.csv";
  if (fs::exists(spikes)) {
    const CsvTable t = read_csv(spikes.string());
    PlotSpec s{PlotKind::line, "Spike range at checkpoints", "step", "spike range", false, false,
               {}, {}, {}, {}};
    s.series.push_back(Series{"spike_range", t.numeric("step"), t.numeric("spike_range"), {}, {}});
    written.push_back(write_svg(root / "spike_range.svg", s));
  }
  if (written.empty()) warnings << "warning: no result files in '" << dir << "'; nothing plotted\n";
  return written;
}

}  // namespace muonlab
