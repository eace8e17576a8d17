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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace muonlab {

enum class PlotKind { line, band, heatmap };

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lo;  // band only
  std::vector<double> hi;
};

struct PlotSpec {
  PlotKind kind = PlotKind::line;
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
  // Heatmap: values[ix * grid_y.size() + iy]; NaN cells are left blank.
  std::vector<double> grid_x;
  std::vector<double> grid_y;
  std::vector<double> values;
};

struct ColorScale {
  double min = 0.0;
  double max = 0.0;
};

// Finite min and max of the heatmap values.
ColorScale heatmap_scale(const PlotSpec& spec);

std::string render_svg(const PlotSpec& spec);

// Builds plots from the CSVs found in `dir` (summary.csv, trace_*.csv,
// surface_step*.csv, spike_ranges.csv) and writes SVG files next to them.
// Returns the written paths; prints a warning and writes nothing when no
// result files exist. Throws ConfigError naming a missing column.
std::vector<std::string> render_plots(const std::string& dir, std::ostream& warnings);

}  // namespace muonlab
