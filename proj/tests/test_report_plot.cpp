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


#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <regex>
#include <sstream>

#include "muonlab/errors.hpp"
#include "muonlab/escape.hpp"
#include "muonlab/plot.hpp"
#include "muonlab/probe.hpp"
#include "muonlab/report.hpp"

namespace fs = std::filesystem;
using doctest::Approx;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("muonlab_test_plot_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

double svg_attr(const std::string& svg, const std::string& attr) {
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, std::regex(attr + "=\"([^\"]+)\"")));
  return muonlab::parse_real(m[1]);
}

}  // namespace

TEST_CASE("real formatting round-trips exactly") {
  for (double v : {0.0, -0.0, 1.0, 0.1, 1e-300, 5e-324, 1.7976931348623157e308, -123.456,
                   3.141592653589793}) {
    CHECK(muonlab::parse_real(muonlab::format_real(v)) == v);
  }
  CHECK(muonlab::format_real(0.5) == "0.5");
  CHECK(muonlab::format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::isnan(muonlab::parse_real(muonlab::format_real(std::nan("")))));
  CHECK(muonlab::parse_real("+2") == 2.0);
  CHECK_THROWS_AS(muonlab::parse_real("1,5"), muonlab::InvalidInputError);
  CHECK_THROWS_AS(muonlab::parse_real(""), muonlab::InvalidInputError);
}

TEST_CASE("csv writer and parser") {
  std::ostringstream out;
  muonlab::CsvWriter w(out, {"x", "name"});
  w.row({"1.5", "a"});
  w.row({"", "b"});
  CHECK_THROWS_AS(w.row({"1"}), muonlab::DomainError);
  CHECK(out.str() == "x,name\n1.5,a\n,b\n");
  const auto t = muonlab::parse_csv(out.str());
  CHECK(t.has_column("name"));
  CHECK_FALSE(t.has_column("y"));
  const auto x = t.numeric("x");
  CHECK(x[0] == 1.5);
  CHECK(std::isnan(x[1]));
  CHECK(t.text("name") == std::vector<std::string>{"a", "b"});
  try {
    t.numeric("missing_col");
    FAIL("expected a ConfigError");
  } catch (const muonlab::ConfigError& e) {
    CHECK(e.key() == "missing_col");
  }
  CHECK_THROWS_AS(muonlab::parse_csv("a,b\n1\n"), muonlab::InvalidInputError);
}

TEST_CASE("empty results directory warns and writes nothing") {
  const fs::path dir = fresh_dir("empty");
  std::ostringstream warn;
  const auto files = muonlab::render_plots(dir.string(), warn);
  CHECK(files.empty());
  CHECK(warn.str().find("warning") != std::string::npos);
  CHECK(fs::is_empty(dir));
  CHECK_THROWS_AS(muonlab::render_plots((dir / "absent").string(), warn),
                  muonlab::InvalidInputError);
}

TEST_CASE("single-cell sweep plots a one-point series with a zero-width band") {
  muonlab::SweepGrid grid;
  grid.dims = {16};
  grid.lambdas = {1e-2};
  grid.trials_per_cell = 1;
  grid.options.max_steps = 2000;
  const auto res = muonlab::run_sweep(grid);
  REQUIRE(res.reports.size() == 1);
  CHECK(res.reports[0].ci95_half_width == 0.0);
  const fs::path dir = fresh_dir("single");
  std::ostringstream csv;
  muonlab::write_reports_csv(csv, res.reports);
  muonlab::write_file((dir / "summary.csv").string(), csv.str());
  std::ostringstream warn;
  const auto files = muonlab::render_plots(dir.string(), warn);
  CHECK(files.size() == 2);
  CHECK(warn.str().empty());
  const std::string svg = muonlab::read_file((dir / "escape_vs_d.svg").string());
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, std::regex("<polygon points=\"([^ ]+) ([^ ]+) \"")));
  CHECK(m[1] == m[2]);
  CHECK(std::regex_search(svg, std::regex("<polyline points=\"[^ ]+ \"")));
}

TEST_CASE("heatmap color scale spans the surface losses") {
  muonlab::ProbeConfig cfg;
  cfg.grid_points = 11;
  cfg.scale_range = 2.0;
  muonlab::DenseMatrix da(2, 2), db(2, 2);
  da(0, 0) = 1.0;
  db(1, 1) = 1.0;
  const auto s = muonlab::grid_scan(
      [](const muonlab::DenseMatrix& w) { return 3.0 + w(0, 0) * w(0, 0) + w(1, 1) * w(1, 1); },
      muonlab::DenseMatrix(2, 2), da, db, cfg);
  const fs::path dir = fresh_dir("heat");
  std::ostringstream csv;
  muonlab::write_surface_csv(csv, s);
  muonlab::write_file((dir / "surface_step0.csv").string(), csv.str());
  std::ostringstream warn;
  const auto files = muonlab::render_plots(dir.string(), warn);
  REQUIRE(files.size() == 1);
  const std::string svg = muonlab::read_file(files[0]);
  CHECK(svg_attr(svg, "data-min") == Approx(3.0));
  CHECK(svg_attr(svg, "data-max") == Approx(11.0));

  muonlab::PlotSpec spec;
  spec.kind = muonlab::PlotKind::heatmap;
  spec.grid_x = {0, 1};
  spec.grid_y = {0, 1};
  spec.values = {std::nan(""), -2.0, 4.0, 1.0};
  const auto scale = muonlab::heatmap_scale(spec);
  CHECK(scale.min == -2.0);
  CHECK(scale.max == 4.0);
  spec.values.pop_back();
  CHECK_THROWS_AS(muonlab::render_svg(spec), muonlab::DomainError);
}

TEST_CASE("missing columns are named") {
  const fs::path dir = fresh_dir("missing");
  muonlab::write_file((dir / "trace_muon.csv").string(), "step,loss\n0,1\n");
  std::ostringstream warn;
  try {
    muonlab::render_plots(dir.string(), warn);
    FAIL("expected a ConfigError");
  } catch (const muonlab::ConfigError& e) {
    CHECK(e.key() == "effective_rank");
  }
}

TEST_CASE("factorization traces render loss and rank plots") {
  const fs::path dir = fresh_dir("trace");
  muonlab::write_file((dir / "trace_muon.csv").string(),
                      "step,loss,effective_rank,sigma1\n0,1,2,3\n10,0.5,4,3\n");
  muonlab::write_file((dir / "spike_ranges.csv").string(), "step,spike_range\n0,2\n10,1\n");
  std::ostringstream warn;
  const auto files = muonlab::render_plots(dir.string(), warn);
  CHECK(files.size() == 3);
  for (const auto& f : files) {
    const std::string svg = muonlab::read_file(f);
    CHECK(svg.starts_with("<svg"));
    CHECK(svg.find("</svg>") != std::string::npos);
  }
}
