#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ews/scenario.hpp"
#include "ews/simulation.hpp"

namespace ews {

std::string csv_header(int n, int m, int p);
std::string csv_row(const SimRecord& rec, double dt);
std::string format_double(double v);

// One StreamRecord per line: {"k", "x_hat", "integrator"}.
std::string stream_record_line(const SimRecord& rec);

struct PlotSeries {
  std::vector<double> t;
  std::vector<double> y_true;
  std::vector<double> y_received;
  std::vector<double> z;
  std::vector<double> susp;
  std::vector<int> warning;
  double tau = 0.0;
  std::vector<double> bounds;  // horizontal guides on the output panel
};

void add_plot_point(PlotSeries& s, const SimRecord& rec, double dt);
std::string render_svg(const PlotSeries& s);

}  // namespace ews
