#include "ews/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <tuple>
#include <sstream>

namespace ews {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_header(int n, int m, int p) {
  std::string h = "k,t_seconds";
  for (int i = 1; i <= n; ++i) h += ",x_" + std::to_string(i);
  for (int i = 1; i <= m; ++i) h += ",y_" + std::to_string(i);
  for (int i = 1; i <= m; ++i) h += ",ybar_" + std::to_string(i);
  for (int i = 1; i <= p; ++i) h += ",u_" + std::to_string(i);
  h += ",z,alarm,l_hat,feas,prox,susp,warning";
  return h;
}

std::string csv_row(const SimRecord& rec, double dt) {
  std::string row = std::to_string(rec.k);
  row += ',' + format_double(static_cast<double>(rec.k) * dt);
  auto put = [&](const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) row += ',' + format_double(v(i));
  };
  put(rec.x);
  put(rec.y);
  put(rec.ybar);
  put(rec.u);
  row += ',' + format_double(rec.z);
  row += rec.alarm ? ",1" : ",0";
  row += ',';
  if (rec.l_hat) row += std::to_string(*rec.l_hat);
  row += ',' + format_double(rec.feas);
  row += ',' + format_double(rec.prox);
  row += ',' + format_double(rec.susp);
  row += ',';
  row += to_string(rec.warning);
  return row;
}

std::string stream_record_line(const SimRecord& rec) {
  Json j;
  j["k"] = rec.k;
  j["x_hat"] = std::vector<double>(rec.x_hat.data(), rec.x_hat.data() + rec.x_hat.size());
  j["integrator"] =
      std::vector<double>(rec.integrator.data(), rec.integrator.data() + rec.integrator.size());
  return j.dump();
}

void add_plot_point(PlotSeries& s, const SimRecord& rec, double dt) {
  s.t.push_back(static_cast<double>(rec.k) * dt);
  s.y_true.push_back(rec.y(0));
  s.y_received.push_back(rec.ybar(0));
  s.z.push_back(rec.z);
  s.susp.push_back(rec.susp);
  s.warning.push_back(static_cast<int>(rec.warning));
}

namespace {

constexpr double kWidth = 900;
constexpr double kPanel = 180;
constexpr double kGap = 40;
constexpr double kLeft = 70;
constexpr double kRight = 20;

struct Frame {
  double top;
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return top + kPanel - (y - y0) / (y1 - y0) * kPanel; }
};

std::string polyline(const Frame& f, const std::vector<double>& t, const std::vector<double>& v,
                     const char* color, bool step = false) {
  std::ostringstream os;
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
  const size_t stride = std::max<size_t>(1, t.size() / 2000);
  double last = 0.0;
  for (size_t i = 0; i < t.size(); i += stride) {
    if (step && i > 0) os << f.px(t[i]) << ',' << f.py(last) << ' ';
    os << f.px(t[i]) << ',' << f.py(v[i]) << ' ';
    last = v[i];
  }
  os << "\"/>\n";
  return os.str();
}

std::string hline(const Frame& f, double y, const char* color) {
  std::ostringstream os;
  os << "<line x1=\"" << kLeft << "\" x2=\"" << kWidth - kRight << "\" y1=\"" << f.py(y)
     << "\" y2=\"" << f.py(y) << "\" stroke=\"" << color << "\" stroke-dasharray=\"4 3\"/>\n";
  return os.str();
}

std::string axes(const Frame& f, const std::string& title) {
  std::ostringstream os;
  os << "<rect x=\"" << kLeft << "\" y=\"" << f.top << "\" width=\"" << kWidth - kLeft - kRight
     << "\" height=\"" << kPanel << "\" fill=\"none\" stroke=\"#444\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"" << f.top - 6 << "\" font-size=\"12\">" << title << "</text>\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", f.y1);
  os << "<text x=\"" << kLeft - 6 << "\" y=\"" << f.top + 10
     << "\" font-size=\"10\" text-anchor=\"end\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.3g", f.y0);
  os << "<text x=\"" << kLeft - 6 << "\" y=\"" << f.top + kPanel
     << "\" font-size=\"10\" text-anchor=\"end\">" << buf << "</text>\n";
  return os.str();
}

std::pair<double, double> range_of(std::initializer_list<const std::vector<double>*> series,
                                   std::initializer_list<double> extra) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto* s : series)
    for (double v : *s) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  for (double v : extra) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string render_svg(const PlotSeries& s) {
  const double height = 4 * (kPanel + kGap) + 20;
  const double t0 = s.t.empty() ? 0.0 : s.t.front();
  const double t1 = s.t.size() < 2 ? t0 + 1.0 : s.t.back();
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
     << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  Frame f{kGap, t0, t1, 0, 1};
  auto [ylo, yhi] = range_of({&s.y_true, &s.y_received}, {});
  for (double b : s.bounds) {
    if (b > ylo - (yhi - ylo) && b < yhi + (yhi - ylo)) {
      ylo = std::min(ylo, b);
      yhi = std::max(yhi, b);
    }
  }
  f.y0 = ylo;
  f.y1 = yhi;
  os << axes(f, "output: true (blue) vs received (orange)");
  for (double b : s.bounds)
    if (b >= f.y0 && b <= f.y1) os << hline(f, b, "#c00");
  os << polyline(f, s.t, s.y_true, "#1f77b4") << polyline(f, s.t, s.y_received, "#ff7f0e");

  f.top += kPanel + kGap;
  std::tie(f.y0, f.y1) = range_of({&s.z}, {0.0, s.tau});
  os << axes(f, "detector statistic z and threshold");
  os << polyline(f, s.t, s.z, "#2ca02c") << hline(f, s.tau, "#c00");

  f.top += kPanel + kGap;
  f.y0 = 0.0;
  f.y1 = std::max(range_of({&s.susp}, {0.0}).second, 1e-3);
  os << axes(f, "suspicion metric");
  os << polyline(f, s.t, s.susp, "#9467bd");

  f.top += kPanel + kGap;
  f.y0 = -0.2;
  f.y1 = 2.2;
  os << axes(f, "warning level (0 none, 1 low, 2 high)");
  std::vector<double> w(s.warning.begin(), s.warning.end());
  os << polyline(f, s.t, w, "#d62728", true);

  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << height - 6
     << "\" font-size=\"11\" text-anchor=\"middle\">time [s]</text>\n</svg>\n";
  return os.str();
}

}  // namespace ews
