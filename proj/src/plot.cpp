#include "sdts/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace sdts {

namespace {

std::string fmt(Scalar v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void fluctuation_plot(const MetricsReport& report, const std::filesystem::path& path) {
  if (report.rows.empty()) throw std::invalid_argument("fluctuation_plot: empty report");

  constexpr Scalar width = 640, height = 360;
  constexpr Scalar left = 56, right = 624, top = 24, bottom = 320;
  const int n = int(report.rows.size());

  Scalar ymin = 0.0, ymax = 0.0;
  for (const MetricsRow& r : report.rows) {
    ymin = std::min(ymin, r.delta_psnr);
    ymax = std::max(ymax, r.delta_psnr);
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const Scalar pad = 0.1 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const auto x_of = [&](int i) {
    return n == 1 ? (left + right) / 2 : left + (right - left) * Scalar(i) / Scalar(n - 1);
  };
  const auto y_of = [&](Scalar v) {
    return bottom - (bottom - top) * (v - ymin) / (ymax - ymin);
  };

  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write plot " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  // y grid and labels
  constexpr int y_ticks = 5;
  for (int t = 0; t < y_ticks; ++t) {
    const Scalar v = ymin + (ymax - ymin) * Scalar(t) / Scalar(y_ticks - 1);
    const Scalar y = y_of(v);
    out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(right)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(y + 4)
        << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">" << fmt(v)
        << "</text>\n";
  }
  // zero axis
  if (ymin <= 0.0 && ymax >= 0.0)
    out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(y_of(0.0)) << "\" x2=\""
        << fmt(right) << "\" y2=\"" << fmt(y_of(0.0))
        << "\" stroke=\"#888888\" stroke-width=\"1\"/>\n";

  // x labels (thinned on long clips)
  const int step = std::max(1, (n + 15) / 16);
  for (int i = 0; i < n; i += step)
    out << "<text x=\"" << fmt(x_of(i)) << "\" y=\"" << fmt(bottom + 16)
        << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">" << i
        << "</text>\n";
  out << "<text x=\"" << fmt((left + right) / 2) << "\" y=\"" << fmt(bottom + 34)
      << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">frame</text>\n";
  out << "<text x=\"14\" y=\"" << fmt((top + bottom) / 2)
      << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 14 "
      << fmt((top + bottom) / 2) << ")\">delta PSNR (dB)</text>\n";

  // frame on top of the grid
  out << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\""
      << fmt(right - left) << "\" height=\"" << fmt(bottom - top)
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (int i = 0; i < n; ++i) {
    if (i) out << " ";
    out << fmt(x_of(i)) << "," << fmt(y_of(report.rows[i].delta_psnr));
  }
  out << "\"/>\n";
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed for plot " + path.string());
}

}  // namespace sdts
