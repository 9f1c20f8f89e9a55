#include "sdts/metrics.hpp"

#include "sdts/enhance.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sdts {

namespace {
constexpr Scalar kPsnrCap = 100.0;
constexpr Scalar kPeak = 255.0;
}  // namespace

Scalar psnr(const Frame& a, const Frame& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("psnr: frame dims mismatch " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()));
  const Scalar mse = (a - b).square().mean();
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(kPeak * kPeak / mse));
}

Scalar delta_psnr(const Frame& raw, const Frame& compressed, const Frame& enhanced) {
  return psnr(enhanced, raw) - psnr(compressed, raw);
}

Frame error_map(const Frame& a, const Frame& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("error_map: frame dims mismatch");
  return (a - b).abs().min(255.0);
}

MetricsReport MetricsReport::from_rows(std::vector<MetricsRow> rows) {
  MetricsReport report;
  report.rows = std::move(rows);
  Scalar sum = 0, sum_hqf = 0, sum_lqf = 0;
  int n_hqf = 0, n_lqf = 0;
  for (const MetricsRow& r : report.rows) {
    sum += r.delta_psnr;
    if (r.label == FrameLabel::HQF) {
      sum_hqf += r.delta_psnr;
      ++n_hqf;
    } else {
      sum_lqf += r.delta_psnr;
      ++n_lqf;
    }
  }
  if (!report.rows.empty()) report.mean_delta = sum / Scalar(report.rows.size());
  if (n_hqf > 0) report.mean_delta_hqf = sum_hqf / Scalar(n_hqf);
  if (n_lqf > 0) report.mean_delta_lqf = sum_lqf / Scalar(n_lqf);
  return report;
}

MetricsReport evaluate_enhanced(const Clip& raw, const Clip& degraded, const Clip& enhanced,
                                int period) {
  raw.validate();
  degraded.validate();
  enhanced.validate();
  if (raw.count() != degraded.count() || raw.count() != enhanced.count())
    throw std::invalid_argument("evaluate: clip lengths differ (raw " +
                                std::to_string(raw.count()) + ", degraded " +
                                std::to_string(degraded.count()) + ", enhanced " +
                                std::to_string(enhanced.count()) + ")");

  std::vector<MetricsRow> rows;
  rows.reserve(raw.count());
  for (int i = 0; i < raw.count(); ++i) {
    const Frame r = cropped_frame(raw, i);
    const Frame d = cropped_frame(degraded, i);
    const Frame e = cropped_frame(enhanced, i);
    if (r.rows() != d.rows() || r.cols() != d.cols() || r.rows() != e.rows() ||
        r.cols() != e.cols())
      throw std::invalid_argument("evaluate: frame " + std::to_string(i) + " dims differ");
    MetricsRow row;
    row.frame = i;
    row.label = degraded.labels[i];
    row.model = route_frame(i, period, raw.count()).model;
    row.psnr_in = psnr(d, r);
    row.psnr_out = psnr(e, r);
    row.delta_psnr = row.psnr_out - row.psnr_in;
    rows.push_back(row);
  }
  return MetricsReport::from_rows(std::move(rows));
}

MetricsReport evaluate_clip(const Clip& raw, const Clip& degraded, const Checkpoint& lqf,
                            const Checkpoint& hqf, int period) {
  const Clip enhanced = enhance_clip(degraded, lqf, hqf, period);
  return evaluate_enhanced(raw, degraded, enhanced, period);
}

void write_report_csv(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report " + path.string());
  out << "frame,label,model,psnr_in,psnr_out,delta_psnr\n";
  char buf[256];
  for (const MetricsRow& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%s,%.6f,%.6f,%.6f\n", r.frame,
                  to_string(r.label).c_str(), to_string(r.model).c_str(), r.psnr_in,
                  r.psnr_out, r.delta_psnr);
    out << buf;
  }
}

}  // namespace sdts
