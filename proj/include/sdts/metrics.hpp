#pragma once

#include "sdts/checkpoint.hpp"
#include "sdts/clip.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace sdts {

/// PSNR against an 8-bit peak of 255, in dB, capped at 100 (the cap also
/// covers identical frames).
Scalar psnr(const Frame& a, const Frame& b);

/// psnr(enhanced, raw) - psnr(compressed, raw).
Scalar delta_psnr(const Frame& raw, const Frame& compressed, const Frame& enhanced);

/// Per-pixel |a - b|, clamped to [0, 255] for 8-bit export.
Frame error_map(const Frame& a, const Frame& b);

struct MetricsRow {
  int frame = 0;
  FrameLabel label = FrameLabel::LQF;
  Variant model = Variant::lqf;
  Scalar psnr_in = 0;
  Scalar psnr_out = 0;
  Scalar delta_psnr = 0;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  Scalar mean_delta = 0;
  std::optional<Scalar> mean_delta_hqf;
  std::optional<Scalar> mean_delta_lqf;

  static MetricsReport from_rows(std::vector<MetricsRow> rows);
};

/// Scores an already-enhanced clip frame by frame (metrics are computed on
/// the original, un-padded frame area).
MetricsReport evaluate_enhanced(const Clip& raw, const Clip& degraded, const Clip& enhanced,
                                int period);

/// Enhances with the two checkpoints, then scores.
MetricsReport evaluate_clip(const Clip& raw, const Clip& degraded, const Checkpoint& lqf,
                            const Checkpoint& hqf, int period);

/// CSV: header frame,label,model,psnr_in,psnr_out,delta_psnr with 6-decimal
/// fixed-point dB columns.
void write_report_csv(const MetricsReport& report, const std::filesystem::path& path);

}  // namespace sdts
