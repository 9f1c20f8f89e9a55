#pragma once

#include "sdts/metrics.hpp"

#include <filesystem>

namespace sdts {

/// Per-frame delta-PSNR line chart as a standalone SVG. Byte output is a
/// deterministic function of the report.
void fluctuation_plot(const MetricsReport& report, const std::filesystem::path& path);

}  // namespace sdts
