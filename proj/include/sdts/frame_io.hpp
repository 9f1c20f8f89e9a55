#pragma once

#include "sdts/clip.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sdts {

/// Locates a clip on disk: numbered binary PGM files under one directory.
/// pattern must contain a single %Nd-style index hole; count -1 means
/// "probe indices from 0 until a file is missing".
struct ClipManifest {
  std::filesystem::path dir;
  std::string pattern = "frame_%04d.pgm";
  int count = -1;
  ClipRole role = ClipRole::raw;
};

std::string expand_pattern(const std::string& pattern, int index);

Frame load_pgm(const std::filesystem::path& path);

/// Writes binary PGM (P5, maxval 255). Values are rounded half away from
/// zero and clamped to [0, 255].
void save_pgm(const Frame& frame, const std::filesystem::path& path);

/// Loads a clip, pads every frame to multiples of 4 by edge replication, and
/// records the original dims for later cropping. Reads labels.csv from the
/// clip directory when present.
Clip load_clip(const ClipManifest& manifest);

/// Writes frames (cropped back to original dims) plus labels.csv for
/// non-raw roles. Deterministic bytes.
void save_clip(const Clip& clip, const ClipManifest& manifest);

/// Reads the luma plane of a planar 4:2:0 file; chroma bytes are skipped.
Clip load_raw_y(const std::filesystem::path& path, int width, int height, int count);

void save_labels_csv(const std::vector<FrameLabel>& labels,
                     const std::filesystem::path& path);
std::vector<FrameLabel> load_labels_csv(const std::filesystem::path& path);

}  // namespace sdts
