#include "sdts/frame_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sdts {

namespace fs = std::filesystem;

std::string expand_pattern(const std::string& pattern, int index) {
  const auto pos = pattern.find('%');
  if (pos == std::string::npos)
    throw std::invalid_argument("frame pattern '" + pattern + "' has no %d hole");
  std::size_t i = pos + 1;
  bool zero_pad = false;
  if (i < pattern.size() && pattern[i] == '0') {
    zero_pad = true;
    ++i;
  }
  int width = 0;
  while (i < pattern.size() && pattern[i] >= '0' && pattern[i] <= '9')
    width = width * 10 + (pattern[i++] - '0');
  if (i >= pattern.size() || pattern[i] != 'd')
    throw std::invalid_argument("frame pattern '" + pattern + "' is not %Nd-style");
  std::string digits = std::to_string(index);
  if (zero_pad && int(digits.size()) < width)
    digits.insert(0, std::size_t(width) - digits.size(), '0');
  return pattern.substr(0, pos) + digits + pattern.substr(i + 1);
}

namespace {

int read_pgm_token(std::istream& in, const fs::path& path) {
  // skips whitespace and '#' comments between header fields
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (std::isspace(ch)) {
      ch = in.get();
    } else {
      break;
    }
  }
  if (ch == EOF || !std::isdigit(ch))
    throw std::runtime_error("malformed PGM header in " + path.string());
  int value = 0;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    ch = in.get();
  }
  return value;
}

}  // namespace

Frame load_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '5')
    throw std::runtime_error("unsupported format (want binary PGM P5): " + path.string());
  const int width = read_pgm_token(in, path);
  const int height = read_pgm_token(in, path);
  const int maxval = read_pgm_token(in, path);
  if (maxval != 255)
    throw std::runtime_error("unsupported PGM maxval " + std::to_string(maxval) + " in " +
                             path.string());
  std::vector<unsigned char> bytes(std::size_t(width) * height);
  in.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(bytes.size()));
  if (std::size_t(in.gcount()) != bytes.size())
    throw std::runtime_error("truncated PGM payload in " + path.string());
  Frame f(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) f(y, x) = Scalar(bytes[std::size_t(y) * width + x]);
  return f;
}

void save_pgm(const Frame& frame, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << frame.cols() << " " << frame.rows() << "\n255\n";
  std::vector<unsigned char> bytes(std::size_t(frame.rows()) * frame.cols());
  for (int y = 0; y < frame.rows(); ++y)
    for (int x = 0; x < frame.cols(); ++x) {
      const long v = std::lround(frame(y, x));  // half away from zero
      bytes[std::size_t(y) * frame.cols() + x] =
          static_cast<unsigned char>(std::clamp(v, 0L, 255L));
    }
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Clip load_clip(const ClipManifest& manifest) {
  if (!fs::is_directory(manifest.dir))
    throw std::runtime_error("clip directory not found: " + manifest.dir.string());

  int count = manifest.count;
  if (count < 0) {
    count = 0;
    while (fs::exists(manifest.dir / expand_pattern(manifest.pattern, count))) ++count;
  }
  if (count == 0)
    throw std::runtime_error("no frames matching '" + manifest.pattern + "' in " +
                             manifest.dir.string());

  Clip clip;
  clip.role = manifest.role;
  clip.frames.reserve(count);
  for (int i = 0; i < count; ++i) {
    const fs::path path = manifest.dir / expand_pattern(manifest.pattern, i);
    if (!fs::exists(path)) throw std::runtime_error("missing frame file " + path.string());
    Frame f = load_pgm(path);
    if (!clip.frames.empty() &&
        (f.rows() != clip.orig_h || f.cols() != clip.orig_w))
      throw std::runtime_error("frame dims mismatch at " + path.string());
    if (clip.frames.empty()) {
      clip.orig_h = int(f.rows());
      clip.orig_w = int(f.cols());
    }
    clip.frames.push_back(pad_to_multiple(f, 4));
  }

  const fs::path labels_path = manifest.dir / "labels.csv";
  if (fs::exists(labels_path)) {
    clip.labels = load_labels_csv(labels_path);
    if (int(clip.labels.size()) != count)
      throw std::runtime_error("labels.csv row count does not match frame count in " +
                               manifest.dir.string());
  } else {
    clip.labels.assign(count, FrameLabel::LQF);
  }
  return clip;
}

void save_clip(const Clip& clip, const ClipManifest& manifest) {
  clip.validate();
  fs::create_directories(manifest.dir);
  for (int i = 0; i < clip.count(); ++i)
    save_pgm(cropped_frame(clip, i), manifest.dir / expand_pattern(manifest.pattern, i));
  if (clip.role != ClipRole::raw)
    save_labels_csv(clip.labels, manifest.dir / "labels.csv");
}

Clip load_raw_y(const fs::path& path, int width, int height, int count) {
  if (width <= 0 || height <= 0 || count <= 0)
    throw std::invalid_argument("load_raw_y dims/count must be positive");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::int64_t luma = std::int64_t(width) * height;
  const std::int64_t chroma = luma / 2;  // planar 4:2:0
  const std::int64_t needed = std::int64_t(count) * (luma + chroma) - chroma;
  in.seekg(0, std::ios::end);
  const std::int64_t actual = in.tellg();
  if (actual < needed)
    throw std::runtime_error("raw 4:2:0 file too short: " + path.string() + " needs " +
                             std::to_string(needed) + " bytes, has " + std::to_string(actual));
  in.seekg(0, std::ios::beg);

  Clip clip;
  clip.role = ClipRole::raw;
  clip.orig_h = height;
  clip.orig_w = width;
  std::vector<unsigned char> bytes(static_cast<std::size_t>(luma));
  for (int i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(luma));
    if (in.gcount() != luma) throw std::runtime_error("short read in " + path.string());
    Frame f(height, width);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) f(y, x) = Scalar(bytes[std::size_t(y) * width + x]);
    clip.frames.push_back(pad_to_multiple(f, 4));
    if (i + 1 < count) in.seekg(chroma, std::ios::cur);
  }
  clip.labels.assign(count, FrameLabel::LQF);
  return clip;
}

void save_labels_csv(const std::vector<FrameLabel>& labels, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "frame,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << i << "," << to_string(labels[i]) << "\n";
}

std::vector<FrameLabel> load_labels_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "frame,label")
    throw std::runtime_error("bad labels header in " + path.string());
  std::vector<FrameLabel> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("bad labels row in " + path.string());
    const int frame = std::stoi(line.substr(0, comma));
    if (frame != int(labels.size()))
      throw std::runtime_error("labels rows out of order in " + path.string());
    labels.push_back(frame_label_from_string(line.substr(comma + 1)));
  }
  return labels;
}

}  // namespace sdts
