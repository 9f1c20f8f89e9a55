#include "sdts/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sdts {

namespace {

constexpr char kMagic[4] = {'S', 'D', 'T', 'S'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xFF;
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xFF;
  out.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& out, Scalar v) {
  write_u64(out, std::bit_cast<std::uint64_t>(v));
}

void write_str(std::ostream& out, const std::string& s) {
  write_u32(out, std::uint32_t(s.size()));
  out.write(s.data(), std::streamsize(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("truncated checkpoint");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

Scalar read_f64(std::istream& in) {
  return std::bit_cast<Scalar>(read_u64(in));
}

std::string read_str(std::istream& in) {
  const std::uint32_t len = read_u32(in);
  if (len > (1u << 20)) throw std::runtime_error("implausible string length in checkpoint");
  std::string s(len, '\0');
  in.read(s.data(), std::streamsize(len));
  if (!in) throw std::runtime_error("truncated checkpoint");
  return s;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::mc: return "mc";
    case Variant::lqf: return "lqf";
    case Variant::hqf: return "hqf";
  }
  return "mc";
}

Variant variant_from_string(const std::string& s) {
  if (s == "mc") return Variant::mc;
  if (s == "lqf") return Variant::lqf;
  if (s == "hqf") return Variant::hqf;
  throw std::invalid_argument("unknown model variant '" + s + "'");
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_str(out, to_string(variant));
  write_u32(out, std::uint32_t(net.channels));
  write_u32(out, std::uint32_t(net.blocks));
  write_u32(out, std::uint32_t(net.slice_split));
  write_u32(out, std::uint32_t(net.mc_channels));
  write_u32(out, std::uint32_t(train.batch_size));
  write_f64(out, train.lr);
  write_u32(out, std::uint32_t(train.decay_epoch));
  write_f64(out, train.decay_factor);
  write_u32(out, std::uint32_t(train.total_epochs));
  write_f64(out, train.lambda2);
  write_u32(out, std::uint32_t(train.patch_size));
  write_u64(out, train.seed);
  write_u32(out, std::uint32_t(train.phase1_epochs));
  write_u32(out, std::uint32_t(train.phase2_epochs));
  write_u32(out, std::uint32_t(train.phase3_epochs));
  write_u32(out, std::uint32_t(train.steps_per_epoch));
  write_u32(out, std::uint32_t(epoch));
  write_u32(out, std::uint32_t(phase));
  write_str(out, provenance);
  write_u32(out, std::uint32_t(params.size()));
  for (const auto& [name, tensor] : params) {
    write_str(out, name);
    const Shape s = tensor.shape();
    write_u32(out, 4);
    write_u32(out, std::uint32_t(s.n));
    write_u32(out, std::uint32_t(s.c));
    write_u32(out, std::uint32_t(s.h));
    write_u32(out, std::uint32_t(s.w));
    for (std::int64_t i = 0; i < tensor.size(); ++i) write_f64(out, tensor.value()[i]);
  }
  if (!out) throw std::runtime_error("write failed for checkpoint " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + path.string());
  const std::uint32_t version = read_u32(in);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  ckpt.variant = variant_from_string(read_str(in));
  ckpt.net.channels = int(read_u32(in));
  ckpt.net.blocks = int(read_u32(in));
  ckpt.net.slice_split = int(read_u32(in));
  ckpt.net.mc_channels = int(read_u32(in));
  ckpt.train.batch_size = int(read_u32(in));
  ckpt.train.lr = read_f64(in);
  ckpt.train.decay_epoch = int(read_u32(in));
  ckpt.train.decay_factor = read_f64(in);
  ckpt.train.total_epochs = int(read_u32(in));
  ckpt.train.lambda2 = read_f64(in);
  ckpt.train.patch_size = int(read_u32(in));
  ckpt.train.seed = read_u64(in);
  ckpt.train.phase1_epochs = int(read_u32(in));
  ckpt.train.phase2_epochs = int(read_u32(in));
  ckpt.train.phase3_epochs = int(read_u32(in));
  ckpt.train.steps_per_epoch = int(read_u32(in));
  ckpt.epoch = int(read_u32(in));
  ckpt.phase = int(read_u32(in));
  ckpt.provenance = read_str(in);
  const std::uint32_t count = read_u32(in);
  ckpt.params.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = read_str(in);
    const std::uint32_t rank = read_u32(in);
    if (rank != 4)
      throw std::runtime_error("checkpoint entry '" + name + "' has unsupported rank " +
                               std::to_string(rank));
    Shape s;
    s.n = int(read_u32(in));
    s.c = int(read_u32(in));
    s.h = int(read_u32(in));
    s.w = int(read_u32(in));
    Array data(s.elems());
    for (std::int64_t j = 0; j < data.size(); ++j) data[j] = read_f64(in);
    ckpt.params.emplace_back(name, Tensor::from_data(s, std::move(data), true));
  }
  return ckpt;
}

const Tensor& Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : params)
    if (n == name) return t;
  throw std::runtime_error("checkpoint is missing parameter '" + name + "'");
}

namespace {

void copy_named(NamedParams model_params, const Checkpoint& ckpt) {
  for (auto& [name, tensor] : model_params) {
    const Tensor& src = ckpt.find(name);
    if (!(src.shape() == tensor.shape()))
      throw std::runtime_error("checkpoint parameter '" + name + "' has shape " +
                               src.shape().str() + ", model expects " + tensor.shape().str());
    tensor.mutable_value() = src.value();
  }
}

}  // namespace

void load_params(McParams& mc, const Checkpoint& ckpt) {
  NamedParams named;
  mc.collect("mc", named);
  copy_named(named, ckpt);
}

void load_params(SdtsParams& model, const Checkpoint& ckpt) {
  copy_named(model.named(), ckpt);
}

Checkpoint make_checkpoint(Variant variant, const NetConfig& net, const TrainConfig& train,
                           int epoch, int phase, std::string provenance, NamedParams params) {
  Checkpoint ckpt;
  ckpt.variant = variant;
  ckpt.net = net;
  ckpt.train = train;
  ckpt.epoch = epoch;
  ckpt.phase = phase;
  ckpt.provenance = std::move(provenance);
  ckpt.params = std::move(params);
  return ckpt;
}

}  // namespace sdts
