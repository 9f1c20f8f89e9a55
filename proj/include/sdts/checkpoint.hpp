#pragma once

#include "sdts/net.hpp"
#include "sdts/train_config.hpp"

#include <filesystem>
#include <string>

namespace sdts {

enum class Variant { mc, lqf, hqf };
std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// Serialized model state. Binary layout (all integers little-endian):
///   magic "SDTS" | version u32 | variant string | NetConfig (4 x u32) |
///   TrainConfig snapshot (u32/f64/u64 fields in declaration order) |
///   epoch u32 | phase u32 | provenance string | param count u32 |
///   entries: name (u32 length + UTF-8 bytes) | rank u32 | dims u32 x rank |
///   payload (f64 little-endian x numel).
/// Strings are u32 length + bytes. Round-trips bit-exactly.
struct Checkpoint {
  Variant variant = Variant::mc;
  NetConfig net;
  TrainConfig train;
  int epoch = 0;  // global epochs completed
  int phase = 0;
  std::string provenance = "scratch";
  NamedParams params;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  const Tensor& find(const std::string& name) const;
};

/// Copies checkpoint entries into matching model tensors; every model
/// parameter must be present in the checkpoint.
void load_params(McParams& mc, const Checkpoint& ckpt);
void load_params(SdtsParams& model, const Checkpoint& ckpt);

Checkpoint make_checkpoint(Variant variant, const NetConfig& net, const TrainConfig& train,
                           int epoch, int phase, std::string provenance, NamedParams params);

}  // namespace sdts
