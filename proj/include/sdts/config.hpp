#pragma once

#include "sdts/codec.hpp"
#include "sdts/net.hpp"
#include "sdts/train_config.hpp"

#include <filesystem>
#include <ostream>
#include <string>

namespace sdts {

/// Flat key=value configuration mirroring TrainConfig, NetConfig and
/// DegradeConfig. File values are applied first, CLI flags override them,
/// and every effective value is echoed before a run. Unknown keys are
/// rejected.
struct RunConfig {
  TrainConfig train;
  NetConfig net;
  DegradeConfig degrade;

  /// '#' starts a comment; blank lines are ignored.
  void load_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);
  void echo(std::ostream& out) const;
};

}  // namespace sdts
