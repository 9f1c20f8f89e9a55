#pragma once

#include "sdts/tensor.hpp"

#include <cstdint>

namespace sdts {

/// Training schedule. The 30-epoch budget is split 10/10/10 across the three
/// phases; the learning rate is a function of the global epoch counter and
/// decays once, by decay_factor, at decay_epoch.
struct TrainConfig {
  int batch_size = 8;
  Scalar lr = 1e-4;
  int decay_epoch = 10;
  Scalar decay_factor = 10.0;
  int total_epochs = 30;
  Scalar lambda2 = 0.01;
  int patch_size = 32;
  std::uint64_t seed = 1;
  int phase1_epochs = 10;
  int phase2_epochs = 10;
  int phase3_epochs = 10;
  int steps_per_epoch = 24;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Learning rate for one global epoch in [0, total_epochs).
Scalar lr_schedule(int epoch, const TrainConfig& cfg);

}  // namespace sdts
