#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "yaware/model.hpp"

namespace yaware {

struct CheckpointMeta {
  int schema_version = 1;
  int epoch = 0;
  std::uint64_t seed = 0;
  std::vector<double> loss_curve;  // per-epoch mean loss
  std::vector<double> lr_curve;    // per-epoch learning rate
  nlohmann::ordered_json extra;    // config echo and the like
};

struct Checkpoint {
  ModelParams params;
  CheckpointMeta meta;
};

// Container format: 8-byte magic "YAWCKPT1", 4-byte little-endian header
// length, JSON header (schema version, encoder config, epoch, seed, loss and
// lr curves, array name/shape echo, extra), then the parameter arrays as
// 64-bit little-endian floats concatenated in declaration order. Round trips
// are bit-exact.
void save_checkpoint(const ModelParams& params, const CheckpointMeta& meta,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace yaware
