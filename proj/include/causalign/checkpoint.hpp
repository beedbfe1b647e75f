#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "causalign/encoder.hpp"
#include "causalign/optimizer.hpp"
#include "causalign/train_config.hpp"

namespace causalign {

struct Checkpoint {
  EncoderArch arch;
  std::vector<std::string> class_names;
  Parameters params;
  AdamWState optimizer;
  int epoch = 0;
  TrainConfig config;

  ClipModel model() const;
  bool operator==(const Checkpoint&) const = default;
};

// Container layout:
//   "CCLK1"
//   u64 little-endian byte length of the metadata block
//   metadata: key=value lines (UTF-8), including an `arrays` index
//   f64 little-endian arrays in the order listed by `arrays`
std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace causalign
