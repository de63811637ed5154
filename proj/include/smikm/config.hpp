#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "smikm/bovw.hpp"
#include "smikm/features.hpp"

namespace smikm {

// Flat key=value configuration; every parameter that affects index content
// lives here so an index file can echo the exact settings it was built with.
struct PipelineConfig {
  int patch_side = 30;
  int vocab_k = 100;
  IkmMode ikm_mode = IkmMode::SingleOrder;
  int hs_bins = 32;
  int lbp_bins = 256;
  std::array<double, 8> weights = kDefaultWeights;
  std::uint64_t seed = 42;
  int max_keypoints = 500;
  double dog_threshold = 0.03;
  int grid_spacing = 32;
  bool skip_grayscale = false;

  // Throws ConfigError on unknown keys or malformed values.
  static PipelineConfig parse(const std::string& text);
  static PipelineConfig load(const std::string& path);

  // Round-trips exactly: parse(serialize()) == *this, bit for bit.
  std::string serialize() const;

  bool operator==(const PipelineConfig&) const = default;
};

}  // namespace smikm
