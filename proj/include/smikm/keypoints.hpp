#pragma once

#include <vector>

#include "smikm/image.hpp"
#include "smikm/parallel.hpp"
#include "smikm/saliency.hpp"

namespace smikm {

struct Keypoint {
  PixelCoord position;
  float sigma = 0.0f;     // detection scale in full-resolution pixels
  float response = 0.0f;  // |DoG| at the extremum
};

struct DogParams {
  int octaves = 3;
  int scales_per_octave = 3;
  float base_sigma = 1.6f;
  float threshold = 0.03f;  // on [0,1] intensities
  int max_keypoints = 500;
};

// Patches cropped around keypoints, tagged with the region they fall in.
struct PatchSet {
  struct Item {
    ImageBuf patch;
    Keypoint source;
    bool in_foreground = false;
  };
  std::vector<Item> items;
  int side = 0;
};

// Difference-of-Gaussians scale-space extrema, strongest first, capped at
// max_keypoints. Throws EmptyResult when nothing clears the threshold
// (callers fall back to grid_keypoints).
std::vector<Keypoint> detect_keypoints(const ImageBuf& gray, const DogParams& params = {},
                                       ExecMode mode = ExecMode::Parallel);

// Uniform grid fallback so every image yields descriptors.
std::vector<Keypoint> grid_keypoints(const ImageBuf& gray, int spacing = 32);

PatchSet extract_patches(const ImageBuf& gray, const std::vector<Keypoint>& kps,
                         const RegionMasks& masks, int side = 30);

// Separable Gaussian blur with edge replication (exposed for the
// serial/parallel consistency tests and the kernel benchmark).
FloatPlane gaussian_blur(const FloatPlane& in, float sigma, ExecMode mode = ExecMode::Parallel);

}  // namespace smikm
