#pragma once

#include <cstdint>
#include <vector>

#include "smikm/image.hpp"
#include "smikm/parallel.hpp"
#include "smikm/plane.hpp"

namespace smikm {

// Per-pixel prominence in [0,1], same dimensions as the source image.
struct SaliencyMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  float at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
};

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> m;

  Mask() = default;
  Mask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), m(static_cast<size_t>(w) * h, fill) {}
  bool at(int x, int y) const { return m[static_cast<size_t>(y) * width + x] != 0; }
  size_t count() const;
};

// Complementary foreground/background partition; foreground is never empty.
struct RegionMasks {
  Mask foreground;
  Mask background;
};

// Histogram-contrast saliency: channels quantized to 12 levels, rare colors
// merged into the dominant set covering >= 95% of pixels, per-color contrast
// summed over the kept set in Lab space, smoothed over the ceil(K/4) nearest
// colors and normalized so the most salient pixel is 1.
SaliencyMap compute_saliency_hc(const ImageBuf& img, ExecMode mode = ExecMode::Parallel);

// Otsu threshold on a 256-bin histogram of the map, with two fallbacks:
// 2x-mean when Otsu degenerates, top-25% by value when both do.
RegionMasks segment(const SaliencyMap& map);

// 8-bit rendering of the map (round(255 * s)); input of the LBP_sm feature.
ImageBuf saliency_to_image(const SaliencyMap& map);

}  // namespace smikm
