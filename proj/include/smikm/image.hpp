#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smikm/plane.hpp"

namespace smikm {

// 0-based pixel position: x is the column (width axis), y the row (height
// axis). This convention is used everywhere in the library.
struct PixelCoord {
  int x = 0;
  int y = 0;
};

// Decoded raster: 8-bit samples, row-major, channel-interleaved.
// channels is 1 (gray) or 3 (RGB).
struct ImageBuf {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  ImageBuf() = default;
  ImageBuf(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, fill) {}

  std::uint8_t& at(int x, int y, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  bool empty() const { return data.empty(); }
  bool operator==(const ImageBuf&) const = default;
};

// HSV planes with all values in [0,1]; H is degrees/360.
struct HsvImage {
  int width = 0;
  int height = 0;
  std::vector<float> h, s, v;
};

// PNG or JPEG bytes -> ImageBuf. Throws DecodeError on anything else.
ImageBuf decode_image(std::span<const std::uint8_t> bytes);
ImageBuf load_image(const std::string& path);

// PNG encoding (gray or RGB); used for debug dumps and test fixtures.
std::vector<std::uint8_t> encode_png(const ImageBuf& img);
void save_png(const ImageBuf& img, const std::string& path);

HsvImage rgb_to_hsv(const ImageBuf& img);
ImageBuf to_grayscale(const ImageBuf& img);

// side x side crop centered at `center`; out-of-bounds samples are
// edge-replicated, so every center position is valid.
ImageBuf crop_patch(const ImageBuf& img, PixelCoord center, int side);

ImageBuf replicate_to_rgb(const ImageBuf& gray);

// Grayscale bytes -> floats, scaled by 1/255 into [0,1].
FloatPlane to_unit_plane(const ImageBuf& gray);

}  // namespace smikm
