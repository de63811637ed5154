#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace smikm {

// Single-channel raster of arbitrary sample type, row-major.
template <typename T>
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<T> v;

  Plane() = default;
  Plane(int w, int h, T fill = T{}) : width(w), height(h), v(static_cast<size_t>(w) * h, fill) {}

  T& at(int x, int y) {
    assert(x >= 0 && x < width && y >= 0 && y < height);
    return v[static_cast<size_t>(y) * width + x];
  }
  T at(int x, int y) const {
    assert(x >= 0 && x < width && y >= 0 && y < height);
    return v[static_cast<size_t>(y) * width + x];
  }
  size_t size() const { return v.size(); }
  bool empty() const { return v.empty(); }
};

using FloatPlane = Plane<float>;
using DoublePlane = Plane<double>;
using CodePlane = Plane<std::uint8_t>;  // LBP codes

}  // namespace smikm
