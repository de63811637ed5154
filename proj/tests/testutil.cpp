#include "testutil.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>

#include <unistd.h>

namespace fs = std::filesystem;

namespace tu {

ImageBuf rot90(const ImageBuf& in) {
  ImageBuf out(in.height, in.width, in.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < in.channels; ++c) out.at(x, y, c) = in.at(y, in.height - 1 - x, c);
  return out;
}

ImageBuf rot180(const ImageBuf& in) {
  ImageBuf out(in.width, in.height, in.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < in.channels; ++c)
        out.at(x, y, c) = in.at(in.width - 1 - x, in.height - 1 - y, c);
  return out;
}

ImageBuf rot270(const ImageBuf& in) {
  ImageBuf out(in.height, in.width, in.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < in.channels; ++c) out.at(x, y, c) = in.at(in.width - 1 - y, x, c);
  return out;
}

ImageBuf upscale2x(const ImageBuf& in) {
  ImageBuf out(in.width * 2, in.height * 2, in.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < in.channels; ++c) out.at(x, y, c) = in.at(x / 2, y / 2, c);
  return out;
}

ImageBuf shift(const ImageBuf& in, int dx, int dy, std::uint8_t fill) {
  ImageBuf out(in.width, in.height, in.channels);
  std::fill(out.data.begin(), out.data.end(), fill);
  for (int y = 0; y < in.height; ++y) {
    const int sy = y - dy;
    if (sy < 0 || sy >= in.height) continue;
    for (int x = 0; x < in.width; ++x) {
      const int sx = x - dx;
      if (sx < 0 || sx >= in.width) continue;
      for (int c = 0; c < in.channels; ++c) out.at(x, y, c) = in.at(sx, sy, c);
    }
  }
  return out;
}

ImageBuf solid_rgb(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  ImageBuf img(w, h, 3);
  for (int i = 0; i < w * h; ++i) {
    img.data[static_cast<size_t>(i) * 3 + 0] = r;
    img.data[static_cast<size_t>(i) * 3 + 1] = g;
    img.data[static_cast<size_t>(i) * 3 + 2] = b;
  }
  return img;
}

ImageBuf solid_gray(int w, int h, std::uint8_t v) {
  ImageBuf img(w, h, 1);
  std::fill(img.data.begin(), img.data.end(), v);
  return img;
}

ImageBuf random_gray(int w, int h, std::uint64_t seed) {
  ImageBuf img(w, h, 1);
  std::mt19937_64 rng(seed);
  for (auto& b : img.data) b = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

ImageBuf random_rgb(int w, int h, std::uint64_t seed) {
  ImageBuf img(w, h, 3);
  std::mt19937_64 rng(seed);
  for (auto& b : img.data) b = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

ImageBuf blob_canvas(int size, std::uint64_t seed, int offset_x, int offset_y) {
  // 3-5 disks plus a bar, all in a 40x40 local box. Parameters are drawn
  // once from the seed so different offsets translate the exact pixel set.
  std::mt19937_64 rng(seed);
  auto unit = [&] { return (rng() >> 11) * 0x1.0p-53; };
  const int n_disks = 3 + static_cast<int>(unit() * 3);
  struct Disk {
    double cx, cy, r;
  };
  std::vector<Disk> disks;
  for (int i = 0; i < n_disks; ++i)
    disks.push_back({6.0 + unit() * 28.0, 6.0 + unit() * 28.0, 3.0 + unit() * 6.0});
  const double bar_y = 8.0 + unit() * 24.0;
  const double bar_x0 = 4.0 + unit() * 10.0;
  const double bar_x1 = bar_x0 + 10.0 + unit() * 20.0;
  const double bar_h = 1.5 + unit() * 2.5;

  ImageBuf img(size, size, 1);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double lx = x - offset_x;
      const double ly = y - offset_y;
      if (lx < 0 || ly < 0 || lx >= 40 || ly >= 40) continue;
      bool on = false;
      for (const Disk& d : disks) {
        const double dx = lx - d.cx, dy = ly - d.cy;
        if (dx * dx + dy * dy <= d.r * d.r) {
          on = true;
          break;
        }
      }
      if (!on && lx >= bar_x0 && lx <= bar_x1 && std::abs(ly - bar_y) <= bar_h) on = true;
      if (on) img.at(x, y) = 255;
    }
  return img;
}

bool shape_contains(Shape s, double dx, double dy, double r) {
  const double ax = std::abs(dx), ay = std::abs(dy);
  switch (s) {
    case Shape::Disk: return dx * dx + dy * dy <= r * r;
    case Shape::Square: return ax <= r && ay <= r;
    case Shape::Triangle: return dy >= -r && dy <= r && ax <= (dy + r) * 0.6;
    case Shape::Ring: {
      const double d2 = dx * dx + dy * dy;
      return d2 <= r * r && d2 >= (0.55 * r) * (0.55 * r);
    }
    case Shape::Cross: return (ax <= r / 3.0 && ay <= r) || (ay <= r / 3.0 && ax <= r);
    case Shape::HBars:
      return ax <= r && ay <= r && std::fmod(dy + r, r / 2.0) < r / 4.0;
    case Shape::TwoBlobs: {
      const double ux = dx - 0.5 * r, uy = dy - 0.5 * r;
      const double vx = dx + 0.5 * r, vy = dy + 0.5 * r;
      const double rr = 0.55 * r;
      return ux * ux + uy * uy <= rr * rr || vx * vx + vy * vy <= rr * rr;
    }
    case Shape::LShape: return ax <= r && ay <= r && (dx <= -r / 3.0 || dy >= r / 3.0);
    case Shape::Diamond: return ax + ay <= r;
    case Shape::Checker: {
      if (ax > r || ay > r) return false;
      const int cell = 1 + (static_cast<int>((dx + r) / (r / 2.0)) +
                            static_cast<int>((dy + r) / (r / 2.0)));
      return cell % 2 == 0;
    }
  }
  return false;
}

void draw_shape(ImageBuf& img, Shape s, int cx, int cy, int r, std::uint8_t cr, std::uint8_t cg,
                std::uint8_t cb) {
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      if (!shape_contains(s, x - cx, y - cy, r)) continue;
      img.at(x, y, 0) = cr;
      if (img.channels == 3) {
        img.at(x, y, 1) = cg;
        img.at(x, y, 2) = cb;
      }
    }
}

int make_desk_corpus(const std::string& dir, int per_class, std::uint64_t seed) {
  struct Scheme {
    std::uint8_t bg[3], fg[3];
  };
  // Shape pairs share a color scheme, so color histograms alone cannot
  // separate the pair. Foreground and background also share their V value
  // (max channel), which keeps the V-channel LBP nearly shape-blind and
  // leaves the pair split to the saliency-map features.
  static const Scheme schemes[5] = {
      {{25, 25, 115}, {115, 28, 28}},
      {{40, 95, 40}, {95, 40, 95}},
      {{105, 105, 30}, {30, 105, 105}},
      {{130, 75, 25}, {25, 80, 130}},
      {{85, 30, 85}, {30, 85, 45}},
  };
  static const Shape shapes[10] = {Shape::Disk,     Shape::Square, Shape::Triangle, Shape::Ring,
                                   Shape::Cross,    Shape::HBars,  Shape::TwoBlobs, Shape::LShape,
                                   Shape::Diamond,  Shape::Checker};

  std::mt19937_64 rng(seed);
  auto unit = [&] { return (rng() >> 11) * 0x1.0p-53; };

  // Spatially smooth value noise (coarse grid, bilinear): keeps quantized
  // colors locally coherent the way natural images are, instead of
  // per-pixel salt that would dominate the saliency map.
  const int size = 128;
  auto noise_field = [&](double amp) {
    const int g = 9;
    std::vector<double> ctrl(g * g);
    for (double& c : ctrl) c = (unit() * 2.0 - 1.0) * amp;
    std::vector<double> field(static_cast<size_t>(size) * size);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double fx = x * (g - 1.0) / (size - 1.0);
        const double fy = y * (g - 1.0) / (size - 1.0);
        const int x0 = std::min(g - 2, static_cast<int>(fx));
        const int y0 = std::min(g - 2, static_cast<int>(fy));
        const double tx = fx - x0, ty = fy - y0;
        const double a = ctrl[static_cast<size_t>(y0) * g + x0];
        const double b = ctrl[static_cast<size_t>(y0) * g + x0 + 1];
        const double c = ctrl[static_cast<size_t>(y0 + 1) * g + x0];
        const double d = ctrl[static_cast<size_t>(y0 + 1) * g + x0 + 1];
        field[static_cast<size_t>(y) * size + x] =
            a * (1 - tx) * (1 - ty) + b * tx * (1 - ty) + c * (1 - tx) * ty + d * tx * ty;
      }
    return field;
  };

  int written = 0;
  for (int cls = 0; cls < 10; ++cls) {
    const Scheme& sc = schemes[cls / 2];
    const fs::path cls_dir = fs::path(dir) / ("class" + std::to_string(cls));
    fs::create_directories(cls_dir);
    for (int i = 0; i < per_class; ++i) {
      ImageBuf img(size, size, 3);
      std::array<std::vector<double>, 3> bg_noise = {noise_field(22), noise_field(22),
                                                     noise_field(22)};
      std::array<std::vector<double>, 3> fg_noise = {noise_field(20), noise_field(20),
                                                     noise_field(20)};
      const int cx = size / 2 + static_cast<int>(unit() * 25) - 12;
      const int cy = size / 2 + static_cast<int>(unit() * 25) - 12;
      const int r = 26 + static_cast<int>(unit() * 12);
      ImageBuf obj(size, size, 1);
      draw_shape(obj, shapes[cls], cx, cy, r, 255, 255, 255);
      const int turns = static_cast<int>(unit() * 4);
      for (int t = 0; t < turns; ++t) obj = rot90(obj);

      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
          const size_t pi = static_cast<size_t>(y) * size + x;
          const bool fg = obj.at(x, y) != 0;
          for (int c = 0; c < 3; ++c) {
            const double base = fg ? sc.fg[c] : sc.bg[c];
            const double n = (fg ? fg_noise : bg_noise)[static_cast<size_t>(c)][pi];
            const double dither = (unit() * 2.0 - 1.0) * 4.0;
            img.data[pi * 3 + static_cast<size_t>(c)] =
                static_cast<std::uint8_t>(std::clamp(base + n + dither, 0.0, 255.0));
          }
        }
      char name[64];
      std::snprintf(name, sizeof(name), "img%03d.png", i);
      smikm::save_png(img, (cls_dir / name).string());
      ++written;
    }
  }
  return written;
}

std::string make_temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path p = fs::temp_directory_path() /
                     ("smikm_" + tag + "_" + std::to_string(getpid()) + "_" +
                      std::to_string(counter.fetch_add(1)));
  fs::create_directories(p);
  return p.string();
}

void remove_tree(const std::string& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
}

}  // namespace tu
