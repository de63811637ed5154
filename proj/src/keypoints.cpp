#include "smikm/keypoints.hpp"

#include <algorithm>
#include <cmath>

#include "smikm/error.hpp"

namespace smikm {

namespace {

std::vector<float> gaussian_kernel(float sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0f * sigma)));
  std::vector<float> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[i + radius] = static_cast<float>(v);
    sum += v;
  }
  for (float& v : k) v = static_cast<float>(v / sum);
  return k;
}

FloatPlane downsample2(const FloatPlane& in) {
  FloatPlane out(in.width / 2, in.height / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(x, y) = in.at(2 * x, 2 * y);
  return out;
}

}  // namespace

FloatPlane gaussian_blur(const FloatPlane& in, float sigma, ExecMode mode) {
  const std::vector<float> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);

  FloatPlane tmp(in.width, in.height);
  parallel_for(in.height, mode, [&](std::int64_t y) {
    for (int x = 0; x < in.width; ++x) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i) {
        const int sx = std::clamp(x + i, 0, in.width - 1);
        acc += k[i + radius] * in.at(sx, static_cast<int>(y));
      }
      tmp.at(x, static_cast<int>(y)) = acc;
    }
  });

  FloatPlane out(in.width, in.height);
  parallel_for(in.height, mode, [&](std::int64_t y) {
    for (int x = 0; x < in.width; ++x) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i) {
        const int sy = std::clamp(static_cast<int>(y) + i, 0, in.height - 1);
        acc += k[i + radius] * tmp.at(x, sy);
      }
      out.at(x, static_cast<int>(y)) = acc;
    }
  });
  return out;
}

std::vector<Keypoint> detect_keypoints(const ImageBuf& gray, const DogParams& params,
                                       ExecMode mode) {
  if (gray.channels != 1) throw ChannelError("detect_keypoints expects a grayscale image");
  if (std::min(gray.width, gray.height) < 32)
    throw ParameterError("detect_keypoints: image must be at least 32px on each side");

  const float k = std::pow(2.0f, 1.0f / static_cast<float>(params.scales_per_octave));
  const int levels = params.scales_per_octave + 3;  // 6 gaussians -> 5 DoG -> 3 scanned

  std::vector<Keypoint> found;
  FloatPlane base = to_unit_plane(gray);

  for (int octave = 0; octave < params.octaves; ++octave) {
    if (std::min(base.width, base.height) < 8) break;
    const int step = 1 << octave;

    std::vector<FloatPlane> gauss(levels);
    gauss[0] = gaussian_blur(base, params.base_sigma, mode);
    for (int i = 1; i < levels; ++i) {
      const float s_prev = params.base_sigma * std::pow(k, static_cast<float>(i - 1));
      const float s_next = s_prev * k;
      gauss[i] = gaussian_blur(gauss[i - 1], std::sqrt(s_next * s_next - s_prev * s_prev), mode);
    }
    std::vector<FloatPlane> dog(levels - 1);
    for (int i = 0; i + 1 < levels; ++i) {
      dog[i] = FloatPlane(base.width, base.height);
      for (size_t j = 0; j < dog[i].v.size(); ++j) dog[i].v[j] = gauss[i + 1].v[j] - gauss[i].v[j];
    }

    for (int s = 1; s + 1 < levels - 1; ++s) {
      const FloatPlane& below = dog[s - 1];
      const FloatPlane& cur = dog[s];
      const FloatPlane& above = dog[s + 1];
      for (int y = 1; y + 1 < cur.height; ++y) {
        for (int x = 1; x + 1 < cur.width; ++x) {
          const float v = cur.at(x, y);
          if (std::abs(v) < params.threshold) continue;
          bool is_max = true, is_min = true;
          for (int dy = -1; dy <= 1 && (is_max || is_min); ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const float b = below.at(x + dx, y + dy);
              const float a = above.at(x + dx, y + dy);
              const float c = cur.at(x + dx, y + dy);
              if (b >= v || a >= v || (c >= v && (dx | dy))) is_max = false;
              if (b <= v || a <= v || (c <= v && (dx | dy))) is_min = false;
              if (!is_max && !is_min) break;
            }
          if (!is_max && !is_min) continue;
          Keypoint kp;
          kp.position = {x * step, y * step};
          kp.sigma = params.base_sigma * std::pow(k, static_cast<float>(s)) * static_cast<float>(step);
          kp.response = std::abs(v);
          found.push_back(kp);
        }
      }
    }

    // Next octave starts from the gaussian one full octave up (sigma doubled).
    base = downsample2(gauss[params.scales_per_octave]);
  }

  if (found.empty()) throw EmptyResult("detect_keypoints: no extremum above threshold");

  std::sort(found.begin(), found.end(), [](const Keypoint& a, const Keypoint& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.position.y != b.position.y) return a.position.y < b.position.y;
    return a.position.x < b.position.x;
  });
  if (static_cast<int>(found.size()) > params.max_keypoints) found.resize(params.max_keypoints);
  return found;
}

std::vector<Keypoint> grid_keypoints(const ImageBuf& gray, int spacing) {
  if (spacing < 1) throw ParameterError("grid_keypoints: spacing must be >= 1");
  std::vector<Keypoint> out;
  for (int y = spacing / 2; y < gray.height; y += spacing)
    for (int x = spacing / 2; x < gray.width; x += spacing)
      out.push_back({{x, y}, 1.6f, 0.0f});
  if (out.empty()) out.push_back({{gray.width / 2, gray.height / 2}, 1.6f, 0.0f});
  return out;
}

PatchSet extract_patches(const ImageBuf& gray, const std::vector<Keypoint>& kps,
                         const RegionMasks& masks, int side) {
  if (masks.foreground.width != gray.width || masks.foreground.height != gray.height)
    throw DimensionMismatch("extract_patches: mask/image size mismatch");
  PatchSet set;
  set.side = side;
  set.items.reserve(kps.size());
  for (const Keypoint& kp : kps) {
    PatchSet::Item item;
    item.patch = crop_patch(gray, kp.position, side);
    item.source = kp;
    item.in_foreground = masks.foreground.at(kp.position.x, kp.position.y);
    set.items.push_back(std::move(item));
  }
  return set;
}

}  // namespace smikm
