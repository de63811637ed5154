#include "smikm/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smikm/error.hpp"

namespace smikm {

double Histogram::sum() const { return std::accumulate(bins.begin(), bins.end(), 0.0); }

const Histogram& FeatureBundle::slot(int i) const {
  switch (i) {
    case 0: return f_hh;
    case 1: return f_hs;
    case 2: return f_lbpv;
    case 3: return f_kraw;
    case 4: return b_hh;
    case 5: return b_hs;
    case 6: return b_lbpv;
    default: return sm_lbp;
  }
}

Histogram& FeatureBundle::slot(int i) {
  return const_cast<Histogram&>(static_cast<const FeatureBundle*>(this)->slot(i));
}

CodePlane lbp_code_map(const ImageBuf& gray) {
  if (gray.channels != 1) throw ChannelError("lbp_code_map expects a grayscale image");
  if (gray.width < 3 || gray.height < 3)
    throw TooSmall("lbp_code_map: image must be at least 3x3");

  // Clockwise from top-left: TL, T, TR, R, BR, B, BL, L.
  static constexpr int dx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
  static constexpr int dy[8] = {-1, -1, -1, 0, 1, 1, 1, 0};

  CodePlane out(gray.width - 2, gray.height - 2);
  for (int y = 1; y + 1 < gray.height; ++y) {
    for (int x = 1; x + 1 < gray.width; ++x) {
      const std::uint8_t c = gray.at(x, y);
      unsigned code = 0;
      for (int k = 0; k < 8; ++k)
        if (gray.at(x + dx[k], y + dy[k]) >= c) code |= 1u << k;
      out.at(x - 1, y - 1) = static_cast<std::uint8_t>(code);
    }
  }
  return out;
}

namespace {

Histogram normalize_l1(std::vector<double> bins) {
  const double total = std::accumulate(bins.begin(), bins.end(), 0.0);
  if (total > 0.0)
    for (double& b : bins) b /= total;
  return Histogram{std::move(bins), true};
}

}  // namespace

Histogram masked_histogram(const CodePlane& codes, const Mask& mask, int bins) {
  if (codes.width != mask.width || codes.height != mask.height)
    throw DimensionMismatch("masked_histogram: plane/mask size mismatch");
  std::vector<double> acc(bins, 0.0);
  for (size_t i = 0; i < codes.v.size(); ++i)
    if (mask.m[i]) ++acc[codes.v[i] * bins / 256];
  return normalize_l1(std::move(acc));
}

Histogram masked_histogram(const std::vector<float>& plane, int width, int height,
                           const Mask& mask, int bins) {
  if (width != mask.width || height != mask.height ||
      plane.size() != static_cast<size_t>(width) * height)
    throw DimensionMismatch("masked_histogram: plane/mask size mismatch");
  std::vector<double> acc(bins, 0.0);
  for (size_t i = 0; i < plane.size(); ++i)
    if (mask.m[i]) ++acc[std::min(bins - 1, static_cast<int>(plane[i] * bins))];
  return normalize_l1(std::move(acc));
}

Mask shrink_mask(const Mask& mask) {
  if (mask.width < 3 || mask.height < 3) throw TooSmall("shrink_mask: mask must be at least 3x3");
  Mask out(mask.width - 2, mask.height - 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      out.m[static_cast<size_t>(y) * out.width + x] = mask.at(x + 1, y + 1) ? 1 : 0;
  return out;
}

FeatureBundle build_bundle(const ImageBuf& img, const RegionMasks& masks, const SaliencyMap& sal,
                           const Histogram& word_hist, const std::array<double, 8>& weights,
                           int hs_bins, int lbp_bins) {
  const HsvImage hsv = rgb_to_hsv(img);

  FeatureBundle b;
  b.weights = weights;
  b.f_hh = masked_histogram(hsv.h, img.width, img.height, masks.foreground, hs_bins);
  b.f_hs = masked_histogram(hsv.s, img.width, img.height, masks.foreground, hs_bins);
  b.b_hh = masked_histogram(hsv.h, img.width, img.height, masks.background, hs_bins);
  b.b_hs = masked_histogram(hsv.s, img.width, img.height, masks.background, hs_bins);

  // V = max(R,G,B), so the 8-bit V image is exact.
  ImageBuf v8(img.width, img.height, 1);
  for (size_t i = 0; i < v8.data.size(); ++i)
    v8.data[i] = static_cast<std::uint8_t>(std::lround(hsv.v[i] * 255.0f));
  const CodePlane lbp_v = lbp_code_map(v8);
  b.f_lbpv = masked_histogram(lbp_v, shrink_mask(masks.foreground), lbp_bins);
  b.b_lbpv = masked_histogram(lbp_v, shrink_mask(masks.background), lbp_bins);

  const CodePlane lbp_sm = lbp_code_map(saliency_to_image(sal));
  b.sm_lbp = masked_histogram(lbp_sm, Mask(lbp_sm.width, lbp_sm.height, 1), lbp_bins);

  b.f_kraw = word_hist;
  return b;
}

}  // namespace smikm
