#pragma once

#include <array>
#include <vector>

#include "smikm/image.hpp"
#include "smikm/plane.hpp"
#include "smikm/saliency.hpp"

namespace smikm {

struct Histogram {
  std::vector<double> bins;
  bool normalized = false;

  static Histogram zeros(int n) { return Histogram{std::vector<double>(n, 0.0), true}; }
  double sum() const;
  bool operator==(const Histogram&) const = default;
};

// Foreground weights 2, 2, 3, 1.5; background 1, 1, 2; saliency-map LBP 1.5.
inline constexpr std::array<double, 8> kDefaultWeights{2.0, 2.0, 3.0, 1.5, 1.0, 1.0, 2.0, 1.5};

// The eight per-image features. Slot order everywhere in the library:
//   0 f_hh   foreground hue histogram
//   1 f_hs   foreground saturation histogram
//   2 f_lbpv foreground LBP histogram of the V channel
//   3 f_kraw foreground IKM word-occurrence histogram
//   4 b_hh   background hue histogram
//   5 b_hs   background saturation histogram
//   6 b_lbpv background LBP histogram of the V channel
//   7 sm_lbp LBP histogram of the saliency map, whole frame
struct FeatureBundle {
  Histogram f_hh, f_hs, f_lbpv, f_kraw, b_hh, b_hs, b_lbpv, sm_lbp;
  std::array<double, 8> weights = kDefaultWeights;

  static constexpr int kSlots = 8;
  const Histogram& slot(int i) const;
  Histogram& slot(int i);
  bool operator==(const FeatureBundle&) const = default;
};

// Classic 8-neighbor radius-1 LBP. Bit k is set when neighbor k >= center,
// neighbors clockwise from the top-left; output drops the 1px border.
CodePlane lbp_code_map(const ImageBuf& gray);

// L1-normalized histogram over mask-selected samples. Code overload bins
// 8-bit codes directly; the float overload bins [0,1] values uniformly.
Histogram masked_histogram(const CodePlane& codes, const Mask& mask, int bins);
Histogram masked_histogram(const std::vector<float>& plane, int width, int height,
                           const Mask& mask, int bins);

// Drops the 1px border so a full-frame mask lines up with an LBP plane.
Mask shrink_mask(const Mask& mask);

FeatureBundle build_bundle(const ImageBuf& img, const RegionMasks& masks, const SaliencyMap& sal,
                           const Histogram& word_hist,
                           const std::array<double, 8>& weights = kDefaultWeights,
                           int hs_bins = 32, int lbp_bins = 256);

}  // namespace smikm
