#include "smikm/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "smikm/error.hpp"

namespace smikm {

namespace {

constexpr int kLevels = 12;
constexpr double kCoverage = 0.95;

struct Lab {
  double L, a, b;
};

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

Lab rgb_to_lab(double r8, double g8, double b8) {
  const double r = srgb_to_linear(r8 / 255.0);
  const double g = srgb_to_linear(g8 / 255.0);
  const double b = srgb_to_linear(b8 / 255.0);
  // sRGB -> XYZ, D65 white point.
  const double X = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double Z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double Xn = 0.95047, Yn = 1.0, Zn = 1.08883;
  auto fwd = [](double t) {
    constexpr double d = 6.0 / 29.0;
    return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
  };
  const double fx = fwd(X / Xn), fy = fwd(Y / Yn), fz = fwd(Z / Zn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double lab_dist(const Lab& a, const Lab& b) {
  const double dl = a.L - b.L, da = a.a - b.a, db = a.b - b.b;
  return std::sqrt(dl * dl + da * da + db * db);
}

}  // namespace

size_t Mask::count() const {
  return static_cast<size_t>(std::count_if(m.begin(), m.end(), [](std::uint8_t b) { return b != 0; }));
}

SaliencyMap compute_saliency_hc(const ImageBuf& img, ExecMode mode) {
  if (img.channels != 3)
    throw ChannelError("compute_saliency_hc expects RGB (replicate gray inputs first)");

  const size_t npix = static_cast<size_t>(img.width) * img.height;
  constexpr int kColors = kLevels * kLevels * kLevels;

  // Quantize to 12 levels per channel and build the color histogram.
  std::vector<int> pixel_color(npix);
  std::vector<int> count(kColors, 0);
  for (size_t i = 0; i < npix; ++i) {
    const int r = img.data[i * 3 + 0] * kLevels / 256;
    const int g = img.data[i * 3 + 1] * kLevels / 256;
    const int b = img.data[i * 3 + 2] * kLevels / 256;
    const int c = (r * kLevels + g) * kLevels + b;
    pixel_color[i] = c;
    ++count[c];
  }

  std::vector<int> present;
  for (int c = 0; c < kColors; ++c)
    if (count[c] > 0) present.push_back(c);
  std::sort(present.begin(), present.end(),
            [&](int a, int b) { return count[a] != count[b] ? count[a] > count[b] : a < b; });

  size_t covered = 0;
  size_t kept_n = 0;
  while (kept_n < present.size() && covered < kCoverage * static_cast<double>(npix))
    covered += static_cast<size_t>(count[present[kept_n++]]);
  if (kept_n == 0) kept_n = 1;

  const int K = static_cast<int>(kept_n);
  std::vector<int> kept(present.begin(), present.begin() + K);
  std::vector<Lab> lab(K);
  auto level_value = [](int level) { return (level + 0.5) * 255.0 / kLevels; };
  for (int i = 0; i < K; ++i) {
    const int c = kept[i];
    lab[i] = rgb_to_lab(level_value(c / (kLevels * kLevels)),
                        level_value((c / kLevels) % kLevels), level_value(c % kLevels));
  }

  // Map every quantized color to a kept slot, merging dropped colors into
  // their Lab-nearest kept color (frequency mass moves with them).
  std::vector<int> slot_of(kColors, -1);
  std::vector<double> freq(K, 0.0);
  for (int i = 0; i < K; ++i) {
    slot_of[kept[i]] = i;
    freq[i] = static_cast<double>(count[kept[i]]);
  }
  for (size_t pi = 0; pi < present.size(); ++pi) {
    const int c = present[pi];
    if (slot_of[c] >= 0) continue;
    const Lab cl = rgb_to_lab(level_value(c / (kLevels * kLevels)),
                              level_value((c / kLevels) % kLevels), level_value(c % kLevels));
    int best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (int i = 0; i < K; ++i) {
      const double d = lab_dist(cl, lab[i]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    slot_of[c] = best;
    freq[best] += static_cast<double>(count[c]);
  }
  const double inv_n = 1.0 / static_cast<double>(npix);
  for (double& fq : freq) fq *= inv_n;

  // Contrast of each kept color against the whole kept set.
  std::vector<double> dist(static_cast<size_t>(K) * K, 0.0);
  for (int i = 0; i < K; ++i)
    for (int j = i + 1; j < K; ++j) {
      const double d = lab_dist(lab[i], lab[j]);
      dist[static_cast<size_t>(i) * K + j] = d;
      dist[static_cast<size_t>(j) * K + i] = d;
    }
  std::vector<double> sal(K, 0.0);
  for (int i = 0; i < K; ++i) {
    double s = 0.0;
    for (int j = 0; j < K; ++j) s += freq[j] * dist[static_cast<size_t>(i) * K + j];
    sal[i] = s;
  }

  // Smooth each color over its m nearest kept colors (itself included),
  // weighting by T - D so closer colors count more.
  const int m = (K + 3) / 4;
  std::vector<double> smoothed(K, 0.0);
  if (m <= 1) {
    smoothed = sal;
  } else {
    std::vector<int> order(K);
    for (int i = 0; i < K; ++i) {
      std::iota(order.begin(), order.end(), 0);
      double* drow = &dist[static_cast<size_t>(i) * K];
      std::partial_sort(order.begin(), order.begin() + m, order.end(),
                        [&](int a, int b) { return drow[a] != drow[b] ? drow[a] < drow[b] : a < b; });
      double T = 0.0;
      for (int t = 0; t < m; ++t) T += drow[order[t]];
      if (T <= 0.0) {
        smoothed[i] = sal[i];
        continue;
      }
      double acc = 0.0;
      for (int t = 0; t < m; ++t) acc += (T - drow[order[t]]) * sal[order[t]];
      smoothed[i] = acc / ((m - 1) * T);
    }
  }

  double mx = 0.0;
  for (double s : smoothed) mx = std::max(mx, s);

  SaliencyMap map;
  map.width = img.width;
  map.height = img.height;
  map.values.resize(npix);
  const double scale = mx > 0.0 ? 1.0 / mx : 0.0;
  parallel_for(static_cast<std::int64_t>(npix), mode, [&](std::int64_t i) {
    map.values[static_cast<size_t>(i)] =
        static_cast<float>(smoothed[slot_of[pixel_color[static_cast<size_t>(i)]]] * scale);
  });
  return map;
}

RegionMasks segment(const SaliencyMap& map) {
  const size_t n = map.values.size();
  std::vector<int> hist(256, 0);
  auto bin_of = [](float v) { return std::min(255, static_cast<int>(v * 256.0f)); };
  for (float v : map.values) ++hist[bin_of(v)];

  // Otsu: maximize between-class variance over the split point.
  double total_mean = 0.0;
  for (int i = 0; i < 256; ++i) total_mean += i * static_cast<double>(hist[i]);
  total_mean /= static_cast<double>(n);
  double w0 = 0.0, sum0 = 0.0, best_var = -1.0;
  int best_t = 0;
  for (int t = 0; t < 255; ++t) {
    w0 += static_cast<double>(hist[t]) / static_cast<double>(n);
    sum0 += t * static_cast<double>(hist[t]) / static_cast<double>(n);
    if (w0 <= 0.0 || w0 >= 1.0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (total_mean - sum0) / (1.0 - w0);
    const double var = w0 * (1.0 - w0) * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }

  RegionMasks masks;
  masks.foreground = Mask(map.width, map.height);
  masks.background = Mask(map.width, map.height);

  auto apply_threshold = [&](float thr) {
    size_t nfg = 0;
    for (size_t i = 0; i < n; ++i) {
      const bool fg = map.values[i] >= thr;
      masks.foreground.m[i] = fg ? 1 : 0;
      nfg += fg ? 1 : 0;
    }
    return nfg;
  };

  size_t nfg = 0;
  bool degenerate = true;
  if (best_var > 0.0) {
    nfg = apply_threshold(static_cast<float>(best_t + 1) / 256.0f);
    degenerate = nfg == 0 || nfg > static_cast<size_t>(0.95 * static_cast<double>(n));
  }
  if (degenerate) {
    const double mean = std::accumulate(map.values.begin(), map.values.end(), 0.0) /
                        static_cast<double>(n);
    nfg = apply_threshold(static_cast<float>(2.0 * mean));
    degenerate = nfg == 0 || nfg > static_cast<size_t>(0.95 * static_cast<double>(n));
  }
  if (degenerate) {
    // Top quarter by value, ties broken by pixel index.
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    const size_t take = std::max<size_t>(1, n / 4);
    std::nth_element(idx.begin(), idx.begin() + take, idx.end(), [&](std::uint32_t a, std::uint32_t b) {
      return map.values[a] != map.values[b] ? map.values[a] > map.values[b] : a < b;
    });
    std::fill(masks.foreground.m.begin(), masks.foreground.m.end(), 0);
    for (size_t i = 0; i < take; ++i) masks.foreground.m[idx[i]] = 1;
  }
  for (size_t i = 0; i < n; ++i) masks.background.m[i] = masks.foreground.m[i] ? 0 : 1;
  return masks;
}

ImageBuf saliency_to_image(const SaliencyMap& map) {
  ImageBuf out(map.width, map.height, 1);
  for (size_t i = 0; i < map.values.size(); ++i) {
    const long v = std::lround(255.0 * static_cast<double>(map.values[i]));
    out.data[i] = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
  }
  return out;
}

}  // namespace smikm
