// Kernel benchmark: serial reference vs the OpenMP path for the hot loops.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "smikm/bovw.hpp"
#include "smikm/keypoints.hpp"
#include "smikm/parallel.hpp"
#include "smikm/retrieval.hpp"
#include "smikm/saliency.hpp"

using smikm::ExecMode;

namespace {

double time_s(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-24s serial %9.4f ms   openmp %9.4f ms   speedup %.2fx\n", name,
              serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s);
}

smikm::ImageBuf random_rgb(int w, int h, std::uint64_t seed) {
  smikm::ImageBuf img(w, h, 3);
  std::mt19937_64 rng(seed);
  for (auto& b : img.data) b = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", smikm::max_threads());

  {
    smikm::FloatPlane plane(1024, 1024);
    std::mt19937_64 rng(7);
    for (auto& v : plane.v) v = static_cast<float>((rng() >> 11) * 0x1.0p-53);
    const double s = time_s([&] { smikm::gaussian_blur(plane, 2.5f, ExecMode::Serial); }, 5);
    const double p = time_s([&] { smikm::gaussian_blur(plane, 2.5f, ExecMode::Parallel); }, 5);
    report("gaussian_blur 1024^2", s, p);
  }

  {
    const smikm::ImageBuf img = random_rgb(768, 512, 11);
    const double s = time_s([&] { smikm::compute_saliency_hc(img, ExecMode::Serial); }, 5);
    const double p = time_s([&] { smikm::compute_saliency_hc(img, ExecMode::Parallel); }, 5);
    report("saliency_hc 768x512", s, p);
  }

  {
    const int n = 20000, dim = 30, k = 100;
    std::vector<double> data(static_cast<size_t>(n) * dim);
    std::mt19937_64 rng(13);
    for (auto& v : data) v = (rng() >> 11) * 0x1.0p-53;
    const double s = time_s(
        [&] { smikm::detail::lloyd_kmeans(data, n, dim, k, 1, 10, 0.0, ExecMode::Serial); }, 1);
    const double p = time_s(
        [&] { smikm::detail::lloyd_kmeans(data, n, dim, k, 1, 10, 0.0, ExecMode::Parallel); }, 1);
    report("kmeans 20k x 30, k=100", s, p);
  }

  {
    // Query distance pass over a synthetic database.
    const int entries = 2000;
    std::mt19937_64 rng(17);
    smikm::RetrievalIndex index;
    index.vocab.k = 100;
    index.vocab.dim = 6;
    index.vocab.centroids.assign(600, 0.0);
    auto random_hist = [&](int bins) {
      smikm::Histogram h;
      h.bins.resize(bins);
      double total = 0.0;
      for (double& b : h.bins) {
        b = (rng() >> 11) * 0x1.0p-53;
        total += b;
      }
      for (double& b : h.bins) b /= total;
      h.normalized = true;
      return h;
    };
    auto random_bundle = [&] {
      smikm::FeatureBundle b;
      b.f_hh = random_hist(32);
      b.f_hs = random_hist(32);
      b.f_lbpv = random_hist(256);
      b.f_kraw = random_hist(100);
      b.b_hh = random_hist(32);
      b.b_hs = random_hist(32);
      b.b_lbpv = random_hist(256);
      b.sm_lbp = random_hist(256);
      return b;
    };
    for (int i = 0; i < entries; ++i)
      index.entries.push_back({"img" + std::to_string(i), "c", random_bundle()});
    const smikm::FeatureBundle q = random_bundle();
    const double s = time_s([&] { smikm::query(index, q, "", ExecMode::Serial); }, 5);
    const double p = time_s([&] { smikm::query(index, q, "", ExecMode::Parallel); }, 5);
    report("query 2000 entries", s, p);
  }

  return 0;
}
