#include "smikm/bovw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "smikm/error.hpp"

namespace smikm {

namespace detail {

namespace {

// Uniform double in [0,1) from raw generator output, pinned down to the bit
// so vocabularies are reproducible across standard libraries.
double next_unit(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

double sq_dist(const double* a, const double* b, int dim) {
  double acc = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

std::vector<double> lloyd_kmeans(std::span<const double> data, int n, int dim, int k,
                                 std::uint64_t seed, int max_iters, double tol, ExecMode mode,
                                 std::vector<double>* objective_trace, int* reseed_count,
                                 std::vector<int>* labels_out) {
  if (n < k) throw NotEnoughData("kmeans: fewer points than clusters");
  std::mt19937_64 rng(seed);
  auto row = [&](int i) { return data.data() + static_cast<size_t>(i) * dim; };

  // k-means++ seeding.
  std::vector<double> centroids(static_cast<size_t>(k) * dim);
  std::vector<double> min_d2(n, std::numeric_limits<double>::max());
  {
    const int first = std::min(n - 1, static_cast<int>(next_unit(rng) * n));
    std::copy_n(row(first), dim, centroids.begin());
  }
  for (int c = 1; c < k; ++c) {
    const double* prev = centroids.data() + static_cast<size_t>(c - 1) * dim;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      min_d2[i] = std::min(min_d2[i], sq_dist(row(i), prev, dim));
      total += min_d2[i];
    }
    int pick;
    if (total > 0.0) {
      const double r = next_unit(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += min_d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = std::min(n - 1, static_cast<int>(next_unit(rng) * n));
    }
    std::copy_n(row(pick), dim, centroids.begin() + static_cast<size_t>(c) * dim);
  }

  std::vector<int> labels(n, 0);
  std::vector<double> d2(n, 0.0);
  if (objective_trace) objective_trace->clear();
  if (reseed_count) *reseed_count = 0;

  for (int iter = 0; iter < max_iters; ++iter) {
    parallel_for(n, mode, [&](std::int64_t i) {
      const double* x = row(static_cast<int>(i));
      int best = 0;
      double best_d = std::numeric_limits<double>::max();
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(x, centroids.data() + static_cast<size_t>(c) * dim, dim);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      labels[i] = best;
      d2[i] = best_d;
    });
    if (objective_trace) {
      double obj = 0.0;
      for (int i = 0; i < n; ++i) obj += d2[i];
      objective_trace->push_back(obj);
    }

    std::vector<double> sums(static_cast<size_t>(k) * dim, 0.0);
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      double* s = sums.data() + static_cast<size_t>(labels[i]) * dim;
      const double* x = row(i);
      for (int j = 0; j < dim; ++j) s[j] += x[j];
      ++counts[labels[i]];
    }

    double max_shift = 0.0;
    std::vector<std::uint8_t> used_as_reseed(n, 0);
    for (int c = 0; c < k; ++c) {
      double* ctr = centroids.data() + static_cast<size_t>(c) * dim;
      if (counts[c] == 0) {
        // Reseed on the point currently farthest from its centroid.
        int far_i = -1;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i)
          if (!used_as_reseed[i] && d2[i] > far_d) {
            far_d = d2[i];
            far_i = i;
          }
        used_as_reseed[far_i] = 1;
        if (reseed_count) ++*reseed_count;
        const double* x = row(far_i);
        double shift = 0.0;
        for (int j = 0; j < dim; ++j) {
          const double d = ctr[j] - x[j];
          shift += d * d;
          ctr[j] = x[j];
        }
        max_shift = std::max(max_shift, std::sqrt(shift));
        continue;
      }
      const double* s = sums.data() + static_cast<size_t>(c) * dim;
      double shift = 0.0;
      for (int j = 0; j < dim; ++j) {
        const double next = s[j] / counts[c];
        const double d = ctr[j] - next;
        shift += d * d;
        ctr[j] = next;
      }
      max_shift = std::max(max_shift, std::sqrt(shift));
    }
    if (max_shift < tol) break;
  }

  if (labels_out) {
    parallel_for(n, mode, [&](std::int64_t i) {
      const double* x = row(static_cast<int>(i));
      int best = 0;
      double best_d = std::numeric_limits<double>::max();
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(x, centroids.data() + static_cast<size_t>(c) * dim, dim);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      (*labels_out)[i] = best;
    });
  }
  return centroids;
}

}  // namespace detail

Vocabulary train_vocabulary(std::span<const IkmDescriptor> descriptors, int k, std::uint64_t seed,
                            int max_iters, double tol, ExecMode mode) {
  if (descriptors.empty() || static_cast<int>(descriptors.size()) < k)
    throw NotEnoughData("train_vocabulary: need at least k descriptors");
  const int dim = static_cast<int>(descriptors[0].dim());
  std::vector<double> data;
  data.reserve(descriptors.size() * dim);
  for (const IkmDescriptor& d : descriptors) {
    if (static_cast<int>(d.dim()) != dim)
      throw DimensionMismatch("train_vocabulary: ragged descriptor dimensions");
    data.insert(data.end(), d.values.begin(), d.values.end());
  }

  Vocabulary v;
  v.k = k;
  v.dim = dim;
  v.ikm_mode = dim == 30 ? IkmMode::MultiOrder : IkmMode::SingleOrder;
  v.centroids = detail::lloyd_kmeans(data, static_cast<int>(descriptors.size()), dim, k, seed,
                                     max_iters, tol, mode);
  return v;
}

int quantize(const IkmDescriptor& desc, const Vocabulary& vocab) {
  if (static_cast<int>(desc.dim()) != vocab.dim)
    throw DimensionMismatch("quantize: descriptor/vocabulary dimension mismatch");
  int best = 0;
  double best_d = std::numeric_limits<double>::max();
  for (int c = 0; c < vocab.k; ++c) {
    double acc = 0.0;
    const double* ctr = vocab.centroid(c);
    for (int j = 0; j < vocab.dim; ++j) {
      const double d = desc.values[j] - ctr[j];
      acc += d * d;
    }
    if (acc < best_d) {
      best_d = acc;
      best = c;
    }
  }
  return best;
}

Histogram word_histogram(std::span<const IkmDescriptor> descs,
                         std::span<const std::uint8_t> in_foreground, const Vocabulary& vocab) {
  if (descs.size() != in_foreground.size())
    throw DimensionMismatch("word_histogram: flag count must match descriptor count");
  std::vector<double> bins(vocab.k, 0.0);
  double total = 0.0;
  for (size_t i = 0; i < descs.size(); ++i) {
    if (!in_foreground[i]) continue;
    ++bins[quantize(descs[i], vocab)];
    total += 1.0;
  }
  if (total > 0.0)
    for (double& b : bins) b /= total;
  return Histogram{std::move(bins), true};
}

}  // namespace smikm
