#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smikm/features.hpp"
#include "smikm/moments.hpp"
#include "smikm/parallel.hpp"

namespace smikm {

enum class IkmMode { SingleOrder, MultiOrder };

inline int ikm_dim(IkmMode mode) { return mode == IkmMode::SingleOrder ? 6 : 30; }

struct Vocabulary {
  int k = 0;
  int dim = 0;
  IkmMode ikm_mode = IkmMode::SingleOrder;
  std::vector<double> centroids;  // k rows of dim

  const double* centroid(int i) const { return centroids.data() + static_cast<size_t>(i) * dim; }
  bool operator==(const Vocabulary&) const = default;
};

namespace detail {

// Lloyd's algorithm with k-means++ seeding. Deterministic for a given seed:
// the assignment step may run in parallel (it is elementwise) but centroid
// updates are a serial reduction in point order. Empty clusters are reseeded
// to the point farthest from its assigned centroid. objective_trace, when
// given, receives the within-cluster sum of squares after each assignment;
// reseed_count the number of reseed events.
std::vector<double> lloyd_kmeans(std::span<const double> data, int n, int dim, int k,
                                 std::uint64_t seed, int max_iters, double tol, ExecMode mode,
                                 std::vector<double>* objective_trace = nullptr,
                                 int* reseed_count = nullptr,
                                 std::vector<int>* labels_out = nullptr);

}  // namespace detail

// K-means over IKM descriptors. Throws NotEnoughData when there are fewer
// descriptors than words, DimensionMismatch on ragged input.
Vocabulary train_vocabulary(std::span<const IkmDescriptor> descriptors, int k, std::uint64_t seed,
                            int max_iters = 300, double tol = 1e-6,
                            ExecMode mode = ExecMode::Parallel);

// Index of the nearest centroid (Euclidean); ties go to the lowest index.
int quantize(const IkmDescriptor& desc, const Vocabulary& vocab);

// Word-occurrence histogram over foreground descriptors only, L1-normalized.
Histogram word_histogram(std::span<const IkmDescriptor> descs,
                         std::span<const std::uint8_t> in_foreground, const Vocabulary& vocab);

}  // namespace smikm
