#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "smikm/bovw.hpp"
#include "smikm/config.hpp"
#include "smikm/features.hpp"
#include "smikm/parallel.hpp"

namespace smikm {

struct IndexEntry {
  std::string image_id;     // path relative to the dataset root
  std::string class_label;
  FeatureBundle bundle;

  bool operator==(const IndexEntry&) const = default;
};

struct RetrievalIndex {
  std::vector<IndexEntry> entries;
  Vocabulary vocab;
  PipelineConfig config;

  bool operator==(const RetrievalIndex&) const = default;
};

struct RankedResult {
  struct Hit {
    std::string image_id;
    double fused = 0.0;
  };
  std::vector<Hit> ranked;  // ascending fused distance
  // Raw chi-square distances per index entry (entry order), one column per
  // feature slot.
  std::vector<std::array<double, 8>> raw_distances;
};

// D = sum (a-b)^2 / (a + b + eps); symmetric, zero iff equal.
double chi_square(const Histogram& a, const Histogram& b);

// (x - mean) / population stddev per Eq.-style standardization; a constant
// column maps to all zeros.
std::vector<double> zscore_normalize(std::span<const double> column);

std::vector<double> fuse(const std::array<std::vector<double>, 8>& columns,
                         const std::array<double, 8>& weights);

// Full query: chi-square per feature against every entry, z-score per
// feature over the database, weighted fusion, ascending sort with
// image_id tie-break. exclude_id (when non-empty) drops that entry from the
// ranking, for self-exclusion in evaluation.
RankedResult query(const RetrievalIndex& index, const FeatureBundle& bundle,
                   const std::string& exclude_id = {}, ExecMode mode = ExecMode::Parallel);

// Versioned binary container, CRC32-checked; round-trips bit-exactly.
void save_index(const RetrievalIndex& index, const std::string& path);
RetrievalIndex load_index(const std::string& path);

std::vector<std::uint8_t> serialize_index(const RetrievalIndex& index);
RetrievalIndex deserialize_index(std::span<const std::uint8_t> bytes);

}  // namespace smikm
