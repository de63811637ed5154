#pragma once

#include <map>
#include <string>
#include <vector>

#include "smikm/config.hpp"
#include "smikm/retrieval.hpp"

namespace smikm {

struct DatasetManifest {
  struct Item {
    std::string path;   // relative to root; doubles as the image id
    std::string label;
  };
  std::string root;
  std::vector<Item> items;
};

struct PipelineStats {
  double feature_extraction_s = 0.0;
  double clustering_s = 0.0;
  double total_s = 0.0;
  int failed_images = 0;
  std::vector<std::string> failures;
};

struct EvalReport {
  std::map<std::string, double> per_class_map;
  std::map<std::string, int> per_class_queries;
  double overall_map = 0.0;
  int query_count = 0;
  std::string config_echo;
  double feature_extraction_s = 0.0;
  double clustering_s = 0.0;
  double evaluation_s = 0.0;

  std::string to_json() const;
};

// Wang layout: flat files named 0..999 (class = id/100) or one subdirectory
// per class (Caltech-style trees load the same way).
DatasetManifest load_wang(const std::string& root);

// Explicit file list (one relative path per line, optional tab-separated
// label). Missing files are a LayoutError.
DatasetManifest load_list(const std::string& root, const std::string& list_file);

const std::vector<std::string>& wang_class_names();

// Per-image features before vocabulary assignment: the seven histogram
// features plus the patch descriptors that feed BoVW.
struct ImageFeatures {
  FeatureBundle bundle;  // f_kraw left empty until a vocabulary exists
  std::vector<IkmDescriptor> descriptors;
  std::vector<std::uint8_t> in_foreground;
};

ImageFeatures extract_image_features(const ImageBuf& rgb, const PipelineConfig& config,
                                     ExecMode mode = ExecMode::Parallel);

// Decode -> saliency -> segmentation -> keypoints -> patches -> IKM, pooled
// k-means vocabulary, then per-image word histograms. Per-image failures are
// logged and skipped; more than 10% failures is a PipelineError.
RetrievalIndex run_pipeline(const DatasetManifest& manifest, const PipelineConfig& config,
                            ExecMode mode = ExecMode::Parallel, PipelineStats* stats = nullptr,
                            bool dump_saliency = false);

// Bundle for a query image against an existing index's vocabulary/config.
FeatureBundle bundle_for_image(const ImageBuf& img, const RetrievalIndex& index,
                               ExecMode mode = ExecMode::Parallel);

// Full-list average precision: relevance flags in rank order.
double average_precision(const std::vector<bool>& relevant_at_rank);

// Rank every query against the index (self excluded when the query is an
// index member), relevant = same class label, AP over the full list.
EvalReport evaluate_map(const RetrievalIndex& index, const DatasetManifest& queries,
                        ExecMode mode = ExecMode::Parallel);

}  // namespace smikm
