#include "smikm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "smikm/error.hpp"
#include "smikm/keypoints.hpp"
#include "smikm/moments.hpp"
#include "smikm/saliency.hpp"

namespace fs = std::filesystem;

namespace smikm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::span<const std::pair<double, double>> order_pairs_for(IkmMode mode) {
  if (mode == IkmMode::SingleOrder)
    return {kSingleOrderPairs.data(), kSingleOrderPairs.size()};
  return {kMultiOrderPairs.data(), kMultiOrderPairs.size()};
}

}  // namespace

const std::vector<std::string>& wang_class_names() {
  static const std::vector<std::string> names = {"African", "beach",  "building", "bus",
                                                 "dinosaur", "elephant", "flower",   "horse",
                                                 "mountain", "food"};
  return names;
}

DatasetManifest load_wang(const std::string& root) {
  if (!fs::is_directory(root)) throw LayoutError("dataset root is not a directory: " + root);

  DatasetManifest m;
  m.root = root;

  std::vector<fs::path> subdirs;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) subdirs.push_back(entry.path());
    else if (entry.is_regular_file() && has_image_extension(entry.path()))
      files.push_back(entry.path());
  }

  // Class-subdirectory layout wins when present.
  bool tree = false;
  for (const auto& d : subdirs)
    for (const auto& entry : fs::directory_iterator(d))
      if (entry.is_regular_file() && has_image_extension(entry.path())) {
        tree = true;
        break;
      }

  if (tree) {
    for (const auto& d : subdirs) {
      const std::string label = d.filename().string();
      for (const auto& entry : fs::directory_iterator(d)) {
        if (!entry.is_regular_file() || !has_image_extension(entry.path())) continue;
        m.items.push_back({label + "/" + entry.path().filename().string(), label});
      }
    }
  } else {
    for (const auto& f : files) {
      const std::string stem = f.stem().string();
      size_t used = 0;
      int id = -1;
      try {
        id = std::stoi(stem, &used);
      } catch (const std::exception&) {
        throw LayoutError("flat Wang layout expects numeric file names, got " + stem);
      }
      if (used != stem.size() || id < 0 || id > 999)
        throw LayoutError("flat Wang layout expects ids 0..999, got " + stem);
      m.items.push_back({f.filename().string(), wang_class_names()[id / 100]});
    }
  }

  if (m.items.empty()) throw LayoutError("no images found under " + root);
  std::sort(m.items.begin(), m.items.end(),
            [](const auto& a, const auto& b) { return a.path < b.path; });
  return m;
}

DatasetManifest load_list(const std::string& root, const std::string& list_file) {
  std::ifstream in(list_file);
  if (!in) throw IoError("cannot open list file " + list_file);

  DatasetManifest m;
  m.root = root;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::string path = line, label;
    const auto tab = line.find('\t');
    if (tab != std::string::npos) {
      path = line.substr(0, tab);
      label = line.substr(tab + 1);
    }
    if (!fs::is_regular_file(fs::path(root) / path))
      throw LayoutError("listed file missing: " + path);
    if (label.empty()) {
      const fs::path p(path);
      if (p.has_parent_path()) {
        label = p.parent_path().filename().string();
      } else {
        try {
          const int id = std::stoi(p.stem().string());
          label = wang_class_names().at(static_cast<size_t>(id) / 100);
        } catch (const std::exception&) {
          throw LayoutError("cannot derive a label for " + path);
        }
      }
    }
    m.items.push_back({path, label});
  }
  if (m.items.empty()) throw LayoutError("list file is empty: " + list_file);
  return m;
}

ImageFeatures extract_image_features(const ImageBuf& rgb, const PipelineConfig& config,
                                     ExecMode mode) {
  ImageFeatures out;

  const SaliencyMap sal = compute_saliency_hc(rgb, mode);
  const RegionMasks masks = segment(sal);
  const ImageBuf gray = to_grayscale(rgb);

  DogParams dog;
  dog.threshold = static_cast<float>(config.dog_threshold);
  dog.max_keypoints = config.max_keypoints;
  std::vector<Keypoint> kps;
  try {
    kps = detect_keypoints(gray, dog, mode);
  } catch (const EmptyResult&) {
    kps = grid_keypoints(gray, config.grid_spacing);
  } catch (const ParameterError&) {
    kps = grid_keypoints(gray, config.grid_spacing);
  }

  const PatchSet patches = extract_patches(gray, kps, masks, config.patch_side);
  const auto pairs = order_pairs_for(config.ikm_mode);
  out.descriptors.reserve(patches.items.size());
  out.in_foreground.reserve(patches.items.size());
  for (const auto& item : patches.items) {
    try {
      out.descriptors.push_back(ikm_descriptor(item.patch, pairs, config.patch_side - 1));
      out.in_foreground.push_back(item.in_foreground ? 1 : 0);
    } catch (const DegenerateImage&) {
      // all-black patch: nothing to describe
    }
  }

  out.bundle = build_bundle(rgb, masks, sal, Histogram{}, config.weights, config.hs_bins,
                            config.lbp_bins);
  return out;
}

RetrievalIndex run_pipeline(const DatasetManifest& manifest, const PipelineConfig& config,
                            ExecMode mode, PipelineStats* stats, bool dump_saliency) {
  const auto t_start = std::chrono::steady_clock::now();

  struct PerImage {
    bool ok = false;
    bool skipped_gray = false;
    std::string error;
    ImageFeatures features;
  };
  const auto n = static_cast<std::int64_t>(manifest.items.size());
  std::vector<PerImage> work(manifest.items.size());

  // Per-image feature extraction parallelizes across images; the inner
  // kernels run serial to avoid nesting.
  parallel_for(n, mode, [&](std::int64_t i) {
    PerImage& w = work[static_cast<size_t>(i)];
    const auto& item = manifest.items[static_cast<size_t>(i)];
    try {
      ImageBuf img = load_image((fs::path(manifest.root) / item.path).string());
      if (img.channels == 1) {
        if (config.skip_grayscale) {
          w.skipped_gray = true;
          return;
        }
        img = replicate_to_rgb(img);
      }
      if (dump_saliency) {
        const SaliencyMap sal = compute_saliency_hc(img, ExecMode::Serial);
        save_png(saliency_to_image(sal),
                 (fs::path(manifest.root) / (item.path + ".saliency.png")).string());
      }
      w.features = extract_image_features(img, config, ExecMode::Serial);
      w.ok = true;
    } catch (const std::exception& e) {
      w.error = item.path + ": " + e.what();
    }
  });

  PipelineStats local;
  PipelineStats& st = stats ? *stats : local;
  st.feature_extraction_s = seconds_since(t_start);

  size_t considered = 0;
  for (size_t i = 0; i < work.size(); ++i) {
    if (work[i].skipped_gray) continue;
    ++considered;
    if (!work[i].ok) {
      ++st.failed_images;
      st.failures.push_back(work[i].error);
    }
  }
  if (considered == 0) throw PipelineError("no images left to index");
  if (st.failed_images * 10 > static_cast<int>(considered))
    throw PipelineError("more than 10% of images failed feature extraction");

  std::vector<IkmDescriptor> pool;
  for (const PerImage& w : work)
    if (w.ok)
      pool.insert(pool.end(), w.features.descriptors.begin(), w.features.descriptors.end());

  const auto t_cluster = std::chrono::steady_clock::now();
  RetrievalIndex index;
  index.config = config;
  index.vocab = train_vocabulary(pool, config.vocab_k, config.seed, 300, 1e-6, mode);
  st.clustering_s = seconds_since(t_cluster);

  for (size_t i = 0; i < work.size(); ++i) {
    if (!work[i].ok) continue;
    const auto& item = manifest.items[i];
    IndexEntry entry;
    entry.image_id = item.path;
    entry.class_label = item.label;
    entry.bundle = work[i].features.bundle;
    entry.bundle.f_kraw =
        word_histogram(work[i].features.descriptors, work[i].features.in_foreground, index.vocab);
    index.entries.push_back(std::move(entry));
  }

  st.total_s = seconds_since(t_start);
  return index;
}

FeatureBundle bundle_for_image(const ImageBuf& img, const RetrievalIndex& index, ExecMode mode) {
  const ImageBuf rgb = img.channels == 1 ? replicate_to_rgb(img) : img;
  ImageFeatures f = extract_image_features(rgb, index.config, mode);
  f.bundle.f_kraw = word_histogram(f.descriptors, f.in_foreground, index.vocab);
  return f.bundle;
}

double average_precision(const std::vector<bool>& relevant_at_rank) {
  size_t hits = 0;
  double acc = 0.0;
  for (size_t r = 0; r < relevant_at_rank.size(); ++r) {
    if (!relevant_at_rank[r]) continue;
    ++hits;
    acc += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return hits == 0 ? 0.0 : acc / static_cast<double>(hits);
}

EvalReport evaluate_map(const RetrievalIndex& index, const DatasetManifest& queries,
                        ExecMode mode) {
  const auto t0 = std::chrono::steady_clock::now();

  std::unordered_map<std::string, const IndexEntry*> by_id;
  for (const IndexEntry& e : index.entries) by_id[e.image_id] = &e;

  struct QueryResult {
    bool ok = false;
    std::string label;
    double ap = 0.0;
  };
  std::vector<QueryResult> results(queries.items.size());

  parallel_for(static_cast<std::int64_t>(queries.items.size()), mode, [&](std::int64_t qi) {
    const auto& item = queries.items[static_cast<size_t>(qi)];
    QueryResult& qr = results[static_cast<size_t>(qi)];
    try {
      const auto it = by_id.find(item.path);
      FeatureBundle bundle;
      std::string exclude;
      if (it != by_id.end()) {
        bundle = it->second->bundle;
        exclude = item.path;
      } else {
        const ImageBuf img = load_image((fs::path(queries.root) / item.path).string());
        bundle = bundle_for_image(img, index, ExecMode::Serial);
      }
      const RankedResult ranked = query(index, bundle, exclude, ExecMode::Serial);

      std::vector<bool> rel;
      rel.reserve(ranked.ranked.size());
      size_t total_rel = 0;
      for (const auto& hit : ranked.ranked) {
        const bool is_rel = by_id.at(hit.image_id)->class_label == item.label;
        rel.push_back(is_rel);
        total_rel += is_rel ? 1 : 0;
      }
      if (total_rel == 0) return;  // nothing relevant: query does not count
      qr.ap = average_precision(rel);
      qr.label = item.label;
      qr.ok = true;
    } catch (const std::exception&) {
      // failed queries are dropped from the report
    }
  });

  EvalReport report;
  std::map<std::string, double> ap_sum;
  for (const QueryResult& qr : results) {
    if (!qr.ok) continue;
    ap_sum[qr.label] += qr.ap;
    ++report.per_class_queries[qr.label];
    report.overall_map += qr.ap;
    ++report.query_count;
  }
  if (report.query_count > 0) report.overall_map /= report.query_count;
  for (const auto& [label, total] : ap_sum)
    report.per_class_map[label] = total / report.per_class_queries[label];

  report.config_echo = index.config.serialize();
  report.evaluation_s = seconds_since(t0);
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["overall_map"] = overall_map;
  j["query_count"] = query_count;
  j["per_class_map"] = per_class_map;
  j["per_class_queries"] = per_class_queries;
  j["config"] = config_echo;
  j["timings"] = {{"feature_extraction_s", feature_extraction_s},
                  {"clustering_s", clustering_s},
                  {"evaluation_s", evaluation_s}};
  return j.dump(2);
}

}  // namespace smikm
