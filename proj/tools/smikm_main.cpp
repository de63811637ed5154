// smikm: index a directory of images, query an index, or evaluate mAP.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "smikm/error.hpp"
#include "smikm/harness.hpp"
#include "smikm/parallel.hpp"

namespace fs = std::filesystem;

namespace {

smikm::DatasetManifest load_manifest(const std::string& data_dir, const std::string& list_file) {
  if (!list_file.empty()) return smikm::load_list(data_dir, list_file);
  return smikm::load_wang(data_dir);
}

int run_index(const std::string& data_dir, const std::string& out_path,
              const std::string& config_path, const std::string& list_file, bool skip_grayscale,
              bool dump_saliency, bool serial) {
  smikm::PipelineConfig config;
  if (!config_path.empty()) config = smikm::PipelineConfig::load(config_path);
  if (skip_grayscale) config.skip_grayscale = true;

  const smikm::DatasetManifest manifest = load_manifest(data_dir, list_file);
  std::cerr << "indexing " << manifest.items.size() << " images from " << data_dir << "\n";

  smikm::PipelineStats stats;
  const auto mode = serial ? smikm::ExecMode::Serial : smikm::ExecMode::Parallel;
  const smikm::RetrievalIndex index =
      smikm::run_pipeline(manifest, config, mode, &stats, dump_saliency);

  for (const std::string& f : stats.failures) std::cerr << "skipped " << f << "\n";
  smikm::save_index(index, out_path);
  std::cerr << "wrote " << out_path << " (" << index.entries.size() << " entries, vocab "
            << index.vocab.k << "x" << index.vocab.dim << ")\n";
  std::cerr << "feature extraction " << stats.feature_extraction_s << " s, clustering "
            << stats.clustering_s << " s\n";
  return 0;
}

int run_query(const std::string& index_path, const std::string& image_path, int top, bool serial) {
  const smikm::RetrievalIndex index = smikm::load_index(index_path);
  const smikm::ImageBuf img = smikm::load_image(image_path);
  const auto mode = serial ? smikm::ExecMode::Serial : smikm::ExecMode::Parallel;
  const smikm::FeatureBundle bundle = smikm::bundle_for_image(img, index, mode);
  const smikm::RankedResult result = smikm::query(index, bundle, "", mode);

  const int n = std::min<int>(top, static_cast<int>(result.ranked.size()));
  for (int i = 0; i < n; ++i)
    std::cout << (i + 1) << "\t" << result.ranked[i].image_id << "\t"
              << result.ranked[i].fused << "\n";
  return 0;
}

int run_eval(const std::string& index_path, const std::string& queries_dir,
             const std::string& list_file, const std::string& report_path, bool serial) {
  const smikm::RetrievalIndex index = smikm::load_index(index_path);

  smikm::DatasetManifest queries;
  if (!queries_dir.empty()) {
    queries = load_manifest(queries_dir, list_file);
  } else {
    // Default protocol: every indexed image queries the rest.
    queries.root = "";
    for (const auto& e : index.entries) queries.items.push_back({e.image_id, e.class_label});
  }

  const auto mode = serial ? smikm::ExecMode::Serial : smikm::ExecMode::Parallel;
  const smikm::EvalReport report = smikm::evaluate_map(index, queries, mode);

  std::cout << "mAP " << report.overall_map << " over " << report.query_count << " queries\n";
  for (const auto& [label, v] : report.per_class_map) std::cout << "  " << label << "\t" << v << "\n";

  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw smikm::IoError("cannot write " + report_path);
    out << report.to_json() << "\n";
    std::cerr << "wrote " << report_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"saliency + invariant Krawtchouk moment image retrieval"};
  app.require_subcommand(1);

  int threads = 0;
  bool serial = false;
  app.add_option("--threads", threads, "worker thread count (0 = library default)");
  app.add_flag("--serial", serial, "force the serial reference path");

  auto* index_cmd = app.add_subcommand("index", "build an index from a directory of images");
  std::string data_dir, out_path, config_path, list_file;
  bool skip_grayscale = false, dump_saliency = false;
  index_cmd->add_option("--data", data_dir, "dataset directory")->required();
  index_cmd->add_option("--out", out_path, "output index file")->required();
  index_cmd->add_option("--config", config_path, "key=value config file");
  index_cmd->add_option("--train-list", list_file, "explicit file list (one path per line)");
  index_cmd->add_flag("--skip-grayscale", skip_grayscale, "drop grayscale images");
  index_cmd->add_flag("--dump-saliency", dump_saliency,
                      "write <image>.saliency.png next to each input");

  auto* query_cmd = app.add_subcommand("query", "rank index entries against a query image");
  std::string q_index, q_image;
  int top = 10;
  query_cmd->add_option("--index", q_index, "index file")->required();
  query_cmd->add_option("--image", q_image, "query image")->required();
  query_cmd->add_option("--top", top, "number of results to print");

  auto* eval_cmd = app.add_subcommand("eval", "mean average precision over a query set");
  std::string e_index, e_queries, e_list, e_report;
  eval_cmd->add_option("--index", e_index, "index file")->required();
  eval_cmd->add_option("--queries", e_queries, "query image directory (defaults to the index itself)");
  eval_cmd->add_option("--test-list", e_list, "explicit query list file");
  eval_cmd->add_option("--report", e_report, "write a JSON report here");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) smikm::set_thread_count(threads);

  try {
    if (app.got_subcommand(index_cmd))
      return run_index(data_dir, out_path, config_path, list_file, skip_grayscale, dump_saliency,
                       serial);
    if (app.got_subcommand(query_cmd)) return run_query(q_index, q_image, top, serial);
    if (app.got_subcommand(eval_cmd)) return run_eval(e_index, e_queries, e_list, e_report, serial);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
