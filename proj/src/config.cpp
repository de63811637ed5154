#include "smikm/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "smikm/error.hpp"

namespace smikm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError("bad numeric value: " + s);
  return v;
}

long long parse_int(const std::string& s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError("bad integer value: " + s);
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace

PipelineConfig PipelineConfig::parse(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "patch_side") cfg.patch_side = static_cast<int>(parse_int(val));
    else if (key == "vocab_k") cfg.vocab_k = static_cast<int>(parse_int(val));
    else if (key == "ikm_mode") {
      if (val == "single") cfg.ikm_mode = IkmMode::SingleOrder;
      else if (val == "multi") cfg.ikm_mode = IkmMode::MultiOrder;
      else throw ConfigError("ikm_mode must be single or multi");
    } else if (key == "hs_bins") cfg.hs_bins = static_cast<int>(parse_int(val));
    else if (key == "lbp_bins") cfg.lbp_bins = static_cast<int>(parse_int(val));
    else if (key == "weights") {
      std::vector<double> w;
      std::string item;
      std::istringstream ws(val);
      while (std::getline(ws, item, ',')) w.push_back(parse_double(trim(item)));
      if (w.size() != 8) throw ConfigError("weights needs exactly 8 comma-separated values");
      std::copy(w.begin(), w.end(), cfg.weights.begin());
    } else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(val));
    else if (key == "max_keypoints") cfg.max_keypoints = static_cast<int>(parse_int(val));
    else if (key == "dog_threshold") cfg.dog_threshold = parse_double(val);
    else if (key == "grid_spacing") cfg.grid_spacing = static_cast<int>(parse_int(val));
    else if (key == "skip_grayscale") {
      if (val == "true" || val == "1") cfg.skip_grayscale = true;
      else if (val == "false" || val == "0") cfg.skip_grayscale = false;
      else throw ConfigError("skip_grayscale must be true or false");
    } else throw ConfigError("unknown config key: " + key);
  }
  if (cfg.patch_side < 1 || cfg.vocab_k < 1 || cfg.hs_bins < 1 || cfg.lbp_bins < 1 ||
      cfg.max_keypoints < 1 || cfg.grid_spacing < 1)
    throw ConfigError("config values must be positive");
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string PipelineConfig::serialize() const {
  std::ostringstream out;
  out << "patch_side=" << patch_side << "\n";
  out << "vocab_k=" << vocab_k << "\n";
  out << "ikm_mode=" << (ikm_mode == IkmMode::SingleOrder ? "single" : "multi") << "\n";
  out << "hs_bins=" << hs_bins << "\n";
  out << "lbp_bins=" << lbp_bins << "\n";
  out << "weights=";
  for (size_t i = 0; i < weights.size(); ++i) out << (i ? "," : "") << format_double(weights[i]);
  out << "\n";
  out << "seed=" << seed << "\n";
  out << "max_keypoints=" << max_keypoints << "\n";
  out << "dog_threshold=" << format_double(dog_threshold) << "\n";
  out << "grid_spacing=" << grid_spacing << "\n";
  out << "skip_grayscale=" << (skip_grayscale ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace smikm
