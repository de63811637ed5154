#include "smikm/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <zlib.h>

#include "smikm/error.hpp"

namespace smikm {

namespace {

constexpr char kMagic[4] = {'S', 'M', 'I', 'K'};
constexpr std::uint8_t kFormatVersion = 1;
constexpr double kChiEps = 1e-10;

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

void put_histogram(std::vector<std::uint8_t>& out, const Histogram& h) {
  put_u32(out, static_cast<std::uint32_t>(h.bins.size()));
  for (double b : h.bins) put_f64(out, b);
}

struct Reader {
  std::span<const std::uint8_t> bytes;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > bytes.size()) throw ChecksumError("index file truncated");
  }
  std::uint8_t u8() {
    need(1);
    return bytes[pos++];
  }
  std::uint32_t u32() {
    need(4);
    const std::uint32_t v = static_cast<std::uint32_t>(bytes[pos]) |
                            static_cast<std::uint32_t>(bytes[pos + 1]) << 8 |
                            static_cast<std::uint32_t>(bytes[pos + 2]) << 16 |
                            static_cast<std::uint32_t>(bytes[pos + 3]) << 24;
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    return lo | static_cast<std::uint64_t>(u32()) << 32;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
    pos += n;
    return s;
  }
  Histogram histogram() {
    const std::uint32_t n = u32();
    need(static_cast<size_t>(n) * 8);
    Histogram h;
    h.normalized = true;
    h.bins.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) h.bins[i] = f64();
    return h;
  }
};

}  // namespace

double chi_square(const Histogram& a, const Histogram& b) {
  if (a.bins.size() != b.bins.size())
    throw DimensionMismatch("chi_square: histogram bin counts differ");
  double acc = 0.0;
  for (size_t i = 0; i < a.bins.size(); ++i) {
    const double d = a.bins[i] - b.bins[i];
    acc += d * d / (a.bins[i] + b.bins[i] + kChiEps);
  }
  return acc;
}

std::vector<double> zscore_normalize(std::span<const double> column) {
  const size_t n = column.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  const double mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : column) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);
  if (sd <= 0.0) return out;
  for (size_t i = 0; i < n; ++i) out[i] = (column[i] - mean) / sd;
  return out;
}

std::vector<double> fuse(const std::array<std::vector<double>, 8>& columns,
                         const std::array<double, 8>& weights) {
  const size_t n = columns[0].size();
  for (const auto& c : columns)
    if (c.size() != n) throw DimensionMismatch("fuse: columns not aligned");
  std::vector<double> out(n, 0.0);
  for (int f = 0; f < 8; ++f)
    for (size_t i = 0; i < n; ++i) out[i] += weights[f] * columns[f][i];
  return out;
}

RankedResult query(const RetrievalIndex& index, const FeatureBundle& bundle,
                   const std::string& exclude_id, ExecMode mode) {
  const size_t n = index.entries.size();
  if (bundle.f_kraw.bins.size() != static_cast<size_t>(index.vocab.k))
    throw VocabMismatch("query: word histogram size does not match index vocabulary");

  RankedResult res;
  res.raw_distances.resize(n);
  parallel_for(static_cast<std::int64_t>(n), mode, [&](std::int64_t i) {
    const FeatureBundle& e = index.entries[static_cast<size_t>(i)].bundle;
    for (int f = 0; f < FeatureBundle::kSlots; ++f)
      res.raw_distances[static_cast<size_t>(i)][f] = chi_square(bundle.slot(f), e.slot(f));
  });

  std::array<std::vector<double>, 8> normalized;
  for (int f = 0; f < 8; ++f) {
    std::vector<double> col(n);
    for (size_t i = 0; i < n; ++i) col[i] = res.raw_distances[i][f];
    normalized[f] = zscore_normalize(col);
  }
  const std::vector<double> fused = fuse(normalized, index.config.weights);

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (fused[a] != fused[b]) return fused[a] < fused[b];
    return index.entries[a].image_id < index.entries[b].image_id;
  });

  res.ranked.reserve(n);
  for (size_t i : order) {
    if (!exclude_id.empty() && index.entries[i].image_id == exclude_id) continue;
    res.ranked.push_back({index.entries[i].image_id, fused[i]});
  }
  return res;
}

std::vector<std::uint8_t> serialize_index(const RetrievalIndex& index) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u8(out, kFormatVersion);
  const size_t payload_start = out.size();

  put_string(out, index.config.serialize());
  put_u32(out, static_cast<std::uint32_t>(index.vocab.k));
  put_u32(out, static_cast<std::uint32_t>(index.vocab.dim));
  put_u8(out, index.vocab.ikm_mode == IkmMode::MultiOrder ? 1 : 0);
  for (double c : index.vocab.centroids) put_f64(out, c);

  put_u32(out, static_cast<std::uint32_t>(index.entries.size()));
  for (const IndexEntry& e : index.entries) {
    put_string(out, e.image_id);
    put_string(out, e.class_label);
    for (int f = 0; f < FeatureBundle::kSlots; ++f) put_histogram(out, e.bundle.slot(f));
    for (double w : e.bundle.weights) put_f64(out, w);
  }

  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, out.data() + payload_start, static_cast<uInt>(out.size() - payload_start)));
  put_u32(out, crc);
  return out;
}

RetrievalIndex deserialize_index(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatVersionError("not an index file (bad magic)");
  if (bytes.size() < 5) throw ChecksumError("index file truncated");
  if (bytes[4] != kFormatVersion)
    throw FormatVersionError("unsupported index format version " + std::to_string(bytes[4]));
  if (bytes.size() < 9) throw ChecksumError("index file truncated");

  const size_t payload_end = bytes.size() - 4;
  Reader crc_reader{bytes, payload_end};
  const std::uint32_t stored_crc = crc_reader.u32();
  const auto actual_crc = static_cast<std::uint32_t>(
      crc32(0L, bytes.data() + 5, static_cast<uInt>(payload_end - 5)));
  if (stored_crc != actual_crc) throw ChecksumError("index file checksum mismatch");

  Reader r{bytes.first(payload_end), 5};
  RetrievalIndex index;
  index.config = PipelineConfig::parse(r.str());
  index.vocab.k = static_cast<int>(r.u32());
  index.vocab.dim = static_cast<int>(r.u32());
  index.vocab.ikm_mode = r.u8() ? IkmMode::MultiOrder : IkmMode::SingleOrder;
  index.vocab.centroids.resize(static_cast<size_t>(index.vocab.k) * index.vocab.dim);
  for (double& c : index.vocab.centroids) c = r.f64();

  const std::uint32_t n_entries = r.u32();
  index.entries.resize(n_entries);
  for (std::uint32_t i = 0; i < n_entries; ++i) {
    IndexEntry& e = index.entries[i];
    e.image_id = r.str();
    e.class_label = r.str();
    for (int f = 0; f < FeatureBundle::kSlots; ++f) e.bundle.slot(f) = r.histogram();
    for (double& w : e.bundle.weights) w = r.f64();
  }
  if (r.pos != payload_end) throw ChecksumError("index file has trailing garbage");
  return index;
}

void save_index(const RetrievalIndex& index, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize_index(index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

RetrievalIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_index(bytes);
}

}  // namespace smikm
