// File formats: CSV and raw little-endian binary feature files (with JSON
// sidecar), SPSD/time-series manifests, distance-matrix CSV, diagram JSON,
// bootstrap plan/block/record files and clustering outputs. All numeric
// output uses shortest round-trip formatting so reruns are byte-identical.

#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "toporep/bootstrap.hpp"
#include "toporep/cluster.hpp"
#include "toporep/diagram.hpp"
#include "toporep/types.hpp"

namespace toporep::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

inline double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw std::runtime_error(context + ": cannot parse number '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

inline std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return in;
}

// ---------------------------------------------------------------- features

inline void write_feature_csv(const FeatureMatrix& f, const fs::path& path) {
  auto out = open_out(path);
  out << "subject_id";
  for (std::size_t j = 0; j < f.cols; ++j) out << ",f" << j;
  out << "\n";
  for (std::size_t i = 0; i < f.rows; ++i) {
    out << f.subject_ids[i];
    for (std::size_t j = 0; j < f.cols; ++j) out << ',' << format_double(f.at(i, j));
    out << "\n";
  }
}

inline FeatureMatrix read_feature_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty feature file: " + path.string());
  const std::size_t cols = split_csv_line(line).size() - 1;
  FeatureMatrix f;
  f.cols = cols;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != cols + 1)
      throw std::runtime_error(path.string() + ": ragged row for subject '" + fields[0] + "'");
    f.subject_ids.push_back(fields[0]);
    for (std::size_t j = 0; j < cols; ++j)
      f.data.push_back(parse_double(fields[j + 1], path.string()));
    ++f.rows;
  }
  validate_feature_matrix(f, path.string());
  return f;
}

/// Raw little-endian float64, row-major, with a JSON sidecar at
/// `<path>.json` holding {"rows", "cols", "subject_ids"}.
inline void write_feature_binary(const FeatureMatrix& f, const fs::path& path) {
  static_assert(std::endian::native == std::endian::little,
                "binary feature files assume a little-endian host");
  auto out = open_out(path);
  out.write(reinterpret_cast<const char*>(f.data.data()),
            static_cast<std::streamsize>(f.data.size() * sizeof(double)));
  json sidecar{{"rows", f.rows}, {"cols", f.cols}, {"subject_ids", f.subject_ids}};
  auto side = open_out(path.string() + ".json");
  side << sidecar.dump(2) << "\n";
}

inline FeatureMatrix read_feature_binary(const fs::path& path) {
  auto side = open_in(path.string() + ".json");
  json sidecar = json::parse(side);
  FeatureMatrix f;
  f.rows = sidecar.at("rows").get<std::size_t>();
  f.cols = sidecar.at("cols").get<std::size_t>();
  f.subject_ids = sidecar.at("subject_ids").get<std::vector<std::string>>();
  f.data.resize(f.rows * f.cols);
  auto in = open_in(path);
  in.read(reinterpret_cast<char*>(f.data.data()),
          static_cast<std::streamsize>(f.data.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != f.data.size() * sizeof(double))
    throw std::runtime_error(path.string() + ": truncated binary feature file");
  validate_feature_matrix(f, path.string());
  return f;
}

inline FeatureMatrix read_feature_matrix(const fs::path& path) {
  return path.extension() == ".csv" ? read_feature_csv(path) : read_feature_binary(path);
}

inline void write_feature_matrix(const FeatureMatrix& f, const fs::path& path) {
  if (path.extension() == ".csv")
    write_feature_csv(f, path);
  else
    write_feature_binary(f, path);
}

// ------------------------------------------------- SPSD / time-series sets

// Plain numeric CSV matrix, no header.
inline void write_matrix_csv(const std::vector<double>& m, std::size_t rows,
                             std::size_t cols, const fs::path& path) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j)
      out << (j ? "," : "") << format_double(m[i * cols + j]);
    out << "\n";
  }
}

inline std::vector<double> read_matrix_csv(const fs::path& path, std::size_t& rows,
                                           std::size_t& cols) {
  auto in = open_in(path);
  std::vector<double> m;
  std::string line;
  rows = 0;
  cols = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (cols == 0)
      cols = fields.size();
    else if (fields.size() != cols)
      throw std::runtime_error(path.string() + ": ragged matrix row");
    for (const auto& s : fields) m.push_back(parse_double(s, path.string()));
    ++rows;
  }
  return m;
}

/// Manifest JSON {"m":, "subjects":[{"id","file"}]} with one matrix CSV per
/// subject; file paths are relative to the manifest.
inline void write_spsd_stack(const SpsdStack& s, const fs::path& manifest_path) {
  const fs::path dir = manifest_path.parent_path();
  json subjects = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    // index-based file names: subject ids may not be filesystem-safe
    const std::string file = manifest_path.stem().string() + "_" + std::to_string(i) + ".csv";
    write_matrix_csv(s.matrices[i], s.m, s.m, dir / file);
    subjects.push_back({{"id", s.subject_ids[i]}, {"file", file}});
  }
  json manifest{{"m", s.m}, {"subjects", subjects}};
  auto out = open_out(manifest_path);
  out << manifest.dump(2) << "\n";
}

inline SpsdStack read_spsd_stack(const fs::path& manifest_path) {
  auto in = open_in(manifest_path);
  json manifest = json::parse(in);
  SpsdStack s;
  s.m = manifest.at("m").get<std::size_t>();
  for (const auto& subj : manifest.at("subjects")) {
    s.subject_ids.push_back(subj.at("id").get<std::string>());
    std::size_t rows = 0, cols = 0;
    auto m = read_matrix_csv(manifest_path.parent_path() / subj.at("file").get<std::string>(),
                             rows, cols);
    if (rows != s.m || cols != s.m)
      throw std::runtime_error(manifest_path.string() + ": matrix for subject '" +
                               s.subject_ids.back() + "' is not " + std::to_string(s.m) +
                               "x" + std::to_string(s.m));
    s.matrices.push_back(std::move(m));
  }
  return s;
}

/// Manifest JSON {"components","timepoints","subjects":[{"id","file"}]}.
inline void write_time_series(const TimeSeriesSet& ts, const fs::path& manifest_path) {
  const fs::path dir = manifest_path.parent_path();
  json subjects = json::array();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const std::string file = manifest_path.stem().string() + "_" + std::to_string(i) + ".csv";
    write_matrix_csv(ts.series[i], ts.components, ts.timepoints, dir / file);
    subjects.push_back({{"id", ts.subject_ids[i]}, {"file", file}});
  }
  json manifest{{"components", ts.components}, {"timepoints", ts.timepoints},
                {"subjects", subjects}};
  auto out = open_out(manifest_path);
  out << manifest.dump(2) << "\n";
}

inline TimeSeriesSet read_time_series(const fs::path& manifest_path) {
  auto in = open_in(manifest_path);
  json manifest = json::parse(in);
  TimeSeriesSet ts;
  ts.components = manifest.at("components").get<std::size_t>();
  ts.timepoints = manifest.at("timepoints").get<std::size_t>();
  for (const auto& subj : manifest.at("subjects")) {
    ts.subject_ids.push_back(subj.at("id").get<std::string>());
    std::size_t rows = 0, cols = 0;
    auto m = read_matrix_csv(manifest_path.parent_path() / subj.at("file").get<std::string>(),
                             rows, cols);
    if (rows != ts.components || cols != ts.timepoints)
      throw std::runtime_error(manifest_path.string() + ": series for subject '" +
                               ts.subject_ids.back() + "' has wrong shape");
    ts.series.push_back(std::move(m));
  }
  return ts;
}

// --------------------------------------------------------------- distances

inline void write_distance_csv(const DistanceMatrix& d, const fs::path& path) {
  auto out = open_out(path);
  out << "subject_id";
  for (const auto& id : d.subject_ids) out << ',' << id;
  out << "\n";
  for (std::size_t i = 0; i < d.n; ++i) {
    out << d.subject_ids[i];
    for (std::size_t j = 0; j < d.n; ++j) out << ',' << format_double(d.at(i, j));
    out << "\n";
  }
}

inline DistanceMatrix read_distance_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty distance file: " + path.string());
  auto header = split_csv_line(line);
  DistanceMatrix d;
  d.n = header.size() - 1;
  d.subject_ids.assign(header.begin() + 1, header.end());
  d.d.reserve(d.n * d.n);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != d.n + 1 || row >= d.n || fields[0] != d.subject_ids[row])
      throw std::runtime_error(path.string() + ": malformed distance row " +
                               std::to_string(row));
    for (std::size_t j = 0; j < d.n; ++j)
      d.d.push_back(parse_double(fields[j + 1], path.string()));
    ++row;
  }
  if (row != d.n) throw std::runtime_error(path.string() + ": missing distance rows");
  validate_distance_matrix(d, path.string());
  return d;
}

// ---------------------------------------------------------------- diagrams

inline json interval_to_json(const PersistenceInterval& iv) {
  json j{{"dim", iv.dim}, {"birth", iv.birth}};
  if (iv.essential())
    j["death"] = nullptr;
  else
    j["death"] = iv.death;
  if (iv.prevalence)
    j["prevalence"] = *iv.prevalence;
  else
    j["prevalence"] = nullptr;
  return j;
}

/// {"source", "field", "intervals":[{dim,birth,death,prevalence}], "params"}
inline void write_diagram_json(const PersistenceDiagram& d, const fs::path& path,
                               const std::optional<json>& params = std::nullopt) {
  json intervals = json::array();
  for (const auto& iv : d.intervals) intervals.push_back(interval_to_json(iv));
  json j{{"source", d.source_label}, {"field", "Z2"}, {"intervals", intervals}};
  if (params) j["params"] = *params;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

inline PersistenceDiagram read_diagram_json(const fs::path& path) {
  auto in = open_in(path);
  json j = json::parse(in);
  PersistenceDiagram d;
  d.source_label = j.at("source").get<std::string>();
  if (j.at("field").get<std::string>() != "Z2")
    throw std::runtime_error(path.string() + ": unsupported coefficient field");
  for (const auto& e : j.at("intervals")) {
    PersistenceInterval iv;
    iv.dim = e.at("dim").get<int>();
    iv.birth = e.at("birth").get<double>();
    iv.death = e.at("death").is_null() ? kInfDeath : e.at("death").get<double>();
    if (e.contains("prevalence") && !e.at("prevalence").is_null())
      iv.prevalence = e.at("prevalence").get<double>();
    d.intervals.push_back(iv);
  }
  return d;
}

inline std::string base64_encode(const std::vector<bool>& bits) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  std::string out;
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    std::uint32_t chunk = bytes[i] << 16;
    if (i + 1 < bytes.size()) chunk |= bytes[i + 1] << 8;
    if (i + 2 < bytes.size()) chunk |= bytes[i + 2];
    out.push_back(alphabet[(chunk >> 18) & 63]);
    out.push_back(alphabet[(chunk >> 12) & 63]);
    out.push_back(i + 1 < bytes.size() ? alphabet[(chunk >> 6) & 63] : '=');
    out.push_back(i + 2 < bytes.size() ? alphabet[chunk & 63] : '=');
  }
  return out;
}

inline std::vector<bool> base64_decode(const std::string& s, std::size_t nbits) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> bytes;
  std::uint32_t chunk = 0;
  int have = 0;
  for (char c : s) {
    if (c == '=') break;
    const int v = value_of(c);
    if (v < 0) throw std::runtime_error("invalid base64 mask");
    chunk = (chunk << 6) | static_cast<std::uint32_t>(v);
    have += 6;
    if (have >= 8) {
      have -= 8;
      bytes.push_back(static_cast<std::uint8_t>((chunk >> have) & 0xFF));
    }
  }
  std::vector<bool> bits(nbits, false);
  for (std::size_t i = 0; i < nbits; ++i)
    if (i / 8 < bytes.size() && (bytes[i / 8] >> (i % 8)) & 1) bits[i] = true;
  return bits;
}

/// Mirrors the diagram JSON with birth_sub/death_amb keys, the mask as a
/// base64 bitset and the sentinel in the metadata.
inline void write_image_diagram_json(const ImageDiagram& d, const fs::path& path,
                                     const std::optional<json>& params = std::nullopt) {
  json intervals = json::array();
  for (const auto& iv : d.intervals)
    intervals.push_back(json{{"dim", iv.dim},
                             {"birth_sub", iv.birth_sub},
                             {"death_amb", iv.death_amb},
                             {"death_simplex", iv.death_simplex}});
  json j{{"source", d.source_label},
         {"field", "Z2"},
         {"mask", base64_encode(d.mask.included)},
         {"mask_count", d.mask.count},
         {"n", d.mask.included.size()},
         {"sentinel", d.sentinel},
         {"intervals", intervals}};
  if (params) j["params"] = *params;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

inline ImageDiagram read_image_diagram_json(const fs::path& path) {
  auto in = open_in(path);
  json j = json::parse(in);
  ImageDiagram d;
  d.source_label = j.at("source").get<std::string>();
  const auto n = j.at("n").get<std::size_t>();
  d.mask.included = base64_decode(j.at("mask").get<std::string>(), n);
  d.mask.count = j.at("mask_count").get<std::size_t>();
  d.sentinel = j.at("sentinel").get<double>();
  for (const auto& e : j.at("intervals")) {
    ImageInterval iv;
    iv.dim = e.at("dim").get<int>();
    iv.birth_sub = e.at("birth_sub").get<double>();
    iv.death_amb = e.at("death_amb").get<double>();
    iv.death_simplex = e.at("death_simplex").get<simplex_id>();
    d.intervals.push_back(iv);
  }
  return d;
}

// ---------------------------------------------------- bootstrap artifacts

inline void write_blocks_csv(const std::vector<std::string>& subject_ids,
                             const BlockStructure& blocks, const fs::path& path) {
  auto out = open_out(path);
  out << "subject_id,block_id\n";
  for (std::size_t i = 0; i < subject_ids.size(); ++i)
    out << subject_ids[i] << ',' << blocks.block_ids[i] << "\n";
}

/// Returns block ids aligned with `subject_ids`; every subject must appear.
inline BlockStructure read_blocks_csv(const fs::path& path,
                                      const std::vector<std::string>& subject_ids) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty block file: " + path.string());
  std::map<std::string, std::string> block_of;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2)
      throw std::runtime_error(path.string() + ": block rows must be subject_id,block_id");
    block_of[fields[0]] = fields[1];
  }
  BlockStructure b;
  for (const auto& id : subject_ids) {
    auto it = block_of.find(id);
    if (it == block_of.end())
      throw std::runtime_error(path.string() + ": no block id for subject '" + id + "'");
    b.block_ids.push_back(it->second);
  }
  return b;
}

inline void write_plan_json(const BootstrapPlan& plan, const std::string& block_file,
                            const fs::path& path) {
  json j{{"R", plan.R},
         {"fraction", plan.fraction},
         {"master_seed", plan.master_seed},
         {"block_file", block_file},
         {"target_size", plan.target_size},
         {"largest_block", plan.largest_block}};
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

/// replicate_index,ambient_interval_id,image_interval_id,affinity
/// (empty image id = unmatched).
inline void write_match_records_csv(const std::vector<std::vector<MatchRecord>>& records,
                                    const fs::path& path) {
  auto out = open_out(path);
  out << "replicate_index,ambient_interval_id,image_interval_id,affinity\n";
  for (const auto& rep : records)
    for (const auto& rec : rep) {
      out << rec.replicate << ',' << rec.ambient_interval << ',';
      if (rec.image_interval) out << *rec.image_interval;
      out << ',' << format_double(rec.affinity) << "\n";
    }
}

inline std::vector<std::vector<MatchRecord>> read_match_records_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty records file: " + path.string());
  std::vector<std::vector<MatchRecord>> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4)
      throw std::runtime_error(path.string() + ": malformed record row");
    MatchRecord rec;
    rec.replicate = static_cast<std::size_t>(std::stoull(fields[0]));
    rec.ambient_interval = static_cast<std::size_t>(std::stoull(fields[1]));
    if (!fields[2].empty())
      rec.image_interval = static_cast<std::size_t>(std::stoull(fields[2]));
    rec.affinity = parse_double(fields[3], path.string());
    if (records.size() <= rec.replicate) records.resize(rec.replicate + 1);
    records[rec.replicate].push_back(rec);
  }
  return records;
}

inline void write_betti_csv(const std::vector<std::size_t>& betti, const fs::path& path) {
  auto out = open_out(path);
  out << "replicate_index,beta_matched\n";
  for (std::size_t i = 0; i < betti.size(); ++i) out << i << ',' << betti[i] << "\n";
}

// -------------------------------------------------------------- clustering

inline void write_linkage_csv(const Dendrogram& dg, const fs::path& path) {
  auto out = open_out(path);
  out << "cluster_a,cluster_b,height,new_size\n";
  for (const auto& m : dg.merges)
    out << m.a << ',' << m.b << ',' << format_double(m.height) << ',' << m.size << "\n";
}

inline void write_newick(const Dendrogram& dg, const fs::path& path) {
  auto out = open_out(path);
  out << to_newick(dg) << "\n";
}

/// Row order from the dendrogram leaves plus the reordered distance matrix.
inline void write_clustermap_json(const Dendrogram& dg, const DistanceMatrix& d,
                                  const fs::path& path) {
  const auto order = leaf_order(dg);
  json labels = json::array();
  json rows = json::array();
  for (std::size_t i : order) {
    labels.push_back(d.subject_ids[i]);
    json row = json::array();
    for (std::size_t j : order) row.push_back(d.at(i, j));
    rows.push_back(row);
  }
  json j{{"leaves", labels},
         {"order", order},
         {"matrix", rows},
         {"monotone_linkage", dg.monotone}};
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

}  // namespace toporep::io
