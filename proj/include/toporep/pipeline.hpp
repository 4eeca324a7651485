// Config-driven study orchestration: a grid of (feature file x dissimilarity)
// cells, each bootstrapped and scored, followed by all-pairs
// prevalence-weighted Wasserstein distances and Ward clustering.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "toporep/bootstrap.hpp"
#include "toporep/cluster.hpp"
#include "toporep/diagram_distance.hpp"
#include "toporep/features.hpp"
#include "toporep/io.hpp"
#include "toporep/metrics.hpp"
#include "toporep/threadpool.hpp"
#include "toporep/version.hpp"

namespace toporep {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Configuration problems abort the whole run (exit code 2), unlike cell
/// failures (exit code 3, other cells continue).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Metric { v1, v2, pd1, pd2 };

inline Metric metric_from_string(const std::string& s) {
  if (s == "v1") return Metric::v1;
  if (s == "v2") return Metric::v2;
  if (s == "pd1") return Metric::pd1;
  if (s == "pd2") return Metric::pd2;
  throw ConfigError("unknown metric '" + s + "' (expected v1, v2, pd1 or pd2)");
}

inline std::string to_string(Metric m) {
  switch (m) {
    case Metric::v1: return "v1";
    case Metric::v2: return "v2";
    case Metric::pd1: return "pd1";
    case Metric::pd2: return "pd2";
  }
  return "?";
}

struct StudyCell {
  std::string label;
  std::string feature_file;
  FeatureKind feature_kind = FeatureKind::map;
  Metric metric = Metric::v2;
  double ridge = -1.0;        // pd1: spd ridge (default 0 when negative)
  double clamp_eps = 1e-7;    // pd2: atanh clamp
};

struct StudyConfig {
  std::vector<StudyCell> cells;
  std::size_t R = 1000;
  double fraction = 0.9;
  std::uint64_t master_seed = 0;
  std::string block_file;  // empty = singleton blocks
  int k = 1;
  int max_dim = 1;
  std::optional<double> threshold;
  double p = 2.0;
  std::string output_dir;
  bool keep_image_diagrams = false;
};

inline StudyConfig parse_study_config(const json& j) {
  StudyConfig cfg;
  try {
    for (const auto& c : j.at("cells")) {
      StudyCell cell;
      cell.label = c.at("label").get<std::string>();
      cell.feature_file = c.at("feature_file").get<std::string>();
      cell.feature_kind = feature_kind_from_string(c.at("feature_kind").get<std::string>());
      cell.metric = metric_from_string(c.at("metric").get<std::string>());
      if (c.contains("ridge")) cell.ridge = c.at("ridge").get<double>();
      if (c.contains("clamp_eps")) cell.clamp_eps = c.at("clamp_eps").get<double>();
      cfg.cells.push_back(std::move(cell));
    }
    if (j.contains("bootstrap")) {
      const auto& b = j.at("bootstrap");
      if (b.contains("R")) cfg.R = b.at("R").get<std::size_t>();
      if (b.contains("fraction")) cfg.fraction = b.at("fraction").get<double>();
      if (b.contains("master_seed")) cfg.master_seed = b.at("master_seed").get<std::uint64_t>();
      if (b.contains("block_file")) cfg.block_file = b.at("block_file").get<std::string>();
    }
    if (j.contains("homology")) {
      const auto& h = j.at("homology");
      if (h.contains("k")) cfg.k = h.at("k").get<int>();
      if (h.contains("max_dim")) cfg.max_dim = h.at("max_dim").get<int>();
      if (h.contains("threshold") && !h.at("threshold").is_null())
        cfg.threshold = h.at("threshold").get<double>();
    }
    if (j.contains("wasserstein") && j.at("wasserstein").contains("p"))
      cfg.p = j.at("wasserstein").at("p").get<double>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("keep_image_diagrams"))
      cfg.keep_image_diagrams = j.at("keep_image_diagrams").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  if (cfg.cells.empty()) throw ConfigError("config has no cells");
  std::set<std::string> labels;
  for (const auto& c : cfg.cells) {
    if (c.label.empty() || c.label.find_first_of(",\n\r/\\") != std::string::npos)
      throw ConfigError("cell label '" + c.label +
                        "' must be nonempty and free of commas, slashes and newlines");
    if (!labels.insert(c.label).second)
      throw ConfigError("duplicate cell label '" + c.label + "'");
    const bool vector_metric = c.metric == Metric::v1 || c.metric == Metric::v2;
    if (vector_metric != is_vector_kind(c.feature_kind))
      throw ConfigError("cell '" + c.label + "': metric " + to_string(c.metric) +
                        " is incompatible with feature kind " + to_string(c.feature_kind) +
                        " (v1/v2 need vectors, pd1/pd2 need SPSD stacks)");
  }
  if (cfg.R < 1) throw ConfigError("bootstrap.R must be >= 1");
  if (!(cfg.fraction > 0.0 && cfg.fraction <= 1.0))
    throw ConfigError("bootstrap.fraction must be in (0,1]");
  if (cfg.k < 1 || cfg.k > cfg.max_dim)
    throw ConfigError("homology.k must be in [1, max_dim]");
  if (cfg.max_dim > 2) throw ConfigError("homology.max_dim must be <= 2");
  if (!(cfg.p >= 1.0)) throw ConfigError("wasserstein.p must be >= 1");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir is required");
  return cfg;
}

inline StudyConfig load_study_config(const fs::path& path) {
  auto in = io::open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  }
  return parse_study_config(j);
}

inline std::uint64_t fnv1a_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Semantic content only: the output location is deliberately left out so
/// the config hash, cell caches and manifests are byte-identical wherever a
/// run lands.
inline json config_to_json(const StudyConfig& cfg) {
  json cells = json::array();
  for (const auto& c : cfg.cells)
    cells.push_back(json{{"label", c.label},
                         {"feature_file", c.feature_file},
                         {"feature_kind", to_string(c.feature_kind)},
                         {"metric", to_string(c.metric)},
                         {"ridge", c.ridge},
                         {"clamp_eps", c.clamp_eps}});
  json j{{"cells", cells},
         {"bootstrap",
          json{{"R", cfg.R},
               {"fraction", cfg.fraction},
               {"master_seed", cfg.master_seed},
               {"block_file", cfg.block_file}}},
         {"homology", json{{"k", cfg.k}, {"max_dim", cfg.max_dim}}},
         {"wasserstein", json{{"p", cfg.p}}},
         {"keep_image_diagrams", cfg.keep_image_diagrams}};
  if (cfg.threshold)
    j["homology"]["threshold"] = *cfg.threshold;
  else
    j["homology"]["threshold"] = nullptr;
  return j;
}

struct CellOutcome {
  std::string label;
  std::string status;  // "ok", "trivial", "failed", "cached"
  std::string error;
  PersistenceDiagram prevalence_diagram;
};

struct RunReport {
  int exit_code = 0;
  std::vector<CellOutcome> cells;
  fs::path manifest_path;
};

namespace pipeline_detail {

inline DistanceMatrix compute_cell_distance(const StudyCell& cell, const fs::path& base) {
  const fs::path file = fs::path(cell.feature_file).is_absolute()
                            ? fs::path(cell.feature_file)
                            : base / cell.feature_file;
  if (cell.metric == Metric::v1 || cell.metric == Metric::v2) {
    const FeatureMatrix f = io::read_feature_matrix(file);
    return cell.metric == Metric::v1 ? inner_product_divergence(f) : pearson_divergence(f);
  }
  const SpsdStack s = io::read_spsd_stack(file);
  if (cell.metric == Metric::pd1) return spd_geodesic(s, std::max(cell.ridge, 0.0));
  return ztrans_pearson_divergence(s, cell.clamp_eps);
}

inline json diagram_params_json(const StudyConfig& cfg, double resolved_threshold) {
  return json{{"max_dim", cfg.max_dim},
              {"k", cfg.k},
              {"threshold", resolved_threshold},
              {"threshold_mode", cfg.threshold ? "explicit" : "enclosing_radius"}};
}

// Diagram distances take finite intervals only; classes still alive at an
// explicit threshold are dropped here before comparison.
inline PersistenceDiagram finite_part(const PersistenceDiagram& d, int k) {
  PersistenceDiagram out;
  out.source_label = d.source_label;
  for (const auto& iv : d.intervals)
    if (iv.dim == k && !iv.essential()) out.intervals.push_back(iv);
  return out;
}

}  // namespace pipeline_detail

/// Runs every cell (bootstrapped persistence), then the study-level distance
/// matrices, clustering and manifest. Completed cells are detected by their
/// cell manifest and skipped; recomputation yields identical bytes. Exit
/// code 0 on full success, 3 if any cell failed.
inline RunReport run_pipeline(const StudyConfig& cfg, unsigned threads,
                              const fs::path& config_dir = ".") {
  const fs::path out_root = fs::path(cfg.output_dir);
  fs::create_directories(out_root);
  const std::uint64_t config_hash = fnv1a_hash(config_to_json(cfg).dump());

  RunReport report;
  report.cells.resize(cfg.cells.size());

  FiltrationParams params{cfg.max_dim, cfg.threshold};

  // Cells are sequential; the replicate fan-out inside each cell is parallel.
  // This keeps per-cell file writes single-writer while saturating workers.
  for (std::size_t ci = 0; ci < cfg.cells.size(); ++ci) {
    const StudyCell& cell = cfg.cells[ci];
    CellOutcome& outcome = report.cells[ci];
    outcome.label = cell.label;
    const fs::path cell_dir = out_root / ("cell_" + cell.label);
    const fs::path done_path = cell_dir / "cell.done.json";
    try {
      if (fs::exists(done_path)) {
        auto in = io::open_in(done_path);
        const json done = json::parse(in);
        if (done.value("config_hash", std::uint64_t{0}) == config_hash) {
          outcome.status = done.value("status", "ok");
          outcome.prevalence_diagram =
              io::read_diagram_json(cell_dir / "prevalence_diagram.json");
          continue;
        }
        fs::remove_all(cell_dir);  // stale outputs from a different config
      }
      fs::create_directories(cell_dir);

      const DistanceMatrix dist = pipeline_detail::compute_cell_distance(cell, config_dir);
      io::write_distance_csv(dist, cell_dir / "distance_matrix.csv");
      const double resolved_threshold = resolve_threshold(dist, params);
      const json dparams = pipeline_detail::diagram_params_json(cfg, resolved_threshold);

      const PersistenceDiagram ambient = vr_persistence(dist, params, cell.label);
      io::write_diagram_json(ambient, cell_dir / "diagram.json", dparams);

      const bool trivial = ambient.count_dim(cfg.k) == 0;
      PersistenceDiagram prevalence_diagram = ambient;
      std::vector<std::vector<MatchRecord>> records(cfg.R);
      std::vector<std::size_t> betti(cfg.R, 0);

      BlockStructure blocks =
          cfg.block_file.empty()
              ? singleton_blocks(dist.n)
              : io::read_blocks_csv(fs::path(cfg.block_file).is_absolute()
                                        ? fs::path(cfg.block_file)
                                        : config_dir / cfg.block_file,
                                    dist.subject_ids);
      const BootstrapPlan plan =
          plan_bootstraps(dist.n, blocks, cfg.R, cfg.fraction, cfg.master_seed);
      io::write_plan_json(plan, cfg.block_file, cell_dir / "plan.json");

      if (!trivial) {
        BootstrapResult bres = run_topological_bootstrap(
            dist, params, plan, cfg.k, threads, cfg.keep_image_diagrams, cell.label);
        prevalence_diagram = std::move(bres.ambient);
        records = std::move(bres.records);
        betti = std::move(bres.betti_matched);
        if (cfg.keep_image_diagrams)
          for (std::size_t r = 0; r < bres.image_diagrams.size(); ++r)
            io::write_image_diagram_json(
                bres.image_diagrams[r],
                cell_dir / ("image_diagram_" + std::to_string(r) + ".json"), dparams);
      }

      io::write_diagram_json(prevalence_diagram, cell_dir / "prevalence_diagram.json", dparams);
      io::write_match_records_csv(records, cell_dir / "match_records.csv");
      io::write_betti_csv(betti, cell_dir / "matched_betti.csv");

      outcome.status = trivial ? "trivial" : "ok";
      outcome.prevalence_diagram = std::move(prevalence_diagram);
      json done{{"config_hash", config_hash}, {"status", outcome.status},
                {"label", cell.label}};
      auto out = io::open_out(done_path);
      out << done.dump(2) << "\n";
    } catch (const std::exception& e) {
      outcome.status = "failed";
      outcome.error = e.what();
      report.exit_code = 3;
    }
  }

  // study level over surviving cells
  std::vector<std::size_t> survivors;
  for (std::size_t ci = 0; ci < report.cells.size(); ++ci)
    if (report.cells[ci].status != "failed") survivors.push_back(ci);

  if (survivors.size() >= 2) {
    const std::size_t m = survivors.size();
    DistanceMatrix wp = DistanceMatrix::zeros(m);
    DistanceMatrix wp_prev = DistanceMatrix::zeros(m);
    for (std::size_t a = 0; a < m; ++a) {
      wp.subject_ids[a] = report.cells[survivors[a]].label;
      wp_prev.subject_ids[a] = report.cells[survivors[a]].label;
    }
    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) tasks.emplace_back(a, b);
    std::vector<PersistenceDiagram> finite(m);
    for (std::size_t a = 0; a < m; ++a)
      finite[a] =
          pipeline_detail::finite_part(report.cells[survivors[a]].prevalence_diagram, cfg.k);
    parallel_for(tasks.size(), threads, [&](std::size_t t) {
      const auto [a, b] = tasks[t];
      const auto& da = finite[a];
      const auto& db = finite[b];
      const double w = wasserstein(da, db, cfg.k, cfg.p);
      const double wprev = prevalence_wasserstein(da, db, cfg.k, cfg.p);
      wp.at(a, b) = w;
      wp.at(b, a) = w;
      wp_prev.at(a, b) = wprev;
      wp_prev.at(b, a) = wprev;
    });
    io::write_distance_csv(wp, out_root / "wasserstein.csv");
    io::write_distance_csv(wp_prev, out_root / "prevalence_wasserstein.csv");

    // clustering only over non-trivial cells
    std::vector<std::size_t> clusterable;  // positions within survivors
    for (std::size_t a = 0; a < m; ++a)
      if (report.cells[survivors[a]].status != "trivial") clusterable.push_back(a);
    if (clusterable.size() >= 2) {
      DistanceMatrix cd = DistanceMatrix::zeros(clusterable.size());
      for (std::size_t a = 0; a < clusterable.size(); ++a) {
        cd.subject_ids[a] = wp_prev.subject_ids[clusterable[a]];
        for (std::size_t b = 0; b < clusterable.size(); ++b)
          cd.at(a, b) = wp_prev.at(clusterable[a], clusterable[b]);
      }
      const Dendrogram dg = ward_cluster(cd);
      io::write_linkage_csv(dg, out_root / "linkage.csv");
      io::write_newick(dg, out_root / "dendrogram.newick");
      io::write_clustermap_json(dg, cd, out_root / "clustermap.json");
    }
  }

  json cells_json = json::array();
  for (const auto& c : report.cells) {
    json jc{{"label", c.label}, {"status", c.status}};
    if (!c.error.empty()) jc["error"] = c.error;
    cells_json.push_back(jc);
  }
  json manifest{{"version", kVersion},
                {"config_hash", config_hash},
                {"config", config_to_json(cfg)},
                {"cells", cells_json}};
  report.manifest_path = out_root / "run_manifest.json";
  auto out = io::open_out(report.manifest_path);
  out << manifest.dump(2) << "\n";
  return report;
}

}  // namespace toporep
