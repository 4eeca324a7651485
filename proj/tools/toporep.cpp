// toporep: topological comparison of data representations.
//
// Subcommands cover each pipeline stage (synth, features, dist, ph, imageph,
// bootstrap, prevalence, betti, wasserstein, cluster) plus `run`, which
// executes a full config-driven study. Exit codes: 0 success, 2 bad
// arguments/config, 3 cell failures with partial outputs.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "toporep/toporep.hpp"

namespace fs = std::filesystem;
using namespace toporep;

namespace {

FiltrationParams make_params(int max_dim, double threshold) {
  FiltrationParams p;
  p.max_dim = max_dim;
  if (threshold >= 0.0) p.threshold = threshold;
  return p;
}

SubsampleMask read_mask_file(const fs::path& path, const DistanceMatrix& d) {
  auto in = io::open_in(path);
  std::set<std::string> wanted;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (!line.empty()) wanted.insert(line);
  }
  SubsampleMask mask{std::vector<bool>(d.n, false), 0};
  for (std::size_t i = 0; i < d.n; ++i) {
    if (wanted.count(d.subject_ids[i])) {
      mask.included[i] = true;
      ++mask.count;
      wanted.erase(d.subject_ids[i]);
    }
  }
  if (!wanted.empty())
    throw std::runtime_error("mask file names unknown subject '" + *wanted.begin() + "'");
  return mask;
}

TimeSeriesSet reshape_features(const FeatureMatrix& f, std::size_t r, std::size_t t) {
  if (r * t != f.cols)
    throw std::runtime_error("--reshape " + std::to_string(r) + " " + std::to_string(t) +
                             " does not match feature dimension " + std::to_string(f.cols));
  TimeSeriesSet ts;
  ts.components = r;
  ts.timepoints = t;
  ts.subject_ids = f.subject_ids;
  for (std::size_t i = 0; i < f.rows; ++i)
    ts.series.emplace_back(f.data.begin() + i * f.cols, f.data.begin() + (i + 1) * f.cols);
  return ts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topological comparison of data representations"};
  app.require_subcommand(1);

  unsigned threads = default_thread_count();
  if (const char* env = std::getenv("TOPOREP_THREADS"))
    threads = static_cast<unsigned>(std::max(1, std::atoi(env)));
  app.add_option("--threads", threads, "worker pool size")->capture_default_str();

  // ---- synth
  auto* synth = app.add_subcommand("synth", "sample a synthetic manifold into a feature file");
  std::string synth_kind = "circle", synth_out, synth_blocks_out, rep_kind;
  ManifoldSpec spec;
  std::size_t rep_dim = 0, block_max = 3;
  std::uint64_t rep_seed = 1, blocks_seed = 7;
  synth->add_option("--kind", synth_kind, "circle|torus|sphere|figure-eight|gaussian-blob")
      ->capture_default_str();
  synth->add_option("--n", spec.n, "number of points")->capture_default_str();
  synth->add_option("--noise", spec.noise_sigma, "gaussian noise sigma")->capture_default_str();
  synth->add_option("--ambient-dim", spec.ambient_dim, "embedding dimension")
      ->capture_default_str();
  synth->add_option("--seed", spec.seed, "sampling seed")->capture_default_str();
  synth->add_option("--representation", rep_kind, "apply projection|nonlinear map");
  synth->add_option("--rep-dim", rep_dim, "representation target dimension");
  synth->add_option("--rep-seed", rep_seed, "representation seed");
  synth->add_option("--blocks-out", synth_blocks_out, "also write random family blocks CSV");
  synth->add_option("--block-max-size", block_max, "largest random block")->capture_default_str();
  synth->add_option("--blocks-seed", blocks_seed, "block assignment seed");
  synth->add_option("--out", synth_out, "output feature file (.csv or binary)")->required();

  // ---- features
  auto* feat = app.add_subcommand("features", "extract features from per-subject time series");
  std::string feat_in, feat_kind_str = "netmat", feat_out;
  double feat_ridge = -1.0;
  std::vector<std::size_t> feat_reshape;
  feat->add_option("--input", feat_in, "time-series manifest JSON, or feature file with --reshape")
      ->required();
  feat->add_option("--kind", feat_kind_str, "amplitude|netmat|partial-netmat|spatial-netmat|map")
      ->capture_default_str();
  feat->add_option("--ridge", feat_ridge, "partial-netmat ridge (default 1e-3 * mean diag)");
  feat->add_option("--reshape", feat_reshape, "treat each subject row as r x T")->expected(2);
  feat->add_option("--out", feat_out, "feature file or SPSD manifest JSON")->required();

  // ---- dist
  auto* dist = app.add_subcommand("dist", "subject-pairwise dissimilarity matrix");
  std::string dist_in, dist_metric = "v2", dist_out;
  double dist_ridge = 0.0, dist_clamp = 1e-7;
  dist->add_option("--features", dist_in, "feature file (v1/v2) or SPSD manifest (pd1/pd2)")
      ->required();
  dist->add_option("--metric", dist_metric, "v1|v2|pd1|pd2")->capture_default_str();
  dist->add_option("--ridge", dist_ridge, "pd1 diagonal ridge")->capture_default_str();
  dist->add_option("--clamp-eps", dist_clamp, "pd2 atanh clamp")->capture_default_str();
  dist->add_option("--out", dist_out, "distance CSV")->required();

  // ---- ph
  auto* ph = app.add_subcommand("ph", "Vietoris-Rips persistence diagram");
  std::string ph_dist, ph_out, ph_label;
  int ph_max_dim = 1;
  double ph_threshold = -1.0;
  ph->add_option("--dist", ph_dist, "distance CSV")->required();
  ph->add_option("--max-dim", ph_max_dim, "top homology dimension (0..2)")->capture_default_str();
  ph->add_option("--threshold", ph_threshold, "filtration cutoff (default: enclosing radius)");
  ph->add_option("--label", ph_label, "source label stored in the diagram");
  ph->add_option("--out", ph_out, "diagram JSON")->required();

  // ---- imageph
  auto* iph = app.add_subcommand("imageph", "image persistence of a subsample inclusion");
  std::string iph_dist, iph_mask, iph_out, iph_label;
  int iph_max_dim = 1;
  double iph_threshold = -1.0;
  iph->add_option("--dist", iph_dist, "distance CSV")->required();
  iph->add_option("--mask-file", iph_mask, "text file with one included subject id per line")
      ->required();
  iph->add_option("--max-dim", iph_max_dim, "top homology dimension (1..2)")->capture_default_str();
  iph->add_option("--threshold", iph_threshold, "filtration cutoff (default: enclosing radius)");
  iph->add_option("--label", iph_label, "source label stored in the diagram");
  iph->add_option("--out", iph_out, "image diagram JSON")->required();

  // ---- bootstrap
  auto* bs = app.add_subcommand("bootstrap", "plan + run the topological bootstrap of one matrix");
  std::string bs_dist, bs_blocks, bs_outdir, bs_label;
  std::size_t bs_R = 1000;
  double bs_fraction = 0.9, bs_threshold = -1.0;
  std::uint64_t bs_seed = 0;
  int bs_k = 1, bs_max_dim = 1;
  bool bs_keep = false;
  bs->add_option("--dist", bs_dist, "distance CSV")->required();
  bs->add_option("--blocks", bs_blocks, "block CSV subject_id,block_id (default: singletons)");
  bs->add_option("--R", bs_R, "replicate count")->capture_default_str();
  bs->add_option("--fraction", bs_fraction, "resampling fraction")->capture_default_str();
  bs->add_option("--seed", bs_seed, "master seed")->capture_default_str();
  bs->add_option("--k", bs_k, "matching dimension")->capture_default_str();
  bs->add_option("--max-dim", bs_max_dim, "top homology dimension")->capture_default_str();
  bs->add_option("--threshold", bs_threshold, "filtration cutoff (default: enclosing radius)");
  bs->add_flag("--keep-image-diagrams", bs_keep, "persist all replicate image diagrams");
  bs->add_option("--label", bs_label, "source label");
  bs->add_option("--output-dir", bs_outdir, "output directory")->required();

  // ---- prevalence
  auto* prev = app.add_subcommand("prevalence", "recompute prevalence from match records");
  std::string prev_diagram, prev_records, prev_out;
  int prev_k = 1;
  prev->add_option("--diagram", prev_diagram, "ambient diagram JSON")->required();
  prev->add_option("--records", prev_records, "match records CSV")->required();
  prev->add_option("--k", prev_k, "matching dimension")->capture_default_str();
  prev->add_option("--out", prev_out, "prevalence diagram JSON")->required();

  // ---- betti
  auto* betti = app.add_subcommand("betti", "matched Betti numbers from match records");
  std::string betti_records, betti_out;
  betti->add_option("--records", betti_records, "match records CSV")->required();
  betti->add_option("--out", betti_out, "betti CSV")->required();

  // ---- wasserstein
  auto* wass = app.add_subcommand("wasserstein", "distance between two diagrams");
  std::string wass_a, wass_b;
  int wass_k = 1;
  double wass_p = 2.0;
  bool wass_weighted = false;
  wass->add_option("--a", wass_a, "diagram JSON")->required();
  wass->add_option("--b", wass_b, "diagram JSON")->required();
  wass->add_option("--k", wass_k, "homology dimension")->capture_default_str();
  wass->add_option("--p", wass_p, "Wasserstein degree")->capture_default_str();
  wass->add_flag("--prevalence-weighted", wass_weighted, "use prevalence weights");

  // ---- cluster
  auto* clus = app.add_subcommand("cluster", "Ward clustering of a dissimilarity matrix");
  std::string clus_dist, clus_prefix;
  clus->add_option("--dist", clus_dist, "distance CSV")->required();
  clus->add_option("--out-prefix", clus_prefix, "writes <prefix>linkage.csv, <prefix>dendrogram.newick, <prefix>clustermap.json")
      ->required();

  // ---- run
  auto* run = app.add_subcommand("run", "full config-driven study");
  std::string run_config, run_outdir;
  std::uint64_t run_seed = 0;
  bool run_seed_set = false, run_keep = false;
  run->add_option("--config", run_config, "study config JSON")->required();
  run->add_option("--output-dir", run_outdir, "override config output_dir");
  run->add_option("--seed", run_seed, "override bootstrap master seed")
      ->each([&](const std::string&) { run_seed_set = true; });
  run->add_flag("--keep-image-diagrams", run_keep, "persist replicate image diagrams");

  // let --threads (and any future global flag) appear after the subcommand
  for (auto* sc : app.get_subcommands([](const CLI::App*) { return true; }))
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      spec.kind = manifold_kind_from_string(synth_kind);
      FeatureMatrix f = sample_manifold(spec);
      if (!rep_kind.empty()) {
        if (rep_dim == 0) throw std::runtime_error("--rep-dim required with --representation");
        f = random_representation(f, representation_kind_from_string(rep_kind), rep_dim,
                                  rep_seed);
      }
      io::write_feature_matrix(f, synth_out);
      if (!synth_blocks_out.empty()) {
        BlockStructure b{assign_random_blocks(f.rows, block_max, blocks_seed)};
        io::write_blocks_csv(f.subject_ids, b, synth_blocks_out);
      }
    } else if (*feat) {
      const FeatureKind kind = feature_kind_from_string(feat_kind_str);
      TimeSeriesSet ts;
      if (!feat_reshape.empty())
        ts = reshape_features(io::read_feature_matrix(feat_in), feat_reshape[0],
                              feat_reshape[1]);
      else
        ts = io::read_time_series(feat_in);
      if (is_vector_kind(kind))
        io::write_feature_matrix(extract_vector_features(ts, kind), feat_out);
      else
        io::write_spsd_stack(extract_spsd_features(ts, kind, feat_ridge), feat_out);
    } else if (*dist) {
      DistanceMatrix d;
      if (dist_metric == "v1")
        d = inner_product_divergence(io::read_feature_matrix(dist_in));
      else if (dist_metric == "v2")
        d = pearson_divergence(io::read_feature_matrix(dist_in));
      else if (dist_metric == "pd1")
        d = spd_geodesic(io::read_spsd_stack(dist_in), dist_ridge);
      else if (dist_metric == "pd2")
        d = ztrans_pearson_divergence(io::read_spsd_stack(dist_in), dist_clamp);
      else
        throw std::runtime_error("unknown metric: " + dist_metric);
      io::write_distance_csv(d, dist_out);
    } else if (*ph) {
      const DistanceMatrix d = io::read_distance_csv(ph_dist);
      const FiltrationParams params = make_params(ph_max_dim, ph_threshold);
      const double resolved = resolve_threshold(d, params);
      const PersistenceDiagram diag = vr_persistence(d, params, ph_label);
      io::write_diagram_json(diag, ph_out,
                             nlohmann::json{{"max_dim", params.max_dim},
                                            {"threshold", resolved},
                                            {"threshold_mode",
                                             params.threshold ? "explicit" : "enclosing_radius"}});
    } else if (*iph) {
      const DistanceMatrix d = io::read_distance_csv(iph_dist);
      const SubsampleMask mask = read_mask_file(iph_mask, d);
      const FiltrationParams params = make_params(iph_max_dim, iph_threshold);
      const double resolved = resolve_threshold(d, params);
      const ImageDiagram diag = image_persistence(d, mask, params, iph_label);
      io::write_image_diagram_json(diag, iph_out,
                                   nlohmann::json{{"max_dim", params.max_dim},
                                                  {"threshold", resolved}});
    } else if (*bs) {
      const DistanceMatrix d = io::read_distance_csv(bs_dist);
      const FiltrationParams params = make_params(bs_max_dim, bs_threshold);
      const BlockStructure blocks = bs_blocks.empty()
                                        ? singleton_blocks(d.n)
                                        : io::read_blocks_csv(bs_blocks, d.subject_ids);
      const BootstrapPlan plan = plan_bootstraps(d.n, blocks, bs_R, bs_fraction, bs_seed);
      const fs::path out = bs_outdir;
      io::write_plan_json(plan, bs_blocks, out / "plan.json");
      BootstrapResult res =
          run_topological_bootstrap(d, params, plan, bs_k, threads, bs_keep, bs_label);
      const double resolved = resolve_threshold(d, params);
      nlohmann::json dparams{{"max_dim", params.max_dim}, {"k", bs_k}, {"threshold", resolved}};
      io::write_diagram_json(res.ambient, out / "prevalence_diagram.json", dparams);
      io::write_match_records_csv(res.records, out / "match_records.csv");
      io::write_betti_csv(res.betti_matched, out / "matched_betti.csv");
      if (bs_keep)
        for (std::size_t r = 0; r < res.image_diagrams.size(); ++r)
          io::write_image_diagram_json(res.image_diagrams[r],
                                       out / ("image_diagram_" + std::to_string(r) + ".json"),
                                       dparams);
    } else if (*prev) {
      const PersistenceDiagram amb = io::read_diagram_json(prev_diagram);
      const auto records = io::read_match_records_csv(prev_records);
      io::write_diagram_json(prevalence_scores(amb, records, prev_k), prev_out);
    } else if (*betti) {
      const auto records = io::read_match_records_csv(betti_records);
      io::write_betti_csv(matched_betti(records), betti_out);
    } else if (*wass) {
      const PersistenceDiagram a = io::read_diagram_json(wass_a);
      const PersistenceDiagram b = io::read_diagram_json(wass_b);
      const double v = wass_weighted ? prevalence_wasserstein(a, b, wass_k, wass_p)
                                     : wasserstein(a, b, wass_k, wass_p);
      std::cout << io::format_double(v) << "\n";
    } else if (*clus) {
      const DistanceMatrix d = io::read_distance_csv(clus_dist);
      const Dendrogram dg = ward_cluster(d);
      io::write_linkage_csv(dg, clus_prefix + "linkage.csv");
      io::write_newick(dg, clus_prefix + "dendrogram.newick");
      io::write_clustermap_json(dg, d, clus_prefix + "clustermap.json");
    } else if (*run) {
      StudyConfig cfg = load_study_config(run_config);
      if (!run_outdir.empty()) cfg.output_dir = run_outdir;
      if (run_seed_set) cfg.master_seed = run_seed;
      if (run_keep) cfg.keep_image_diagrams = true;
      const fs::path config_dir = fs::path(run_config).parent_path();
      const RunReport report =
          run_pipeline(cfg, threads, config_dir.empty() ? "." : config_dir);
      for (const auto& c : report.cells) {
        std::cout << "cell " << c.label << ": " << c.status;
        if (!c.error.empty()) std::cout << " (" << c.error << ")";
        std::cout << "\n";
      }
      std::cout << "manifest: " << report.manifest_path.string() << "\n";
      return report.exit_code;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
