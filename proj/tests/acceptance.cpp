// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exits nonzero if any fails.

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "toporep/toporep.hpp"

using namespace toporep;
namespace fs = std::filesystem;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

int failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %-38s %s\n", pass ? "PASS" : "FAIL", criterion,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

DistanceMatrix random_metric(std::size_t n, Rng& rng) {
  DistanceMatrix d = DistanceMatrix::zeros(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.05 + rng.uniform();
      d.at(i, j) = v;
      d.at(j, i) = v;
    }
  return d;
}

DistanceMatrix euclidean(const FeatureMatrix& f) {
  DistanceMatrix d = DistanceMatrix::zeros(f.rows);
  d.subject_ids = f.subject_ids;
  for (std::size_t i = 0; i < f.rows; ++i)
    for (std::size_t j = i + 1; j < f.rows; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < f.cols; ++t) {
        const double diff = f.at(i, t) - f.at(j, t);
        s += diff * diff;
      }
      d.at(i, j) = std::sqrt(s);
      d.at(j, i) = d.at(i, j);
    }
  return d;
}

std::vector<std::tuple<int, double, double>> barcode(const PersistenceDiagram& d) {
  std::vector<std::tuple<int, double, double>> v;
  for (const auto& iv : d.intervals) v.emplace_back(iv.dim, iv.birth, iv.death);
  std::sort(v.begin(), v.end());
  return v;
}

// ------------------------------------------------------------ criterion 1
void criterion_1() {
  Timer timer;
  Rng rng(1001);
  const FiltrationParams params{2, kInf};
  int trials = 0;
  bool ok = true;
  for (int t = 0; t < 110 && ok; ++t) {
    const std::size_t n = 3 + rng.bounded(5);  // 3..7
    const auto d = random_metric(n, rng);
    ok = barcode(vr_persistence(d, params, "r")) ==
         barcode(brute_force_persistence(d, params, "r"));
    ++trials;
  }
  const double sec = timer.seconds();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d random metrics, dims 0-2, %.1fs", trials, sec);
  report(1, "persistence oracle suite", ok && sec < 60.0, buf);
}

// ------------------------------------------------------------ criterion 2
void criterion_2() {
  Timer timer;
  Rng rng(1002);
  const FiltrationParams params{1, kInf};
  bool ok = true;
  int trials = 0;
  long checks = 0;
  for (int t = 0; t < 60 && ok; ++t) {
    const std::size_t n = 5 + rng.bounded(4);  // 5..8
    const auto d = random_metric(n, rng);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    idx.resize(3 + rng.bounded(n - 3));
    const auto mask = SubsampleMask::from_indices(n, idx);
    const auto img = image_persistence(d, mask, params, "t");
    std::set<double> vals{0.0};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) vals.insert(d.at(i, j));
    for (double r : vals) {
      for (double s : vals) {
        if (r > s) continue;
        int count = 0;
        for (const auto& iv : img.intervals)
          if (iv.dim == 1 && iv.birth_sub <= r && iv.death_amb > s) ++count;
        if (count != induced_rank_oracle(d, mask, 1, r, s)) {
          ok = false;
          break;
        }
        ++checks;
      }
      if (!ok) break;
    }
    ++trials;
  }
  const double sec = timer.seconds();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d (metric,mask) pairs, %ld rank checks, %.1fs", trials,
                checks, sec);
  report(2, "image-persistence oracle suite", ok && sec < 120.0, buf);
}

// ------------------------------------------------------------ criterion 3
void criterion_3() {
  Rng rng(1003);
  bool nonneg = true, symmetric = true, bounded = true, degenerate_zero = true;
  for (int t = 0; t < 1000; ++t) {
    MatchingProblem mp;
    mp.p = 1.0 + rng.uniform() * 2.0;
    auto fill = [&](std::vector<WeightedPoint>& pts) {
      const std::size_t n = rng.bounded(7);
      for (std::size_t i = 0; i < n; ++i) {
        const double b = rng.uniform();
        pts.push_back({b, b + 0.02 + rng.uniform(), rng.uniform()});
      }
    };
    fill(mp.x);
    fill(mp.y);
    const double wp = matching_distance(mp, true);
    const double w = matching_distance(mp, false);
    nonneg = nonneg && wp >= 0.0;
    bounded = bounded && wp <= w;
    MatchingProblem flipped{mp.y, mp.x, mp.p};
    symmetric = symmetric && std::abs(matching_distance(flipped, true) - wp) <= 1e-10;
  }
  for (int t = 0; t < 50; ++t) {
    MatchingProblem mp;
    mp.p = 2.0;
    const std::size_t n = 1 + rng.bounded(6);
    for (std::size_t i = 0; i < n; ++i) {
      const double b = rng.uniform();
      mp.x.push_back({b, b + 0.1 + rng.uniform(), 0.0});
    }
    degenerate_zero = degenerate_zero && matching_distance(mp, true) == 0.0;
  }
  const bool ok = nonneg && symmetric && bounded && degenerate_zero;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "1000 pairs: nonneg %d, sym<=1e-10 %d, W_p^rho<=W_p %d, degenerate==0 %d",
                int(nonneg), int(symmetric), int(bounded), int(degenerate_zero));
  report(3, "theorem-1 suite", ok, buf);
}

// ------------------------------------------------------------ criterion 4
void criterion_4() {
  Rng rng(1004);
  bool mean_ok = true, bounds_ok = true;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n_intervals = 1 + rng.bounded(6);
    const std::size_t R = 1 + rng.bounded(40);
    PersistenceDiagram amb;
    amb.source_label = "fixture";
    for (std::size_t i = 0; i < n_intervals; ++i) {
      const double b = rng.uniform();
      amb.intervals.push_back(
          PersistenceInterval{1, b, b + 0.1 + rng.uniform(),
                              static_cast<simplex_id>(i), static_cast<simplex_id>(100 + i), {}});
    }
    std::vector<std::vector<MatchRecord>> records(R);
    std::vector<double> sums(n_intervals, 0.0);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t i = 0; i < n_intervals; ++i) {
        const double a = rng.bounded(4) == 0 ? 0.0 : rng.uniform();
        bounds_ok = bounds_ok && a >= 0.0 && a <= 1.0;
        records[r].push_back(MatchRecord{
            i, r, a > 0.0 ? std::optional<std::size_t>(i) : std::nullopt, a});
        sums[i] += a;
      }
    const auto prev = prevalence_scores(amb, records, 1);
    for (std::size_t i = 0; i < n_intervals; ++i) {
      const double expected = sums[i] / static_cast<double>(R);
      mean_ok = mean_ok && std::abs(prev.intervals[i].prevalence.value() - expected) <= 1e-15;
    }
  }
  // affinity bounds over a real bootstrap run
  Rng rng2(10041);
  const auto d = random_metric(30, rng2);
  const auto plan = plan_bootstraps(30, singleton_blocks(30), 50, 0.9, 77);
  const auto res =
      run_topological_bootstrap(d, FiltrationParams{1, {}}, plan, 1, 2, false, "b");
  for (const auto& rep : res.records)
    for (const auto& rec : rep) bounds_ok = bounds_ok && rec.affinity >= 0.0 && rec.affinity <= 1.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "200 fixtures to 1e-15; alpha in [0,1] over %zu records",
                res.records.size() * (res.records.empty() ? 0 : res.records[0].size()));
  report(4, "prevalence arithmetic (eq. 1)", mean_ok && bounds_ok, buf);
}

// ------------------------------------------------------------ criterion 5
void criterion_5() {
  Rng rng(1005);
  std::vector<std::string> ids;
  std::size_t block = 0;
  while (ids.size() < 120) {
    const std::size_t size = 1 + rng.bounded(4);
    for (std::size_t i = 0; i < size && ids.size() < 120; ++i)
      ids.push_back("fam" + std::to_string(block));
    ++block;
  }
  const auto plan = plan_bootstraps(120, BlockStructure{ids}, 1000, 0.9, 4242);
  bool integrity = true, sizes_ok = true;
  for (const auto& m : plan.masks) {
    std::map<std::string, std::set<bool>> states;
    for (std::size_t i = 0; i < 120; ++i) states[ids[i]].insert(m.included[i]);
    for (const auto& [b, st] : states) integrity = integrity && st.size() == 1;
    sizes_ok = sizes_ok && m.count >= plan.target_size &&
               m.count <= plan.target_size + plan.largest_block - 1;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "1000 replicates, target %zu, largest block %zu: zero split blocks %d",
                plan.target_size, plan.largest_block, int(integrity));
  report(5, "block-constraint audit", integrity && sizes_ok, buf);
}

// ------------------------------------------------------------ criterion 6
void criterion_6() {
  Timer timer;
  ManifoldSpec spec{ManifoldKind::circle, 100, 0.05, 2, 12345};
  const auto d = euclidean(sample_manifold(spec));
  const auto plan = plan_bootstraps(100, singleton_blocks(100), 100, 0.9, 99);
  const auto res =
      run_topological_bootstrap(d, FiltrationParams{1, {}}, plan, 1,
                                default_thread_count(), false, "circle");
  double best_pers = -1.0, best_prev = -1.0;
  for (const auto& iv : res.ambient.intervals)
    if (iv.dim == 1 && !iv.essential() && iv.persistence() > best_pers) {
      best_pers = iv.persistence();
      best_prev = iv.prevalence.value_or(0.0);
    }
  std::size_t matched = 0;
  for (auto b : res.betti_matched) matched += (b >= 1);
  const double sec = timer.seconds();
  const bool ok = best_prev >= 0.8 && matched >= 90 && sec < 300.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "top prevalence %.3f (>=0.8), beta1>=1 in %zu/100 (>=90), %.1fs", best_prev,
                matched, sec);
  report(6, "circle stability analogue", ok, buf);
}

// ------------------------------------------------------------ criterion 7
void criterion_7() {
  ManifoldSpec spec{ManifoldKind::figure_eight, 200, 0.01, 2, 3};
  const auto d = euclidean(sample_manifold(spec));
  const auto plan = plan_bootstraps(200, singleton_blocks(200), 100, 0.9, 5);
  const auto res =
      run_topological_bootstrap(d, FiltrationParams{1, {}}, plan, 1,
                                default_thread_count(), false, "fig8");
  // the two dominant generators, by persistence
  std::vector<std::pair<double, double>> top;  // (persistence, prevalence)
  for (const auto& iv : res.ambient.intervals)
    if (iv.dim == 1 && !iv.essential())
      top.emplace_back(iv.persistence(), iv.prevalence.value_or(0.0));
  std::sort(top.rbegin(), top.rend());
  const bool ok = top.size() >= 2 && top[1].first < top[0].first / 3.0 &&
                  top[1].second >= 0.6;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "small loop: persistence %.3f < %.3f/3, prevalence %.3f (>=0.6)",
                top.size() > 1 ? top[1].first : -1.0, top.empty() ? -1.0 : top[0].first,
                top.size() > 1 ? top[1].second : -1.0);
  report(7, "prevalence/persistence decoupling", ok, buf);
}

// ------------------------------------------------------------ criterion 8
double brute_matching(const MatchingProblem& mp, bool weighted) {
  const std::size_t nx = mp.x.size(), ny = mp.y.size();
  std::vector<bool> used(ny, false);
  double best = kInf;
  auto pair_cost = [&](const WeightedPoint& a, const WeightedPoint& b) {
    const double base = std::pow(std::abs(a.birth - b.birth), mp.p) +
                        std::pow(std::abs(a.death - b.death), mp.p);
    return weighted ? std::pow(std::abs(a.prevalence - b.prevalence), mp.p) * base : base;
  };
  auto diag_cost = [&](const WeightedPoint& a) {
    const double base = 2.0 * std::pow(0.5 * (a.death - a.birth), mp.p);
    return weighted ? std::pow(a.prevalence, mp.p) * base : base;
  };
  std::function<void(std::size_t, double)> rec = [&](std::size_t i, double acc) {
    if (acc >= best) return;
    if (i == nx) {
      double total = acc;
      for (std::size_t j = 0; j < ny; ++j)
        if (!used[j]) total += diag_cost(mp.y[j]);
      best = std::min(best, total);
      return;
    }
    rec(i + 1, acc + diag_cost(mp.x[i]));
    for (std::size_t j = 0; j < ny; ++j) {
      if (used[j]) continue;
      used[j] = true;
      rec(i + 1, acc + pair_cost(mp.x[i], mp.y[j]));
      used[j] = false;
    }
  };
  rec(0, 0.0);
  return std::pow(best, 1.0 / mp.p);
}

void criterion_8() {
  Rng rng(1008);
  bool ok = true;
  int trials = 0;
  for (int t = 0; t < 220 && ok; ++t) {
    MatchingProblem mp;
    mp.p = (t % 2 == 0) ? 2.0 : 1.0 + rng.uniform() * 2.0;
    auto fill = [&](std::vector<WeightedPoint>& pts) {
      const std::size_t n = rng.bounded(7);  // up to 6 points
      for (std::size_t i = 0; i < n; ++i) {
        const double b = rng.uniform();
        pts.push_back({b, b + 0.02 + rng.uniform(), rng.uniform()});
      }
    };
    fill(mp.x);
    fill(mp.y);
    ok = ok && std::abs(matching_distance(mp, false) - brute_matching(mp, false)) <= 1e-13;
    ok = ok && std::abs(matching_distance(mp, true) - brute_matching(mp, true)) <= 1e-13;
    ++trials;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%d random instances vs exhaustive matching", trials);
  report(8, "assignment optimality", ok, buf);
}

// ------------------------------------------------------------ criterion 9
void criterion_9() {
  Timer timer;
  const fs::path root = fs::temp_directory_path() / "toporep_acceptance_run";
  fs::remove_all(root);
  fs::create_directories(root);

  // six cells over synthetic manifolds: four vector cells (v1/v2), two SPSD
  // cells (pd1/pd2) built from netmats of reshaped nonlinear features
  const ManifoldSpec circle{ManifoldKind::circle, 36, 0.03, 6, 404};
  const ManifoldSpec fig8{ManifoldKind::figure_eight, 36, 0.02, 6, 405};
  const auto base_circle = sample_manifold(circle);
  const auto base_fig8 = sample_manifold(fig8);
  io::write_feature_csv(random_representation(base_circle, RepresentationKind::nonlinear, 5, 1),
                        root / "c1.csv");
  io::write_feature_csv(random_representation(base_circle, RepresentationKind::nonlinear, 5, 2),
                        root / "c2.csv");
  io::write_feature_csv(random_representation(base_fig8, RepresentationKind::nonlinear, 5, 3),
                        root / "f1.csv");
  io::write_feature_csv(random_representation(base_fig8, RepresentationKind::projection, 5, 4),
                        root / "f2.csv");
  // SPSD stacks: per-subject netmats from a 4 x 5 reshape of 20-dim features
  for (const char* name : {"s1", "s2"}) {
    const std::uint64_t seed = name[1] == '1' ? 5 : 6;
    const auto feats =
        random_representation(sample_manifold({ManifoldKind::circle, 36, 0.02, 24, seed}),
                              RepresentationKind::nonlinear, 20, seed + 10);
    TimeSeriesSet ts;
    ts.components = 4;
    ts.timepoints = 5;
    ts.subject_ids = feats.subject_ids;
    for (std::size_t i = 0; i < feats.rows; ++i)
      ts.series.emplace_back(feats.data.begin() + i * 20, feats.data.begin() + (i + 1) * 20);
    io::write_spsd_stack(extract_netmat(ts), root / (std::string(name) + ".json"));
  }

  json cells = json::array();
  auto add_cell = [&](const char* label, const char* file, const char* kind,
                      const char* metric) {
    cells.push_back({{"label", label},
                     {"feature_file", (root / file).string()},
                     {"feature_kind", kind},
                     {"metric", metric}});
  };
  add_cell("circle_v2_a", "c1.csv", "map", "v2");
  add_cell("circle_v2_b", "c2.csv", "map", "v2");
  add_cell("fig8_v2", "f1.csv", "map", "v2");
  add_cell("fig8_v1", "f2.csv", "map", "v1");
  add_cell("netmat_pd1", "s1.json", "netmat", "pd1");
  add_cell("netmat_pd2", "s2.json", "netmat", "pd2");
  json base{{"cells", cells},
            {"bootstrap", {{"R", 50}, {"fraction", 0.9}, {"master_seed", 2024}}},
            {"homology", {{"k", 1}, {"max_dim", 1}}},
            {"wasserstein", {{"p", 2.0}}}};

  auto slurp = [](const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (!e.is_regular_file()) continue;
      std::ifstream in(e.path(), std::ios::binary);
      files[fs::relative(e.path(), dir).string()] =
          std::string(std::istreambuf_iterator<char>(in), {});
    }
    return files;
  };

  auto j1 = base;
  j1["output_dir"] = (root / "out1").string();
  auto j8 = base;
  j8["output_dir"] = (root / "out8").string();
  const auto r1 = run_pipeline(parse_study_config(j1), 1);
  const auto r8 = run_pipeline(parse_study_config(j8), 8);

  bool statuses_ok = r1.exit_code == 0 && r8.exit_code == 0;
  const auto f1 = slurp(root / "out1");
  const auto f8 = slurp(root / "out8");
  const bool identical = f1 == f8 && !f1.empty();
  const double sec = timer.seconds();
  const bool ok = statuses_ok && identical && sec < 600.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "6 cells, R=50: %zu files byte-identical across threads, %.1fs",
                f1.size(), sec);
  report(9, "end-to-end determinism", ok, buf);
  fs::remove_all(root);
}

// ----------------------------------------------------------- criterion 10
void criterion_10() {
  Timer timer;
  ManifoldSpec spec{ManifoldKind::torus, 500, 0.05, 4, 777};
  const auto d = euclidean(sample_manifold(spec));
  const auto diag = vr_persistence(d, FiltrationParams{1, {}}, "n500");
  const double sec = timer.seconds();
  struct rusage usage {};
  getrusage(RUSAGE_SELF, &usage);
  const long rss_kb = usage.ru_maxrss;  // peak RSS in kB on Linux
  const bool ok = sec < 60.0 && rss_kb < 4L * 1024 * 1024;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "N=500 dim 1: %.1fs (<60), peak RSS %.2f GB (<4), %zu intervals",
                sec, rss_kb / (1024.0 * 1024.0), diag.intervals.size());
  report(10, "desk-scale throughput", ok, buf);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (failures == 0)
    std::printf("all acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}
