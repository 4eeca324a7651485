// Block-constrained topological bootstrap: plans resamples that keep subject
// blocks (families) intact, registers ambient cycles against each replicate
// via image persistence, and aggregates affinities into prevalence scores and
// matched Betti numbers.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "toporep/diagram.hpp"
#include "toporep/image.hpp"
#include "toporep/rng.hpp"
#include "toporep/threadpool.hpp"
#include "toporep/types.hpp"
#include "toporep/vr.hpp"

namespace toporep {

/// One block id per subject; subjects sharing an id are resampled atomically.
struct BlockStructure {
  std::vector<std::string> block_ids;
};

inline BlockStructure singleton_blocks(std::size_t n) {
  BlockStructure b;
  b.block_ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) b.block_ids.push_back("_u" + std::to_string(i));
  return b;
}

struct BootstrapPlan {
  std::size_t R = 0;
  double fraction = 0.9;
  std::uint64_t master_seed = 0;
  std::size_t target_size = 0;    // ceil(fraction * N)
  std::size_t largest_block = 0;  // mask sizes lie in [target, target + largest - 1]
  std::vector<SubsampleMask> masks;
};

/// Blocks are drawn whole in a seeded random permutation until the included
/// count first reaches the target. The per-replicate generator is seeded by
/// derive_seed(master_seed, replicate).
inline BootstrapPlan plan_bootstraps(std::size_t n, const BlockStructure& blocks,
                                     std::size_t R, double fraction,
                                     std::uint64_t master_seed) {
  if (blocks.block_ids.size() != n)
    throw std::invalid_argument("plan_bootstraps: block structure must cover every subject");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("plan_bootstraps: fraction must be in (0,1]");
  if (R < 1) throw std::invalid_argument("plan_bootstraps: R must be >= 1");

  // block membership lists, ordered by first appearance
  std::vector<std::vector<std::size_t>> members;
  {
    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& id = blocks.block_ids[i];
      if (id.empty())
        throw std::invalid_argument("plan_bootstraps: empty block id for subject " +
                                    std::to_string(i));
      auto [it, inserted] = index_of.emplace(id, members.size());
      if (inserted) members.emplace_back();
      members[it->second].push_back(i);
    }
  }

  BootstrapPlan plan;
  plan.R = R;
  plan.fraction = fraction;
  plan.master_seed = master_seed;
  // small slack keeps ceil() immune to fp noise in fraction * n
  plan.target_size =
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  plan.target_size = std::max<std::size_t>(plan.target_size, 1);
  for (const auto& b : members) plan.largest_block = std::max(plan.largest_block, b.size());
  if (plan.largest_block > plan.target_size)
    throw std::invalid_argument(
        "plan_bootstraps: a block of size " + std::to_string(plan.largest_block) +
        " exceeds the target mask size " + std::to_string(plan.target_size) +
        "; the block constraint is unsatisfiable");

  std::vector<std::size_t> order(members.size());
  plan.masks.reserve(R);
  for (std::size_t rep = 0; rep < R; ++rep) {
    Rng rng(derive_seed(master_seed, rep));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    SubsampleMask mask{std::vector<bool>(n, false), 0};
    for (std::size_t b : order) {
      if (mask.count >= plan.target_size) break;
      for (std::size_t subject : members[b]) {
        mask.included[subject] = true;
        ++mask.count;
      }
    }
    plan.masks.push_back(std::move(mask));
  }
  return plan;
}

/// One registered (ambient interval, replicate) pair.
struct MatchRecord {
  std::size_t ambient_interval = 0;  // index into the ambient diagram's intervals
  std::size_t replicate = 0;
  std::optional<std::size_t> image_interval;  // index into that replicate's ImageDiagram
  double affinity = 0.0;                      // 0 iff unmatched
};

/// Jaccard overlap of two half-open intervals.
inline double interval_jaccard(double b1, double d1, double b2, double d2) {
  const double inter = std::min(d1, d2) - std::max(b1, b2);
  if (inter <= 0.0) return 0.0;
  const double uni = std::max(d1, d2) - std::min(b1, b2);
  return inter / uni;
}

/// Matches ambient k-intervals to image intervals through equality of the
/// death simplex (the pair key of the reduction), not numeric death values.
/// Every ambient k-interval gets a record; unmatched ones carry affinity 0.
inline std::vector<MatchRecord> register_cycles(const PersistenceDiagram& amb,
                                                const ImageDiagram& img, int k,
                                                std::size_t replicate_index = 0) {
  if (amb.source_label != img.source_label)
    throw std::invalid_argument("register_cycles: diagrams come from different sources ('" +
                                amb.source_label + "' vs '" + img.source_label + "')");
  std::unordered_map<simplex_id, std::size_t> by_death;
  for (std::size_t i = 0; i < img.intervals.size(); ++i) {
    const auto& iv = img.intervals[i];
    if (iv.dim != k) continue;
    if (!by_death.emplace(iv.death_simplex, i).second)
      throw std::runtime_error("register_cycles: duplicate image death simplex");
  }
  std::vector<MatchRecord> records;
  for (std::size_t i = 0; i < amb.intervals.size(); ++i) {
    const auto& iv = amb.intervals[i];
    if (iv.dim != k) continue;
    MatchRecord rec;
    rec.ambient_interval = i;
    rec.replicate = replicate_index;
    if (!iv.essential()) {
      auto it = by_death.find(iv.death_simplex);
      if (it != by_death.end()) {
        const auto& match = img.intervals[it->second];
        rec.image_interval = it->second;
        rec.affinity =
            interval_jaccard(iv.birth, iv.death, match.birth_sub, match.death_amb);
        if (!(rec.affinity >= 0.0 && rec.affinity <= 1.0))
          throw std::runtime_error("register_cycles: affinity out of [0,1]");
        if (rec.affinity == 0.0) rec.image_interval.reset();  // no overlap, no match
      }
    }
    records.push_back(rec);
  }
  return records;
}

/// Prevalence of each dim-k interval = mean affinity over the R replicates;
/// intervals of other dimensions keep an unset prevalence.
inline PersistenceDiagram prevalence_scores(const PersistenceDiagram& amb,
                                            const std::vector<std::vector<MatchRecord>>& records,
                                            int k) {
  PersistenceDiagram out = amb;
  std::vector<std::size_t> k_intervals;
  for (std::size_t i = 0; i < out.intervals.size(); ++i)
    if (out.intervals[i].dim == k) k_intervals.push_back(i);
  const std::size_t R = records.size();
  if (R == 0) throw std::invalid_argument("prevalence_scores: no replicates");
  std::vector<double> sum(out.intervals.size(), 0.0);
  std::vector<bool> seen(out.intervals.size(), false);
  for (const auto& rep : records) {
    if (rep.size() != k_intervals.size())
      throw std::invalid_argument(
          "prevalence_scores: replicate does not cover every ambient interval (" +
          std::to_string(rep.size()) + " records for " +
          std::to_string(k_intervals.size()) + " intervals)");
    std::fill(seen.begin(), seen.end(), false);
    for (const auto& rec : rep) {
      if (rec.ambient_interval >= out.intervals.size() ||
          out.intervals[rec.ambient_interval].dim != k)
        throw std::invalid_argument("prevalence_scores: record points at a non-k interval");
      if (seen[rec.ambient_interval])
        throw std::invalid_argument("prevalence_scores: duplicate record for one interval");
      seen[rec.ambient_interval] = true;
      sum[rec.ambient_interval] += rec.affinity;
    }
  }
  for (std::size_t i : k_intervals)
    out.intervals[i].prevalence = sum[i] / static_cast<double>(R);
  return out;
}

/// Per replicate, the number of ambient cycles matched with nonzero affinity.
inline std::vector<std::size_t> matched_betti(const std::vector<std::vector<MatchRecord>>& records) {
  std::vector<std::size_t> out;
  out.reserve(records.size());
  for (const auto& rep : records) {
    std::size_t c = 0;
    for (const auto& rec : rep) c += rec.affinity > 0.0 ? 1 : 0;
    out.push_back(c);
  }
  return out;
}

struct BootstrapResult {
  PersistenceDiagram ambient;                      // prevalence set on dim-k intervals
  std::vector<std::vector<MatchRecord>> records;   // [replicate][k-interval]
  std::vector<std::size_t> betti_matched;          // [replicate]
  std::vector<ImageDiagram> image_diagrams;        // only when keep_images
};

/// Full bootstrap of one distance matrix: ambient persistence, R image
/// computations (parallel over replicates), cycle registration, prevalence
/// and matched Betti numbers. Deterministic in (D, params, plan, k).
inline BootstrapResult run_topological_bootstrap(const DistanceMatrix& D,
                                                 const FiltrationParams& params,
                                                 const BootstrapPlan& plan, int k,
                                                 unsigned threads = 1,
                                                 bool keep_images = false,
                                                 const std::string& label = "") {
  if (k < 1 || k > params.max_dim)
    throw std::invalid_argument("run_topological_bootstrap: k must be in [1, max_dim]");
  BootstrapResult result;
  result.ambient = vr_persistence(D, params, label);
  result.records.resize(plan.R);
  if (keep_images) result.image_diagrams.resize(plan.R);
  parallel_for(plan.R, threads, [&](std::size_t rep) {
    ImageDiagram img = image_persistence(D, plan.masks[rep], params, label);
    result.records[rep] = register_cycles(result.ambient, img, k, rep);
    if (keep_images) result.image_diagrams[rep] = std::move(img);
  });
  result.ambient = prevalence_scores(result.ambient, result.records, k);
  result.betti_matched = matched_betti(result.records);
  return result;
}

}  // namespace toporep
