// Copyright 2026 The ndtmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ndtmc/core_types.hpp"
#include "ndtmc/errors.hpp"

// Ground-truth generation and precision-recall scoring for Top-1 retrieval.
// A query fires at threshold tau when its best-match distance is <= tau;
// a firing query is TP if the match is in its positive set and FP
// otherwise; a non-firing query with a nonempty positive set is FN.
// Precision at zero detections is 1 by convention.

namespace ndtmc {

enum class GroundTruthMode { kKitti, kParking };

struct GroundTruthConfig {
  GroundTruthMode mode = GroundTruthMode::kKitti;
  double kitti_radius = 5.0;         ///< 3D distance bound, strict
  double parking_xy_radius = 4.0;    ///< x-y distance bound, inclusive
  double parking_z_tolerance = 2.0;  ///< |dz| bound, inclusive
  std::int64_t exclusion_gap = 50;   ///< same-sequence frame gap (kitti mode)
};

/// query frame index -> positive database frame indices (possibly empty;
/// every query has an entry).
using PositiveSets =
    std::unordered_map<std::int64_t, std::unordered_set<std::int64_t>>;

/// Positives for each query pose against a database trajectory. In kitti
/// mode both trajectories are the same sequence and pairs closer than
/// `exclusion_gap` frames are never positive; parking mode compares
/// distinct sessions, so no gap applies.
inline PositiveSets ground_truth(const std::vector<Pose>& query_poses,
                                 const std::vector<Pose>& database_poses,
                                 const GroundTruthConfig& cfg) {
  PositiveSets positives;
  positives.reserve(query_poses.size());
  for (const Pose& q : query_poses) {
    auto& set = positives[q.frame_index];
    for (const Pose& d : database_poses) {
      if (cfg.mode == GroundTruthMode::kKitti) {
        if (std::abs(q.frame_index - d.frame_index) < cfg.exclusion_gap) continue;
        if ((q.translation - d.translation).norm() < cfg.kitti_radius) {
          set.insert(d.frame_index);
        }
      } else {
        const double xy =
            (q.translation.head<2>() - d.translation.head<2>()).norm();
        const double dz = std::abs(q.translation.z() - d.translation.z());
        if (xy <= cfg.parking_xy_radius && dz <= cfg.parking_z_tolerance) {
          set.insert(d.frame_index);
        }
      }
    }
  }
  return positives;
}

inline PositiveSets ground_truth(const std::vector<Pose>& poses,
                                 const GroundTruthConfig& cfg) {
  return ground_truth(poses, poses, cfg);
}

/// Top-1 retrieval outcome for one query.
struct QueryOutcome {
  std::int64_t query_id = 0;
  std::int64_t match_id = 0;
  double distance = 0.0;
};

struct PrRow {
  double threshold = 0.0;
  double precision = 1.0;
  double recall = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

struct PrCurve {
  std::vector<PrRow> rows;  ///< thresholds strictly increasing
  std::int64_t query_count = 0;
};

/// 200 evenly spaced thresholds across the observed distance range plus
/// every observed distance as an exact knot.
inline std::vector<double> threshold_knots(
    const std::vector<QueryOutcome>& outcomes, int even_steps = 200) {
  std::vector<double> knots;
  if (outcomes.empty()) return knots;
  double lo = outcomes.front().distance;
  double hi = lo;
  for (const QueryOutcome& o : outcomes) {
    lo = std::min(lo, o.distance);
    hi = std::max(hi, o.distance);
  }
  knots.reserve(outcomes.size() + even_steps + 1);
  for (const QueryOutcome& o : outcomes) knots.push_back(o.distance);
  if (hi > lo) {
    for (int i = 0; i <= even_steps; ++i) {
      knots.push_back(lo + (hi - lo) * i / even_steps);
    }
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  return knots;
}

inline PrCurve pr_curve(
    const std::vector<QueryOutcome>& outcomes, const PositiveSets& ground_truth,
    const std::vector<double>& thresholds,
    const std::optional<std::unordered_set<std::int64_t>>& valid_match_ids =
        std::nullopt) {
  for (const QueryOutcome& o : outcomes) {
    if (!ground_truth.contains(o.query_id)) {
      throw FormatError("query id " + std::to_string(o.query_id) +
                        " has no ground-truth entry");
    }
    if (valid_match_ids && !valid_match_ids->contains(o.match_id)) {
      throw FormatError("match id " + std::to_string(o.match_id) +
                        " is not a known database id");
    }
  }

  std::vector<double> knots = thresholds;
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  PrCurve curve;
  curve.query_count = static_cast<std::int64_t>(outcomes.size());
  curve.rows.reserve(knots.size());
  for (double tau : knots) {
    PrRow row;
    row.threshold = tau;
    for (const QueryOutcome& o : outcomes) {
      const auto& positives = ground_truth.at(o.query_id);
      if (o.distance <= tau) {
        if (positives.contains(o.match_id)) {
          ++row.tp;
        } else {
          ++row.fp;
        }
      } else if (!positives.empty()) {
        ++row.fn;
      }
    }
    row.precision =
        (row.tp + row.fp) > 0
            ? static_cast<double>(row.tp) / static_cast<double>(row.tp + row.fp)
            : 1.0;
    row.recall =
        (row.tp + row.fn) > 0
            ? static_cast<double>(row.tp) / static_cast<double>(row.tp + row.fn)
            : 0.0;
    curve.rows.push_back(row);
  }
  return curve;
}

/// Max over rows of 2PR/(P+R); nullopt when every row is degenerate.
inline std::optional<double> f1_max(const PrCurve& curve) {
  std::optional<double> best;
  for (const PrRow& row : curve.rows) {
    const double denom = row.precision + row.recall;
    if (denom <= 0.0) continue;
    const double f1 = 2.0 * row.precision * row.recall / denom;
    if (!best || f1 > *best) best = f1;
  }
  return best;
}

/// 0.5 * (max recall at precision 1 + precision at minimum recall);
/// nullopt when no row reaches precision 1.
inline std::optional<double> extended_precision(const PrCurve& curve) {
  if (curve.rows.empty()) return std::nullopt;

  std::optional<double> recall_at_full_precision;
  for (const PrRow& row : curve.rows) {
    if (std::abs(row.precision - 1.0) <= 1e-9) {
      if (!recall_at_full_precision || row.recall > *recall_at_full_precision) {
        recall_at_full_precision = row.recall;
      }
    }
  }
  if (!recall_at_full_precision) return std::nullopt;

  const PrRow* min_recall_row = &curve.rows.front();
  for (const PrRow& row : curve.rows) {
    if (row.recall < min_recall_row->recall) min_recall_row = &row;
  }
  return 0.5 * (*recall_at_full_precision + min_recall_row->precision);
}

/// Auxiliary metric: fraction of positive-having queries whose positive set
/// intersects their top-K candidate list.
inline std::optional<double> recall_at_k(
    const std::vector<std::pair<std::int64_t, std::vector<std::int64_t>>>&
        ranked_matches,
    const PositiveSets& ground_truth, std::size_t k) {
  std::int64_t with_positives = 0;
  std::int64_t hits = 0;
  for (const auto& [query_id, matches] : ranked_matches) {
    const auto it = ground_truth.find(query_id);
    if (it == ground_truth.end() || it->second.empty()) continue;
    ++with_positives;
    const std::size_t limit = std::min(k, matches.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (it->second.contains(matches[i])) {
        ++hits;
        break;
      }
    }
  }
  if (with_positives == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(with_positives);
}

inline void write_pr_csv(std::ostream& out, const PrCurve& curve) {
  out << "threshold,precision,recall,tp,fp,fn\n";
  out.precision(17);
  for (const PrRow& row : curve.rows) {
    out << row.threshold << ',' << row.precision << ',' << row.recall << ','
        << row.tp << ',' << row.fp << ',' << row.fn << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const std::string& sequence,
                              std::optional<double> f1,
                              std::optional<double> ep, std::int64_t queries,
                              std::int64_t gt_positive_queries) {
  out << "sequence,f1_max,ep,queries,gt_positive_queries\n";
  out.precision(17);
  out << sequence << ',';
  if (f1) out << *f1;
  out << ',';
  if (ep) out << *ep;
  out << ',' << queries << ',' << gt_positive_queries << '\n';
}

inline void write_gt_pairs_csv(std::ostream& out, const PositiveSets& gt) {
  out << "query_id,positive_id\n";
  std::vector<std::int64_t> queries;
  queries.reserve(gt.size());
  for (const auto& [query_id, _] : gt) queries.push_back(query_id);
  std::sort(queries.begin(), queries.end());
  for (std::int64_t query_id : queries) {
    std::vector<std::int64_t> ids(gt.at(query_id).begin(), gt.at(query_id).end());
    std::sort(ids.begin(), ids.end());
    for (std::int64_t id : ids) {
      out << query_id << ',' << id << '\n';
    }
  }
}

}  // namespace ndtmc
