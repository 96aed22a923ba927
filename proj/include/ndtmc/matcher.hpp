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

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "ndtmc/core_types.hpp"
#include "ndtmc/descriptor.hpp"
#include "ndtmc/kdtree.hpp"

// Retrieval and scoring. Candidates come from an exact kd-tree over the
// geometric keys; the sector keys give a cheap estimate of the yaw-induced
// column shift; the final score is a shift-aligned correlation distance
// over descriptor columns, minimized over a shift window.

namespace ndtmc {

/// Circular column rotation: result.col(j) = m.col((j + k) mod N). A scene
/// yawed counterclockwise by k sector widths turns descriptor D into
/// shift_columns(D, N - k), and matching the yawed frame against the
/// original recovers shift k.
inline Eigen::MatrixXd shift_columns(const Eigen::MatrixXd& m, int k) {
  const int cols = static_cast<int>(m.cols());
  k = ((k % cols) + cols) % cols;
  if (k == 0) return m;
  Eigen::MatrixXd shifted(m.rows(), cols);
  for (int j = 0; j < cols; ++j) {
    shifted.col(j) = m.col((j + k) % cols);
  }
  return shifted;
}

/// Correlation distance between two descriptors with the query columns
/// rotated by k: 1 - mean_i cos(q_centered^{i+k}, c_centered^i), where each
/// column is centered by its descriptor's global element mean. Columns with
/// zero centered norm contribute cosine 0. Range [0, 2]; 0 iff every column
/// pair is perfectly correlated at this shift.
inline double column_shift_distance(const Descriptor& query,
                                    const Descriptor& candidate, int k) {
  if (query.matrix.rows() != candidate.matrix.rows() ||
      query.matrix.cols() != candidate.matrix.cols()) {
    throw std::invalid_argument("descriptor dimension mismatch");
  }
  const int cols = static_cast<int>(query.matrix.cols());
  if (k < 0 || k >= cols) {
    throw std::invalid_argument("shift must lie in [0, sector count)");
  }

  const double query_mean = query.matrix.mean();
  const double candidate_mean = candidate.matrix.mean();

  double cosine_sum = 0.0;
  for (int i = 0; i < cols; ++i) {
    const Eigen::VectorXd q =
        query.matrix.col((i + k) % cols).array() - query_mean;
    const Eigen::VectorXd c = candidate.matrix.col(i).array() - candidate_mean;
    const double qn = q.norm();
    const double cn = c.norm();
    if (qn == 0.0 || cn == 0.0) continue;  // zero-norm column: cosine 0
    cosine_sum += q.dot(c) / (qn * cn);
  }
  return 1.0 - cosine_sum / cols;
}

struct Alignment {
  int shift = 0;
  double distance = 0.0;
};

/// Minimizes column_shift_distance over the given shifts (all of them when
/// the window is empty); ties break toward the smaller shift.
inline Alignment best_alignment(const Descriptor& query,
                                const Descriptor& candidate,
                                const std::vector<int>& window = {}) {
  const int cols = static_cast<int>(query.matrix.cols());
  Alignment best{0, std::numeric_limits<double>::infinity()};
  auto try_shift = [&](int k) {
    const double d = column_shift_distance(query, candidate, k);
    if (d < best.distance || (d == best.distance && k < best.shift)) {
      best = {k, d};
    }
  };
  if (window.empty()) {
    for (int k = 0; k < cols; ++k) try_shift(k);
  } else {
    for (int k : window) try_shift(((k % cols) + cols) % cols);
  }
  return best;
}

/// Shifts within +/- half_width (circular) of a center estimate, ascending.
inline std::vector<int> shift_window(int center, int half_width, int cols) {
  std::vector<int> window;
  if (2 * half_width + 1 >= cols) {
    window.resize(cols);
    for (int k = 0; k < cols; ++k) window[k] = k;
    return window;
  }
  for (int offset = -half_width; offset <= half_width; ++offset) {
    window.push_back(((center + offset) % cols + cols) % cols);
  }
  std::sort(window.begin(), window.end());
  return window;
}

/// Argmax over k of the circular cross-correlation of the two centered
/// sector keys; ties break toward the smaller shift. Recovers k exactly
/// when one key is the other rotated by k.
inline int estimate_shift(const SectorKey& query, const SectorKey& candidate) {
  if (query.vector.size() != candidate.vector.size()) {
    throw std::invalid_argument("sector key dimension mismatch");
  }
  const int n = static_cast<int>(query.vector.size());
  const Eigen::VectorXd q = query.vector.array() - query.vector.mean();
  const Eigen::VectorXd c = candidate.vector.array() - candidate.vector.mean();

  int best_shift = 0;
  double best_correlation = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    double correlation = 0.0;
    for (int i = 0; i < n; ++i) {
      correlation += q((i + k) % n) * c(i);
    }
    if (correlation > best_correlation) {
      best_correlation = correlation;
      best_shift = k;
    }
  }
  return best_shift;
}

struct DatabaseEntry {
  std::uint64_t frame_id = 0;
  Descriptor descriptor;
  GeometricKey geometric;
  SectorKey sector;
  std::optional<Pose> pose;
};

struct MatchResult {
  std::uint64_t candidate_id = 0;   ///< frame id of the winning entry
  std::size_t entry_index = 0;      ///< position in the database
  int shift = 0;                    ///< recovered column shift k*
  double distance = 0.0;            ///< g_s, in [0, 2]
  bool accepted = false;            ///< distance <= threshold
};

struct QueryParams {
  int knn = 10;                 ///< K candidates from the geometric-key index
  double threshold = 0.6;       ///< acceptance bound on the distance
  int window_half_width = 3;    ///< alignment window around the estimate
  bool exhaustive = false;      ///< score all shifts instead of a window
  /// When positive, candidates with |frame_id - query_frame_id| below this
  /// gap are skipped (same-sequence near-in-time matches).
  std::int64_t exclude_gap = 0;
};

/// Append-only store of descriptor entries plus an exact kd-tree over the
/// geometric keys. Build once, then query concurrently; queries are
/// read-only and return results identical to serial execution.
class DescriptorDatabase {
 public:
  void add(DatabaseEntry entry) {
    entries_.push_back(std::move(entry));
    index_.reset();
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool index_built() const { return index_.has_value(); }
  const std::vector<DatabaseEntry>& entries() const { return entries_; }
  const DatabaseEntry& entry(std::size_t i) const { return entries_.at(i); }

  void build_index() {
    if (entries_.empty()) {
      throw std::logic_error("cannot index an empty descriptor database");
    }
    std::vector<Eigen::VectorXd> keys;
    keys.reserve(entries_.size());
    for (const DatabaseEntry& e : entries_) {
      keys.push_back(e.geometric.histogram);
    }
    index_.emplace(std::move(keys));
  }

  std::vector<Neighbor> nearest_keys(const GeometricKey& key,
                                     std::size_t k) const {
    require_index();
    return index_->knn(key.histogram, k);
  }

  std::optional<MatchResult> query(const Descriptor& descriptor,
                                   const GeometricKey& geometric,
                                   const SectorKey& sector,
                                   const QueryParams& params,
                                   std::optional<std::uint64_t> query_frame_id =
                                       std::nullopt) const {
    require_index();
    if (entries_.empty()) return std::nullopt;

    // Over-fetch when an exclusion gap may eat candidates.
    std::size_t k = static_cast<std::size_t>(std::max(params.knn, 1));
    if (params.exclude_gap > 0) k = entries_.size();
    const auto candidates = nearest_keys(geometric, k);

    std::optional<MatchResult> best;
    std::size_t scored = 0;
    for (const Neighbor& n : candidates) {
      if (scored == static_cast<std::size_t>(std::max(params.knn, 1))) break;
      const DatabaseEntry& entry = entries_[n.index];
      if (params.exclude_gap > 0 && query_frame_id) {
        const auto gap = std::abs(static_cast<std::int64_t>(entry.frame_id) -
                                  static_cast<std::int64_t>(*query_frame_id));
        if (gap < params.exclude_gap) continue;
      }
      ++scored;

      std::vector<int> window;
      if (!params.exhaustive) {
        const int estimate = estimate_shift(sector, entry.sector);
        window = shift_window(estimate, params.window_half_width,
                              descriptor.sectors());
      }
      const Alignment alignment =
          best_alignment(descriptor, entry.descriptor, window);
      if (!best || alignment.distance < best->distance ||
          (alignment.distance == best->distance && n.index < best->entry_index)) {
        best = MatchResult{entry.frame_id, n.index, alignment.shift,
                           alignment.distance,
                           alignment.distance <= params.threshold};
      }
    }
    return best;
  }

  std::optional<MatchResult> query(const ExtractionResult& extraction,
                                   const QueryParams& params) const {
    return query(extraction.descriptor, extraction.geometric, extraction.sector,
                 params, extraction.descriptor.frame_id);
  }

 private:
  void require_index() const {
    if (!index_) {
      throw std::logic_error("descriptor database index has not been built");
    }
  }

  std::vector<DatabaseEntry> entries_;
  std::optional<KdTree> index_;
};

}  // namespace ndtmc
