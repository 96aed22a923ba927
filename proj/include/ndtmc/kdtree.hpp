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
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

// Exact k-nearest-neighbor search under the Euclidean metric. Construction
// splits at the median of the dimension with the largest spread; queries
// prune with the usual hyperplane bound and never approximate. Distance
// ties are resolved toward the smaller point index, so results are fully
// deterministic and reproducible by a linear scan.

namespace ndtmc {

struct Neighbor {
  std::size_t index = 0;
  double squared_distance = 0.0;
};

class KdTree {
 public:
  KdTree() = default;

  explicit KdTree(std::vector<Eigen::VectorXd> points) : points_(std::move(points)) {
    if (points_.empty()) {
      throw std::invalid_argument("cannot build kd-tree over an empty point set");
    }
    dim_ = static_cast<int>(points_.front().size());
    for (const auto& p : points_) {
      if (p.size() != dim_) {
        throw std::invalid_argument("kd-tree points must share one dimension");
      }
    }
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, points_.size());
  }

  std::size_t size() const { return points_.size(); }
  int dimension() const { return dim_; }

  /// The k nearest points, sorted by (distance, index) ascending. Returns
  /// fewer than k neighbors only when the tree holds fewer points.
  std::vector<Neighbor> knn(const Eigen::VectorXd& query, std::size_t k) const {
    if (query.size() != dim_) {
      throw std::invalid_argument("kd-tree query dimension mismatch");
    }
    if (k == 0 || points_.empty()) return {};
    k = std::min(k, points_.size());

    std::vector<Neighbor> heap;  // max-heap on (distance, index)
    heap.reserve(k + 1);
    search(root_, query, k, heap);
    std::sort_heap(heap.begin(), heap.end(), worse_than);
    return heap;
  }

 private:
  static constexpr std::size_t kLeafSize = 8;
  static constexpr int kNoChild = -1;

  struct Node {
    int split_dim = 0;
    double split_value = 0.0;
    int left = kNoChild;
    int right = kNoChild;
    std::size_t begin = 0;  // leaf range into order_
    std::size_t end = 0;
    bool is_leaf() const { return left == kNoChild && right == kNoChild; }
  };

  static bool worse_than(const Neighbor& a, const Neighbor& b) {
    if (a.squared_distance != b.squared_distance) {
      return a.squared_distance < b.squared_distance;
    }
    return a.index < b.index;  // equal distance: larger index is worse
  }

  int build(std::size_t begin, std::size_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin <= kLeafSize) {
      nodes_.push_back(node);
      return static_cast<int>(nodes_.size() - 1);
    }

    // Dimension with the largest spread over this range.
    int best_dim = 0;
    double best_spread = -1.0;
    for (int d = 0; d < dim_; ++d) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t i = begin; i < end; ++i) {
        const double v = points_[order_[i]](d);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = d;
      }
    }
    if (best_spread <= 0.0) {
      // All points identical over every dimension; keep them in one leaf.
      nodes_.push_back(node);
      return static_cast<int>(nodes_.size() - 1);
    }

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end,
                     [&](std::size_t a, std::size_t b) {
                       return points_[a](best_dim) < points_[b](best_dim);
                     });
    node.split_dim = best_dim;
    node.split_value = points_[order_[mid]](best_dim);

    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  void consider(std::size_t point_index, const Eigen::VectorXd& query,
                std::size_t k, std::vector<Neighbor>& heap) const {
    const double d2 = (points_[point_index] - query).squaredNorm();
    const Neighbor candidate{point_index, d2};
    if (heap.size() < k) {
      heap.push_back(candidate);
      std::push_heap(heap.begin(), heap.end(), worse_than);
    } else if (worse_than(candidate, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), worse_than);
      heap.back() = candidate;
      std::push_heap(heap.begin(), heap.end(), worse_than);
    }
  }

  void search(int node_index, const Eigen::VectorXd& query, std::size_t k,
              std::vector<Neighbor>& heap) const {
    const Node& node = nodes_[node_index];
    if (node.is_leaf()) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        consider(order_[i], query, k, heap);
      }
      return;
    }

    const double delta = query(node.split_dim) - node.split_value;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, query, k, heap);
    // The far side can still hold an equal-distance neighbor with a smaller
    // index, so prune only on a strict bound violation.
    if (heap.size() < k || delta * delta <= heap.front().squared_distance) {
      search(far, query, k, heap);
    }
  }

  std::vector<Eigen::VectorXd> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  int root_ = kNoChild;
  int dim_ = 0;
};

}  // namespace ndtmc
