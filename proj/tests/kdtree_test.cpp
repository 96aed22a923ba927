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

#include "ndtmc/kdtree.hpp"

#include <random>

#include <gtest/gtest.h>

namespace ndtmc {
namespace {

// Brute-force oracle with the same (distance, index) tie rule the tree
// promises. Lives only in tests; the tree must reproduce it exactly.
std::vector<Neighbor> linear_scan_knn(const std::vector<Eigen::VectorXd>& points,
                                      const Eigen::VectorXd& query,
                                      std::size_t k) {
  std::vector<Neighbor> all;
  all.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    all.push_back({i, (points[i] - query).squaredNorm()});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.squared_distance != b.squared_distance) {
      return a.squared_distance < b.squared_distance;
    }
    return a.index < b.index;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

std::vector<Eigen::VectorXd> random_points(std::mt19937_64& rng, int count,
                                           int dim, double range = 1.0) {
  std::uniform_real_distribution<double> coord(-range, range);
  std::vector<Eigen::VectorXd> points;
  points.reserve(count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd p(dim);
    for (int d = 0; d < dim; ++d) p(d) = coord(rng);
    points.push_back(p);
  }
  return points;
}

void expect_same_neighbors(const std::vector<Neighbor>& actual,
                           const std::vector<Neighbor>& expected) {
  ASSERT_EQ(actual.size(), expected.size());
  for (std::size_t i = 0; i < actual.size(); ++i) {
    EXPECT_EQ(actual[i].index, expected[i].index) << "rank " << i;
    EXPECT_DOUBLE_EQ(actual[i].squared_distance, expected[i].squared_distance);
  }
}

TEST(KdTreeTest, SinglePointIsAlwaysReturned) {
  Eigen::VectorXd p(3);
  p << 1, 2, 3;
  const KdTree tree(std::vector<Eigen::VectorXd>{p});
  Eigen::VectorXd q(3);
  q << -10, 0, 4;
  const auto result = tree.knn(q, 5);
  ASSERT_EQ(result.size(), 1u);
  EXPECT_EQ(result[0].index, 0u);
  EXPECT_DOUBLE_EQ(result[0].squared_distance, (p - q).squaredNorm());
}

TEST(KdTreeTest, MatchesLinearScanOnRandomData) {
  std::mt19937_64 rng(301);
  for (int trial = 0; trial < 25; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 10);
    const int count = 1 + static_cast<int>(rng() % 400);
    const auto points = random_points(rng, count, dim);
    const KdTree tree(points);
    for (int q = 0; q < 10; ++q) {
      const auto query = random_points(rng, 1, dim, 1.5).front();
      const std::size_t k = 1 + rng() % 15;
      expect_same_neighbors(tree.knn(query, k),
                            linear_scan_knn(points, query, k));
    }
  }
}

TEST(KdTreeTest, DuplicatePointsAreAllRetrievable) {
  Eigen::VectorXd p(2);
  p << 0.5, -0.5;
  std::vector<Eigen::VectorXd> points(7, p);
  Eigen::VectorXd other(2);
  other << 3, 3;
  points.push_back(other);

  const KdTree tree(points);
  const auto result = tree.knn(p, 7);
  ASSERT_EQ(result.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(result[i].index, i);  // ties resolved by index
    EXPECT_DOUBLE_EQ(result[i].squared_distance, 0.0);
  }
}

TEST(KdTreeTest, TiesOnGridResolveByIndexLikeOracle) {
  // Integer lattice: many equidistant neighbors.
  std::vector<Eigen::VectorXd> points;
  for (int x = -3; x <= 3; ++x) {
    for (int y = -3; y <= 3; ++y) {
      Eigen::VectorXd p(2);
      p << x, y;
      points.push_back(p);
    }
  }
  const KdTree tree(points);
  Eigen::VectorXd q(2);
  q << 0, 0;
  for (std::size_t k : {1u, 4u, 5u, 9u, 13u, 25u}) {
    expect_same_neighbors(tree.knn(q, k), linear_scan_knn(points, q, k));
  }
}

TEST(KdTreeTest, KLargerThanSizeReturnsEverything) {
  std::mt19937_64 rng(302);
  const auto points = random_points(rng, 9, 4);
  const KdTree tree(points);
  const auto query = random_points(rng, 1, 4).front();
  EXPECT_EQ(tree.knn(query, 50).size(), 9u);
}

TEST(KdTreeTest, EmptyInputIsRejected) {
  EXPECT_THROW(KdTree(std::vector<Eigen::VectorXd>{}), std::invalid_argument);
}

TEST(KdTreeTest, DimensionMismatchIsRejected) {
  std::mt19937_64 rng(303);
  const KdTree tree(random_points(rng, 10, 3));
  Eigen::VectorXd q(4);
  q.setZero();
  EXPECT_THROW(tree.knn(q, 1), std::invalid_argument);
}

TEST(KdTreeTest, HighDuplicationStress) {
  std::mt19937_64 rng(304);
  // Coordinates snapped to a coarse lattice force many exact ties.
  std::uniform_int_distribution<int> lattice(-2, 2);
  std::vector<Eigen::VectorXd> points;
  for (int i = 0; i < 600; ++i) {
    Eigen::VectorXd p(3);
    p << lattice(rng), lattice(rng), lattice(rng);
    points.push_back(p);
  }
  const KdTree tree(points);
  for (int q = 0; q < 40; ++q) {
    Eigen::VectorXd query(3);
    query << lattice(rng), lattice(rng), lattice(rng);
    expect_same_neighbors(tree.knn(query, 12),
                          linear_scan_knn(points, query, 12));
  }
}

}  // namespace
}  // namespace ndtmc
