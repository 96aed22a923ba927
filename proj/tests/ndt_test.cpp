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

#include "ndtmc/ndt.hpp"

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "test_utils.hpp"

namespace ndtmc {
namespace {

// Two-pass oracle: mean = sum/n, scatter = sum (p - mean)(p - mean)^T.
// Kept independent of CellAccumulator's one-pass update.
std::pair<Eigen::Vector3d, Eigen::Matrix3d> batch_mean_scatter(
    const std::vector<Point3>& points) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const Point3& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const Point3& p : points) {
    const Eigen::Vector3d r = p - mean;
    scatter += r * r.transpose();
  }
  return {mean, scatter};
}

void expect_close_rel(const Eigen::MatrixXd& actual,
                      const Eigen::MatrixXd& expected, double rel,
                      double abs_floor = 1e-12) {
  ASSERT_EQ(actual.rows(), expected.rows());
  ASSERT_EQ(actual.cols(), expected.cols());
  for (int r = 0; r < actual.rows(); ++r) {
    for (int c = 0; c < actual.cols(); ++c) {
      const double tolerance =
          std::max(rel * std::abs(expected(r, c)), abs_floor);
      EXPECT_NEAR(actual(r, c), expected(r, c), tolerance)
          << "entry (" << r << ", " << c << ")";
    }
  }
}

// Accumulator whose finalized covariance has the given eigenvalues in the
// given rotated frame.
CellAccumulator synthetic_accumulator(const Eigen::Vector3d& eigenvalues,
                                      const Eigen::Matrix3d& rotation,
                                      int count = 100) {
  CellAccumulator acc;
  acc.count = count;
  acc.mean = Eigen::Vector3d(1.0, -2.0, 0.5);
  acc.scatter = static_cast<double>(count) * rotation *
                eigenvalues.asDiagonal() * rotation.transpose();
  return acc;
}

TEST(CellAccumulatorTest, FirstPointSetsMeanAndZeroScatter) {
  CellAccumulator acc;
  acc.add(Point3(1, 2, 3));
  EXPECT_EQ(acc.count, 1u);
  EXPECT_EQ(acc.mean, Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(acc.scatter, Eigen::Matrix3d::Zero());
}

TEST(CellAccumulatorTest, SecondPointMatchesHandComputation) {
  CellAccumulator acc;
  acc.add(Point3(0, 0, 0));
  acc.add(Point3(2, 0, 0));
  EXPECT_EQ(acc.count, 2u);
  EXPECT_DOUBLE_EQ(acc.mean.x(), 1.0);
  EXPECT_DOUBLE_EQ(acc.mean.y(), 0.0);
  // residual (2,0,0) against the previous mean, factor (i-1)/i = 1/2.
  EXPECT_DOUBLE_EQ(acc.scatter(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(acc.scatter(1, 1), 0.0);
}

TEST(CellAccumulatorTest, OnePassMatchesBatchOracle) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> coord(-40.0, 40.0);
  std::vector<Point3> points;
  for (int i = 0; i < 1000; ++i) {
    points.emplace_back(coord(rng), coord(rng), coord(rng));
  }
  CellAccumulator acc;
  for (const Point3& p : points) acc.add(p);

  const auto [mean, scatter] = batch_mean_scatter(points);
  expect_close_rel(acc.mean, mean, 1e-9);
  expect_close_rel(acc.scatter, scatter, 1e-9);
}

TEST(CellAccumulatorTest, PermutationInvariantWithinTolerance) {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::vector<Point3> points;
  for (int i = 0; i < 500; ++i) {
    points.emplace_back(coord(rng), coord(rng), coord(rng));
  }
  CellAccumulator forward;
  for (const Point3& p : points) forward.add(p);

  std::shuffle(points.begin(), points.end(), rng);
  CellAccumulator shuffled;
  for (const Point3& p : points) shuffled.add(p);

  expect_close_rel(shuffled.mean, forward.mean, 1e-9);
  expect_close_rel(shuffled.scatter, forward.scatter, 1e-9);
}

TEST(CellAccumulatorTest, MergeEqualsJointAccumulation) {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::vector<Point3> a, b;
  for (int i = 0; i < 300; ++i) a.emplace_back(coord(rng), coord(rng), coord(rng));
  for (int i = 0; i < 170; ++i) b.emplace_back(coord(rng), coord(rng), coord(rng));

  CellAccumulator acc_a, acc_b, joint;
  for (const Point3& p : a) {
    acc_a.add(p);
    joint.add(p);
  }
  for (const Point3& p : b) {
    acc_b.add(p);
    joint.add(p);
  }
  acc_a.merge(acc_b);
  EXPECT_EQ(acc_a.count, joint.count);
  expect_close_rel(acc_a.mean, joint.mean, 1e-9);
  expect_close_rel(acc_a.scatter, joint.scatter, 1e-9);
}

TEST(FinalizeCellTest, UnderPopulatedCellIsAbsent) {
  CellAccumulator acc;
  for (int i = 0; i < 5; ++i) acc.add(Point3(i, i * 0.5, -i));
  EXPECT_FALSE(finalize_cell(acc, ShapeParams{}).has_value());
}

TEST(FinalizeCellTest, IdentityCovarianceGivesSphere) {
  const auto cell = finalize_cell(
      synthetic_accumulator(Eigen::Vector3d(1, 1, 1), Eigen::Matrix3d::Identity()),
      ShapeParams{});
  ASSERT_TRUE(cell.has_value());
  EXPECT_NEAR(cell->shape_index, 1.0, 1e-12);
  EXPECT_NEAR(cell->entropy, 4.256816, 1e-6);
  EXPECT_EQ(classify_shape_category(cell->shape_index), ShapeCategory::kSphere);
  // S = ceil(1.0 / 0.3) = 4
  EXPECT_EQ(cell->shape_class, 4);
}

TEST(FinalizeCellTest, PlaneAndLineProfiles) {
  std::mt19937_64 rng(104);
  const Eigen::Matrix3d rotation = testing::random_rotation(rng);

  const auto plane = finalize_cell(
      synthetic_accumulator(Eigen::Vector3d(4, 4, 0.16), rotation), ShapeParams{});
  ASSERT_TRUE(plane.has_value());
  EXPECT_NEAR(plane->shape_index, 0.04, 1e-9);
  EXPECT_EQ(classify_shape_category(plane->shape_index), ShapeCategory::kPlane);

  const auto line = finalize_cell(
      synthetic_accumulator(Eigen::Vector3d(4, 1, 1), rotation), ShapeParams{});
  ASSERT_TRUE(line.has_value());
  EXPECT_NEAR(line->shape_index, 4.0, 1e-9);
  EXPECT_EQ(classify_shape_category(line->shape_index), ShapeCategory::kLine);
  // g exceeds g_max = 2.4, so the class clamps to the top class.
  EXPECT_EQ(line->shape_class, ShapeParams{}.num_classes());
}

TEST(FinalizeCellTest, EigenvaluesSortedDescending) {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> ev(0.01, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cell = finalize_cell(
        synthetic_accumulator(Eigen::Vector3d(ev(rng), ev(rng), ev(rng)),
                              testing::random_rotation(rng)),
        ShapeParams{});
    ASSERT_TRUE(cell.has_value());
    EXPECT_GE(cell->eigenvalues(0), cell->eigenvalues(1));
    EXPECT_GE(cell->eigenvalues(1), cell->eigenvalues(2));
    EXPECT_GE(cell->eigenvalues(2), 0.0);
  }
}

TEST(FinalizeCellTest, DegenerateCellsAreExcluded) {
  // Collinear points: e2 = 0.
  CellAccumulator line;
  for (int i = 0; i < 20; ++i) line.add(Point3(0.1 * i, 0, 0));
  EXPECT_FALSE(finalize_cell(line, ShapeParams{}).has_value());

  // Exactly coplanar points: e3 = 0 makes the determinant vanish.
  CellAccumulator plane;
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) plane.add(Point3(coord(rng), coord(rng), 0.0));
  EXPECT_FALSE(finalize_cell(plane, ShapeParams{}).has_value());
}

TEST(FinalizeCellTest, SignificantlyNegativeEigenvalueThrows) {
  CellAccumulator acc;
  acc.count = 50;
  acc.mean = Eigen::Vector3d::Zero();
  // Not a valid scatter: one eigenvalue is clearly negative.
  acc.scatter = 50.0 * Eigen::Vector3d(1.0, 0.5, -0.1).asDiagonal();
  EXPECT_THROW(finalize_cell(acc, ShapeParams{}), NumericalError);
}

TEST(FinalizeCellTest, TinyNegativeEigenvalueIsClampedToZero) {
  CellAccumulator acc;
  acc.count = 50;
  acc.mean = Eigen::Vector3d::Zero();
  acc.scatter = 50.0 * Eigen::Vector3d(1.0, 0.5, -1e-12).asDiagonal();
  // Clamps to zero and is then excluded as degenerate, without throwing.
  EXPECT_FALSE(finalize_cell(acc, ShapeParams{}).has_value());
}

TEST(FinalizeCellTest, EntropyShiftsByLogDeterminantScale) {
  std::mt19937_64 rng(107);
  for (double c : {1.5, 2.0, 10.0, 0.25}) {
    const Eigen::Matrix3d rotation = testing::random_rotation(rng);
    const Eigen::Vector3d ev(2.0, 0.7, 0.3);
    const auto base =
        finalize_cell(synthetic_accumulator(ev, rotation), ShapeParams{});
    const auto scaled =
        finalize_cell(synthetic_accumulator(c * ev, rotation), ShapeParams{});
    ASSERT_TRUE(base && scaled);
    EXPECT_NEAR(scaled->entropy - base->entropy, 1.5 * std::log(c), 1e-9);
    EXPECT_NEAR(scaled->shape_index, base->shape_index, 1e-9);
  }
}

TEST(ShapeClassTest, CeilingOfScaledIndex) {
  ShapeParams params;
  EXPECT_EQ(shape_class_of(1.0, params), 4);
  EXPECT_EQ(shape_class_of(0.0, params), 1);   // clamped up
  EXPECT_EQ(shape_class_of(0.25, params), 1);
  EXPECT_EQ(shape_class_of(5.0, params), 8);   // clamped to the top class
  EXPECT_EQ(params.num_classes(), 8);
}

TEST(ShapeCategoryTest, FigureBoundaries) {
  EXPECT_EQ(classify_shape_category(0.04), ShapeCategory::kPlane);
  EXPECT_EQ(classify_shape_category(0.5), ShapeCategory::kEllipsoid);
  EXPECT_EQ(classify_shape_category(1.0), ShapeCategory::kSphere);
  EXPECT_EQ(classify_shape_category(4.0), ShapeCategory::kLine);
  EXPECT_EQ(classify_shape_category(0.0), ShapeCategory::kOther);
  EXPECT_EQ(classify_shape_category(9.0), ShapeCategory::kOther);
}

TEST(VoxelKeyTest, FloorDivisionHandlesNegatives) {
  EXPECT_EQ(voxel_key_of(Point3(-0.1, 0.1, 2.0), 2.0),
            (VoxelKey{-1, 0, 1}));
  EXPECT_EQ(voxel_key_of(Point3(-2.0, -0.1, 3.9), 2.0),
            (VoxelKey{-1, -1, 1}));
}

TEST(BuildGridTest, SingleVoxelHoldsAllPoints) {
  std::mt19937_64 rng(108);
  std::uniform_real_distribution<double> coord(0.1, 1.9);
  PointCloud cloud;
  for (int i = 0; i < 100; ++i) {
    cloud.points.emplace_back(coord(rng), coord(rng), coord(rng));
  }
  const NdtGrid grid = build_grid(cloud, 2.0);
  ASSERT_EQ(grid.size(), 1u);
  EXPECT_EQ(grid.cells.begin()->second.count, 100u);
  EXPECT_EQ(grid.cells.begin()->first, (VoxelKey{0, 0, 0}));
}

TEST(BuildGridTest, SeparatedClustersMatchBatchMeans) {
  std::mt19937_64 rng(109);
  std::normal_distribution<double> spread(0.0, 0.3);
  PointCloud cloud;
  std::vector<Point3> cluster_a, cluster_b;
  for (int i = 0; i < 50; ++i) {
    cluster_a.emplace_back(1.0 + spread(rng), 1.0 + spread(rng), 1.0 + spread(rng));
    cluster_b.emplace_back(11.0 + spread(rng), 1.0 + spread(rng), 1.0 + spread(rng));
  }
  cloud.points = cluster_a;
  cloud.points.insert(cloud.points.end(), cluster_b.begin(), cluster_b.end());

  const NdtGrid grid = build_grid(cloud, 2.0);
  ASSERT_EQ(grid.size(), 2u);
  const auto [mean_a, scatter_a] = batch_mean_scatter(cluster_a);
  const auto [mean_b, scatter_b] = batch_mean_scatter(cluster_b);
  const NdtCell& cell_a = grid.cells.at(voxel_key_of(mean_a, 2.0));
  const NdtCell& cell_b = grid.cells.at(voxel_key_of(mean_b, 2.0));
  expect_close_rel(cell_a.mean, mean_a, 1e-9);
  expect_close_rel(cell_b.mean, mean_b, 1e-9);
  expect_close_rel(cell_a.covariance, scatter_a / 50.0, 1e-9);
}

TEST(BuildGridTest, UnderPopulatedVoxelsAreOmitted) {
  PointCloud cloud;
  cloud.points = {{0.2, 0.3, 0.1}, {0.8, 0.4, 0.5}, {1.1, 1.2, 0.9}};
  EXPECT_TRUE(build_grid(cloud, 2.0).empty());
}

TEST(BuildGridTest, EmptyCloudGivesEmptyGrid) {
  EXPECT_TRUE(build_grid(PointCloud{}, 2.0).empty());
}

TEST(BuildGridTest, RejectsNonPositiveResolution) {
  EXPECT_THROW(build_grid(PointCloud{}, 0.0), std::invalid_argument);
}

TEST(BuildGridTest, MeanKeyMatchesCellKey) {
  std::mt19937_64 rng(110);
  std::uniform_real_distribution<double> coord(-30.0, 30.0);
  PointCloud cloud;
  for (int i = 0; i < 20000; ++i) {
    cloud.points.emplace_back(coord(rng), coord(rng), coord(rng));
  }
  const NdtGrid grid = build_grid(cloud, 2.0);
  ASSERT_GT(grid.size(), 0u);
  for (const auto& [key, cell] : grid.cells) {
    EXPECT_EQ(voxel_key_of(cell.mean, grid.resolution), key);
  }
}

}  // namespace
}  // namespace ndtmc
