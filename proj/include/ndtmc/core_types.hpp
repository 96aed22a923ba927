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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ndtmc {

using Point3 = Eigen::Vector3d;

/// A loaded lidar scan. Coordinates are meters in the sensor (or world)
/// frame, x forward, y left, z up. Non-finite returns are dropped at load
/// time; `dropped_non_finite` keeps the count for diagnostics.
struct PointCloud {
  std::vector<Point3> points;
  std::string source_id;
  std::uint64_t dropped_non_finite = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Rigid body pose: p_world = rotation * p_local + translation.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  std::int64_t frame_index = 0;
  std::optional<double> timestamp;

  static constexpr double kOrthonormalTolerance = 1e-6;

  /// True when |R^T R - I|_max and |det(R) - 1| are both within tolerance.
  bool is_valid(double tolerance = kOrthonormalTolerance) const {
    const Eigen::Matrix3d residual =
        rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
    if (residual.cwiseAbs().maxCoeff() > tolerance) return false;
    return std::abs(rotation.determinant() - 1.0) <= tolerance;
  }

  Point3 apply(const Point3& p) const { return rotation * p + translation; }

  Pose inverse() const {
    Pose inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(rotation.transpose() * translation);
    inv.frame_index = frame_index;
    inv.timestamp = timestamp;
    return inv;
  }
};

/// Applies R*p + t to every point; order and source id are preserved.
inline PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose) {
  PointCloud out;
  out.source_id = cloud.source_id;
  out.dropped_non_finite = cloud.dropped_non_finite;
  out.points.reserve(cloud.points.size());
  for (const Point3& p : cloud.points) {
    out.points.push_back(pose.apply(p));
  }
  return out;
}

}  // namespace ndtmc
