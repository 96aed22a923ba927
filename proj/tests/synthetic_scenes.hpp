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

#include <random>

#include "ndtmc/core_types.hpp"

// Synthetic lidar-like scenes for tests: a dense ground disk plus pillars,
// walls, and blobs. Structure counts and shapes are drawn per scene, so two
// seeds differ in their structure MIX (which the shape-class histogram can
// see), not just in placement. Voxels need tens of points for stable
// Gaussians, hence the high ground density; structures keep a minimum
// radius so they sit where polar sectors are wider than a voxel. Layouts
// are deterministic per seed.

namespace ndtmc::testing {

struct SceneSpec {
  double ground_density = 55.0;  ///< points per m^2; tens per voxel
  double min_ground_radius = 16.0;
  double max_ground_radius = 40.0;
  int min_thin_pillars = 2, max_thin_pillars = 48;
  int min_thick_pillars = 0, max_thick_pillars = 24;
  int min_walls = 0, max_walls = 4;
  int min_blobs = 0, max_blobs = 40;
  int min_rubble_patches = 0, max_rubble_patches = 4;
  int points_per_pillar = 500;
  int points_per_wall_meter = 40;
  int points_per_blob = 1000;
  double min_structure_radius = 10.0;
  double max_structure_radius = 36.0;
  double jitter = 0.03;
};

/// Desk-scale scenes pair naturally with 1 m voxels (the on-road profile
/// uses 2 m on full-size streets).
inline constexpr double kSceneResolution = 1.0;

inline PointCloud make_structured_scene(std::mt19937_64& rng,
                                        const SceneSpec& spec = {}) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> radius(spec.min_structure_radius,
                                                spec.max_structure_radius);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, spec.jitter);

  auto draw = [&](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  const int thin_pillars = draw(spec.min_thin_pillars, spec.max_thin_pillars);
  const int thick_pillars = draw(spec.min_thick_pillars, spec.max_thick_pillars);
  const int wall_count = draw(spec.min_walls, spec.max_walls);
  const int blob_count = draw(spec.min_blobs, spec.max_blobs);
  const int rubble_count = draw(spec.min_rubble_patches, spec.max_rubble_patches);
  const double ground_radius =
      spec.min_ground_radius +
      (spec.max_ground_radius - spec.min_ground_radius) * unit(rng);
  const int ground_points = static_cast<int>(
      spec.ground_density * M_PI * ground_radius * ground_radius);

  PointCloud cloud;
  cloud.source_id = "synthetic";
  cloud.points.reserve(ground_points + 50000);

  // Ground disk near z = -1.7 (sensor height above the road). Its extent
  // varies per scene, like road places differ from plazas.
  for (int i = 0; i < ground_points; ++i) {
    const double a = angle(rng);
    const double r = ground_radius * std::sqrt(unit(rng));
    cloud.points.emplace_back(r * std::cos(a) + noise(rng),
                              r * std::sin(a) + noise(rng),
                              -1.7 + noise(rng));
  }

  // Pillars: thin ones read as lines, thick ones as squat ellipsoids.
  auto add_pillars = [&](int count, double footprint_sigma) {
    std::normal_distribution<double> footprint(0.0, footprint_sigma);
    for (int p = 0; p < count; ++p) {
      const double a = angle(rng);
      const double r = radius(rng);
      const double cx = r * std::cos(a);
      const double cy = r * std::sin(a);
      const double height = 2.0 + 4.0 * unit(rng);
      for (int i = 0; i < spec.points_per_pillar; ++i) {
        cloud.points.emplace_back(cx + footprint(rng), cy + footprint(rng),
                                  -1.7 + height * unit(rng));
      }
    }
  };
  add_pillars(thin_pillars, 0.12);
  add_pillars(thick_pillars, 0.38);

  // Walls: vertical planes of random length and orientation.
  for (int w = 0; w < wall_count; ++w) {
    const double a = angle(rng);
    const double r = radius(rng);
    const double cx = r * std::cos(a);
    const double cy = r * std::sin(a);
    const double heading = angle(rng);
    const double length = 8.0 + 16.0 * unit(rng);
    const double height = 2.5 + 2.0 * unit(rng);
    const int count = static_cast<int>(length) * spec.points_per_wall_meter;
    for (int i = 0; i < count; ++i) {
      const double along = (unit(rng) - 0.5) * length;
      cloud.points.emplace_back(
          cx + along * std::cos(heading) + noise(rng),
          cy + along * std::sin(heading) + noise(rng),
          -1.7 + height * unit(rng));
    }
  }

  // Rubble patches: rough ground whose vertical spread pushes cells into
  // the mid shape classes.
  for (int patch = 0; patch < rubble_count; ++patch) {
    const double a = angle(rng);
    const double r = radius(rng);
    const double cx = r * std::cos(a);
    const double cy = r * std::sin(a);
    const double patch_radius = 4.0 + 5.0 * unit(rng);
    std::normal_distribution<double> rough(0.0, 0.25);
    const int count = static_cast<int>(spec.ground_density * M_PI *
                                       patch_radius * patch_radius);
    for (int i = 0; i < count; ++i) {
      const double pa = angle(rng);
      const double pr = patch_radius * std::sqrt(unit(rng));
      cloud.points.emplace_back(cx + pr * std::cos(pa), cy + pr * std::sin(pa),
                                -1.2 + rough(rng));
    }
  }

  // Roundish blobs (bushes, piles) with a per-blob spread.
  for (int b = 0; b < blob_count; ++b) {
    std::normal_distribution<double> spread(0.0, 0.6 + 0.5 * unit(rng));
    const double a = angle(rng);
    const double r = radius(rng);
    const double cx = r * std::cos(a);
    const double cy = r * std::sin(a);
    const double cz = -0.9 + 1.5 * unit(rng);
    for (int i = 0; i < spec.points_per_blob; ++i) {
      cloud.points.emplace_back(cx + spread(rng), cy + spread(rng),
                                cz + spread(rng));
    }
  }

  return cloud;
}

inline PointCloud rotate_scene_z(const PointCloud& cloud, double angle) {
  PointCloud out;
  out.source_id = cloud.source_id;
  out.points.reserve(cloud.points.size());
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (const Point3& p : cloud.points) {
    out.points.emplace_back(c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z());
  }
  return out;
}

inline PointCloud jitter_scene(const PointCloud& cloud, std::mt19937_64& rng,
                               double sigma) {
  std::normal_distribution<double> noise(0.0, sigma);
  PointCloud out;
  out.source_id = cloud.source_id;
  out.points.reserve(cloud.points.size());
  for (const Point3& p : cloud.points) {
    out.points.emplace_back(p.x() + noise(rng), p.y() + noise(rng),
                            p.z() + noise(rng));
  }
  return out;
}

inline PointCloud drop_points(const PointCloud& cloud, std::mt19937_64& rng,
                              double fraction) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointCloud out;
  out.source_id = cloud.source_id;
  out.points.reserve(cloud.points.size());
  for (const Point3& p : cloud.points) {
    if (unit(rng) >= fraction) out.points.push_back(p);
  }
  return out;
}

}  // namespace ndtmc::testing
