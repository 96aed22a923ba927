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
#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

#include "ndtmc/core_types.hpp"
#include "ndtmc/errors.hpp"
#include "ndtmc/little_endian.hpp"
#include "ndtmc/ndt.hpp"
#include "ndtmc/ndt_io.hpp"

// Rolling NDT map over a posed scan stream. Scans merge into world-frame
// voxel accumulators; every `place_length` meters of x-y trajectory a place
// is cut: the map is re-expressed in the anchor pose (the member frame
// nearest the segment's arc midpoint), cropped to `crop_radius`, and
// finalized. The map slides rather than tumbles: voxels survive place
// boundaries until they leave the crop radius.

namespace ndtmc {

struct SubmapConfig {
  double place_length = 4.0;   ///< meters of x-y trajectory per place
  double crop_radius = 80.0;   ///< x-y crop around the anchor, meters
  double update_period = 1.0;  ///< min seconds between merged scans
                               ///< (applies only when timestamps are present)
};

struct PlaceRecord {
  std::uint64_t place_id = 0;
  Pose anchor;
  std::uint64_t first_frame = 0;
  std::uint64_t last_frame = 0;
  NdtGrid grid;  ///< expressed in the anchor frame
};

/// Re-expresses a grid in another frame: means map through the pose, the
/// scatter rotates as R * C * R^T. Cells whose transformed means collide in
/// one voxel are merged. Derived quantities are recomputed, so g, S, and E
/// are preserved up to roundoff (they depend only on eigenvalues, which the
/// similarity transform keeps).
inline NdtGrid transform_grid(const NdtGrid& grid, const Pose& pose,
                              const ShapeParams& params) {
  VoxelAccumulatorMap accumulators;
  accumulators.reserve(grid.cells.size());
  for (const auto& [key, cell] : grid.cells) {
    CellAccumulator acc;
    acc.count = cell.count;
    acc.mean = pose.apply(cell.mean);
    acc.scatter = static_cast<double>(cell.count) * pose.rotation *
                  cell.covariance * pose.rotation.transpose();
    accumulators[voxel_key_of(acc.mean, grid.resolution)].merge(acc);
  }
  // A merged map may not satisfy min_points per original cell, but every
  // source cell already did; keep the same finalize path.
  return finalize_grid(accumulators, grid.resolution, params);
}

class SubmapBuilder {
 public:
  SubmapBuilder(const SubmapConfig& config, double resolution,
                const ShapeParams& shape)
      : config_(config), resolution_(resolution), shape_(shape) {}

  /// Merges a posed scan into the rolling map. Poses must arrive in frame
  /// order. When both this and the previous merged pose carry timestamps,
  /// scans arriving within `update_period` seconds are skipped.
  void accumulate(const PointCloud& scan, const Pose& pose) {
    if (last_frame_ && pose.frame_index <= *last_frame_) {
      throw std::invalid_argument(
          "submap poses must arrive in increasing frame order (got frame " +
          std::to_string(pose.frame_index) + " after " +
          std::to_string(*last_frame_) + ")");
    }
    last_frame_ = pose.frame_index;

    if (config_.update_period > 0.0 && pose.timestamp && last_timestamp_ &&
        *pose.timestamp - *last_timestamp_ < config_.update_period) {
      return;
    }

    if (previous_translation_) {
      arc_length_ +=
          (pose.translation.head<2>() - previous_translation_->head<2>()).norm();
    }
    previous_translation_ = pose.translation;
    last_timestamp_ = pose.timestamp;

    accumulate_cloud(accumulators_, transform_cloud(scan, pose), resolution_);
    members_.push_back({pose, arc_length_});
  }

  double arc_length() const { return arc_length_; }
  std::size_t active_voxels() const { return accumulators_.size(); }

  /// Cuts a place once the segment has covered `place_length` meters;
  /// returns nullopt until then. Emitting resets the arc counter but keeps
  /// the map voxels that are still within the crop radius.
  std::optional<PlaceRecord> emit_place() {
    if (members_.empty() || arc_length_ < config_.place_length) {
      return std::nullopt;
    }

    const double midpoint = arc_length_ / 2.0;
    const Member* anchor_member = &members_.front();
    for (const Member& m : members_) {
      if (std::abs(m.arc_position - midpoint) <
          std::abs(anchor_member->arc_position - midpoint)) {
        anchor_member = &m;
      }
    }
    const Pose world_to_anchor = anchor_member->pose.inverse();

    VoxelAccumulatorMap local;
    local.reserve(accumulators_.size());
    for (const auto& [key, acc] : accumulators_) {
      CellAccumulator moved;
      moved.count = acc.count;
      moved.mean = world_to_anchor.apply(acc.mean);
      if (moved.mean.head<2>().norm() > config_.crop_radius) continue;
      moved.scatter = world_to_anchor.rotation * acc.scatter *
                      world_to_anchor.rotation.transpose();
      local[voxel_key_of(moved.mean, resolution_)].merge(moved);
    }

    PlaceRecord place;
    place.place_id = next_place_id_++;
    place.anchor = anchor_member->pose;
    place.first_frame = static_cast<std::uint64_t>(members_.front().pose.frame_index);
    place.last_frame = static_cast<std::uint64_t>(members_.back().pose.frame_index);
    place.grid = finalize_grid(local, resolution_, shape_);

    // Slide: drop voxels that fell behind the crop radius of the latest pose.
    const Eigen::Vector2d here = members_.back().pose.translation.head<2>();
    std::erase_if(accumulators_,
                  [&](const std::pair<const VoxelKey, CellAccumulator>& item) {
                    return (item.second.mean.head<2>() - here).norm() >
                           config_.crop_radius;
                  });

    arc_length_ = 0.0;
    members_.clear();
    return place;
  }

 private:
  struct Member {
    Pose pose;
    double arc_position = 0.0;
  };

  SubmapConfig config_;
  double resolution_;
  ShapeParams shape_;
  VoxelAccumulatorMap accumulators_;
  std::vector<Member> members_;
  double arc_length_ = 0.0;
  std::optional<std::int64_t> last_frame_;
  std::optional<double> last_timestamp_;
  std::optional<Eigen::Vector3d> previous_translation_;
  std::uint64_t next_place_id_ = 0;
};

// Places file: header {magic "NDTP", version u16, place count u64}; per
// place {place_id u64, anchor [R|t] row-major 12 x f64, frame range
// 2 x u64, NDT grid block}.

inline constexpr char kPlacesMagic[5] = "NDTP";
inline constexpr std::uint16_t kPlacesVersion = 1;

inline void save_places(std::ostream& out,
                        const std::vector<PlaceRecord>& places) {
  io::write_magic(out, kPlacesMagic);
  io::write_u16(out, kPlacesVersion);
  io::write_u64(out, places.size());
  for (const PlaceRecord& place : places) {
    io::write_u64(out, place.place_id);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) io::write_f64(out, place.anchor.rotation(r, c));
      io::write_f64(out, place.anchor.translation(r));
    }
    io::write_u64(out, place.first_frame);
    io::write_u64(out, place.last_frame);
    save_grid(out, place.grid);
  }
  if (!out) {
    throw IoError("write failed while saving places file");
  }
}

inline std::vector<PlaceRecord> load_places(std::istream& in) {
  io::expect_magic(in, kPlacesMagic, "places file");
  const std::uint16_t version = io::read_u16(in);
  if (version != kPlacesVersion) {
    throw FormatError("places file version mismatch: file has " +
                      std::to_string(version) + ", reader expects " +
                      std::to_string(kPlacesVersion));
  }
  const std::uint64_t count = io::read_u64(in);
  std::vector<PlaceRecord> places;
  places.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    PlaceRecord place;
    place.place_id = io::read_u64(in);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) place.anchor.rotation(r, c) = io::read_f64(in);
      place.anchor.translation(r) = io::read_f64(in);
    }
    place.first_frame = io::read_u64(in);
    place.last_frame = io::read_u64(in);
    place.anchor.frame_index = static_cast<std::int64_t>(place.first_frame);
    place.grid = load_grid(in);
    places.push_back(std::move(place));
  }
  return places;
}

inline void save_places(const std::filesystem::path& path,
                        const std::vector<PlaceRecord>& places) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open places file for writing: " + path.string());
  }
  save_places(out, places);
}

inline std::vector<PlaceRecord> load_places(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open places file: " + path.string());
  }
  return load_places(in);
}

}  // namespace ndtmc
