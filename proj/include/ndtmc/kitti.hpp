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

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ndtmc/core_types.hpp"
#include "ndtmc/errors.hpp"
#include "ndtmc/little_endian.hpp"

// Readers/writers for the KITTI odometry formats:
//  - velodyne scans: binary little-endian float32 quadruples (x, y, z, intensity)
//  - pose files: ASCII, one row-major 3x4 [R|t] per line

namespace ndtmc {

/// Loads a velodyne .bin scan. The intensity channel is read and discarded.
/// Records containing a non-finite coordinate are dropped and counted.
inline PointCloud load_kitti_scan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) {
    throw IoError("cannot open scan file: " + path.string());
  }
  const auto byte_count = static_cast<std::uint64_t>(in.tellg());
  if (byte_count % 16 != 0) {
    throw FormatError("malformed KITTI scan " + path.string() + ": " +
                      std::to_string(byte_count) +
                      " bytes is not a multiple of 16");
  }
  in.seekg(0);
  std::vector<char> bytes(byte_count);
  in.read(bytes.data(), static_cast<std::streamsize>(byte_count));
  if (!in) {
    throw IoError("read failed: " + path.string());
  }

  PointCloud cloud;
  cloud.source_id = path.stem().string();
  const std::uint64_t record_count = byte_count / 16;
  cloud.points.reserve(record_count);
  auto read_le_f32 = [&](std::uint64_t offset) {
    std::uint32_t bits = 0;
    for (int b = 3; b >= 0; --b) {
      bits = (bits << 8) |
             static_cast<unsigned char>(bytes[offset + static_cast<std::uint64_t>(b)]);
    }
    return std::bit_cast<float>(bits);
  };
  for (std::uint64_t i = 0; i < record_count; ++i) {
    const float x = read_le_f32(16 * i);
    const float y = read_le_f32(16 * i + 4);
    const float z = read_le_f32(16 * i + 8);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      ++cloud.dropped_non_finite;
      continue;
    }
    cloud.points.emplace_back(x, y, z);
  }
  return cloud;
}

/// Writes a cloud in the KITTI scan layout with intensity = 0. Coordinates
/// are narrowed to float32, so a load/write/load cycle is bit-exact.
inline void write_kitti_scan(const std::filesystem::path& path,
                             const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open scan file for writing: " + path.string());
  }
  for (const Point3& p : cloud.points) {
    io::write_f32(out, static_cast<float>(p.x()));
    io::write_f32(out, static_cast<float>(p.y()));
    io::write_f32(out, static_cast<float>(p.z()));
    io::write_f32(out, 0.0f);
  }
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

/// Parses a KITTI pose file. Line i yields the pose of frame i. Each
/// nonempty line must hold exactly 12 numbers (row-major 3x4 [R|t]);
/// rotations are validated against the orthonormality tolerance.
inline std::vector<Pose> load_kitti_poses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open pose file: " + path.string());
  }
  std::vector<Pose> poses;
  std::string line;
  std::int64_t line_number = 0;
  std::int64_t frame_index = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    std::istringstream tokens(line);
    double v[12];
    int got = 0;
    while (got < 12 && (tokens >> v[got])) ++got;
    double extra;
    if (got != 12 || (tokens >> extra)) {
      throw FormatError("pose file " + path.string() + " line " +
                        std::to_string(line_number) +
                        ": expected 12 numbers per line");
    }

    Pose pose;
    pose.rotation << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    pose.translation << v[3], v[7], v[11];
    pose.frame_index = frame_index++;
    if (!pose.is_valid()) {
      throw FormatError("pose file " + path.string() + " line " +
                        std::to_string(line_number) +
                        ": rotation is not orthonormal within tolerance");
    }
    poses.push_back(pose);
  }
  return poses;
}

inline void write_kitti_poses(const std::filesystem::path& path,
                              const std::vector<Pose>& poses) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open pose file for writing: " + path.string());
  }
  out.precision(17);
  for (const Pose& pose : poses) {
    const Eigen::Matrix3d& r = pose.rotation;
    const Eigen::Vector3d& t = pose.translation;
    for (int row = 0; row < 3; ++row) {
      if (row > 0) out << ' ';
      out << r(row, 0) << ' ' << r(row, 1) << ' ' << r(row, 2) << ' ' << t(row);
    }
    out << '\n';
  }
}

}  // namespace ndtmc
