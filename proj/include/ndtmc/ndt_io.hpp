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

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "ndtmc/errors.hpp"
#include "ndtmc/little_endian.hpp"
#include "ndtmc/ndt.hpp"

// NDT grid file ("NDTG"), record-oriented little-endian binary:
//   header: magic "NDTG", version u16, resolution f64, cell count u64
//   cell:   voxel key 3 x i32, n u32, mean 3 x f64,
//           covariance upper triangle 6 x f64 (xx xy xz yy yz zz),
//           g f64, S u16, E f64
// All f64 fields round-trip bit-exactly.

namespace ndtmc {

inline constexpr char kNdtGridMagic[5] = "NDTG";
inline constexpr std::uint16_t kNdtGridVersion = 1;

inline void save_grid(std::ostream& out, const NdtGrid& grid) {
  io::write_magic(out, kNdtGridMagic);
  io::write_u16(out, kNdtGridVersion);
  io::write_f64(out, grid.resolution);
  io::write_u64(out, grid.cells.size());
  for (const auto& [key, cell] : grid.cells) {
    io::write_i32(out, key.x);
    io::write_i32(out, key.y);
    io::write_i32(out, key.z);
    io::write_u32(out, cell.count);
    for (int i = 0; i < 3; ++i) io::write_f64(out, cell.mean(i));
    io::write_f64(out, cell.covariance(0, 0));
    io::write_f64(out, cell.covariance(0, 1));
    io::write_f64(out, cell.covariance(0, 2));
    io::write_f64(out, cell.covariance(1, 1));
    io::write_f64(out, cell.covariance(1, 2));
    io::write_f64(out, cell.covariance(2, 2));
    io::write_f64(out, cell.shape_index);
    io::write_u16(out, static_cast<std::uint16_t>(cell.shape_class));
    io::write_f64(out, cell.entropy);
  }
  if (!out) {
    throw IoError("write failed while saving NDT grid");
  }
}

inline NdtGrid load_grid(std::istream& in) {
  io::expect_magic(in, kNdtGridMagic, "NDT grid file");
  const std::uint16_t version = io::read_u16(in);
  if (version != kNdtGridVersion) {
    throw FormatError("NDT grid version mismatch: file has " +
                      std::to_string(version) + ", reader expects " +
                      std::to_string(kNdtGridVersion));
  }
  NdtGrid grid;
  grid.resolution = io::read_f64(in);
  const std::uint64_t cell_count = io::read_u64(in);
  grid.cells.reserve(cell_count);
  for (std::uint64_t i = 0; i < cell_count; ++i) {
    VoxelKey key;
    key.x = io::read_i32(in);
    key.y = io::read_i32(in);
    key.z = io::read_i32(in);
    NdtCell cell;
    cell.count = io::read_u32(in);
    for (int j = 0; j < 3; ++j) cell.mean(j) = io::read_f64(in);
    const double xx = io::read_f64(in);
    const double xy = io::read_f64(in);
    const double xz = io::read_f64(in);
    const double yy = io::read_f64(in);
    const double yz = io::read_f64(in);
    const double zz = io::read_f64(in);
    cell.covariance << xx, xy, xz, xy, yy, yz, xz, yz, zz;
    cell.shape_index = io::read_f64(in);
    cell.shape_class = io::read_u16(in);
    cell.entropy = io::read_f64(in);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
    solver.computeDirect(cell.covariance, Eigen::EigenvaluesOnly);
    const Eigen::Vector3d ev = solver.eigenvalues();
    cell.eigenvalues =
        Eigen::Vector3d(std::max(ev(2), 0.0), std::max(ev(1), 0.0),
                        std::max(ev(0), 0.0));
    grid.cells.emplace(key, cell);
  }
  grid.update_bounds();
  return grid;
}

inline void save_grid(const std::filesystem::path& path, const NdtGrid& grid) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open grid file for writing: " + path.string());
  }
  save_grid(out, grid);
}

inline NdtGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open grid file: " + path.string());
  }
  return load_grid(in);
}

}  // namespace ndtmc
