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
#include <iomanip>
#include <istream>
#include <ostream>

#include "ndtmc/descriptor.hpp"
#include "ndtmc/errors.hpp"
#include "ndtmc/little_endian.hpp"

// Descriptor record ("NDMC"), little-endian binary:
//   header:  magic "NDMC", version u16, N_r u16, N_theta u16, N_s u16
//   payload: frame_id u64, matrix f64 row-major (2*N_r x N_theta),
//            geometric key f64 x N_s, sector key f64 x N_theta
// The geometric key is stored in normalized form; the in-memory cell count
// behind it is not persisted.

namespace ndtmc {

inline constexpr char kDescriptorMagic[5] = "NDMC";
inline constexpr std::uint16_t kDescriptorVersion = 1;

struct DescriptorRecord {
  Descriptor descriptor;
  GeometricKey geometric;
  SectorKey sector;
};

inline void save_descriptor(std::ostream& out, const Descriptor& d,
                            const GeometricKey& geometric,
                            const SectorKey& sector) {
  io::write_magic(out, kDescriptorMagic);
  io::write_u16(out, kDescriptorVersion);
  io::write_u16(out, static_cast<std::uint16_t>(d.rings()));
  io::write_u16(out, static_cast<std::uint16_t>(d.sectors()));
  io::write_u16(out, static_cast<std::uint16_t>(geometric.histogram.size()));
  io::write_u64(out, d.frame_id);
  for (int r = 0; r < d.matrix.rows(); ++r) {
    for (int c = 0; c < d.matrix.cols(); ++c) {
      io::write_f64(out, d.matrix(r, c));
    }
  }
  for (int i = 0; i < geometric.histogram.size(); ++i) {
    io::write_f64(out, geometric.histogram(i));
  }
  for (int i = 0; i < sector.vector.size(); ++i) {
    io::write_f64(out, sector.vector(i));
  }
  if (!out) {
    throw IoError("write failed while saving descriptor record");
  }
}

inline DescriptorRecord load_descriptor(std::istream& in) {
  io::expect_magic(in, kDescriptorMagic, "descriptor record");
  const std::uint16_t version = io::read_u16(in);
  if (version != kDescriptorVersion) {
    throw FormatError("descriptor version mismatch: file has " +
                      std::to_string(version) + ", reader expects " +
                      std::to_string(kDescriptorVersion));
  }
  const int rings = io::read_u16(in);
  const int sectors = io::read_u16(in);
  const int classes = io::read_u16(in);

  DescriptorRecord record;
  record.descriptor.frame_id = io::read_u64(in);
  record.descriptor.matrix.resize(2 * rings, sectors);
  for (int r = 0; r < 2 * rings; ++r) {
    for (int c = 0; c < sectors; ++c) {
      record.descriptor.matrix(r, c) = io::read_f64(in);
    }
  }
  record.geometric.histogram.resize(classes);
  for (int i = 0; i < classes; ++i) {
    record.geometric.histogram(i) = io::read_f64(in);
  }
  record.sector.vector.resize(sectors);
  for (int i = 0; i < sectors; ++i) {
    record.sector.vector(i) = io::read_f64(in);
  }
  return record;
}

/// Debug dump: the matrix row-major with 6 significant digits per value.
inline void write_descriptor_csv(std::ostream& out, const Descriptor& d) {
  out << std::setprecision(6);
  for (int r = 0; r < d.matrix.rows(); ++r) {
    for (int c = 0; c < d.matrix.cols(); ++c) {
      if (c > 0) out << ',';
      out << d.matrix(r, c);
    }
    out << '\n';
  }
}

inline void write_descriptor_csv(const std::filesystem::path& path,
                                 const Descriptor& d) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open CSV file for writing: " + path.string());
  }
  write_descriptor_csv(out, d);
}

}  // namespace ndtmc
