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

#include "ndtmc/descriptor_io.hpp"
#include "ndtmc/errors.hpp"
#include "ndtmc/little_endian.hpp"
#include "ndtmc/matcher.hpp"

// Database file: a concatenation of entry records followed by a
// table-of-contents footer, so entries can be loaded sequentially without
// holding the whole file in memory.
//   entry:  descriptor record ("NDMC" format) +
//           extension {total_cells u64, has_pose u8,
//                      [rotation row-major 9 x f64, translation 3 x f64,
//                       frame_index u64]}
//   footer: per-entry byte offsets u64 x n, entry count u64
// The footer is located by reading the trailing count first.

namespace ndtmc {

inline void save_database(std::ostream& out, const DescriptorDatabase& db) {
  std::vector<std::uint64_t> offsets;
  offsets.reserve(db.size());
  for (const DatabaseEntry& entry : db.entries()) {
    offsets.push_back(static_cast<std::uint64_t>(out.tellp()));
    save_descriptor(out, entry.descriptor, entry.geometric, entry.sector);
    io::write_u64(out, entry.geometric.total_cells);
    io::write_u8(out, entry.pose ? 1 : 0);
    if (entry.pose) {
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          io::write_f64(out, entry.pose->rotation(r, c));
        }
      }
      for (int i = 0; i < 3; ++i) io::write_f64(out, entry.pose->translation(i));
      io::write_u64(out, static_cast<std::uint64_t>(entry.pose->frame_index));
    }
  }
  for (std::uint64_t offset : offsets) io::write_u64(out, offset);
  io::write_u64(out, offsets.size());
  if (!out) {
    throw IoError("write failed while saving descriptor database");
  }
}

inline DescriptorDatabase load_database(std::istream& in) {
  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  if (file_size < 8) {
    throw FormatError("database file is too short to hold a footer");
  }
  in.seekg(static_cast<std::streamoff>(file_size - 8));
  const std::uint64_t entry_count = io::read_u64(in);
  if (entry_count >= file_size / 8) {
    throw FormatError("database footer is inconsistent with the file size");
  }
  const std::uint64_t footer_size = 8 * (entry_count + 1);
  in.seekg(static_cast<std::streamoff>(file_size - footer_size));
  std::vector<std::uint64_t> offsets(entry_count);
  for (auto& offset : offsets) offset = io::read_u64(in);

  DescriptorDatabase db;
  for (std::uint64_t offset : offsets) {
    in.clear();
    in.seekg(static_cast<std::streamoff>(offset));
    DescriptorRecord record = load_descriptor(in);
    DatabaseEntry entry;
    entry.frame_id = record.descriptor.frame_id;
    entry.descriptor = std::move(record.descriptor);
    entry.geometric = std::move(record.geometric);
    entry.sector = std::move(record.sector);
    entry.geometric.total_cells = io::read_u64(in);
    if (io::read_u8(in) != 0) {
      Pose pose;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          pose.rotation(r, c) = io::read_f64(in);
        }
      }
      for (int i = 0; i < 3; ++i) pose.translation(i) = io::read_f64(in);
      pose.frame_index = static_cast<std::int64_t>(io::read_u64(in));
      entry.pose = pose;
    }
    db.add(std::move(entry));
  }
  return db;
}

inline void save_database(const std::filesystem::path& path,
                          const DescriptorDatabase& db) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open database file for writing: " + path.string());
  }
  save_database(out, db);
}

inline DescriptorDatabase load_database(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open database file: " + path.string());
  }
  return load_database(in);
}

}  // namespace ndtmc
