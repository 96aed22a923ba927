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

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ndtmc/descriptor.hpp"
#include "ndtmc/errors.hpp"
#include "ndtmc/evaluation.hpp"
#include "ndtmc/matcher.hpp"
#include "ndtmc/ndt.hpp"
#include "ndtmc/submap.hpp"

// Flat key-value configuration with one [section] per module. Profiles
// bundle the on-road ("kitti") and underground-parking ("parking")
// parameter sets; a config file starts from its declared profile and may
// override any key. Unknown sections or keys are errors so typos fail fast.

namespace ndtmc {

struct Config {
  std::string profile = "kitti";  ///< kitti | parking | custom
  double ndt_resolution = 2.0;
  ShapeParams shape;
  PartitionParams partition;
  EncodeOptions encode;
  QueryParams matcher;
  SubmapConfig submap;
  GroundTruthConfig ground_truth;

  bool operator==(const Config& other) const {
    return profile == other.profile && ndt_resolution == other.ndt_resolution &&
           shape.class_width == other.shape.class_width &&
           shape.g_max == other.shape.g_max &&
           shape.min_points == other.shape.min_points &&
           shape.eigen_epsilon == other.shape.eigen_epsilon &&
           partition.ring_count == other.partition.ring_count &&
           partition.sector_count == other.partition.sector_count &&
           partition.layer_count == other.partition.layer_count &&
           partition.max_range == other.partition.max_range &&
           partition.max_height == other.partition.max_height &&
           partition.z_offset == other.partition.z_offset &&
           encode.per_block_znorm == other.encode.per_block_znorm &&
           matcher.knn == other.matcher.knn &&
           matcher.threshold == other.matcher.threshold &&
           matcher.window_half_width == other.matcher.window_half_width &&
           matcher.exhaustive == other.matcher.exhaustive &&
           matcher.exclude_gap == other.matcher.exclude_gap &&
           submap.place_length == other.submap.place_length &&
           submap.crop_radius == other.submap.crop_radius &&
           submap.update_period == other.submap.update_period &&
           ground_truth.mode == other.ground_truth.mode &&
           ground_truth.kitti_radius == other.ground_truth.kitti_radius &&
           ground_truth.parking_xy_radius == other.ground_truth.parking_xy_radius &&
           ground_truth.parking_z_tolerance == other.ground_truth.parking_z_tolerance &&
           ground_truth.exclusion_gap == other.ground_truth.exclusion_gap;
  }
};

/// On-road defaults: N_r=20, N_theta=60, N_w=6, R=80 m, Z=6 m with a 2 m
/// z offset so ground returns land near layer 0. The matcher exclusion
/// gap stays off by default; same-sequence loop-closure runs enable it
/// explicitly so a query cannot match its own temporal neighborhood.
inline Config kitti_profile() {
  Config config;
  config.profile = "kitti";
  config.ground_truth.mode = GroundTruthMode::kKitti;
  return config;
}

/// Underground parking defaults: N_r=40, Z=3 m with 1 m layers, cross-
/// session ground truth on the x-y plane with a z tolerance.
inline Config parking_profile() {
  Config config;
  config.profile = "parking";
  config.partition.ring_count = 40;
  config.partition.max_height = 3.0;
  config.partition.layer_count = 3;
  config.partition.z_offset = 2.0;
  config.ground_truth.mode = GroundTruthMode::kParking;
  config.matcher.exclude_gap = 0;
  return config;
}

inline Config profile_by_name(const std::string& name) {
  if (name == "kitti") return kitti_profile();
  if (name == "parking") return parking_profile();
  if (name == "custom") {
    Config config;
    config.profile = "custom";
    return config;
  }
  throw FormatError("unknown profile \"" + name +
                    "\" (expected kitti, parking, or custom)");
}

namespace detail {

inline double parse_double(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw FormatError("config key " + key + ": cannot parse \"" + value +
                      "\" as a number");
  }
}

inline std::int64_t parse_int(const std::string& value, const std::string& key) {
  std::int64_t v = 0;
  const auto* begin = value.data();
  const auto* end = value.data() + value.size();
  const auto result = std::from_chars(begin, end, v);
  if (result.ec != std::errc() || result.ptr != end) {
    throw FormatError("config key " + key + ": cannot parse \"" + value +
                      "\" as an integer");
  }
  return v;
}

inline bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw FormatError("config key " + key + ": cannot parse \"" + value +
                    "\" as a boolean");
}

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

inline void apply_key(Config& config, const std::string& section,
                      const std::string& key, const std::string& value) {
  const std::string qualified = "[" + section + "] " + key;
  if (section == "general") {
    if (key == "profile") return;  // handled in a first pass
    if (key == "ndt_resolution") {
      config.ndt_resolution = parse_double(value, qualified);
      return;
    }
  } else if (section == "shape") {
    if (key == "class_width") { config.shape.class_width = parse_double(value, qualified); return; }
    if (key == "g_max") { config.shape.g_max = parse_double(value, qualified); return; }
    if (key == "min_points") { config.shape.min_points = static_cast<int>(parse_int(value, qualified)); return; }
    if (key == "eigen_epsilon") { config.shape.eigen_epsilon = parse_double(value, qualified); return; }
  } else if (section == "partition") {
    if (key == "rings") { config.partition.ring_count = static_cast<int>(parse_int(value, qualified)); return; }
    if (key == "sectors") { config.partition.sector_count = static_cast<int>(parse_int(value, qualified)); return; }
    if (key == "layers") { config.partition.layer_count = static_cast<int>(parse_int(value, qualified)); return; }
    if (key == "max_range") { config.partition.max_range = parse_double(value, qualified); return; }
    if (key == "max_height") { config.partition.max_height = parse_double(value, qualified); return; }
    if (key == "z_offset") { config.partition.z_offset = parse_double(value, qualified); return; }
  } else if (section == "descriptor") {
    if (key == "block_znorm") { config.encode.per_block_znorm = parse_bool(value, qualified); return; }
  } else if (section == "matcher") {
    if (key == "knn") { config.matcher.knn = static_cast<int>(parse_int(value, qualified)); return; }
    if (key == "threshold") { config.matcher.threshold = parse_double(value, qualified); return; }
    if (key == "window_half_width") { config.matcher.window_half_width = static_cast<int>(parse_int(value, qualified)); return; }
    if (key == "exhaustive") { config.matcher.exhaustive = parse_bool(value, qualified); return; }
    if (key == "exclude_gap") { config.matcher.exclude_gap = parse_int(value, qualified); return; }
  } else if (section == "submap") {
    if (key == "place_length") { config.submap.place_length = parse_double(value, qualified); return; }
    if (key == "crop_radius") { config.submap.crop_radius = parse_double(value, qualified); return; }
    if (key == "update_period") { config.submap.update_period = parse_double(value, qualified); return; }
  } else if (section == "ground_truth") {
    if (key == "mode") {
      if (value == "kitti") { config.ground_truth.mode = GroundTruthMode::kKitti; return; }
      if (value == "parking") { config.ground_truth.mode = GroundTruthMode::kParking; return; }
      throw FormatError("config key " + qualified + ": unknown mode \"" + value + "\"");
    }
    if (key == "kitti_radius") { config.ground_truth.kitti_radius = parse_double(value, qualified); return; }
    if (key == "parking_xy_radius") { config.ground_truth.parking_xy_radius = parse_double(value, qualified); return; }
    if (key == "parking_z_tolerance") { config.ground_truth.parking_z_tolerance = parse_double(value, qualified); return; }
    if (key == "exclusion_gap") { config.ground_truth.exclusion_gap = parse_int(value, qualified); return; }
  } else {
    throw FormatError("unknown config section [" + section + "]");
  }
  throw FormatError("unknown config key \"" + key + "\" in section [" + section + "]");
}

}  // namespace detail

inline Config parse_config(std::istream& in) {
  struct Item {
    std::string section, key, value;
    std::int64_t line;
  };
  std::vector<Item> items;
  std::string section = "general";
  std::string line;
  std::int64_t line_number = 0;
  std::string profile = "kitti";
  while (std::getline(in, line)) {
    ++line_number;
    const std::string text = detail::trim(line.substr(0, line.find('#')));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') {
        throw FormatError("config line " + std::to_string(line_number) +
                          ": unterminated section header");
      }
      section = detail::trim(text.substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line " + std::to_string(line_number) +
                        ": expected key = value");
    }
    Item item{section, detail::trim(text.substr(0, eq)),
              detail::trim(text.substr(eq + 1)), line_number};
    if (item.section == "general" && item.key == "profile") {
      profile = item.value;
    }
    items.push_back(std::move(item));
  }

  Config config = profile_by_name(profile);
  for (const Item& item : items) {
    detail::apply_key(config, item.section, item.key, item.value);
  }
  return config;
}

inline Config parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path.string());
  }
  return parse_config(in);
}

/// Writes every key, so parse(serialize(c)) == c.
inline std::string serialize_config(const Config& config) {
  std::ostringstream out;
  out.precision(17);
  out << "[general]\n";
  out << "profile = " << config.profile << '\n';
  out << "ndt_resolution = " << config.ndt_resolution << '\n';
  out << "\n[shape]\n";
  out << "class_width = " << config.shape.class_width << '\n';
  out << "g_max = " << config.shape.g_max << '\n';
  out << "min_points = " << config.shape.min_points << '\n';
  out << "eigen_epsilon = " << config.shape.eigen_epsilon << '\n';
  out << "\n[partition]\n";
  out << "rings = " << config.partition.ring_count << '\n';
  out << "sectors = " << config.partition.sector_count << '\n';
  out << "layers = " << config.partition.layer_count << '\n';
  out << "max_range = " << config.partition.max_range << '\n';
  out << "max_height = " << config.partition.max_height << '\n';
  out << "z_offset = " << config.partition.z_offset << '\n';
  out << "\n[descriptor]\n";
  out << "block_znorm = " << (config.encode.per_block_znorm ? "true" : "false") << '\n';
  out << "\n[matcher]\n";
  out << "knn = " << config.matcher.knn << '\n';
  out << "threshold = " << config.matcher.threshold << '\n';
  out << "window_half_width = " << config.matcher.window_half_width << '\n';
  out << "exhaustive = " << (config.matcher.exhaustive ? "true" : "false") << '\n';
  out << "exclude_gap = " << config.matcher.exclude_gap << '\n';
  out << "\n[submap]\n";
  out << "place_length = " << config.submap.place_length << '\n';
  out << "crop_radius = " << config.submap.crop_radius << '\n';
  out << "update_period = " << config.submap.update_period << '\n';
  out << "\n[ground_truth]\n";
  out << "mode = "
      << (config.ground_truth.mode == GroundTruthMode::kKitti ? "kitti" : "parking")
      << '\n';
  out << "kitti_radius = " << config.ground_truth.kitti_radius << '\n';
  out << "parking_xy_radius = " << config.ground_truth.parking_xy_radius << '\n';
  out << "parking_z_tolerance = " << config.ground_truth.parking_z_tolerance << '\n';
  out << "exclusion_gap = " << config.ground_truth.exclusion_gap << '\n';
  return out.str();
}

}  // namespace ndtmc
