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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ndtmc/core_types.hpp"
#include "ndtmc/ndt.hpp"

// The NDT-Map-Code descriptor: NDT cells are binned into a polar grid of
// N_r rings x N_theta sectors x N_w height layers around the sensor, each
// bin keeps the majority shape class and the summed entropy of its cells,
// and the layers collapse into a (2*N_r) x N_theta matrix with height
// weights (w+1). Two compact keys accompany the matrix: a histogram of
// shape classes for retrieval and the column means for shift estimation.

namespace ndtmc {

struct PartitionParams {
  int ring_count = 20;     ///< N_r
  int sector_count = 60;   ///< N_theta
  int layer_count = 6;     ///< N_w
  double max_range = 80.0; ///< R, meters
  double max_height = 6.0; ///< Z, meters; points keep z' in [0, Z]
  double z_offset = 2.0;   ///< added to raw z so ground returns sit near z' = 0

  double ring_width() const { return max_range / ring_count; }        // L_r
  double sector_width() const { return 2.0 * M_PI / sector_count; }   // L_theta
  double layer_height() const { return max_height / layer_count; }    // L_z

  void validate() const {
    if (ring_count < 1 || sector_count < 1 || layer_count < 1) {
      throw std::invalid_argument("partition counts must be >= 1");
    }
    if (max_range <= 0.0 || max_height <= 0.0) {
      throw std::invalid_argument("partition extents must be positive");
    }
  }
};

struct BinIndex {
  int ring = 0;
  int sector = 0;
  int layer = 0;

  bool operator==(const BinIndex&) const = default;
};

/// Azimuth in [0, 2*pi).
inline double azimuth_of(double x, double y) {
  double theta = std::atan2(y, x);
  if (theta < 0.0) theta += 2.0 * M_PI;
  return theta;
}

/// Maps a point to its (ring, sector, layer) bin, or nullopt when it falls
/// outside the region of interest (range > R, shifted height outside
/// [0, Z], or exactly on the sensor axis where the azimuth is undefined).
/// Boundary points land in the last bin of each axis.
inline std::optional<BinIndex> partition_index(const Point3& p,
                                               const PartitionParams& params) {
  const double range = std::hypot(p.x(), p.y());
  if (range == 0.0 || range > params.max_range) return std::nullopt;
  const double z = p.z() + params.z_offset;
  if (z < 0.0 || z > params.max_height) return std::nullopt;

  BinIndex bin;
  bin.ring = std::min(static_cast<int>(std::floor(range / params.ring_width())),
                      params.ring_count - 1);
  bin.sector = std::min(
      static_cast<int>(std::floor(azimuth_of(p.x(), p.y()) / params.sector_width())),
      params.sector_count - 1);
  bin.layer = std::min(static_cast<int>(std::floor(z / params.layer_height())),
                       params.layer_count - 1);
  return bin;
}

/// Per-bin aggregate: the majority shape class of the contained cells
/// (smaller class wins ties) and the sum of their entropies. Empty bins
/// hold (0, 0).
struct BinValue {
  int shape_class = 0;
  double entropy_sum = 0.0;
};

class BinGrid {
 public:
  explicit BinGrid(const PartitionParams& params)
      : rings_(params.ring_count),
        sectors_(params.sector_count),
        layers_(params.layer_count),
        values_(static_cast<std::size_t>(rings_) * sectors_ * layers_) {}

  BinValue& at(const BinIndex& b) { return values_[flat(b)]; }
  const BinValue& at(const BinIndex& b) const { return values_[flat(b)]; }

  int rings() const { return rings_; }
  int sectors() const { return sectors_; }
  int layers() const { return layers_; }

 private:
  std::size_t flat(const BinIndex& b) const {
    return (static_cast<std::size_t>(b.ring) * sectors_ + b.sector) * layers_ +
           b.layer;
  }

  int rings_, sectors_, layers_;
  std::vector<BinValue> values_;
};

/// Bins every cell of the grid by its mean and reduces per bin: majority
/// vote on the shape class (smaller class wins ties), sum-pooling on the
/// entropy. One sort over (bin, class) replaces per-bin count maps.
inline BinGrid aggregate_bins(const NdtGrid& grid,
                              const PartitionParams& params) {
  params.validate();
  BinGrid bins(params);

  struct BinnedCell {
    std::int64_t flat;
    std::int32_t shape_class;
    double entropy;
  };
  std::vector<BinnedCell> binned;
  binned.reserve(grid.cells.size());
  const std::int64_t sectors = params.sector_count;
  const std::int64_t layers = params.layer_count;
  for (const auto& [key, cell] : grid.cells) {
    const auto bin = partition_index(cell.mean, params);
    if (!bin) continue;
    const std::int64_t flat = (bin->ring * sectors + bin->sector) * layers +
                              bin->layer;
    binned.push_back({flat, cell.shape_class, cell.entropy});
  }
  // Total order: bin sums come out identical for any input ordering, so
  // the descriptor never depends on container iteration order.
  std::sort(binned.begin(), binned.end(),
            [](const BinnedCell& a, const BinnedCell& b) {
              if (a.flat != b.flat) return a.flat < b.flat;
              if (a.shape_class != b.shape_class) {
                return a.shape_class < b.shape_class;
              }
              return a.entropy < b.entropy;
            });

  for (std::size_t begin = 0; begin < binned.size();) {
    std::size_t end = begin;
    double entropy_sum = 0.0;
    int best_class = 0;
    int best_count = 0;
    while (end < binned.size() && binned[end].flat == binned[begin].flat) {
      // Equal classes are adjacent after the sort.
      std::size_t run = end;
      while (run < binned.size() && binned[run].flat == binned[begin].flat &&
             binned[run].shape_class == binned[end].shape_class) {
        entropy_sum += binned[run].entropy;
        ++run;
      }
      const int count = static_cast<int>(run - end);
      if (count > best_count) {
        best_count = count;
        best_class = binned[end].shape_class;
      }
      end = run;
    }
    const std::int64_t flat = binned[begin].flat;
    BinIndex bin;
    bin.layer = static_cast<int>(flat % layers);
    bin.sector = static_cast<int>((flat / layers) % sectors);
    bin.ring = static_cast<int>(flat / (layers * sectors));
    bins.at(bin) = BinValue{best_class, entropy_sum};
    begin = end;
  }
  return bins;
}

/// The NDT-MC matrix: rows [0, N_r) hold the height-weighted shape-class
/// block, rows [N_r, 2*N_r) the height-weighted entropy block.
struct Descriptor {
  Eigen::MatrixXd matrix;
  std::uint64_t frame_id = 0;

  int rings() const { return static_cast<int>(matrix.rows()) / 2; }
  int sectors() const { return static_cast<int>(matrix.cols()); }
};

struct EncodeOptions {
  /// Optional z-normalization applied independently to the geometric and
  /// entropy blocks after encoding. Off by default.
  bool per_block_znorm = false;
};

inline void normalize_block(Eigen::Ref<Eigen::MatrixXd> block) {
  const double mean = block.mean();
  const double var =
      (block.array() - mean).square().sum() / block.size();
  const double stddev = std::sqrt(var);
  if (stddev > 0.0) {
    block = (block.array() - mean) / stddev;
  }
}

inline Descriptor encode(const BinGrid& bins, const PartitionParams& params,
                         const EncodeOptions& options = {}) {
  Descriptor d;
  d.matrix = Eigen::MatrixXd::Zero(2 * params.ring_count, params.sector_count);
  for (int r = 0; r < params.ring_count; ++r) {
    for (int s = 0; s < params.sector_count; ++s) {
      double g_sum = 0.0;
      double e_sum = 0.0;
      for (int w = 0; w < params.layer_count; ++w) {
        const BinValue& v = bins.at(BinIndex{r, s, w});
        const double weight = static_cast<double>(w + 1);
        g_sum += weight * v.shape_class;
        e_sum += weight * v.entropy_sum;
      }
      d.matrix(r, s) = g_sum;
      d.matrix(params.ring_count + r, s) = e_sum;
    }
  }
  if (options.per_block_znorm) {
    normalize_block(d.matrix.topRows(params.ring_count));
    normalize_block(d.matrix.bottomRows(params.ring_count));
  }
  return d;
}

/// Normalized histogram of shape classes over all in-range cells.
struct GeometricKey {
  Eigen::VectorXd histogram;
  std::uint64_t total_cells = 0;
};

inline GeometricKey geometric_key(const NdtGrid& grid,
                                  const PartitionParams& params,
                                  int num_classes) {
  GeometricKey key;
  key.histogram = Eigen::VectorXd::Zero(num_classes);
  for (const auto& [vkey, cell] : grid.cells) {
    if (!partition_index(cell.mean, params)) continue;
    if (cell.shape_class < 1 || cell.shape_class > num_classes) continue;
    key.histogram(cell.shape_class - 1) += 1.0;
    ++key.total_cells;
  }
  if (key.total_cells > 0) {
    key.histogram /= static_cast<double>(key.total_cells);
  }
  return key;
}

/// Column-wise mean of the full descriptor matrix.
struct SectorKey {
  Eigen::VectorXd vector;
};

inline SectorKey sector_key(const Descriptor& d) {
  SectorKey key;
  key.vector = d.matrix.colwise().mean().transpose();
  return key;
}

struct ExtractionResult {
  Descriptor descriptor;
  GeometricKey geometric;
  SectorKey sector;
};

/// grid -> (descriptor, geometric key, sector key)
inline ExtractionResult extract(const NdtGrid& grid,
                                const PartitionParams& partition,
                                const ShapeParams& shape,
                                std::uint64_t frame_id = 0,
                                const EncodeOptions& options = {}) {
  ExtractionResult result;
  const BinGrid bins = aggregate_bins(grid, partition);
  result.descriptor = encode(bins, partition, options);
  result.descriptor.frame_id = frame_id;
  result.geometric = geometric_key(grid, partition, shape.num_classes());
  result.sector = sector_key(result.descriptor);
  return result;
}

/// cloud -> NDT grid -> (descriptor, geometric key, sector key)
inline ExtractionResult extract(const PointCloud& cloud, double resolution,
                                const PartitionParams& partition,
                                const ShapeParams& shape,
                                std::uint64_t frame_id = 0,
                                const EncodeOptions& options = {}) {
  return extract(build_grid(cloud, resolution, shape), partition, shape,
                 frame_id, options);
}

}  // namespace ndtmc
