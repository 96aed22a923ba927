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

// Command-line frontend for the NDT-Map-Code pipeline:
//   extract   scans or places -> descriptor database
//   index     validate a database and build its retrieval index
//   query     scans or places vs. database -> matches CSV
//   evaluate  matches + poses -> precision/recall, F1, EP
//   bench     timing report for extraction and querying
//   submap    posed scans -> places file
// Exit codes: 0 success, 2 input error, 3 format error, 4 numerical failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include <CLI11.hpp>

#include "ndtmc/config.hpp"
#include "ndtmc/database_io.hpp"
#include "ndtmc/descriptor.hpp"
#include "ndtmc/descriptor_io.hpp"
#include "ndtmc/evaluation.hpp"
#include "ndtmc/kitti.hpp"
#include "ndtmc/matcher.hpp"
#include "ndtmc/ndt_io.hpp"
#include "ndtmc/submap.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct GlobalOptions {
  std::string config_path;
  std::string profile;
  int threads = 1;
  std::uint64_t seed = 1;
};

ndtmc::Config resolve_config(const GlobalOptions& options) {
  if (!options.config_path.empty()) {
    return ndtmc::load_config(options.config_path);
  }
  if (!options.profile.empty()) {
    return ndtmc::profile_by_name(options.profile);
  }
  return ndtmc::kitti_profile();
}

std::vector<fs::path> list_scans(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ndtmc::IoError("not a directory: " + dir.string());
  }
  std::vector<fs::path> scans;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") {
      scans.push_back(entry.path());
    }
  }
  if (scans.empty()) {
    throw ndtmc::IoError("no .bin scans found in directory: " + dir.string());
  }
  std::sort(scans.begin(), scans.end());
  return scans;
}

std::uint64_t frame_id_of(const fs::path& scan, std::size_t fallback) {
  const std::string stem = scan.stem().string();
  if (!stem.empty() &&
      std::all_of(stem.begin(), stem.end(), [](char c) { return std::isdigit(c); })) {
    return std::stoull(stem);
  }
  return fallback;
}

bool is_places_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in && std::memcmp(magic, ndtmc::kPlacesMagic, 4) == 0;
}

/// frame_id -> pose lookup for optional pose attachment.
std::unordered_map<std::int64_t, ndtmc::Pose> pose_map(const fs::path& path) {
  std::unordered_map<std::int64_t, ndtmc::Pose> map;
  for (const ndtmc::Pose& pose : ndtmc::load_kitti_poses(path)) {
    map[pose.frame_index] = pose;
  }
  return map;
}

/// Runs `work(i)` for i in [0, count) on `threads` workers. Results are
/// written into pre-sized slots, so output order is deterministic.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& work) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int worker_count = std::min<std::size_t>(threads, count);
  pool.reserve(worker_count);
  for (int t = 0; t < worker_count; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        work(i);
      }
    });
  }
  for (auto& worker : pool) worker.join();
}

// ---------------------------------------------------------------- extract

struct ExtractArgs {
  std::string input;
  std::string output;
  std::string poses;
};

ndtmc::DescriptorDatabase extract_database(const ndtmc::Config& config,
                                           const ExtractArgs& args,
                                           int threads, bool verbose) {
  ndtmc::DescriptorDatabase db;
  std::unordered_map<std::int64_t, ndtmc::Pose> poses;
  if (!args.poses.empty()) poses = pose_map(args.poses);

  auto attach_pose = [&](ndtmc::DatabaseEntry& entry) {
    const auto it = poses.find(static_cast<std::int64_t>(entry.frame_id));
    if (it != poses.end()) entry.pose = it->second;
  };

  const fs::path input(args.input);
  if (fs::is_directory(input)) {
    const auto scans = list_scans(input);
    std::vector<ndtmc::DatabaseEntry> entries(scans.size());
    std::vector<double> timings(scans.size());
    parallel_for(scans.size(), threads, [&](std::size_t i) {
      const auto start = Clock::now();
      const ndtmc::PointCloud cloud = ndtmc::load_kitti_scan(scans[i]);
      const auto result =
          ndtmc::extract(cloud, config.ndt_resolution, config.partition,
                         config.shape, frame_id_of(scans[i], i), config.encode);
      entries[i] = {result.descriptor.frame_id, result.descriptor,
                    result.geometric, result.sector, std::nullopt};
      timings[i] = ms_since(start);
    });
    for (std::size_t i = 0; i < entries.size(); ++i) {
      attach_pose(entries[i]);
      if (verbose) {
        std::cerr << "frame " << entries[i].frame_id << ": extracted in "
                  << timings[i] << " ms\n";
      }
      db.add(std::move(entries[i]));
    }
    return db;
  }

  if (!fs::is_regular_file(input)) {
    throw ndtmc::IoError("input is neither a scan directory nor a file: " +
                         args.input);
  }
  if (!is_places_file(input)) {
    throw ndtmc::FormatError("input file is not a places file: " + args.input);
  }
  const auto places = ndtmc::load_places(input);
  if (places.empty()) {
    throw ndtmc::IoError("places file holds no places: " + args.input);
  }
  std::vector<ndtmc::DatabaseEntry> entries(places.size());
  parallel_for(places.size(), threads, [&](std::size_t i) {
    const auto start = Clock::now();
    const auto result = ndtmc::extract(places[i].grid, config.partition,
                                       config.shape, places[i].place_id,
                                       config.encode);
    entries[i] = {places[i].place_id, result.descriptor, result.geometric,
                  result.sector, places[i].anchor};
    if (verbose) {
      std::cerr << "place " << places[i].place_id << ": extracted in "
                << ms_since(start) << " ms\n";
    }
  });
  for (auto& entry : entries) {
    attach_pose(entry);
    db.add(std::move(entry));
  }
  return db;
}

int cmd_extract(const ndtmc::Config& config, const GlobalOptions& global,
                const ExtractArgs& args) {
  const auto start = Clock::now();
  const ndtmc::DescriptorDatabase db =
      extract_database(config, args, global.threads, /*verbose=*/true);
  ndtmc::save_database(args.output, db);
  std::cout << "extracted " << db.size() << " entries in " << ms_since(start)
            << " ms -> " << args.output << "\n";
  return 0;
}

// ------------------------------------------------------------------ index

int cmd_index(const std::string& database_path) {
  auto db = ndtmc::load_database(database_path);
  if (db.empty()) {
    throw ndtmc::IoError("database holds no entries: " + database_path);
  }
  const auto start = Clock::now();
  db.build_index();
  const double build_ms = ms_since(start);

  // Sector keys are recomputable from the stored matrix; verify them.
  double worst = 0.0;
  for (const auto& entry : db.entries()) {
    const auto recomputed = ndtmc::sector_key(entry.descriptor);
    worst = std::max(worst, (recomputed.vector - entry.sector.vector)
                                .cwiseAbs()
                                .maxCoeff());
  }
  if (worst > 1e-12) {
    throw ndtmc::FormatError(
        "stored sector keys disagree with descriptors (max error " +
        std::to_string(worst) + ")");
  }

  std::cout << "entries: " << db.size() << "\n"
            << "key dimension: "
            << db.entries().front().geometric.histogram.size() << "\n"
            << "index build: " << build_ms << " ms\n"
            << "sector key max error: " << worst << "\n";
  return 0;
}

// ------------------------------------------------------------------ query

struct QueryArgs {
  std::string database;
  std::string input;
  std::string output;
};

int cmd_query(const ndtmc::Config& config, const GlobalOptions& global,
              const QueryArgs& args) {
  auto db = ndtmc::load_database(args.database);
  if (db.empty()) {
    throw ndtmc::IoError("database holds no entries: " + args.database);
  }
  db.build_index();

  ExtractArgs extract_args;
  extract_args.input = args.input;
  const ndtmc::DescriptorDatabase queries =
      extract_database(config, extract_args, global.threads, /*verbose=*/false);

  std::ofstream out(args.output, std::ios::trunc);
  if (!out) {
    throw ndtmc::IoError("cannot open matches file for writing: " + args.output);
  }
  out << "query_id,match_id,shift,distance,accepted\n";
  out.precision(17);

  const std::size_t count = queries.size();
  std::vector<std::optional<ndtmc::MatchResult>> results(count);
  parallel_for(count, global.threads, [&](std::size_t i) {
    const auto& q = queries.entry(i);
    results[i] = db.query(q.descriptor, q.geometric, q.sector, config.matcher,
                          q.frame_id);
  });
  for (std::size_t i = 0; i < count; ++i) {
    const auto& q = queries.entry(i);
    if (!results[i]) continue;
    out << q.frame_id << ',' << results[i]->candidate_id << ','
        << results[i]->shift << ',' << results[i]->distance << ','
        << (results[i]->accepted ? 1 : 0) << '\n';
  }
  std::cout << "queried " << count << " frames -> " << args.output << "\n";
  return 0;
}

// --------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string matches;
  std::string poses;
  std::string database_poses;
  std::string output_dir;
  std::string sequence;
};

std::vector<ndtmc::QueryOutcome> load_matches(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ndtmc::IoError("cannot open matches file: " + path.string());
  }
  std::vector<ndtmc::QueryOutcome> outcomes;
  std::string line;
  std::getline(in, line);  // header
  if (line.rfind("query_id,match_id,shift,distance", 0) != 0) {
    throw ndtmc::FormatError("matches file " + path.string() +
                             " has an unexpected header: " + line);
  }
  std::int64_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    ndtmc::QueryOutcome outcome;
    try {
      std::getline(row, field, ',');
      outcome.query_id = std::stoll(field);
      std::getline(row, field, ',');
      outcome.match_id = std::stoll(field);
      std::getline(row, field, ',');  // shift, unused here
      std::getline(row, field, ',');
      outcome.distance = std::stod(field);
    } catch (const std::exception&) {
      throw ndtmc::FormatError("matches file " + path.string() + " line " +
                               std::to_string(line_number) + " is malformed");
    }
    outcomes.push_back(outcome);
  }
  return outcomes;
}

int cmd_evaluate(const ndtmc::Config& config, const EvaluateArgs& args) {
  const auto outcomes = load_matches(args.matches);
  const auto query_poses = ndtmc::load_kitti_poses(args.poses);
  const auto database_poses = args.database_poses.empty()
                                  ? query_poses
                                  : ndtmc::load_kitti_poses(args.database_poses);

  const ndtmc::PositiveSets gt =
      ndtmc::ground_truth(query_poses, database_poses, config.ground_truth);

  std::unordered_set<std::int64_t> valid_ids;
  for (const ndtmc::Pose& pose : database_poses) valid_ids.insert(pose.frame_index);

  const auto thresholds = ndtmc::threshold_knots(outcomes);
  const ndtmc::PrCurve curve = ndtmc::pr_curve(outcomes, gt, thresholds, valid_ids);
  const auto f1 = ndtmc::f1_max(curve);
  const auto ep = ndtmc::extended_precision(curve);

  std::int64_t with_positives = 0;
  for (const auto& [_, set] : gt) {
    if (!set.empty()) ++with_positives;
  }

  const fs::path out_dir(args.output_dir);
  fs::create_directories(out_dir);
  const std::string sequence =
      args.sequence.empty() ? fs::path(args.poses).stem().string() : args.sequence;
  {
    std::ofstream out(out_dir / "pr_curve.csv", std::ios::trunc);
    ndtmc::write_pr_csv(out, curve);
  }
  {
    std::ofstream out(out_dir / "summary.csv", std::ios::trunc);
    ndtmc::write_summary_csv(out, sequence, f1, ep,
                             curve.query_count, with_positives);
  }
  {
    std::ofstream out(out_dir / "gt_pairs.csv", std::ios::trunc);
    ndtmc::write_gt_pairs_csv(out, gt);
  }

  std::cout << "sequence: " << sequence << "\n";
  std::cout << "queries: " << curve.query_count << " (" << with_positives
            << " with positives)\n";
  if (f1) {
    std::cout << "F1 max: " << *f1 << "\n";
  } else {
    std::cout << "F1 max: undefined (no usable precision/recall points)\n";
  }
  if (ep) {
    std::cout << "Extended Precision: " << *ep << "\n";
  } else {
    std::cout << "Extended Precision: undefined (precision never reaches 1)\n";
  }
  return 0;
}

// ------------------------------------------------------------------ bench

struct BenchArgs {
  std::string scans;
  std::string output;
  int repetitions = 10;
  std::vector<int> database_sizes = {1000};
};

struct Stats {
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
  double min = 0.0;
};

Stats summarize(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  Stats stats;
  stats.min = samples.front();
  stats.median = samples[samples.size() / 2];
  stats.p95 = samples[static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(samples.size() - 1)))];
  for (double s : samples) stats.mean += s;
  stats.mean /= static_cast<double>(samples.size());
  return stats;
}

ndtmc::PointCloud synthetic_bench_cloud(std::mt19937_64& rng) {
  // Lidar-like sweep: ground ring samples plus vertical structures, emitted
  // in azimuth order so consecutive points fall into nearby voxels.
  ndtmc::PointCloud cloud;
  std::normal_distribution<double> noise(0.0, 0.03);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int beams = 64;
  const int steps = 1800;
  cloud.points.reserve(static_cast<std::size_t>(beams) * steps);
  for (int s = 0; s < steps; ++s) {
    const double azimuth = 2.0 * M_PI * s / steps;
    for (int b = 0; b < beams; ++b) {
      const double range = 4.0 + 76.0 * (b / static_cast<double>(beams)) +
                           noise(rng);
      const double z = -1.7 + 6.0 * unit(rng) * (b % 8 == 0 ? 1.0 : 0.05);
      cloud.points.emplace_back(range * std::cos(azimuth),
                                range * std::sin(azimuth), z + noise(rng));
    }
  }
  return cloud;
}

int cmd_bench(const ndtmc::Config& config, const GlobalOptions& global,
              const BenchArgs& args) {
  std::mt19937_64 rng(global.seed);

  std::vector<ndtmc::PointCloud> clouds;
  if (!args.scans.empty()) {
    for (const auto& path : list_scans(args.scans)) {
      clouds.push_back(ndtmc::load_kitti_scan(path));
    }
  } else {
    clouds.push_back(synthetic_bench_cloud(rng));
  }

  std::vector<double> grid_ms, descriptor_ms, extract_ms;
  std::vector<ndtmc::ExtractionResult> extractions;
  for (int rep = 0; rep < std::max(args.repetitions, 1); ++rep) {
    for (const auto& cloud : clouds) {
      auto start = Clock::now();
      const ndtmc::NdtGrid grid =
          ndtmc::build_grid(cloud, config.ndt_resolution, config.shape);
      grid_ms.push_back(ms_since(start));

      start = Clock::now();
      auto result = ndtmc::extract(grid, config.partition, config.shape);
      descriptor_ms.push_back(ms_since(start));
      extract_ms.push_back(grid_ms.back() + descriptor_ms.back());
      if (extractions.size() < 4) extractions.push_back(std::move(result));
    }
  }

  // Query benchmark against synthetic databases of the requested sizes.
  auto random_database = [&](int size) {
    ndtmc::DescriptorDatabase db;
    std::uniform_real_distribution<double> value(0.0, 8.0);
    for (int i = 0; i < size; ++i) {
      ndtmc::DatabaseEntry entry;
      entry.frame_id = static_cast<std::uint64_t>(i);
      entry.descriptor.matrix.resize(2 * config.partition.ring_count,
                                     config.partition.sector_count);
      for (int r = 0; r < entry.descriptor.matrix.rows(); ++r) {
        for (int c = 0; c < entry.descriptor.matrix.cols(); ++c) {
          entry.descriptor.matrix(r, c) = value(rng);
        }
      }
      entry.geometric.histogram.setZero(config.shape.num_classes());
      for (int j = 0; j < entry.geometric.histogram.size(); ++j) {
        entry.geometric.histogram(j) = value(rng);
      }
      entry.geometric.histogram /= entry.geometric.histogram.sum();
      entry.geometric.total_cells = 1;
      entry.sector = ndtmc::sector_key(entry.descriptor);
      db.add(std::move(entry));
    }
    db.build_index();
    return db;
  };

  std::vector<std::pair<int, Stats>> query_stats;
  for (int size : args.database_sizes) {
    const ndtmc::DescriptorDatabase db = random_database(size);
    std::vector<double> query_ms;
    for (int rep = 0; rep < std::max(args.repetitions, 1); ++rep) {
      for (const auto& extraction : extractions) {
        const auto start = Clock::now();
        (void)db.query(extraction, config.matcher);
        query_ms.push_back(ms_since(start));
      }
    }
    query_stats.emplace_back(size, summarize(query_ms));
  }

  const Stats grid = summarize(grid_ms);
  const Stats descriptor = summarize(descriptor_ms);
  const Stats extract = summarize(extract_ms);

  auto print_row = [](const std::string& stage, const Stats& s,
                      std::size_t samples) {
    std::cout << stage << ": mean " << s.mean << " ms, median " << s.median
              << " ms, p95 " << s.p95 << " ms, min " << s.min << " ms ("
              << samples << " samples)\n";
  };
  print_row("grid build      ", grid, grid_ms.size());
  print_row("descriptor      ", descriptor, descriptor_ms.size());
  print_row("extract (total) ", extract, extract_ms.size());
  const std::size_t query_samples =
      extractions.size() * std::max(args.repetitions, 1);
  for (const auto& [size, stats] : query_stats) {
    print_row("query vs " + std::to_string(size) + " entries", stats,
              query_samples);
  }

  if (!args.output.empty()) {
    std::ofstream out(args.output, std::ios::trunc);
    if (!out) {
      throw ndtmc::IoError("cannot open bench report for writing: " + args.output);
    }
    out << "stage,mean_ms,median_ms,p95_ms,min_ms,samples,database_size\n";
    out.precision(17);
    const auto row = [&](const std::string& stage, const Stats& s,
                         std::size_t samples, int db_size) {
      out << stage << ',' << s.mean << ',' << s.median << ',' << s.p95 << ','
          << s.min << ',' << samples << ',' << db_size << '\n';
    };
    row("grid_build", grid, grid_ms.size(), 0);
    row("descriptor", descriptor, descriptor_ms.size(), 0);
    row("extract_total", extract, extract_ms.size(), 0);
    for (const auto& [size, stats] : query_stats) {
      row("query", stats, query_samples, size);
    }
  }
  return 0;
}

// ----------------------------------------------------------------- submap

struct SubmapArgs {
  std::string scans;
  std::string poses;
  std::string output;
};

int cmd_submap(const ndtmc::Config& config, const SubmapArgs& args) {
  const auto scans = list_scans(args.scans);
  const auto poses = ndtmc::load_kitti_poses(args.poses);
  if (poses.size() < scans.size()) {
    throw ndtmc::FormatError("pose file has " + std::to_string(poses.size()) +
                             " poses for " + std::to_string(scans.size()) +
                             " scans");
  }

  ndtmc::SubmapBuilder builder(config.submap, config.ndt_resolution,
                               config.shape);
  std::vector<ndtmc::PlaceRecord> places;
  for (std::size_t i = 0; i < scans.size(); ++i) {
    builder.accumulate(ndtmc::load_kitti_scan(scans[i]), poses[i]);
    if (auto place = builder.emit_place()) {
      std::cerr << "place " << place->place_id << ": frames "
                << place->first_frame << ".." << place->last_frame << ", "
                << place->grid.size() << " cells\n";
      places.push_back(std::move(*place));
    }
  }
  ndtmc::save_places(args.output, places);
  std::cout << "built " << places.size() << " places from " << scans.size()
            << " scans -> " << args.output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NDT-Map-Code descriptor toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "configuration file");
  app.add_option("--profile", global.profile,
                 "parameter profile: kitti, parking, or custom");
  app.add_option("--threads", global.threads, "worker threads")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", global.seed, "seed for synthetic fixtures");

  ExtractArgs extract_args;
  auto* extract = app.add_subcommand("extract",
                                     "build a descriptor database from scans "
                                     "or a places file");
  extract->add_option("input", extract_args.input, "scan directory or places file")
      ->required();
  extract->add_option("--output,-o", extract_args.output, "database file")
      ->required();
  extract->add_option("--poses", extract_args.poses,
                      "attach poses from a KITTI pose file");

  std::string index_database;
  auto* index = app.add_subcommand("index", "validate a database and build its index");
  index->add_option("database", index_database, "database file")->required();

  QueryArgs query_args;
  auto* query = app.add_subcommand("query", "match queries against a database");
  query->add_option("--database,-d", query_args.database, "database file")
      ->required();
  query->add_option("input", query_args.input, "query scan directory or places file")
      ->required();
  query->add_option("--output,-o", query_args.output, "matches CSV")->required();

  EvaluateArgs evaluate_args;
  auto* evaluate = app.add_subcommand("evaluate",
                                      "score matches against ground truth");
  evaluate->add_option("--matches", evaluate_args.matches, "matches CSV")
      ->required();
  evaluate->add_option("--poses", evaluate_args.poses, "query pose file")
      ->required();
  evaluate->add_option("--database-poses", evaluate_args.database_poses,
                       "database pose file (defaults to --poses)");
  evaluate->add_option("--output-dir", evaluate_args.output_dir,
                       "directory for result CSVs")
      ->required();
  evaluate->add_option("--sequence", evaluate_args.sequence,
                       "sequence label for the summary");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "time extraction and querying");
  bench->add_option("--scans", bench_args.scans,
                    "scan directory (synthetic cloud when omitted)");
  bench->add_option("--repetitions", bench_args.repetitions, "repetitions")
      ->check(CLI::PositiveNumber);
  bench->add_option("--db-size", bench_args.database_sizes,
                    "synthetic database size(s) for the query stage")
      ->check(CLI::PositiveNumber);
  bench->add_option("--output,-o", bench_args.output, "timing CSV");

  SubmapArgs submap_args;
  auto* submap = app.add_subcommand("submap", "build places from posed scans");
  submap->add_option("--scans", submap_args.scans, "scan directory")->required();
  submap->add_option("--poses", submap_args.poses, "KITTI pose file")->required();
  submap->add_option("--output,-o", submap_args.output, "places file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const ndtmc::Config config = resolve_config(global);
    if (extract->parsed()) return cmd_extract(config, global, extract_args);
    if (index->parsed()) return cmd_index(index_database);
    if (query->parsed()) return cmd_query(config, global, query_args);
    if (evaluate->parsed()) return cmd_evaluate(config, evaluate_args);
    if (bench->parsed()) return cmd_bench(config, global, bench_args);
    if (submap->parsed()) return cmd_submap(config, submap_args);
  } catch (const ndtmc::IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const ndtmc::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 3;
  } catch (const ndtmc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
