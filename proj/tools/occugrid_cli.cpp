// occugrid command line: batch occupancy label generation, verification,
// statistics, benchmarking. Exit codes: 0 success, 1 verification failure,
// 2 usage/input error.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <thread>

#include <CLI11.hpp>

#include "occugrid/frustum_labels.hpp"
#include "occugrid/geometry.hpp"
#include "occugrid/io_formats.hpp"
#include "occugrid/occupancy_math.hpp"
#include "occugrid/sampler.hpp"
#include "occugrid/scene_oracle.hpp"
#include "occugrid/voxel_labels.hpp"

namespace fs = std::filesystem;
using namespace occugrid;

namespace {

struct RunConfig {
  std::string points_path;
  std::string calib_path;
  std::string config_path;
  std::string out_path;
  int threads = 0;  // 0: resolve from env, then default 1
  std::uint64_t seed = 0;
  bool quick = false;
  bool inject_fault = false;  // testing hook

  Config file;  // parsed --config contents, may be empty
};

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("OCCUGRID_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

std::string read_file_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// write temp file then rename, so interrupted runs never leave partial output
void write_file_atomic(const std::string& path, const void* data, std::size_t size) {
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open output file: " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw FormatError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

VoxelGridSpec voxel_spec_from_config(const Config& cfg) {
  Vec3 lo = {2.0, -30.08, -3.0};
  Vec3 hi = {46.8, 30.08, 1.0};
  Vec3 size = {0.16, 0.16, 0.16};
  if (cfg.has("voxel.range_min")) lo = cfg.get_vec3("voxel.range_min");
  if (cfg.has("voxel.range_max")) hi = cfg.get_vec3("voxel.range_max");
  if (cfg.has("voxel.size")) size = cfg.get_vec3("voxel.size");
  return VoxelGridSpec::from_range(lo, hi, size);
}

FrustumGridSpec frustum_spec_from_config(const Config& cfg) {
  FrustumGridSpec f;
  int iw = cfg.has("frustum.image_width") ? cfg.get_int("frustum.image_width") : 1280;
  int ih = cfg.has("frustum.image_height") ? cfg.get_int("frustum.image_height") : 384;
  f.downsample = cfg.has("frustum.downsample") ? cfg.get_int("frustum.downsample") : 4;
  if (f.downsample < 1 || iw % f.downsample != 0 || ih % f.downsample != 0)
    throw ParseError("config: image size must be divisible by frustum.downsample");
  f.width = iw / f.downsample;
  f.height = ih / f.downsample;
  f.depth_bins = cfg.has("frustum.depth_bins") ? cfg.get_int("frustum.depth_bins") : 80;
  f.depth_min = cfg.has("frustum.depth_min") ? cfg.get_double("frustum.depth_min") : 2.0;
  f.depth_max = cfg.has("frustum.depth_max") ? cfg.get_double("frustum.depth_max") : 46.8;
  std::string disc = cfg.get_or("frustum.discretization", "lid");
  if (disc == "lid")
    f.discretization = DepthDiscretization::LID;
  else if (disc == "uniform")
    f.discretization = DepthDiscretization::UNIFORM;
  else
    throw ParseError("config: frustum.discretization must be lid or uniform");
  f.validate();
  return f;
}

void require_input(const std::string& path, const std::string& what) {
  if (path.empty()) throw FormatError("missing required --" + what + " path");
  if (!fs::exists(path)) throw FormatError(what + " file not found: " + path);
}

int cmd_gen_frustum(const RunConfig& rc) {
  require_input(rc.points_path, "points");
  require_input(rc.calib_path, "calib");
  if (rc.out_path.empty()) throw FormatError("missing required --out path");

  auto cloud = read_lidar_bin(read_file_bytes(rc.points_path));
  auto calib = parse_kitti_calib(read_file_text(rc.calib_path));
  auto fspec = frustum_spec_from_config(rc.file);

  auto ind = build_index_map(calib, cloud, fspec);
  auto labels = generate_frustum_labels(ind, fspec);
  auto bytes = write_occ3(labels, fspec);
  write_file_atomic(rc.out_path, bytes.data(), bytes.size());

  std::size_t valid = 0;
  for (int v : ind.grid)
    if (v >= 0) ++valid;
  auto c = labels.counts();
  std::cout << "valid_pixels=" << valid << " occupied=" << c.occupied
            << " free=" << c.free << " unknown=" << c.unknown << "\n";
  return 0;
}

int cmd_gen_voxel(const RunConfig& rc) {
  require_input(rc.points_path, "points");
  require_input(rc.calib_path, "calib");
  if (rc.out_path.empty()) throw FormatError("missing required --out path");

  auto cloud = read_lidar_bin(read_file_bytes(rc.points_path));
  auto calib = parse_kitti_calib(read_file_text(rc.calib_path));
  auto vspec = voxel_spec_from_config(rc.file);

  int threads = resolve_threads(rc.threads);
  auto labels = generate_voxel_labels(vspec, cloud, calib.camera_origin_in_lidar(), threads);
  auto bytes = write_occ3(labels, vspec);
  write_file_atomic(rc.out_path, bytes.data(), bytes.size());

  auto c = labels.counts();
  double total = static_cast<double>(labels.values.size());
  std::cout << "dims=" << vspec.dims[0] << "x" << vspec.dims[1] << "x" << vspec.dims[2]
            << " occupied=" << c.occupied << " free=" << c.free
            << " unknown=" << c.unknown << " occupied_frac=" << c.occupied / total
            << " free_frac=" << c.free / total << " unknown_frac=" << c.unknown / total
            << "\n";
  return 0;
}

SyntheticScene default_wall_scene(std::uint64_t seed) {
  SyntheticScene scene;
  scene.seed = seed;
  scene.camera = {0.0, 0.0, 0.0};
  scene.slabs.push_back({{10.0, -6.0, -2.0}, {10.2, 6.0, 2.0}, 60.0});
  scene.slabs.push_back({{6.0, -3.0, -1.5}, {6.2, -1.0, 0.5}, 60.0});
  return scene;
}

int cmd_verify(const RunConfig& rc) {
  std::uint64_t seed = rc.seed;
  int n_segments = rc.quick ? 100 : 1000;
  int n_scenes = rc.quick ? 5 : 50;
  bool all_pass = true;
  std::vector<std::string> failures;

  auto report = [&](const std::string& name, bool pass) {
    std::cout << (pass ? "PASS" : "FAIL") << " " << name << "\n";
    if (!pass) {
      all_pass = false;
      failures.push_back(name);
    }
  };

  // traversal equivalence against the dense-sampling oracle
  {
    VoxelGridSpec spec = VoxelGridSpec::from_range({0, 0, 0}, {64, 64, 64}, {1, 1, 1});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-10.0, 74.0);
    bool ok = true;
    for (int i = 0; i < n_segments && ok; ++i) {
      Vec3 a = {pos(rng), pos(rng), pos(rng)};
      Vec3 b = {pos(rng), pos(rng), pos(rng)};
      auto visited = traverse_ray(spec, a, b);
      if (rc.inject_fault && !visited.empty()) visited.pop_back();
      auto oracle = oracle_ray_cells(spec, a, b, 10000);
      std::set<std::array<int, 3>> vset(visited.begin(), visited.end());
      for (const auto& c : oracle.cells)
        if (!vset.count(c)) ok = false;
      for (const auto& c : vset)
        if (!oracle.cells.count(c) && !oracle.ambiguous.count(c)) ok = false;
    }
    report("traversal_oracle_equivalence", ok);
  }

  // frustum labels against the scalar oracle
  {
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> y(-8.0, 8.0), z(-2.0, 2.0), x(5.0, 40.0);
    bool ok = true;
    for (int i = 0; i < n_scenes && ok; ++i) {
      SyntheticScene scene;
      scene.seed = seed + 100 + i;
      scene.image_width = 128;
      scene.image_height = 64;
      scene.focal = 60.0;
      int slabs = 1 + static_cast<int>(rng() % 3);
      for (int s = 0; s < slabs; ++s) {
        double x0 = x(rng), y0 = y(rng), z0 = z(rng);
        scene.slabs.push_back({{x0, y0 - 2.0, z0 - 1.0}, {x0 + 0.2, y0 + 2.0, z0 + 1.0}, 40.0});
      }
      auto [cloud, calib] = generate_scene(scene);
      FrustumGridSpec fspec;
      fspec.downsample = 4;
      fspec.width = scene.image_width / 4;
      fspec.height = scene.image_height / 4;
      fspec.depth_bins = 40;
      auto ind = build_index_map(calib, cloud, fspec);
      auto labels = generate_frustum_labels(ind, fspec);
      auto oracle = oracle_frustum_labels(calib, cloud, fspec);
      if (labels.values != oracle.values) ok = false;
    }
    report("frustum_label_oracle_equivalence", ok);
  }

  // voxel label invariants on the wall scene
  {
    auto scene = default_wall_scene(seed);
    auto [cloud, calib] = generate_scene(scene);
    VoxelGridSpec spec = VoxelGridSpec::from_range({2, -8, -3}, {14, 8, 3}, {0.25, 0.25, 0.25});
    Vec3 cam = calib.camera_origin_in_lidar();
    auto serial = generate_voxel_labels(spec, cloud, cam, 1);
    auto parallel = generate_voxel_labels(spec, cloud, cam, 8);
    auto counts = voxelize_points(spec, cloud);
    bool ok = serial.values == parallel.values;
    for (std::size_t i = 0; i < serial.values.size() && ok; ++i)
      if ((serial.values[i] == kOccupied) != (counts.counts[i] > 0)) ok = false;
    report("voxel_label_invariants", ok);
  }

  // determinism of scene generation
  {
    auto scene = default_wall_scene(seed);
    auto a = generate_scene(scene).first;
    auto b = generate_scene(scene).first;
    report("scene_determinism", a.points == b.points);
  }

  if (!all_pass) {
    std::cerr << "verification failed:";
    for (const auto& f : failures) std::cerr << " " << f;
    std::cerr << "\n";
    return 1;
  }
  return 0;
}

int cmd_bench(const RunConfig& rc) {
  SyntheticScene scene;
  scene.seed = rc.seed;
  scene.camera = {0.0, 0.0, 0.0};
  scene.slabs.push_back({{30.0, -25.0, -2.5}, {30.4, 25.0, 2.5}, 400.0});
  auto [cloud, calib] = generate_scene(scene);
  VoxelGridSpec spec = VoxelGridSpec::from_range({2, -30.08, -3}, {46.8, 30.08, 1},
                                                 {0.16, 0.16, 0.16});
  Vec3 cam = calib.camera_origin_in_lidar();
  int threads = resolve_threads(rc.threads);

  auto time_runs = [&](auto&& fn) {
    std::vector<double> times;
    for (int rep = 0; rep < 3; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      fn();
      auto t1 = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times;
  };

  auto vox_t = time_runs([&] { voxelize_points(spec, cloud); });

  std::size_t visited_serial = 0;
  for (const Vec3& p : cloud.points) visited_serial += traverse_ray(spec, p, cam).size();

  std::size_t visited_parallel = 0;
  {
    int nthreads = std::max(1, threads);
    std::vector<std::size_t> partial(nthreads, 0);
    std::vector<std::thread> pool;
    std::size_t chunk = (cloud.size() + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&, t] {
        std::size_t begin = std::min(cloud.size(), t * chunk);
        std::size_t end = std::min(cloud.size(), begin + chunk);
        for (std::size_t i = begin; i < end; ++i)
          partial[t] += traverse_ray(spec, cloud.points[i], cam).size();
      });
    for (auto& th : pool) th.join();
    visited_parallel = std::accumulate(partial.begin(), partial.end(), std::size_t{0});
  }

  auto carve_t = time_runs([&] { generate_voxel_labels(spec, cloud, cam, threads); });

  FrustumGridSpec fspec;
  fspec.downsample = 4;
  fspec.width = 1280 / 4;
  fspec.height = 384 / 4;
  auto fru_t = time_runs([&] {
    auto ind = build_index_map(calib, cloud, fspec);
    generate_frustum_labels(ind, fspec);
  });

  std::cout << "points=" << cloud.size() << " threads=" << threads << "\n";
  std::cout << "voxelize_s min/median/max=" << vox_t[0] << "/" << vox_t[1] << "/"
            << vox_t[2] << " points_per_s=" << cloud.size() / vox_t[1] << "\n";
  std::cout << "carve_s min/median/max=" << carve_t[0] << "/" << carve_t[1] << "/"
            << carve_t[2] << " voxels_visited_per_s=" << visited_serial / carve_t[1]
            << "\n";
  std::cout << "frustum_s min/median/max=" << fru_t[0] << "/" << fru_t[1] << "/"
            << fru_t[2] << "\n";
  std::cout << "visited_total_serial=" << visited_serial
            << " visited_total_parallel=" << visited_parallel << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"occupancy label generation toolkit"};
  app.require_subcommand(1);

  RunConfig rc;
  app.add_option("--points", rc.points_path, "LiDAR point cloud (.bin)");
  app.add_option("--calib", rc.calib_path, "KITTI calibration (.txt)");
  app.add_option("--config", rc.config_path, "key=value config file");
  app.add_option("--out", rc.out_path, "output OCC3 file");
  app.add_option("--threads", rc.threads, "worker threads (env OCCUGRID_THREADS)");
  app.add_option("--seed", rc.seed, "random seed");
  app.add_flag("--quick", rc.quick, "reduced verification set");
  app.add_flag("--inject-fault", rc.inject_fault, "testing hook: break one tie-break")
      ->group("");

  auto* gen_frustum = app.add_subcommand("gen-frustum", "generate frustum occupancy labels");
  auto* gen_voxel = app.add_subcommand("gen-voxel", "generate 3D voxel occupancy labels");
  auto* verify = app.add_subcommand("verify", "run the oracle verification suite");
  auto* bench = app.add_subcommand("bench", "throughput benchmarks");
  // shared options live on the parent; let subcommands pass them through
  for (auto* sub : {gen_frustum, gen_voxel, verify, bench}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!rc.config_path.empty()) {
      require_input(rc.config_path, "config");
      rc.file = parse_config(read_file_text(rc.config_path));
    }
    if (gen_frustum->parsed()) return cmd_gen_frustum(rc);
    if (gen_voxel->parsed()) return cmd_gen_voxel(rc);
    if (verify->parsed()) return cmd_verify(rc);
    if (bench->parsed()) return cmd_bench(rc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
