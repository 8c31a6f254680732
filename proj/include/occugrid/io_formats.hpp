#pragma once

#include <cstdint>
#include <cstring>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "occugrid/geometry.hpp"
#include "occugrid/occupancy_grid.hpp"

namespace occugrid {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- KITTI velodyne .bin: little-endian f32 quadruples (x, y, z, intensity)

inline PointCloud read_lidar_bin(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() % 16 != 0)
    throw FormatError("lidar bin: length " + std::to_string(bytes.size()) +
                      " not divisible by 16");
  PointCloud cloud;
  std::size_t n = bytes.size() / 16;
  cloud.points.reserve(n);
  cloud.intensity.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    float v[4];
    std::memcpy(v, bytes.data() + i * 16, 16);
    for (int k = 0; k < 4; ++k)
      if (!std::isfinite(v[k]))
        throw FormatError("lidar bin: non-finite value at point " + std::to_string(i));
    cloud.points.push_back({v[0], v[1], v[2]});
    cloud.intensity.push_back(v[3]);
  }
  return cloud;
}

// ---- OCC3 container
//
// Little-endian header, fields in order:
//   magic "OCC3" (4) | version u16 (=1) | space u8 | dims 3*u32 |
//   origin 3*f64 | cell_size 3*f64
// followed by the int8 label payload, first dim slowest.
// Header dims are (W_F, H_F, D) for frustum and (X, Y, Z) for voxel;
// frustum payload order stays (row, column, bin).

constexpr std::size_t kOcc3HeaderSize = 4 + 2 + 1 + 12 + 24 + 24;
constexpr std::uint16_t kOcc3Version = 1;

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T get_le(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> write_occ3(const OccupancyLabelGrid& grid,
                                            const Vec3& origin,
                                            const Vec3& cell_size) {
  std::vector<std::uint8_t> out;
  out.reserve(kOcc3HeaderSize + grid.values.size());
  out.insert(out.end(), {'O', 'C', 'C', '3'});
  detail::put_le<std::uint16_t>(out, kOcc3Version);
  out.push_back(static_cast<std::uint8_t>(grid.space));
  std::array<int, 3> hdims = grid.dims;
  if (grid.space == Space::FRUSTUM) std::swap(hdims[0], hdims[1]);  // (W_F, H_F, D)
  for (int d : hdims) detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  for (double v : origin) detail::put_le<double>(out, v);
  for (double v : cell_size) detail::put_le<double>(out, v);
  for (std::int8_t v : grid.values) out.push_back(static_cast<std::uint8_t>(v));
  return out;
}

inline std::vector<std::uint8_t> write_occ3(const OccupancyLabelGrid& grid,
                                            const VoxelGridSpec& spec) {
  return write_occ3(grid, spec.origin, spec.voxel_size);
}

inline std::vector<std::uint8_t> write_occ3(const OccupancyLabelGrid& grid,
                                            const FrustumGridSpec& spec) {
  return write_occ3(grid, {0.0, 0.0, 0.0},
                    {static_cast<double>(spec.downsample), 0.0, 0.0});
}

struct Occ3File {
  OccupancyLabelGrid grid;
  Vec3 origin{};
  Vec3 cell_size{};
};

inline Occ3File read_occ3(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kOcc3HeaderSize)
    throw FormatError("occ3: file shorter than header (" +
                      std::to_string(bytes.size()) + " bytes)");
  if (std::memcmp(bytes.data(), "OCC3", 4) != 0)
    throw FormatError("occ3: bad magic");
  std::size_t pos = 4;
  auto version = detail::get_le<std::uint16_t>(bytes, pos);
  if (version != kOcc3Version)
    throw FormatError("occ3: unsupported version " + std::to_string(version));
  std::uint8_t space = bytes[pos++];
  if (space > 1) throw FormatError("occ3: bad space tag " + std::to_string(space));

  Occ3File f;
  f.grid.space = static_cast<Space>(space);
  std::array<std::uint32_t, 3> hdims;
  for (auto& d : hdims) {
    d = detail::get_le<std::uint32_t>(bytes, pos);
    if (d == 0 || d > (1u << 24)) throw FormatError("occ3: bad dimension " + std::to_string(d));
  }
  for (auto& v : f.origin) v = detail::get_le<double>(bytes, pos);
  for (auto& v : f.cell_size) v = detail::get_le<double>(bytes, pos);

  f.grid.dims = {static_cast<int>(hdims[0]), static_cast<int>(hdims[1]),
                 static_cast<int>(hdims[2])};
  if (f.grid.space == Space::FRUSTUM) std::swap(f.grid.dims[0], f.grid.dims[1]);

  std::size_t cells = static_cast<std::size_t>(hdims[0]) * hdims[1] * hdims[2];
  std::size_t actual = bytes.size() - kOcc3HeaderSize;
  if (actual != cells)
    throw FormatError("occ3: payload length mismatch, expected " +
                      std::to_string(cells) + " bytes, got " + std::to_string(actual));
  f.grid.values.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    std::int8_t v = static_cast<std::int8_t>(bytes[kOcc3HeaderSize + i]);
    if (v < -1 || v > 1)
      throw FormatError("occ3: invalid label value at cell " + std::to_string(i));
    f.grid.values[i] = v;
  }
  return f;
}

// ---- ASCII PLY export of voxel centers matching one status
//
// Colors: occupied red (255,0,0), free green (0,255,0), unknown gray
// (128,128,128).

inline std::string export_ply(const OccupancyLabelGrid& grid,
                              const VoxelGridSpec& spec, std::int8_t which) {
  if (grid.space != Space::VOXEL)
    throw FormatError("export_ply: only VOXEL grids are supported");
  if (grid.dims != spec.dims)
    throw ArgumentError("export_ply: grid/spec dims mismatch");

  std::size_t count = 0;
  for (std::int8_t v : grid.values)
    if (v == which) ++count;

  int r = 128, g = 128, b = 128;
  if (which == kOccupied) { r = 255; g = 0; b = 0; }
  else if (which == kFree) { r = 0; g = 255; b = 0; }

  std::ostringstream out;
  out << "ply\nformat ascii 1.0\nelement vertex " << count
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\n"
         "end_header\n";
  for (int x = 0; x < grid.dims[0]; ++x)
    for (int y = 0; y < grid.dims[1]; ++y)
      for (int z = 0; z < grid.dims[2]; ++z) {
        if (grid.at(x, y, z) != which) continue;
        Vec3 c = spec.voxel_center(x, y, z);
        out << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << r << ' ' << g
            << ' ' << b << '\n';
      }
  return out.str();
}

// ---- line-oriented key=value config (also used for scene descriptions);
// '#' starts a comment, repeated keys accumulate.

struct Config {
  std::map<std::string, std::vector<std::string>> entries;

  bool has(const std::string& key) const { return entries.count(key) > 0; }

  const std::string& get(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) throw ParseError("config: missing key " + key);
    return it->second.back();
  }

  std::string get_or(const std::string& key, const std::string& fallback) const {
    auto it = entries.find(key);
    return it == entries.end() ? fallback : it->second.back();
  }

  double get_double(const std::string& key) const {
    try {
      return std::stod(get(key));
    } catch (const std::logic_error&) {
      throw ParseError("config: key " + key + " is not a number");
    }
  }

  int get_int(const std::string& key) const {
    try {
      return std::stoi(get(key));
    } catch (const std::logic_error&) {
      throw ParseError("config: key " + key + " is not an integer");
    }
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::istringstream iss(get(key));
    std::vector<double> vals;
    double v;
    while (iss >> v) vals.push_back(v);
    if (vals.empty()) throw ParseError("config: key " + key + " has no numbers");
    return vals;
  }

  Vec3 get_vec3(const std::string& key) const {
    auto v = get_doubles(key);
    if (v.size() != 3) throw ParseError("config: key " + key + " needs 3 numbers");
    return {v[0], v[1], v[2]};
  }
};

inline Config parse_config(const std::string& text) {
  Config cfg;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t\r");
      auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError("config line " + std::to_string(lineno) + ": empty key");
    cfg.entries[key].push_back(val);
  }
  return cfg;
}

}  // namespace occugrid
