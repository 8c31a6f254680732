#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "occugrid/geometry.hpp"

namespace occugrid {

enum class Space : std::uint8_t { FRUSTUM = 0, VOXEL = 1 };

constexpr std::int8_t kUnknown = -1;
constexpr std::int8_t kFree = 0;
constexpr std::int8_t kOccupied = 1;

// Tri-state labels over either grid. Frustum shape is (H_F, W_F, D) with the
// row index slowest; voxel shape is (X, Y, Z) with x slowest.
struct OccupancyLabelGrid {
  Space space = Space::VOXEL;
  std::array<int, 3> dims{};
  std::vector<std::int8_t> values;  // dims[0]*dims[1]*dims[2], row-major

  static OccupancyLabelGrid unknown(Space space, std::array<int, 3> dims) {
    OccupancyLabelGrid g;
    g.space = space;
    g.dims = dims;
    g.values.assign(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2],
                    kUnknown);
    return g;
  }

  std::size_t flat_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k;
  }

  std::int8_t at(int i, int j, int k) const { return values[flat_index(i, j, k)]; }
  std::int8_t& at(int i, int j, int k) { return values[flat_index(i, j, k)]; }

  struct Counts {
    std::size_t free = 0;
    std::size_t occupied = 0;
    std::size_t unknown = 0;
  };

  Counts counts() const {
    Counts c;
    for (std::int8_t v : values) {
      if (v == kFree)
        ++c.free;
      else if (v == kOccupied)
        ++c.occupied;
      else
        ++c.unknown;
    }
    return c;
  }
};

// Per feature pixel categorical depth index; -1 means no valid projection.
struct IndexMap {
  int height = 0;  // H_F
  int width = 0;   // W_F
  std::vector<int> grid;  // height*width, row-major

  int at(int row, int col) const { return grid[static_cast<std::size_t>(row) * width + col]; }
  int& at(int row, int col) { return grid[static_cast<std::size_t>(row) * width + col]; }
};

}  // namespace occugrid
