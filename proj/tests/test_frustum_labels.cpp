#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "occugrid/frustum_labels.hpp"

using namespace occugrid;

namespace {

FrustumGridSpec small_spec() {
  FrustumGridSpec spec;
  spec.width = 8;
  spec.height = 4;
  spec.depth_bins = 10;
  spec.downsample = 2;
  spec.depth_min = 2.0;
  spec.depth_max = 20.0;
  spec.discretization = DepthDiscretization::UNIFORM;
  return spec;
}

Calibration plain_calib(const FrustumGridSpec& spec, double f = 20.0) {
  Calibration c;
  c.intrinsic = {{{f, 0, spec.image_width() / 2.0, 0},
                  {0, f, spec.image_height() / 2.0, 0},
                  {0, 0, 1, 0}}};
  return c;
}

}  // namespace

TEST_CASE("build_index_map: empty cloud gives all -1") {
  auto spec = small_spec();
  auto ind = build_index_map(plain_calib(spec), PointCloud{}, spec);
  for (int v : ind.grid) CHECK(v == -1);
}

TEST_CASE("build_index_map: single point lands in its block, everything else -1") {
  auto spec = small_spec();
  auto calib = plain_calib(spec);
  PointCloud cloud;
  cloud.points.push_back({0.0, 0.0, 5.0});  // principal ray, depth 5
  auto ind = build_index_map(calib, cloud, spec);
  int hits = 0;
  for (int r = 0; r < spec.height; ++r)
    for (int c = 0; c < spec.width; ++c)
      if (ind.at(r, c) >= 0) {
        ++hits;
        CHECK(ind.at(r, c) == *depth_to_bin(spec, 5.0));
        CHECK(r == spec.height / 2);
        CHECK(c == spec.width / 2);
      }
  CHECK(hits == 1);
}

TEST_CASE("build_index_map: minimum depth survives within a block") {
  auto spec = small_spec();
  auto calib = plain_calib(spec);
  PointCloud cloud;
  cloud.points.push_back({0.0, 0.0, 9.0});
  cloud.points.push_back({0.0, 0.0, 5.0});  // same pixel, closer
  auto ind = build_index_map(calib, cloud, spec);
  CHECK(ind.at(spec.height / 2, spec.width / 2) == *depth_to_bin(spec, 5.0));
}

TEST_CASE("build_index_map: out-of-range depth is invalid") {
  auto spec = small_spec();
  PointCloud cloud;
  cloud.points.push_back({0.0, 0.0, 25.0});  // beyond depth_max
  auto ind = build_index_map(plain_calib(spec), cloud, spec);
  for (int v : ind.grid) CHECK(v == -1);
}

TEST_CASE("generate_frustum_labels applies the 2x2 example literally") {
  FrustumGridSpec spec;
  spec.width = 2;
  spec.height = 2;
  spec.depth_bins = 4;
  spec.downsample = 1;
  IndexMap ind;
  ind.height = 2;
  ind.width = 2;
  ind.grid = {3, -1, 0, 2};
  auto grid = generate_frustum_labels(ind, spec);
  std::int8_t want00[4] = {0, 0, 0, 1};
  std::int8_t want01[4] = {-1, -1, -1, -1};
  std::int8_t want10[4] = {1, -1, -1, -1};
  std::int8_t want11[4] = {0, 0, 1, -1};
  for (int d = 0; d < 4; ++d) {
    CHECK(grid.at(0, 0, d) == want00[d]);
    CHECK(grid.at(0, 1, d) == want01[d]);
    CHECK(grid.at(1, 0, d) == want10[d]);
    CHECK(grid.at(1, 1, d) == want11[d]);
  }
}

TEST_CASE("generate_frustum_labels: all-invalid map gives all-unknown grid") {
  FrustumGridSpec spec;
  spec.width = 3;
  spec.height = 3;
  spec.depth_bins = 5;
  IndexMap ind;
  ind.height = ind.width = 3;
  ind.grid.assign(9, -1);
  auto grid = generate_frustum_labels(ind, spec);
  for (auto v : grid.values) CHECK(v == kUnknown);
}

TEST_CASE("random maps: one occupied bin per valid pixel, pattern 0^k 1 (-1)^rest") {
  FrustumGridSpec spec;
  spec.width = 6;
  spec.height = 5;
  spec.depth_bins = 12;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    IndexMap ind;
    ind.height = spec.height;
    ind.width = spec.width;
    for (int i = 0; i < spec.height * spec.width; ++i)
      ind.grid.push_back(static_cast<int>(rng() % (spec.depth_bins + 1)) - 1);
    auto grid = generate_frustum_labels(ind, spec);
    std::size_t valid = 0, occupied = 0;
    for (int r = 0; r < spec.height; ++r)
      for (int c = 0; c < spec.width; ++c) {
        int surf = ind.at(r, c);
        if (surf >= 0) ++valid;
        for (int d = 0; d < spec.depth_bins; ++d) {
          std::int8_t v = grid.at(r, c, d);
          if (v == kOccupied) {
            ++occupied;
            CHECK(d == surf);
          } else if (surf < 0 || d > surf) {
            CHECK(v == kUnknown);
          } else {
            CHECK(v == kFree);
          }
        }
      }
    CHECK(occupied == valid);
  }
}

TEST_CASE("label generation is permutation-invariant in point order") {
  auto spec = small_spec();
  auto calib = plain_calib(spec);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0), d(3.0, 18.0);
  PointCloud cloud;
  for (int i = 0; i < 300; ++i) cloud.points.push_back({u(rng), u(rng), d(rng)});
  auto a = generate_frustum_labels(build_index_map(calib, cloud, spec), spec);
  std::shuffle(cloud.points.begin(), cloud.points.end(), rng);
  auto b = generate_frustum_labels(build_index_map(calib, cloud, spec), spec);
  CHECK(a.values == b.values);
}
