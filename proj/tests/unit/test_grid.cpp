#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "rft/grid.hpp"

using namespace rft;
using testing::make_mask;
using testing::solid;

TEST_CASE("voxel manifold of simple blocks") {
  const auto one = build_voxel_manifold(Mask::solid({1, 1, 1}));
  CHECK(one.volume == doctest::Approx(1.0));
  CHECK(one.boundary_area == doctest::Approx(6.0));
  CHECK(one.euler_characteristic == 1);

  const auto cube = build_voxel_manifold(Mask::solid({2, 2, 2}));
  CHECK(cube.volume == doctest::Approx(8.0));
  CHECK(cube.boundary_area == doctest::Approx(24.0));
  CHECK(cube.euler_characteristic == 1);

  const auto aniso = build_voxel_manifold(Mask::solid({3, 2}, {2.0, 0.5}));
  CHECK(aniso.volume == doctest::Approx(6.0));
  CHECK(aniso.boundary_area == doctest::Approx(2 * 6.0 + 2 * 1.0));
  CHECK(aniso.face_area[0] == doctest::Approx(2.0));
  CHECK(aniso.face_area[1] == doctest::Approx(12.0));
}

TEST_CASE("2D frame has chi 0, a solid block chi 1") {
  std::vector<std::uint8_t> frame(9, 1);
  frame[4] = 0;
  CHECK(build_voxel_manifold(*make_mask({3, 3}, frame)).euler_characteristic == 0);
  CHECK(build_voxel_manifold(Mask::solid({4, 7})).euler_characteristic == 1);
  CHECK(build_voxel_manifold(Mask::solid({5})).euler_characteristic == 1);
  CHECK(build_voxel_manifold(*make_mask({5}, {1, 0, 1, 0, 1})).euler_characteristic == 3);
  CHECK(build_voxel_manifold(*make_mask({5}, {1, 0, 1, 0, 1})).boundary_area == doctest::Approx(6.0));
}

TEST_CASE("empty mask is rejected") {
  CHECK_THROWS_WITH(Mask({2, 2}, {1.0, 1.0}, {0, 0, 0, 0}), "empty domain");
  CHECK_THROWS(Mask({2, 2}, {1.0, -1.0}, {1, 1, 1, 1}));
  CHECK_THROWS(Mask({2, 2, 2, 2}, {1, 1, 1, 1}, std::vector<std::uint8_t>(16, 1)));
}

TEST_CASE("chi of the voxel manifold matches flood fill on random 2D masks") {
  std::mt19937_64 g(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = 3 + trial % 9, h = 2 + (trial * 7) % 11;
    const auto m = testing::random_mask(g, {h, w}, 0.3 + 0.4 * (trial % 3) / 2.0);
    // Mask storage is row-major with the last axis fastest, so axis 1 is x.
    const long oracle_chi = oracle::flood_fill_euler_2d(m->inclusion(), w, h, true);
    CHECK(build_voxel_manifold(*m).euler_characteristic == oracle_chi);
  }
}

TEST_CASE("chi of the voxel manifold matches cell enumeration on random 3D masks") {
  std::mt19937_64 g(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = testing::random_mask(g, {4, 3, 5}, 0.5);
    std::vector<std::array<int, 3>> vox;
    for (auto lin : m->voxels()) {
      const Index i = m->unravel(lin);
      vox.push_back({i[0], i[1], i[2]});
    }
    CHECK(build_voxel_manifold(*m).euler_characteristic == oracle::voxel_union_euler_3d(vox));
  }
}

TEST_CASE("refined grid point counts") {
  CHECK(FineGrid::build(solid({1, 1, 1}), 1)->size() == 27);
  const auto g0 = FineGrid::build(solid({1, 1, 1}), 0);
  REQUIRE(g0->size() == 1);
  CHECK(g0->point(0)[0] == 0.0);
  CHECK(FineGrid::build(solid({2}), 1)->size() == 5);
  // r = 0 reproduces the voxel centres exactly.
  const auto m = make_mask({3, 4}, {1, 0, 1, 1, 0, 1, 1, 0, 1, 1, 1, 1}, {2.0, 0.5});
  const auto g = FineGrid::build(m, 0);
  REQUIRE(g->size() == static_cast<std::size_t>(m->voxel_count()));
  for (std::int64_t v = 0; v < m->voxel_count(); ++v) {
    const Point p = m->voxel_position(v);
    CHECK(g->point(v) == p);
    CHECK(g->voxel_point(v) == v);
  }
}

TEST_CASE("integration weights of a single voxel") {
  const auto g = FineGrid::build(solid({1, 1, 1}), 1);
  double total = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Point& p = g->point(i);
    total += g->volume_weights()[i];
    // Cell side 1/2: a corner keeps one octant of its cell inside S.
    if (std::abs(p[0]) == 0.5 && std::abs(p[1]) == 0.5 && std::abs(p[2]) == 0.5) {
      CHECK(g->volume_weights()[i] / 0.125 == doctest::Approx(0.125));
    }
    if (p == Point{0.0, 0.0, 0.0}) CHECK(g->volume_weights()[i] == doctest::Approx(0.125));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("interior points carry the full cell volume") {
  const auto g = FineGrid::build(solid({6, 6}, {1.0, 2.0}), 3);
  const double cell = (1.0 / 4) * (2.0 / 4);
  int interior = 0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Point& p = g->point(i);
    if (p[0] > 0.0 && p[0] < 5.0 && p[1] > 0.0 && p[1] < 10.0) {
      CHECK(g->volume_weights()[i] == doctest::Approx(cell));
      ++interior;
    }
  }
  CHECK(interior > 0);
}

TEST_CASE("weight partitions hold for every r on random masks") {
  std::mt19937_64 gen(5);
  const std::vector<std::vector<int>> shapes{{7}, {5, 6}, {3, 4, 3}};
  for (const auto& dims : shapes) {
    for (int trial = 0; trial < 4; ++trial) {
      auto m0 = testing::random_mask(gen, dims, 0.6);
      std::vector<double> h;
      for (std::size_t d = 0; d < dims.size(); ++d) h.push_back(0.5 + 0.5 * d + 0.25 * trial);
      const auto m = make_mask(dims, m0->inclusion(), h);
      const auto s = build_voxel_manifold(*m);
      for (int r = 0; r <= 5; ++r) {
        const auto g = FineGrid::build(m, r);
        double vol = 0.0;
        for (double w : g->volume_weights()) vol += w;
        CHECK(vol == doctest::Approx(s.volume).epsilon(1e-10));
        if (r == 0) CHECK(g->size() == static_cast<std::size_t>(m->voxel_count()));
        if (r > 0) CHECK(g->size() > static_cast<std::size_t>(m->voxel_count()));
        for (int a = 0; a < m->dim(); ++a) {
          double area = 0.0;
          for (const auto& f : g->faces(a)) area += f.weight;
          CHECK(area == doctest::Approx(s.face_area[a]).epsilon(1e-10));
        }
        for (const auto& p : g->points()) CHECK(g->contains(p));
      }
    }
  }
}

TEST_CASE("grid points are ordered lexicographically and deduplicated") {
  const auto g = FineGrid::build(make_mask({3, 3}, {1, 1, 0, 1, 1, 1, 0, 1, 1}), 2);
  for (std::size_t i = 1; i < g->size(); ++i) CHECK(g->point(i - 1) < g->point(i));
  for (std::size_t i = 0; i < g->size(); ++i) CHECK(g->lookup(g->fine_index(i)) == static_cast<std::int64_t>(i));
}

TEST_CASE("projection onto the voxel manifold") {
  const auto g = FineGrid::build(make_mask({2, 2}, {1, 0, 0, 1}), 1);
  // Voxels (0,0) and (1,1) touch at the corner (0.5, 0.5).
  CHECK(g->contains({0.5, 0.5, 0.0}));
  CHECK_FALSE(g->contains({1.0, 0.0, 0.0}));
  const Point p = g->project({1.2, -0.1, 0.0});
  CHECK(g->contains(p));
  // Box of voxel (1,1) is nearer (distance 0.6) than that of (0,0) (0.7).
  CHECK(p[0] == doctest::Approx(1.2));
  CHECK(p[1] == doctest::Approx(0.5));
}

TEST_CASE("padding keeps the original voxels in place") {
  const auto m = make_mask({2, 3}, {1, 0, 1, 1, 1, 0});
  const Mask p = m->padded(2);
  const Mask e = m->embedded(2);
  CHECK(p.dims() == std::vector<int>{6, 7});
  CHECK(p.voxel_count() == 42);
  CHECK(e.voxel_count() == m->voxel_count());
  for (auto lin : m->voxels()) {
    Index i = m->unravel(lin);
    i[0] += 2;
    i[1] += 2;
    CHECK(e.inside(i));
  }
}
