#include <doctest.h>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "rft/optimize.hpp"
#include "rft/stats.hpp"

using namespace rft;
using testing::solid;

namespace {

FieldEvaluator single_field(const PointEvaluator& pe) {
  return [&pe](const Point& s, Point& g) {
    double v[1], gr[kMaxDim];
    pe.eval(s, v, gr);
    g = {0, 0, 0};
    for (int d = 0; d < pe.dim(); ++d) g[d] = gr[d];
    return v[0];
  };
}

}  // namespace

TEST_CASE("maximum of a single kernel sits at its voxel") {
  const auto m = solid({9, 9});
  std::vector<double> row(81, 0.0);
  row[3 * 9 + 5] = 1.0;
  const GaussianKernel k(3.0, 2);
  const PointEvaluator pe(m, 1, row.data(), k);
  const auto grid = FineGrid::build(m, 1);
  const FieldMaximum best = find_field_maximum(single_field(pe), *grid);
  CHECK(best.location[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(best.location[1] == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(best.value == doctest::Approx(k.value({0, 0, 0})).epsilon(1e-12));
}

TEST_CASE("optimised maximum dominates the grids and matches a dense grid") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 6; ++trial) {
    const auto m = solid({10, 10});
    const auto s = testing::gaussian_sample(m, 8, 100 + trial);
    const GaussianKernel k(3.0, 2);
    const PointEvaluator pe(s, k);
    const TFieldEvaluator te(pe);
    const auto f = te.as_function();
    const auto g1 = FineGrid::build(m, 1);
    const auto T1 = t_field(fields_on_grid(s, k, g1, false, false));
    const FieldMaximum best = find_field_maximum(f, *g1, T1.values);
    double max0 = -1e300, max1 = -1e300;
    for (auto i : g1->voxel_points()) max0 = std::max(max0, T1.values[i]);
    for (double v : T1.values) max1 = std::max(max1, v);
    CHECK(max0 <= max1);
    CHECK(max1 <= best.value + 1e-12);
    CHECK(g1->contains(best.location));

    const auto dense = FineGrid::build(m, 21);
    const auto Td = t_field(fields_on_grid(s, k, dense, false, false));
    // The dense lattice only bounds from below; refine around its argmax
    // with a fine local scan clipped to the square.
    auto refined = [&](auto&& h) {
      std::size_t arg = 0;
      for (std::size_t i = 0; i < Td.values.size(); ++i) {
        if (h(Td.values[i]) > h(Td.values[arg])) arg = i;
      }
      const auto c = dense->point(arg);
      const double step = 1.0 / 22.0;
      double out = h(Td.values[arg]);
      for (int a = -100; a <= 100; ++a) {
        for (int b = -100; b <= 100; ++b) {
          Point x = c;
          x[0] = std::clamp(c[0] + a * step / 100.0, -0.5, 9.5);
          x[1] = std::clamp(c[1] + b * step / 100.0, -0.5, 9.5);
          Point gr;
          out = std::max(out, h(f(x, gr)));
        }
      }
      return out;
    };
    const double maxd = refined([](double v) { return v; });
    CHECK(best.value >= maxd - 1e-4 * std::abs(maxd));
    CHECK(std::abs(best.value - maxd) <= 1e-4 * std::abs(maxd));

    const double sup = supremum_abs(f, *g1, T1.values);
    const double supd = refined([](double v) { return std::abs(v); });
    CHECK(std::abs(sup - supd) <= 1e-4 * supd);

    // Negating every subject swaps the roles of T and -T.
    std::vector<double> neg(s.data());
    for (double& x : neg) x = -x;
    const LatticeSample sn(m, s.subjects(), neg);
    const PointEvaluator pen(sn, k);
    const TFieldEvaluator ten(pen);
    CHECK(supremum_abs(ten.as_function(), *g1) == doctest::Approx(sup).epsilon(1e-12));
  }
}

TEST_CASE("constant field") {
  const auto grid = FineGrid::build(solid({4, 4}), 1);
  const FieldEvaluator c = [](const Point&, Point& g) {
    g = {0, 0, 0};
    return -2.5;
  };
  CHECK(supremum_abs(c, *grid) == doctest::Approx(2.5));
  CHECK_THROWS(find_field_maximum(c, *FineGrid::build(solid({4, 4}), 0)));
}

TEST_CASE("ascent stays inside non-convex manifolds") {
  // L-shaped mask; the maximiser of x + y lies on the boundary.
  const auto m = testing::make_mask({3, 3}, {1, 0, 0, 1, 0, 0, 1, 1, 1});
  const auto grid = FineGrid::build(m, 1);
  const FieldEvaluator f = [](const Point& s, Point& g) {
    g = {1.0, 0.5, 0.0};
    return s[0] + 0.5 * s[1];
  };
  const FieldMaximum best = find_field_maximum(f, *grid);
  CHECK(grid->contains(best.location));
  CHECK(best.value == doctest::Approx(2.5 + 0.5 * 2.5).epsilon(1e-9));
}

TEST_CASE("discrete local maxima") {
  const auto grid = FineGrid::build(solid({5}), 0);
  const auto mx = discrete_local_maxima(*grid, {0, 2, 1, 1, 3});
  CHECK(mx == std::vector<std::int64_t>{1, 4});
}
