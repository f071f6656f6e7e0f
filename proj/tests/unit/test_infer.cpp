#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "helpers.hpp"
#include "rft/infer.hpp"
#include "rft/io.hpp"
#include "rft/sim.hpp"

using namespace rft;
namespace fs = std::filesystem;

namespace {

/// Null noise plus a bump of height `amp` and radius `radius` voxels at `centre`.
LatticeSample with_bump(const MaskPtr& m, int N, std::uint32_t item, double amp, double radius, const Point& centre) {
  const auto s = testing::gaussian_sample(m, N, 61, item);
  std::vector<double> data(s.data());
  const std::int64_t V = s.voxels();
  for (std::int64_t v = 0; v < V; ++v) {
    const Point p = m->voxel_position(v);
    const double d = std::hypot(p[0] - centre[0], p[1] - centre[1]);
    if (d > radius) continue;
    const double h = amp * 0.5 * (1.0 + std::cos(M_PI * d / radius));
    for (int n = 0; n < N; ++n) data[n * V + v] += h;
  }
  return LatticeSample(m, N, std::move(data));
}

}  // namespace

TEST_CASE("a planted bump is found") {
  const auto m = testing::solid({20, 20});
  InferOptions o;
  o.fwhm = 3.0;
  int hits = 0;
  for (std::uint32_t rep = 0; rep < 100; ++rep) {
    const auto s = with_bump(m, 30, rep, 5.0, 5.0, {9.5, 10.0, 0});
    const auto r = infer(s, o);
    if (!r.rejected || r.regions.empty()) continue;
    const auto& top = r.regions.front();
    if (top.sign == 1 && std::hypot(top.peak[0] - 9.5, top.peak[1] - 10.0) < 3.0) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("regions are consistent with the threshold") {
  const auto m = testing::solid({16, 14});
  for (int res : {0, 1, kResolutionInfinity}) {
    for (std::uint32_t rep = 0; rep < 5; ++rep) {
      const auto s = with_bump(m, 12, 100 + rep, 1.2, 4.0, {8.0, 7.0, 0});
      InferOptions o;
      o.resolution = res;
      o.fwhm = 2.5;
      const auto r = infer(s, o);
      CHECK(r.threshold > 0.0);
      CHECK(r.resolution == res);
      CHECK(r.rejected == (std::abs(r.max_value) > r.threshold));
      CHECK(r.rejected == !r.regions.empty());
      for (std::size_t i = 0; i < r.regions.size(); ++i) {
        const auto& g = r.regions[i];
        CHECK(g.id == static_cast<int>(i) + 1);
        CHECK(g.sign * g.peak_value > r.threshold);
        CHECK(g.points > 0);
        if (i > 0) CHECK(std::abs(g.peak_value) <= std::abs(r.regions[i - 1].peak_value));
      }
      if (res == 0) {
        // The lattice maximum sits on a voxel centre.
        CHECK(std::abs(r.max_location[0] - std::round(r.max_location[0])) < 1e-12);
        CHECK(std::abs(r.max_location[1] - std::round(r.max_location[1])) < 1e-12);
      }
    }
  }
}

TEST_CASE("the continuous maximum dominates the lattice maxima") {
  const auto m = testing::solid({12, 12});
  const auto s = testing::gaussian_sample(m, 10, 4);
  InferOptions o;
  double prev = 0.0;
  for (int res : {0, 1, kResolutionInfinity}) {
    o.resolution = res;
    const auto r = infer(s, o);
    CHECK(std::abs(r.max_value) >= prev - 1e-12);
    prev = std::abs(r.max_value);
  }
}

TEST_CASE("one-tailed inference ignores negative values") {
  const auto m = testing::solid({14, 14});
  const auto s = with_bump(m, 20, 7, -4.0, 4.0, {7.0, 7.0, 0});
  InferOptions o;
  const auto two = infer(s, o);
  CHECK(two.rejected);
  CHECK(two.regions.front().sign == -1);
  o.tails = Tails::one;
  const auto one = infer(s, o);
  CHECK(one.threshold < two.threshold);
  for (const auto& g : one.regions) CHECK(g.sign == 1);
}

TEST_CASE("bad options") {
  const auto m = testing::solid({8, 8});
  const auto s = testing::gaussian_sample(m, 6, 2);
  InferOptions o;
  o.alpha = 1.5;
  CHECK_THROWS_AS(infer(s, o), Error);
  o.alpha = 0.05;
  o.resolution = 3;
  CHECK_THROWS_AS(infer(s, o), Error);
  o.resolution = 1;
  o.fwhm = -1.0;
  CHECK_THROWS_AS(infer(s, o), Error);
  // On a two-voxel domain the EEC at u = 0 stays well below 0.99.
  const auto tiny = testing::gaussian_sample(testing::solid({2}), 6, 3);
  o.fwhm = 2.0;
  o.alpha = 0.99;
  o.tails = Tails::one;
  CHECK_THROWS_AS(infer(tiny, o), Error);
}

TEST_CASE("command line inference agrees with the library") {
  const auto dir = fs::temp_directory_path() / ("rft_infer_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto m = testing::solid({12, 10});
  const auto s = with_bump(m, 15, 3, 2.0, 3.0, {6.0, 5.0, 0});
  const auto in = (dir / "s.rfld").string();
  const auto out = (dir / "r.json").string();
  write_sample(in, s);
  const std::string cmd = std::string(RFT_BINARY) + " infer --input " + in + " --fwhm 3 --resolution 1 --format json > " + out;
  REQUIRE(std::system(cmd.c_str()) == 0);
  std::ifstream f(out);
  const auto j = nlohmann::json::parse(f);
  InferOptions o;
  o.resolution = 1;
  const auto r = infer(s, o);
  CHECK(j.at("threshold").get<double>() == doctest::Approx(r.threshold).epsilon(1e-9));
  CHECK(j.at("rejected").get<bool>() == r.rejected);
  CHECK(j.at("regions").size() == r.regions.size());
  fs::remove_all(dir);
}
