#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "oracles.hpp"
#include "rft/kernel.hpp"

using namespace rft;

namespace {
const double k8ln2 = 8.0 * std::log(2.0);
const double k4ln2 = 4.0 * std::log(2.0);
}  // namespace

TEST_CASE("fwhm and sigma conversions") {
  CHECK(fwhm_to_sigma(std::sqrt(k8ln2)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fwhm_to_sigma(2 * std::sqrt(k8ln2)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(fwhm_to_sigma(3.0) == doctest::Approx(1.27398).epsilon(1e-5));
  CHECK(sigma_to_fwhm(fwhm_to_sigma(4.5)) == doctest::Approx(4.5));
  CHECK_THROWS(fwhm_to_sigma(0.0));
  CHECK_THROWS(fwhm_to_sigma(-1.0));
  CHECK_THROWS(GaussianKernel(3.0, 2, 3.0));
}

TEST_CASE("kernel value and gradient at the origin") {
  const GaussianKernel k(std::sqrt(k8ln2), 3);
  CHECK(k.value({0, 0, 0}) == doctest::Approx(std::pow(2 * M_PI, -1.5)).epsilon(1e-12));
  CHECK(k.value({0, 0, 0}) == doctest::Approx(0.0634936).epsilon(1e-6));
  const Point g = k.gradient({0, 0, 0});
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  CHECK(g[2] == 0.0);
  // Support is the box of half-width 4 sigma.
  CHECK(k.value({4.01, 0, 0}) == 0.0);
  CHECK(k.value({3.99, 3.99, 3.99}) > 0.0);
}

TEST_CASE("kernel matches the density written out, with anisotropic spacing") {
  const GaussianKernel k(3.0, std::vector<double>{1.0, 2.5});
  const std::vector<double> sig{fwhm_to_sigma(3.0), fwhm_to_sigma(3.0) * 2.5};
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int i = 0; i < 200; ++i) {
    const double x = u(g), y = 2 * u(g);
    CHECK(k.value({x, y, 0}) == doctest::Approx(oracle::gauss_kernel({x, y}, sig)).epsilon(1e-13));
  }
}

TEST_CASE("kernel symmetry and finite-difference gradients") {
  std::mt19937_64 g(2);
  for (int D = 1; D <= 3; ++D) {
    const GaussianKernel k(3.5, D);
    const double s = k.sigma(0);
    std::uniform_real_distribution<double> u(-3.9 * s, 3.9 * s);
    for (int trial = 0; trial < 200; ++trial) {
      Point x{0, 0, 0}, mx{0, 0, 0};
      for (int d = 0; d < D; ++d) {
        x[d] = u(g);
        mx[d] = -x[d];
      }
      CHECK(k.value(x) >= 0.0);
      CHECK(k.value(x) == k.value(mx));
      const Point gx = k.gradient(x), gm = k.gradient(mx);
      Point gv;
      CHECK(k.value_gradient(x, gv) == k.value(x));
      const double step = 1e-5 * s;
      for (int d = 0; d < D; ++d) {
        CHECK(gm[d] == -gx[d]);
        CHECK(gv[d] == gx[d]);
        Point a = x, b = x;
        a[d] += step;
        b[d] -= step;
        const double fd = (k.value(a) - k.value(b)) / (2 * step);
        const double scale = std::max(std::abs(gx[d]), 1e-3 * k.value(x) / s);
        CHECK(std::abs(fd - gx[d]) <= 1e-6 * scale);
      }
    }
  }
}

TEST_CASE("theoretical lambda of smoothed white noise") {
  const Mat L = theoretical_lambda_white_noise(GaussianKernel(2.0, 3));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(L(i, j) == doctest::Approx(i == j ? std::log(2.0) : 0.0));
  }
  CHECK(L(0, 0) == doctest::Approx(0.693147).epsilon(1e-6));
  const Mat I = theoretical_lambda_white_noise(GaussianKernel(std::sqrt(k4ln2), 2));
  CHECK(I(0, 0) == doctest::Approx(1.0));
  CHECK(I(1, 1) == doctest::Approx(1.0));
  CHECK(theoretical_lambda_white_noise(GaussianKernel(1e6, 1))(0, 0) < 1e-11);
  Eigen::SelfAdjointEigenSolver<Mat> es(theoretical_lambda_white_noise(GaussianKernel(3.0, std::vector<double>{1, 2, 3})));
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("discrete true lambda in the interior approaches the white-noise value") {
  const GaussianKernel k(4.0, 2);
  // 10 sigma margin on every side of the centre.
  const int n = 2 * static_cast<int>(std::ceil(10 * k.sigma(0))) + 1;
  const Mask m = Mask::solid({n, n});
  const double c = (n - 1) / 2.0;
  const Mat L = true_lambda_discrete(k, m, {c, c, 0});
  const double want = k4ln2 / 16.0;
  CHECK(L(0, 0) == doctest::Approx(want).epsilon(1e-3));
  CHECK(L(1, 1) == doctest::Approx(want).epsilon(1e-3));
  CHECK(std::abs(L(0, 1)) < 1e-12);
  CHECK_THROWS(true_lambda_discrete(k, m, {-1.0, 0.0, 0.0}));
  // At a corner the field is not stationary.
  const Mat Lc = true_lambda_discrete(k, m, {0.0, 0.0, 0.0});
  CHECK(std::abs(Lc(0, 0) - L(0, 0)) > 0.05 * L(0, 0));
}

TEST_CASE("discrete true lambda at a corner matches a Monte-Carlo derivative covariance") {
  // The oracle smooths i.i.d. N(0,1) lattice noise by direct summation,
  // normalises by the exact pointwise sd and takes central differences.
  const double fwhm = 3.0;
  const GaussianKernel k(fwhm, 2);
  const int n = 12;
  const Mask m = Mask::solid({n, n});
  const std::vector<double> sig{k.sigma(0), k.sigma(1)};
  const double s0 = 0.0, s1 = 0.0, step = 1e-4;
  auto weights = [&](double x, double y) {
    std::vector<double> w(n * n);
    double ss = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        w[i * n + j] = oracle::gauss_kernel({x - i, y - j}, sig);
        ss += w[i * n + j] * w[i * n + j];
      }
    for (double& v : w) v /= std::sqrt(ss);
    return w;
  };
  const auto wxp = weights(s0 + step, s1), wxm = weights(s0 - step, s1);
  const auto wyp = weights(s0, s1 + step), wym = weights(s0, s1 - step);
  std::mt19937_64 g(7);
  std::normal_distribution<double> z;
  const int reps = 100000;
  double cxx = 0, cyy = 0, cxy = 0;
  std::vector<double> e(n * n);
  for (int r = 0; r < reps; ++r) {
    for (double& v : e) v = z(g);
    double dx = 0, dy = 0;
    for (int i = 0; i < n * n; ++i) {
      dx += (wxp[i] - wxm[i]) * e[i];
      dy += (wyp[i] - wym[i]) * e[i];
    }
    dx /= 2 * step;
    dy /= 2 * step;
    cxx += dx * dx;
    cyy += dy * dy;
    cxy += dx * dy;
  }
  const Mat L = true_lambda_discrete(k, m, {s0, s1, 0.0});
  CHECK(cxx / reps == doctest::Approx(L(0, 0)).epsilon(0.02));
  CHECK(cyy / reps == doctest::Approx(L(1, 1)).epsilon(0.02));
  CHECK(std::abs(cxy / reps - L(0, 1)) < 0.02 * L(0, 0));
}
