#pragma once

// Independent reference implementations used by the tests. None of these call
// into the library code they are compared against.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <tuple>
#include <vector>

namespace oracle {

/// Binary image w x h, row-major (x fastest). Returns #components - #holes,
/// components by `fg8 ? 8 : 4`-connectivity and holes as bounded components of
/// the background under the complementary connectivity.
inline long flood_fill_euler_2d(const std::vector<std::uint8_t>& img, int w, int h, bool fg8) {
  // Pad by one so the unbounded background is a single component.
  const int W = w + 2, H = h + 2;
  std::vector<std::uint8_t> p(W * H, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) p[(y + 1) * W + x + 1] = img[y * w + x];
  auto count = [&](std::uint8_t want, bool eight) {
    std::vector<char> seen(W * H, 0);
    long comps = 0;
    std::vector<int> stack;
    for (int s = 0; s < W * H; ++s) {
      if (p[s] != want || seen[s]) continue;
      ++comps;
      seen[s] = 1;
      stack.push_back(s);
      while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        const int cx = c % W, cy = c / W;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (!eight && dx != 0 && dy != 0) continue;
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
            const int n = ny * W + nx;
            if (p[n] == want && !seen[n]) {
              seen[n] = 1;
              stack.push_back(n);
            }
          }
        }
      }
    }
    return comps;
  };
  const long fg = count(1, fg8);
  const long bg = count(0, !fg8);
  return fg - (bg - 1);
}

/// chi of a union of closed unit cubes (voxels given by integer coordinates),
/// by listing every cell of the cubical complex once.
inline long voxel_union_euler_3d(const std::vector<std::array<int, 3>>& voxels) {
  // Cells keyed by lower corner and the set of axes they extend along.
  std::set<std::tuple<int, int, int, int>> cells;  // (x, y, z, axis mask)
  for (const auto& v : voxels) {
    for (int mask = 0; mask < 8; ++mask) {
      // Every cell of the cube [v, v+1]^3: for axes in `mask` the cell spans the
      // edge, for the others it sits at offset 0 or 1.
      for (int off = 0; off < 8; ++off) {
        if (off & mask) continue;
        cells.insert({v[0] + (off & 1), v[1] + ((off >> 1) & 1), v[2] + ((off >> 2) & 1), mask});
      }
    }
  }
  long chi = 0;
  for (const auto& c : cells) {
    const int m = std::get<3>(c);
    const int k = (m & 1) + ((m >> 1) & 1) + ((m >> 2) & 1);
    chi += (k % 2 == 0) ? 1 : -1;
  }
  return chi;
}

/// P(T_nu >= u) for integer nu by the finite trigonometric series for the
/// Student-t CDF (Abramowitz and Stegun 26.7.3 / 26.7.4).
inline double t_upper(double u, int nu) {
  const double theta = std::atan(u / std::sqrt(static_cast<double>(nu)));
  const double c = std::cos(theta), s = std::sin(theta);
  double a;  // P(|T| <= |u|) with sign carried by theta
  if (nu % 2 == 1) {
    double sum = 0.0;
    if (nu > 1) {
      double term = c;
      sum = term;
      for (int k = 3; k <= nu - 2; k += 2) {
        term *= c * c * (k - 1) / k;
        sum += term;
      }
    }
    a = (2.0 / M_PI) * (theta + s * sum);
  } else {
    double term = 1.0, sum = 1.0;
    for (int k = 2; k <= nu - 2; k += 2) {
      term *= c * c * (k - 1) / k;
      sum += term;
    }
    a = s * sum;
  }
  return 0.5 * (1.0 - a);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, F - i / n, (i + 1) / n - F});
  }
  return d;
}

/// Truncated isotropic Gaussian (box support |x_d| <= 4 sigma_d), written out
/// directly from the density.
inline double gauss_kernel(const std::vector<double>& x, const std::vector<double>& sigma) {
  double v = 1.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    if (std::abs(x[d]) > 4.0 * sigma[d]) return 0.0;
    v *= std::exp(-0.5 * x[d] * x[d] / (sigma[d] * sigma[d])) / (std::sqrt(2.0 * M_PI) * sigma[d]);
  }
  return v;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace oracle
