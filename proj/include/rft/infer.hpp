#pragma once

#include <string>
#include <vector>

#include "rft/convfield.hpp"
#include "rft/ecd.hpp"
#include "rft/lkc.hpp"

namespace rft {

struct InferOptions {
  double fwhm = 3.0;
  /// 0, 1 or kResolutionInfinity: where the supremum is taken.
  int resolution = -1;
  double alpha = 0.05;
  Tails tails = Tails::two;
  bool gaussianize = false;
  /// Added resolution for the LKC estimate.
  int lkc_resolution = 1;
};

/// Connected super-threshold set of the r = 1 grid (3^D - 1 neighbourhood).
struct Region {
  int id = 0;
  int sign = 1;  // +1 for T > u, -1 for T < -u
  int points = 0;
  Point peak{};
  double peak_value = 0.0;  // signed T at the peak
};

struct InferenceResult {
  double threshold = 0.0;
  Tails tails = Tails::two;
  double alpha = 0.0;
  int resolution = 0;
  LKCVector lkcs;
  Point max_location{};
  double max_value = 0.0;  // signed T where |T| (or T) is largest
  bool rejected = false;
  std::vector<Region> regions;
};

/// Single-dataset test of mu(s) = 0: optional Gaussianization, convolution
/// fields, t-field, LKCs, threshold and supremum over the chosen resolution.
InferenceResult infer(const LatticeSample& sample, const InferOptions& opts);

}  // namespace rft
