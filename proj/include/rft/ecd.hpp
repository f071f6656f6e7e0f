#pragma once

#include "rft/lkc.hpp"

namespace rft {

enum class FieldType { t, gaussian };
enum class Tails { one, two };

Tails parse_tails(const std::string& s);
std::string to_string(Tails t);

struct ECDensityParams {
  double df = 0.0;  // nu = N - 1; ignored for Gaussian fields
  FieldType type = FieldType::t;

  static ECDensityParams t_field(double df);
  static ECDensityParams gaussian_field();
};

/// rho^d(u), d in 0..3, in the LKC convention (no FWHM factors).
double ec_density(int d, const ECDensityParams& p, double u);

/// sum_d L_d rho^d(u).
double eec(const LKCVector& lkcs, const ECDensityParams& p, double u);

/// Largest u with eec(u) equal to alpha / 2 (two tails) or alpha (one tail).
/// Throws "alpha too large for domain" when no such u >= 0 exists.
double fwer_threshold(const LKCVector& lkcs, const ECDensityParams& p, double alpha, Tails tails);

}  // namespace rft
