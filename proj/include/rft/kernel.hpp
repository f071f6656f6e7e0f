#pragma once

#include <vector>

#include "rft/mask.hpp"
#include "rft/types.hpp"

namespace rft {

double fwhm_to_sigma(double fwhm);
double sigma_to_fwhm(double sigma);

/// Isotropic Gaussian smoothing kernel.
///
/// The FWHM is given in voxel units and converted to physical units per axis
/// with the lattice spacing, so sigma_d = fwhm * h_d / sqrt(8 ln 2). Support is
/// the box |x_d| <= truncation * sigma_d; the kernel factorises over axes, so
/// every evaluation path (pointwise, separable grid passes, lambda sums) sees
/// exactly the same truncated function.
class GaussianKernel {
 public:
  GaussianKernel(double fwhm, std::vector<double> spacing, double truncation = 4.0);
  /// Unit spacing in D dimensions.
  GaussianKernel(double fwhm, int dim, double truncation = 4.0);

  int dim() const { return static_cast<int>(sigma_.size()); }
  double fwhm() const { return fwhm_; }
  double truncation() const { return truncation_; }
  const std::vector<double>& spacing() const { return spacing_; }
  /// Physical standard deviation along an axis.
  double sigma(int axis) const { return sigma_[axis]; }
  /// Physical half-width of the support along an axis.
  double radius(int axis) const { return truncation_ * sigma_[axis]; }

  /// One-dimensional normalised factor and its derivative.
  double factor(int axis, double x) const;
  double factor_derivative(int axis, double x) const;

  double value(const Point& x) const;
  Point gradient(const Point& x) const;
  /// Value and gradient in one pass.
  double value_gradient(const Point& x, Point& grad) const;

 private:
  double fwhm_;
  double truncation_;
  std::vector<double> spacing_;
  std::vector<double> sigma_;
  std::vector<double> norm_;
};

/// Lambda of unit-variance smoothed white noise: diag(4 ln 2 / (fwhm h_d)^2).
Mat theoretical_lambda_white_noise(const GaussianKernel& k);

/// Lambda of the variance-normalised field Y / sd(Y) at s, where
/// Y = sum_v K(s - v) eps(v) with eps i.i.d. unit variance over the voxels of
/// `mask`. With S0 = sum K^2, S1 = sum K grad K, S2 = sum grad K grad K^T the
/// result is S2 / S0 - S1 S1^T / S0^2.
Mat true_lambda_discrete(const GaussianKernel& k, const Mask& mask, const Point& s);

}  // namespace rft
