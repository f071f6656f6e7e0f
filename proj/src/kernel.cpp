#include "rft/kernel.hpp"

#include <cmath>

namespace rft {

namespace {
const double kFwhmPerSigma = std::sqrt(8.0 * std::log(2.0));
}

double fwhm_to_sigma(double fwhm) {
  if (!(fwhm > 0.0) || !std::isfinite(fwhm)) throw Error("fwhm must be positive and finite");
  return fwhm / kFwhmPerSigma;
}

double sigma_to_fwhm(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error("sigma must be positive and finite");
  return sigma * kFwhmPerSigma;
}

GaussianKernel::GaussianKernel(double fwhm, std::vector<double> spacing, double truncation)
    : fwhm_(fwhm), truncation_(truncation), spacing_(std::move(spacing)) {
  if (spacing_.empty() || spacing_.size() > static_cast<std::size_t>(kMaxDim)) {
    throw Error("kernel dimension must be 1, 2 or 3");
  }
  if (!(truncation_ >= 4.0) || !std::isfinite(truncation_)) {
    throw Error("kernel truncation must be at least 4 sigma");
  }
  const double s = fwhm_to_sigma(fwhm);
  for (double h : spacing_) {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error("spacing must be positive and finite");
    sigma_.push_back(s * h);
    norm_.push_back(1.0 / (std::sqrt(2.0 * M_PI) * s * h));
  }
}

GaussianKernel::GaussianKernel(double fwhm, int dim, double truncation)
    : GaussianKernel(fwhm, std::vector<double>(dim > 0 ? dim : 0, 1.0), truncation) {}

double GaussianKernel::factor(int axis, double x) const {
  const double s = sigma_[axis];
  if (std::abs(x) > truncation_ * s) return 0.0;
  const double z = x / s;
  return norm_[axis] * std::exp(-0.5 * z * z);
}

double GaussianKernel::factor_derivative(int axis, double x) const {
  const double s = sigma_[axis];
  return -x / (s * s) * factor(axis, x);
}

double GaussianKernel::value(const Point& x) const {
  double v = 1.0;
  for (int d = 0; d < dim(); ++d) v *= factor(d, x[d]);
  return v;
}

double GaussianKernel::value_gradient(const Point& x, Point& grad) const {
  const double v = value(x);
  grad = {0.0, 0.0, 0.0};
  for (int d = 0; d < dim(); ++d) grad[d] = -x[d] / (sigma_[d] * sigma_[d]) * v;
  return v;
}

Point GaussianKernel::gradient(const Point& x) const {
  Point g;
  value_gradient(x, g);
  return g;
}

Mat theoretical_lambda_white_noise(const GaussianKernel& k) {
  const int D = k.dim();
  Mat L = Mat::Zero(D, D);
  for (int d = 0; d < D; ++d) {
    const double f = k.fwhm() * k.spacing()[d];
    L(d, d) = 4.0 * std::log(2.0) / (f * f);
  }
  return L;
}

Mat true_lambda_discrete(const GaussianKernel& k, const Mask& mask, const Point& s) {
  const int D = mask.dim();
  if (k.dim() != D) throw Error("kernel and mask dimensions differ");
  const auto& h = mask.spacing();
  // Any voxel box within tolerance counts as containing s.
  bool inside_s = false;
  {
    Index lo{}, hi{};
    for (int d = 0; d < D; ++d) {
      lo[d] = static_cast<int>(std::floor(s[d] / h[d] + 0.5 - 1e-9));
      hi[d] = static_cast<int>(std::floor(s[d] / h[d] + 0.5 + 1e-9));
    }
    for (int o = 0; o < (1 << D) && !inside_s; ++o) {
      Index idx{};
      for (int d = 0; d < D; ++d) idx[d] = ((o >> d) & 1) ? hi[d] : lo[d];
      inside_s = mask.inside(idx);
    }
  }
  if (!inside_s) throw Error("point outside the voxel manifold");

  Index lo{}, hi{};
  for (int d = 0; d < D; ++d) {
    lo[d] = std::max(0, static_cast<int>(std::ceil((s[d] - k.radius(d)) / h[d])));
    hi[d] = std::min(mask.dims()[d] - 1, static_cast<int>(std::floor((s[d] + k.radius(d)) / h[d])));
  }
  double S0 = 0.0;
  Eigen::Vector3d S1 = Eigen::Vector3d::Zero();
  Eigen::Matrix3d S2 = Eigen::Matrix3d::Zero();
  Index idx = lo;
  for (;;) {
    if (mask.inside(idx)) {
      Point x{};
      for (int d = 0; d < D; ++d) x[d] = s[d] - idx[d] * h[d];
      Point g;
      const double v = k.value_gradient(x, g);
      const Eigen::Vector3d gv(g[0], g[1], g[2]);
      S0 += v * v;
      S1 += v * gv;
      S2 += gv * gv.transpose();
    }
    int d = D - 1;
    while (d >= 0 && ++idx[d] > hi[d]) {
      idx[d] = lo[d];
      --d;
    }
    if (d < 0) break;
  }
  if (!(S0 > 0.0)) throw Error("unsupported point");
  const Eigen::Matrix3d L = S2 / S0 - S1 * S1.transpose() / (S0 * S0);
  return L.topLeftCorner(D, D);
}

}  // namespace rft
