#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "rft/grid.hpp"
#include "rft/kernel.hpp"
#include "rft/mask.hpp"

namespace rft {

/// N subjects' scalar data on the voxels of a mask, subject-major.
class LatticeSample {
 public:
  LatticeSample(MaskPtr mask, int subjects, std::vector<double> data);

  const Mask& mask() const { return *mask_; }
  const MaskPtr& mask_ptr() const { return mask_; }
  int subjects() const { return subjects_; }
  std::int64_t voxels() const { return mask_->voxel_count(); }
  const std::vector<double>& data() const { return data_; }
  const double* row(int n) const { return data_.data() + static_cast<std::int64_t>(n) * voxels(); }
  double at(int n, std::int64_t voxel) const { return row(n)[voxel]; }

  /// New sample made of the listed subjects (repeats allowed).
  LatticeSample subset(const std::vector<int>& subjects) const;

 private:
  MaskPtr mask_;
  int subjects_;
  std::vector<double> data_;
};

/// A real field on a grid, optionally with its gradient (point-major, D per point).
struct ScalarField {
  GridPtr grid;
  std::vector<double> values;
  std::vector<double> gradients;

  bool has_gradients() const { return !gradients.empty(); }
};

/// N fields on a shared grid. values[n * P + i]; gradients[(n * P + i) * D + d].
struct FieldSet {
  GridPtr grid;
  int subjects = 0;
  std::vector<double> values;
  std::vector<double> gradients;

  std::size_t points() const { return grid->size(); }
  bool has_gradients() const { return !gradients.empty(); }
  const double* values_of(int n) const { return values.data() + n * points(); }
  ScalarField field(int n) const;
};

/// Sums of the form sum_v x(v) prod_d g_{c_d}(d, s_d - v_d) at every point
/// of a grid, for a family of per-axis factors g_0, g_1, ... with bounded
/// support. Axis passes are shared between codes with a common prefix.
class SeparableGridOperator {
 public:
  using AxisFactor = std::function<double(int axis, double x)>;
  SeparableGridOperator(const FineGrid& grid, const std::vector<AxisFactor>& factors,
                        const std::vector<double>& radius);
  /// `lattice`: dense values over the full lattice of grid.mask(). One output
  /// per code, aligned with the grid points.
  std::vector<std::vector<double>> apply(const std::vector<double>& lattice, const std::vector<Index>& codes) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Convolution of one data row with the kernel at arbitrary points.
/// Throws "unsupported point" when no voxel lies in the kernel support.
std::vector<double> eval_convolution(const std::vector<double>& row, const Mask& mask, const GaussianKernel& k,
                                     const std::vector<Point>& points, std::vector<double>* gradients = nullptr);

/// Smoothed fields of every subject on `grid`. The data mask and the grid's
/// mask must share a lattice, and every grid voxel must carry data; the data
/// mask may be larger (padding). With `gaussianize` the lattice data goes
/// through the Gaussianization transform first.
FieldSet fields_on_grid(const LatticeSample& sample, const GaussianKernel& k, const GridPtr& grid, bool gaussianize,
                        bool gradients = true);

/// Pointwise evaluation of all N convolution fields with gradients.
class PointEvaluator {
 public:
  PointEvaluator(const LatticeSample& sample, const GaussianKernel& k);
  /// Raw subject-major rows over the voxels of `mask`; any number of rows.
  PointEvaluator(MaskPtr mask, int subjects, const double* data, const GaussianKernel& k);

  int subjects() const { return subjects_; }
  int dim() const { return dim_; }
  /// values: N entries; gradients: N * D entries (may be null).
  void eval(const Point& s, double* values, double* gradients) const;

 private:
  MaskPtr mask_;
  GaussianKernel kernel_;
  int subjects_;
  int dim_;
  std::vector<double> lattice_;  // lattice-major: lattice_[lin * N + n]
};

}  // namespace rft
