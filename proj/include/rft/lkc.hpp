#pragma once

#include <string>
#include <vector>

#include "rft/convfield.hpp"
#include "rft/grid.hpp"
#include "rft/kernel.hpp"
#include "rft/stats.hpp"

namespace rft {

enum class LKCMethod { convolution, kiebel, forman, fwhm, truth };

std::string to_string(LKCMethod m);
LKCMethod parse_lkc_method(const std::string& name);

/// (L_0, ..., L_D).
struct LKCVector {
  int dim = 0;
  std::vector<double> values;
  LKCMethod method = LKCMethod::convolution;

  double operator[](int d) const { return values[d]; }
};

struct TopTwoLKC {
  double lower = 0.0;  // L_{D-1}
  double top = 0.0;    // L_D
};

/// L_D = sum_s w_r(s) |det Lambda(s)|^{1/2}
/// L_{D-1} = 1/2 sum over faces w'_r(s) |det Lambda_F(s)|^{1/2}, Lambda_F the
/// block of the axes spanning the face. The 1/2 makes a unit cube with
/// Lambda = I come out at (1, 3, 3, 1). For D = 1, L_0 = number of intervals.
TopTwoLKC lkc_top_two(const std::vector<Mat>& lambda, const FineGrid& grid);

/// D = 3 only. Locally stationary edge formula: sum over directions d of the
/// angle-weighted edge length of S along d, times the mean of
/// Lambda_dd^{1/2} over boundary points.
double lkc_l1_stationary_3d(const std::vector<Mat>& lambda, const FineGrid& grid);

/// All LKCs from a Lambda field: L_0 = chi(S), the top two as above and the
/// stationary L_1 when D = 3.
LKCVector lkcs_from_lambda(const std::vector<Mat>& lambda, const FineGrid& grid, LKCMethod method);

/// Convolution estimator: Lambda-hat from the subject fields (with gradients).
LKCVector convolution_lkcs(const FieldSet& fields);

/// Stationary LKCs of the voxel manifold for a constant diagonal Lambda.
LKCVector lkcs_stationary(const Mat& lambda, const VoxelManifoldSummary& s, LKCMethod method = LKCMethod::fwhm);

/// LKCs of S for an isotropic field with the given FWHM (physical units):
/// L_D = |S| (4 ln 2)^{D/2} f^{-D}, L_{D-1} = |dS| / 2 (4 ln 2)^{(D-1)/2} f^{1-D}.
LKCVector lkcs_from_fwhm(double fwhm, const VoxelManifoldSummary& s);
/// Top two only, from the scalar volume and boundary area.
TopTwoLKC lkc_top_two_from_fwhm(double fwhm, double volume, double boundary_area, int dim);

/// Lattice residuals: voxelwise demeaned, standardised values (N x |V|).
std::vector<double> lattice_residuals(const LatticeSample& values);

/// Kiebel Lambda from forward differences of lattice residuals, including the
/// (N - 3) / (N - 2) factor. Averaged over the voxels whose forward neighbours
/// are all in the mask.
Mat kiebel_lambda(const std::vector<double>& residuals, int subjects, const Mask& mask);

double fwhm_kiebel(const Mat& lambda);
/// Lambda in voxel units (unit spacing).
double fwhm_forman(const Mat& lambda);
/// (N - 3) / (N - 2) times the mean pointwise Lambda-hat over voxel centres,
/// converted like the Kiebel estimate.
Mat convolution_lambda_mean(const ResidualSet& residuals);
double fwhm_convolution(const ResidualSet& residuals);

/// FWHM (physical units) of smoothed lattice data by the Kiebel or Forman
/// estimator. Forman works in voxel units; the result is rescaled by the mean
/// spacing.
double lattice_fwhm(const LatticeSample& smoothed, LKCMethod method);
/// lkcs_from_fwhm of S(mask) at the lattice FWHM estimate.
LKCVector lattice_lkcs(const LatticeSample& smoothed, LKCMethod method);

/// Lambda of the variance-normalised smoothed white noise at every grid point,
/// noise living on the voxels of `data_mask` (same lattice as the grid).
std::vector<Mat> true_lambda_field(const GaussianKernel& k, const Mask& data_mask, const FineGrid& grid);

/// Ground-truth LKCs over the voxel manifold of `grid_mask` using a dense grid.
LKCVector true_lkcs(const GaussianKernel& k, const MaskPtr& data_mask, const MaskPtr& grid_mask, int r_dense);
LKCVector true_lkcs(const GaussianKernel& k, const MaskPtr& mask, int r_dense);

}  // namespace rft
