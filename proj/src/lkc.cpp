#include "rft/lkc.hpp"

#include <cmath>

#include "rft/gaussianize.hpp"

namespace rft {

std::string to_string(LKCMethod m) {
  switch (m) {
    case LKCMethod::convolution:
      return "conv";
    case LKCMethod::kiebel:
      return "kiebel";
    case LKCMethod::forman:
      return "forman";
    case LKCMethod::fwhm:
      return "fwhm";
    case LKCMethod::truth:
      return "true";
  }
  return "unknown";
}

LKCMethod parse_lkc_method(const std::string& name) {
  if (name == "conv" || name == "convolution") return LKCMethod::convolution;
  if (name == "kiebel") return LKCMethod::kiebel;
  if (name == "forman") return LKCMethod::forman;
  if (name == "fwhm") return LKCMethod::fwhm;
  if (name == "true" || name == "truth") return LKCMethod::truth;
  throw Error("unknown LKC method: " + name);
}

namespace {

void check_lambda(const std::vector<Mat>& lambda, const FineGrid& grid) {
  if (lambda.size() != grid.size()) throw Error("lambda field does not match grid");
  const int D = grid.dim();
  for (const Mat& L : lambda) {
    if (L.rows() != D || L.cols() != D) throw Error("lambda dimension mismatch");
  }
}

double sqrt_abs_det(const Mat& L) { return std::sqrt(std::abs(L.determinant())); }

// Lambda restricted to the axes other than `normal`.
Mat face_block(const Mat& L, int normal) {
  const int D = static_cast<int>(L.rows());
  Mat B(D - 1, D - 1);
  int r = 0;
  for (int a = 0; a < D; ++a) {
    if (a == normal) continue;
    int c = 0;
    for (int b = 0; b < D; ++b) {
      if (b == normal) continue;
      B(r, c++) = L(a, b);
    }
    ++r;
  }
  return B;
}

}  // namespace

TopTwoLKC lkc_top_two(const std::vector<Mat>& lambda, const FineGrid& grid) {
  check_lambda(lambda, grid);
  const int D = grid.dim();
  TopTwoLKC out;
  const auto& w = grid.volume_weights();
  for (std::size_t i = 0; i < grid.size(); ++i) out.top += w[i] * sqrt_abs_det(lambda[i]);
  if (D == 1) {
    out.lower = static_cast<double>(build_voxel_manifold(grid.mask()).euler_characteristic);
    return out;
  }
  double faces = 0.0;
  for (int a = 0; a < D; ++a) {
    for (const FaceEntry& f : grid.faces(a)) faces += f.weight * sqrt_abs_det(face_block(lambda[f.point], a));
  }
  out.lower = 0.5 * faces;
  return out;
}

double lkc_l1_stationary_3d(const std::vector<Mat>& lambda, const FineGrid& grid) {
  if (grid.dim() != 3) throw Error("stationary L1 formula needs D = 3");
  check_lambda(lambda, grid);
  std::vector<std::uint8_t> boundary(grid.size(), 0);
  for (int a = 0; a < 3; ++a) {
    for (const FaceEntry& f : grid.faces(a)) boundary[f.point] = 1;
  }
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::size_t count = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!boundary[i]) continue;
    ++count;
    for (int d = 0; d < 3; ++d) mean[d] += std::sqrt(std::max(0.0, lambda[i](d, d)));
  }
  if (count == 0) return 0.0;
  const VoxelManifoldSummary s = build_voxel_manifold(grid.mask());
  double l1 = 0.0;
  for (int d = 0; d < 3; ++d) l1 += s.edge_weight[d] * mean[d] / static_cast<double>(count);
  return l1;
}

LKCVector lkcs_from_lambda(const std::vector<Mat>& lambda, const FineGrid& grid, LKCMethod method) {
  const int D = grid.dim();
  LKCVector out;
  out.dim = D;
  out.method = method;
  out.values.assign(D + 1, 0.0);
  out.values[0] = static_cast<double>(build_voxel_manifold(grid.mask()).euler_characteristic);
  const TopTwoLKC tt = lkc_top_two(lambda, grid);
  out.values[D] = tt.top;
  if (D >= 2) out.values[D - 1] = tt.lower;
  if (D == 3) out.values[1] = lkc_l1_stationary_3d(lambda, grid);
  return out;
}

LKCVector convolution_lkcs(const FieldSet& fields) {
  return lkcs_from_lambda(lambda_hat(fields), *fields.grid, LKCMethod::convolution);
}

LKCVector lkcs_stationary(const Mat& lambda, const VoxelManifoldSummary& s, LKCMethod method) {
  const int D = s.dim;
  if (lambda.rows() != D || lambda.cols() != D) throw Error("lambda dimension mismatch");
  std::array<double, kMaxDim> root{0.0, 0.0, 0.0};
  for (int d = 0; d < D; ++d) root[d] = std::sqrt(std::max(0.0, lambda(d, d)));
  LKCVector out;
  out.dim = D;
  out.method = method;
  out.values.assign(D + 1, 0.0);
  out.values[0] = static_cast<double>(s.euler_characteristic);
  double top = s.volume;
  for (int d = 0; d < D; ++d) top *= root[d];
  out.values[D] = top;
  if (D >= 2) {
    double lower = 0.0;
    for (int a = 0; a < D; ++a) {
      double f = s.face_area[a];
      for (int b = 0; b < D; ++b) {
        if (b != a) f *= root[b];
      }
      lower += f;
    }
    out.values[D - 1] = 0.5 * lower;
  }
  if (D == 3) {
    double l1 = 0.0;
    for (int d = 0; d < 3; ++d) l1 += s.edge_weight[d] * root[d];
    out.values[1] = l1;
  }
  return out;
}

LKCVector lkcs_from_fwhm(double fwhm, const VoxelManifoldSummary& s) {
  if (!(fwhm > 0.0) || !std::isfinite(fwhm)) throw Error("fwhm must be positive and finite");
  const Mat L = Mat::Identity(s.dim, s.dim) * (4.0 * std::log(2.0) / (fwhm * fwhm));
  return lkcs_stationary(L, s, LKCMethod::fwhm);
}

TopTwoLKC lkc_top_two_from_fwhm(double fwhm, double volume, double boundary_area, int dim) {
  if (!(fwhm > 0.0) || !std::isfinite(fwhm)) throw Error("fwhm must be positive and finite");
  if (dim < 1 || dim > kMaxDim) throw Error("dimension must be 1, 2 or 3");
  // Lambda = 4 ln 2 / f^2 in L_D = |S| det(Lambda)^{1/2} gives f^{-D}, matching
  // lkc_top_two.
  const double c = std::sqrt(4.0 * std::log(2.0)) / fwhm;
  TopTwoLKC out;
  out.top = volume * std::pow(c, dim);
  out.lower = (dim == 1) ? boundary_area / 2.0 : 0.5 * boundary_area * std::pow(c, dim - 1);
  return out;
}

std::vector<double> lattice_residuals(const LatticeSample& values) { return standardize_demean(values); }

Mat kiebel_lambda(const std::vector<double>& residuals, int N, const Mask& mask) {
  const int D = mask.dim();
  const std::int64_t V = mask.voxel_count();
  if (N < 4) throw Error("Kiebel estimate needs at least four subjects");
  if (static_cast<std::int64_t>(residuals.size()) != N * V) throw Error("residual size mismatch");
  const auto& h = mask.spacing();
  Mat S = Mat::Zero(D, D);
  std::int64_t valid = 0;
  std::array<std::int64_t, kMaxDim> nb{};
  double z[kMaxDim];
  for (std::int64_t v = 0; v < V; ++v) {
    const Index idx = mask.unravel(mask.voxels()[v]);
    bool ok = true;
    for (int d = 0; d < D && ok; ++d) {
      Index j = idx;
      j[d] += 1;
      if (!mask.inside(j)) {
        ok = false;
      } else {
        nb[d] = mask.voxel_id(mask.linear(j));
      }
    }
    if (!ok) continue;
    ++valid;
    for (int n = 0; n < N; ++n) {
      const double* R = residuals.data() + static_cast<std::int64_t>(n) * V;
      for (int d = 0; d < D; ++d) z[d] = (R[nb[d]] - R[v]) / h[d];
      for (int a = 0; a < D; ++a) {
        for (int b = 0; b < D; ++b) S(a, b) += z[a] * z[b];
      }
    }
  }
  if (valid == 0) throw Error("no valid voxel pairs for the Kiebel estimate");
  return S * ((N - 3.0) / ((N - 2.0) * (N - 1.0) * static_cast<double>(valid)));
}

namespace {
double mean_diagonal(const Mat& L) {
  double m = 0.0;
  for (int d = 0; d < L.rows(); ++d) m += L(d, d);
  return m / static_cast<double>(L.rows());
}
}  // namespace

double fwhm_kiebel(const Mat& lambda) {
  const double m = mean_diagonal(lambda);
  if (!(m > 0.0)) throw Error("mean lambda diagonal must be positive");
  return std::sqrt(4.0 * std::log(2.0) / m);
}

double fwhm_forman(const Mat& lambda) {
  const double m = mean_diagonal(lambda);
  if (!(m > 0.0)) throw Error("mean lambda diagonal must be positive");
  const double arg = 1.0 - m / 2.0;
  if (!(arg > 0.0)) throw Error("field too rough for Forman estimate");
  const double l = std::log(arg);
  return std::sqrt(-2.0 * std::log(2.0) / l);
}

Mat convolution_lambda_mean(const ResidualSet& residuals) {
  const FineGrid& grid = *residuals.grid;
  const int N = residuals.subjects;
  if (N < 4) throw Error("convolution FWHM estimate needs at least four subjects");
  const std::vector<Mat> L = lambda_hat(residuals);
  const int D = grid.dim();
  Mat mean = Mat::Zero(D, D);
  for (std::int64_t p : grid.voxel_points()) mean += L[p];
  mean /= static_cast<double>(grid.voxel_points().size());
  return mean * ((N - 3.0) / (N - 2.0));
}

double fwhm_convolution(const ResidualSet& residuals) { return fwhm_kiebel(convolution_lambda_mean(residuals)); }

double lattice_fwhm(const LatticeSample& smoothed, LKCMethod method) {
  const Mask& m = smoothed.mask();
  const Mat L = kiebel_lambda(lattice_residuals(smoothed), smoothed.subjects(), m);
  if (method == LKCMethod::kiebel) return fwhm_kiebel(L);
  if (method != LKCMethod::forman) throw Error("lattice FWHM needs the kiebel or forman method");
  const auto& h = m.spacing();
  Mat Lv = L;
  double hbar = 0.0;
  for (int a = 0; a < m.dim(); ++a) {
    hbar += h[a] / m.dim();
    for (int b = 0; b < m.dim(); ++b) Lv(a, b) *= h[a] * h[b];
  }
  return fwhm_forman(Lv) * hbar;
}

LKCVector lattice_lkcs(const LatticeSample& smoothed, LKCMethod method) {
  LKCVector out = lkcs_from_fwhm(lattice_fwhm(smoothed, method), build_voxel_manifold(smoothed.mask()));
  out.method = method;
  return out;
}

std::vector<Mat> true_lambda_field(const GaussianKernel& k, const Mask& data_mask, const FineGrid& grid) {
  const Mask& gm = grid.mask();
  if (data_mask.dims() != gm.dims() || data_mask.spacing() != gm.spacing()) {
    throw Error("grid mask and data mask must share a lattice");
  }
  const int D = gm.dim();
  std::vector<double> radius(D);
  for (int d = 0; d < D; ++d) radius[d] = k.radius(d);
  // Factors: K^2, K K', K'^2.
  const SeparableGridOperator op(grid,
                                 {[&k](int a, double x) { return k.factor(a, x) * k.factor(a, x); },
                                  [&k](int a, double x) { return k.factor(a, x) * k.factor_derivative(a, x); },
                                  [&k](int a, double x) {
                                    const double g = k.factor_derivative(a, x);
                                    return g * g;
                                  }},
                                 radius);
  std::vector<Index> codes{{0, 0, 0}};
  for (int a = 0; a < D; ++a) {
    Index c{0, 0, 0};
    c[a] = 1;
    codes.push_back(c);
  }
  for (int a = 0; a < D; ++a) {
    for (int b = a; b < D; ++b) {
      Index c{0, 0, 0};
      if (a == b) {
        c[a] = 2;
      } else {
        c[a] = 1;
        c[b] = 1;
      }
      codes.push_back(c);
    }
  }
  std::vector<double> lattice(data_mask.lattice_size());
  for (std::int64_t i = 0; i < data_mask.lattice_size(); ++i) lattice[i] = data_mask.inside_linear(i) ? 1.0 : 0.0;
  const auto sums = op.apply(lattice, codes);
  std::vector<Mat> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double S0 = sums[0][i];
    if (!(S0 > 0.0)) throw Error("unsupported point");
    Mat L(D, D);
    std::size_t idx = 1 + D;
    for (int a = 0; a < D; ++a) {
      for (int b = a; b < D; ++b) {
        const double S2 = sums[idx++][i];
        L(a, b) = L(b, a) = S2 / S0 - sums[1 + a][i] * sums[1 + b][i] / (S0 * S0);
      }
    }
    out[i] = L;
  }
  return out;
}

LKCVector true_lkcs(const GaussianKernel& k, const MaskPtr& data_mask, const MaskPtr& grid_mask, int r_dense) {
  const GridPtr grid = FineGrid::build(grid_mask, r_dense);
  return lkcs_from_lambda(true_lambda_field(k, *data_mask, *grid), *grid, LKCMethod::truth);
}

LKCVector true_lkcs(const GaussianKernel& k, const MaskPtr& mask, int r_dense) {
  return true_lkcs(k, mask, mask, r_dense);
}

}  // namespace rft
