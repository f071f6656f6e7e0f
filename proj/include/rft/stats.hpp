#pragma once

#include <vector>

#include "rft/convfield.hpp"
#include "rft/optimize.hpp"

namespace rft {

/// One-sample t-field T = sqrt(N) mean / sd, sd with divisor N - 1. Carries
/// gradients when the input fields do.
ScalarField t_field(const FieldSet& fields);

/// Pointwise standardised residuals R_n = (Y_n - mean) / sd and their gradients.
struct ResidualSet {
  GridPtr grid;
  int subjects = 0;
  std::vector<double> values;     // [n * P + i]
  std::vector<double> gradients;  // [(n * P + i) * D + d]

  std::size_t points() const { return grid->size(); }
};

ResidualSet residual_fields(const FieldSet& fields);

/// Lambda-hat per grid point:
///   (1 / (N - 1)) sum_n dR_n/ds_i (dR_n/ds_j - mean_m dR_m/ds_j),
/// symmetrised. No (N - 3) / (N - 2) factor.
std::vector<Mat> lambda_hat(const ResidualSet& residuals);
/// Same, straight from the subject fields without storing residuals.
std::vector<Mat> lambda_hat(const FieldSet& fields);

/// T-field and its gradient at arbitrary points, from a pointwise evaluator of
/// the subject fields.
class TFieldEvaluator {
 public:
  explicit TFieldEvaluator(const PointEvaluator& fields) : fields_(&fields) {}
  double operator()(const Point& s, Point& grad) const;
  FieldEvaluator as_function() const;

 private:
  const PointEvaluator* fields_;
};

/// T and its gradient from N values and N x D gradients at one point.
double t_statistic(int N, int D, const double* values, const double* gradients, double* grad_out);

}  // namespace rft
