#pragma once

#include <vector>

#include "rft/convfield.hpp"

namespace rft {

/// chi over a threshold grid. Values are integers for a single field and
/// means for averaged curves; `se` is only filled by averaging.
struct ECCurve {
  std::vector<double> thresholds;
  std::vector<double> values;
  std::vector<double> se;
};

/// Vertex-based cubical complex of a field on a fine grid: a k-cell of the
/// grid lattice is present iff all its 2^k corners are grid points, and lies
/// in the excursion set iff every corner value is >= u.
class ExcursionComplex {
 public:
  ExcursionComplex(const FineGrid& grid, const std::vector<double>& values);

  /// chi of {value >= u}.
  long euler(double u) const;
  /// chi of the whole complex.
  long euler_all() const;

 private:
  std::array<std::vector<double>, kMaxDim + 1> cell_min_;  // sorted per cell dimension
};

std::vector<std::uint8_t> excursion_mask(const std::vector<double>& values, double u);

long excursion_ec(const ScalarField& field, double u);
ECCurve ec_curve(const ScalarField& field, const std::vector<double>& thresholds);
ECCurve ec_curve(const FineGrid& grid, const std::vector<double>& values, const std::vector<double>& thresholds);

/// Sorted distinct field values subsampled to at most `max_points`, merged
/// with the extra thresholds.
std::vector<double> default_thresholds(const std::vector<double>& values, const std::vector<double>& extra = {},
                                       std::size_t max_points = 512);

/// Pointwise mean and standard error (sd / sqrt(J), zero when J = 1).
ECCurve average_ec_curves(const std::vector<ECCurve>& curves);

}  // namespace rft
