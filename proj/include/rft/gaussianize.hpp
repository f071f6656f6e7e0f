#pragma once

#include <vector>

#include "rft/convfield.hpp"

namespace rft {

/// X^{S,D}: voxelwise demeaned and standardised data (sd divisor N - 1).
/// Throws on a zero-variance voxel, naming its lattice index.
std::vector<double> standardize_demean(const LatticeSample& sample);
/// X^S: voxelwise standardised without demeaning.
std::vector<double> standardize(const LatticeSample& sample);

/// Sorted pool of the demeaned standardised values of every subject and voxel.
class PooledNull {
 public:
  PooledNull(std::vector<double> values, int subjects, std::int64_t voxels);
  static PooledNull from_sample(const LatticeSample& sample);

  const std::vector<double>& sorted_values() const { return sorted_; }
  int subjects() const { return subjects_; }
  std::int64_t voxels() const { return voxels_; }
  std::size_t size() const { return sorted_.size(); }

  /// #(pool >= x) / M clamped to [1/(2M), 1 - 1/(2M)].
  double upper_quantile(double x) const;
  /// #(pool <= x) / M, same clamp.
  double lower_quantile(double x) const;

 private:
  std::vector<double> sorted_;
  int subjects_;
  std::int64_t voxels_;
};

/// The pooled quantile with the indicator 1[x <= pooled value], i.e. a
/// descending CDF. Kept in this orientation for reference; `gaussianize` uses
/// the ascending one so that the transform is increasing in x.
double pooled_quantile(const PooledNull& null, double x);

/// X^G = Phi^{-1}(q) with q the ascending pooled CDF of X^S. Result is finite
/// and voxelwise rank-preserving.
LatticeSample gaussianize(const LatticeSample& sample);

/// Histogram of the pooled null: (lower edge, upper edge, count) rows.
struct HistogramBin {
  double lower;
  double upper;
  std::int64_t count;
};
std::vector<HistogramBin> pooled_histogram(const PooledNull& null, int bins);

}  // namespace rft
