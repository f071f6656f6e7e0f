#include "rft/gaussianize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

namespace rft {

namespace {

struct VoxelMoments {
  std::vector<double> mean;
  std::vector<double> sd;
};

VoxelMoments voxel_moments(const LatticeSample& sample) {
  const int N = sample.subjects();
  const std::int64_t V = sample.voxels();
  VoxelMoments m;
  m.mean.assign(V, 0.0);
  m.sd.assign(V, 0.0);
  for (int n = 0; n < N; ++n) {
    const double* row = sample.row(n);
    for (std::int64_t v = 0; v < V; ++v) m.mean[v] += row[v];
  }
  for (auto& x : m.mean) x /= N;
  for (int n = 0; n < N; ++n) {
    const double* row = sample.row(n);
    for (std::int64_t v = 0; v < V; ++v) {
      const double d = row[v] - m.mean[v];
      m.sd[v] += d * d;
    }
  }
  for (std::int64_t v = 0; v < V; ++v) {
    m.sd[v] = std::sqrt(m.sd[v] / (N - 1));
    // Relative test: a constant voxel leaves only rounding noise behind.
    if (!(m.sd[v] > 1e-14 * std::max(1.0, std::abs(m.mean[v])))) {
      const Index idx = sample.mask().unravel(sample.mask().voxels()[v]);
      std::ostringstream os;
      os << "zero variance at voxel (";
      for (int d = 0; d < sample.mask().dim(); ++d) os << (d ? "," : "") << idx[d];
      os << ")";
      throw Error(os.str());
    }
  }
  return m;
}

}  // namespace

std::vector<double> standardize_demean(const LatticeSample& sample) {
  const VoxelMoments m = voxel_moments(sample);
  const std::int64_t V = sample.voxels();
  std::vector<double> out(sample.data().size());
  for (int n = 0; n < sample.subjects(); ++n) {
    const double* row = sample.row(n);
    for (std::int64_t v = 0; v < V; ++v) out[n * V + v] = (row[v] - m.mean[v]) / m.sd[v];
  }
  return out;
}

std::vector<double> standardize(const LatticeSample& sample) {
  const VoxelMoments m = voxel_moments(sample);
  const std::int64_t V = sample.voxels();
  std::vector<double> out(sample.data().size());
  for (int n = 0; n < sample.subjects(); ++n) {
    const double* row = sample.row(n);
    for (std::int64_t v = 0; v < V; ++v) out[n * V + v] = row[v] / m.sd[v];
  }
  return out;
}

PooledNull::PooledNull(std::vector<double> values, int subjects, std::int64_t voxels)
    : sorted_(std::move(values)), subjects_(subjects), voxels_(voxels) {
  if (sorted_.empty()) throw Error("empty pooled null");
  if (static_cast<std::int64_t>(sorted_.size()) != static_cast<std::int64_t>(subjects) * voxels) {
    throw Error("pooled null size does not match subjects x voxels");
  }
  for (double x : sorted_) {
    if (!std::isfinite(x)) throw Error("pooled null contains non-finite values");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

PooledNull PooledNull::from_sample(const LatticeSample& sample) {
  return PooledNull(standardize_demean(sample), sample.subjects(), sample.voxels());
}

namespace {
double clamp_quantile(double count, double M) {
  return std::clamp(count / M, 0.5 / M, 1.0 - 0.5 / M);
}
}  // namespace

double PooledNull::upper_quantile(double x) const {
  const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), x);
  return clamp_quantile(static_cast<double>(sorted_.end() - it), static_cast<double>(size()));
}

double PooledNull::lower_quantile(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return clamp_quantile(static_cast<double>(it - sorted_.begin()), static_cast<double>(size()));
}

double pooled_quantile(const PooledNull& null, double x) { return null.upper_quantile(x); }

LatticeSample gaussianize(const LatticeSample& sample) {
  const PooledNull null = PooledNull::from_sample(sample);
  std::vector<double> xs = standardize(sample);
  const boost::math::normal_distribution<double> normal;
  for (double& x : xs) x = boost::math::quantile(normal, null.lower_quantile(x));
  return LatticeSample(sample.mask_ptr(), sample.subjects(), std::move(xs));
}

std::vector<HistogramBin> pooled_histogram(const PooledNull& null, int bins) {
  if (bins < 1) throw Error("histogram needs at least one bin");
  const auto& v = null.sorted_values();
  const double lo = v.front();
  const double hi = v.back();
  const double width = (hi > lo) ? (hi - lo) / bins : 1.0;
  std::vector<HistogramBin> out(bins);
  for (int b = 0; b < bins; ++b) out[b] = {lo + b * width, lo + (b + 1) * width, 0};
  for (double x : v) {
    int b = static_cast<int>((x - lo) / width);
    out[std::clamp(b, 0, bins - 1)].count++;
  }
  return out;
}

}  // namespace rft
