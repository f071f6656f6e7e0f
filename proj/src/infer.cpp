#include "rft/infer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rft/gaussianize.hpp"
#include "rft/optimize.hpp"
#include "rft/sim.hpp"
#include "rft/stats.hpp"

namespace rft {

namespace {

std::vector<std::vector<std::int64_t>> components(const FineGrid& grid, const std::vector<std::uint8_t>& in) {
  const int D = grid.dim();
  int combos = 1;
  for (int d = 0; d < D; ++d) combos *= 3;
  std::vector<int> label(grid.size(), -1);
  std::vector<std::vector<std::int64_t>> out;
  for (std::size_t seed = 0; seed < grid.size(); ++seed) {
    if (!in[seed] || label[seed] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<std::int64_t> stack{static_cast<std::int64_t>(seed)};
    label[seed] = id;
    while (!stack.empty()) {
      const std::int64_t i = stack.back();
      stack.pop_back();
      out[id].push_back(i);
      const Index& f = grid.fine_index(i);
      for (int c = 0; c < combos; ++c) {
        Index nb = f;
        int code = c;
        for (int d = 0; d < D; ++d) {
          nb[d] += code % 3 - 1;
          code /= 3;
        }
        const std::int64_t j = grid.lookup(nb);
        if (j >= 0 && in[j] && label[j] < 0) {
          label[j] = id;
          stack.push_back(j);
        }
      }
    }
  }
  return out;
}

}  // namespace

InferenceResult infer(const LatticeSample& sample, const InferOptions& o) {
  if (o.resolution != 0 && o.resolution != 1 && o.resolution != kResolutionInfinity) {
    throw Error("resolution must be 0, 1 or inf");
  }
  if (o.lkc_resolution < 0) throw Error("LKC resolution must be non-negative");
  const LatticeSample data = o.gaussianize ? gaussianize(sample) : sample;
  const GaussianKernel k(o.fwhm, data.mask().spacing());
  const GridPtr grid = FineGrid::build(data.mask_ptr(), 1);

  InferenceResult res;
  res.tails = o.tails;
  res.alpha = o.alpha;
  res.resolution = o.resolution;

  const FieldSet fields = fields_on_grid(data, k, grid, false, true);
  const ScalarField T = t_field(fields);
  if (o.lkc_resolution == 1) {
    res.lkcs = lkcs_from_lambda(lambda_hat(fields), *grid, LKCMethod::convolution);
  } else {
    const GridPtr lg = FineGrid::build(data.mask_ptr(), o.lkc_resolution);
    res.lkcs = convolution_lkcs(fields_on_grid(data, k, lg, false, true));
  }
  res.threshold = fwer_threshold(res.lkcs, ECDensityParams::t_field(data.subjects() - 1), o.alpha, o.tails);

  const PointEvaluator pe(data, k);
  const TFieldEvaluator te(pe);
  const FieldEvaluator fpos = te.as_function();
  const FieldEvaluator fneg = [&](const Point& s, Point& g) {
    const double v = te(s, g);
    for (double& x : g) x = -x;
    return -v;
  };
  const bool two = o.tails == Tails::two;
  auto stat = [&](double t) { return two ? std::abs(t) : t; };

  std::vector<std::uint8_t> allowed(grid->size(), o.resolution == 0 ? 0 : 1);
  if (o.resolution == 0) {
    for (auto i : grid->voxel_points()) allowed[i] = 1;
  }

  // Global supremum over the chosen resolution.
  double best = -std::numeric_limits<double>::infinity();
  std::int64_t best_i = 0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    if (allowed[i] && stat(T.values[i]) > best) {
      best = stat(T.values[i]);
      best_i = static_cast<std::int64_t>(i);
    }
  }
  res.max_location = grid->point(best_i);
  res.max_value = T.values[best_i];
  if (o.resolution == kResolutionInfinity) {
    const FieldMaximum up = find_field_maximum(fpos, *grid, T.values);
    if (up.value > best) {
      best = up.value;
      res.max_location = up.location;
      res.max_value = up.value;
    }
    if (two) {
      std::vector<double> neg(T.values.size());
      std::transform(T.values.begin(), T.values.end(), neg.begin(), [](double v) { return -v; });
      const FieldMaximum dn = find_field_maximum(fneg, *grid, neg);
      if (dn.value > best) {
        best = dn.value;
        res.max_location = dn.location;
        res.max_value = -dn.value;
      }
    }
  }
  res.rejected = best > res.threshold;

  // Regions: super-threshold components of the r = 1 grid, one sign at a time.
  int id = 0;
  for (int sign : {1, -1}) {
    if (sign < 0 && !two) break;
    std::vector<std::uint8_t> in(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) in[i] = sign * T.values[i] > res.threshold ? 1 : 0;
    for (const auto& comp : components(*grid, in)) {
      double peak = -std::numeric_limits<double>::infinity();
      std::int64_t at = -1;
      for (auto i : comp) {
        if (allowed[i] && sign * T.values[i] > peak) {
          peak = sign * T.values[i];
          at = i;
        }
      }
      if (at < 0) continue;  // no lattice point of this component at r = 0
      Region reg;
      reg.sign = sign;
      reg.points = static_cast<int>(comp.size());
      reg.peak = grid->point(at);
      if (o.resolution == kResolutionInfinity) {
        const FieldMaximum m = ascend(sign > 0 ? fpos : fneg, *grid, reg.peak);
        if (m.value > peak) {
          peak = m.value;
          reg.peak = m.location;
        }
      }
      if (!(peak > res.threshold)) continue;
      reg.peak_value = sign * peak;
      reg.id = ++id;
      res.regions.push_back(reg);
    }
  }
  std::sort(res.regions.begin(), res.regions.end(),
            [](const Region& a, const Region& b) { return std::abs(a.peak_value) > std::abs(b.peak_value); });
  for (std::size_t i = 0; i < res.regions.size(); ++i) res.regions[i].id = static_cast<int>(i) + 1;
  return res;
}

}  // namespace rft
