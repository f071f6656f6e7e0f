#include "rft/euler.hpp"

#include <algorithm>
#include <cmath>

namespace rft {

ExcursionComplex::ExcursionComplex(const FineGrid& grid, const std::vector<double>& values) {
  if (values.size() != grid.size()) throw Error("value count does not match grid");
  const int D = grid.dim();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Index& base = grid.fine_index(i);
    for (int subset = 0; subset < (1 << D); ++subset) {
      const int k = __builtin_popcount(static_cast<unsigned>(subset));
      double m = values[i];
      bool present = true;
      for (int corner = 1; corner < (1 << D) && present; ++corner) {
        if ((corner & ~subset) != 0) continue;
        Index f = base;
        for (int d = 0; d < D; ++d) f[d] += (corner >> d) & 1;
        const std::int64_t j = grid.lookup(f);
        if (j < 0) {
          present = false;
        } else {
          m = std::min(m, values[j]);
        }
      }
      if (present) cell_min_[k].push_back(m);
    }
  }
  for (auto& v : cell_min_) std::sort(v.begin(), v.end());
}

long ExcursionComplex::euler(double u) const {
  long chi = 0;
  for (int k = 0; k <= kMaxDim; ++k) {
    const auto& v = cell_min_[k];
    const long count = static_cast<long>(v.end() - std::lower_bound(v.begin(), v.end(), u));
    chi += (k % 2 == 0) ? count : -count;
  }
  return chi;
}

long ExcursionComplex::euler_all() const {
  long chi = 0;
  for (int k = 0; k <= kMaxDim; ++k) {
    const long count = static_cast<long>(cell_min_[k].size());
    chi += (k % 2 == 0) ? count : -count;
  }
  return chi;
}

std::vector<std::uint8_t> excursion_mask(const std::vector<double>& values, double u) {
  std::vector<std::uint8_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] >= u ? 1 : 0;
  return out;
}

long excursion_ec(const ScalarField& field, double u) {
  if (!field.grid) throw Error("field has no grid");
  return ExcursionComplex(*field.grid, field.values).euler(u);
}

ECCurve ec_curve(const FineGrid& grid, const std::vector<double>& values, const std::vector<double>& thresholds) {
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) throw Error("thresholds must be strictly ascending");
  }
  const ExcursionComplex cx(grid, values);
  ECCurve c;
  c.thresholds = thresholds;
  c.values.reserve(thresholds.size());
  for (double u : thresholds) c.values.push_back(static_cast<double>(cx.euler(u)));
  return c;
}

ECCurve ec_curve(const ScalarField& field, const std::vector<double>& thresholds) {
  if (!field.grid) throw Error("field has no grid");
  return ec_curve(*field.grid, field.values, thresholds);
}

std::vector<double> default_thresholds(const std::vector<double>& values, const std::vector<double>& extra,
                                       std::size_t max_points) {
  std::vector<double> v(values);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::vector<double> out;
  if (v.size() <= max_points) {
    out = v;
  } else if (max_points > 0) {
    for (std::size_t i = 0; i < max_points; ++i) {
      const std::size_t j = max_points == 1 ? 0 : i * (v.size() - 1) / (max_points - 1);
      out.push_back(v[j]);
    }
  }
  out.insert(out.end(), extra.begin(), extra.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ECCurve average_ec_curves(const std::vector<ECCurve>& curves) {
  if (curves.empty()) throw Error("no curves to average");
  const auto& u = curves.front().thresholds;
  for (const auto& c : curves) {
    if (c.thresholds != u || c.values.size() != u.size()) throw Error("curves have mismatched thresholds");
  }
  const double J = static_cast<double>(curves.size());
  ECCurve out;
  out.thresholds = u;
  out.values.assign(u.size(), 0.0);
  out.se.assign(u.size(), 0.0);
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < u.size(); ++i) out.values[i] += c.values[i];
  }
  for (auto& x : out.values) x /= J;
  if (curves.size() > 1) {
    for (const auto& c : curves) {
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = c.values[i] - out.values[i];
        out.se[i] += d * d;
      }
    }
    for (auto& s : out.se) s = std::sqrt(s / (J - 1.0) / J);
  }
  return out;
}

}  // namespace rft
