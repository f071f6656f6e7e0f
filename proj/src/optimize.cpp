#include "rft/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rft {

std::vector<std::int64_t> discrete_local_maxima(const FineGrid& grid, const std::vector<double>& values) {
  if (values.size() != grid.size()) throw Error("value count does not match grid");
  const int D = grid.dim();
  int combos = 1;
  for (int d = 0; d < D; ++d) combos *= 3;
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Index& f = grid.fine_index(i);
    bool is_max = true;
    for (int c = 0; c < combos && is_max; ++c) {
      Index nb = f;
      int code = c;
      bool centre = true;
      for (int d = 0; d < D; ++d) {
        const int off = code % 3 - 1;
        code /= 3;
        nb[d] += off;
        centre = centre && off == 0;
      }
      if (centre) continue;
      const std::int64_t j = grid.lookup(nb);
      if (j >= 0 && values[j] > values[i]) is_max = false;
    }
    if (is_max) out.push_back(static_cast<std::int64_t>(i));
  }
  return out;
}

namespace {

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

Vec to_vec(const Point& p, int D) {
  Vec v(D);
  for (int d = 0; d < D; ++d) v[d] = p[d];
  return v;
}

Point to_point(const Vec& v) {
  Point p{0.0, 0.0, 0.0};
  for (int d = 0; d < v.size(); ++d) p[d] = v[d];
  return p;
}

// Zeroes gradient components that would push x out of S.
Vec projected_gradient(const FineGrid& grid, const Point& x, const Vec& g, double probe) {
  Vec pg = g;
  for (int d = 0; d < g.size(); ++d) {
    if (g[d] == 0.0) continue;
    Point y = x;
    y[d] += (g[d] > 0.0 ? probe : -probe);
    if (!grid.contains(y, 0.0)) pg[d] = 0.0;
  }
  return pg;
}

}  // namespace

FieldMaximum ascend(const FieldEvaluator& f, const FineGrid& grid, const Point& start, const OptimizerOptions& opts) {
  const int D = grid.dim();
  double hmin = std::numeric_limits<double>::infinity();
  for (double h : grid.mask().spacing()) hmin = std::min(hmin, h);
  const double max_step = opts.max_step * hmin;
  const double probe = 1e-9 * hmin;

  Point x = grid.project(start);
  Point gp;
  double fx = f(x, gp);
  FieldMaximum best{x, fx};
  Vec g = to_vec(gp, D);
  Mat H = Mat::Identity(D, D);
  bool scaled = false;

  for (int it = 0; it < opts.max_iterations; ++it) {
    const Vec pg = projected_gradient(grid, x, g, probe);
    if (pg.norm() < opts.gradient_tol) break;
    if (!scaled) {
      H *= std::min(1.0, max_step / pg.norm());
      scaled = true;
    }
    // Coordinates held at the boundary stay put in both directions.
    auto restrict_active = [&](Vec& v) {
      for (int d = 0; d < D; ++d) {
        if (pg[d] == 0.0 && g[d] != 0.0) v[d] = 0.0;
      }
    };
    Vec p = H * pg;
    restrict_active(p);
    if (!(p.dot(pg) > 0.0)) {
      H = Mat::Identity(D, D) * std::min(1.0, max_step / pg.norm());
      p = H * pg;
      restrict_active(p);
    }
    const double len = p.cwiseAbs().maxCoeff();
    if (len > max_step) p *= max_step / len;

    const Vec xv = to_vec(x, D);
    double t = 1.0;
    bool accepted = false;
    Point xn{};
    double fn = 0.0;
    Point gn{};
    for (int ls = 0; ls < 40; ++ls) {
      xn = grid.project(to_point(xv + t * p));
      const Vec step = to_vec(xn, D) - xv;
      if (step.norm() < opts.step_tol) break;
      fn = f(xn, gn);
      if (fn >= fx + 1e-4 * pg.dot(step) && fn >= fx) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    const Vec s = to_vec(xn, D) - xv;
    const Vec gnew = to_vec(gn, D);
    const Vec y = g - gnew;  // gradient change of -f
    const double ys = y.dot(s);
    if (ys > 1e-14 * s.norm() * y.norm() && ys > 0.0) {
      const double rho = 1.0 / ys;
      const Mat I = Mat::Identity(D, D);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    x = xn;
    fx = fn;
    g = gnew;
    if (fx > best.value) best = {x, fx};
    if (s.norm() < opts.step_tol) break;
  }
  return best;
}

FieldMaximum find_field_maximum(const FieldEvaluator& f, const FineGrid& grid, const std::vector<double>& grid_values,
                                const OptimizerOptions& opts) {
  if (grid_values.size() != grid.size() || grid.size() == 0) throw Error("value count does not match grid");
  const auto starts = discrete_local_maxima(grid, grid_values);
  std::size_t argmax = 0;
  for (std::size_t i = 1; i < grid_values.size(); ++i) {
    if (grid_values[i] > grid_values[argmax]) argmax = i;
  }
  FieldMaximum best{grid.point(argmax), grid_values[argmax]};
  for (std::int64_t s : starts) {
    const FieldMaximum m = ascend(f, grid, grid.point(s), opts);
    if (m.value > best.value) best = m;
  }
  return best;
}

FieldMaximum find_field_maximum(const FieldEvaluator& f, const FineGrid& grid, const OptimizerOptions& opts) {
  if (grid.resolution() < 1) throw Error("optimizer needs a grid with r >= 1");
  std::vector<double> values(grid.size());
  Point g;
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = f(grid.point(i), g);
  return find_field_maximum(f, grid, values, opts);
}

double supremum_abs(const FieldEvaluator& f, const FineGrid& grid, const std::vector<double>& grid_values,
                    const OptimizerOptions& opts) {
  const FieldMaximum up = find_field_maximum(f, grid, grid_values, opts);
  FieldEvaluator neg = [&f](const Point& s, Point& grad) {
    const double v = f(s, grad);
    for (double& c : grad) c = -c;
    return -v;
  };
  std::vector<double> negated(grid_values.size());
  std::transform(grid_values.begin(), grid_values.end(), negated.begin(), [](double v) { return -v; });
  const FieldMaximum down = find_field_maximum(neg, grid, negated, opts);
  return std::max(std::abs(up.value), std::abs(down.value));
}

double supremum_abs(const FieldEvaluator& f, const FineGrid& grid, const OptimizerOptions& opts) {
  std::vector<double> values(grid.size());
  Point g;
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = f(grid.point(i), g);
  return supremum_abs(f, grid, values, opts);
}

}  // namespace rft
