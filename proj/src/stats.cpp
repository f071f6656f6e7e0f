#include "rft/stats.hpp"

#include <cmath>
#include <sstream>

namespace rft {

namespace {

struct Moments {
  double mean;
  double sd;
};

Moments moments(int N, const double* y, std::size_t stride) {
  double m = 0.0;
  double scale = 0.0;
  for (int n = 0; n < N; ++n) {
    m += y[n * stride];
    scale = std::max(scale, std::abs(y[n * stride]));
  }
  m /= N;
  double ss = 0.0;
  for (int n = 0; n < N; ++n) {
    const double d = y[n * stride] - m;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (N - 1));
  if (!(sd > 1e-13 * scale) || sd == 0.0) return {m, 0.0};
  return {m, sd};
}

[[noreturn]] void zero_sd(const FineGrid& grid, std::size_t i) {
  std::ostringstream os;
  os << "zero standard deviation at grid point " << i << " (";
  for (int d = 0; d < grid.dim(); ++d) os << (d ? "," : "") << grid.point(i)[d];
  os << ")";
  throw Error(os.str());
}

void check_fields(const FieldSet& f) {
  if (!f.grid) throw Error("field set has no grid");
  if (f.subjects < 3) throw Error("t-field needs at least three subjects");
  if (f.values.size() != f.subjects * f.points()) throw Error("field value count mismatch");
}

}  // namespace

double t_statistic(int N, int D, const double* values, const double* gradients, double* grad_out) {
  const Moments mo = moments(N, values, 1);
  if (mo.sd == 0.0) throw Error("zero standard deviation");
  const double sqn = std::sqrt(static_cast<double>(N));
  if (gradients && grad_out) {
    for (int a = 0; a < D; ++a) {
      double dm = 0.0;
      for (int n = 0; n < N; ++n) dm += gradients[n * D + a];
      dm /= N;
      double ds = 0.0;
      for (int n = 0; n < N; ++n) ds += (values[n] - mo.mean) * (gradients[n * D + a] - dm);
      ds /= (N - 1) * mo.sd;
      grad_out[a] = sqn * (dm / mo.sd - mo.mean * ds / (mo.sd * mo.sd));
    }
  }
  return sqn * mo.mean / mo.sd;
}

ScalarField t_field(const FieldSet& f) {
  check_fields(f);
  const int N = f.subjects;
  const int D = f.grid->dim();
  const std::size_t P = f.points();
  ScalarField t;
  t.grid = f.grid;
  t.values.resize(P);
  if (f.has_gradients()) t.gradients.resize(P * D);
  std::vector<double> vals(N), grads(N * D);
  for (std::size_t i = 0; i < P; ++i) {
    for (int n = 0; n < N; ++n) {
      vals[n] = f.values[n * P + i];
      if (f.has_gradients()) {
        for (int d = 0; d < D; ++d) grads[n * D + d] = f.gradients[(n * P + i) * D + d];
      }
    }
    if (moments(N, vals.data(), 1).sd == 0.0) zero_sd(*f.grid, i);
    t.values[i] = t_statistic(N, D, vals.data(), f.has_gradients() ? grads.data() : nullptr,
                              f.has_gradients() ? t.gradients.data() + i * D : nullptr);
  }
  return t;
}

ResidualSet residual_fields(const FieldSet& f) {
  check_fields(f);
  if (!f.has_gradients()) throw Error("residual fields need subject gradients");
  const int N = f.subjects;
  const int D = f.grid->dim();
  const std::size_t P = f.points();
  ResidualSet r;
  r.grid = f.grid;
  r.subjects = N;
  r.values.resize(N * P);
  r.gradients.resize(N * P * D);
  for (std::size_t i = 0; i < P; ++i) {
    const Moments mo = moments(N, f.values.data() + i, P);
    if (mo.sd == 0.0) zero_sd(*f.grid, i);
    for (int n = 0; n < N; ++n) r.values[n * P + i] = (f.values[n * P + i] - mo.mean) / mo.sd;
    for (int a = 0; a < D; ++a) {
      double dm = 0.0;
      for (int n = 0; n < N; ++n) dm += f.gradients[(n * P + i) * D + a];
      dm /= N;
      double ds = 0.0;
      for (int n = 0; n < N; ++n) ds += (f.values[n * P + i] - mo.mean) * (f.gradients[(n * P + i) * D + a] - dm);
      ds /= (N - 1) * mo.sd;
      for (int n = 0; n < N; ++n) {
        r.gradients[(n * P + i) * D + a] =
            (f.gradients[(n * P + i) * D + a] - dm - r.values[n * P + i] * ds) / mo.sd;
      }
    }
  }
  return r;
}

std::vector<Mat> lambda_hat(const ResidualSet& r) {
  if (!r.grid) throw Error("residual set has no grid");
  const int D = r.grid->dim();
  const std::size_t P = r.points();
  if (r.gradients.size() != r.subjects * P * D) throw Error("residual gradients missing");
  const int N = r.subjects;
  std::vector<Mat> out(P);
  for (std::size_t i = 0; i < P; ++i) {
    double mean[kMaxDim] = {0.0, 0.0, 0.0};
    for (int n = 0; n < N; ++n) {
      for (int a = 0; a < D; ++a) mean[a] += r.gradients[(n * P + i) * D + a];
    }
    for (int a = 0; a < D; ++a) mean[a] /= N;
    Mat L = Mat::Zero(D, D);
    for (int n = 0; n < N; ++n) {
      const double* g = r.gradients.data() + (n * P + i) * D;
      for (int a = 0; a < D; ++a) {
        for (int b = 0; b < D; ++b) L(a, b) += g[a] * (g[b] - mean[b]);
      }
    }
    L /= (N - 1);
    out[i] = 0.5 * (L + L.transpose());
  }
  return out;
}

std::vector<Mat> lambda_hat(const FieldSet& f) { return lambda_hat(residual_fields(f)); }

double TFieldEvaluator::operator()(const Point& s, Point& grad) const {
  const int N = fields_->subjects();
  const int D = fields_->dim();
  std::vector<double> vals(N), grads(N * D);
  fields_->eval(s, vals.data(), grads.data());
  double g[kMaxDim] = {0.0, 0.0, 0.0};
  const double t = t_statistic(N, D, vals.data(), grads.data(), g);
  grad = {g[0], g[1], g[2]};
  return t;
}

FieldEvaluator TFieldEvaluator::as_function() const {
  const TFieldEvaluator self = *this;
  return [self](const Point& s, Point& grad) { return self(s, grad); };
}

}  // namespace rft
