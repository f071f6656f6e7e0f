#include "rft/ecd.hpp"

#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace rft {

Tails parse_tails(const std::string& s) {
  if (s == "one" || s == "1") return Tails::one;
  if (s == "two" || s == "2") return Tails::two;
  throw Error("tails must be 'one' or 'two': " + s);
}

std::string to_string(Tails t) { return t == Tails::one ? "one" : "two"; }

ECDensityParams ECDensityParams::t_field(double df) {
  if (!(df >= 2.0) || !std::isfinite(df)) throw Error("t-field degrees of freedom must be at least 2");
  return {df, FieldType::t};
}

ECDensityParams ECDensityParams::gaussian_field() { return {0.0, FieldType::gaussian}; }

namespace {

double gaussian_density(int d, double u) {
  const double e = std::exp(-0.5 * u * u);
  const double tp = 2.0 * M_PI;
  switch (d) {
    case 0:
      return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), u));
    case 1:
      return e / tp;
    case 2:
      return u * e / std::pow(tp, 1.5);
    case 3:
      return (u * u - 1.0) * e / (tp * tp);
  }
  throw Error("unsupported EC density dimension");
}

double t_density(int d, double nu, double u) {
  if (d == 0) return boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<double>(nu), u));
  const double tp = 2.0 * M_PI;
  const double decay = std::pow(1.0 + u * u / nu, -(nu - 1.0) / 2.0);
  switch (d) {
    case 1:
      return decay / tp;
    case 2: {
      const double c = std::exp(std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0)) / std::sqrt(nu / 2.0);
      return c * u * decay / std::pow(tp, 1.5);
    }
    case 3:
      return ((nu - 1.0) / nu * u * u - 1.0) * decay / (tp * tp);
  }
  throw Error("unsupported EC density dimension");
}

}  // namespace

double ec_density(int d, const ECDensityParams& p, double u) {
  if (d < 0 || d > 3) throw Error("unsupported EC density dimension");
  if (!std::isfinite(u)) throw Error("threshold must be finite");
  if (p.type == FieldType::gaussian) return gaussian_density(d, u);
  if (!(p.df >= 2.0)) throw Error("t-field degrees of freedom must be at least 2");
  return t_density(d, p.df, u);
}

double eec(const LKCVector& lkcs, const ECDensityParams& p, double u) {
  double s = 0.0;
  for (std::size_t d = 0; d < lkcs.values.size(); ++d) {
    if (lkcs.values[d] != 0.0) s += lkcs.values[d] * ec_density(static_cast<int>(d), p, u);
  }
  return s;
}

double fwer_threshold(const LKCVector& lkcs, const ECDensityParams& p, double alpha, Tails tails) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
  const double target = tails == Tails::two ? alpha / 2.0 : alpha;
  auto g = [&](double u) { return eec(lkcs, p, u) - target; };

  double start = 1.0;
  if (p.type == FieldType::t) {
    start = std::max(start, boost::math::quantile(
                                boost::math::complement(boost::math::students_t_distribution<double>(p.df), target)));
  } else {
    start = std::max(start, boost::math::quantile(
                                boost::math::complement(boost::math::normal_distribution<double>(), target)));
  }
  double hi = start;
  while (g(hi) >= 0.0) {
    hi *= 2.0;
    if (hi > 1e6) throw Error("threshold search did not terminate");
  }
  // Walk down from the tail to the first crossing so that the largest root is
  // bracketed even where eec is not monotone.
  const double step = 0.01;
  double lo = hi;
  for (;;) {
    const double next = lo - step;
    if (next < 0.0) {
      if (g(0.0) >= 0.0) {
        hi = lo;
        lo = 0.0;
        break;
      }
      throw Error("alpha too large for domain");
    }
    if (g(next) >= 0.0) {
      hi = lo;
      lo = next;
      break;
    }
    lo = next;
  }
  // g(lo) >= 0 > g(hi)
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
}

}  // namespace rft
