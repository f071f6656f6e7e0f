#include "rft/noise.hpp"

#include <cmath>

#include <boost/random/laplace_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>

#include "rft/rng.hpp"

namespace rft {

Distribution parse_distribution(const std::string& name) {
  if (name == "gaussian" || name == "normal") return Distribution::gaussian;
  if (name == "t" || name == "student-t" || name == "student_t") return Distribution::student_t;
  if (name == "laplace") return Distribution::laplace;
  throw Error("unknown distribution: " + name);
}

std::string to_string(Distribution d) {
  switch (d) {
    case Distribution::gaussian:
      return "gaussian";
    case Distribution::student_t:
      return "student-t";
    case Distribution::laplace:
      return "laplace";
  }
  return "unknown";
}

void NoiseSpec::validate() const {
  if (distribution == Distribution::student_t && !(df >= 3.0)) {
    throw Error("student-t noise needs df >= 3 (finite variance)");
  }
  if (distribution == Distribution::laplace && !(scale > 0.0)) throw Error("laplace scale must be positive");
}

void fill_noise(double* out, std::int64_t count, const NoiseSpec& spec, std::uint32_t tag, std::uint32_t item,
                std::uint32_t subject) {
  Philox4x32 gen = make_stream(spec.seed, tag, item, subject);
  switch (spec.distribution) {
    case Distribution::gaussian: {
      boost::random::normal_distribution<double> dist;
      for (std::int64_t i = 0; i < count; ++i) out[i] = dist(gen);
      break;
    }
    case Distribution::student_t: {
      boost::random::student_t_distribution<double> dist(spec.df);
      for (std::int64_t i = 0; i < count; ++i) out[i] = dist(gen);
      break;
    }
    case Distribution::laplace: {
      boost::random::laplace_distribution<double> dist(0.0, spec.scale);
      for (std::int64_t i = 0; i < count; ++i) out[i] = dist(gen);
      break;
    }
  }
}

LatticeSample generate_noise(const MaskPtr& mask, const NoiseSpec& spec, int subjects, std::uint32_t item,
                             std::uint32_t tag) {
  spec.validate();
  const std::int64_t V = mask->voxel_count();
  std::vector<double> data(static_cast<std::size_t>(subjects) * V);
  for (int n = 0; n < subjects; ++n) {
    fill_noise(data.data() + n * V, V, spec, tag, item, static_cast<std::uint32_t>(n));
  }
  return LatticeSample(mask, subjects, std::move(data));
}

}  // namespace rft
