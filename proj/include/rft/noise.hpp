#pragma once

#include <cstdint>
#include <string>

#include "rft/convfield.hpp"

namespace rft {

enum class Distribution { gaussian, student_t, laplace };

Distribution parse_distribution(const std::string& name);
std::string to_string(Distribution d);

struct NoiseSpec {
  Distribution distribution = Distribution::gaussian;
  double df = 3.0;     // student-t
  double scale = 1.0;  // laplace
  std::uint64_t seed = 0;
  /// Edge-correction margin in voxels; negative means ceil(4 sigma) of the kernel.
  int padding = 0;

  void validate() const;
};

/// I.i.d. draws on every voxel of `mask` for N subjects. Subject n of work
/// item `item` reads the stream (seed, tag, item, n), voxels in mask order.
LatticeSample generate_noise(const MaskPtr& mask, const NoiseSpec& spec, int subjects, std::uint32_t item,
                             std::uint32_t tag = 0);

/// One draw stream for a subject, filling `out` (length = voxel count).
void fill_noise(double* out, std::int64_t count, const NoiseSpec& spec, std::uint32_t tag, std::uint32_t item,
                std::uint32_t subject);

}  // namespace rft
