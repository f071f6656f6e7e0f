#pragma once

#include <memory>
#include <random>
#include <vector>

#include "rft/convfield.hpp"
#include "rft/noise.hpp"

namespace testing {

inline rft::MaskPtr solid(std::vector<int> dims, std::vector<double> spacing = {}) {
  return std::make_shared<const rft::Mask>(rft::Mask::solid(std::move(dims), std::move(spacing)));
}

inline rft::MaskPtr make_mask(std::vector<int> dims, std::vector<std::uint8_t> inside, std::vector<double> spacing = {}) {
  if (spacing.empty()) spacing.assign(dims.size(), 1.0);
  return std::make_shared<const rft::Mask>(rft::Mask(std::move(dims), std::move(spacing), std::move(inside)));
}

/// Random mask with inclusion probability p (at least one voxel kept).
inline rft::MaskPtr random_mask(std::mt19937_64& g, std::vector<int> dims, double p) {
  std::size_t total = 1;
  for (int n : dims) total *= static_cast<std::size_t>(n);
  std::bernoulli_distribution b(p);
  std::vector<std::uint8_t> in(total);
  for (auto& x : in) x = b(g) ? 1 : 0;
  in[std::uniform_int_distribution<std::size_t>(0, total - 1)(g)] = 1;
  return make_mask(std::move(dims), std::move(in));
}

inline rft::LatticeSample gaussian_sample(const rft::MaskPtr& m, int N, std::uint64_t seed, std::uint32_t item = 0) {
  rft::NoiseSpec spec;
  spec.seed = seed;
  return rft::generate_noise(m, spec, N, item);
}

}  // namespace testing
