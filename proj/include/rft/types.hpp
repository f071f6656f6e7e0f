#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/LU>

namespace rft {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxDim = 3;

/// Physical coordinates in R^D; entries beyond D are zero.
using Point = std::array<double, kMaxDim>;
/// Integer lattice index; entries beyond D are zero.
using Index = std::array<int, kMaxDim>;

/// Small symmetric matrices (D x D, D <= 3) without heap allocation.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

}  // namespace rft
