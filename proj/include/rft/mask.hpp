#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rft/types.hpp"

namespace rft {

/// A finite regular lattice in R^D (D <= 3) with a per-point inclusion flag.
///
/// Lattice point i sits at physical position i * h (componentwise). Storage is
/// row-major with the last axis fastest. Included points are the voxels of the
/// domain; each voxel owns the closed box of side h centred on it.
class Mask {
 public:
  Mask(std::vector<int> dims, std::vector<double> spacing, std::vector<std::uint8_t> inside);

  /// Every lattice point included. Spacing defaults to 1 on every axis.
  static Mask solid(std::vector<int> dims, std::vector<double> spacing = {});

  int dim() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<double>& spacing() const { return spacing_; }
  const std::vector<std::uint8_t>& inclusion() const { return inside_; }

  std::int64_t lattice_size() const { return static_cast<std::int64_t>(inside_.size()); }
  std::int64_t voxel_count() const { return static_cast<std::int64_t>(voxels_.size()); }

  bool in_range(const Index& idx) const;
  bool inside(const Index& idx) const { return in_range(idx) && inside_[linear(idx)] != 0; }
  bool inside_linear(std::int64_t lin) const { return inside_[lin] != 0; }

  std::int64_t linear(const Index& idx) const;
  Index unravel(std::int64_t lin) const;

  /// Lattice linear index of each voxel, ascending.
  const std::vector<std::int64_t>& voxels() const { return voxels_; }
  /// Voxel id of a lattice point, or -1 when excluded.
  std::int64_t voxel_id(std::int64_t lin) const { return voxel_id_[lin]; }

  Point position(const Index& idx) const;
  Point voxel_position(std::int64_t voxel) const { return position(unravel(voxels_[voxel])); }

  /// Same lattice grown by `margin` points on every side, all included. The
  /// original lattice point i maps to i + margin.
  Mask padded(int margin) const;
  /// Lattice of padded(margin) whose inclusion reproduces this mask.
  Mask embedded(int margin) const;

  bool operator==(const Mask& other) const {
    return dims_ == other.dims_ && spacing_ == other.spacing_ && inside_ == other.inside_;
  }

 private:
  std::vector<int> dims_;
  std::vector<double> spacing_;
  std::vector<std::uint8_t> inside_;
  std::vector<std::int64_t> voxels_;
  std::vector<std::int64_t> voxel_id_;
  std::array<std::int64_t, kMaxDim> strides_{};
};

using MaskPtr = std::shared_ptr<const Mask>;

}  // namespace rft
