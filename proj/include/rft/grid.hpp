#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "rft/mask.hpp"

namespace rft {

/// Geometry of the voxel manifold S, the closed union of the voxel boxes.
struct VoxelManifoldSummary {
  int dim = 0;
  double volume = 0.0;
  /// Total (D-1)-measure of the exposed voxel faces. For D = 1 this is the
  /// number of interval endpoints.
  double boundary_area = 0.0;
  /// Exposed face measure split by the axis normal to the face.
  std::array<double, kMaxDim> face_area{};
  /// D = 3 only: signed edge length per direction, weighted by the exterior
  /// angle fraction of each boundary edge (+1/4 convex, -1/4 concave, -1/2 for
  /// two voxels touching along the edge only). Sum gives L1 of S when Lambda = I.
  std::array<double, kMaxDim> edge_weight{};
  long euler_characteristic = 0;
};

VoxelManifoldSummary build_voxel_manifold(const Mask& mask);

/// One point of a boundary face set together with its face measure w'_r(s).
struct FaceEntry {
  std::int64_t point;
  double weight;
};

/// The added-resolution grid V_r over a mask.
///
/// Points are s = v + k h / (r + 1) with k in Z^D and |k_d| <= (r + 1) / 2,
/// deduplicated across voxels and ordered lexicographically. Internally every
/// point carries an integer coordinate on a lattice of step h / (2 (r + 1)),
/// so all clipping decisions below are exact.
class FineGrid {
 public:
  static std::shared_ptr<const FineGrid> build(MaskPtr mask, int r);

  const Mask& mask() const { return *mask_; }
  const MaskPtr& mask_ptr() const { return mask_; }
  int resolution() const { return r_; }
  int dim() const { return mask_->dim(); }

  std::size_t size() const { return points_.size(); }
  const std::vector<Point>& points() const { return points_; }
  const Point& point(std::size_t i) const { return points_[i]; }

  /// vol(U_r(s) ∩ S) for every point, U_r(s) the cuboid of side h / (r + 1).
  const std::vector<double>& volume_weights() const { return volume_weights_; }
  /// Points whose cell meets an exposed face normal to `axis`, with the
  /// (D-1)-measure of that intersection.
  const std::vector<FaceEntry>& faces(int axis) const { return faces_[axis]; }

  /// Bounding box of the grid as a dense lattice of step h / (r + 1).
  const Index& lattice_dims() const { return lattice_dims_; }
  double lattice_coordinate(int axis, int f) const;
  const Index& fine_index(std::size_t i) const { return fine_index_[i]; }
  /// Grid point at a fine-lattice index, or -1.
  std::int64_t lookup(const Index& f) const;
  /// Grid point sitting at the centre of the given voxel.
  std::int64_t voxel_point(std::int64_t voxel) const { return voxel_points_[voxel]; }
  const std::vector<std::int64_t>& voxel_points() const { return voxel_points_; }

  /// Whether s lies in the closed voxel manifold (tolerance relative to h).
  bool contains(const Point& s, double tol = 1e-12) const;
  /// Nearest point of S.
  Point project(const Point& s) const;

 private:
  FineGrid() = default;

  MaskPtr mask_;
  int r_ = 0;
  std::array<double, kMaxDim> unit_{};  // h_d / (2 (r + 1))
  int low_ = 0;                         // integer coordinate of fine index 0
  Index lattice_dims_{};
  std::array<std::int64_t, kMaxDim> strides_{};
  std::vector<std::int64_t> lookup_;
  std::vector<Point> points_;
  std::vector<Index> fine_index_;
  std::vector<double> volume_weights_;
  std::array<std::vector<FaceEntry>, kMaxDim> faces_;
  std::vector<std::int64_t> voxel_points_;
};

using GridPtr = std::shared_ptr<const FineGrid>;

}  // namespace rft
