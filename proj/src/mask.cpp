#include "rft/mask.hpp"

#include <cmath>
#include <numeric>

namespace rft {

Mask::Mask(std::vector<int> dims, std::vector<double> spacing, std::vector<std::uint8_t> inside)
    : dims_(std::move(dims)), spacing_(std::move(spacing)), inside_(std::move(inside)) {
  if (dims_.empty() || dims_.size() > kMaxDim) throw Error("mask dimension must be 1, 2 or 3");
  if (spacing_.empty()) spacing_.assign(dims_.size(), 1.0);
  if (spacing_.size() != dims_.size()) throw Error("spacing count does not match dimension");
  std::int64_t total = 1;
  for (std::size_t d = 0; d < dims_.size(); ++d) {
    if (dims_[d] <= 0) throw Error("mask dims must be positive");
    if (!(spacing_[d] > 0.0) || !std::isfinite(spacing_[d])) throw Error("mask spacing must be positive and finite");
    total *= dims_[d];
  }
  if (static_cast<std::int64_t>(inside_.size()) != total) throw Error("mask payload size does not match dims");
  std::int64_t stride = 1;
  for (int d = dim() - 1; d >= 0; --d) {
    strides_[d] = stride;
    stride *= dims_[d];
  }
  voxel_id_.assign(inside_.size(), -1);
  for (std::int64_t i = 0; i < total; ++i) {
    if (inside_[i]) {
      inside_[i] = 1;
      voxel_id_[i] = static_cast<std::int64_t>(voxels_.size());
      voxels_.push_back(i);
    }
  }
  if (voxels_.empty()) throw Error("empty domain");
}

Mask Mask::solid(std::vector<int> dims, std::vector<double> spacing) {
  std::int64_t total = 1;
  for (int n : dims) total *= std::max(n, 0);
  return Mask(std::move(dims), std::move(spacing), std::vector<std::uint8_t>(total, 1));
}

bool Mask::in_range(const Index& idx) const {
  for (int d = 0; d < dim(); ++d) {
    if (idx[d] < 0 || idx[d] >= dims_[d]) return false;
  }
  return true;
}

std::int64_t Mask::linear(const Index& idx) const {
  std::int64_t lin = 0;
  for (int d = 0; d < dim(); ++d) lin += strides_[d] * idx[d];
  return lin;
}

Index Mask::unravel(std::int64_t lin) const {
  Index idx{};
  for (int d = 0; d < dim(); ++d) {
    idx[d] = static_cast<int>(lin / strides_[d]);
    lin -= idx[d] * strides_[d];
  }
  return idx;
}

Point Mask::position(const Index& idx) const {
  Point p{};
  for (int d = 0; d < dim(); ++d) p[d] = idx[d] * spacing_[d];
  return p;
}

Mask Mask::padded(int margin) const {
  std::vector<int> dims = dims_;
  for (int& n : dims) n += 2 * margin;
  return solid(std::move(dims), spacing_);
}

Mask Mask::embedded(int margin) const {
  std::vector<int> dims = dims_;
  for (int& n : dims) n += 2 * margin;
  std::int64_t total = std::accumulate(dims.begin(), dims.end(), std::int64_t{1}, std::multiplies<>());
  Mask big = solid(dims, spacing_);
  std::vector<std::uint8_t> inside(total, 0);
  for (std::int64_t v : voxels_) {
    Index idx = unravel(v);
    for (int d = 0; d < dim(); ++d) idx[d] += margin;
    inside[big.linear(idx)] = 1;
  }
  return Mask(std::move(dims), spacing_, std::move(inside));
}

}  // namespace rft
