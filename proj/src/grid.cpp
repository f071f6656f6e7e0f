#include "rft/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rft {

namespace {

// Index into a dense (2n+1)^D array of doubled cell coordinates.
struct CellLattice {
  std::array<std::int64_t, kMaxDim> extent{1, 1, 1};
  std::array<std::int64_t, kMaxDim> stride{0, 0, 0};
  std::int64_t total = 1;

  explicit CellLattice(const Mask& mask) {
    const int D = mask.dim();
    for (int d = D - 1; d >= 0; --d) {
      extent[d] = 2 * static_cast<std::int64_t>(mask.dims()[d]) + 1;
      stride[d] = total;
      total *= extent[d];
    }
  }
  std::int64_t at(const std::array<std::int64_t, kMaxDim>& e, int D) const {
    std::int64_t lin = 0;
    for (int d = 0; d < D; ++d) lin += e[d] * stride[d];
    return lin;
  }
};

long cubical_euler(const Mask& mask) {
  const int D = mask.dim();
  CellLattice cells(mask);
  std::vector<std::uint8_t> present(cells.total, 0);
  int combos = 1;
  for (int d = 0; d < D; ++d) combos *= 3;
  for (std::int64_t v : mask.voxels()) {
    const Index idx = mask.unravel(v);
    for (int c = 0; c < combos; ++c) {
      std::array<std::int64_t, kMaxDim> e{};
      int code = c;
      for (int d = 0; d < D; ++d) {
        e[d] = 2 * static_cast<std::int64_t>(idx[d]) + 1 + (code % 3) - 1;
        code /= 3;
      }
      present[cells.at(e, D)] = 1;
    }
  }
  long chi = 0;
  for (std::int64_t lin = 0; lin < cells.total; ++lin) {
    if (!present[lin]) continue;
    int odd = 0;
    std::int64_t rem = lin;
    for (int d = 0; d < D; ++d) {
      const std::int64_t e = rem / cells.stride[d];
      rem -= e * cells.stride[d];
      odd += static_cast<int>(e & 1);
    }
    chi += (odd % 2 == 0) ? 1 : -1;
  }
  return chi;
}

// Exterior-angle weight of a lattice edge given the four voxels around it,
// listed cyclically.
double edge_angle_weight(const std::array<bool, 4>& around) {
  const int k = around[0] + around[1] + around[2] + around[3];
  switch (k) {
    case 1:
      return 0.25;
    case 3:
      return -0.25;
    case 2:
      // Diagonal pair: the two boxes meet along the edge only.
      return (around[0] == around[2]) ? -0.5 : 0.0;
    default:
      return 0.0;
  }
}

}  // namespace

VoxelManifoldSummary build_voxel_manifold(const Mask& mask) {
  const int D = mask.dim();
  const auto& h = mask.spacing();
  VoxelManifoldSummary out;
  out.dim = D;
  double cell = 1.0;
  for (int d = 0; d < D; ++d) cell *= h[d];
  out.volume = cell * static_cast<double>(mask.voxel_count());

  for (std::int64_t v : mask.voxels()) {
    const Index idx = mask.unravel(v);
    for (int a = 0; a < D; ++a) {
      double face = 1.0;
      for (int b = 0; b < D; ++b) {
        if (b != a) face *= h[b];
      }
      for (int side : {-1, 1}) {
        Index nb = idx;
        nb[a] += side;
        if (!mask.inside(nb)) out.face_area[a] += face;
      }
    }
  }
  for (int a = 0; a < D; ++a) out.boundary_area += out.face_area[a];

  if (D == 3) {
    const auto& n = mask.dims();
    for (int d = 0; d < 3; ++d) {
      const int b = (d + 1) % 3;
      const int c = (d + 2) % 3;
      double total = 0.0;
      for (int i = 0; i < n[d]; ++i) {
        for (int jb = 0; jb <= n[b]; ++jb) {
          for (int jc = 0; jc <= n[c]; ++jc) {
            auto in = [&](int ob, int oc) {
              Index idx{};
              idx[d] = i;
              idx[b] = jb - 1 + ob;
              idx[c] = jc - 1 + oc;
              return mask.inside(idx);
            };
            const std::array<bool, 4> around{in(0, 0), in(1, 0), in(1, 1), in(0, 1)};
            total += edge_angle_weight(around);
          }
        }
      }
      out.edge_weight[d] = total * h[d];
    }
  }
  out.euler_characteristic = cubical_euler(mask);
  return out;
}

std::shared_ptr<const FineGrid> FineGrid::build(MaskPtr mask, int r) {
  if (!mask) throw Error("null mask");
  if (r < 0) throw Error("added resolution must be non-negative");
  std::shared_ptr<FineGrid> g(new FineGrid());
  g->mask_ = mask;
  g->r_ = r;
  const int D = mask->dim();
  const int half = (r + 1) / 2;
  g->low_ = -2 * half;
  for (int d = 0; d < kMaxDim; ++d) {
    g->lattice_dims_[d] = 1;
    g->unit_[d] = 0.0;
  }
  std::int64_t total = 1;
  for (int d = D - 1; d >= 0; --d) {
    g->unit_[d] = mask->spacing()[d] / (2.0 * (r + 1));
    g->lattice_dims_[d] = (r + 1) * (mask->dims()[d] - 1) + 2 * half + 1;
    g->strides_[d] = total;
    total *= g->lattice_dims_[d];
  }

  // Mark fine-lattice points covered by any included voxel.
  std::vector<std::int64_t>& lookup = g->lookup_;
  lookup.assign(total, -1);
  const int span = 2 * half + 1;
  int combos = 1;
  for (int d = 0; d < D; ++d) combos *= span;
  for (std::int64_t v : mask->voxels()) {
    const Index idx = mask->unravel(v);
    for (int c = 0; c < combos; ++c) {
      int code = c;
      std::int64_t lin = 0;
      for (int d = 0; d < D; ++d) {
        const int k = code % span;
        code /= span;
        lin += static_cast<std::int64_t>((r + 1) * idx[d] + k) * g->strides_[d];
      }
      lookup[lin] = 0;
    }
  }

  // Canonical (lexicographic) numbering.
  std::int64_t count = 0;
  for (std::int64_t lin = 0; lin < total; ++lin) {
    if (lookup[lin] < 0) continue;
    lookup[lin] = count++;
    Index f{};
    std::int64_t rem = lin;
    Point p{};
    for (int d = 0; d < D; ++d) {
      f[d] = static_cast<int>(rem / g->strides_[d]);
      rem -= f[d] * g->strides_[d];
      p[d] = g->lattice_coordinate(d, f[d]);
    }
    g->fine_index_.push_back(f);
    g->points_.push_back(p);
  }

  // Integer coordinates in units of h / (2 (r + 1)): voxel i is centred at
  // 2 (r + 1) i and its box spans +-(r + 1).
  const std::int64_t box = r + 1;
  auto voxel_of_doubled = [&](std::int64_t twice) {
    // floor((twice / 2 + box) / (2 box)) for an odd `twice`
    const std::int64_t num = twice + 2 * box;
    const std::int64_t den = 4 * box;
    return static_cast<int>(num >= 0 ? num / den : -((-num + den - 1) / den));
  };

  const std::size_t P = g->points_.size();
  g->volume_weights_.assign(P, 0.0);
  double orthant = 1.0;
  for (int d = 0; d < D; ++d) orthant *= g->unit_[d];
  const int orthants = 1 << D;
  for (std::size_t i = 0; i < P; ++i) {
    std::array<std::int64_t, kMaxDim> c{};
    for (int d = 0; d < D; ++d) c[d] = g->low_ + 2 * static_cast<std::int64_t>(g->fine_index_[i][d]);
    int covered = 0;
    for (int o = 0; o < orthants; ++o) {
      Index vox{};
      for (int d = 0; d < D; ++d) vox[d] = voxel_of_doubled(2 * c[d] + (((o >> d) & 1) ? 1 : -1));
      covered += mask->inside(vox) ? 1 : 0;
    }
    g->volume_weights_[i] = covered * orthant;

    for (int a = 0; a < D; ++a) {
      double piece = 1.0;
      for (int b = 0; b < D; ++b) {
        if (b != a) piece *= g->unit_[b];
      }
      double weight = 0.0;
      for (std::int64_t plane = c[a] - 1; plane <= c[a] + 1; ++plane) {
        const std::int64_t m = (plane + box) % (2 * box);
        if (m != 0) continue;
        const int in_plane = 1 << (D - 1);
        for (int o = 0; o < in_plane; ++o) {
          Index lo{}, hi{};
          int bit = 0;
          for (int b = 0; b < D; ++b) {
            if (b == a) continue;
            const int vb = voxel_of_doubled(2 * c[b] + (((o >> bit) & 1) ? 1 : -1));
            lo[b] = hi[b] = vb;
            ++bit;
          }
          lo[a] = voxel_of_doubled(2 * plane - 1);
          hi[a] = voxel_of_doubled(2 * plane + 1);
          if (mask->inside(lo) != mask->inside(hi)) weight += piece;
        }
      }
      if (weight > 0.0) g->faces_[a].push_back({static_cast<std::int64_t>(i), weight});
    }
  }

  g->voxel_points_.resize(mask->voxel_count());
  for (std::int64_t v = 0; v < mask->voxel_count(); ++v) {
    const Index idx = mask->unravel(mask->voxels()[v]);
    Index f{};
    for (int d = 0; d < D; ++d) f[d] = (r + 1) * idx[d] + half;
    g->voxel_points_[v] = g->lookup(f);
  }
  return g;
}

double FineGrid::lattice_coordinate(int axis, int f) const {
  return static_cast<double>(low_ + 2 * static_cast<std::int64_t>(f)) * unit_[axis];
}

std::int64_t FineGrid::lookup(const Index& f) const {
  std::int64_t lin = 0;
  for (int d = 0; d < dim(); ++d) {
    if (f[d] < 0 || f[d] >= lattice_dims_[d]) return -1;
    lin += f[d] * strides_[d];
  }
  return lookup_[lin];
}

bool FineGrid::contains(const Point& s, double tol) const {
  const int D = dim();
  const auto& h = mask_->spacing();
  std::array<std::array<int, 2>, kMaxDim> cand{};
  for (int d = 0; d < D; ++d) {
    const double t = s[d] / h[d];
    // Voxels i with |t - i| <= 1/2 + tol; at most two unless tol >= 1/2.
    cand[d] = {static_cast<int>(std::ceil(t - 0.5 - tol)), static_cast<int>(std::floor(t + 0.5 + tol))};
  }
  for (int o = 0; o < (1 << D); ++o) {
    Index idx{};
    bool ok = true;
    for (int d = 0; d < D; ++d) {
      idx[d] = cand[d][(o >> d) & 1];
      if (std::abs(s[d] / h[d] - idx[d]) > 0.5 + tol) ok = false;
    }
    if (ok && mask_->inside(idx)) return true;
  }
  return false;
}

Point FineGrid::project(const Point& s) const {
  if (contains(s)) return s;
  const int D = dim();
  const auto& h = mask_->spacing();
  int maxdim = 0;
  for (int d = 0; d < D; ++d) maxdim = std::max(maxdim, mask_->dims()[d]);
  Index centre{};
  for (int d = 0; d < D; ++d) centre[d] = static_cast<int>(std::lround(s[d] / h[d]));
  for (int radius = 2;; radius *= 2) {
    double best = std::numeric_limits<double>::infinity();
    Point best_point = s;
    Index lo{}, hi{};
    for (int d = 0; d < D; ++d) {
      lo[d] = std::max(0, centre[d] - radius);
      hi[d] = std::min(mask_->dims()[d] - 1, centre[d] + radius);
    }
    Index idx = lo;
    bool any_range = true;
    for (int d = 0; d < D; ++d) any_range = any_range && lo[d] <= hi[d];
    while (any_range) {
      if (mask_->inside(idx)) {
        Point q{};
        double dist = 0.0;
        for (int d = 0; d < D; ++d) {
          const double c = idx[d] * h[d];
          q[d] = std::clamp(s[d], c - 0.5 * h[d], c + 0.5 * h[d]);
          dist += (q[d] - s[d]) * (q[d] - s[d]);
        }
        if (dist < best) {
          best = dist;
          best_point = q;
        }
      }
      int d = D - 1;
      while (d >= 0 && ++idx[d] > hi[d]) {
        idx[d] = lo[d];
        --d;
      }
      if (d < 0) break;
    }
    if (std::isfinite(best)) return best_point;
    if (radius > 2 * maxdim + 4) throw Error("projection found no voxel");
  }
}

}  // namespace rft
