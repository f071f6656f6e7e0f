#pragma once

#include <functional>
#include <vector>

#include "rft/grid.hpp"

namespace rft {

/// Returns f(s) and writes grad f(s).
using FieldEvaluator = std::function<double(const Point& s, Point& grad)>;

struct FieldMaximum {
  Point location{};
  double value = 0.0;
};

struct OptimizerOptions {
  double gradient_tol = 1e-8;
  double step_tol = 1e-10;
  int max_iterations = 200;
  /// Longest step per iteration as a fraction of the smallest spacing.
  double max_step = 0.5;
};

/// Grid points whose value is >= every existing neighbour in the full
/// 3^D - 1 neighbourhood of the fine lattice.
std::vector<std::int64_t> discrete_local_maxima(const FineGrid& grid, const std::vector<double>& values);

/// Projected quasi-Newton ascent from one start, constrained to the voxel
/// manifold. Never returns less than the start value.
FieldMaximum ascend(const FieldEvaluator& f, const FineGrid& grid, const Point& start,
                    const OptimizerOptions& opts = {});

/// Multi-start maximisation over S from every discrete local maximum of
/// `grid_values`. The result is at least max(grid_values).
FieldMaximum find_field_maximum(const FieldEvaluator& f, const FineGrid& grid, const std::vector<double>& grid_values,
                                const OptimizerOptions& opts = {});
/// Same, evaluating f on the grid first. Requires r >= 1.
FieldMaximum find_field_maximum(const FieldEvaluator& f, const FineGrid& grid, const OptimizerOptions& opts = {});

/// sup over S of |f|, from maximising f and -f.
double supremum_abs(const FieldEvaluator& f, const FineGrid& grid, const std::vector<double>& grid_values,
                    const OptimizerOptions& opts = {});
double supremum_abs(const FieldEvaluator& f, const FineGrid& grid, const OptimizerOptions& opts = {});

}  // namespace rft
