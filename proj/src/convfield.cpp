#include "rft/convfield.hpp"

#include <cmath>
#include <functional>

#include "rft/gaussianize.hpp"

namespace rft {

LatticeSample::LatticeSample(MaskPtr mask, int subjects, std::vector<double> data)
    : mask_(std::move(mask)), subjects_(subjects), data_(std::move(data)) {
  if (!mask_) throw Error("null mask");
  if (subjects_ < 2) throw Error("a sample needs at least two subjects");
  if (static_cast<std::int64_t>(data_.size()) != static_cast<std::int64_t>(subjects_) * mask_->voxel_count()) {
    throw Error("sample data size does not match subjects x voxels");
  }
  for (double x : data_) {
    if (!std::isfinite(x)) throw Error("sample contains non-finite values");
  }
}

LatticeSample LatticeSample::subset(const std::vector<int>& subjects) const {
  std::vector<double> out;
  out.reserve(subjects.size() * voxels());
  for (int n : subjects) {
    if (n < 0 || n >= subjects_) throw Error("subject index out of range");
    out.insert(out.end(), row(n), row(n) + voxels());
  }
  return LatticeSample(mask_, static_cast<int>(subjects.size()), std::move(out));
}

ScalarField FieldSet::field(int n) const {
  ScalarField f;
  f.grid = grid;
  const std::size_t P = points();
  f.values.assign(values.begin() + n * P, values.begin() + (n + 1) * P);
  if (has_gradients()) {
    const std::size_t D = grid->dim();
    f.gradients.assign(gradients.begin() + n * P * D, gradients.begin() + (n + 1) * P * D);
  }
  return f;
}

namespace {

// Banded matrix taking a lattice axis (n points) to a fine axis (m points).
struct AxisOperator {
  int out = 0;
  int in = 0;
  std::vector<int> first;
  std::vector<int> count;
  std::vector<double> weights;  // row f occupies [offset[f], offset[f] + count[f])
  std::vector<std::size_t> offset;
};

AxisOperator make_axis_operator(const FineGrid& grid, int axis, const std::function<double(double)>& g,
                                double radius) {
  const double h = grid.mask().spacing()[axis];
  AxisOperator op;
  op.in = grid.mask().dims()[axis];
  op.out = grid.lattice_dims()[axis];
  op.first.resize(op.out);
  op.count.resize(op.out);
  op.offset.resize(op.out);
  for (int f = 0; f < op.out; ++f) {
    const double s = grid.lattice_coordinate(axis, f);
    const int lo = std::max(0, static_cast<int>(std::ceil((s - radius) / h)));
    const int hi = std::min(op.in - 1, static_cast<int>(std::floor((s + radius) / h)));
    op.first[f] = lo;
    op.count[f] = std::max(0, hi - lo + 1);
    op.offset[f] = op.weights.size();
    for (int i = lo; i <= hi; ++i) op.weights.push_back(g(s - i * h));
  }
  return op;
}

// Applies `op` along `axis` of a row-major tensor with the given shape.
std::vector<double> apply_axis(const std::vector<double>& in, std::array<int, kMaxDim>& shape, int D, int axis,
                               const AxisOperator& op) {
  std::int64_t outer = 1, inner = 1;
  for (int b = 0; b < axis; ++b) outer *= shape[b];
  for (int b = axis + 1; b < D; ++b) inner *= shape[b];
  std::vector<double> out(static_cast<std::size_t>(outer * op.out * inner), 0.0);
  for (std::int64_t o = 0; o < outer; ++o) {
    const double* src = in.data() + o * op.in * inner;
    double* dst = out.data() + o * op.out * inner;
    for (int f = 0; f < op.out; ++f) {
      double* row = dst + f * inner;
      const double* w = op.weights.data() + op.offset[f];
      for (int c = 0; c < op.count[f]; ++c) {
        const double wc = w[c];
        if (wc == 0.0) continue;
        const double* s = src + static_cast<std::int64_t>(op.first[f] + c) * inner;
        for (std::int64_t j = 0; j < inner; ++j) row[j] += wc * s[j];
      }
    }
  }
  shape[axis] = op.out;
  return out;
}

void check_compatible(const Mask& data, const FineGrid& grid, const GaussianKernel& k) {
  const Mask& gm = grid.mask();
  if (data.dims() != gm.dims() || data.spacing() != gm.spacing()) {
    throw Error("grid mask and data mask must share a lattice");
  }
  if (k.dim() != data.dim()) throw Error("kernel and mask dimensions differ");
  for (int d = 0; d < data.dim(); ++d) {
    if (std::abs(k.spacing()[d] - data.spacing()[d]) > 1e-12 * data.spacing()[d]) {
      throw Error("kernel spacing differs from mask spacing");
    }
    if (0.5 * data.spacing()[d] > k.radius(d)) throw Error("unsupported point");
  }
  for (std::int64_t lin : gm.voxels()) {
    if (!data.inside_linear(lin)) throw Error("grid voxel without data");
  }
}

}  // namespace

struct SeparableGridOperator::Impl {
  const FineGrid* grid = nullptr;
  int D = 0;
  std::array<std::vector<AxisOperator>, kMaxDim> ops;
  std::vector<std::int64_t> gather;  // fine-lattice linear index of each grid point
};

SeparableGridOperator::SeparableGridOperator(const FineGrid& grid, const std::vector<AxisFactor>& factors,
                                             const std::vector<double>& radius)
{
  auto impl = std::make_shared<Impl>();
  const int D = grid.dim();
  if (static_cast<int>(radius.size()) != D) throw Error("one support radius per axis required");
  impl->grid = &grid;
  impl->D = D;
  for (int d = 0; d < D; ++d) {
    for (const auto& g : factors) {
      impl->ops[d].push_back(make_axis_operator(grid, d, [&](double x) { return g(d, x); }, radius[d]));
    }
  }
  std::array<std::int64_t, kMaxDim> stride{};
  std::int64_t total = 1;
  for (int d = D - 1; d >= 0; --d) {
    stride[d] = total;
    total *= grid.lattice_dims()[d];
  }
  impl->gather.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::int64_t lin = 0;
    for (int d = 0; d < D; ++d) lin += grid.fine_index(i)[d] * stride[d];
    impl->gather[i] = lin;
  }
  impl_ = std::move(impl);
}

std::vector<std::vector<double>> SeparableGridOperator::apply(const std::vector<double>& lattice,
                                                              const std::vector<Index>& codes) const {
  const Impl& im = *impl_;
  const int D = im.D;
  const Mask& mask = im.grid->mask();
  if (static_cast<std::int64_t>(lattice.size()) != mask.lattice_size()) throw Error("lattice size mismatch");
  struct Node {
    std::vector<int> prefix;
    std::vector<double> tensor;
    std::array<int, kMaxDim> shape;
  };
  std::array<int, kMaxDim> shape0{1, 1, 1};
  for (int d = 0; d < D; ++d) shape0[d] = mask.dims()[d];
  std::vector<Node> level{{{}, lattice, shape0}};
  for (int axis = 0; axis < D; ++axis) {
    std::vector<Node> next;
    for (const Index& c : codes) {
      std::vector<int> prefix(c.begin(), c.begin() + axis + 1);
      bool seen = false;
      for (const Node& n : next) seen = seen || n.prefix == prefix;
      if (seen) continue;
      const std::vector<int> parent(prefix.begin(), prefix.end() - 1);
      for (const Node& p : level) {
        if (p.prefix != parent) continue;
        if (c[axis] < 0 || c[axis] >= static_cast<int>(im.ops[axis].size())) throw Error("bad factor code");
        Node n{prefix, {}, p.shape};
        n.tensor = apply_axis(p.tensor, n.shape, D, axis, im.ops[axis][c[axis]]);
        next.push_back(std::move(n));
        break;
      }
    }
    level = std::move(next);
  }
  std::vector<std::vector<double>> out;
  for (const Index& c : codes) {
    const std::vector<int> prefix(c.begin(), c.begin() + D);
    for (const Node& n : level) {
      if (n.prefix != prefix) continue;
      std::vector<double> v(im.gather.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = n.tensor[im.gather[i]];
      out.push_back(std::move(v));
      break;
    }
  }
  return out;
}

FieldSet fields_on_grid(const LatticeSample& sample, const GaussianKernel& k, const GridPtr& grid, bool gaussianize,
                        bool gradients) {
  if (!grid) throw Error("null grid");
  check_compatible(sample.mask(), *grid, k);
  const LatticeSample* src = &sample;
  std::unique_ptr<LatticeSample> transformed;
  if (gaussianize) {
    transformed = std::make_unique<LatticeSample>(rft::gaussianize(sample));
    src = transformed.get();
  }
  const Mask& mask = src->mask();
  const int D = mask.dim();
  const int N = src->subjects();
  const std::size_t P = grid->size();

  FieldSet out;
  out.grid = grid;
  out.subjects = N;
  out.values.resize(N * P);
  if (gradients) out.gradients.resize(N * P * D);

  std::vector<double> radius(D);
  for (int d = 0; d < D; ++d) radius[d] = k.radius(d);
  const SeparableGridOperator op(
      *grid,
      {[&k](int a, double x) { return k.factor(a, x); }, [&k](int a, double x) { return k.factor_derivative(a, x); }},
      radius);
  std::vector<Index> codes{{0, 0, 0}};
  if (gradients) {
    for (int d = 0; d < D; ++d) {
      Index c{0, 0, 0};
      c[d] = 1;
      codes.push_back(c);
    }
  }
  std::vector<double> lattice(mask.lattice_size());
  for (int n = 0; n < N; ++n) {
    std::fill(lattice.begin(), lattice.end(), 0.0);
    const double* row = src->row(n);
    for (std::int64_t v = 0; v < mask.voxel_count(); ++v) lattice[mask.voxels()[v]] = row[v];
    const auto outputs = op.apply(lattice, codes);
    std::copy(outputs[0].begin(), outputs[0].end(), out.values.begin() + n * P);
    if (gradients) {
      double* g = out.gradients.data() + n * P * D;
      for (std::size_t i = 0; i < P; ++i) {
        for (int d = 0; d < D; ++d) g[i * D + d] = outputs[1 + d][i];
      }
    }
  }
  return out;
}

PointEvaluator::PointEvaluator(const LatticeSample& sample, const GaussianKernel& k)
    : PointEvaluator(sample.mask_ptr(), sample.subjects(), sample.data().data(), k) {}

PointEvaluator::PointEvaluator(MaskPtr mask, int subjects, const double* data, const GaussianKernel& k)
    : mask_(std::move(mask)), kernel_(k), subjects_(subjects), dim_(mask_->dim()) {
  if (k.dim() != dim_) throw Error("kernel and mask dimensions differ");
  if (subjects_ < 1) throw Error("no fields to evaluate");
  const Mask& m = *mask_;
  lattice_.assign(m.lattice_size() * subjects_, 0.0);
  for (int n = 0; n < subjects_; ++n) {
    const double* row = data + static_cast<std::int64_t>(n) * m.voxel_count();
    for (std::int64_t v = 0; v < m.voxel_count(); ++v) lattice_[m.voxels()[v] * subjects_ + n] = row[v];
  }
}

void PointEvaluator::eval(const Point& s, double* values, double* gradients) const {
  const Mask& m = *mask_;
  const int D = dim_;
  const int N = subjects_;
  const auto& h = m.spacing();
  std::array<int, kMaxDim> lo{0, 0, 0}, len{1, 1, 1};
  std::array<std::vector<double>, kMaxDim> w, dw;
  for (int d = 0; d < D; ++d) {
    const double R = kernel_.radius(d);
    lo[d] = std::max(0, static_cast<int>(std::ceil((s[d] - R) / h[d])));
    const int hi = std::min(m.dims()[d] - 1, static_cast<int>(std::floor((s[d] + R) / h[d])));
    len[d] = hi - lo[d] + 1;
    if (len[d] <= 0) throw Error("unsupported point");
    w[d].resize(len[d]);
    dw[d].resize(len[d]);
    for (int j = 0; j < len[d]; ++j) {
      const double x = s[d] - (lo[d] + j) * h[d];
      w[d][j] = kernel_.factor(d, x);
      dw[d][j] = kernel_.factor_derivative(d, x);
    }
  }
  for (int n = 0; n < N; ++n) values[n] = 0.0;
  if (gradients) {
    for (int n = 0; n < N * D; ++n) gradients[n] = 0.0;
  }
  std::array<std::int64_t, kMaxDim> stride{};
  {
    std::int64_t t = 1;
    for (int d = D - 1; d >= 0; --d) {
      stride[d] = t;
      t *= m.dims()[d];
    }
  }
  bool supported = false;
  Index j{0, 0, 0};
  for (;;) {
    std::int64_t lin = 0;
    double wv = 1.0;
    for (int d = 0; d < D; ++d) {
      lin += (lo[d] + j[d]) * stride[d];
      wv *= w[d][j[d]];
    }
    if (m.inside_linear(lin)) {
      double gw[kMaxDim] = {0.0, 0.0, 0.0};
      if (gradients) {
        for (int a = 0; a < D; ++a) {
          double p = dw[a][j[a]];
          for (int b = 0; b < D; ++b) {
            if (b != a) p *= w[b][j[b]];
          }
          gw[a] = p;
        }
      }
      if (wv != 0.0) supported = true;
      const double* x = lattice_.data() + lin * N;
      for (int n = 0; n < N; ++n) values[n] += wv * x[n];
      if (gradients) {
        for (int n = 0; n < N; ++n) {
          for (int a = 0; a < D; ++a) gradients[n * D + a] += gw[a] * x[n];
        }
      }
    }
    int d = D - 1;
    while (d >= 0 && ++j[d] >= len[d]) {
      j[d] = 0;
      --d;
    }
    if (d < 0) break;
  }
  if (!supported) throw Error("unsupported point");
}

std::vector<double> eval_convolution(const std::vector<double>& row, const Mask& mask, const GaussianKernel& k,
                                     const std::vector<Point>& points, std::vector<double>* gradients) {
  if (static_cast<std::int64_t>(row.size()) != mask.voxel_count()) throw Error("data row size does not match mask");
  PointEvaluator ev(std::make_shared<const Mask>(mask), 1, row.data(), k);
  const int D = mask.dim();
  std::vector<double> out(points.size());
  if (gradients) gradients->assign(points.size() * D, 0.0);
  double vals[1];
  double grads[kMaxDim];
  for (std::size_t i = 0; i < points.size(); ++i) {
    ev.eval(points[i], vals, gradients ? grads : nullptr);
    out[i] = vals[0];
    if (gradients) {
      for (int d = 0; d < D; ++d) (*gradients)[i * D + d] = grads[d];
    }
  }
  return out;
}

}  // namespace rft
