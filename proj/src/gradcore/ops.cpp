// Copyright 2026 The spseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spseg/gradcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "spseg/common/error.hpp"
#include "spseg/gradcore/lu.hpp"
#include "spseg/simd/kernels.hpp"

namespace spseg::ops {
namespace {

void require_same_tape(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
    throw ContractError(std::string(op) + ": operands live on different tapes");
  }
}

bool is_scalar(const Matrix& m) { return m.rows() == 1 && m.cols() == 1; }

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  Matrix out = spseg::matmul(a.value(), b.value());
  return a.tape().record(std::move(out), {a, b}, [](const BackwardContext& ctx) {
    const Matrix& av = *ctx.inputs[0];
    const Matrix& bv = *ctx.inputs[1];
    const Matrix& g = ctx.output_grad;
    const auto& k = simd::active();
    if (Matrix* da = ctx.input_grads[0]) {
      const Matrix bt = bv.transposed();
      k.gemm(g.rows(), bt.cols(), g.cols(), g.data(), bt.data(), da->data(), true);
    }
    if (Matrix* db = ctx.input_grads[1]) {
      const Matrix at = av.transposed();
      k.gemm(at.rows(), g.cols(), at.cols(), at.data(), g.data(), db->data(), true);
    }
  });
}

Var linear(Var x, Var w, Var b) {
  require_same_tape(x, w, "linear");
  require_same_tape(x, b, "linear");
  const Matrix& wv = w.value();
  const Matrix& bv = b.value();
  if (bv.rows() != 1 || bv.cols() != wv.cols()) {
    throw DimensionError("linear bias " + bv.shape_string() + " for weight " + wv.shape_string());
  }
  Matrix out = spseg::matmul(x.value(), wv);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    simd::active().axpy(1.0, bv.data(), out.row_span(r).data(), out.cols());
  }
  return x.tape().record(std::move(out), {x, w, b}, [](const BackwardContext& ctx) {
    const Matrix& xv = *ctx.inputs[0];
    const Matrix& wv = *ctx.inputs[1];
    const Matrix& g = ctx.output_grad;
    const auto& k = simd::active();
    if (Matrix* dx = ctx.input_grads[0]) {
      const Matrix wt = wv.transposed();
      k.gemm(g.rows(), wt.cols(), g.cols(), g.data(), wt.data(), dx->data(), true);
    }
    if (Matrix* dw = ctx.input_grads[1]) {
      const Matrix xt = xv.transposed();
      k.gemm(xt.rows(), g.cols(), xt.cols(), xt.data(), g.data(), dw->data(), true);
    }
    if (Matrix* db = ctx.input_grads[2]) {
      for (std::size_t r = 0; r < g.rows(); ++r) k.axpy(1.0, g.row_span(r).data(), db->data(), g.cols());
    }
  });
}

Var elementwise(Unary op, Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    double r = 0.0;
    switch (op) {
      case Unary::relu:
      case Unary::hinge: r = v > 0.0 ? v : 0.0; break;
      case Unary::exp: r = std::exp(v); break;
      case Unary::log:
        if (!(v > 0.0)) throw DomainError("log of non-positive value " + std::to_string(v));
        r = std::log(v);
        break;
      case Unary::square: r = v * v; break;
      case Unary::sqrt:
        if (v < 0.0) throw DomainError("sqrt of negative value " + std::to_string(v));
        r = std::sqrt(v);
        break;
      case Unary::rsqrt:
        if (!(v > 0.0)) throw DomainError("rsqrt of non-positive value " + std::to_string(v));
        r = 1.0 / std::sqrt(v);
        break;
      case Unary::negate: r = -v; break;
    }
    out[i] = r;
  }
  return a.tape().record(std::move(out), {a}, [op](const BackwardContext& ctx) {
    Matrix* dx = ctx.input_grads[0];
    if (dx == nullptr) return;
    const Matrix& x = *ctx.inputs[0];
    const Matrix& y = ctx.output;
    const Matrix& g = ctx.output_grad;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = 0.0;
      switch (op) {
        case Unary::relu:
        case Unary::hinge: d = x[i] > 0.0 ? g[i] : 0.0; break;
        case Unary::exp: d = g[i] * y[i]; break;
        case Unary::log: d = g[i] / x[i]; break;
        case Unary::square: d = 2.0 * x[i] * g[i]; break;
        case Unary::sqrt: d = y[i] > 0.0 ? 0.5 * g[i] / y[i] : 0.0; break;
        case Unary::rsqrt: d = -0.5 * g[i] * y[i] / x[i]; break;
        case Unary::negate: d = -g[i]; break;
      }
      (*dx)[i] += d;
    }
  });
}

Var elementwise(Binary op, Var a, Var b) {
  require_same_tape(a, b, "elementwise");
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  const bool same = x.same_shape(y);
  if (!same && !is_scalar(x) && !is_scalar(y)) {
    throw DimensionError("elementwise " + x.shape_string() + " vs " + y.shape_string());
  }
  const bool bcast_a = !same && is_scalar(x);
  const bool bcast_b = !same && is_scalar(y);
  const Matrix& shape = bcast_a ? y : x;
  Matrix out(shape.rows(), shape.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double u = bcast_a ? x[0] : x[i];
    const double v = bcast_b ? y[0] : y[i];
    switch (op) {
      case Binary::add: out[i] = u + v; break;
      case Binary::subtract: out[i] = u - v; break;
      case Binary::multiply: out[i] = u * v; break;
    }
  }
  return a.tape().record(
      std::move(out), {a, b}, [op, bcast_a, bcast_b](const BackwardContext& ctx) {
        const Matrix& x = *ctx.inputs[0];
        const Matrix& y = *ctx.inputs[1];
        const Matrix& g = ctx.output_grad;
        Matrix* dx = ctx.input_grads[0];
        Matrix* dy = ctx.input_grads[1];
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double u = bcast_a ? x[0] : x[i];
          const double v = bcast_b ? y[0] : y[i];
          double gu = 0.0;
          double gv = 0.0;
          switch (op) {
            case Binary::add: gu = g[i]; gv = g[i]; break;
            case Binary::subtract: gu = g[i]; gv = -g[i]; break;
            case Binary::multiply: gu = g[i] * v; gv = g[i] * u; break;
          }
          if (dx != nullptr) (*dx)[bcast_a ? 0 : i] += gu;
          if (dy != nullptr) (*dy)[bcast_b ? 0 : i] += gv;
        }
      });
}

Var scale(Var a, double factor) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = factor * x[i];
  return a.tape().record(std::move(out), {a}, [factor](const BackwardContext& ctx) {
    if (Matrix* dx = ctx.input_grads[0]) {
      simd::active().axpy(factor, ctx.output_grad.data(), dx->data(), dx->size());
    }
  });
}

Var add_scalar(Var a, double offset) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + offset;
  return a.tape().record(std::move(out), {a}, [](const BackwardContext& ctx) {
    if (Matrix* dx = ctx.input_grads[0]) {
      simd::active().axpy(1.0, ctx.output_grad.data(), dx->data(), dx->size());
    }
  });
}

Var reduce(Reduce op, Var a, Axis axis) {
  const Matrix& x = a.value();
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  const std::size_t out_rows = axis == Axis::cols ? rows : 1;
  const std::size_t out_cols = axis == Axis::rows ? cols : 1;
  const std::size_t extent = axis == Axis::rows ? rows : axis == Axis::cols ? cols : rows * cols;
  if (extent == 0) throw DomainError("reduction over an empty axis of " + x.shape_string());

  // Maps an input element to its output slot.
  auto slot = [axis](std::size_t r, std::size_t c) -> std::size_t {
    switch (axis) {
      case Axis::rows: return c;
      case Axis::cols: return r;
      case Axis::all: return 0;
    }
    return 0;
  };

  Matrix out(out_rows, out_cols, op == Reduce::max ? -INFINITY : 0.0);
  std::vector<std::size_t> argmax;
  if (op == Reduce::max) argmax.assign(out.size(), 0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t s = slot(r, c);
      const double v = x(r, c);
      if (op == Reduce::max) {
        if (v > out[s]) {
          out[s] = v;
          argmax[s] = r * cols + c;
        }
      } else {
        out[s] += v;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(extent);
  if (op == Reduce::mean) {
    for (double& v : out.values()) v *= inv;
  }

  return a.tape().record(
      std::move(out), {a},
      [op, slot, inv, argmax = std::move(argmax)](const BackwardContext& ctx) {
        Matrix* dx = ctx.input_grads[0];
        if (dx == nullptr) return;
        const Matrix& g = ctx.output_grad;
        if (op == Reduce::max) {
          for (std::size_t s = 0; s < g.size(); ++s) (*dx)[argmax[s]] += g[s];
          return;
        }
        const double w = op == Reduce::mean ? inv : 1.0;
        for (std::size_t r = 0; r < dx->rows(); ++r) {
          for (std::size_t c = 0; c < dx->cols(); ++c) (*dx)(r, c) += w * g[slot(r, c)];
        }
      });
}

Var concat_cols(Var a, Var b) {
  require_same_tape(a, b, "concat_cols");
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  if (x.rows() != y.rows()) {
    throw DimensionError("concat_cols " + x.shape_string() + " with " + y.shape_string());
  }
  const std::size_t ca = x.cols();
  const std::size_t cb = y.cols();
  Matrix out(x.rows(), ca + cb);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto dst = out.row_span(r);
    std::copy_n(x.row_span(r).begin(), ca, dst.begin());
    std::copy_n(y.row_span(r).begin(), cb, dst.begin() + static_cast<std::ptrdiff_t>(ca));
  }
  return a.tape().record(std::move(out), {a, b}, [ca, cb](const BackwardContext& ctx) {
    const Matrix& g = ctx.output_grad;
    for (std::size_t r = 0; r < g.rows(); ++r) {
      auto grow = g.row_span(r);
      if (Matrix* da = ctx.input_grads[0]) {
        auto d = da->row_span(r);
        for (std::size_t c = 0; c < ca; ++c) d[c] += grow[c];
      }
      if (Matrix* db = ctx.input_grads[1]) {
        auto d = db->row_span(r);
        for (std::size_t c = 0; c < cb; ++c) d[c] += grow[ca + c];
      }
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  const Matrix& x = a.value();
  if (begin > end || end > x.cols()) {
    throw DimensionError("slice_cols [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") of " + x.shape_string());
  }
  const std::size_t w = end - begin;
  Matrix out(x.rows(), w);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::copy_n(x.row_span(r).begin() + static_cast<std::ptrdiff_t>(begin), w,
                out.row_span(r).begin());
  }
  return a.tape().record(std::move(out), {a}, [begin, w](const BackwardContext& ctx) {
    Matrix* dx = ctx.input_grads[0];
    if (dx == nullptr) return;
    const Matrix& g = ctx.output_grad;
    for (std::size_t r = 0; r < g.rows(); ++r) {
      auto d = dx->row_span(r);
      auto grow = g.row_span(r);
      for (std::size_t c = 0; c < w; ++c) d[begin + c] += grow[c];
    }
  });
}

Var gather_rows(Var a, std::span<const std::size_t> indices) {
  const Matrix& x = a.value();
  Matrix out(indices.size(), x.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= x.rows()) {
      throw DimensionError("gather_rows index " + std::to_string(indices[i]) + " out of " +
                           x.shape_string());
    }
    auto src = x.row_span(indices[i]);
    std::copy(src.begin(), src.end(), out.row_span(i).begin());
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return a.tape().record(std::move(out), {a}, [idx = std::move(idx)](const BackwardContext& ctx) {
    Matrix* dx = ctx.input_grads[0];
    if (dx == nullptr) return;
    const Matrix& g = ctx.output_grad;
    const auto& k = simd::active();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      k.axpy(1.0, g.row_span(i).data(), dx->row_span(idx[i]).data(), g.cols());
    }
  });
}

Var linear_solve(Var a, Var b) {
  require_same_tape(a, b, "linear_solve");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != av.cols()) {
    throw DimensionError("linear_solve needs a square matrix, got " + av.shape_string());
  }
  if (bv.rows() != av.rows()) {
    throw DimensionError("linear_solve " + av.shape_string() + " with rhs " + bv.shape_string());
  }
  auto lu = std::make_shared<const LuFactorization>(av, kPivotTolerance);
  Matrix x = lu->solve(bv);
  return a.tape().record(std::move(x), {a, b}, [lu](const BackwardContext& ctx) {
    Matrix db = lu->solve_transposed(ctx.output_grad);
    if (Matrix* da = ctx.input_grads[0]) {
      // dA -= dB X^T
      const Matrix xt = ctx.output.transposed();
      Matrix prod(db.rows(), xt.cols());
      simd::active().gemm(db.rows(), xt.cols(), db.cols(), db.data(), xt.data(), prod.data(),
                          false);
      simd::active().axpy(-1.0, prod.data(), da->data(), da->size());
    }
    if (Matrix* dbp = ctx.input_grads[1]) {
      simd::active().axpy(1.0, db.data(), dbp->data(), dbp->size());
    }
  });
}

Var row_softmax(Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row_span(r);
    auto o = out.row_span(r);
    if (in.empty()) continue;
    const double m = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      o[c] = std::exp(in[c] - m);
      total += o[c];
    }
    for (double& v : o) v /= total;
  }
  return a.tape().record(std::move(out), {a}, [](const BackwardContext& ctx) {
    Matrix* dx = ctx.input_grads[0];
    if (dx == nullptr) return;
    const Matrix& p = ctx.output;
    const Matrix& g = ctx.output_grad;
    for (std::size_t r = 0; r < p.rows(); ++r) {
      auto pr = p.row_span(r);
      auto gr = g.row_span(r);
      double inner = 0.0;
      for (std::size_t c = 0; c < pr.size(); ++c) inner += gr[c] * pr[c];
      auto d = dx->row_span(r);
      for (std::size_t c = 0; c < pr.size(); ++c) d[c] += pr[c] * (gr[c] - inner);
    }
  });
}

Var row_log_softmax(Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row_span(r);
    auto o = out.row_span(r);
    if (in.empty()) continue;
    const double m = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (double v : in) total += std::exp(v - m);
    const double lse = m + std::log(total);
    for (std::size_t c = 0; c < in.size(); ++c) o[c] = in[c] - lse;
  }
  return a.tape().record(std::move(out), {a}, [](const BackwardContext& ctx) {
    Matrix* dx = ctx.input_grads[0];
    if (dx == nullptr) return;
    const Matrix& y = ctx.output;
    const Matrix& g = ctx.output_grad;
    for (std::size_t r = 0; r < y.rows(); ++r) {
      auto yr = y.row_span(r);
      auto gr = g.row_span(r);
      double gsum = 0.0;
      for (double v : gr) gsum += v;
      auto d = dx->row_span(r);
      for (std::size_t c = 0; c < yr.size(); ++c) d[c] += gr[c] - std::exp(yr[c]) * gsum;
    }
  });
}

Var pairwise_sq_dist(Var x) {
  const Matrix& xv = x.value();
  const std::size_t n = xv.rows();
  const std::size_t d = xv.cols();
  Matrix out(n, n);
  const auto& k = simd::active();
  for (std::size_t i = 0; i < n; ++i) {
    k.sq_dist_rows(xv.row_span(i).data(), xv.data(), n, d, out.row_span(i).data());
    out(i, i) = 0.0;
  }
  return x.tape().record(std::move(out), {x}, [](const BackwardContext& ctx) {
    Matrix* dx = ctx.input_grads[0];
    if (dx == nullptr) return;
    const Matrix& xv = *ctx.inputs[0];
    const Matrix& g = ctx.output_grad;
    const std::size_t n = xv.rows();
    // S = G + G^T; dX = 2 (diag(rowsum S) X - S X)
    Matrix s(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) s(i, j) = g(i, j) + g(j, i);
    }
    Matrix sx(n, xv.cols());
    const auto& k = simd::active();
    k.gemm(n, xv.cols(), n, s.data(), xv.data(), sx.data(), false);
    for (std::size_t i = 0; i < n; ++i) {
      double rs = 0.0;
      for (std::size_t j = 0; j < n; ++j) rs += s(i, j);
      auto xr = xv.row_span(i);
      auto sxr = sx.row_span(i);
      auto d = dx->row_span(i);
      for (std::size_t c = 0; c < xr.size(); ++c) d[c] += 2.0 * (rs * xr[c] - sxr[c]);
    }
  });
}

Var diag_scale(Var w, Var v) {
  require_same_tape(w, v, "diag_scale");
  const Matrix& wv = w.value();
  const Matrix& vv = v.value();
  if (wv.rows() != wv.cols() || vv.rows() != wv.rows() || vv.cols() != 1) {
    throw DimensionError("diag_scale " + wv.shape_string() + " with " + vv.shape_string());
  }
  const std::size_t n = wv.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = vv[i] * wv(i, j) * vv[j];
  }
  return w.tape().record(std::move(out), {w, v}, [](const BackwardContext& ctx) {
    const Matrix& wv = *ctx.inputs[0];
    const Matrix& vv = *ctx.inputs[1];
    const Matrix& g = ctx.output_grad;
    const std::size_t n = wv.rows();
    if (Matrix* dw = ctx.input_grads[0]) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*dw)(i, j) += g(i, j) * vv[i] * vv[j];
      }
    }
    if (Matrix* dv = ctx.input_grads[1]) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          acc += g(i, j) * wv(i, j) * vv[j] + g(j, i) * wv(j, i) * vv[j];
        }
        (*dv)[i] += acc;
      }
    }
  });
}

}  // namespace spseg::ops
