// Copyright 2026 The ChainCraft Authors
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

#include "chaincraft/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chaincraft/errors.hpp"

namespace chaincraft::nn {

const RealArray& Var::value() const {
  if (tape_ == nullptr) throw UsageError("Var: value of an empty handle");
  return tape_->value(*this);
}

void Tape::CheckOwned(Var v) const {
  if (v.tape() != this || v.id() >= nodes_.size()) {
    throw UsageError("Tape: variable does not belong to this tape");
  }
}

Var Tape::Constant(RealArray value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::Param(Parameter& param) {
  if (auto it = param_nodes_.find(&param); it != param_nodes_.end()) {
    return Var(this, it->second);
  }
  Node node;
  node.value = param.value;
  node.requires_grad = record_;
  node.param = &param;
  nodes_.push_back(std::move(node));
  param_nodes_.emplace(&param, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

const RealArray& Tape::value(Var v) const {
  CheckOwned(v);
  return nodes_[v.id()].value;
}

RealArray Tape::grad(Var v) const {
  CheckOwned(v);
  const Node& node = nodes_[v.id()];
  if (node.grad.shape() == node.value.shape()) return node.grad;
  return RealArray(node.value.shape());
}

RealArray& Tape::MutableGrad(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.shape() != node.value.shape()) {
    node.grad = RealArray(node.value.shape());
  }
  return node.grad;
}

Var Tape::Emit(RealArray value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return Emit(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
              std::move(fn));
}

Var Tape::Emit(RealArray value, std::span<const Var> inputs, BackwardFn fn) {
  bool requires_grad = false;
  for (Var v : inputs) {
    CheckOwned(v);
    requires_grad = requires_grad || nodes_[v.id()].requires_grad;
  }
  Node node;
  node.value = std::move(value);
  node.requires_grad = record_ && requires_grad;
  if (node.requires_grad) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::Backward(Var loss) {
  if (nodes_.empty()) throw UsageError("Tape::Backward: nothing was recorded");
  if (!record_) throw UsageError("Tape::Backward: tape does not record gradients");
  if (backward_done_) throw UsageError("Tape::Backward: called twice on one tape");
  CheckOwned(loss);
  if (nodes_[loss.id()].value.size() != 1) {
    throw UsageError("Tape::Backward: loss must be a scalar, got " +
                     ShapeString(nodes_[loss.id()].value.shape()));
  }
  backward_done_ = true;
  if (!nodes_[loss.id()].requires_grad) return;
  MutableGrad(loss.id()).Fill(1.0);
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.requires_grad || node.grad.shape() != node.value.shape()) continue;
    if (node.backward) {
      node.backward(*this, id);
    } else if (node.param != nullptr) {
      auto dst = node.param->grad.data();
      auto src = node.grad.data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
}

namespace {

Tape& SameTape(std::initializer_list<Var> vars) {
  Tape* tape = nullptr;
  for (Var v : vars) {
    if (!v.valid()) throw UsageError("operation on an empty Var");
    if (tape == nullptr) tape = v.tape();
    if (v.tape() != tape) throw UsageError("operation mixes variables of two tapes");
  }
  return *tape;
}

void RequireSameShape(const RealArray& a, const RealArray& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ConfigurationError(std::string(op) + ": shape mismatch " +
                             ShapeString(a.shape()) + " vs " + ShapeString(b.shape()));
  }
}

// Elementwise unary op; `derivative(x, y)` returns dy/dx.
template <typename Forward, typename Derivative>
Var Unary(Var x, Forward forward, Derivative derivative) {
  Tape& tape = SameTape({x});
  const RealArray& in = x.value();
  RealArray out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = forward(in[i]);
  const std::size_t xid = x.id();
  return tape.Emit(std::move(out), {x}, [xid, derivative](Tape& t, std::size_t self) {
    if (!t.RequiresGrad(xid)) return;
    const RealArray& xin = t.ValueAt(xid);
    const RealArray& y = t.ValueAt(self);
    const RealArray& dy = t.GradAt(self);
    RealArray& dx = t.MutableGrad(xid);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * derivative(xin[i], y[i]);
  });
}

double StableSigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Var Linear(Var x, Var w, Var b) {
  Tape& tape = SameTape({x, w, b});
  const RealArray& xv = x.value();
  const RealArray& wv = w.value();
  const RealArray& bv = b.value();
  if (wv.rank() != 2 || xv.cols() != wv.dim(0) || bv.size() != wv.dim(1)) {
    throw ConfigurationError("Linear: input " + ShapeString(xv.shape()) + ", weights " +
                             ShapeString(wv.shape()) + ", bias " +
                             ShapeString(bv.shape()));
  }
  const std::size_t n = xv.rows();
  const std::size_t in = wv.dim(0);
  const std::size_t out_dim = wv.dim(1);
  RealArray out({n, out_dim});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(bv.data().begin(), bv.data().end(), out.data().begin() + i * out_dim);
  }
  GemmAccumulate(xv.data(), wv.data(), out.data(), n, in, out_dim);
  const std::size_t xid = x.id(), wid = w.id(), bid = b.id();
  return tape.Emit(std::move(out), {x, w, b},
                   [xid, wid, bid, n, in, out_dim](Tape& t, std::size_t self) {
                     const RealArray& dy = t.GradAt(self);
                     if (t.RequiresGrad(xid)) {
                       GemmAccumulateTransB(dy.data(), t.ValueAt(wid).data(),
                                            t.MutableGrad(xid).data(), n, in, out_dim);
                     }
                     if (t.RequiresGrad(wid)) {
                       GemmAccumulateTransA(t.ValueAt(xid).data(), dy.data(),
                                            t.MutableGrad(wid).data(), n, in, out_dim);
                     }
                     if (t.RequiresGrad(bid)) {
                       RealArray& db = t.MutableGrad(bid);
                       for (std::size_t i = 0; i < n; ++i) {
                         for (std::size_t j = 0; j < out_dim; ++j) db[j] += dy[i * out_dim + j];
                       }
                     }
                   });
}

namespace {

struct ConvGeometry {
  std::size_t batch, channels, height, width, out_channels, kernel;
  std::size_t patch() const { return channels * kernel * kernel; }
  std::size_t pixels() const { return height * width; }
};

// cols[(c*K + ky)*K + kx][y*W + x] = input[c][y + ky - pad][x + kx - pad]
void Im2Col(const ConvGeometry& g, const double* image, std::vector<double>& cols) {
  const long pad = static_cast<long>(g.kernel / 2);
  cols.assign(g.patch() * g.pixels(), 0.0);
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        double* row = cols.data() + ((c * g.kernel + ky) * g.kernel + kx) * g.pixels();
        for (std::size_t y = 0; y < g.height; ++y) {
          const long sy = static_cast<long>(y + ky) - pad;
          if (sy < 0 || sy >= static_cast<long>(g.height)) continue;
          for (std::size_t x = 0; x < g.width; ++x) {
            const long sx = static_cast<long>(x + kx) - pad;
            if (sx < 0 || sx >= static_cast<long>(g.width)) continue;
            row[y * g.width + x] = image[(c * g.height + sy) * g.width + sx];
          }
        }
      }
    }
  }
}

void Col2ImAccumulate(const ConvGeometry& g, const std::vector<double>& cols,
                      double* image) {
  const long pad = static_cast<long>(g.kernel / 2);
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        const double* row =
            cols.data() + ((c * g.kernel + ky) * g.kernel + kx) * g.pixels();
        for (std::size_t y = 0; y < g.height; ++y) {
          const long sy = static_cast<long>(y + ky) - pad;
          if (sy < 0 || sy >= static_cast<long>(g.height)) continue;
          for (std::size_t x = 0; x < g.width; ++x) {
            const long sx = static_cast<long>(x + kx) - pad;
            if (sx < 0 || sx >= static_cast<long>(g.width)) continue;
            image[(c * g.height + sy) * g.width + sx] += row[y * g.width + x];
          }
        }
      }
    }
  }
}

}  // namespace

Var Conv2d(Var x, Var w, Var b) {
  Tape& tape = SameTape({x, w, b});
  const RealArray& xv = x.value();
  const RealArray& wv = w.value();
  const RealArray& bv = b.value();
  if (xv.rank() != 4 || wv.rank() != 4 || wv.dim(1) != xv.dim(1) ||
      wv.dim(2) != wv.dim(3) || wv.dim(2) % 2 == 0 || bv.size() != wv.dim(0)) {
    throw ConfigurationError("Conv2d: input " + ShapeString(xv.shape()) + ", weights " +
                             ShapeString(wv.shape()) + ", bias " +
                             ShapeString(bv.shape()));
  }
  const ConvGeometry g{xv.dim(0), xv.dim(1), xv.dim(2), xv.dim(3), wv.dim(0), wv.dim(2)};
  RealArray out({g.batch, g.out_channels, g.height, g.width});
  std::vector<double> cols;
  const std::size_t in_stride = g.channels * g.pixels();
  const std::size_t out_stride = g.out_channels * g.pixels();
  for (std::size_t n = 0; n < g.batch; ++n) {
    double* out_n = out.data().data() + n * out_stride;
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      std::fill(out_n + o * g.pixels(), out_n + (o + 1) * g.pixels(), bv[o]);
    }
    Im2Col(g, xv.data().data() + n * in_stride, cols);
    GemmAccumulate(wv.data(), cols, std::span<double>(out_n, out_stride),
                   g.out_channels, g.patch(), g.pixels());
  }
  const std::size_t xid = x.id(), wid = w.id(), bid = b.id();
  return tape.Emit(std::move(out), {x, w, b}, [xid, wid, bid, g, in_stride,
                                              out_stride](Tape& t, std::size_t self) {
    const RealArray& dy = t.GradAt(self);
    const RealArray& xin = t.ValueAt(xid);
    const RealArray& wv = t.ValueAt(wid);
    std::vector<double> cols;
    std::vector<double> dcols;
    for (std::size_t n = 0; n < g.batch; ++n) {
      std::span<const double> dy_n(dy.data().data() + n * out_stride, out_stride);
      if (t.RequiresGrad(bid)) {
        RealArray& db = t.MutableGrad(bid);
        for (std::size_t o = 0; o < g.out_channels; ++o) {
          for (std::size_t p = 0; p < g.pixels(); ++p) db[o] += dy_n[o * g.pixels() + p];
        }
      }
      if (t.RequiresGrad(wid)) {
        Im2Col(g, xin.data().data() + n * in_stride, cols);
        GemmAccumulateTransB(dy_n, cols, t.MutableGrad(wid).data(), g.out_channels,
                             g.patch(), g.pixels());
      }
      if (t.RequiresGrad(xid)) {
        dcols.assign(g.patch() * g.pixels(), 0.0);
        GemmAccumulateTransA(wv.data(), dy_n, dcols, g.out_channels, g.patch(),
                             g.pixels());
        Col2ImAccumulate(g, dcols, t.MutableGrad(xid).data().data() + n * in_stride);
      }
    }
  });
}

Var Relu(Var x) {
  return Unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var Tanh(Var x) {
  return Unary(
      x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Var Sigmoid(Var x) {
  return Unary(x, StableSigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var Exp(Var x) {
  return Unary(
      x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Var Square(Var x) {
  return Unary(
      x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Var Scale(Var x, double factor) {
  return Unary(
      x, [factor](double v) { return factor * v; },
      [factor](double, double) { return factor; });
}

Var AddConstant(Var x, double constant) {
  return Unary(
      x, [constant](double v) { return v + constant; },
      [](double, double) { return 1.0; });
}

namespace {

template <typename Forward>
Var Binary(Var a, Var b, const char* name, Forward forward, double sign_b, bool product) {
  Tape& tape = SameTape({a, b});
  const RealArray& av = a.value();
  const RealArray& bv = b.value();
  RequireSameShape(av, bv, name);
  RealArray out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = forward(av[i], bv[i]);
  const std::size_t aid = a.id(), bid = b.id();
  return tape.Emit(std::move(out), {a, b},
                   [aid, bid, sign_b, product](Tape& t, std::size_t self) {
                     const RealArray& dy = t.GradAt(self);
                     if (t.RequiresGrad(aid)) {
                       RealArray& da = t.MutableGrad(aid);
                       const RealArray& bv = t.ValueAt(bid);
                       for (std::size_t i = 0; i < da.size(); ++i) {
                         da[i] += product ? dy[i] * bv[i] : dy[i];
                       }
                     }
                     if (t.RequiresGrad(bid)) {
                       RealArray& db = t.MutableGrad(bid);
                       const RealArray& av = t.ValueAt(aid);
                       for (std::size_t i = 0; i < db.size(); ++i) {
                         db[i] += product ? dy[i] * av[i] : sign_b * dy[i];
                       }
                     }
                   });
}

}  // namespace

Var Add(Var a, Var b) {
  return Binary(a, b, "Add", [](double x, double y) { return x + y; }, 1.0, false);
}

Var Sub(Var a, Var b) {
  return Binary(a, b, "Sub", [](double x, double y) { return x - y; }, -1.0, false);
}

Var Mul(Var a, Var b) {
  return Binary(a, b, "Mul", [](double x, double y) { return x * y; }, 1.0, true);
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw UsageError("ConcatCols: no inputs");
  Tape& tape = *parts[0].tape();
  const std::size_t rows = parts[0].value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (Var p : parts) {
    if (p.tape() != &tape) throw UsageError("ConcatCols: variables of two tapes");
    if (p.value().rows() != rows) {
      throw ConfigurationError("ConcatCols: row count mismatch " +
                               ShapeString(p.value().shape()));
    }
    widths.push_back(p.value().cols());
    total += widths.back();
  }
  RealArray out({rows, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const RealArray& v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.data().begin() + r * widths[k], widths[k],
                  out.data().begin() + r * total + offset);
    }
    offset += widths[k];
  }
  std::vector<std::size_t> ids;
  for (Var p : parts) ids.push_back(p.id());
  return tape.Emit(std::move(out), parts,
                   [ids, widths, rows, total](Tape& t, std::size_t self) {
                     const RealArray& dy = t.GradAt(self);
                     std::size_t offset = 0;
                     for (std::size_t k = 0; k < ids.size(); ++k) {
                       if (t.RequiresGrad(ids[k])) {
                         RealArray& dx = t.MutableGrad(ids[k]);
                         for (std::size_t r = 0; r < rows; ++r) {
                           for (std::size_t c = 0; c < widths[k]; ++c) {
                             dx[r * widths[k] + c] += dy[r * total + offset + c];
                           }
                         }
                       }
                       offset += widths[k];
                     }
                   });
}

Var SliceCols(Var x, std::size_t begin, std::size_t count) {
  Tape& tape = SameTape({x});
  const RealArray& xv = x.value();
  const std::size_t rows = xv.rows();
  const std::size_t width = xv.cols();
  if (begin + count > width) {
    throw ConfigurationError("SliceCols: [" + std::to_string(begin) + ", " +
                             std::to_string(begin + count) + ") out of " +
                             std::to_string(width));
  }
  RealArray out({rows, count});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(xv.data().begin() + r * width + begin, count,
                out.data().begin() + r * count);
  }
  const std::size_t xid = x.id();
  return tape.Emit(std::move(out), {x},
                   [xid, rows, width, begin, count](Tape& t, std::size_t self) {
                     if (!t.RequiresGrad(xid)) return;
                     const RealArray& dy = t.GradAt(self);
                     RealArray& dx = t.MutableGrad(xid);
                     for (std::size_t r = 0; r < rows; ++r) {
                       for (std::size_t c = 0; c < count; ++c) {
                         dx[r * width + begin + c] += dy[r * count + c];
                       }
                     }
                   });
}

Var ConcatRows(std::span<const Var> parts) {
  if (parts.empty()) throw UsageError("ConcatRows: no inputs");
  Tape& tape = *parts[0].tape();
  const std::size_t width = parts[0].value().cols();
  std::size_t rows = 0;
  std::vector<std::size_t> sizes;
  for (Var p : parts) {
    if (p.tape() != &tape) throw UsageError("ConcatRows: variables of two tapes");
    if (p.value().cols() != width) {
      throw ConfigurationError("ConcatRows: column mismatch " +
                               ShapeString(p.value().shape()));
    }
    rows += p.value().rows();
    sizes.push_back(p.value().size());
  }
  RealArray out({rows, width});
  std::size_t offset = 0;
  for (Var p : parts) {
    std::copy(p.value().data().begin(), p.value().data().end(),
              out.data().begin() + offset);
    offset += p.value().size();
  }
  std::vector<std::size_t> ids;
  for (Var p : parts) ids.push_back(p.id());
  return tape.Emit(std::move(out), parts, [ids, sizes](Tape& t, std::size_t self) {
    const RealArray& dy = t.GradAt(self);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.RequiresGrad(ids[k])) {
        RealArray& dx = t.MutableGrad(ids[k]);
        for (std::size_t i = 0; i < sizes[k]; ++i) dx[i] += dy[offset + i];
      }
      offset += sizes[k];
    }
  });
}

Var SliceRows(Var x, std::size_t begin, std::size_t count) {
  Tape& tape = SameTape({x});
  const RealArray& xv = x.value();
  const std::size_t width = xv.cols();
  if (begin + count > xv.rows()) {
    throw ConfigurationError("SliceRows: range out of " + ShapeString(xv.shape()));
  }
  RealArray out({count, width});
  std::copy_n(xv.data().begin() + begin * width, count * width, out.data().begin());
  const std::size_t xid = x.id();
  return tape.Emit(std::move(out), {x}, [xid, begin, width](Tape& t, std::size_t self) {
    if (!t.RequiresGrad(xid)) return;
    const RealArray& dy = t.GradAt(self);
    RealArray& dx = t.MutableGrad(xid);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[begin * width + i] += dy[i];
  });
}

Var GatherRows(Var x, std::span<const std::size_t> rows) {
  Tape& tape = SameTape({x});
  const RealArray& xv = x.value();
  const std::size_t width = xv.cols();
  RealArray out({rows.size(), width});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= xv.rows()) throw UsageError("GatherRows: row index out of range");
    std::copy_n(xv.data().begin() + rows[i] * width, width,
                out.data().begin() + i * width);
  }
  const std::size_t xid = x.id();
  std::vector<std::size_t> index(rows.begin(), rows.end());
  return tape.Emit(std::move(out), {x}, [xid, index, width](Tape& t, std::size_t self) {
    if (!t.RequiresGrad(xid)) return;
    const RealArray& dy = t.GradAt(self);
    RealArray& dx = t.MutableGrad(xid);
    for (std::size_t i = 0; i < index.size(); ++i) {
      for (std::size_t c = 0; c < width; ++c) dx[index[i] * width + c] += dy[i * width + c];
    }
  });
}

Var Reshape(Var x, Shape shape) {
  Tape& tape = SameTape({x});
  RealArray out = x.value();
  out.Reshape(std::move(shape));
  const std::size_t xid = x.id();
  return tape.Emit(std::move(out), {x}, [xid](Tape& t, std::size_t self) {
    if (!t.RequiresGrad(xid)) return;
    const RealArray& dy = t.GradAt(self);
    RealArray& dx = t.MutableGrad(xid);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
  });
}

Var LogSoftmax(Var x) {
  Tape& tape = SameTape({x});
  const RealArray& xv = x.value();
  const std::size_t rows = xv.rows();
  const std::size_t k = xv.cols();
  RealArray out({rows, k});
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data().data() + r * k;
    double* o = out.data().data() + r * k;
    const double max = *std::max_element(in, in + k);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(in[c] - max);
    const double log_norm = max + std::log(sum);
    for (std::size_t c = 0; c < k; ++c) o[c] = in[c] - log_norm;
  }
  const std::size_t xid = x.id();
  return tape.Emit(std::move(out), {x}, [xid, rows, k](Tape& t, std::size_t self) {
    if (!t.RequiresGrad(xid)) return;
    const RealArray& y = t.ValueAt(self);
    const RealArray& dy = t.GradAt(self);
    RealArray& dx = t.MutableGrad(xid);
    for (std::size_t r = 0; r < rows; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < k; ++c) total += dy[r * k + c];
      if (total == 0.0) {
        bool all_zero = true;
        for (std::size_t c = 0; c < k; ++c) all_zero = all_zero && dy[r * k + c] == 0.0;
        if (all_zero) continue;
      }
      for (std::size_t c = 0; c < k; ++c) {
        dx[r * k + c] += dy[r * k + c] - std::exp(y[r * k + c]) * total;
      }
    }
  });
}

Var GatherCols(Var x, std::span<const int> index) {
  Tape& tape = SameTape({x});
  const RealArray& xv = x.value();
  const std::size_t rows = xv.rows();
  const std::size_t k = xv.cols();
  if (index.size() != rows) {
    throw ConfigurationError("GatherCols: " + std::to_string(index.size()) +
                             " indices for " + std::to_string(rows) + " rows");
  }
  RealArray out({rows, 1});
  for (std::size_t r = 0; r < rows; ++r) {
    if (index[r] < 0 || static_cast<std::size_t>(index[r]) >= k) {
      throw UsageError("GatherCols: index " + std::to_string(index[r]) +
                       " out of range for " + std::to_string(k) + " classes");
    }
    out[r] = xv[r * k + static_cast<std::size_t>(index[r])];
  }
  const std::size_t xid = x.id();
  std::vector<int> idx(index.begin(), index.end());
  return tape.Emit(std::move(out), {x}, [xid, idx, k](Tape& t, std::size_t self) {
    if (!t.RequiresGrad(xid)) return;
    const RealArray& dy = t.GradAt(self);
    RealArray& dx = t.MutableGrad(xid);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      dx[r * k + static_cast<std::size_t>(idx[r])] += dy[r];
    }
  });
}

Var Dot(Var x, const RealArray& weights) {
  Tape& tape = SameTape({x});
  const RealArray& xv = x.value();
  if (weights.size() != xv.size()) {
    throw ConfigurationError("Dot: weights " + ShapeString(weights.shape()) +
                             " vs input " + ShapeString(xv.shape()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    if (weights[i] != 0.0) sum += weights[i] * xv[i];
  }
  const std::size_t xid = x.id();
  return tape.Emit(RealArray::Scalar(sum), {x}, [xid, weights](Tape& t, std::size_t self) {
    if (!t.RequiresGrad(xid)) return;
    const double g = t.GradAt(self)[0];
    RealArray& dx = t.MutableGrad(xid);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g * weights[i];
  });
}

Var Sum(Var x) {
  Tape& tape = SameTape({x});
  double sum = 0.0;
  for (double v : x.value().data()) sum += v;
  const std::size_t xid = x.id();
  return tape.Emit(RealArray::Scalar(sum), {x}, [xid](Tape& t, std::size_t self) {
    if (!t.RequiresGrad(xid)) return;
    const double g = t.GradAt(self)[0];
    RealArray& dx = t.MutableGrad(xid);
    for (double& v : dx.data()) v += g;
  });
}

}  // namespace chaincraft::nn
