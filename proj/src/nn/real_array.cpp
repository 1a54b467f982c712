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

#include "chaincraft/nn/real_array.hpp"

#include <algorithm>
#include <vector>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "chaincraft/errors.hpp"

namespace chaincraft::nn {

std::size_t ShapeSize(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string ShapeString(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

RealArray::RealArray(Shape shape, double fill)
    : shape_(std::move(shape)), data_(ShapeSize(shape_), fill) {}

RealArray::RealArray(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (ShapeSize(shape_) != data_.size()) {
    throw ConfigurationError("RealArray: shape " + ShapeString(shape_) +
                             " does not match " + std::to_string(data_.size()) +
                             " values");
  }
}

RealArray RealArray::Scalar(double value) { return RealArray({1}, {value}); }

RealArray RealArray::Matrix(std::size_t rows, std::size_t cols,
                            std::initializer_list<double> values) {
  return RealArray({rows, cols}, std::vector<double>(values));
}

std::size_t RealArray::rows() const { return shape_.empty() ? 1 : shape_[0]; }

std::size_t RealArray::cols() const {
  if (shape_.empty()) return 1;
  return shape_[0] == 0 ? 0 : data_.size() / shape_[0];
}

void RealArray::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void RealArray::Reshape(Shape shape) {
  if (ShapeSize(shape) != data_.size()) {
    throw ConfigurationError("RealArray::Reshape: " + ShapeString(shape_) +
                             " -> " + ShapeString(shape));
  }
  shape_ = std::move(shape);
}

bool RealArray::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void RequireFinite(const RealArray& array, const char* where) {
  if (!array.AllFinite()) {
    throw NumericError(std::string("non-finite value at ") + where);
  }
}

// Rows are processed in blocks that share each streamed row of the right-hand
// matrix. Every output element still sees the same sequence of operations as
// in a row-at-a-time loop, so a row's result does not depend on the batch.
namespace {

constexpr std::size_t kRowBlock = 4;

inline void Axpy(double* __restrict out, const double* __restrict x, double scale,
                 std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) out[j] += scale * x[j];
}

}  // namespace

void GemmAccumulate(std::span<const double> a, std::span<const double> b,
                    std::span<double> out, std::size_t rows, std::size_t inner,
                    std::size_t cols_out) {
  for (std::size_t i0 = 0; i0 < rows; i0 += kRowBlock) {
    const std::size_t i1 = std::min(rows, i0 + kRowBlock);
    for (std::size_t k = 0; k < inner; ++k) {
      const double* b_row = b.data() + k * cols_out;
      for (std::size_t i = i0; i < i1; ++i) {
        const double scale = a[i * inner + k];
        if (scale == 0.0) continue;
        Axpy(out.data() + i * cols_out, b_row, scale, cols_out);
      }
    }
  }
}

void GemmAccumulateTransB(std::span<const double> dy, std::span<const double> b,
                          std::span<double> out, std::size_t rows,
                          std::size_t inner, std::size_t cols_out) {
  // out[i, k] += sum_j dy[i, j] * b[k, j], evaluated against b transposed.
  std::vector<double> bt(inner * cols_out);
  for (std::size_t k = 0; k < inner; ++k) {
    for (std::size_t j = 0; j < cols_out; ++j) bt[j * inner + k] = b[k * cols_out + j];
  }
  GemmAccumulate(dy, bt, out, rows, cols_out, inner);
}

void GemmAccumulateTransA(std::span<const double> a, std::span<const double> dy,
                          std::span<double> out, std::size_t rows,
                          std::size_t inner, std::size_t cols_out) {
  std::size_t i0 = 0;
  for (; i0 + kRowBlock <= rows; i0 += kRowBlock) {
    const double* a0 = a.data() + i0 * inner;
    const double* __restrict d0 = dy.data() + i0 * cols_out;
    const double* __restrict d1 = d0 + cols_out;
    const double* __restrict d2 = d1 + cols_out;
    const double* __restrict d3 = d2 + cols_out;
    for (std::size_t k = 0; k < inner; ++k) {
      const double s0 = a0[k], s1 = a0[inner + k], s2 = a0[2 * inner + k],
                   s3 = a0[3 * inner + k];
      if (s0 == 0.0 && s1 == 0.0 && s2 == 0.0 && s3 == 0.0) continue;
      double* __restrict out_row = out.data() + k * cols_out;
      for (std::size_t j = 0; j < cols_out; ++j) {
        out_row[j] += s0 * d0[j] + s1 * d1[j] + s2 * d2[j] + s3 * d3[j];
      }
    }
  }
  for (std::size_t i = i0; i < rows; ++i) {
    for (std::size_t k = 0; k < inner; ++k) {
      const double scale = a[i * inner + k];
      if (scale == 0.0) continue;
      Axpy(out.data() + k * cols_out, dy.data() + i * cols_out, scale, cols_out);
    }
  }
}

}  // namespace chaincraft::nn
