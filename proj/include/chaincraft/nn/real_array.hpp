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

#ifndef CHAINCRAFT_NN_REAL_ARRAY_HPP_
#define CHAINCRAFT_NN_REAL_ARRAY_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace chaincraft::nn {

using Shape = std::vector<std::size_t>;

std::size_t ShapeSize(const Shape& shape);
std::string ShapeString(const Shape& shape);

// Dense row-major array of doubles.
class RealArray {
 public:
  RealArray() = default;
  explicit RealArray(Shape shape, double fill = 0.0);
  RealArray(Shape shape, std::vector<double> data);

  static RealArray Scalar(double value);
  static RealArray Matrix(std::size_t rows, std::size_t cols,
                          std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // 2-D views. rows() is the leading dimension, cols() the product of the
  // remaining ones, so 4-D activations read as [batch x features].
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t row, std::size_t col) { return data_[row * cols() + col]; }
  double at(std::size_t row, std::size_t col) const {
    return data_[row * cols() + col];
  }

  void Fill(double value);
  void Reshape(Shape shape);
  bool AllFinite() const;

  bool operator==(const RealArray& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Throws NumericError naming `where` if any element is NaN or infinite.
void RequireFinite(const RealArray& array, const char* where);

// out[rows x cols_out] (+)= a[rows x inner] * b[inner x cols_out].
// Each output element accumulates over the inner index in increasing order,
// so a row's result never depends on how many other rows are in the batch.
void GemmAccumulate(std::span<const double> a, std::span<const double> b,
                    std::span<double> out, std::size_t rows, std::size_t inner,
                    std::size_t cols_out);
// out[rows x inner] += dy[rows x cols_out] * b[inner x cols_out]^T
void GemmAccumulateTransB(std::span<const double> dy, std::span<const double> b,
                          std::span<double> out, std::size_t rows,
                          std::size_t inner, std::size_t cols_out);
// out[inner x cols_out] += a[rows x inner]^T * dy[rows x cols_out]
void GemmAccumulateTransA(std::span<const double> a, std::span<const double> dy,
                          std::span<double> out, std::size_t rows,
                          std::size_t inner, std::size_t cols_out);

}  // namespace chaincraft::nn

#endif  // CHAINCRAFT_NN_REAL_ARRAY_HPP_
