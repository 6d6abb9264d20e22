// Copyright 2026 The AM-MTEEG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ammteeg/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "ammteeg/errors.h"

namespace ammteeg {

std::size_t ShapeSize(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << "x";
    out << shape[i];
  }
  out << "]";
  return out.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(ShapeSize(shape_), fill) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ConfigError("tensor dimensions must be positive");
  }
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ConfigError("tensor dimensions must be positive");
  }
  if (data_.size() != ShapeSize(shape_)) {
    throw ConfigError("tensor of shape " + ShapeToString(shape_) + " given " +
                      std::to_string(data_.size()) + " values");
  }
}

Tensor::Tensor(Shape shape, std::initializer_list<double> values)
    : Tensor(std::move(shape), std::vector<double>(values)) {}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw UsageError("axis " + std::to_string(axis) + " out of range for " +
                     ShapeToString(shape_));
  }
  return shape_[axis];
}

std::span<double> Tensor::grad() {
  if (!grad_) grad_.emplace(data_.size(), 0.0);
  return *grad_;
}

std::span<const double> Tensor::grad() const {
  if (!grad_) throw UsageError("tensor has no gradient");
  return *grad_;
}

void Tensor::ZeroGrad() {
  if (grad_) std::fill(grad_->begin(), grad_->end(), 0.0);
}

Tensor Tensor::Reshaped(Shape shape) const {
  if (ShapeSize(shape) != data_.size()) {
    throw ConfigError("cannot reshape " + ShapeToString(shape_) + " to " +
                      ShapeToString(shape));
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

double Dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw ConfigError("dot of unequal sizes");
  return std::inner_product(a.data().begin(), a.data().end(),
                            b.data().begin(), 0.0);
}

double MaxAbsDifference(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw ConfigError("difference of unequal sizes");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

}  // namespace ammteeg
