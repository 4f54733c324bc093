#include "charembed/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "charembed/errors.hpp"

namespace charembed {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one axis");
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimension must be positive: " + shape_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, Real fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<Real> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (shape_size(shape_) != data_.size()) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string(shape_));
  }
}

Tensor Tensor::vector(std::initializer_list<Real> values) {
  return Tensor({values.size()}, std::vector<Real>(values));
}

std::span<Real> Tensor::row(std::size_t r) {
  const std::size_t width = shape_size(shape_) / shape_[0];
  return std::span<Real>(data_).subspan(r * width, width);
}

std::span<const Real> Tensor::row(std::size_t r) const {
  const std::size_t width = shape_size(shape_) / shape_[0];
  return std::span<const Real>(data_).subspan(r * width, width);
}

void Tensor::fill(Real value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](Real v) { return std::isfinite(v); });
}

}  // namespace charembed
