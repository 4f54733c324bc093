#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace charembed {

using Real = double;
using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array. Plain value type: the gradient buffer and the tape
// linkage live in Tape, which owns one Tensor per recorded node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = 0.0);
  Tensor(Shape shape, std::vector<Real> data);

  static Tensor vector(std::initializer_list<Real> values);
  static Tensor scalar(Real value) { return Tensor({1}, {value}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }
  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }

  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }

  // 2-d access; caller guarantees rank() == 2.
  Real& at(std::size_t row, std::size_t col) { return data_[row * shape_[1] + col]; }
  Real at(std::size_t row, std::size_t col) const { return data_[row * shape_[1] + col]; }

  std::span<Real> row(std::size_t r);
  std::span<const Real> row(std::size_t r) const;

  void fill(Real value);
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<Real> data_;
};

}  // namespace charembed
