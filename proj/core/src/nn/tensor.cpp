#include "fraclab/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "fraclab/errors.hpp"

namespace fraclab::nn {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != element_count(shape_)) {
    throw DataError("tensor data length " + std::to_string(data_.size()) +
                    " does not match shape " + shape_string());
  }
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

void expect_shape(const Tensor& t, std::span<const std::size_t> shape,
                  const char* what) {
  if (!std::equal(t.shape().begin(), t.shape().end(), shape.begin(),
                  shape.end())) {
    std::string want = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) want += "x";
      want += std::to_string(shape[i]);
    }
    throw DataError(std::string(what) + ": expected shape " + want + "], got " +
                    t.shape_string());
  }
}

void expect_shape(const Tensor& t, std::initializer_list<std::size_t> shape,
                  const char* what) {
  expect_shape(t, std::span<const std::size_t>(shape.begin(), shape.size()),
               what);
}

}  // namespace fraclab::nn
