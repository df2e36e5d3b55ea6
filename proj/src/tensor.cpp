#include "gestfuse/tensor.hpp"

#include <string>

#include "gestfuse/error.hpp"

namespace gestfuse {

std::size_t shape_size(std::span<const int> shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) raise(Errc::shape_mismatch, "non-positive dimension " + std::to_string(d));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor Tensor::zeros(std::vector<int> shape) {
  Tensor t;
  t.data.assign(shape_size(shape), 0.0);
  t.shape = std::move(shape);
  return t;
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

}  // namespace gestfuse
