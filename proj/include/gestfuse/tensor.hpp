#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gestfuse {

// Dense row-major value block with an explicit dimension list.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  static Tensor zeros(std::vector<int> shape);

  std::size_t size() const { return data.size(); }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::size_t shape_size(std::span<const int> shape);
bool same_shape(const Tensor& a, const Tensor& b);

}  // namespace gestfuse
