#pragma once

#include <cstddef>
#include <vector>

namespace partrank {

/// Row-major dense matrix.
template <class E>
struct DenseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<E> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, const E& fill) : rows(r), cols(c), data(r * c, fill) {}

  E& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const E& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

}  // namespace partrank
