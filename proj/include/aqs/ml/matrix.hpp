#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aqs/core/error.hpp"

namespace aqs::ml {

// Dense row-major matrix of samples x features.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != r * c) throw Error("matrix data size does not match shape");
  }

  static Matrix from_rows(const std::vector<std::vector<double>>& rs) {
    Matrix m;
    m.rows = rs.size();
    m.cols = rs.empty() ? 0 : rs.front().size();
    m.data.reserve(m.rows * m.cols);
    for (const auto& r : rs) {
      if (r.size() != m.cols) throw Error("ragged rows");
      m.data.insert(m.data.end(), r.begin(), r.end());
    }
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  Matrix select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < cols; ++j) out(i, j) = (*this)(idx[i], j);
    return out;
  }
};

inline std::vector<double> select(std::span<const double> v, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace aqs::ml
