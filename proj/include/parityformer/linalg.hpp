// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parityformer/error.hpp"
#include "parityformer/scalar.hpp"

namespace parityformer {

template <Scalar S>
using Vector = std::vector<S>;

/// Dense row-major matrix.
template <Scalar S>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, S(0)) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<S> row_major)
      : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (data_.size() != rows_ * cols_)
      throw Error(ErrorKind::dimension_mismatch,
                  "matrix data has " + std::to_string(data_.size()) +
                      " entries, expected " + std::to_string(rows_ * cols_));
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = S(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const S> data() const noexcept { return data_; }

  S& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const S& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  Vector<S> apply(std::span<const S> x) const {
    if (x.size() != cols_)
      throw Error(ErrorKind::dimension_mismatch,
                  "matrix with " + std::to_string(cols_) +
                      " columns applied to vector of length " +
                      std::to_string(x.size()));
    Vector<S> y(rows_, S(0));
    for (std::size_t r = 0; r < rows_; ++r) {
      S acc = S(0);
      const S* row = data_.data() + r * cols_;
      for (std::size_t c = 0; c < cols_; ++c)
        if (row[c] != S(0)) acc += row[c] * x[c];
      y[r] = acc;
    }
    return y;
  }

  template <Scalar T>
  Matrix<T> cast() const {
    std::vector<T> out;
    out.reserve(data_.size());
    for (const auto& v : data_) out.push_back(T(v));
    return Matrix<T>(rows_, cols_, std::move(out));
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<S> data_;
};

template <Scalar S>
struct AffineMap {
  Matrix<S> matrix;
  Vector<S> bias;

  std::size_t in_dim() const noexcept { return matrix.cols(); }
  std::size_t out_dim() const noexcept { return matrix.rows(); }

  Vector<S> apply(std::span<const S> x) const {
    auto y = matrix.apply(x);
    for (std::size_t r = 0; r < y.size(); ++r) y[r] += bias[r];
    return y;
  }

  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

/*
  Feed-forward network x -> L_k(ReLU(L_{k-1}(... ReLU(L_1 x)))). The ReLU is
  applied after every stage except the last, so a single stage is a plain
  affine map.
*/
template <Scalar S>
class PiecewiseLinearNet {
 public:
  PiecewiseLinearNet() = default;
  explicit PiecewiseLinearNet(std::vector<AffineMap<S>> stages)
      : stages_(std::move(stages)) {
    if (stages_.empty())
      throw Error(ErrorKind::configuration, "network needs at least one stage");
    for (std::size_t k = 0; k < stages_.size(); ++k) {
      const auto& s = stages_[k];
      if (s.bias.size() != s.out_dim())
        throw Error(ErrorKind::dimension_mismatch,
                    "stage " + std::to_string(k) + ": bias length " +
                        std::to_string(s.bias.size()) + " != rows " +
                        std::to_string(s.out_dim()));
      if (k > 0 && stages_[k - 1].out_dim() != s.in_dim())
        throw Error(ErrorKind::dimension_mismatch,
                    "stage " + std::to_string(k) + " expects input of width " +
                        std::to_string(s.in_dim()) + ", previous stage emits " +
                        std::to_string(stages_[k - 1].out_dim()));
    }
  }

  /// Two-stage net returning its input exactly: x = ReLU(x) - ReLU(-x).
  static PiecewiseLinearNet exact_identity(std::size_t d) {
    Matrix<S> up(2 * d, d);
    Matrix<S> down(d, 2 * d);
    for (std::size_t i = 0; i < d; ++i) {
      up(2 * i, i) = S(1);
      up(2 * i + 1, i) = S(-1);
      down(i, 2 * i) = S(1);
      down(i, 2 * i + 1) = S(-1);
    }
    return PiecewiseLinearNet({{std::move(up), Vector<S>(2 * d, S(0))},
                               {std::move(down), Vector<S>(d, S(0))}});
  }

  std::size_t in_dim() const { return stages_.front().in_dim(); }
  std::size_t out_dim() const { return stages_.back().out_dim(); }
  const std::vector<AffineMap<S>>& stages() const noexcept { return stages_; }

  Vector<S> apply(std::span<const S> x) const {
    Vector<S> h(x.begin(), x.end());
    for (std::size_t k = 0; k < stages_.size(); ++k) {
      h = stages_[k].apply(h);
      if (k + 1 < stages_.size())
        for (auto& v : h)
          if (v < S(0)) v = S(0);
    }
    return h;
  }

  template <Scalar T>
  PiecewiseLinearNet<T> cast() const {
    std::vector<AffineMap<T>> out;
    for (const auto& s : stages_) {
      Vector<T> bias;
      for (const auto& b : s.bias) bias.push_back(T(b));
      out.push_back({s.matrix.template cast<T>(), std::move(bias)});
    }
    return PiecewiseLinearNet<T>(std::move(out));
  }

  friend bool operator==(const PiecewiseLinearNet&,
                         const PiecewiseLinearNet&) = default;

 private:
  std::vector<AffineMap<S>> stages_;
};

}  // namespace parityformer
