#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ghgrl {

/// Dense row-major matrix of doubles. Deliberately minimal: the model code
/// spells out its loops so that reduction order (and therefore every bit of
/// the result) is fixed.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }

  void fill(double v) noexcept;
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// out = x * w for a single row vector x (length w.rows()).
void row_times(std::span<const double> x, const Matrix& w, std::span<double> out) noexcept;

/// out += x * w.
void add_row_times(std::span<const double> x, const Matrix& w, std::span<double> out) noexcept;

/// out += g * w^T  (g has length w.cols(), out has length w.rows()).
void add_row_times_transpose(std::span<const double> g, const Matrix& w,
                             std::span<double> out) noexcept;

/// grad_w += scale * x^T g  (outer product accumulation).
void add_outer(std::span<const double> x, std::span<const double> g, double scale,
               Matrix& grad_w) noexcept;

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm2(std::span<const double> a) noexcept;

/// Cosine similarity; 0 when either vector has zero norm.
double cosine(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace ghgrl
