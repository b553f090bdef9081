#include "ghgrl/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace ghgrl {

void Matrix::fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void row_times(std::span<const double> x, const Matrix& w, std::span<double> out) noexcept {
  std::fill(out.begin(), out.end(), 0.0);
  add_row_times(x, w, out);
}

void add_row_times(std::span<const double> x, const Matrix& w, std::span<double> out) noexcept {
  for (std::size_t k = 0; k < w.rows(); ++k) {
    const double xk = x[k];
    const auto wk = w.row(k);
    for (std::size_t j = 0; j < w.cols(); ++j) out[j] += xk * wk[j];
  }
}

void add_row_times_transpose(std::span<const double> g, const Matrix& w,
                             std::span<double> out) noexcept {
  for (std::size_t k = 0; k < w.rows(); ++k) {
    out[k] += dot(g, w.row(k));
  }
}

void add_outer(std::span<const double> x, std::span<const double> g, double scale,
               Matrix& grad_w) noexcept {
  for (std::size_t k = 0; k < grad_w.rows(); ++k) {
    const double xk = scale * x[k];
    auto gk = grad_w.row(k);
    for (std::size_t j = 0; j < grad_w.cols(); ++j) gk[j] += xk * g[j];
  }
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

double cosine(std::span<const double> a, std::span<const double> b) noexcept {
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

}  // namespace ghgrl
