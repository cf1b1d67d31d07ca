#include "matsim/monotone_cubic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace matsim {

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

double end_slope(double h0, double h1, double del0, double del1) {
  double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
  if (sign(d) != sign(del0)) {
    d = 0.0;
  } else if (sign(del0) != sign(del1) && std::abs(d) > std::abs(3.0 * del0)) {
    d = 3.0 * del0;
  }
  return d;
}

double interior_slope(double h0, double h1, double del0, double del1) {
  if (del0 == 0.0 || del1 == 0.0 || sign(del0) != sign(del1)) return 0.0;
  const double w1 = 2.0 * h1 + h0;
  const double w2 = h1 + 2.0 * h0;
  return (w1 + w2) / (w1 / del0 + w2 / del1);
}

}  // namespace

void monotone_slopes(std::span<const double> x, std::span<const double> y,
                     std::span<double> slopes) {
  const std::size_t n = y.size();
  if (n < 2 || x.size() != n || slopes.size() != n) {
    throw std::invalid_argument("monotone_slopes: need >= 2 matching samples");
  }
  if (n == 2) {
    const double del = (y[1] - y[0]) / (x[1] - x[0]);
    slopes[0] = slopes[1] = del;
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double h0 = x[k] - x[k - 1];
    const double h1 = x[k + 1] - x[k];
    slopes[k] = interior_slope(h0, h1, (y[k] - y[k - 1]) / h0,
                               (y[k + 1] - y[k]) / h1);
  }
  {
    const double h0 = x[1] - x[0];
    const double h1 = x[2] - x[1];
    slopes[0] = end_slope(h0, h1, (y[1] - y[0]) / h0, (y[2] - y[1]) / h1);
  }
  {
    const double h0 = x[n - 1] - x[n - 2];
    const double h1 = x[n - 2] - x[n - 3];
    slopes[n - 1] = end_slope(h0, h1, (y[n - 1] - y[n - 2]) / h0,
                              (y[n - 2] - y[n - 3]) / h1);
  }
}

void monotone_slopes_uniform(double h, std::span<const double> y,
                             std::span<double> slopes) {
  const std::size_t n = y.size();
  if (n < 2 || slopes.size() != n) {
    throw std::invalid_argument("monotone_slopes_uniform: need >= 2 samples");
  }
  if (n == 2) {
    slopes[0] = slopes[1] = (y[1] - y[0]) / h;
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    slopes[k] = interior_slope(h, h, (y[k] - y[k - 1]) / h, (y[k + 1] - y[k]) / h);
  }
  slopes[0] = end_slope(h, h, (y[1] - y[0]) / h, (y[2] - y[1]) / h);
  slopes[n - 1] =
      end_slope(h, h, (y[n - 1] - y[n - 2]) / h, (y[n - 2] - y[n - 3]) / h);
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() < 2 || x_.size() != y_.size()) {
    throw std::invalid_argument("MonotoneCubic: need >= 2 matching samples");
  }
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw std::invalid_argument("MonotoneCubic: abscissae must be strictly increasing");
    }
  }
  d_.resize(y_.size());
  monotone_slopes(x_, y_, d_);
}

std::size_t MonotoneCubic::interval(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  if (i == 0) return 0;
  return std::min(i - 1, x_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const std::size_t i = interval(x);
  if (x == x_[i]) return y_[i];
  const double h = x_[i + 1] - x_[i];
  return hermite((x - x_[i]) / h, h, y_[i], y_[i + 1], d_[i], d_[i + 1]);
}

double MonotoneCubic::derivative(double x) const {
  if (x < x_.front() || x > x_.back()) return 0.0;
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  return hermite_derivative((x - x_[i]) / h, h, y_[i], y_[i + 1], d_[i], d_[i + 1]);
}

}  // namespace matsim
