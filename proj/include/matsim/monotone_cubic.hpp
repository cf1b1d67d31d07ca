#ifndef MATSIM_MONOTONE_CUBIC_HPP
#define MATSIM_MONOTONE_CUBIC_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace matsim {

/// Fritsch–Carlson style slopes for piecewise cubic Hermite interpolation.
///
/// Interior slopes use the weighted harmonic mean of adjacent secants and are
/// zero where the data has a local extremum; end slopes use the one-sided
/// three-point rule with the same sign clamp. Writes `y.size()` slopes.
///
/// An interval whose two end values are equal gets zero slopes at both ends,
/// so the interpolant is exactly constant there (in particular exactly zero
/// between two zero samples).
void monotone_slopes(std::span<const double> x, std::span<const double> y,
                     std::span<double> slopes);

/// Same, for samples on a uniform grid with spacing `h`.
void monotone_slopes_uniform(double h, std::span<const double> y,
                             std::span<double> slopes);

/// Cubic Hermite on one interval; `s` in [0,1] is the local coordinate and
/// `h` the interval length.
inline double hermite(double s, double h, double y0, double y1, double d0,
                      double d1) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
}

inline double hermite_derivative(double s, double h, double y0, double y1,
                                 double d0, double d1) {
  const double s2 = s * s;
  const double dh00 = 6.0 * s2 - 6.0 * s;
  const double dh10 = 3.0 * s2 - 4.0 * s + 1.0;
  const double dh01 = -6.0 * s2 + 6.0 * s;
  const double dh11 = 3.0 * s2 - 2.0 * s;
  return (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
}

/// Monotone piecewise cubic interpolant (PCHIP) through (x_i, y_i).
///
/// Outside [x_0, x_n] the end values are held constant. Evaluation at a knot
/// returns the stored sample exactly.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;

  const std::vector<double>& xs() const noexcept { return x_; }
  const std::vector<double>& ys() const noexcept { return y_; }
  bool empty() const noexcept { return x_.empty(); }

 private:
  std::size_t interval(double x) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
};

}  // namespace matsim

#endif  // MATSIM_MONOTONE_CUBIC_HPP
