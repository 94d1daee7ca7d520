#ifndef RARING_STEP_CDF_HPP_
#define RARING_STEP_CDF_HPP_

#include <iosfwd>
#include <span>
#include <vector>

#include "raring/distribution.hpp"

namespace raring {

// Uniform grid x_j = j * step, j = 0..size()-1, covering [0, horizon].
struct Grid {
  double step;
  double horizon;

  Grid(double step, double horizon);
  std::size_t points() const { return points_; }
  double at(std::size_t j) const { return static_cast<double>(j) * step; }
  friend bool operator==(const Grid& a, const Grid& b) {
    return a.step == b.step && a.horizon == b.horizon;
  }

 private:
  std::size_t points_;
};

// Distribution function sampled on a uniform grid. Values are right
// continuous: F[j] = P(X <= x_j). Monotone and within [0, 1] by construction.
class StepCDF {
 public:
  StepCDF(Grid grid, std::vector<double> values);

  // Point mass at 0: the convolution identity.
  static StepCDF point_mass_at_zero(Grid grid);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  std::size_t size() const { return values_.size(); }

  // Step evaluation F(x) = F[floor(x / step)]; beyond the horizon returns the
  // last value.
  double operator()(double x) const;

  // Mass that did not fit on the grid, 1 - F[N].
  double lost_mass() const { return 1.0 - values_.back(); }

  // G(x) = F(x * factor) sampled on the same grid.
  StepCDF rescaled(double factor) const;

  // Increments dF[j] = F[j] - F[j-1], with dF[0] = F[0].
  std::vector<double> increments() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

StepCDF discretize(const DistributionSpec& spec, double step, double horizon);

// Stieltjes convolution on the common grid:
//   (a * b)(x_j) = sum_{i <= j} b(x_{j-i}) (a(x_i) - a(x_{i-1})).
// Mass beyond the horizon is dropped. Throws on grid mismatch.
StepCDF convolve(const StepCDF& a, const StepCDF& b);

// Same sum with an arbitrary bounded function on the grid in place of b.
std::vector<double> convolve_values(const StepCDF& a,
                                    std::span<const double> values);

// k-fold self convolution, computed by left-to-right iteration so that
// power(a, k + 1) == convolve(power(a, k), a) exactly. Rejects k == 0.
StepCDF convolve_power(const StepCDF& a, int k);

// All powers a^{*1} .. a^{*k_max} in one pass.
std::vector<StepCDF> convolve_powers(const StepCDF& a, int k_max);

void write_csv(std::ostream& os, const StepCDF& cdf);

class EmpiricalCDF {
 public:
  explicit EmpiricalCDF(std::vector<double> sample);

  std::size_t count() const { return sorted_.size(); }
  std::span<const double> sorted() const { return sorted_; }
  // #(values <= x) / n.
  double operator()(double x) const;

 private:
  std::vector<double> sorted_;
};

struct KsResult {
  double distance;
  // True when some sample value lies beyond the reference horizon.
  bool truncated;
};

// Supremum of |emp - ref| over grid points and sample points, checking both
// one-sided limits at each jump of the empirical CDF.
KsResult ks_distance(const EmpiricalCDF& emp, const StepCDF& ref);

}  // namespace raring

#endif  // RARING_STEP_CDF_HPP_
