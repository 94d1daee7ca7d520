#include "raring/step_cdf.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace raring {

namespace {

// Round-off allowed when checking CDF invariants before repairing them.
constexpr double kSlack = 1e-9;

// Index k when x lies within relative round-off of grid point k, else -1.
long on_grid_index(double x, double step) {
  const double k = x / step;
  const double r = std::round(k);
  return std::abs(k - r) <= 1e-9 * std::max(1.0, r) ? static_cast<long>(r) : -1;
}

}  // namespace

Grid::Grid(double step_, double horizon_) : step(step_), horizon(horizon_) {
  if (!(step > 0.0) || !std::isfinite(step))
    throw std::invalid_argument("grid step must be > 0");
  if (!(horizon >= step) || !std::isfinite(horizon))
    throw std::invalid_argument("grid horizon must be >= step");
  points_ = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9)) + 1;
}

StepCDF::StepCDF(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.points())
    throw std::invalid_argument("StepCDF: value count does not match grid");
  double running = 0.0;
  for (std::size_t j = 0; j < values_.size(); ++j) {
    double& v = values_[j];
    if (!(v >= -kSlack && v <= 1.0 + kSlack))
      throw std::invalid_argument("StepCDF: value outside [0, 1] at index " +
                                  std::to_string(j));
    if (v < running - kSlack)
      throw std::invalid_argument("StepCDF: decreasing at index " +
                                  std::to_string(j));
    v = std::clamp(std::max(v, running), 0.0, 1.0);
    running = v;
  }
}

StepCDF StepCDF::point_mass_at_zero(Grid grid) {
  return StepCDF(grid, std::vector<double>(grid.points(), 1.0));
}

double StepCDF::operator()(double x) const {
  if (x < 0.0) return 0.0;
  long k = on_grid_index(x, grid_.step);
  if (k < 0) k = static_cast<long>(std::floor(x / grid_.step));
  const auto j = std::min<std::size_t>(static_cast<std::size_t>(k),
                                       values_.size() - 1);
  return values_[j];
}

StepCDF StepCDF::rescaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("rescale factor must be > 0");
  std::vector<double> out(values_.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = (*this)(grid_.at(j) * factor);
  }
  return StepCDF(grid_, std::move(out));
}

std::vector<double> StepCDF::increments() const {
  std::vector<double> d(values_.size());
  double prev = 0.0;
  for (std::size_t j = 0; j < values_.size(); ++j) {
    d[j] = values_[j] - prev;
    prev = values_[j];
  }
  return d;
}

StepCDF discretize(const DistributionSpec& spec, double step, double horizon) {
  const Grid grid(step, horizon);
  std::vector<double> values(grid.points());
  // Atoms sitting on a grid point must land on that point despite j*step
  // round-off.
  const double nudge = spec.is_atomic() ? 1.0 + 1e-12 : 1.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    values[j] = cdf_eval(spec, grid.at(j) * nudge);
  }
  return StepCDF(grid, std::move(values));
}

std::vector<double> convolve_values(const StepCDF& a,
                                    std::span<const double> values) {
  const std::size_t n = a.size();
  if (values.size() != n)
    throw std::invalid_argument("convolve: grid mismatch");
  const std::vector<double> da = a.increments();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = da[i];
    if (w == 0.0) continue;
    const double* src = values.data();
    double* dst = out.data() + i;
    const std::size_t len = n - i;
    for (std::size_t j = 0; j < len; ++j) dst[j] += w * src[j];
  }
  return out;
}

StepCDF convolve(const StepCDF& a, const StepCDF& b) {
  if (!(a.grid() == b.grid()))
    throw std::invalid_argument("convolve: grid mismatch");
  return StepCDF(a.grid(), convolve_values(a, b.values()));
}

StepCDF convolve_power(const StepCDF& a, int k) {
  if (k < 1)
    throw std::invalid_argument(
        "convolve_power: k must be >= 1 (use point_mass_at_zero for k = 0)");
  StepCDF acc = a;
  for (int i = 1; i < k; ++i) acc = convolve(acc, a);
  return acc;
}

std::vector<StepCDF> convolve_powers(const StepCDF& a, int k_max) {
  if (k_max < 1) throw std::invalid_argument("convolve_powers: k_max >= 1");
  std::vector<StepCDF> out;
  out.reserve(static_cast<std::size_t>(k_max));
  out.push_back(a);
  for (int i = 1; i < k_max; ++i) out.push_back(convolve(out.back(), a));
  return out;
}

void write_csv(std::ostream& os, const StepCDF& cdf) {
  os << "x,F\n";
  const auto prec = os.precision(17);
  for (std::size_t j = 0; j < cdf.size(); ++j) {
    os << cdf.grid().at(j) << ',' << cdf[j] << '\n';
  }
  os.precision(prec);
}

EmpiricalCDF::EmpiricalCDF(std::vector<double> sample)
    : sorted_(std::move(sample)) {
  if (sorted_.empty()) throw std::invalid_argument("empirical CDF: empty sample");
  for (double v : sorted_) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("empirical CDF: values must be finite and >= 0");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCDF::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) /
         static_cast<double>(sorted_.size());
}

KsResult ks_distance(const EmpiricalCDF& emp, const StepCDF& ref) {
  const auto xs = emp.sorted();
  const double n = static_cast<double>(xs.size());
  const double step = ref.grid().step;
  const std::size_t last = ref.size() - 1;
  const auto ref_at = [&](std::size_t j) { return ref[std::min(j, last)]; };
  const auto count_le = [&](double x) {
    return static_cast<double>(std::upper_bound(xs.begin(), xs.end(), x) -
                               xs.begin());
  };
  const auto count_lt = [&](double x) {
    return static_cast<double>(std::lower_bound(xs.begin(), xs.end(), x) -
                               xs.begin());
  };

  double sup = 0.0;
  // Grid points, right values and left limits.
  for (std::size_t j = 0; j <= last; ++j) {
    const double x = ref.grid().at(j);
    sup = std::max(sup, std::abs(count_le(x) / n - ref[j]));
    const double left_ref = j == 0 ? 0.0 : ref[j - 1];
    sup = std::max(sup, std::abs(count_lt(x) / n - left_ref));
  }
  // Sample points, right values and left limits.
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    double ref_right;
    double ref_left;
    if (const long k = on_grid_index(x, step); k >= 0) {
      const auto j = static_cast<std::size_t>(k);
      ref_right = ref_at(j);
      ref_left = j == 0 ? 0.0 : ref_at(j - 1);
    } else {
      ref_right = ref_left =
          ref_at(static_cast<std::size_t>(std::floor(x / step)));
    }
    sup = std::max(sup, std::abs(count_le(x) / n - ref_right));
    sup = std::max(sup, std::abs(count_lt(x) / n - ref_left));
  }
  const bool truncated = xs.back() > ref.grid().horizon;
  return {std::clamp(sup, 0.0, 1.0), truncated};
}

}  // namespace raring
