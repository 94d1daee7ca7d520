#include "raring/limit_solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace raring {

namespace {

void check_s(double s) {
  if (!(s > 0.0 && s <= 1.0))
    throw std::invalid_argument("generating function argument s must be in "
                                "(0, 1]");
}

std::size_t index_of(const Grid& grid, double t) {
  if (t < 0.0) throw std::invalid_argument("t must be >= 0");
  const double k = t / grid.step;
  const double r = std::round(k);
  const double idx =
      std::abs(k - r) <= 1e-9 * std::max(1.0, r) ? r : std::floor(k);
  if (idx > static_cast<double>(grid.points() - 1))
    throw std::out_of_range("argument " + std::to_string(t) +
                            " beyond grid horizon " +
                            std::to_string(grid.horizon));
  return static_cast<std::size_t>(idx);
}

// The prefix [0, x_last] of a CDF, as a CDF on the shorter grid. Values at
// index j of any convolution depend only on indices <= j, so working on the
// prefix is exact.
StepCDF prefix(const StepCDF& f, std::size_t last) {
  if (last == f.size() - 1) return f;
  const double step = f.grid().step;
  const Grid g(step, std::max(step, static_cast<double>(last) * step));
  std::vector<double> v(f.values().begin(),
                        f.values().begin() + static_cast<long>(g.points()));
  return StepCDF(g, std::move(v));
}

std::vector<double> checked_slice(std::vector<double> v) {
  for (double& x : v) {
    if (!(x >= -1e-9 && x <= 1.0 + 1e-9))
      throw std::logic_error("generating function left [0, 1]");
    x = std::clamp(x, 0.0, 1.0);
  }
  return v;
}

}  // namespace

double GFSlice::operator()(double t) const { return values[index_of(grid, t)]; }

GFSlice solve_F(const StepCDF& r2, double s, SolveMode mode,
                const SolverOptions& options) {
  check_s(s);
  const std::size_t n = r2.size();
  GFSlice out;
  out.s = s;
  out.grid = r2.grid();

  if (mode == SolveMode::kIteration) {
    std::vector<double> base(n);
    for (std::size_t j = 0; j < n; ++j) base[j] = 1.0 - r2[j];
    std::vector<double> f = base;
    double residual = 0.0;
    for (int it = 0; it < options.max_iterations; ++it) {
      std::vector<double> next = convolve_values(r2, f);
      residual = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        next[j] = base[j] + s * next[j];
        residual = std::max(residual, std::abs(next[j] - f[j]));
      }
      f = std::move(next);
      if (residual < options.fixed_point_tol) {
        out.values = checked_slice(std::move(f));
        return out;
      }
    }
    throw ConvergenceError("solve_F: fixed point iteration did not converge, "
                           "residual " + std::to_string(residual),
                           residual);
  }

  // Series: sum_d s^d (R2^{*d} - R2^{*(d+1)}), with R2^{*0} the unit mass.
  std::vector<double> f(n, 0.0);
  StepCDF lower = StepCDF::point_mass_at_zero(r2.grid());
  double weight = 1.0;
  for (int d = 0; d < options.max_series_terms; ++d) {
    if (weight * lower.values().back() < options.series_tail_tol) {
      out.values = checked_slice(std::move(f));
      return out;
    }
    StepCDF upper = d == 0 ? r2 : convolve(lower, r2);
    for (std::size_t j = 0; j < n; ++j) f[j] += weight * (lower[j] - upper[j]);
    lower = std::move(upper);
    weight *= s;
  }
  const double residual = weight * lower.values().back();
  throw ConvergenceError("solve_F: series did not reach its tail tolerance, "
                         "residual " + std::to_string(residual),
                         residual);
}

GFSlice solve_g(const StepCDF& r1, const StepCDF& r2, double s, SolveMode mode,
                DelayedForm form, const SolverOptions& options) {
  if (!(r1.grid() == r2.grid()))
    throw std::invalid_argument("solve_g: R1 and R2 grids differ");
  const GFSlice f = solve_F(r2, s, mode, options);
  const StepCDF& against = form == DelayedForm::kFirstInterval ? r1 : r2;
  std::vector<double> g = convolve_values(against, f.values);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = 1.0 - r1[j] + s * g[j];
  GFSlice out;
  out.s = s;
  out.grid = r1.grid();
  out.values = form == DelayedForm::kFirstInterval ? checked_slice(std::move(g))
                                                    : std::move(g);
  return out;
}

CountPmf limit_count_pmf(const StepCDF& r1, const StepCDF& r2, double t,
                         int k_max) {
  if (!(r1.grid() == r2.grid()))
    throw std::invalid_argument("limit_count_pmf: R1 and R2 grids differ");
  if (k_max < 1) throw std::invalid_argument("limit_count_pmf: k_max >= 1");
  const std::size_t j = index_of(r1.grid(), t);
  const StepCDF a = prefix(r1, std::max<std::size_t>(j, 1));
  const StepCDF b = prefix(r2, std::max<std::size_t>(j, 1));

  CountPmf out;
  out.t = t;
  out.p.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  // C_k = R1 * R2^{*(k-1)}; P(N = k) = C_k(t) - C_{k+1}(t).
  double prev = 1.0;  // C_0(t): unit mass at zero
  StepCDF current = a;
  for (int k = 1; k <= k_max + 1; ++k) {
    const double now = current[j];
    out.p[static_cast<std::size_t>(k - 1)] = std::max(0.0, prev - now);
    prev = now;
    if (k == k_max + 1) break;
    if (now <= 0.0) {
      break;  // all further terms vanish
    }
    current = convolve(current, b);
  }
  double total = 0.0;
  for (double p : out.p) total += p;
  out.tail = std::max(0.0, 1.0 - total);
  out.flagged = out.tail > kTailFlag;
  return out;
}

double kth_event_limit_cdf(const StepCDF& r1, const StepCDF& r2, int k,
                           double mu, double x) {
  if (k < 1) throw std::invalid_argument("kth_event_limit_cdf: k >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("kth_event_limit_cdf: mu > 0");
  if (!(r1.grid() == r2.grid()))
    throw std::invalid_argument("kth_event_limit_cdf: R1 and R2 grids differ");
  const std::size_t j = index_of(r1.grid(), x * mu);
  StepCDF acc = prefix(r1, std::max<std::size_t>(j, 1));
  const StepCDF b = prefix(r2, std::max<std::size_t>(j, 1));
  for (int i = 1; i < k; ++i) acc = convolve(acc, b);
  return acc[j];
}

StepCDF kth_event_limit_law(const StepCDF& r1, const StepCDF& r2, int k,
                            double mu) {
  if (k < 1) throw std::invalid_argument("kth_event_limit_law: k >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("kth_event_limit_law: mu > 0");
  if (!(r1.grid() == r2.grid()))
    throw std::invalid_argument("kth_event_limit_law: R1 and R2 grids differ");
  StepCDF acc = r1;
  for (int i = 1; i < k; ++i) acc = convolve(acc, r2);
  return mu == 1.0 ? acc : acc.rescaled(mu);
}

PgfValue pgf_from_pmf(const CountPmf& pmf, double s) {
  check_s(s);
  if (pmf.tail > kTailFlag)
    throw std::invalid_argument("pgf_from_pmf: pmf tail mass exceeds 0.01");
  PgfValue out;
  double power = 1.0;
  for (double p : pmf.p) {
    out.value += p * power;
    power *= s;
  }
  out.error = pmf.tail;
  return out;
}

void write_csv(std::ostream& os, const GFSlice& slice) {
  os << "x,value\n";
  const auto prec = os.precision(17);
  for (std::size_t j = 0; j < slice.values.size(); ++j) {
    os << slice.grid.at(j) << ',' << slice.values[j] << '\n';
  }
  os.precision(prec);
}

void to_json(nlohmann::json& j, const GFSlice& slice) {
  j = {{"s", slice.s},
       {"step", slice.grid.step},
       {"horizon", slice.grid.horizon},
       {"values", slice.values}};
}

void to_json(nlohmann::json& j, const CountPmf& pmf) {
  j = {{"t", pmf.t}, {"p", pmf.p}, {"tail", pmf.tail}, {"flagged", pmf.flagged}};
}

}  // namespace raring
