#ifndef RARING_LIMIT_SOLVER_HPP_
#define RARING_LIMIT_SOLVER_HPP_

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "raring/step_cdf.hpp"

namespace raring {

// E[s^{N(t)}] as a function of t on a grid, for one fixed s in (0, 1].
struct GFSlice {
  double s = 1.0;
  Grid grid{1.0, 1.0};
  std::vector<double> values;

  double operator()(double t) const;
};

enum class SolveMode { kIteration, kSeries };

// Which law is integrated against F in the delayed equation
//   g = 1 - R1 + s (R * F).
// kFirstInterval uses R = R1 (delayed renewal process); kLiteral uses R = R2.
enum class DelayedForm { kFirstInterval, kLiteral };

struct SolverOptions {
  double fixed_point_tol = 1e-10;
  int max_iterations = 100000;
  double series_tail_tol = 1e-10;
  int max_series_terms = 100000;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Solves F(t, s) = 1 - R2(t) + s (R2 * F)(t, s) on R2's grid.
GFSlice solve_F(const StepCDF& r2, double s, SolveMode mode,
                const SolverOptions& options = {});

// g(t, s) = 1 - R1(t) + s (R * F)(t, s), with R chosen by `form`. The
// kLiteral values are returned unchecked; they need not lie in [0, 1].
GFSlice solve_g(const StepCDF& r1, const StepCDF& r2, double s, SolveMode mode,
                DelayedForm form = DelayedForm::kFirstInterval,
                const SolverOptions& options = {});

struct CountPmf {
  double t = 0.0;
  std::vector<double> p;  // P(N(t) = k), k = 0..k_max
  double tail = 0.0;      // 1 - sum(p)
  bool flagged = false;   // tail > kTailFlag
};

inline constexpr double kTailFlag = 0.01;

// Law of N(t) for the delayed renewal process with first interval R1 and
// later intervals R2 (counting points <= t).
CountPmf limit_count_pmf(const StepCDF& r1, const StepCDF& r2, double t,
                         int k_max);

// The whole law x -> (R1 * R2^{*(k-1)})(x mu) on R1's grid; points whose
// argument x mu falls past the horizon hold the last grid value.
StepCDF kth_event_limit_law(const StepCDF& r1, const StepCDF& r2, int k,
                            double mu);

// (R1 * R2^{*(k-1)})(x mu). Throws when x mu lies beyond the grid.
double kth_event_limit_cdf(const StepCDF& r1, const StepCDF& r2, int k,
                           double mu, double x);

struct PgfValue {
  double value = 0.0;
  double error = 0.0;  // tail-mass bound on the truncation error
};

// Throws when the pmf tail exceeds kTailFlag.
PgfValue pgf_from_pmf(const CountPmf& pmf, double s);

void write_csv(std::ostream& os, const GFSlice& slice);
void to_json(nlohmann::json& j, const GFSlice& slice);
void to_json(nlohmann::json& j, const CountPmf& pmf);

}  // namespace raring

#endif  // RARING_LIMIT_SOLVER_HPP_
