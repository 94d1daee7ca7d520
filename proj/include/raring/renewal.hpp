#ifndef RARING_RENEWAL_HPP_
#define RARING_RENEWAL_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "raring/distribution.hpp"
#include "raring/rng.hpp"

namespace raring {

// Hard cap on the number of arrivals a single path may hold.
inline constexpr std::size_t kMaxArrivals = 100'000'000;

// One realization of a renewal process: tau[0] = 0, tau[i] = tau[i-1] +
// eta[i]. The path owns the random stream it was drawn from, so queries past
// the realized range extend it with fresh draws from the same stream.
class RenewalPath {
 public:
  RenewalPath(DistributionSpec spec, Rng rng);

  // Builds a path from explicit renewal times (no extension possible).
  static RenewalPath from_times(std::span<const double> times, double horizon);

  const std::optional<DistributionSpec>& spec() const { return spec_; }
  double horizon() const { return horizon_; }
  std::span<const double> partials() const { return tau_; }
  // Number of realized arrivals I (tau has I + 1 entries).
  std::size_t arrivals() const { return tau_.size() - 1; }
  double last() const { return tau_.back(); }

  // Draws until tau[I] >= horizon; raises the horizon accordingly.
  void extend_to(double horizon);

  // Draws until at least `count` arrivals are realized.
  void extend_arrivals(std::size_t count);

  // Next renewal point strictly greater than t, extending as needed.
  double next_after(double t);

 private:
  std::optional<DistributionSpec> spec_;
  std::optional<Rng> rng_;
  std::vector<double> tau_;
  double horizon_ = 0.0;

  void append_one();
};

// Throws std::length_error when the expected arrival count on the horizon
// exceeds kMaxArrivals.
RenewalPath sample_path(const DistributionSpec& spec, double horizon, Rng rng);

// sup{n : tau_n < t}; count_at(path, 0) == 0. Rejects t > horizon.
std::size_t count_at(const RenewalPath& path, double t);

// tau_{N(t)+1} - t, where the next point is taken strictly greater than t.
double overshoot(RenewalPath& path, double t);

double partial_sum(const RenewalPath& path, std::size_t i);

void write_csv(std::ostream& os, const RenewalPath& path);

}  // namespace raring

#endif  // RARING_RENEWAL_HPP_
