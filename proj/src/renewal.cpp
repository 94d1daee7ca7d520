#include "raring/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace raring {

RenewalPath::RenewalPath(DistributionSpec spec, Rng rng)
    : spec_(std::move(spec)), rng_(std::move(rng)), tau_{0.0} {}

RenewalPath RenewalPath::from_times(std::span<const double> times,
                                    double horizon) {
  RenewalPath path(DistributionSpec::deterministic(1.0), Rng(0));
  path.spec_.reset();
  path.rng_.reset();
  double prev = 0.0;
  for (double t : times) {
    if (!(t > prev))
      throw std::invalid_argument("renewal times must be strictly increasing "
                                  "and positive");
    path.tau_.push_back(t);
    prev = t;
  }
  if (path.tau_.back() < horizon)
    throw std::invalid_argument("renewal times do not cover the horizon");
  path.horizon_ = horizon;
  return path;
}

void RenewalPath::append_one() {
  if (!spec_)
    throw std::out_of_range("explicit renewal path cannot be extended");
  if (tau_.size() > kMaxArrivals)
    throw std::length_error("renewal path exceeds the arrival cap");
  const double eta = sample(*spec_, *rng_);
  tau_.push_back(tau_.back() + eta);
}

void RenewalPath::extend_to(double horizon) {
  while (tau_.back() < horizon) append_one();
  horizon_ = std::max(horizon_, horizon);
}

void RenewalPath::extend_arrivals(std::size_t count) {
  while (arrivals() < count) append_one();
  horizon_ = std::max(horizon_, tau_.back());
}

double RenewalPath::next_after(double t) {
  while (!(tau_.back() > t)) append_one();
  const auto it = std::upper_bound(tau_.begin(), tau_.end(), t);
  return *it;
}

RenewalPath sample_path(const DistributionSpec& spec, double horizon, Rng rng) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("sample_path: horizon must be > 0");
  if (horizon / spec.mean() > static_cast<double>(kMaxArrivals))
    throw std::length_error("sample_path: expected arrivals on horizon exceed "
                            "the cap of " + std::to_string(kMaxArrivals));
  RenewalPath path(spec, std::move(rng));
  path.extend_to(horizon);
  return path;
}

std::size_t count_at(const RenewalPath& path, double t) {
  if (t < 0.0) throw std::invalid_argument("count_at: t must be >= 0");
  if (t > path.horizon())
    throw std::out_of_range("count_at: t beyond path horizon");
  const auto tau = path.partials();
  // Index of the first tau >= t; everything before it (excluding tau_0) is < t.
  const auto it = std::lower_bound(tau.begin() + 1, tau.end(), t);
  return static_cast<std::size_t>(it - tau.begin()) - 1;
}

double overshoot(RenewalPath& path, double t) {
  if (t < 0.0) throw std::invalid_argument("overshoot: t must be >= 0");
  return path.next_after(t) - t;
}

double partial_sum(const RenewalPath& path, std::size_t i) {
  if (i > path.arrivals())
    throw std::out_of_range("partial_sum: index beyond realized arrivals");
  return path.partials()[i];
}

void write_csv(std::ostream& os, const RenewalPath& path) {
  os << "i,eta,tau\n";
  const auto tau = path.partials();
  const auto prec = os.precision(17);
  for (std::size_t i = 0; i < tau.size(); ++i) {
    os << i << ',' << (i == 0 ? 0.0 : tau[i] - tau[i - 1]) << ',' << tau[i]
       << '\n';
  }
  os.precision(prec);
}

}  // namespace raring
