#ifndef RARING_RARING_CORE_HPP_
#define RARING_RARING_CORE_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "raring/distribution.hpp"
#include "raring/rng.hpp"

namespace raring {

using Site = std::int64_t;

// Generator of the jump process xi(t), t = 0, 1, 2, ..., with values in
// {1, 2, ...}. One instance is one realization: within it, each site is
// queried at most once and in increasing order. fresh() starts a new
// realization with the same configuration.
class XiSource {
 public:
  virtual ~XiSource() = default;

  virtual std::int64_t at(Site site, Rng& rng) = 0;
  virtual std::unique_ptr<XiSource> fresh() const = 0;

  // max over sites 0..last_site of P(xi(t) < y), when known in closed form.
  virtual std::optional<double> max_prob_below(Site last_site,
                                               double y) const {
    (void)last_site;
    (void)y;
    return std::nullopt;
  }

  virtual nlohmann::json describe() const = 0;
};

// Independent per-site draws. Site 0 may follow its own law. Continuous laws
// are mapped to {1, 2, ...} by ceil(max(x, 1)).
class ParametricSource final : public XiSource {
 public:
  explicit ParametricSource(DistributionSpec law,
                            std::optional<DistributionSpec> first_law = {});

  std::int64_t at(Site site, Rng& rng) override;
  std::unique_ptr<XiSource> fresh() const override;
  std::optional<double> max_prob_below(Site last_site, double y) const override;
  nlohmann::json describe() const override;

  const DistributionSpec& law_at(Site site) const;

 private:
  DistributionSpec law_;
  std::optional<DistributionSpec> first_law_;
};

// xi(t) = xi(0) at every site, with xi(0) drawn once per realization.
class CoupledSource final : public XiSource {
 public:
  explicit CoupledSource(DistributionSpec law);

  std::int64_t at(Site site, Rng& rng) override;
  std::unique_ptr<XiSource> fresh() const override;
  std::optional<double> max_prob_below(Site last_site, double y) const override;
  nlohmann::json describe() const override;

 private:
  DistributionSpec law_;
  std::optional<std::int64_t> value_;
};

// min(xi(t), cap - margin).
class TruncatedSource final : public XiSource {
 public:
  TruncatedSource(std::unique_ptr<XiSource> inner, std::int64_t cap,
                  std::int64_t margin);

  std::int64_t at(Site site, Rng& rng) override;
  std::unique_ptr<XiSource> fresh() const override;
  std::optional<double> max_prob_below(Site last_site, double y) const override;
  nlohmann::json describe() const override;

  std::int64_t ceiling() const { return cap_ - margin_; }

 private:
  std::unique_ptr<XiSource> inner_;
  std::int64_t cap_;
  std::int64_t margin_;
};

std::unique_ptr<XiSource> geometric_source(double p);
std::unique_ptr<XiSource> constant_source(std::int64_t value);
// Throws when margin >= cap.
std::unique_ptr<XiSource> truncate_source(const XiSource& source,
                                          std::int64_t cap,
                                          std::int64_t margin);

// Kept indices of the rarefied flow: beta(1) = xi(0),
// beta(m + 1) = beta(m) + xi(beta(m)).
struct BetaSequence {
  std::vector<std::int64_t> beta;  // beta[0] holds beta(1)
  nlohmann::json source;
  std::uint64_t seed = 0;

  std::size_t size() const { return beta.size(); }
  // beta(m), 1-based.
  std::int64_t operator()(std::size_t m) const { return beta.at(m - 1); }
};

// Runs the recursion on a fresh realization of `source` seeded with `seed`.
BetaSequence beta_sequence(const XiSource& source, std::size_t m_max,
                           std::uint64_t seed);

// Runs the recursion until beta(M) > t, so rare_count(·, t) is defined.
BetaSequence beta_sequence_past(const XiSource& source, double t,
                                std::uint64_t seed);

// v(t) = max{m >= 1 : beta(m) <= t}, 0 when beta(1) > t. Throws when the
// realization does not reach past t.
std::size_t rare_count(const BetaSequence& beta, double t);

// max_{t<=x} P(xi(t) < x/m) * (floor(x) + 1). May exceed 1.
double statement_bound_rhs(double max_prob_below, std::int64_t m, double x);

struct BoundCheckReport {
  std::int64_t m = 0;
  double x = 0.0;
  std::size_t samples = 0;
  double empirical = 0.0;  // estimate of P(beta(m) < x)
  double stderr_ = 0.0;
  double bound = 0.0;
  bool pass = false;
  nlohmann::json source;
};

// Throws when the source has no closed-form max_prob_below or when
// n_samples < 1000.
BoundCheckReport check_statement_bound(const XiSource& source, std::int64_t m,
                                       double x, std::size_t n_samples,
                                       std::uint64_t seed);

// A = {xi(past_site) <= past_level}, B = {xi(future_site) <= future_level}.
struct ThresholdPair {
  Site past_site;
  std::int64_t past_level;
  Site future_site;
  std::int64_t future_level;
};

struct MixingEstimate {
  std::int64_t lag = 0;
  std::vector<ThresholdPair> family;
  double estimate = 0.0;  // max over family of |P(AB) - P(A)P(B)|
  double stderr_ = 0.0;   // standard error of the maximizing pair
  std::size_t samples = 0;
  std::size_t argmax = 0;
  // Always true: a sup over a finite sub-family bounds alpha(lag) from below.
  bool lower_bound = true;
};

// Throws on an empty family or on a pair whose sites are closer than `lag`.
MixingEstimate estimate_mixing(const XiSource& source, std::int64_t lag,
                               const std::vector<ThresholdPair>& family,
                               std::size_t n_samples, std::uint64_t seed);

void to_json(nlohmann::json& j, const BoundCheckReport& r);
void to_json(nlohmann::json& j, const MixingEstimate& e);
void to_json(nlohmann::json& j, const ThresholdPair& p);

}  // namespace raring

#endif  // RARING_RARING_CORE_HPP_
