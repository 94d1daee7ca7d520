#ifndef RARING_MUTUAL_HPP_
#define RARING_MUTUAL_HPP_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "raring/distribution.hpp"
#include "raring/raring_core.hpp"
#include "raring/renewal.hpp"

namespace raring {

// Two renewal processes H (times tau_i) and Z (times theta_n) that mark each
// other. An H-point tau_i is marked by Z when (tau_{i-1}, tau_i] holds a
// Z-point. A Z-point theta_n is marked by H when [0, theta_1] (n = 1) or
// (theta_{n-1}, theta_n] holds an H-point, the origin tau_0 = 0 included.
struct MarkingRecord {
  RenewalPath h_path;
  RenewalPath z_path;
  double horizon = 0.0;
  std::vector<std::uint8_t> chi;      // chi[i - 1] = chi(i), tau_i <= horizon
  std::vector<double> t_doubleprime;  // T''_0 = 0, T''_1, ...
  std::vector<double> t_prime;        // T'_1, T'_2, ...
  std::vector<std::uint8_t> z_marked;  // per Z-point theta_n <= horizon
};

// Throws when the two paths were realized on different horizons.
MarkingRecord mark(RenewalPath h_path, RenewalPath z_path);

void write_csv(std::ostream& os, const MarkingRecord& rec);

// min{j >= 1 : chi(l + j) = 1}. Throws std::out_of_range when the record has
// no mark past site l.
std::int64_t xi_of(const MarkingRecord& rec, std::int64_t l);

struct MarkovIncrements {
  std::vector<double> v;  // V_n = T'_n - T''_{n-1}
  std::vector<double> u;  // U_n = T''_n - T'_n
};

// Throws when the record has no complete (T'_n, T''_n) pair.
MarkovIncrements markov_increments(const MarkingRecord& rec);

// Lazily realized marking indicators chi(1), chi(2), ... for H and Z drawn
// from two independent streams derived from one seed.
class MarkingStream {
 public:
  MarkingStream(DistributionSpec h_spec, DistributionSpec z_spec,
                std::uint64_t seed);

  bool chi(std::size_t i);
  double tau(std::size_t i);
  // Smallest i > l with chi(i) = 1.
  std::size_t next_mark_after(std::size_t l);

  // Streams used for H and Z, so the same paths can be rebuilt with
  // sample_path.
  static Rng h_stream(std::uint64_t seed);
  static Rng z_stream(std::uint64_t seed);

 private:
  RenewalPath h_;
  RenewalPath z_;
  std::vector<std::uint8_t> chi_;
};

// The xi-source induced by the marking: xi(l) = min{j >= 1 : chi(l + j) = 1}.
// Either replays one fixed record, or simulates a fresh (H, Z) pair per
// realization seeded from the caller's stream.
class MarkingSource final : public XiSource {
 public:
  explicit MarkingSource(std::shared_ptr<const MarkingRecord> record);
  MarkingSource(DistributionSpec h_spec, DistributionSpec z_spec);

  std::int64_t at(Site site, Rng& rng) override;
  std::unique_ptr<XiSource> fresh() const override;
  nlohmann::json describe() const override;

 private:
  std::shared_ptr<const MarkingRecord> record_;
  std::optional<DistributionSpec> h_spec_;
  std::optional<DistributionSpec> z_spec_;
  std::optional<MarkingStream> stream_;
};

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

// Monte Carlo estimate of P(gamma_Z^+(tau_l) < eta_{l+1} + ... + eta_{l+m})
// from fresh independent replications.
Estimate xi_cdf_formula(const DistributionSpec& h_spec,
                        const DistributionSpec& z_spec, std::int64_t l,
                        std::int64_t m, std::size_t n_samples,
                        std::uint64_t seed);

// Empirical P(xi(l) <= m) from the marking itself, one fresh (H, Z) pair per
// sample.
Estimate xi_cdf_direct(const DistributionSpec& h_spec,
                       const DistributionSpec& z_spec, std::int64_t l,
                       std::int64_t m, std::size_t n_samples,
                       std::uint64_t seed);

// G_n([x / lambda]) = E[1 - exp(-lambda tau_{[x / lambda]})] for a Poisson(lambda)
// marking process, estimated by Monte Carlo over tau.
Estimate poisson_G(double lambda, const DistributionSpec& h_spec, double x,
                   std::size_t n_samples, std::uint64_t seed);

// tau_{beta(1)}, ..., tau_{beta(k)}: the first k marked H-points.
std::vector<double> marked_times(const DistributionSpec& h_spec,
                                 const DistributionSpec& z_spec, std::size_t k,
                                 std::uint64_t seed);

}  // namespace raring

#endif  // RARING_MUTUAL_HPP_
