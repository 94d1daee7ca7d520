#include "raring/mutual.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace raring {

namespace {

constexpr std::uint64_t kStreamH = 0x48;  // 'H'
constexpr std::uint64_t kStreamZ = 0x5a;  // 'Z'
constexpr std::uint64_t kStreamFormula = 0x4636;
constexpr std::uint64_t kStreamDirect = 0x4436;
constexpr std::uint64_t kStreamPoissonG = 0x5047;

// First realized point strictly greater than t, or nullopt.
std::optional<double> first_after(std::span<const double> tau, double t) {
  const auto it = std::upper_bound(tau.begin() + 1, tau.end(), t);
  if (it == tau.end()) return std::nullopt;
  return *it;
}

void check_interleaving(const MarkingRecord& rec) {
  const auto& tpp = rec.t_doubleprime;
  const auto& tp = rec.t_prime;
  for (std::size_t n = 1; n <= tp.size(); ++n) {
    const double prev = tpp[n - 1];
    const bool ok = n == 1 ? prev < tp[0] : prev <= tp[n - 1];
    if (!ok) throw std::logic_error("marking interleaving violated at T'");
    if (n < tpp.size() && !(tp[n - 1] <= tpp[n]))
      throw std::logic_error("marking interleaving violated at T''");
  }
  if (tpp.size() > tp.size() + 1)
    throw std::logic_error("marking interleaving: T'' without preceding T'");
}

Estimate bernoulli_estimate(std::size_t hits, std::size_t n) {
  Estimate e;
  e.samples = n;
  e.value = static_cast<double>(hits) / static_cast<double>(n);
  e.stderr_ = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(n));
  return e;
}

void require_samples(std::size_t n) {
  if (n < 1) throw std::invalid_argument("n_samples must be >= 1");
}

}  // namespace

MarkingRecord mark(RenewalPath h_path, RenewalPath z_path) {
  if (h_path.horizon() != z_path.horizon())
    throw std::invalid_argument("mark: H and Z paths have different horizons");
  MarkingRecord rec{std::move(h_path), std::move(z_path), 0.0, {}, {}, {}, {}};
  rec.horizon = rec.h_path.horizon();
  const auto tau = rec.h_path.partials();
  const auto theta = rec.z_path.partials();

  rec.t_doubleprime.push_back(0.0);
  for (std::size_t i = 1; i < tau.size() && tau[i] <= rec.horizon; ++i) {
    const auto z = first_after(theta, tau[i - 1]);
    const bool marked = z && *z <= tau[i];
    rec.chi.push_back(marked ? 1 : 0);
    if (marked) rec.t_doubleprime.push_back(tau[i]);
  }
  for (std::size_t n = 1; n < theta.size() && theta[n] <= rec.horizon; ++n) {
    bool marked = true;  // the origin marks theta_1
    if (n > 1) {
      const auto h = first_after(tau, theta[n - 1]);
      marked = h && *h <= theta[n];
    }
    rec.z_marked.push_back(marked ? 1 : 0);
    if (marked) rec.t_prime.push_back(theta[n]);
  }
  check_interleaving(rec);
  return rec;
}

void write_csv(std::ostream& os, const MarkingRecord& rec) {
  os << "kind,index,time,marked\n";
  const auto prec = os.precision(17);
  const auto tau = rec.h_path.partials();
  for (std::size_t i = 0; i < rec.chi.size(); ++i) {
    os << "H," << i + 1 << ',' << tau[i + 1] << ',' << int(rec.chi[i]) << '\n';
  }
  const auto theta = rec.z_path.partials();
  for (std::size_t n = 0; n < rec.z_marked.size(); ++n) {
    os << "Z," << n + 1 << ',' << theta[n + 1] << ',' << int(rec.z_marked[n])
       << '\n';
  }
  os.precision(prec);
}

std::int64_t xi_of(const MarkingRecord& rec, std::int64_t l) {
  if (l < 0) throw std::invalid_argument("xi_of: site must be >= 0");
  for (auto i = static_cast<std::size_t>(l) + 1; i <= rec.chi.size(); ++i) {
    if (rec.chi[i - 1]) return static_cast<std::int64_t>(i) - l;
  }
  throw std::out_of_range("xi_of: no mark past site " + std::to_string(l) +
                          " in realization; use a longer horizon");
}

MarkovIncrements markov_increments(const MarkingRecord& rec) {
  const std::size_t k =
      std::min(rec.t_prime.size(), rec.t_doubleprime.size() - 1);
  if (k == 0)
    throw std::invalid_argument(
        "markov_increments: no complete (T', T'') pair within horizon");
  MarkovIncrements out;
  out.v.reserve(k);
  out.u.reserve(k);
  for (std::size_t n = 1; n <= k; ++n) {
    out.v.push_back(rec.t_prime[n - 1] - rec.t_doubleprime[n - 1]);
    out.u.push_back(rec.t_doubleprime[n] - rec.t_prime[n - 1]);
  }
  return out;
}

Rng MarkingStream::h_stream(std::uint64_t seed) {
  return Rng(derive_seed(seed, kStreamH));
}

Rng MarkingStream::z_stream(std::uint64_t seed) {
  return Rng(derive_seed(seed, kStreamZ));
}

MarkingStream::MarkingStream(DistributionSpec h_spec, DistributionSpec z_spec,
                             std::uint64_t seed)
    : h_(std::move(h_spec), h_stream(seed)),
      z_(std::move(z_spec), z_stream(seed)) {}

double MarkingStream::tau(std::size_t i) {
  h_.extend_arrivals(i);
  return h_.partials()[i];
}

bool MarkingStream::chi(std::size_t i) {
  if (i == 0) throw std::invalid_argument("chi is indexed from 1");
  while (chi_.size() < i) {
    const std::size_t j = chi_.size() + 1;
    const double hi = tau(j);
    const double lo = h_.partials()[j - 1];
    chi_.push_back(z_.next_after(lo) <= hi ? 1 : 0);
  }
  return chi_[i - 1] != 0;
}

std::size_t MarkingStream::next_mark_after(std::size_t l) {
  for (std::size_t i = l + 1;; ++i) {
    if (i - l > kMaxArrivals)
      throw std::length_error("marking stream: no mark within the arrival cap");
    if (chi(i)) return i;
  }
}

MarkingSource::MarkingSource(std::shared_ptr<const MarkingRecord> record)
    : record_(std::move(record)) {
  if (!record_) throw std::invalid_argument("MarkingSource: null record");
}

MarkingSource::MarkingSource(DistributionSpec h_spec, DistributionSpec z_spec)
    : h_spec_(std::move(h_spec)), z_spec_(std::move(z_spec)) {}

std::int64_t MarkingSource::at(Site site, Rng& rng) {
  if (record_) return xi_of(*record_, site);
  if (!stream_) stream_.emplace(*h_spec_, *z_spec_, rng.next_u64());
  const auto l = static_cast<std::size_t>(site);
  return static_cast<std::int64_t>(stream_->next_mark_after(l) - l);
}

std::unique_ptr<XiSource> MarkingSource::fresh() const {
  if (record_) return std::make_unique<MarkingSource>(record_);
  return std::make_unique<MarkingSource>(*h_spec_, *z_spec_);
}

nlohmann::json MarkingSource::describe() const {
  if (record_) {
    return {{"kind", "marking"},
            {"record_horizon", record_->horizon},
            {"h_points", record_->chi.size()}};
  }
  return {{"kind", "marking"}, {"h", *h_spec_}, {"z", *z_spec_}};
}

Estimate xi_cdf_formula(const DistributionSpec& h_spec,
                        const DistributionSpec& z_spec, std::int64_t l,
                        std::int64_t m, std::size_t n_samples,
                        std::uint64_t seed) {
  if (l < 0 || m < 1)
    throw std::invalid_argument("xi_cdf_formula: need l >= 0, m >= 1");
  require_samples(n_samples);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const std::uint64_t s = derive_seed(seed, kStreamFormula, i);
    Rng h_rng(derive_seed(s, kStreamH));
    double tau_l = 0.0;
    for (std::int64_t j = 0; j < l; ++j) tau_l += sample(h_spec, h_rng);
    RenewalPath z(z_spec, Rng(derive_seed(s, kStreamZ)));
    const double gamma = overshoot(z, tau_l);
    double ahead = 0.0;
    for (std::int64_t j = 0; j < m; ++j) ahead += sample(h_spec, h_rng);
    if (gamma < ahead) ++hits;
  }
  return bernoulli_estimate(hits, n_samples);
}

Estimate xi_cdf_direct(const DistributionSpec& h_spec,
                       const DistributionSpec& z_spec, std::int64_t l,
                       std::int64_t m, std::size_t n_samples,
                       std::uint64_t seed) {
  if (l < 0 || m < 1)
    throw std::invalid_argument("xi_cdf_direct: need l >= 0, m >= 1");
  require_samples(n_samples);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    MarkingSource source(h_spec, z_spec);
    Rng rng(derive_seed(seed, kStreamDirect, i));
    if (source.at(l, rng) <= m) ++hits;
  }
  return bernoulli_estimate(hits, n_samples);
}

Estimate poisson_G(double lambda, const DistributionSpec& h_spec, double x,
                   std::size_t n_samples, std::uint64_t seed) {
  if (!(lambda > 0.0) || !(x > 0.0))
    throw std::invalid_argument("poisson_G: need lambda > 0, x > 0");
  require_samples(n_samples);
  const auto count = static_cast<std::size_t>(std::floor(x / lambda));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng(derive_seed(seed, kStreamPoissonG, i));
    double tau = 0.0;
    for (std::size_t j = 0; j < count; ++j) tau += sample(h_spec, rng);
    const double v = -std::expm1(-lambda * tau);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(n_samples);
  Estimate e;
  e.samples = n_samples;
  e.value = sum / n;
  const double var =
      n > 1 ? std::max(0.0, (sum_sq - n * e.value * e.value) / (n - 1.0)) : 0.0;
  e.stderr_ = std::sqrt(var / n);
  return e;
}

std::vector<double> marked_times(const DistributionSpec& h_spec,
                                 const DistributionSpec& z_spec, std::size_t k,
                                 std::uint64_t seed) {
  MarkingStream stream(h_spec, z_spec, seed);
  std::vector<double> out;
  out.reserve(k);
  std::size_t at = 0;
  for (std::size_t n = 0; n < k; ++n) {
    at = stream.next_mark_after(at);
    out.push_back(stream.tau(at));
  }
  return out;
}

}  // namespace raring
