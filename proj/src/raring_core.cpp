#include "raring/raring_core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace raring {

namespace {

constexpr std::uint64_t kStreamStatement = 0x5354;  // "ST"
constexpr std::uint64_t kStreamMixing = 0x4d58;     // "MX"

std::int64_t to_jump(double draw) {
  return static_cast<std::int64_t>(std::ceil(std::max(draw, 1.0)));
}

// P(ceil(max(X, 1)) < y) = P(X <= ceil(y) - 1) for y > 1, 0 otherwise.
double jump_prob_below(const DistributionSpec& law, double y) {
  const double k = std::ceil(y) - 1.0;
  if (k < 1.0) return 0.0;
  return cdf_eval(law, k * (1.0 + 1e-12));
}

}  // namespace

ParametricSource::ParametricSource(DistributionSpec law,
                                   std::optional<DistributionSpec> first_law)
    : law_(std::move(law)), first_law_(std::move(first_law)) {}

const DistributionSpec& ParametricSource::law_at(Site site) const {
  return site == 0 && first_law_ ? *first_law_ : law_;
}

std::int64_t ParametricSource::at(Site site, Rng& rng) {
  return to_jump(sample(law_at(site), rng));
}

std::unique_ptr<XiSource> ParametricSource::fresh() const {
  return std::make_unique<ParametricSource>(*this);
}

std::optional<double> ParametricSource::max_prob_below(Site last_site,
                                                       double y) const {
  double p = last_site >= 1 || !first_law_ ? jump_prob_below(law_, y) : 0.0;
  if (first_law_) p = std::max(p, jump_prob_below(*first_law_, y));
  return p;
}

nlohmann::json ParametricSource::describe() const {
  nlohmann::json j = {{"kind", "parametric"}, {"law", law_}};
  if (first_law_) j["first"] = *first_law_;
  return j;
}

CoupledSource::CoupledSource(DistributionSpec law) : law_(std::move(law)) {}

std::int64_t CoupledSource::at(Site, Rng& rng) {
  if (!value_) value_ = to_jump(sample(law_, rng));
  return *value_;
}

std::unique_ptr<XiSource> CoupledSource::fresh() const {
  return std::make_unique<CoupledSource>(law_);
}

std::optional<double> CoupledSource::max_prob_below(Site, double y) const {
  return jump_prob_below(law_, y);
}

nlohmann::json CoupledSource::describe() const {
  return {{"kind", "coupled"}, {"law", law_}};
}

TruncatedSource::TruncatedSource(std::unique_ptr<XiSource> inner,
                                 std::int64_t cap, std::int64_t margin)
    : inner_(std::move(inner)), cap_(cap), margin_(margin) {
  if (!inner_) throw std::invalid_argument("truncate_source: null source");
  if (margin < 1 || cap < 1)
    throw std::invalid_argument("truncate_source: cap and margin must be >= 1");
  if (margin >= cap)
    throw std::invalid_argument("truncate_source: margin must be < cap");
}

std::int64_t TruncatedSource::at(Site site, Rng& rng) {
  return std::min(inner_->at(site, rng), ceiling());
}

std::unique_ptr<XiSource> TruncatedSource::fresh() const {
  return std::make_unique<TruncatedSource>(inner_->fresh(), cap_, margin_);
}

std::optional<double> TruncatedSource::max_prob_below(Site last_site,
                                                      double y) const {
  // min(X, c) < y  <=>  X < y or c < y.
  if (static_cast<double>(ceiling()) < y) return 1.0;
  return inner_->max_prob_below(last_site, y);
}

nlohmann::json TruncatedSource::describe() const {
  return {{"kind", "truncated"},
          {"inner", inner_->describe()},
          {"c", cap_},
          {"r", margin_}};
}

std::unique_ptr<XiSource> geometric_source(double p) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("geometric_source: p must be in (0, 1]");
  return std::make_unique<ParametricSource>(DistributionSpec::geometric(p));
}

std::unique_ptr<XiSource> constant_source(std::int64_t value) {
  if (value < 1) throw std::invalid_argument("constant_source: value >= 1");
  return std::make_unique<ParametricSource>(
      DistributionSpec::deterministic(static_cast<double>(value)));
}

std::unique_ptr<XiSource> truncate_source(const XiSource& source,
                                          std::int64_t cap,
                                          std::int64_t margin) {
  return std::make_unique<TruncatedSource>(source.fresh(), cap, margin);
}

namespace {

template <class Stop>
BetaSequence run_recursion(const XiSource& source, std::uint64_t seed,
                           Stop stop) {
  BetaSequence out;
  out.source = source.describe();
  out.seed = seed;
  auto realization = source.fresh();
  Rng rng(seed);
  std::int64_t b = realization->at(0, rng);
  out.beta.push_back(b);
  while (!stop(out)) {
    const std::int64_t jump = realization->at(b, rng);
    if (jump < 1) throw std::logic_error("xi source emitted a value < 1");
    b += jump;
    out.beta.push_back(b);
  }
  for (std::size_t m = 1; m <= out.beta.size(); ++m) {
    if (out.beta[m - 1] < static_cast<std::int64_t>(m) ||
        (m > 1 && out.beta[m - 1] <= out.beta[m - 2]))
      throw std::logic_error("beta sequence lost monotonicity");
  }
  return out;
}

}  // namespace

BetaSequence beta_sequence(const XiSource& source, std::size_t m_max,
                           std::uint64_t seed) {
  if (m_max < 1) throw std::invalid_argument("beta_sequence: m_max >= 1");
  return run_recursion(source, seed, [m_max](const BetaSequence& s) {
    return s.beta.size() >= m_max;
  });
}

BetaSequence beta_sequence_past(const XiSource& source, double t,
                                std::uint64_t seed) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw std::invalid_argument("beta_sequence_past: t must be finite, >= 0");
  return run_recursion(source, seed, [t](const BetaSequence& s) {
    return static_cast<double>(s.beta.back()) > t;
  });
}

std::size_t rare_count(const BetaSequence& beta, double t) {
  if (beta.beta.empty() || !(static_cast<double>(beta.beta.back()) > t))
    throw std::out_of_range(
        "rare_count: realization too short, need beta(M) > t");
  const auto it = std::upper_bound(
      beta.beta.begin(), beta.beta.end(), t,
      [](double v, std::int64_t b) { return v < static_cast<double>(b); });
  return static_cast<std::size_t>(it - beta.beta.begin());
}

double statement_bound_rhs(double max_prob_below, std::int64_t m, double x) {
  if (m < 1) throw std::invalid_argument("statement bound: m >= 1");
  return std::max(0.0, max_prob_below) * (std::floor(x) + 1.0);
}

BoundCheckReport check_statement_bound(const XiSource& source, std::int64_t m,
                                       double x, std::size_t n_samples,
                                       std::uint64_t seed) {
  if (n_samples < 1000)
    throw std::invalid_argument("check_statement_bound: n_samples >= 1000");
  if (m < 1 || !(x > 0.0))
    throw std::invalid_argument("check_statement_bound: need m >= 1, x > 0");
  const auto max_prob = source.max_prob_below(
      static_cast<Site>(std::floor(x)), x / static_cast<double>(m));
  if (!max_prob)
    throw std::invalid_argument(
        "check_statement_bound: source has no closed-form P(xi(t) < y)");

  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto beta = beta_sequence(source, static_cast<std::size_t>(m),
                                    derive_seed(seed, kStreamStatement, i));
    if (static_cast<double>(beta(static_cast<std::size_t>(m))) < x) ++hits;
  }
  BoundCheckReport r;
  r.m = m;
  r.x = x;
  r.samples = n_samples;
  r.empirical = static_cast<double>(hits) / static_cast<double>(n_samples);
  r.stderr_ = std::sqrt(r.empirical * (1.0 - r.empirical) /
                        static_cast<double>(n_samples));
  r.bound = statement_bound_rhs(*max_prob, m, x);
  r.pass = r.empirical <= r.bound + 3.0 * r.stderr_;
  r.source = source.describe();
  return r;
}

MixingEstimate estimate_mixing(const XiSource& source, std::int64_t lag,
                               const std::vector<ThresholdPair>& family,
                               std::size_t n_samples, std::uint64_t seed) {
  if (family.empty())
    throw std::invalid_argument("estimate_mixing: empty event family");
  if (lag < 1) throw std::invalid_argument("estimate_mixing: lag >= 1");
  if (n_samples < 2) throw std::invalid_argument("estimate_mixing: n >= 2");
  std::vector<Site> sites;
  for (const auto& p : family) {
    if (p.past_site < 0 || p.future_site - p.past_site < lag)
      throw std::invalid_argument(
          "estimate_mixing: future site must be at least `lag` past the "
          "past site");
    sites.push_back(p.past_site);
    sites.push_back(p.future_site);
  }
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());

  const std::size_t f = family.size();
  // Indicator table: ind[i * 2f + 2k] = A_k, [.. + 1] = B_k.
  std::vector<unsigned char> ind(n_samples * 2 * f);
  std::map<Site, std::int64_t> values;
  for (std::size_t i = 0; i < n_samples; ++i) {
    auto realization = source.fresh();
    Rng rng(derive_seed(seed, kStreamMixing, i));
    values.clear();
    for (Site s : sites) values[s] = realization->at(s, rng);
    for (std::size_t k = 0; k < f; ++k) {
      ind[i * 2 * f + 2 * k] = values[family[k].past_site] <=
                               family[k].past_level;
      ind[i * 2 * f + 2 * k + 1] = values[family[k].future_site] <=
                                   family[k].future_level;
    }
  }

  MixingEstimate out;
  out.lag = lag;
  out.family = family;
  out.samples = n_samples;
  const double n = static_cast<double>(n_samples);
  double best = -1.0;
  for (std::size_t k = 0; k < f; ++k) {
    double pa = 0.0;
    double pb = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
      pa += ind[i * 2 * f + 2 * k];
      pb += ind[i * 2 * f + 2 * k + 1];
    }
    pa /= n;
    pb /= n;
    // Influence function of the plug-in covariance: (A - pA)(B - pB) - D.
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
      const double psi = (ind[i * 2 * f + 2 * k] - pa) *
                         (ind[i * 2 * f + 2 * k + 1] - pb);
      sum += psi;
      sum_sq += psi * psi;
    }
    const double d = sum / n;
    const double var = std::max(0.0, (sum_sq - n * d * d) / (n - 1.0));
    // 1/n accounts for the second-order bias of the plug-in estimator.
    const double se = std::sqrt(var / n + 1.0 / (n * n));
    if (std::abs(d) > best) {
      best = std::abs(d);
      out.estimate = std::min(1.0, std::abs(d));
      out.stderr_ = se;
      out.argmax = k;
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const BoundCheckReport& r) {
  j = {{"m", r.m},
       {"x", r.x},
       {"samples", r.samples},
       {"empirical", r.empirical},
       {"stderr", r.stderr_},
       {"bound", r.bound},
       {"pass", r.pass},
       {"source", r.source}};
}

void to_json(nlohmann::json& j, const ThresholdPair& p) {
  j = {{"past_site", p.past_site},
       {"past_level", p.past_level},
       {"future_site", p.future_site},
       {"future_level", p.future_level}};
}

void to_json(nlohmann::json& j, const MixingEstimate& e) {
  j = {{"lag", e.lag},
       {"family", e.family},
       {"estimate", e.estimate},
       {"stderr", e.stderr_},
       {"samples", e.samples},
       {"argmax", e.argmax},
       {"lower_bound", e.lower_bound},
       {"label", "lower bound of alpha(lag) over a finite event family"}};
}

}  // namespace raring
