#include "raring/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace raring {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void validate(const DistributionSpec::Kind& kind) {
  std::visit(
      overloaded{
          [](const Exponential& e) {
            if (!positive_finite(e.rate))
              throw std::invalid_argument("exponential: rate must be > 0");
          },
          [](const Deterministic& d) {
            if (!positive_finite(d.value))
              throw std::invalid_argument("deterministic: value must be > 0");
          },
          [](const Uniform& u) {
            if (!positive_finite(u.lo) || !positive_finite(u.hi) ||
                !(u.lo < u.hi))
              throw std::invalid_argument(
                  "uniform: need 0 < lo < hi < infinity");
          },
          [](const Geometric& g) {
            if (!(g.p > 0.0 && g.p <= 1.0))
              throw std::invalid_argument("geometric: p must be in (0, 1]");
          },
          [](const Discrete& d) {
            if (d.atoms.empty())
              throw std::invalid_argument("discrete: no atoms");
            double total = 0.0;
            for (const auto& [value, prob] : d.atoms) {
              if (!positive_finite(value))
                throw std::invalid_argument("discrete: values must be > 0");
              if (!(prob >= 0.0 && prob <= 1.0))
                throw std::invalid_argument(
                    "discrete: probabilities must be in [0, 1]");
              total += prob;
            }
            if (std::abs(total - 1.0) > 1e-12)
              throw std::invalid_argument(
                  "discrete: probabilities must sum to 1");
          },
          [](const Erlang& e) {
            if (e.shape < 1)
              throw std::invalid_argument("erlang: shape must be >= 1");
            if (!positive_finite(e.rate))
              throw std::invalid_argument("erlang: rate must be > 0");
          },
      },
      kind);
}

bool is_positive_integer(double v) { return v >= 1.0 && std::floor(v) == v; }

}  // namespace

DistributionSpec::DistributionSpec(Kind kind) : kind_(std::move(kind)) {
  validate(kind_);
  if (auto* d = std::get_if<Discrete>(&kind_)) {
    std::sort(d->atoms.begin(), d->atoms.end());
  }
}

std::string DistributionSpec::kind_name() const {
  return std::visit(overloaded{
                        [](const Exponential&) { return "exponential"; },
                        [](const Deterministic&) { return "deterministic"; },
                        [](const Uniform&) { return "uniform"; },
                        [](const Geometric&) { return "geometric"; },
                        [](const Discrete&) { return "discrete"; },
                        [](const Erlang&) { return "erlang"; },
                    },
                    kind_);
}

bool DistributionSpec::is_atomic() const {
  return std::holds_alternative<Deterministic>(kind_) ||
         std::holds_alternative<Geometric>(kind_) ||
         std::holds_alternative<Discrete>(kind_);
}

bool DistributionSpec::is_integer_valued() const {
  return std::visit(overloaded{
                        [](const Deterministic& d) {
                          return is_positive_integer(d.value);
                        },
                        [](const Geometric&) { return true; },
                        [](const Discrete& d) {
                          return std::all_of(
                              d.atoms.begin(), d.atoms.end(), [](auto& a) {
                                return is_positive_integer(a.first);
                              });
                        },
                        [](const auto&) { return false; },
                    },
                    kind_);
}

double DistributionSpec::mean() const {
  return std::visit(overloaded{
                        [](const Exponential& e) { return 1.0 / e.rate; },
                        [](const Deterministic& d) { return d.value; },
                        [](const Uniform& u) { return 0.5 * (u.lo + u.hi); },
                        [](const Geometric& g) { return 1.0 / g.p; },
                        [](const Discrete& d) {
                          double m = 0.0;
                          for (const auto& [v, p] : d.atoms) m += v * p;
                          return m;
                        },
                        [](const Erlang& e) { return e.shape / e.rate; },
                    },
                    kind_);
}

bool operator==(const DistributionSpec& a, const DistributionSpec& b) {
  return std::visit(
      overloaded{
          [](const Exponential& x, const Exponential& y) {
            return x.rate == y.rate;
          },
          [](const Deterministic& x, const Deterministic& y) {
            return x.value == y.value;
          },
          [](const Uniform& x, const Uniform& y) {
            return x.lo == y.lo && x.hi == y.hi;
          },
          [](const Geometric& x, const Geometric& y) { return x.p == y.p; },
          [](const Discrete& x, const Discrete& y) {
            return x.atoms == y.atoms;
          },
          [](const Erlang& x, const Erlang& y) {
            return x.shape == y.shape && x.rate == y.rate;
          },
          [](const auto&, const auto&) { return false; },
      },
      a.kind(), b.kind());
}

double erlang_cdf(int k, double mu, double x) {
  if (k < 1) throw std::invalid_argument("erlang_cdf: k must be >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("erlang_cdf: mu must be > 0");
  if (x <= 0.0) return 0.0;
  const double y = mu * x;
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < k; ++j) {
    term *= y / j;
    sum += term;
  }
  return std::clamp(1.0 - std::exp(-y) * sum, 0.0, 1.0);
}

double cdf_eval(const DistributionSpec& spec, double x) {
  if (x < 0.0) return 0.0;
  return std::visit(
      overloaded{
          [x](const Exponential& e) { return -std::expm1(-e.rate * x); },
          [x](const Deterministic& d) { return x >= d.value ? 1.0 : 0.0; },
          [x](const Uniform& u) {
            return std::clamp((x - u.lo) / (u.hi - u.lo), 0.0, 1.0);
          },
          [x](const Geometric& g) {
            const double trials = std::floor(x);
            if (trials < 1.0) return 0.0;
            if (g.p >= 1.0) return 1.0;
            return -std::expm1(trials * std::log1p(-g.p));
          },
          [x](const Discrete& d) {
            double c = 0.0;
            for (const auto& [v, p] : d.atoms) {
              if (v <= x) c += p;
            }
            return std::min(c, 1.0);
          },
          [x](const Erlang& e) { return erlang_cdf(e.shape, e.rate, x); },
      },
      spec.kind());
}

double cdf_below(const DistributionSpec& spec, double x) {
  if (x <= 0.0) return 0.0;
  return std::visit(
      overloaded{
          [x](const Deterministic& d) { return x > d.value ? 1.0 : 0.0; },
          [x](const Geometric& g) {
            const double trials = std::ceil(x) - 1.0;
            if (trials < 1.0) return 0.0;
            if (g.p >= 1.0) return 1.0;
            return -std::expm1(trials * std::log1p(-g.p));
          },
          [x](const Discrete& d) {
            double c = 0.0;
            for (const auto& [v, p] : d.atoms) {
              if (v < x) c += p;
            }
            return std::min(c, 1.0);
          },
          [&spec, x](const auto&) { return cdf_eval(spec, x); },
      },
      spec.kind());
}

double sample(const DistributionSpec& spec, Rng& rng) {
  return std::visit(
      overloaded{
          [&rng](const Exponential& e) {
            return -std::log(rng.uniform_pos()) / e.rate;
          },
          [](const Deterministic& d) { return d.value; },
          [&rng](const Uniform& u) {
            return u.lo + (u.hi - u.lo) * rng.uniform();
          },
          [&rng](const Geometric& g) {
            if (g.p >= 1.0) return 1.0;
            const double u = rng.uniform_pos();
            return std::max(1.0, std::ceil(std::log(u) / std::log1p(-g.p)));
          },
          [&rng](const Discrete& d) {
            const double u = rng.uniform();
            double c = 0.0;
            for (const auto& [v, p] : d.atoms) {
              c += p;
              if (u < c) return v;
            }
            return d.atoms.back().first;
          },
          [&rng](const Erlang& e) {
            double s = 0.0;
            for (int i = 0; i < e.shape; ++i)
              s -= std::log(rng.uniform_pos());
            return s / e.rate;
          },
      },
      spec.kind());
}

void to_json(nlohmann::json& j, const DistributionSpec& spec) {
  std::visit(
      overloaded{
          [&j](const Exponential& e) {
            j = {{"kind", "exponential"}, {"rate", e.rate}};
          },
          [&j](const Deterministic& d) {
            j = {{"kind", "deterministic"}, {"value", d.value}};
          },
          [&j](const Uniform& u) {
            j = {{"kind", "uniform"}, {"lo", u.lo}, {"hi", u.hi}};
          },
          [&j](const Geometric& g) { j = {{"kind", "geometric"}, {"p", g.p}}; },
          [&j](const Discrete& d) {
            nlohmann::json atoms = nlohmann::json::array();
            for (const auto& [v, p] : d.atoms) atoms.push_back({v, p});
            j = {{"kind", "discrete"}, {"atoms", atoms}};
          },
          [&j](const Erlang& e) {
            j = {{"kind", "erlang"}, {"shape", e.shape}, {"rate", e.rate}};
          },
      },
      spec.kind());
}

DistributionSpec spec_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "exponential") {
    return DistributionSpec::exponential(j.at("rate").get<double>());
  }
  if (kind == "deterministic") {
    return DistributionSpec::deterministic(j.at("value").get<double>());
  }
  if (kind == "uniform") {
    return DistributionSpec::uniform(j.at("lo").get<double>(),
                                     j.at("hi").get<double>());
  }
  if (kind == "geometric") {
    return DistributionSpec::geometric(j.at("p").get<double>());
  }
  if (kind == "discrete") {
    std::vector<std::pair<double, double>> atoms;
    for (const auto& a : j.at("atoms")) {
      atoms.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
    }
    return DistributionSpec::discrete(std::move(atoms));
  }
  if (kind == "erlang") {
    return DistributionSpec::erlang(j.at("shape").get<int>(),
                                    j.at("rate").get<double>());
  }
  throw std::invalid_argument("unknown distribution kind '" + kind + "'");
}

void from_json(const nlohmann::json& j, DistributionSpec& spec) {
  spec = spec_from_json(j);
}

}  // namespace raring
