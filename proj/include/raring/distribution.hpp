#ifndef RARING_DISTRIBUTION_HPP_
#define RARING_DISTRIBUTION_HPP_

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "raring/rng.hpp"

namespace raring {

struct Exponential {
  double rate;
};
struct Deterministic {
  double value;
};
struct Uniform {
  double lo;
  double hi;
};
// Number of Bernoulli(p) trials up to and including the first success.
struct Geometric {
  double p;
};
struct Discrete {
  std::vector<std::pair<double, double>> atoms;  // (value, probability)
};
struct Erlang {
  int shape;
  double rate;
};

// Parametric law of a positive inter-arrival time or a positive integer jump.
class DistributionSpec {
 public:
  using Kind =
      std::variant<Exponential, Deterministic, Uniform, Geometric, Discrete,
                   Erlang>;

  // Throws std::invalid_argument when parameters violate the kind's domain.
  explicit DistributionSpec(Kind kind);

  static DistributionSpec exponential(double rate) {
    return DistributionSpec(Exponential{rate});
  }
  static DistributionSpec deterministic(double value) {
    return DistributionSpec(Deterministic{value});
  }
  static DistributionSpec uniform(double lo, double hi) {
    return DistributionSpec(Uniform{lo, hi});
  }
  static DistributionSpec geometric(double p) {
    return DistributionSpec(Geometric{p});
  }
  static DistributionSpec discrete(std::vector<std::pair<double, double>> atoms) {
    return DistributionSpec(Discrete{std::move(atoms)});
  }
  static DistributionSpec erlang(int shape, double rate) {
    return DistributionSpec(Erlang{shape, rate});
  }

  const Kind& kind() const { return kind_; }
  std::string kind_name() const;

  // True when the law has atoms only (deterministic, geometric, discrete).
  bool is_atomic() const;
  // True when every atom is a positive integer.
  bool is_integer_valued() const;

  double mean() const;

  friend bool operator==(const DistributionSpec& a, const DistributionSpec& b);

 private:
  Kind kind_;
};

bool operator==(const DistributionSpec& a, const DistributionSpec& b);

// P(X <= x).
double cdf_eval(const DistributionSpec& spec, double x);

// P(X < x).
double cdf_below(const DistributionSpec& spec, double x);

double sample(const DistributionSpec& spec, Rng& rng);

// Closed form 1 - exp(-mu x) sum_{j<k} (mu x)^j / j!.
double erlang_cdf(int k, double mu, double x);

void to_json(nlohmann::json& j, const DistributionSpec& spec);
void from_json(const nlohmann::json& j, DistributionSpec& spec);
DistributionSpec spec_from_json(const nlohmann::json& j);

}  // namespace raring

#endif  // RARING_DISTRIBUTION_HPP_
