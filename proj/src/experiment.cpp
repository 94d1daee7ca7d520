#include "raring/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "raring/limit_solver.hpp"
#include "raring/mutual.hpp"
#include "raring/parallel.hpp"
#include "raring/step_cdf.hpp"

namespace raring {

namespace {

using nlohmann::json;

// Standard deviation of the Kolmogorov distribution; sqrt(n) * KS converges
// to it under the null.
constexpr double kKolmogorovSd = 0.2603;

const std::map<ScenarioKind, std::string>& kind_names() {
  static const std::map<ScenarioKind, std::string> names = {
      {ScenarioKind::kTheorem1Geometric, "theorem1_geometric"},
      {ScenarioKind::kTheorem2PoissonExample, "theorem2_poisson_example"},
      {ScenarioKind::kEq6Identity, "eq6_identity"},
      {ScenarioKind::kStatementBoundSweep, "statement_bound_sweep"},
      {ScenarioKind::kMixingZeroCheck, "mixing_zero_check"},
      {ScenarioKind::kGfConsistency, "gf_consistency"},
  };
  return names;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

class Deadline {
 public:
  explicit Deadline(double seconds)
      : start_(std::chrono::steady_clock::now()), seconds_(seconds) {}
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }
  bool expired() const { return elapsed() > seconds_; }

 private:
  std::chrono::steady_clock::time_point start_;
  double seconds_;
};

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

// Conservative standard error of a TV estimate: half the summed per-cell
// standard deviations.
double tv_stderr(const std::vector<std::size_t>& counts, std::size_t total) {
  const double n = static_cast<double>(total);
  double s = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / n;
    s += std::sqrt(p * (1.0 - p) / n);
  }
  return 0.5 * s;
}

void finish(ExperimentReport& report) {
  report.passed = !report.incomplete && !report.checks.empty() &&
                  std::all_of(report.checks.begin(), report.checks.end(),
                              [](const ReportCheck& c) { return c.pass; });
}

void add_ladder_checks(ExperimentReport& report, const ScenarioConfig& config,
                       const std::vector<std::string>& probes) {
  for (const auto& probe : probes) {
    std::vector<double> column;
    for (const auto& row : report.rows) {
      if (row.probe == probe) column.push_back(row.distance);
    }
    if (column.empty()) continue;
    if (config.require_trend) {
      report.checks.push_back({"decreasing along ladder, " + probe,
                               strictly_decreasing(column),
                               json{{"distances", column}}});
    }
    report.checks.push_back(
        {"final ladder point within tolerance, " + probe,
         column.back() <= config.tolerance,
         json{{"distance", column.back()}, {"tolerance", config.tolerance}}});
  }
}

// --- theorem1_geometric ----------------------------------------------------

void run_theorem1(const ScenarioConfig& config, const Deadline& deadline,
                  ExperimentReport& report) {
  report.coverage = {"beta strictly increasing with beta(m) >= m",
                     "rarefied count v(c t) converges to the limit count law",
                     "geometric thinning limit is Poisson(t)"};
  const double t_max =
      *std::max_element(config.t_values.begin(), config.t_values.end());
  const std::size_t nt = config.t_values.size();
  std::vector<std::string> probes;
  for (double t : config.t_values) probes.push_back("t=" + fmt(t));

  json per_ladder = json::array();
  for (std::size_t p = 0; p < config.ladder.size(); ++p) {
    if (deadline.expired()) {
      report.incomplete = true;
      break;
    }
    const double c = config.ladder[p];
    const auto source = geometric_source(1.0 / c);
    std::vector<std::size_t> counts(config.replications * nt);
    parallel_for(config.replications, config.workers, [&](std::size_t i) {
      const auto beta = beta_sequence_past(
          *source, c * t_max, derive_seed(config.seed, 0x7431 + p, i));
      for (std::size_t q = 0; q < nt; ++q) {
        counts[i * nt + q] = rare_count(beta, c * config.t_values[q]);
      }
    });
    json cells = json::array();
    for (std::size_t q = 0; q < nt; ++q) {
      std::vector<std::size_t> hist;
      double mean = 0.0;
      for (std::size_t i = 0; i < config.replications; ++i) {
        const std::size_t k = counts[i * nt + q];
        if (hist.size() <= k) hist.resize(k + 1, 0);
        ++hist[k];
        mean += static_cast<double>(k);
      }
      mean /= static_cast<double>(config.replications);
      const double t = config.t_values[q];
      const auto ref = poisson_pmf(t, hist.size() + 60);
      const double tv = total_variation(hist, config.replications, ref);
      const double se = tv_stderr(hist, config.replications);
      report.rows.push_back({c, probes[q], tv, se, tv <= config.tolerance});
      cells.push_back({{"t", t}, {"mean_count", mean}, {"histogram", hist}});
    }
    per_ladder.push_back({{"c", c}, {"probes", cells}});
  }
  report.details = {{"ladder", per_ladder},
                    {"reference", "Poisson(t), the count law of a unit-rate "
                                  "renewal process with exponential(1) "
                                  "intervals"}};
  add_ladder_checks(report, config, probes);
}

// --- theorem2_poisson_example ----------------------------------------------

void run_theorem2(const ScenarioConfig& config, const Deadline& deadline,
                  ExperimentReport& report) {
  report.coverage = {
      "marking interleaving T''_0 = 0 < T'_1 <= T''_1 <= ...",
      "marked H-times scaled by lambda converge to the kth-event limit law",
      "argument scaling of the kth-event limit law"};
  const DistributionSpec& h = *config.h;
  const double mu = h.mean();
  const int k_top =
      *std::max_element(config.k_values.begin(), config.k_values.end());

  // G(x) = 1 - exp(-mu x) is the limit law of lambda * xi for a
  // Poisson(lambda) marking process.
  const double g_horizon = config.grid.horizon * std::max(1.0, 1.0 / mu);
  const StepCDF g =
      discretize(DistributionSpec::exponential(mu), config.grid.step, g_horizon);
  std::map<int, StepCDF> ref_scaled;  // G^{*k}(x / mu)
  std::map<int, StepCDF> ref_plain;   // G^{*k}(x)
  for (int k : config.k_values) {
    ref_scaled.emplace(k, kth_event_limit_law(g, g, k, 1.0 / mu));
    ref_plain.emplace(k, kth_event_limit_law(g, g, k, 1.0));
    const StepCDF& r = ref_scaled.at(k);
    if (r(config.grid.horizon) < 1.0 - kTailFlag)
      throw ConfigError("grid.horizon",
                        "limit law for k=" + std::to_string(k) +
                            " loses more than 0.01 mass on the grid");
  }

  std::vector<std::string> probes;
  for (int k : config.k_values) probes.push_back("k=" + std::to_string(k));

  json per_ladder = json::array();
  std::map<int, std::pair<double, double>> final_ks;
  for (std::size_t p = 0; p < config.ladder.size(); ++p) {
    if (deadline.expired()) {
      report.incomplete = true;
      break;
    }
    const double lambda = config.ladder[p];
    const auto z = DistributionSpec::exponential(lambda);
    const auto kk = static_cast<std::size_t>(k_top);
    std::vector<double> scaled(config.replications * kk);
    parallel_for(config.replications, config.workers, [&](std::size_t i) {
      const auto times = marked_times(h, z, kk,
                                      derive_seed(config.seed, 0x7432 + p, i));
      for (std::size_t k = 0; k < kk; ++k) {
        scaled[i * kk + k] = times[k] * lambda;
      }
    });
    json cells = json::array();
    for (std::size_t q = 0; q < config.k_values.size(); ++q) {
      const int k = config.k_values[q];
      std::vector<double> column(config.replications);
      for (std::size_t i = 0; i < config.replications; ++i) {
        column[i] = scaled[i * kk + static_cast<std::size_t>(k - 1)];
      }
      const EmpiricalCDF emp(std::move(column));
      const KsResult a = ks_distance(emp, ref_scaled.at(k));
      const KsResult b = ks_distance(emp, ref_plain.at(k));
      const double se =
          kKolmogorovSd / std::sqrt(static_cast<double>(config.replications));
      report.rows.push_back(
          {lambda, probes[q], a.distance, se, a.distance <= config.tolerance});
      cells.push_back({{"k", k},
                       {"ks_x_over_mu", a.distance},
                       {"ks_mu_free", b.distance},
                       {"truncated", a.truncated || b.truncated}});
      final_ks[k] = {a.distance, b.distance};
    }
    per_ladder.push_back({{"lambda", lambda}, {"probes", cells}});
  }
  add_ladder_checks(report, config, probes);

  json scaling = json::array();
  for (const auto& [k, ks] : final_ks) {
    const bool a_ok = ks.first <= config.scaling_tolerance;
    const bool b_ok = ks.second <= config.scaling_tolerance;
    std::string winner;
    if (mu == 1.0) {
      winner = "indistinguishable (mean inter-arrival is 1)";
    } else if (a_ok && !b_ok) {
      winner = "G^{*k}(x/mu), mu = E[eta]";
    } else if (b_ok && !a_ok) {
      winner = "G^{*k}(x), mu-free";
    } else {
      winner = a_ok ? "both" : "neither";
    }
    scaling.push_back({{"k", k},
                       {"ks_x_over_mu", ks.first},
                       {"ks_mu_free", ks.second},
                       {"winner", winner}});
    if (mu != 1.0) {
      report.checks.push_back(
          {"exactly one argument scaling matches, k=" + std::to_string(k),
           a_ok != b_ok,
           json{{"winner", winner},
                {"ks_x_over_mu", ks.first},
                {"ks_mu_free", ks.second},
                {"tolerance", config.scaling_tolerance}}});
    }
  }
  report.details = {{"mu", mu},
                    {"G", "1 - exp(-mu x), mu = E[eta]"},
                    {"ladder", per_ladder},
                    {"scaling", scaling}};
}

// --- eq6_identity ----------------------------------------------------------

void run_eq6(const ScenarioConfig& config, const Deadline& deadline,
             ExperimentReport& report) {
  report.coverage = {"P(xi(l) <= m) equals P(gamma_Z(tau_l) < eta_{l+1} + "
                     "... + eta_{l+m})",
                     "chi/xi consistency of the marking"};
  struct Probe {
    std::int64_t l;
    std::int64_t m;
  };
  std::vector<Probe> probes;
  for (auto l : config.sites)
    for (auto m : config.levels) probes.push_back({l, m});
  std::vector<Estimate> formula(probes.size());
  std::vector<Estimate> direct(probes.size());
  std::vector<char> done(probes.size(), 0);
  parallel_for(probes.size(), config.workers, [&](std::size_t q) {
    if (deadline.expired()) return;
    formula[q] = xi_cdf_formula(*config.h, *config.z, probes[q].l, probes[q].m,
                                config.replications,
                                derive_seed(config.seed, 0x6531, q));
    direct[q] = xi_cdf_direct(*config.h, *config.z, probes[q].l, probes[q].m,
                              config.replications,
                              derive_seed(config.seed, 0x6532, q));
    done[q] = 1;
  });
  json cells = json::array();
  std::size_t failures = 0;
  for (std::size_t q = 0; q < probes.size(); ++q) {
    if (!done[q]) {
      report.incomplete = true;
      continue;
    }
    const double diff = std::abs(formula[q].value - direct[q].value);
    const double se = std::hypot(formula[q].stderr_, direct[q].stderr_);
    const bool pass = diff <= 3.0 * se;
    if (!pass) ++failures;
    const std::string probe = "m=" + std::to_string(probes[q].m);
    report.rows.push_back(
        {static_cast<double>(probes[q].l), probe, diff, se, pass});
    cells.push_back({{"l", probes[q].l},
                     {"m", probes[q].m},
                     {"formula", formula[q].value},
                     {"formula_stderr", formula[q].stderr_},
                     {"direct", direct[q].value},
                     {"direct_stderr", direct[q].stderr_}});
  }
  report.checks.push_back({"formula and direct estimates agree within 3 sigma",
                           failures == 0 && !report.incomplete,
                           json{{"failures", failures}}});
  report.details = {{"probes", cells}};
}

// --- statement_bound_sweep -------------------------------------------------

struct SweepCase {
  std::unique_ptr<XiSource> source;
  std::int64_t m;
  double x;
};

SweepCase random_case(Rng& rng) {
  const auto uniform_int = [&rng](std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    rng.uniform() * static_cast<double>(hi - lo + 1));
  };
  SweepCase c;
  switch (uniform_int(0, 3)) {
    case 0:
      c.source = geometric_source(0.05 + 0.95 * rng.uniform_pos());
      break;
    case 1: {
      const auto support = uniform_int(1, 6);
      std::vector<double> w(static_cast<std::size_t>(support));
      double total = 0.0;
      for (double& v : w) total += (v = 0.05 + rng.uniform());
      std::vector<std::pair<double, double>> atoms;
      double acc = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double p = i + 1 == w.size() ? 1.0 - acc : w[i] / total;
        acc += p;
        atoms.emplace_back(static_cast<double>(i + 1), p);
      }
      c.source = std::make_unique<ParametricSource>(
          DistributionSpec::discrete(std::move(atoms)));
      break;
    }
    case 2: {
      const auto cap = uniform_int(3, 20);
      const auto margin = uniform_int(1, cap - 1);
      const auto inner = geometric_source(0.02 + 0.48 * rng.uniform_pos());
      c.source = truncate_source(*inner, cap, margin);
      break;
    }
    default:
      c.source = std::make_unique<ParametricSource>(
          DistributionSpec::geometric(0.05 + 0.95 * rng.uniform_pos()),
          DistributionSpec::geometric(0.05 + 0.95 * rng.uniform_pos()));
      break;
  }
  c.m = uniform_int(1, 10);
  c.x = 1.0 + 39.0 * rng.uniform();
  return c;
}

void run_statement_sweep(const ScenarioConfig& config, const Deadline& deadline,
                         ExperimentReport& report) {
  report.coverage = {"P(beta(m) < x) <= max_t P(xi(t) < x/m) ([x] + 1)"};
  Rng rng(derive_seed(config.seed, 0x5357));
  std::vector<SweepCase> cases;
  for (std::size_t c = 0; c < config.configs; ++c) {
    cases.push_back(random_case(rng));
  }
  std::vector<BoundCheckReport> results(cases.size());
  std::vector<char> done(cases.size(), 0);
  parallel_for(cases.size(), config.workers, [&](std::size_t c) {
    if (deadline.expired()) return;
    results[c] =
        check_statement_bound(*cases[c].source, cases[c].m, cases[c].x,
                              config.replications,
                              derive_seed(config.seed, 0x5358, c));
    done[c] = 1;
  });
  json cells = json::array();
  std::size_t violations = 0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    if (!done[c]) {
      report.incomplete = true;
      continue;
    }
    const auto& r = results[c];
    if (!r.pass) ++violations;
    report.rows.push_back({static_cast<double>(c),
                           "m=" + std::to_string(r.m) + ";x=" + fmt(r.x),
                           r.empirical, r.stderr_, r.pass});
    cells.push_back(r);
  }
  report.checks.push_back({"no violation beyond 3 sigma",
                           violations == 0 && !report.incomplete,
                           json{{"violations", violations},
                                {"configs", cases.size()}}});
  report.details = {{"configs", cells}};
}

// --- mixing_zero_check -----------------------------------------------------

void run_mixing(const ScenarioConfig& config, const Deadline& deadline,
                ExperimentReport& report) {
  report.coverage = {
      "threshold events of the derived xi-source at sites l and l + r with "
      "m < r are independent"};
  const MarkingSource source(*config.h, *config.z);
  std::vector<MixingEstimate> results(config.repetitions);
  std::vector<char> done(config.repetitions, 0);
  parallel_for(config.repetitions, config.workers, [&](std::size_t r) {
    if (deadline.expired()) return;
    results[r] = estimate_mixing(source, config.lag, config.family,
                                 config.replications,
                                 derive_seed(config.seed, 0x4d31, r));
    done[r] = 1;
  });
  std::size_t below = 0;
  json cells = json::array();
  for (std::size_t r = 0; r < config.repetitions; ++r) {
    if (!done[r]) {
      report.incomplete = true;
      continue;
    }
    const auto& e = results[r];
    const bool pass = e.estimate <= 3.0 * e.stderr_;
    if (pass) ++below;
    report.rows.push_back(
        {static_cast<double>(r), "lag=" + std::to_string(config.lag),
         e.estimate, e.stderr_, pass});
    cells.push_back(e);
  }
  report.checks.push_back(
      {"dependence estimate within 3 stderr in enough repetitions",
       below >= config.min_passing && !report.incomplete,
       json{{"within", below},
            {"repetitions", config.repetitions},
            {"required", config.min_passing}}});
  report.details = {{"estimates", cells},
                    {"source", source.describe()},
                    {"note", "each estimate is a lower bound of the mixing "
                             "coefficient over the declared event family"}};
}

// --- gf_consistency ---------------------------------------------------------

void run_gf(const ScenarioConfig& config, const Deadline& deadline,
            ExperimentReport& report) {
  report.coverage = {
      "pgf of the limit count pmf equals the delayed generating function",
      "fixed-point iteration and series solutions agree",
      "exponential laws reduce to Poisson closed forms"};
  const double h = config.grid.step;
  std::vector<StepCDF> laws;
  for (const auto& spec : config.laws) {
    laws.push_back(discretize(spec, h, config.grid.horizon));
  }
  const std::size_t nl = laws.size();
  const std::size_t pairs = nl * nl;
  std::vector<std::vector<ReportRow>> rows(pairs);
  std::vector<json> details(pairs);
  std::vector<char> done(pairs, 0);

  parallel_for(pairs, config.workers, [&](std::size_t pi) {
    if (deadline.expired()) return;
    const std::size_t a = pi / nl;
    const std::size_t b = pi % nl;
    const std::string tag = "R1=" + config.laws[a].kind_name() + std::to_string(a) +
                            ";R2=" + config.laws[b].kind_name() + std::to_string(b);
    std::vector<CountPmf> pmfs;
    for (double t : config.t_values) {
      pmfs.push_back(limit_count_pmf(laws[a], laws[b], t, config.k_max));
    }
    json d = {{"R1", config.laws[a]}, {"R2", config.laws[b]}};
    json literal_gaps = json::array();
    const bool closed = a == b &&
        std::holds_alternative<Exponential>(config.laws[a].kind());
    const double rate =
        closed ? std::get<Exponential>(config.laws[a].kind()).rate : 0.0;
    for (double s : config.s_values) {
      const GFSlice g = solve_g(laws[a], laws[b], s, SolveMode::kIteration);
      const GFSlice g_series = solve_g(laws[a], laws[b], s, SolveMode::kSeries);
      const GFSlice g_literal = solve_g(laws[a], laws[b], s,
                                        SolveMode::kIteration,
                                        DelayedForm::kLiteral);
      double literal_gap = 0.0;
      double mode_gap = 0.0;
      for (std::size_t j = 0; j < g.values.size(); ++j) {
        mode_gap = std::max(mode_gap, std::abs(g.values[j] - g_series.values[j]));
      }
      rows[pi].push_back({static_cast<double>(pi),
                          tag + ";s=" + fmt(s) + ";mode-gap", mode_gap, 0.0,
                          mode_gap <= 1e-8});
      for (std::size_t q = 0; q < pmfs.size(); ++q) {
        const double t = config.t_values[q];
        const std::string probe = tag + ";s=" + fmt(s) + ";t=" + fmt(t);
        if (pmfs[q].flagged) {
          rows[pi].push_back({static_cast<double>(pi), probe, 1.0, 0.0, false});
          continue;
        }
        const PgfValue pgf = pgf_from_pmf(pmfs[q], s);
        const double diff = std::abs(pgf.value - g(t));
        literal_gap = std::max(literal_gap, std::abs(pgf.value - g_literal(t)));
        rows[pi].push_back({static_cast<double>(pi), probe, diff, 0.0,
                            diff <= 10.0 * h + pgf.error});
      }
      literal_gaps.push_back({{"s", s}, {"max_gap", literal_gap}});
      if (closed) {
        double worst = 0.0;
        for (std::size_t j = 0; j < g.values.size(); ++j) {
          const double exact = std::exp(-rate * g.grid.at(j) * (1.0 - s));
          worst = std::max(worst, std::abs(g.values[j] - exact));
        }
        rows[pi].push_back({static_cast<double>(pi),
                            tag + ";s=" + fmt(s) + ";closed-form-g", worst, 0.0,
                            worst <= 1e-3});
      }
    }
    if (closed) {
      for (std::size_t q = 0; q < pmfs.size(); ++q) {
        const double t = config.t_values[q];
        const auto ref = poisson_pmf(rate * t, pmfs[q].p.size() - 1);
        double worst = 0.0;
        for (std::size_t k = 0; k < pmfs[q].p.size(); ++k) {
          worst = std::max(worst, std::abs(pmfs[q].p[k] - ref[k]));
        }
        rows[pi].push_back({static_cast<double>(pi),
                            tag + ";t=" + fmt(t) + ";closed-form-pmf", worst,
                            0.0, worst <= 10.0 * h});
      }
    }
    json tails = json::array();
    for (const auto& p : pmfs) tails.push_back({{"t", p.t}, {"tail", p.tail}});
    d["pmf_tails"] = tails;
    d["literal_form_gap"] = literal_gaps;
    details[pi] = d;
    done[pi] = 1;
  });

  std::size_t failures = 0;
  json cells = json::array();
  for (std::size_t pi = 0; pi < pairs; ++pi) {
    if (!done[pi]) {
      report.incomplete = true;
      continue;
    }
    for (auto& row : rows[pi]) {
      if (!row.pass) ++failures;
      report.rows.push_back(std::move(row));
    }
    cells.push_back(details[pi]);
  }
  report.checks.push_back(
      {"generating function consistency within 10 h + tail mass",
       failures == 0 && !report.incomplete, json{{"failures", failures}}});
  report.details = {{"pairs", cells}, {"step", h}};
}

// --- JSON helpers -------------------------------------------------------------

template <class T>
T field(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, std::string("wrong type: ") + e.what());
  }
}

DistributionSpec spec_field(const json& j, const std::string& key) {
  try {
    return spec_from_json(j.at(key));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

std::string to_string(ScenarioKind kind) { return kind_names().at(kind); }

ScenarioKind scenario_kind_from_string(const std::string& name) {
  for (const auto& [kind, n] : kind_names()) {
    if (n == name) return kind;
  }
  throw ConfigError("kind", "unknown scenario kind '" + name + "'");
}

void ScenarioConfig::validate() const {
  if (replications < 1) throw ConfigError("replications", "must be >= 1");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
  if (!(runtime_cap_seconds > 0.0))
    throw ConfigError("runtime_cap_seconds", "must be > 0");
  if (!(grid.step > 0.0)) throw ConfigError("grid.step", "must be > 0");
  if (!(grid.horizon >= grid.step))
    throw ConfigError("grid.horizon", "must be >= grid.step");
  if (!(tolerance >= 0.0)) throw ConfigError("tolerance", "must be >= 0");

  const auto need_ladder = [this](bool lambda) {
    if (ladder.empty()) throw ConfigError("ladder", "empty ladder");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      if (!(ladder[i] > 0.0)) throw ConfigError("ladder", "values must be > 0");
      if (i > 0 && (lambda ? !(ladder[i] < ladder[i - 1])
                           : !(ladder[i] > ladder[i - 1])))
        throw ConfigError("ladder", lambda
                                        ? "lambda_n must strictly decrease"
                                        : "c_n must strictly increase");
    }
  };
  const auto need_spec = [](const std::optional<DistributionSpec>& s,
                            const char* name) {
    if (!s) throw ConfigError(name, "missing distribution");
  };

  switch (kind) {
    case ScenarioKind::kTheorem1Geometric:
      need_ladder(false);
      for (double c : ladder)
        if (!(c >= 1.0)) throw ConfigError("ladder", "c_n must be >= 1");
      if (t_values.empty()) throw ConfigError("t_values", "empty probe grid");
      for (double t : t_values)
        if (!(t > 0.0)) throw ConfigError("t_values", "must be > 0");
      break;
    case ScenarioKind::kTheorem2PoissonExample:
      need_ladder(true);
      need_spec(h, "h");
      if (k_values.empty()) throw ConfigError("k_values", "empty probe grid");
      for (int k : k_values)
        if (k < 1) throw ConfigError("k_values", "must be >= 1");
      break;
    case ScenarioKind::kEq6Identity:
      need_spec(h, "h");
      need_spec(z, "z");
      if (sites.empty()) throw ConfigError("sites", "empty probe grid");
      if (levels.empty()) throw ConfigError("levels", "empty probe grid");
      for (auto l : sites)
        if (l < 0) throw ConfigError("sites", "must be >= 0");
      for (auto m : levels)
        if (m < 1) throw ConfigError("levels", "must be >= 1");
      break;
    case ScenarioKind::kStatementBoundSweep:
      if (configs < 1) throw ConfigError("configs", "must be >= 1");
      if (replications < 1000)
        throw ConfigError("replications", "must be >= 1000");
      break;
    case ScenarioKind::kMixingZeroCheck:
      need_spec(h, "h");
      need_spec(z, "z");
      if (repetitions < 1) throw ConfigError("repetitions", "must be >= 1");
      if (min_passing > repetitions)
        throw ConfigError("min_passing", "exceeds repetitions");
      if (lag < 1) throw ConfigError("lag", "must be >= 1");
      if (replications < 2) throw ConfigError("replications", "must be >= 2");
      if (family.empty()) throw ConfigError("family", "empty event family");
      for (const auto& p : family) {
        const auto r = p.future_site - p.past_site;
        if (p.past_site < 0 || r < lag)
          throw ConfigError("family", "sites must be at least `lag` apart");
        if (!(p.past_level < r))
          throw ConfigError("family", "past level m must be < separation r");
      }
      break;
    case ScenarioKind::kGfConsistency:
      if (laws.empty()) throw ConfigError("laws", "no candidate laws");
      if (s_values.empty()) throw ConfigError("s_values", "empty probe grid");
      if (t_values.empty()) throw ConfigError("t_values", "empty probe grid");
      for (double s : s_values)
        if (!(s > 0.0 && s <= 1.0)) throw ConfigError("s_values", "s in (0, 1]");
      for (double t : t_values)
        if (!(t >= 0.0 && t <= grid.horizon))
          throw ConfigError("t_values", "t must lie in [0, grid.horizon]");
      if (k_max < 1) throw ConfigError("k_max", "must be >= 1");
      break;
  }
}

ScenarioConfig default_config(ScenarioKind kind) {
  ScenarioConfig c;
  c.kind = kind;
  switch (kind) {
    case ScenarioKind::kTheorem1Geometric:
      c.ladder = {10, 100, 1000};
      c.t_values = {2.0};
      c.replications = 100000;
      c.tolerance = 0.02;
      break;
    case ScenarioKind::kTheorem2PoissonExample:
      c.ladder = {0.1, 0.01, 0.001};
      c.k_values = {1};
      c.h = DistributionSpec::exponential(1.0);
      c.replications = 20000;
      c.tolerance = 0.02;
      c.grid = {1e-3, 25.0};
      break;
    case ScenarioKind::kEq6Identity:
      c.h = DistributionSpec::exponential(1.0);
      c.z = DistributionSpec::exponential(0.1);
      c.sites = {0, 5, 20};
      c.levels = {1, 5, 10, 50};
      c.replications = 10000;
      break;
    case ScenarioKind::kStatementBoundSweep:
      c.configs = 100;
      c.replications = 10000;
      break;
    case ScenarioKind::kMixingZeroCheck:
      c.h = DistributionSpec::exponential(1.0);
      c.z = DistributionSpec::exponential(0.1);
      c.repetitions = 20;
      c.min_passing = 19;
      c.lag = 5;
      c.family = {{0, 3, 5, 4}, {10, 4, 15, 10}};
      c.replications = 10000;
      break;
    case ScenarioKind::kGfConsistency:
      c.laws = {DistributionSpec::exponential(1.0),
                DistributionSpec::deterministic(1.0),
                DistributionSpec::uniform(0.5, 1.5)};
      c.s_values = {0.2, 0.5, 0.8};
      c.t_values = {1.0, 2.0, 5.0};
      c.grid = {1e-3, 5.0};
      c.k_max = 60;
      c.replications = 1;
      break;
  }
  return c;
}

nlohmann::json to_json_config(const ScenarioConfig& c) {
  json j = {{"kind", to_string(c.kind)},
            {"seed", c.seed},
            {"replications", c.replications},
            {"runtime_cap_seconds", c.runtime_cap_seconds},
            {"grid", {{"step", c.grid.step}, {"horizon", c.grid.horizon}}},
            {"tolerance", c.tolerance},
            {"require_trend", c.require_trend}};
  switch (c.kind) {
    case ScenarioKind::kTheorem1Geometric:
      j["ladder"] = c.ladder;
      j["t_values"] = c.t_values;
      break;
    case ScenarioKind::kTheorem2PoissonExample:
      j["ladder"] = c.ladder;
      j["k_values"] = c.k_values;
      j["h"] = *c.h;
      j["scaling_tolerance"] = c.scaling_tolerance;
      break;
    case ScenarioKind::kEq6Identity:
      j["h"] = *c.h;
      j["z"] = *c.z;
      j["sites"] = c.sites;
      j["levels"] = c.levels;
      break;
    case ScenarioKind::kStatementBoundSweep:
      j["configs"] = c.configs;
      break;
    case ScenarioKind::kMixingZeroCheck:
      j["h"] = *c.h;
      j["z"] = *c.z;
      j["repetitions"] = c.repetitions;
      j["min_passing"] = c.min_passing;
      j["lag"] = c.lag;
      j["family"] = c.family;
      break;
    case ScenarioKind::kGfConsistency:
      j["laws"] = c.laws;
      j["s_values"] = c.s_values;
      j["t_values"] = c.t_values;
      j["k_max"] = c.k_max;
      break;
  }
  return j;
}

ScenarioConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be an object");
  if (!j.contains("kind")) throw ConfigError("kind", "missing");
  ScenarioConfig c =
      default_config(scenario_kind_from_string(field<std::string>(j, "kind", "")));
  c.seed = field(j, "seed", c.seed);
  if (j.contains("replications")) {
    const auto r = field<long long>(j, "replications", 0);
    if (r < 1) throw ConfigError("replications", "must be >= 1");
    c.replications = static_cast<std::size_t>(r);
  }
  if (j.contains("workers")) {
    const auto w = field<long long>(j, "workers", 0);
    if (w < 1) throw ConfigError("workers", "must be >= 1");
    c.workers = static_cast<std::size_t>(w);
  }
  c.runtime_cap_seconds = field(j, "runtime_cap_seconds", c.runtime_cap_seconds);
  c.output_dir = field(j, "output_dir", c.output_dir);
  c.ladder = field(j, "ladder", c.ladder);
  c.t_values = field(j, "t_values", c.t_values);
  c.k_values = field(j, "k_values", c.k_values);
  c.s_values = field(j, "s_values", c.s_values);
  c.sites = field(j, "sites", c.sites);
  c.levels = field(j, "levels", c.levels);
  if (j.contains("h")) c.h = spec_field(j, "h");
  if (j.contains("z")) c.z = spec_field(j, "z");
  if (j.contains("laws")) {
    c.laws.clear();
    for (const auto& l : j.at("laws")) {
      try {
        c.laws.push_back(spec_from_json(l));
      } catch (const std::exception& e) {
        throw ConfigError("laws", e.what());
      }
    }
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    c.grid.step = field(g, "step", c.grid.step);
    c.grid.horizon = field(g, "horizon", c.grid.horizon);
  }
  c.k_max = field(j, "k_max", c.k_max);
  c.tolerance = field(j, "tolerance", c.tolerance);
  c.require_trend = field(j, "require_trend", c.require_trend);
  c.scaling_tolerance = field(j, "scaling_tolerance", c.scaling_tolerance);
  if (j.contains("configs")) {
    const auto n = field<long long>(j, "configs", 0);
    if (n < 1) throw ConfigError("configs", "must be >= 1");
    c.configs = static_cast<std::size_t>(n);
  }
  if (j.contains("repetitions")) {
    const auto n = field<long long>(j, "repetitions", 0);
    if (n < 1) throw ConfigError("repetitions", "must be >= 1");
    c.repetitions = static_cast<std::size_t>(n);
  }
  c.min_passing = field(j, "min_passing", c.min_passing);
  c.lag = field(j, "lag", c.lag);
  if (j.contains("family")) {
    c.family.clear();
    for (const auto& p : j.at("family")) {
      try {
        c.family.push_back({p.at("past_site").get<Site>(),
                            p.at("past_level").get<std::int64_t>(),
                            p.at("future_site").get<Site>(),
                            p.at("future_level").get<std::int64_t>()});
      } catch (const json::exception& e) {
        throw ConfigError("family", e.what());
      }
    }
  }
  c.validate();
  return c;
}

void to_json(nlohmann::json& j, const ExperimentReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"ladder", row.ladder},
                    {"probe", row.probe},
                    {"distance", row.distance},
                    {"stderr", row.stderr_},
                    {"pass", row.pass}});
  }
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  j = {{"kind", r.kind},       {"seed", r.seed},
       {"config", r.config},   {"rows", rows},
       {"checks", checks},     {"coverage", r.coverage},
       {"details", r.details}, {"incomplete", r.incomplete},
       {"passed", r.passed}};
}

void from_json(const nlohmann::json& j, ExperimentReport& r) {
  r.kind = j.at("kind").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config = j.at("config");
  r.rows.clear();
  for (const auto& row : j.at("rows")) {
    r.rows.push_back({row.at("ladder").get<double>(),
                      row.at("probe").get<std::string>(),
                      row.at("distance").get<double>(),
                      row.at("stderr").get<double>(),
                      row.at("pass").get<bool>()});
  }
  r.checks.clear();
  for (const auto& c : j.at("checks")) {
    r.checks.push_back(
        {c.at("name").get<std::string>(), c.at("pass").get<bool>(),
         c.at("detail")});
  }
  r.coverage = j.at("coverage").get<std::vector<std::string>>();
  r.details = j.at("details");
  r.incomplete = j.at("incomplete").get<bool>();
  r.passed = j.at("passed").get<bool>();
}

ExperimentReport run_scenario(const ScenarioConfig& config,
                              double* elapsed_seconds) {
  config.validate();
  const Deadline deadline(config.runtime_cap_seconds);
  ExperimentReport report;
  report.kind = to_string(config.kind);
  report.seed = config.seed;
  report.config = to_json_config(config);
  switch (config.kind) {
    case ScenarioKind::kTheorem1Geometric:
      run_theorem1(config, deadline, report);
      break;
    case ScenarioKind::kTheorem2PoissonExample:
      run_theorem2(config, deadline, report);
      break;
    case ScenarioKind::kEq6Identity:
      run_eq6(config, deadline, report);
      break;
    case ScenarioKind::kStatementBoundSweep:
      run_statement_sweep(config, deadline, report);
      break;
    case ScenarioKind::kMixingZeroCheck:
      run_mixing(config, deadline, report);
      break;
    case ScenarioKind::kGfConsistency:
      run_gf(config, deadline, report);
      break;
  }
  finish(report);
  if (elapsed_seconds) *elapsed_seconds = deadline.elapsed();
  return report;
}

ConvergenceTable convergence_table(const ExperimentReport& report) {
  ConvergenceTable t;
  for (const auto& row : report.rows) {
    if (std::find(t.ladder.begin(), t.ladder.end(), row.ladder) ==
        t.ladder.end())
      t.ladder.push_back(row.ladder);
    if (std::find(t.probes.begin(), t.probes.end(), row.probe) ==
        t.probes.end())
      t.probes.push_back(row.probe);
  }
  if (t.probes.empty())
    throw std::invalid_argument("convergence_table: empty probe grid");
  if (t.ladder.size() < 2)
    throw std::invalid_argument(
        "convergence_table: need at least two ladder points");
  t.cells.assign(t.ladder.size(),
                 std::vector<ReportRow>(t.probes.size(),
                                        ReportRow{0.0, "", NAN, NAN, false}));
  for (const auto& row : report.rows) {
    const auto r = static_cast<std::size_t>(
        std::find(t.ladder.begin(), t.ladder.end(), row.ladder) -
        t.ladder.begin());
    const auto c = static_cast<std::size_t>(
        std::find(t.probes.begin(), t.probes.end(), row.probe) -
        t.probes.begin());
    t.cells[r][c] = row;
  }
  for (std::size_t c = 0; c < t.probes.size(); ++c) {
    std::vector<double> column;
    for (std::size_t r = 0; r < t.ladder.size(); ++r)
      column.push_back(t.cells[r][c].distance);
    t.decreasing.push_back(strictly_decreasing(column));
  }
  return t;
}

std::string format_table(const ConvergenceTable& t) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "ladder";
  for (const auto& p : t.probes) os << std::setw(26) << p;
  os << '\n';
  for (std::size_t r = 0; r < t.ladder.size(); ++r) {
    os << std::setw(14) << fmt(t.ladder[r]);
    for (const auto& cell : t.cells[r]) {
      std::ostringstream c;
      c << std::setprecision(4) << cell.distance << " +- "
        << std::setprecision(2) << cell.stderr_;
      os << std::setw(26) << c.str();
    }
    os << '\n';
  }
  os << std::setw(14) << "decreasing";
  for (bool d : t.decreasing) os << std::setw(26) << (d ? "yes" : "no");
  os << '\n';
  return os.str();
}

std::string report_csv_table(const ExperimentReport& report) {
  std::ostringstream os;
  os << "ladder,probe,distance,stderr,pass\n";
  for (const auto& row : report.rows) {
    os << json(row.ladder).dump() << ',' << row.probe << ','
       << json(row.distance).dump() << ',' << json(row.stderr_).dump() << ','
       << (row.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> emit_report(
    const ExperimentReport& report, ReportFormat format,
    const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create " + dir.string() + ": " +
                             ec.message());
  const std::string stem =
      report.kind + "_seed" + std::to_string(report.seed);
  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::kJson) {
    const auto path = dir / (stem + ".json");
    write_file(path, json(report).dump(2) + "\n");
    written.push_back(path);
  } else {
    const auto table = dir / (stem + "_table.csv");
    write_file(table, report_csv_table(report));
    written.push_back(table);
    std::ostringstream os;
    os << "name,pass\n";
    for (const auto& c : report.checks) {
      os << '"' << c.name << "\"," << (c.pass ? "true" : "false") << '\n';
    }
    const auto checks = dir / (stem + "_checks.csv");
    write_file(checks, os.str());
    written.push_back(checks);
  }
  return written;
}

std::unique_ptr<XiSource> source_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "geometric") return geometric_source(j.at("p").get<double>());
  if (kind == "constant") return constant_source(j.at("value").get<std::int64_t>());
  if (kind == "parametric") {
    std::optional<DistributionSpec> first;
    if (j.contains("first")) first = spec_from_json(j.at("first"));
    return std::make_unique<ParametricSource>(spec_from_json(j.at("law")),
                                              std::move(first));
  }
  if (kind == "coupled") {
    return std::make_unique<CoupledSource>(spec_from_json(j.at("law")));
  }
  if (kind == "truncated") {
    const auto inner = source_from_json(j.at("inner"));
    return truncate_source(*inner, j.at("c").get<std::int64_t>(),
                           j.at("r").get<std::int64_t>());
  }
  if (kind == "marking") {
    return std::make_unique<MarkingSource>(spec_from_json(j.at("h")),
                                           spec_from_json(j.at("z")));
  }
  throw std::invalid_argument("unknown xi-source kind '" + kind + "'");
}

double total_variation(const std::vector<std::size_t>& counts,
                       std::size_t total, const std::vector<double>& ref) {
  if (total == 0) throw std::invalid_argument("total_variation: empty sample");
  const double n = static_cast<double>(total);
  double sum = 0.0;
  double ref_seen = 0.0;
  const std::size_t len = std::max(counts.size(), ref.size());
  for (std::size_t k = 0; k < len; ++k) {
    const double p = k < counts.size() ? static_cast<double>(counts[k]) / n : 0.0;
    const double q = k < ref.size() ? ref[k] : 0.0;
    ref_seen += q;
    sum += std::abs(p - q);
  }
  sum += std::max(0.0, 1.0 - ref_seen);
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

std::vector<double> poisson_pmf(double mean, std::size_t k_max) {
  std::vector<double> p(k_max + 1, 0.0);
  if (mean == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (std::size_t k = 0; k <= k_max; ++k) {
    p[k] = std::exp(static_cast<double>(k) * std::log(mean) - mean -
                    std::lgamma(static_cast<double>(k) + 1.0));
  }
  return p;
}

}  // namespace raring
