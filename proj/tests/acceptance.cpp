// Acceptance run: one PASS/FAIL line per criterion.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "raring/experiment.hpp"
#include "raring/mutual.hpp"
#include "raring/raring_core.hpp"

using namespace raring;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, const std::string& name, bool pass,
             const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

const ReportCheck* find_check(const ExperimentReport& r,
                              const std::string& prefix) {
  for (const auto& c : r.checks)
    if (c.name.rfind(prefix, 0) == 0) return &c;
  return nullptr;
}

std::string column(const ExperimentReport& r) {
  std::ostringstream os;
  os.precision(4);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (i) os << " -> ";
    os << r.rows[i].distance;
  }
  return os.str();
}

struct Run {
  ScenarioConfig config;
  ExperimentReport report;
  double seconds = 0.0;
};

Run run(const ScenarioConfig& config) {
  Run r{config, {}, 0.0};
  r.report = run_scenario(config, &r.seconds);
  return r;
}

ScenarioConfig theorem2(double h_rate, int k, double tol, bool trend,
                        double horizon) {
  auto c = default_config(ScenarioKind::kTheorem2PoissonExample);
  c.h = DistributionSpec::exponential(h_rate);
  c.ladder = {0.1, 0.01, 0.001};
  c.k_values = {k};
  c.replications = 20'000;
  c.tolerance = tol;
  c.require_trend = trend;
  c.scaling_tolerance = 0.03;
  c.grid = {1e-3, horizon};
  return c;
}

bool criterion10_interleaving(std::string& detail) {
  const std::vector<std::pair<DistributionSpec, DistributionSpec>> laws = {
      {DistributionSpec::exponential(1.0), DistributionSpec::exponential(0.1)},
      {DistributionSpec::exponential(1.0), DistributionSpec::exponential(3.0)},
      {DistributionSpec::uniform(0.5, 1.5), DistributionSpec::exponential(0.5)},
      {DistributionSpec::erlang(2, 2.0), DistributionSpec::uniform(0.1, 4.0)},
  };
  std::size_t pairs = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto& [h, z] = laws[i % laws.size()];
    const auto rec = mark(sample_path(h, 200.0, Rng(derive_seed(10, 1, i))),
                          sample_path(z, 200.0, Rng(derive_seed(10, 2, i))));
    const auto& tpp = rec.t_doubleprime;
    const auto& tp = rec.t_prime;
    if (tpp.empty() || tpp[0] != 0.0) return false;
    if (!tp.empty() && !(tp[0] > 0.0)) return false;
    for (std::size_t n = 1; n < tpp.size(); ++n) {
      if (n > tp.size() || !(tp[n - 1] <= tpp[n])) return false;
      if (n < tp.size() && !(tpp[n] <= tp[n])) return false;
    }
    ++pairs;
  }
  detail += std::to_string(pairs) + " path pairs interleave";
  return pairs == 1000;
}

bool criterion10_beta(std::string& detail) {
  std::vector<std::unique_ptr<XiSource>> sources;
  sources.push_back(geometric_source(0.3));
  sources.push_back(geometric_source(1.0));
  sources.push_back(truncate_source(*geometric_source(0.05), 12, 4));
  sources.push_back(std::make_unique<ParametricSource>(
      DistributionSpec::uniform(0.5, 6.0), DistributionSpec::geometric(0.1)));
  sources.push_back(std::make_unique<CoupledSource>(
      DistributionSpec::discrete({{1.0, 0.5}, {2.0, 0.5}})));
  sources.push_back(std::make_unique<MarkingSource>(
      DistributionSpec::exponential(1.0), DistributionSpec::exponential(0.1)));
  std::size_t realizations = 0;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    for (std::uint64_t i = 0; i < 2000; ++i) {
      const auto b = beta_sequence(*sources[s], 40, derive_seed(11, s, i));
      for (std::size_t m = 1; m <= b.size(); ++m) {
        if (b(m) < static_cast<std::int64_t>(m)) return false;
        if (m > 1 && !(b(m) > b(m - 1))) return false;
      }
      ++realizations;
    }
  }
  detail += ", " + std::to_string(realizations) + " beta realizations valid";
  return true;
}

bool criterion10_subflow(std::string& detail) {
  std::size_t checked = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto rec = std::make_shared<const MarkingRecord>(
        mark(sample_path(DistributionSpec::exponential(1.0), 500.0,
                         Rng(derive_seed(12, 1, i))),
             sample_path(DistributionSpec::exponential(0.1), 500.0,
                         Rng(derive_seed(12, 2, i)))));
    const std::size_t k = rec->t_doubleprime.size() - 1;
    if (k == 0) return false;
    const MarkingSource src(rec);
    const auto beta = beta_sequence(src, k, i);
    const auto tau = rec->h_path.partials();
    for (std::size_t m = 1; m <= k; ++m) {
      if (tau[static_cast<std::size_t>(beta(m))] != rec->t_doubleprime[m])
        return false;
    }
    ++checked;
  }
  detail += ", subflow identity exact on " + std::to_string(checked) +
            " realizations";
  return checked == 100;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main() {
  std::vector<Run> runs;

  // 1. Poisson worked example, k = 1, mean inter-arrival 1.
  {
    auto r = run(theorem2(1.0, 1, 0.02, true, 25.0));
    const auto* trend = find_check(r.report, "decreasing");
    const auto* final = find_check(r.report, "final");
    verdict(1, "Poisson example k=1 KS ladder",
            trend && trend->pass && final && final->pass && r.seconds <= 300.0,
            "KS " + column(r.report) + ", tol 0.02, " +
                std::to_string(r.seconds) + " s");
    runs.push_back(std::move(r));
  }

  // 2. k = 3 against erlang_cdf(3, 1, .).
  {
    auto r = run(theorem2(1.0, 3, 0.03, false, 30.0));
    const auto* final = find_check(r.report, "final");
    verdict(2, "kth event k=3 KS", final && final->pass,
            "KS " + column(r.report) + ", tol 0.03 at lambda=0.001");
    runs.push_back(std::move(r));
  }

  // 3. Scaling ambiguity, mean inter-arrival 1/2.
  {
    auto r = run(theorem2(2.0, 1, 0.03, true, 25.0));
    const auto* scaling = find_check(r.report, "exactly one");
    const auto& s = r.report.details.at("scaling").at(0);
    std::ostringstream os;
    os.precision(4);
    os << "KS[G(x/mu)]=" << s.at("ks_x_over_mu").get<double>()
       << " KS[G(x)]=" << s.at("ks_mu_free").get<double>()
       << ", winner: " << s.at("winner").get<std::string>();
    verdict(3, "scaling probe with H exponential(2)", scaling && scaling->pass,
            os.str());
    runs.push_back(std::move(r));
  }

  // 4. Geometric thinning.
  {
    auto r = run(default_config(ScenarioKind::kTheorem1Geometric));
    verdict(4, "geometric thinning TV ladder",
            r.report.passed && r.seconds <= 180.0,
            "TV " + column(r.report) + ", tol 0.02, " +
                std::to_string(r.seconds) + " s");
    runs.push_back(std::move(r));
  }

  // 5 and 6. Generating function consistency and closed forms.
  {
    auto r = run(default_config(ScenarioKind::kGfConsistency));
    std::size_t tri = 0, tri_ok = 0, closed = 0, closed_ok = 0;
    double worst_tri = 0.0, worst_closed_g = 0.0, worst_closed_pmf = 0.0;
    for (const auto& row : r.report.rows) {
      if (row.probe.find("closed-form") != std::string::npos) {
        ++closed;
        closed_ok += row.pass;
        if (row.probe.find("closed-form-g") != std::string::npos)
          worst_closed_g = std::max(worst_closed_g, row.distance);
        else
          worst_closed_pmf = std::max(worst_closed_pmf, row.distance);
      } else if (row.probe.find("mode-gap") == std::string::npos) {
        ++tri;
        tri_ok += row.pass;
        worst_tri = std::max(worst_tri, row.distance);
      }
    }
    std::ostringstream d5, d6;
    d5 << tri_ok << "/" << tri << " probes within 10h + tail, worst "
       << worst_tri << ", " << r.seconds << " s";
    d6 << closed_ok << "/" << closed << " checks, worst |g - e^{-t(1-s)}| "
       << worst_closed_g << " (tol 1e-3), worst pmf gap " << worst_closed_pmf
       << " (tol 1e-2)";
    verdict(5, "generating function consistency triangle",
            tri == 81 && tri_ok == tri && !r.report.incomplete &&
                r.seconds <= 120.0,
            d5.str());
    verdict(6, "exponential closed-form reduction",
            closed == 6 && closed_ok == closed, d6.str());
    runs.push_back(std::move(r));
  }

  // 7. Statement bound sweep.
  {
    auto r = run(default_config(ScenarioKind::kStatementBoundSweep));
    const auto& detail = r.report.checks.at(0).detail;
    verdict(7, "statement bound sweep", r.report.passed,
            std::to_string(detail.at("violations").get<int>()) +
                " violations in " +
                std::to_string(detail.at("configs").get<int>()) + " configs");
    runs.push_back(std::move(r));
  }

  // 8. Tail identity.
  {
    auto r = run(default_config(ScenarioKind::kEq6Identity));
    double worst = 0.0;
    for (const auto& row : r.report.rows)
      worst = std::max(worst, row.distance / row.stderr_);
    std::ostringstream os;
    os.precision(3);
    os << r.report.rows.size() << " probes, worst |diff|/sigma " << worst;
    verdict(8, "xi tail identity", r.report.passed, os.str());
    runs.push_back(std::move(r));
  }

  // 9. Zero mixing.
  {
    auto r = run(default_config(ScenarioKind::kMixingZeroCheck));
    const auto& detail = r.report.checks.at(0).detail;
    verdict(9, "zero mixing of the marking source", r.report.passed,
            std::to_string(detail.at("within").get<int>()) +
                "/20 repetitions within 3 stderr");
    runs.push_back(std::move(r));
  }

  // 10. Structural invariants.
  {
    std::string detail;
    bool pass = false;
    try {
      pass = criterion10_interleaving(detail) && criterion10_beta(detail) &&
             criterion10_subflow(detail);
    } catch (const std::exception& e) {
      detail += std::string(" exception: ") + e.what();
      pass = false;
    }
    verdict(10, "structural invariants", pass, detail);
  }

  // 11. Determinism: every scenario again, on four workers, byte for byte.
  {
    const auto root = fs::temp_directory_path() / "raring_acceptance";
    fs::remove_all(root);
    std::size_t identical = 0;
    std::string mismatched;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      auto config = runs[i].config;
      config.workers = 4;
      const auto again = run_scenario(config);
      const auto a = emit_report(runs[i].report, ReportFormat::kJson,
                                 root / ("a" + std::to_string(i)));
      const auto b =
          emit_report(again, ReportFormat::kJson, root / ("b" + std::to_string(i)));
      if (slurp(a[0]) == slurp(b[0]) && !slurp(a[0]).empty()) {
        ++identical;
      } else {
        mismatched += " " + runs[i].report.kind;
      }
    }
    verdict(11, "determinism across worker counts", identical == runs.size(),
            std::to_string(identical) + "/" + std::to_string(runs.size()) +
                " reports byte-identical (1 vs 4 workers)" + mismatched);
  }

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
