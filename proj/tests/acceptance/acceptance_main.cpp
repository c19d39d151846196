// Acceptance harness: each numbered criterion prints one PASS/FAIL line and
// the reports backing it, and the process exits 0 only if every selected
// criterion holds. Run with --criterion N for a single one.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "retree/suites.hpp"

using namespace retree;

namespace {

bool g_all_ok = true;

void detail_line(const TestReport& r) {
  std::printf("    %-22s stat=%-12.6g thr=%-10.6g samples=%-8llu seed=%llu %s\n",
              r.suite.c_str(), r.statistic, r.threshold,
              static_cast<unsigned long long>(r.samples),
              static_cast<unsigned long long>(r.seed),
              r.pass ? "ok" : "FAIL");
}

TestReport run_with(const std::string& name, SuiteConfig c = {}) {
  TestReport r = run_suite(name, c);
  return r;
}

void header(int k, bool ok, const char* text) {
  std::printf("criterion %d: %s  %s\n", k, ok ? "PASS" : "FAIL", text);
  if (!ok) g_all_ok = false;
}

bool crit_stationary() {
  TestReport r = run_with("rayleigh-stationary");
  header(1, r.pass,
         "marginal at t=25 from starts 0 and 2 matches the stationary law "
         "(KS <= 0.01, 1e5 paths per start)");
  detail_line(r);
  return r.pass;
}

bool crit_transition() {
  TestReport grid = run_with("rayleigh-transition");
  TestReport minlaw = run_with("rayleigh-minlaw");
  bool ok = grid.pass && minlaw.pass;
  header(2, ok,
         "transition tails on 20-point grids within 3 standard errors, and "
         "the t=1 law from 0 equals the capped-draw construction (KS <= 0.01)");
  detail_line(grid);
  detail_line(minlaw);
  return ok;
}

bool crit_rate() {
  TestReport r = run_with("rayleigh-rate");
  header(3, r.pass,
         "long-run jump count per unit time within 1% of sqrt(pi/2)");
  detail_line(r);
  return r.pass;
}

bool crit_triples() {
  TestReport r = run_with("rayleigh-triples");
  header(4, r.pass,
         "at jumps: pre-jump value size-biased, surrounding post-jump values "
         "half-normal (KS <= 0.01, 1e5 jumps after burn-in)");
  detail_line(r);
  return r.pass;
}

bool crit_return() {
  TestReport r = run_with("rayleigh-return");
  header(5, r.pass, "mean return time to level 1 within 2% of exp(1/2)");
  detail_line(r);
  return r.pass;
}

bool crit_discrete() {
  TestReport r = run_with("rayleigh-discrete");
  header(6, r.pass,
         "discrete chain at N=400 from 0.5 vs the continuous t=1 transition "
         "law (KS <= 0.02, 1e5 paths)");
  detail_line(r);
  if (!r.pass) {
    std::vector<double> v;
    v.reserve(10000);
    for (std::uint64_t i = 0; i < 10000; ++i) {
      Rng rng = Rng::stream(417, i + 1);
      v.push_back(discrete_state_at(discrete_chain(1600, 20, 40.0, rng), 40.0) /
                  40.0);
    }
    double ks1600 =
        ks_statistic(std::move(v), detail::transition_cdf(0.5, 1.0),
                     detail::transition_cdf_left(0.5, 1.0));
    std::printf(
        "    analysis: the reference law has an atom of mass exp(-1) at 1.5\n"
        "    (paths whose mark is never cut); the chain smears that atom over\n"
        "    a width of order N^(-1/4), so the empirical CDF misses the jump\n"
        "    by about half the atom mass at any N. Confirmation at N=1600\n"
        "    (1e4 paths): KS=%.4f, essentially unchanged. Away from the atom\n"
        "    the chain does converge: the restricted sup below 1.0 and the\n"
        "    Wasserstein-1 distance both shrink with N (see the unit tests).\n",
        ks1600);
  }
  return r.pass;
}

bool crit_uniform_stationarity() {
  std::vector<TestReport> parts;
  for (int n : {2, 3, 4}) {
    SuiteConfig c;
    c.n = n;
    parts.push_back(run_with("ab-stationary-exact", c));
  }
  parts.push_back(run_with("ab-occupation"));
  bool ok = true;
  for (const TestReport& r : parts) ok = ok && r.pass;
  header(7, ok,
         "one-step invariance of the uniform law exact for N=2,3,4, and "
         "occupation counts over 1e6 events at N=3 pass chi-square at 0.1%");
  for (const TestReport& r : parts) detail_line(r);
  return ok;
}

bool crit_coupling() {
  TestReport len = run_with("coupling-lengths");
  TestReport shp = run_with("coupling-shapes");
  bool ok = len.pass && shp.pass;
  header(8, ok,
         "coupled constructions at n=4 share the edge-length multiset to "
         "1e-12 in every replicate, with uniform and matching shapes");
  detail_line(len);
  detail_line(shp);
  return ok;
}

bool crit_growth_height() {
  TestReport r = run_with("rgr-height");
  header(9, r.pass,
         "marked height after growth for time 1 from a length-1/2 segment "
         "matches the one-dimensional transition law (KS <= 0.01)");
  detail_line(r);
  return r.pass;
}

bool crit_metric() {
  TestReport props = run_with("metric-properties");
  TestReport pt = run_with("gh-point-distance");
  bool ok = props.pass && pt.pass;
  header(10, ok,
         "metric toolkit on 200 random trees: trim semigroup, Hausdorff "
         "bound, regraft monotonicity, exhaustive-GH symmetry and "
         "point distance, spanned length, quartet round-trip");
  detail_line(props);
  detail_line(pt);
  detail::MetricWorsts w = detail::metric_property_worsts(411, 200);
  std::printf(
      "    subchecks: semigroup violations %d, hausdorff gap %.3g, regraft "
      "increase %.3g,\n"
      "               symmetry gap %.3g, spanned dev %.3g, quartet dev "
      "%.3g, half-diameter gap %.3g\n",
      w.semigroup_violations, w.hausdorff_gap, w.regraft_increase,
      w.symmetry_gap, w.spanned_dev, w.quartet_dev, w.point_halfdiam_gap);
  if (!pt.pass)
    std::printf(
        "    analysis: against the one-point tree the exhaustive net\n"
        "    correspondence may pair the root with any net point, so the\n"
        "    value it minimizes is half the widest pairwise distance in the\n"
        "    net (half-diameter gap above: exactly 0). That equals the height\n"
        "    only for a root-to-leaf segment; on branched trees the worst\n"
        "    |value - height| here is %.3g.\n",
        w.point_height_gap);
  return ok;
}

bool crit_conservation() {
  TestReport r = run_with("rgr-conservation");
  header(11, r.pass,
         "total length along growth trajectories equals initial length plus "
         "elapsed time (within 1e-9 at every recorded event)");
  detail_line(r);
  return r.pass;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
      if (only < 1 || only > 11) {
        std::fprintf(stderr, "criterion must be in 1..11\n");
        return 2;
      }
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }

  using CritFn = bool (*)();
  const CritFn table[11] = {
      crit_stationary, crit_transition,     crit_rate,
      crit_triples,    crit_return,         crit_discrete,
      crit_uniform_stationarity, crit_coupling, crit_growth_height,
      crit_metric,     crit_conservation};

  for (int k = 1; k <= 11; ++k) {
    if (only && k != only) continue;
    table[k - 1]();
  }
  return g_all_ok ? 0 : 1;
}
