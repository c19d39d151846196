#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "retree/aldous_broder.hpp"
#include "retree/metric.hpp"
#include "retree/quartet.hpp"
#include "retree/rayleigh.hpp"
#include "retree/rgr.hpp"
#include "retree/rng.hpp"
#include "retree/stats.hpp"
#include "retree/tree.hpp"

// Named verification suites: each runs a fixed experiment against a pinned
// threshold and returns a small report. The same registry backs the
// acceptance harness and the command-line `verify` subcommand.
//
// Replicates are processed serially in stream-index order; every aggregate
// is a count, sum, or max, so a future concurrent runner would produce the
// same report. RETREE_THREADS caps the worker count; the current runner
// always uses one.

namespace retree {

struct SuiteConfig {
  std::uint64_t seed = 0;        // 0 keeps the suite's calibrated default
  std::uint64_t replicates = 0;  // 0 keeps the suite default
  int n = 0;                     // chain size / tree count where applicable
  std::uint64_t replicate_ceiling = 4000000;
};

struct TestReport {
  std::string suite;
  double statistic = 0.0;
  double threshold = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  bool pass = false;  // statistic <= threshold
  double runtime_s = 0.0;
};

inline int runner_threads() {
  const char* env = std::getenv("RETREE_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1)
    throw TreeError(TreeErrorCode::BadInput,
                    "RETREE_THREADS must be a positive integer");
  return static_cast<int>(std::min(v, 64l));
}

// Identity of a report: everything except wall time, which is the one field
// a reproducible rerun cannot reproduce.
inline std::string report_key(const TestReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.suite << '|' << r.statistic << '|' << r.threshold << '|'
     << r.samples << '|' << r.seed << '|' << (r.pass ? 1 : 0);
  return os.str();
}

inline std::uint64_t report_config_hash(const TestReport& r) {
  std::uint64_t h = 0x243f6a8885a308d3ull;
  for (char c : r.suite) h = splitmix64(h ^ static_cast<unsigned char>(c));
  h = splitmix64(h ^ r.seed);
  h = splitmix64(h ^ r.samples);
  return h;
}

inline nlohmann::json report_json(const TestReport& r) {
  std::ostringstream hash;
  hash << std::hex << report_config_hash(r);
  return nlohmann::json{{"suite", r.suite},
                        {"statistic", r.statistic},
                        {"threshold", r.threshold},
                        {"samples", r.samples},
                        {"seed", r.seed},
                        {"pass", r.pass},
                        {"runtime_s", r.runtime_s},
                        {"config_hash", hash.str()}};
}

inline std::string report_csv(const TestReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "# seed=" << r.seed << " config=" << std::hex
     << report_config_hash(r) << std::dec << "\n"
     << "suite,statistic,threshold,samples,seed,pass,runtime_s\n"
     << r.suite << ',' << r.statistic << ',' << r.threshold << ','
     << r.samples << ',' << r.seed << ',' << (r.pass ? 1 : 0) << ','
     << r.runtime_s << "\n";
  return os.str();
}

inline void export_report(const TestReport& r, const std::string& path,
                          const std::string& format) {
  std::ofstream out(path);
  if (!out)
    throw TreeError(TreeErrorCode::BadInput, "cannot open " + path);
  if (format == "json")
    out << report_json(r).dump(2) << "\n";
  else if (format == "csv")
    out << report_csv(r);
  else
    throw TreeError(TreeErrorCode::BadInput,
                    "format must be csv or json, got " + format);
}

namespace detail {

inline std::function<double(double)> transition_cdf(double r, double t) {
  return [r, t](double v) { return 1.0 - transition_tail(r, t, v); };
}

inline std::function<double(double)> transition_cdf_left(double r, double t) {
  return [r, t](double v) {
    if (v > r + t) return 1.0;
    double back = std::max(v - t, 0.0);
    return 1.0 - std::exp(-0.5 * v * v + 0.5 * back * back);
  };
}

inline double clock_s() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

// --- random-tree property checks backing the metric suites ---

inline RootedTree random_metric_tree(Rng& rng, int max_edges) {
  RootedTree t;
  int edges = 1 + static_cast<int>(
                      rng.uniform_int(static_cast<std::uint64_t>(max_edges)));
  for (int e = 0; e < edges; ++e) {
    int v =
        static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(t.n())));
    t.add_child(v, 0.2 + rng.uniform());
  }
  return t;
}

using KeptMap = std::map<int, double>;

inline KeptMap random_subtree_map(const RootedTree& t, Rng& rng) {
  KeptMap kept;
  std::vector<int> cand;
  for (int v = 0; v < t.n(); ++v)
    if (v != t.root() && rng.uniform() < 0.5) cand.push_back(v);
  if (cand.empty()) {
    int v;
    do {
      v = static_cast<int>(
          rng.uniform_int(static_cast<std::uint64_t>(t.n())));
    } while (v == t.root());
    cand.push_back(v);
  }
  for (int v : cand)
    for (int u = v; u != t.root(); u = t.parent(u)) kept[u] = 0.0;
  auto ch = t.children();
  for (auto& [v, from] : kept) {
    bool leafmost = true;
    for (int c : ch[v])
      if (kept.count(c)) leafmost = false;
    if (leafmost && rng.uniform() < 0.5)
      from = t.edge_length(v) * rng.uniform();
  }
  return kept;
}

inline std::vector<Segment> kept_to_segments(const RootedTree& t,
                                             const KeptMap& k) {
  std::vector<Segment> out;
  for (const auto& [v, from] : k) out.push_back({v, from, t.edge_length(v)});
  return out;
}

inline void kept_split_map(KeptMap& k, int v, double u, int m) {
  auto it = k.find(v);
  if (it == k.end()) return;
  double from = it->second;
  if (from < u) {
    k[m] = 0.0;
  } else {
    k.erase(it);
    k[m] = from - u;
  }
}

// Exhaustive rooted-GH of the delta-nets with delta grown until both nets
// fit the enumerator.
inline std::pair<double, double> gh_exact_fitted(const RootedTree& a,
                                                 const RootedTree& b,
                                                 double* delta_used) {
  double delta =
      std::max({height(a), height(b), 0.05}) / 4.0;
  for (int attempt = 0; attempt < 60; ++attempt) {
    try {
      auto out = gh_root_exact(a, b, delta);
      if (delta_used) *delta_used = delta;
      return out;
    } catch (const TreeError& e) {
      if (e.code != TreeErrorCode::NetTooLarge) throw;
      delta *= 1.5;
    }
  }
  throw TreeError(TreeErrorCode::NetTooLarge, "no net of at most 6 points");
}

struct MetricWorsts {
  std::uint64_t trees = 0;
  int semigroup_violations = 0;
  double hausdorff_gap = 0.0;     // max(0, d_H(T, trim) - eta)
  double regraft_increase = 0.0;  // max(0, d_H after cut - d_H before)
  double symmetry_gap = 0.0;      // |gh(a,b) - gh(b,a)|
  double spanned_dev = 0.0;       // |spanned length - total length|
  double quartet_dev = 0.0;       // worst distance mismatch after round-trip
  double point_height_gap = 0.0;    // |gh(point, T) - height(T)|
  double point_halfdiam_gap = 0.0;  // |gh(point, T) - net diameter / 2|
};

inline MetricWorsts metric_property_worsts(std::uint64_t seed,
                                           std::uint64_t trees) {
  MetricWorsts w;
  Rng rng = Rng::stream(seed, 0);
  RootedTree prev_small;
  prev_small.add_child(0, 1.0);
  for (std::uint64_t i = 0; i < trees; ++i) {
    RootedTree t = random_metric_tree(rng, 50);
    w.trees++;

    // Trimming twice equals trimming once by the sum, as canonical trees.
    double a = 0.05 + 0.3 * rng.uniform();
    double b = 0.05 + 0.3 * rng.uniform();
    if (!trees_isometric(trim(trim(t, a), b), trim(t, a + b), 1e-9))
      w.semigroup_violations++;

    // The trimmed tree stays within eta of the original.
    double eta = std::min(0.05 + 0.5 * rng.uniform(), 0.9 * height(t));
    double dh = hausdorff_segments(t, whole_tree_segments(t),
                                   trim_segments(t, eta));
    w.hausdorff_gap = std::max(w.hausdorff_gap, dh - eta);

    // Total length of the subtree spanned by root and leaves, recovered
    // from pairwise distances alone.
    {
      std::vector<TreePoint> pts{{t.root(), 0.0}};
      auto ch = t.children();
      for (int v = 0; v < t.n(); ++v)
        if (v != t.root() && ch[static_cast<std::size_t>(v)].empty())
          pts.push_back({v, 0.0});
      if (pts.size() >= 2) {
        std::vector<std::vector<double>> d(
            pts.size(), std::vector<double>(pts.size(), 0.0));
        for (std::size_t x = 0; x < pts.size(); ++x)
          for (std::size_t y = x + 1; y < pts.size(); ++y)
            d[x][y] = d[y][x] = distance(t, pts[x], pts[y]);
        w.spanned_dev =
            std::max(w.spanned_dev, std::abs(spanned_length_from_distances(d) -
                                             t.total_length()));
      }
    }

    // Four distinct leaves in, reconstructed quartet out, distances
    // preserved. Leaves keep every pendant length positive.
    std::vector<int> vs;
    {
      auto ch = t.children();
      for (int v = 0; v < t.n(); ++v)
        if (v != t.root() && ch[static_cast<std::size_t>(v)].empty())
          vs.push_back(v);
    }
    if (vs.size() >= 4) {
      for (std::size_t k = 0; k < 4; ++k) {
        std::size_t j = k + static_cast<std::size_t>(rng.uniform_int(
                                static_cast<std::uint64_t>(vs.size() - k)));
        std::swap(vs[k], vs[j]);
      }
      std::vector<std::vector<double>> d(4, std::vector<double>(4, 0.0));
      for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t y = x + 1; y < 4; ++y)
          d[x][y] = d[y][x] =
              distance(t, {vs[x], 0.0}, {vs[y], 0.0});
      RootedTree qt = quartet_tree(quartet_reconstruct(d, 1e-9));
      std::map<std::string, int> lab;
      for (const auto& [v, s] : qt.labels()) lab[s] = v;
      for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t y = x + 1; y < 4; ++y) {
          double got = distance(
              qt, {lab.at("x" + std::to_string(x + 1)), 0.0},
              {lab.at("x" + std::to_string(y + 1)), 0.0});
          w.quartet_dev = std::max(w.quartet_dev, std::abs(got - d[x][y]));
        }
    }

    // Exhaustive rooted-GH runs on companions small enough that the whole
    // vertex set fits a six-point net. It is symmetric, and against the
    // one-point tree it returns half the net diameter (not the height).
    {
      RootedTree small = random_metric_tree(rng, 5);
      double delta = 0.0;
      auto [d12, err12] = gh_exact_fitted(small, prev_small, &delta);
      auto [d21, err21] = gh_exact_fitted(prev_small, small, nullptr);
      (void)err12;
      (void)err21;
      w.symmetry_gap = std::max(w.symmetry_gap, std::abs(d12 - d21));

      RootedTree point;
      double dp = 0.0;
      auto [dpt, errp] = gh_exact_fitted(point, small, &dp);
      (void)errp;
      w.point_height_gap =
          std::max(w.point_height_gap, std::abs(dpt - height(small)));
      Net net = build_net(small, dp);
      double nd = 0.0;
      for (std::size_t x = 0; x < net.points.size(); ++x)
        for (std::size_t y = x + 1; y < net.points.size(); ++y)
          nd = std::max(nd, distance(small, net.points[x], net.points[y]));
      w.point_halfdiam_gap =
          std::max(w.point_halfdiam_gap, std::abs(dpt - 0.5 * nd));
      prev_small = small;
    }

    // Hausdorff distance between two rooted subtrees never grows under a
    // prune-and-regraft applied to all three at once.
    {
      KeptMap ka = random_subtree_map(t, rng);
      KeptMap kb = random_subtree_map(t, rng);
      double before = hausdorff_segments(t, kept_to_segments(t, ka),
                                         kept_to_segments(t, kb));
      TreePoint p;
      do {
        p = sample_point(t, rng);
      } while (p.offset == 0.0);
      int v = p.vertex;
      double u = p.offset;
      RgrCut cut = rgr_step_inplace(t, p);
      kept_split_map(ka, v, u, cut.leaf);
      kept_split_map(kb, v, u, cut.leaf);
      double after = hausdorff_segments(t, kept_to_segments(t, ka),
                                        kept_to_segments(t, kb));
      w.regraft_increase = std::max(w.regraft_increase, after - before);
    }
  }
  return w;
}

struct SuiteDefaults {
  std::uint64_t seed;
  std::uint64_t replicates;
  int n;
};

using SuiteFn = std::function<void(const SuiteConfig&, const SuiteDefaults&,
                                   TestReport&)>;

struct SuiteEntry {
  SuiteDefaults defaults;
  SuiteFn fn;
};

inline std::uint64_t pick(std::uint64_t cfg_v, std::uint64_t def_v) {
  return cfg_v ? cfg_v : def_v;
}

inline const std::map<std::string, SuiteEntry>& suite_registry() {
  static const std::map<std::string, SuiteEntry> reg = [] {
    std::map<std::string, SuiteEntry> m;

    m["rayleigh-stationary"] = {
        {401, 100000, 0},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t reps = pick(c.replicates, d.replicates);
          double worst = 0.0;
          const double starts[2] = {0.0, 2.0};
          for (std::uint64_t s = 0; s < 2; ++s) {
            std::vector<double> v;
            v.reserve(reps);
            for (std::uint64_t i = 0; i < reps; ++i) {
              Rng rng = Rng::stream(r.seed, s * reps + i + 1);
              RayleighPath p = pdmp_simulate(starts[s], 25.0, rng);
              v.push_back(path_value(p, 25.0));
            }
            worst = std::max(worst, ks_statistic(std::move(v), rayleigh_cdf));
          }
          r.statistic = worst;
          r.threshold = 0.01;
          r.samples = 2 * reps;
        }};

    m["rayleigh-transition"] = {
        {412, 100000, 0},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t reps = pick(c.replicates, d.replicates);
          const double rs[3] = {0.0, 0.5, 1.0};
          const double ts[3] = {1.0, 1.0, 2.0};
          double worst_z = 0.0;
          for (std::uint64_t p = 0; p < 3; ++p) {
            std::vector<double> v;
            v.reserve(reps);
            for (std::uint64_t i = 0; i < reps; ++i) {
              Rng rng = Rng::stream(r.seed, p * reps + i + 1);
              v.push_back(path_value(pdmp_simulate(rs[p], ts[p], rng), ts[p]));
            }
            std::sort(v.begin(), v.end());
            double span = rs[p] + ts[p];
            for (int g = 1; g <= 20; ++g) {
              double x = span * g / 21.0;
              double tail = transition_tail(rs[p], ts[p], x);
              double emp =
                  static_cast<double>(v.end() - std::upper_bound(v.begin(),
                                                                 v.end(), x)) /
                  static_cast<double>(reps);
              double se = std::sqrt(std::max(tail * (1.0 - tail), 1e-12) /
                                    static_cast<double>(reps));
              worst_z = std::max(worst_z, std::abs(emp - tail) / se);
            }
          }
          r.statistic = worst_z;
          r.threshold = 3.0;
          r.samples = 3 * reps;
        }};

    m["rayleigh-minlaw"] = {
        {406, 100000, 0},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t reps = pick(c.replicates, d.replicates);
          std::vector<double> v;
          v.reserve(reps);
          for (std::uint64_t i = 0; i < reps; ++i) {
            Rng rng = Rng::stream(r.seed, i + 1);
            v.push_back(path_value(pdmp_simulate(0.0, 1.0, rng), 1.0));
          }
          r.statistic = ks_statistic(std::move(v), transition_cdf(0.0, 1.0),
                                     transition_cdf_left(0.0, 1.0));
          r.threshold = 0.01;
          r.samples = reps;
        }};

    m["rayleigh-rate"] = {
        {413, 10000, 0},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t t_max = pick(c.replicates, d.replicates);
          Rng rng = Rng::stream(r.seed, 1);
          double rate = jump_rate(static_cast<double>(t_max), rng);
          double limit = std::sqrt(3.14159265358979323846 / 2.0);
          r.statistic = std::abs(rate - limit) / limit;
          r.threshold = 0.01;
          r.samples = t_max;
        }};

    m["rayleigh-triples"] = {
        {404, 100000, 0},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t reps = pick(c.replicates, d.replicates);
          Rng rng = Rng::stream(r.seed, 1);
          std::vector<JumpTriple> tr = jump_triples(reps, 1000, rng);
          std::vector<double> pre, before, after;
          for (const JumpTriple& j : tr) {
            pre.push_back(j.pre);
            before.push_back(j.prev_post);
            after.push_back(j.post);
          }
          double worst = ks_statistic(std::move(pre), size_biased_cdf);
          worst = std::max(worst,
                           ks_statistic(std::move(before), half_normal_cdf));
          worst = std::max(worst,
                           ks_statistic(std::move(after), half_normal_cdf));
          r.statistic = worst;
          r.threshold = 0.01;
          r.samples = reps;
        }};

    m["rayleigh-return"] = {
        {405, 100000, 0},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t reps = pick(c.replicates, d.replicates);
          Rng rng = Rng::stream(r.seed, 1);
          MeanWithError est = estimate_return_time(1.0, reps, rng);
          double limit = std::exp(0.5);
          r.statistic = std::abs(est.mean - limit) / limit;
          r.threshold = 0.02;
          r.samples = reps;
        }};

    m["rayleigh-discrete"] = {
        {407, 100000, 0},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t reps = pick(c.replicates, d.replicates);
          std::vector<double> v;
          v.reserve(reps);
          for (std::uint64_t i = 0; i < reps; ++i) {
            Rng rng = Rng::stream(r.seed, i + 1);
            DiscreteChainPath p = discrete_chain(400, 10, 20.0, rng);
            v.push_back(discrete_state_at(p, 20.0) / 20.0);
          }
          r.statistic = ks_statistic(std::move(v), transition_cdf(0.5, 1.0),
                                     transition_cdf_left(0.5, 1.0));
          r.threshold = 0.02;
          r.samples = reps;
        }};

    SuiteEntry ab_exact = {
        {0, 0, 4},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          int n = c.n ? c.n : d.n;
          r.statistic = stationarity_residual(n);
          r.threshold = 1e-12;
          r.samples = static_cast<std::uint64_t>(
              enumerate_rooted_trees(n).size());
        }};
    m["ab-stationary"] = ab_exact;
    m["ab-stationary-exact"] = ab_exact;

    m["ab-occupation"] = {
        {408, 1000000, 3},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t events = pick(c.replicates, d.replicates);
          int n = c.n ? c.n : d.n;
          std::vector<std::string> keys;
          for (const CombTree& s : enumerate_rooted_trees(n))
            keys.push_back(comb_key(s));
          std::sort(keys.begin(), keys.end());
          Rng rng = Rng::stream(r.seed, 0);
          CombTree t = comb_path(n);
          std::vector<std::uint64_t> cnt(keys.size(), 0);
          for (std::uint64_t k = 0; k < events; ++k) {
            int pick_v = 1 + static_cast<int>(rng.uniform_int(
                                 static_cast<std::uint64_t>(n)));
            ab_apply(t, pick_v);
            auto i = std::lower_bound(keys.begin(), keys.end(), comb_key(t)) -
                     keys.begin();
            ++cnt[static_cast<std::size_t>(i)];
          }
          r.statistic = chi_square_uniform(cnt);
          r.threshold =
              chi_square_critical_001(static_cast<int>(keys.size()) - 1);
          r.samples = events;
        }};

    m["coupling-lengths"] = {
        {409, 100000, 4},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t reps = pick(c.replicates, d.replicates);
          int n = c.n ? c.n : d.n;
          double worst = 0.0;
          for (std::uint64_t i = 0; i < reps; ++i) {
            Rng rng = Rng::stream(r.seed, i + 1);
            CoupledPair cp = coupled_Rn_Tn(n, rng);
            std::vector<double> er, et;
            for (int v = 0; v < cp.r_tree.n(); ++v)
              if (v != cp.r_tree.root()) er.push_back(cp.r_tree.edge_length(v));
            for (int v = 0; v < cp.t_tree.n(); ++v)
              if (v != cp.t_tree.root()) et.push_back(cp.t_tree.edge_length(v));
            std::sort(er.begin(), er.end());
            std::sort(et.begin(), et.end());
            if (er.size() != et.size()) {
              worst = std::numeric_limits<double>::infinity();
              break;
            }
            for (std::size_t k = 0; k < er.size(); ++k)
              worst = std::max(worst, std::abs(er[k] - et[k]));
          }
          r.statistic = worst;
          r.threshold = 1e-12;
          r.samples = reps;
        }};

    m["coupling-shapes"] = {
        {409, 100000, 4},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t reps = pick(c.replicates, d.replicates);
          int n = c.n ? c.n : d.n;
          std::map<std::string, std::size_t> index;
          std::vector<std::uint64_t> cr, ct;
          for (std::uint64_t i = 0; i < reps; ++i) {
            Rng rng = Rng::stream(r.seed, i + 1);
            CoupledPair cp = coupled_Rn_Tn(n, rng);
            for (int side = 0; side < 2; ++side) {
              std::string code =
                  shape_of(side == 0 ? cp.r_tree : cp.t_tree);
              auto it = index.find(code);
              if (it == index.end()) {
                it = index.emplace(code, index.size()).first;
                cr.push_back(0);
                ct.push_back(0);
              }
              (side == 0 ? cr : ct)[it->second]++;
            }
          }
          std::uint64_t cells = 1;
          for (int k = 2 * n - 3; k >= 1; k -= 2)
            cells *= static_cast<std::uint64_t>(k);
          while (cr.size() < cells) {
            cr.push_back(0);
            ct.push_back(0);
          }
          r.statistic = std::max(chi_square_uniform(ct),
                                 chi_square_two_sample(cr, ct));
          r.threshold =
              chi_square_critical_001(static_cast<int>(cells) - 1);
          r.samples = reps;
        }};

    m["rgr-height"] = {
        {410, 100000, 0},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t reps = pick(c.replicates, d.replicates);
          std::vector<double> v;
          v.reserve(reps);
          for (std::uint64_t i = 0; i < reps; ++i) {
            Rng rng = Rng::stream(r.seed, i + 1);
            RootedTree seg;
            int tip = seg.add_child(seg.root(), 0.5);
            Trajectory tr =
                simulate_rgr(seg, 1.0, rng, {TreePoint{tip, 0.0}});
            v.push_back(tr.mark_heights[0].back());
          }
          r.statistic = ks_statistic(std::move(v), transition_cdf(0.5, 1.0),
                                     transition_cdf_left(0.5, 1.0));
          r.threshold = 0.01;
          r.samples = reps;
        }};

    m["metric-properties"] = {
        {411, 200, 0},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t trees = pick(c.replicates, d.replicates);
          MetricWorsts w = metric_property_worsts(r.seed, trees);
          double violations =
              static_cast<double>(w.semigroup_violations) +
              (w.hausdorff_gap > 1e-12 ? 1.0 : 0.0) +
              (w.regraft_increase > 1e-9 ? 1.0 : 0.0) +
              (w.symmetry_gap > 0.0 ? 1.0 : 0.0) +
              (w.spanned_dev > 1e-9 ? 1.0 : 0.0) +
              (w.quartet_dev > 1e-9 ? 1.0 : 0.0);
          r.statistic = violations;
          r.threshold = 0.0;
          r.samples = trees;
        }};

    m["gh-point-distance"] = {
        {411, 200, 0},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t trees = pick(c.replicates, d.replicates);
          MetricWorsts w = metric_property_worsts(r.seed, trees);
          r.statistic = w.point_height_gap;
          r.threshold = 1e-9;
          r.samples = trees;
        }};

    m["rgr-conservation"] = {
        {412, 50, 0},
        [](const SuiteConfig& c, const SuiteDefaults& d, TestReport& r) {
          std::uint64_t reps = pick(c.replicates, d.replicates);
          double worst = 0.0;
          std::uint64_t events = 0;
          for (std::uint64_t i = 0; i < reps; ++i) {
            Rng rng = Rng::stream(r.seed, i + 1);
            RootedTree init = random_metric_tree(rng, 12);
            double lambda0 = init.total_length();
            Trajectory tr = simulate_rgr(init, 6.0, rng);
            for (std::size_t k = 0; k < tr.times.size(); ++k)
              worst = std::max(worst,
                               std::abs(tr.total_lengths[k] -
                                        (lambda0 + tr.times[k])));
            events += tr.times.size();
          }
          r.statistic = worst;
          r.threshold = 1e-9;
          r.samples = events;
        }};

    return m;
  }();
  return reg;
}

}  // namespace detail

inline std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& [name, entry] : detail::suite_registry())
    out.push_back(name);
  return out;
}

inline TestReport run_suite(const std::string& name,
                            const SuiteConfig& cfg = {}) {
  const auto& reg = detail::suite_registry();
  auto it = reg.find(name);
  if (it == reg.end()) {
    std::ostringstream msg;
    msg << "unknown suite '" << name << "'; available:";
    for (const auto& [n, e] : reg) msg << ' ' << n;
    throw TreeError(TreeErrorCode::BadInput, msg.str());
  }
  std::uint64_t reps =
      cfg.replicates ? cfg.replicates : it->second.defaults.replicates;
  if (reps > cfg.replicate_ceiling)
    throw TreeError(TreeErrorCode::BadInput,
                    "replicate ceiling exceeded; raise replicate_ceiling");
  TestReport r;
  r.suite = name;
  r.seed = cfg.seed ? cfg.seed : it->second.defaults.seed;
  double t0 = detail::clock_s();
  it->second.fn(cfg, it->second.defaults, r);
  r.runtime_s = detail::clock_s() - t0;
  r.pass = r.statistic <= r.threshold;
  return r;
}

}  // namespace retree
