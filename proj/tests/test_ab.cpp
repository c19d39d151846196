#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "retree/aldous_broder.hpp"
#include "retree/rayleigh.hpp"
#include "retree/rng.hpp"
#include "retree/stats.hpp"

using namespace retree;

namespace {

// CDF of the growth process value at time 1 started from 0.5, with the
// left limit at the atom (no down-jump yet) at 1.5.
double law_cdf(double v) { return 1.0 - transition_tail(0.5, 1.0, v); }

double law_cdf_left(double v) {
  if (v > 1.5) return 1.0;
  double back = std::max(v - 1.0, 0.0);
  return 1.0 - std::exp(-0.5 * v * v + 0.5 * back * back);
}

struct LawRun {
  std::vector<double> heights;
  double len_mean = 0.0, len_sd = 0.0;
  double grow = 0.0, regraft = 0.0, noop = 0.0, events = 0.0;
};

LawRun law_run(std::uint64_t N, std::uint64_t master, int reps) {
  LawRun out;
  double leng = 0.0, leng2 = 0.0;
  RescaledAbConfig cfg;
  double eta = 2.0 / std::sqrt(static_cast<double>(N));
  for (int i = 1; i <= reps; ++i) {
    Rng rng = Rng::stream(master, static_cast<std::uint64_t>(i));
    RescaledAb r = rescaled_ab(N, 1.0, rng, eta, cfg);
    out.heights.push_back(r.final_mark_height);
    leng += r.final_trimmed_length;
    leng2 += r.final_trimmed_length * r.final_trimmed_length;
    out.grow += static_cast<double>(r.growth_picks);
    out.regraft += static_cast<double>(r.regraft_picks);
    out.noop += static_cast<double>(r.noop_picks);
    out.events += static_cast<double>(r.events);
  }
  out.len_mean = leng / reps;
  out.len_sd = std::sqrt(leng2 / reps - out.len_mean * out.len_mean);
  out.grow /= reps;
  out.regraft /= reps;
  out.noop /= reps;
  out.events /= reps;
  return out;
}

double sup_below_one(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double worst = 0.0;
  for (int g = 1; g <= 100; ++g) {
    double x = 0.01 * g;
    double emp =
        static_cast<double>(std::lower_bound(v.begin(), v.end(), x + 1e-12) -
                            v.begin()) /
        v.size();
    worst = std::max(worst, std::abs(emp - law_cdf(x)));
  }
  return worst;
}

}  // namespace

TEST_CASE("one pick moves the root and one edge", "[ab]") {
  CombTree t = comb_path(3);
  REQUIRE(t.root == 1);
  REQUIRE(t.parent == std::vector<int>({0, 0, 1, 2}));
  comb_validate(t);

  ab_apply(t, 3);
  REQUIRE(t.root == 3);
  REQUIRE(t.parent == std::vector<int>({0, 3, 1, 0}));
  comb_validate(t);

  CombTree before = t;
  ab_apply(t, 3);  // picking the root is a no-op
  REQUIRE(t == before);

  CombTree two = comb_path(2);
  ab_apply(two, 2);
  REQUIRE(two.root == 2);
  REQUIRE(two.parent == std::vector<int>({0, 2, 0}));
  ab_apply(two, 1);
  REQUIRE(two == comb_path(2));

  REQUIRE_THROWS_AS(ab_apply(t, 0), TreeError);
  REQUIRE_THROWS_AS(ab_apply(t, 4), TreeError);
  REQUIRE_THROWS_AS(comb_path(0), TreeError);

  CombTree bad = comb_path(3);
  bad.parent[2] = 3;
  bad.parent[3] = 2;  // 2 and 3 orbit each other, never reaching the root
  REQUIRE_THROWS_AS(comb_validate(bad), TreeError);
  bad = comb_path(3);
  bad.parent[1] = 2;
  REQUIRE_THROWS_AS(comb_validate(bad), TreeError);
  bad = comb_path(3);
  bad.parent[3] = 7;
  REQUIRE_THROWS_AS(comb_validate(bad), TreeError);

  Rng a = Rng::stream(310, 0), b = Rng::stream(310, 0);
  CombTree s1 = comb_path(4), s2 = comb_path(4);
  for (int k = 0; k < 50; ++k) {
    s1 = ab_step(s1, a);
    s2 = ab_step(s2, b);
  }
  REQUIRE(s1 == s2);
}

TEST_CASE("every pick preserves treeness", "[ab]") {
  for (int N = 2; N <= 4; ++N) {
    for (const CombTree& s : enumerate_rooted_trees(N)) {
      for (int pick = 1; pick <= N; ++pick) {
        CombTree next = s;
        ab_apply(next, pick);
        comb_validate(next);
        if (pick == s.root) {
          REQUIRE(next == s);
        } else {
          REQUIRE(next.root == pick);
          REQUIRE(next.parent[static_cast<std::size_t>(s.root)] == pick);
        }
      }
    }
  }
}

TEST_CASE("the chain hits every tree uniformly", "[ab]") {
  REQUIRE(enumerate_rooted_trees(2).size() == 2);
  REQUIRE(enumerate_rooted_trees(3).size() == 9);
  REQUIRE(enumerate_rooted_trees(4).size() == 64);
  REQUIRE(enumerate_rooted_trees(5).size() == 625);
  {
    auto st = enumerate_rooted_trees(5);
    std::vector<std::string> keys;
    for (const CombTree& s : st) keys.push_back(comb_key(s));
    std::sort(keys.begin(), keys.end());
    REQUIRE(std::adjacent_find(keys.begin(), keys.end()) == keys.end());
  }
  REQUIRE_THROWS_AS(enumerate_rooted_trees(1), TreeError);
  REQUIRE_THROWS_AS(enumerate_rooted_trees(6), TreeError);

  // Long-run occupation at n=3 over all 9 trees. Consecutive states are
  // strongly dependent, which inflates the raw chi-square well beyond its
  // nominal distribution (seed 1 gives 31.2 against a df-8 critical value
  // of 26.1), so the distributional assertion uses every 10th state.
  std::vector<std::string> keys;
  for (const CombTree& s : enumerate_rooted_trees(3))
    keys.push_back(comb_key(s));
  std::sort(keys.begin(), keys.end());
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng = Rng::stream(301, seed);
    CombTree t = comb_path(3);
    std::vector<long long> raw(9, 0), sub(9, 0);
    long long noop = 0;
    const long long M = 1000000;
    for (long long k = 0; k < M; ++k) {
      int pick = 1 + static_cast<int>(rng.uniform_int(3));
      if (pick == t.root) ++noop;
      ab_apply(t, pick);
      auto i = std::lower_bound(keys.begin(), keys.end(), comb_key(t)) -
               keys.begin();
      ++raw[static_cast<std::size_t>(i)];
      if (k % 10 == 9) ++sub[static_cast<std::size_t>(i)];
    }
    double c_raw = 0.0, c_sub = 0.0;
    for (int i = 0; i < 9; ++i) {
      double e_raw = M / 9.0, e_sub = (M / 10) / 9.0;
      c_raw += (raw[i] - e_raw) * (raw[i] - e_raw) / e_raw;
      c_sub += (sub[i] - e_sub) * (sub[i] - e_sub) / e_sub;
    }
    REQUIRE(c_sub <= chi_square_critical_001(8));
    REQUIRE(c_raw <= 60.0);
    // Each event is a no-op with probability exactly 1/3; 5 sigma window.
    REQUIRE(std::abs(static_cast<double>(noop) / M - 1.0 / 3.0) <= 2.4e-3);
  }
}

TEST_CASE("exact stationarity of the uniform law", "[ab]") {
  REQUIRE(stationarity_residual(2) <= 1e-12);
  REQUIRE(stationarity_residual(3) <= 1e-12);
  REQUIRE(stationarity_residual(4) <= 1e-12);
  REQUIRE_THROWS_AS(stationarity_residual(5), TreeError);
}

TEST_CASE("stationary weights for a general sampling matrix", "[ab]") {
  // Uniform matrix: every tree has weight n^{-(n-1)}.
  {
    std::vector<std::vector<double>> P(4, std::vector<double>(4, 0.25));
    for (const CombTree& s : enumerate_rooted_trees(4))
      REQUIRE(wform_mass(s, P) == 0.015625);
    CombTree t = comb_path(3);
    REQUIRE_THROWS_AS(wform_mass(t, P), TreeError);
  }
  // Random positive row-stochastic matrix: the product-over-parents weight
  // is invariant for the chain whose pick is drawn from the current root's
  // row.
  Rng rng = Rng::stream(399, 0);
  std::vector<std::vector<double>> P(3, std::vector<double>(3));
  for (auto& row : P) {
    double s = 0.0;
    for (auto& x : row) {
      x = 0.1 + rng.uniform();
      s += x;
    }
    for (auto& x : row) x /= s;
  }
  auto st = enumerate_rooted_trees(3);
  std::vector<std::string> keys;
  for (const CombTree& s : st) keys.push_back(comb_key(s));
  auto idx = [&](const std::string& k) {
    return static_cast<std::size_t>(
        std::find(keys.begin(), keys.end(), k) - keys.begin());
  };
  std::vector<double> pi(st.size());
  double z = 0.0;
  for (std::size_t i = 0; i < st.size(); ++i) {
    pi[i] = wform_mass(st[i], P);
    z += pi[i];
  }
  for (double& x : pi) x /= z;
  std::vector<double> out(st.size(), 0.0);
  for (std::size_t i = 0; i < st.size(); ++i) {
    for (int pick = 1; pick <= 3; ++pick) {
      CombTree nx = st[i];
      ab_apply(nx, pick);
      out[idx(comb_key(nx))] += pi[i] * P[static_cast<std::size_t>(
                                            st[i].root - 1)]
                                         [static_cast<std::size_t>(pick - 1)];
    }
  }
  for (std::size_t i = 0; i < st.size(); ++i)
    REQUIRE(std::abs(out[i] - pi[i]) <= 1e-12);
}

TEST_CASE("root sequence and jump pacing", "[ab]") {
  // The root after an actual jump is the picked vertex, uniform over all
  // of V in stationarity.
  {
    Rng rng = Rng::stream(302, 1);
    CombTree t = comb_path(5);
    std::vector<long long> cnt(5, 0);
    long long jumps = 0;
    const long long M = 500000;
    for (long long k = 0; k < M; ++k) {
      int pick = 1 + static_cast<int>(rng.uniform_int(5));
      if (pick != t.root) {
        ab_apply(t, pick);
        ++cnt[static_cast<std::size_t>(t.root - 1)];
        ++jumps;
      }
    }
    double c = 0.0;
    for (int i = 0; i < 5; ++i) {
      double e = static_cast<double>(jumps) / 5.0;
      c += (cnt[i] - e) * (cnt[i] - e) / e;
    }
    REQUIRE(c <= chi_square_critical_001(4));
    REQUIRE(std::abs(static_cast<double>(jumps) - 400000.0) <= 1500.0);
  }
  // Events arrive at rate n/(n-1), so actual jumps arrive at rate exactly
  // 1: over [0, 10000] both counts sit in their 5 sigma windows.
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng = Rng::stream(303, seed);
    AbTrajectory tr = simulate_ab(50, 10000.0, rng);
    REQUIRE(std::abs(static_cast<double>(tr.times.size()) - 10204.1) <= 505.0);
    REQUIRE(std::abs(static_cast<double>(tr.actual_jumps) - 10000.0) <= 500.0);
    REQUIRE(tr.times.size() == tr.picks.size());
    for (std::size_t i = 0; i + 1 < tr.times.size(); ++i)
      REQUIRE(tr.times[i] < tr.times[i + 1]);
    REQUIRE(tr.times.back() <= 10000.0);
    comb_validate(tr.final);
  }
  {
    Rng a = Rng::stream(303, 9), b = Rng::stream(303, 9);
    AbTrajectory u = simulate_ab(7, 50.0, a), v = simulate_ab(7, 50.0, b);
    REQUIRE(u.times == v.times);
    REQUIRE(u.picks == v.picks);
    REQUIRE(u.final == v.final);
    CombTree replay = u.initial;
    for (int pick : u.picks) ab_apply(replay, pick);
    REQUIRE(replay == u.final);
    REQUIRE(u.actual_jumps <= u.picks.size());
  }
  Rng rng = Rng::stream(303, 8);
  REQUIRE_THROWS_AS(simulate_ab(1, 1.0, rng), TreeError);
  REQUIRE_THROWS_AS(simulate_ab(5, 0.0, rng), TreeError);
}

TEST_CASE("rescaled runs follow the one-dimensional law", "[ab]") {
  // Mark height at rescaled time 1 from height 0.5, against the continuous
  // transition law. As with the one-dimensional chain, the law's atom at
  // 1.5 (mass e^{-1}) is smeared over a width of order N^{-1/4}, so the
  // full KS distance saturates near half the atom mass at every N; the
  // restricted sup below the atom, the transport distance, and the mass
  // beyond 1.25 all converge.
  const int R = 50000;
  LawRun big = law_run(10000, 304, R);
  LawRun small = law_run(1000, 305, R);

  double ks_big = ks_statistic(big.heights, law_cdf, law_cdf_left);
  double ks_small = ks_statistic(small.heights, law_cdf, law_cdf_left);
  REQUIRE(ks_big >= 0.10);
  REQUIRE(ks_big <= 0.30);
  REQUIRE(ks_small >= 0.10);
  REQUIRE(ks_small <= 0.30);

  double sup_big = sup_below_one(big.heights);
  double sup_small = sup_below_one(small.heights);
  REQUIRE(sup_big <= 0.02);
  REQUIRE(sup_small <= 0.05);
  REQUIRE(sup_big < sup_small);

  std::vector<double> exact;
  {
    Rng rng = Rng::stream(304, 0);
    for (int i = 0; i < 10000; ++i)
      exact.push_back(poisson_construction_sample(0.5, 1.0, rng));
  }
  std::vector<double> head_big(big.heights.begin(),
                               big.heights.begin() + 10000);
  std::vector<double> head_small(small.heights.begin(),
                                 small.heights.begin() + 10000);
  double w1_big = wasserstein1_empirical(head_big, exact);
  double w1_small = wasserstein1_empirical(head_small, exact);
  REQUIRE(w1_big <= 0.05);
  REQUIRE(w1_small <= 0.10);
  REQUIRE(w1_big < 0.6 * w1_small);

  auto mass_above = [](const std::vector<double>& v, double x) {
    long long c = 0;
    for (double h : v)
      if (h >= x) ++c;
    return static_cast<double>(c) / static_cast<double>(v.size());
  };
  double target = std::exp(-0.75);  // P(height >= 1.25) under the law
  REQUIRE(std::abs(mass_above(big.heights, 1.25) - target) <= 0.02);
  REQUIRE(std::abs(mass_above(small.heights, 1.25) - target) <= 0.06);
  REQUIRE(std::abs(mass_above(big.heights, 1.25) - target) <
          std::abs(mass_above(small.heights, 1.25) - target));

  // Trimmed length at time 1 concentrates near lambda0 + 1, short of it by
  // the trim's pendant-tip deficit; its spread scales like N^{-1/4}.
  REQUIRE(big.len_mean >= 1.92);
  REQUIRE(big.len_mean <= 1.97);
  REQUIRE(big.len_sd >= 0.07);
  REQUIRE(big.len_sd <= 0.13);
  REQUIRE(small.len_mean >= 1.80);
  REQUIRE(small.len_mean <= 1.90);

  // Per-replicate pick accounting: about sqrt(N) t events, almost all of
  // them hair picks (growth), regrafts at the macroscopic rate
  // integral of lambda0 + s, no-ops at rate 1/sqrt(N).
  REQUIRE(std::abs(big.events - 100.0) <= 2.0);
  REQUIRE(std::abs(big.grow - 98.5) <= 1.5);
  REQUIRE(std::abs(big.regraft - 1.5) <= 0.15);
  REQUIRE(big.noop <= 0.02);
  REQUIRE(std::abs(small.regraft - 1.5) <= 0.15);
}

TEST_CASE("trimmed length tracks the growth drift", "[ab]") {
  for (std::uint64_t N : {std::uint64_t(1000), std::uint64_t(10000)}) {
    RescaledAbConfig cfg;
    cfg.length_times = {0.0, 0.25, 0.5, 0.75};
    double scale = std::sqrt(static_cast<double>(N));
    double eta = 2.0 / scale;
    const int R = 200;
    std::vector<double> dev(5, 0.0), worst(5, 0.0);
    for (int i = 1; i <= R; ++i) {
      Rng rng = Rng::stream(306, 1000 * N + static_cast<std::uint64_t>(i));
      RescaledAb r = rescaled_ab(N, 1.0, rng, eta, cfg);
      REQUIRE(r.trimmed_lengths.size() == 5);
      for (std::size_t k = 0; k < 5; ++k) {
        double d = r.trimmed_lengths[k].second -
                   (1.0 + r.trimmed_lengths[k].first);
        dev[k] += d;
        worst[k] = std::max(worst[k], std::abs(d));
      }
      // Before any event the state is the broom itself: with the trim depth
      // at exactly two unit edges, the hairs and the handle's end edge go
      // and the other ceil(sqrt(N)) - 1 handle edges survive whole.
      REQUIRE(std::abs(r.trimmed_lengths[0].second -
                       (std::ceil(scale) - 1.0) / scale) <= 1e-9);
    }
    double mean_bound = N == 1000 ? 0.16 : 0.08;
    double max_bound = N == 1000 ? 0.65 : 0.45;
    for (std::size_t k = 0; k < 5; ++k) {
      REQUIRE(std::abs(dev[k]) / R <= mean_bound);
      REQUIRE(worst[k] <= max_bound);
    }
  }
}

TEST_CASE("broom and path initial shapes", "[ab]") {
  {
    Rng a = Rng::stream(307, 1), b = Rng::stream(307, 1);
    RescaledAb u = rescaled_ab(2500, 0.5, a, 0.04);
    RescaledAb v = rescaled_ab(2500, 0.5, b, 0.04);
    REQUIRE(u.final_mark_height == v.final_mark_height);
    REQUIRE(u.final_trimmed_length == v.final_trimmed_length);
    REQUIRE(u.events == v.events);
  }
  {
    // A plain path has no hair reservoir: every actual jump regrafts, and
    // the rescaled length stays of order sqrt(N) instead of lambda0 + t.
    Rng rng = Rng::stream(307, 0);
    RescaledAbConfig cfg;
    cfg.broom = false;
    RescaledAb r = rescaled_ab(10000, 1.0, rng, 0.02, cfg);
    REQUIRE(r.growth_picks == 0);
    REQUIRE(r.regraft_picks > 50);
    REQUIRE(r.final_trimmed_length >= 95.0);
    REQUIRE(r.final_trimmed_length <= 100.0);
    REQUIRE(r.final_mark_height >= 1.0);
    REQUIRE(r.final_mark_height <= 1.6);
  }
  {
    Rng rng = Rng::stream(307, 2);
    RescaledAbConfig series;
    series.record_series = true;
    RescaledAb r = rescaled_ab(400, 1.0, rng, 0.1, series);
    REQUIRE(r.times.size() == r.events);
    REQUIRE(r.mark_heights.size() == r.events);
    for (std::size_t i = 0; i + 1 < r.times.size(); ++i) {
      REQUIRE(r.times[i] < r.times[i + 1]);
      // Between down-jumps the height moves by exactly one unit per event.
      double step = r.mark_heights[i + 1] - r.mark_heights[i];
      REQUIRE((step <= 1.0 / 20.0 + 1e-12 || step < 0.0));
    }
    REQUIRE(r.final_mark_height == r.mark_heights.back());
  }
  Rng rng = Rng::stream(307, 3);
  REQUIRE_THROWS_AS(rescaled_ab(15, 1.0, rng, 0.1), TreeError);
  REQUIRE_THROWS_AS(rescaled_ab(400, 0.0, rng, 0.1), TreeError);
  REQUIRE_THROWS_AS(rescaled_ab(400, 1.0, rng, 0.0), TreeError);
  RescaledAbConfig far;
  far.mark_height = 2.0;
  REQUIRE_THROWS_AS(rescaled_ab(400, 1.0, rng, 0.1, far), TreeError);
  RescaledAbConfig wide;
  wide.lambda0 = 4.0;
  REQUIRE_THROWS_AS(rescaled_ab(16, 1.0, rng, 0.1, wide), TreeError);
  RescaledAbConfig late;
  late.length_times = {2.0};
  REQUIRE_THROWS_AS(rescaled_ab(400, 1.0, rng, 0.1, late), TreeError);
}
