#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "retree/rng.hpp"
#include "retree/tree.hpp"

// Aldous-Broder style chain on rooted combinatorial trees with unit edges,
// uniform-sampling case: pick a vertex, re-root there, hang the old root
// below it. Uniform over the N^{N-1} rooted labeled trees in stationarity.
// Rescaled by sqrt(N) it approaches the growth-and-regraft dynamics, which
// the rescaled runs expose through mark-height and trimmed-length summaries.

namespace retree {

// Vertices are 1..n; parent[v] is 0 for the root and in 1..n otherwise.
struct CombTree {
  int n = 0;
  int root = 1;
  std::vector<int> parent;  // size n + 1; entry 0 unused

  bool operator==(const CombTree& o) const {
    return n == o.n && root == o.root && parent == o.parent;
  }
};

inline CombTree comb_path(int n) {
  if (n < 1) throw TreeError(TreeErrorCode::BadInput, "need n >= 1");
  CombTree t;
  t.n = n;
  t.root = 1;
  t.parent.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int v = 2; v <= n; ++v) t.parent[static_cast<std::size_t>(v)] = v - 1;
  return t;
}

inline void comb_validate(const CombTree& t) {
  if (t.n < 1 || t.root < 1 || t.root > t.n ||
      t.parent.size() != static_cast<std::size_t>(t.n) + 1)
    throw TreeError(TreeErrorCode::BadInput, "malformed tree");
  for (int v = 1; v <= t.n; ++v) {
    if (v == t.root) {
      if (t.parent[static_cast<std::size_t>(v)] != 0)
        throw TreeError(TreeErrorCode::BadInput, "root must have no parent");
      continue;
    }
    int w = v;
    for (int steps = 0; w != t.root; ++steps) {
      if (steps > t.n)
        throw TreeError(TreeErrorCode::Cycle, "parent walk does not reach the root");
      w = t.parent[static_cast<std::size_t>(w)];
      if (w < 1 || w > t.n)
        throw TreeError(TreeErrorCode::BadVertex, "parent out of range");
    }
  }
}

inline std::string comb_key(const CombTree& t) {
  std::string s = std::to_string(t.root);
  for (int v = 1; v <= t.n; ++v) {
    s += ':';
    s += std::to_string(t.parent[static_cast<std::size_t>(v)]);
  }
  return s;
}

// One transition given the picked vertex: a pick of the root changes
// nothing; otherwise the edge from `pick` toward the root is deleted, the
// old root is hung below `pick`, and `pick` becomes the root.
inline void ab_apply(CombTree& t, int pick) {
  if (pick < 1 || pick > t.n)
    throw TreeError(TreeErrorCode::BadVertex, "pick out of range");
  if (pick == t.root) return;
  t.parent[static_cast<std::size_t>(t.root)] = pick;
  t.parent[static_cast<std::size_t>(pick)] = 0;
  t.root = pick;
}

inline CombTree ab_step(const CombTree& t, Rng& rng) {
  if (t.n < 2) throw TreeError(TreeErrorCode::BadInput, "need n >= 2");
  CombTree out = t;
  ab_apply(out, 1 + static_cast<int>(rng.uniform_int(
                      static_cast<std::uint64_t>(t.n))));
  return out;
}

// Event times and picks determine the whole path; states are recovered by
// replaying ab_apply from the initial tree.
struct AbTrajectory {
  CombTree initial;
  double horizon = 0.0;
  std::vector<double> times;
  std::vector<int> picks;
  CombTree final;
  std::uint64_t actual_jumps = 0;
};

// Continuous-time chain: events at rate N/(N-1), so actual (non-no-op)
// jumps arrive at rate exactly 1.
inline AbTrajectory simulate_ab(int N, double t_max, Rng& rng) {
  if (N < 2) throw TreeError(TreeErrorCode::BadInput, "need n >= 2");
  if (!(t_max > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "t_max must be > 0");
  AbTrajectory out;
  out.initial = comb_path(N);
  out.horizon = t_max;
  CombTree t = out.initial;
  double rate = static_cast<double>(N) / (N - 1);
  double s = 0.0;
  for (;;) {
    s += rng.exponential() / rate;
    if (s > t_max) break;
    int pick = 1 + static_cast<int>(
                       rng.uniform_int(static_cast<std::uint64_t>(N)));
    out.times.push_back(s);
    out.picks.push_back(pick);
    if (pick != t.root) ++out.actual_jumps;
    ab_apply(t, pick);
  }
  out.final = std::move(t);
  return out;
}

// All N^{N-1} rooted labeled trees, by filtering parent arrays.
inline std::vector<CombTree> enumerate_rooted_trees(int N) {
  if (N < 2 || N > 5)
    throw TreeError(TreeErrorCode::BadInput, "supported for 2 <= n <= 5");
  std::vector<CombTree> out;
  for (int root = 1; root <= N; ++root) {
    std::vector<int> others;
    for (int v = 1; v <= N; ++v)
      if (v != root) others.push_back(v);
    int k = N - 1;
    std::vector<int> choice(static_cast<std::size_t>(k), 0);
    for (;;) {
      CombTree t;
      t.n = N;
      t.root = root;
      t.parent.assign(static_cast<std::size_t>(N) + 1, 0);
      bool self_loop = false;
      for (int i = 0; i < k; ++i) {
        int p = 1 + choice[static_cast<std::size_t>(i)];
        if (p == others[static_cast<std::size_t>(i)]) self_loop = true;
        t.parent[static_cast<std::size_t>(others[static_cast<std::size_t>(i)])] = p;
      }
      if (!self_loop) {
        bool ok = true;
        for (int v = 1; v <= N && ok; ++v) {
          if (v == root) continue;
          int w = v;
          for (int steps = 0; w != root; ++steps) {
            if (steps > N) {
              ok = false;
              break;
            }
            w = t.parent[static_cast<std::size_t>(w)];
          }
        }
        if (ok) out.push_back(std::move(t));
      }
      int i = 0;
      for (; i < k; ++i) {
        if (++choice[static_cast<std::size_t>(i)] < N) break;
        choice[static_cast<std::size_t>(i)] = 0;
      }
      if (i == k) break;
    }
  }
  return out;
}

// Max over states of |(uniform . kernel)(s) - N^{-(N-1)}| for the exact
// one-step kernel of the uniform-pick chain. Zero in exact arithmetic.
inline double stationarity_residual(int N) {
  if (N < 2 || N > 4)
    throw TreeError(TreeErrorCode::BadInput, "supported for 2 <= n <= 4");
  std::vector<CombTree> states = enumerate_rooted_trees(N);
  std::vector<std::string> keys;
  keys.reserve(states.size());
  for (const CombTree& s : states) keys.push_back(comb_key(s));
  std::vector<std::string> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  auto index_of = [&](const std::string& key) {
    return static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), key) - sorted.begin());
  };
  std::vector<double> mass(states.size(), 0.0);
  double w = 1.0 / (static_cast<double>(states.size()) * N);
  for (const CombTree& s : states) {
    for (int pick = 1; pick <= N; ++pick) {
      CombTree next = s;
      ab_apply(next, pick);
      mass[index_of(comb_key(next))] += w;
    }
  }
  double uniform = 1.0 / static_cast<double>(states.size());
  double worst = 0.0;
  for (double m : mass) worst = std::max(worst, std::abs(m - uniform));
  return worst;
}

// Stationary weight of one tree under a general sampling matrix P
// (0-based storage: P[x-1][y-1] is the chance of proposing y from x):
// the product over non-root vertices of P(x, parent(x)).
inline double wform_mass(const CombTree& t,
                         const std::vector<std::vector<double>>& P) {
  if (P.size() != static_cast<std::size_t>(t.n))
    throw TreeError(TreeErrorCode::BadInput, "matrix size mismatch");
  double m = 1.0;
  for (int v = 1; v <= t.n; ++v) {
    if (v == t.root) continue;
    int p = t.parent[static_cast<std::size_t>(v)];
    m *= P[static_cast<std::size_t>(v - 1)][static_cast<std::size_t>(p - 1)];
  }
  return m;
}

// Initial state for the rescaled runs: a handle of ceil(lambda0 sqrt(N))
// unit edges hanging below the root, with every remaining vertex a unit
// "hair" on the handle's far end. Rescaled by N^{-1/2} the handle is a
// segment of length lambda0 and the hairs vanish, giving a finite limit;
// the hair reservoir is what feeds unit-speed root growth. broom = false
// uses a plain path instead (all vertices on the handle), which has no
// finite rescaled limit and no growth reservoir; it is kept for comparison.
struct RescaledAbConfig {
  double lambda0 = 1.0;
  double mark_height = 0.5;
  bool broom = true;
  bool record_series = false;
  std::vector<double> length_times;  // rescaled; final time always evaluated
};

struct RescaledAb {
  std::uint64_t events = 0;
  std::uint64_t growth_picks = 0;   // picks of a vertex not yet macroscopic
  std::uint64_t regraft_picks = 0;  // picks of a macroscopic non-root vertex
  std::uint64_t noop_picks = 0;
  std::vector<double> times;         // rescaled event times (if recorded)
  std::vector<double> mark_heights;  // rescaled, post-event (if recorded)
  std::vector<std::pair<double, double>> trimmed_lengths;
  double final_mark_height = 0.0;
  double final_trimmed_length = 0.0;
};

namespace detail {

// Rescaled total length of the eta-trimmed tree: an edge contributes the
// part of it whose subtree reaches at least eta below... measured in unit
// edges, a point at residual height h above the deepest descendant survives
// when h >= eta sqrt(N).
inline double trimmed_length_units(const std::vector<int>& parent, int root,
                                   double eta_units) {
  int n = static_cast<int>(parent.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    if (v != root) ++indeg[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
  int head = 0, tail = 0;
  for (int v = 0; v < n; ++v)
    if (indeg[static_cast<std::size_t>(v)] == 0)
      order[static_cast<std::size_t>(tail++)] = v;
  std::vector<int> hgt(static_cast<std::size_t>(n), 0);
  double kept = 0.0;
  while (head < tail) {
    int v = order[static_cast<std::size_t>(head++)];
    if (v == root) continue;
    double reach = hgt[static_cast<std::size_t>(v)] + 1 - eta_units;
    if (reach > 0.0) kept += std::min(1.0, reach);
    int p = parent[static_cast<std::size_t>(v)];
    hgt[static_cast<std::size_t>(p)] =
        std::max(hgt[static_cast<std::size_t>(p)],
                 hgt[static_cast<std::size_t>(v)] + 1);
    if (--indeg[static_cast<std::size_t>(p)] == 0)
      order[static_cast<std::size_t>(tail++)] = p;
  }
  return kept;
}

}  // namespace detail

// Run the chain from the configured initial tree for rescaled time t_max,
// i.e. chain time sqrt(N) t_max, recording N^{-1/2}-rescaled summaries: the
// root-to-mark distance and the eta-trimmed total length.
inline RescaledAb rescaled_ab(std::uint64_t N, double t_max, Rng& rng,
                              double eta,
                              const RescaledAbConfig& cfg = {}) {
  if (N < 16) throw TreeError(TreeErrorCode::BadInput, "need N >= 16");
  if (!(t_max > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "t_max must be > 0");
  if (!(eta > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "eta must be > 0");
  if (!(cfg.lambda0 > 0.0) || !(cfg.mark_height >= 0.0))
    throw TreeError(TreeErrorCode::BadInput, "bad initial geometry");

  int n = static_cast<int>(N);
  double scale = std::sqrt(static_cast<double>(N));
  int handle = cfg.broom
                   ? static_cast<int>(std::ceil(cfg.lambda0 * scale))
                   : n - 1;
  if (handle > n - 2 && cfg.broom)
    throw TreeError(TreeErrorCode::BadInput, "handle exhausts the tree");
  int mark = static_cast<int>(std::llround(cfg.mark_height * scale));
  if (mark > handle)
    throw TreeError(TreeErrorCode::BadInput, "mark beyond the handle");

  // Vertices 0..n-1: 0..handle on the handle (0 the root), the rest hairs
  // on vertex `handle`.
  std::vector<int> parent(static_cast<std::size_t>(n));
  parent[0] = -1;
  for (int v = 1; v <= handle; ++v) parent[static_cast<std::size_t>(v)] = v - 1;
  for (int v = handle + 1; v < n; ++v)
    parent[static_cast<std::size_t>(v)] = handle;
  std::vector<char> macro(static_cast<std::size_t>(n), 0);
  for (int v = 0; v <= handle; ++v) macro[static_cast<std::size_t>(v)] = 1;
  int root = 0;
  int depth = mark;  // unit-edge distance root -> mark

  RescaledAb out;
  std::vector<double> evals = cfg.length_times;
  evals.push_back(t_max);
  std::sort(evals.begin(), evals.end());
  for (double e : evals)
    if (!(e >= 0.0 && e <= t_max))
      throw TreeError(TreeErrorCode::BadInput, "length time out of range");
  std::size_t eptr = 0;
  double eta_units = eta * scale;

  double rate = static_cast<double>(n) / (n - 1);
  double s = 0.0;  // chain time; rescaled time is s / scale
  double s_max = t_max * scale;
  for (;;) {
    s += rng.exponential() / rate;
    double t_now = s >= s_max ? t_max : s / scale;
    while (eptr < evals.size() && evals[eptr] <= t_now) {
      out.trimmed_lengths.emplace_back(
          evals[eptr],
          detail::trimmed_length_units(parent, root, eta_units) / scale);
      ++eptr;
    }
    if (s > s_max) break;
    ++out.events;
    int pick = static_cast<int>(rng.uniform_int(N));
    if (pick == root) {
      ++out.noop_picks;
    } else {
      int at = -1;
      int c = 0;
      for (int w = mark; w != root; w = parent[static_cast<std::size_t>(w)]) {
        if (w == pick) {
          at = c;
          break;
        }
        ++c;
      }
      if (macro[static_cast<std::size_t>(pick)]) {
        ++out.regraft_picks;
      } else {
        ++out.growth_picks;
        macro[static_cast<std::size_t>(pick)] = 1;
      }
      parent[static_cast<std::size_t>(root)] = pick;
      parent[static_cast<std::size_t>(pick)] = -1;
      root = pick;
      depth = at >= 0 ? at : depth + 1;
    }
    if (cfg.record_series) {
      out.times.push_back(s / scale);
      out.mark_heights.push_back(depth / scale);
    }
  }
  out.final_mark_height = depth / scale;
  out.final_trimmed_length = out.trimmed_lengths.back().second;
  return out;
}

}  // namespace retree
