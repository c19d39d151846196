#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "retree/rng.hpp"
#include "retree/tree.hpp"

// Root growth with re-grafting: the root edge lengthens at unit speed, and at
// the arrival times of a Poisson process whose rate equals the current total
// length a uniformly chosen point is cut, the part above it pruned and
// re-attached at the root. Also the line-breaking construction of the same
// tree and the coupling that proves the two agree.

namespace retree {

enum class CutSource { initial_tree, grown_part };

struct CutEvent {
  double time;
  TreePoint point;  // on the tree as it stands just before the jump
  CutSource source;
};

struct EventLog {
  RootedTree initial;
  double horizon = 0.0;
  std::vector<CutEvent> events;
  std::uint64_t root_rejections = 0;  // cut sampled at the root; expected 0
};

// every_k == 0 disables periodic snapshots. at_times entries are absolute
// times in [0, t_max]; a requested time that coincides with a jump records
// the pre-jump state.
struct SnapshotPolicy {
  std::size_t every_k = 0;
  std::vector<double> at_times;
};

struct Trajectory {
  EventLog log;
  std::vector<double> times;          // 0, each jump time, t_max
  std::vector<double> total_lengths;  // measured at `times`
  std::vector<std::vector<double>> mark_heights;  // one series per mark
  std::vector<TreePoint> final_marks;
  RootedTree final_tree;
  std::vector<std::pair<double, RootedTree>> snapshots;
};

// Arrival times on (0, t_max] with intensity lambda0 + s: between events the
// tree's total length grows at unit speed from lambda0, and the cut rate
// equals the length.
inline std::vector<double> sample_cut_times(double lambda0, double t_max,
                                            Rng& rng) {
  if (!(lambda0 >= 0.0))
    throw TreeError(TreeErrorCode::BadInput, "initial length must be >= 0");
  if (!(t_max > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "t_max must be > 0");
  std::vector<double> out;
  double t = 0.0;
  for (;;) {
    t += ramp_gap(lambda0 + t, rng);
    if (t > t_max) return out;
    out.push_back(t);
  }
}

inline RootedTree root_grow(const RootedTree& t, double dt) {
  if (dt < 0.0)
    throw TreeError(TreeErrorCode::NegativeLength, "negative growth");
  RootedTree out = t;
  if (dt > 0.0) out.add_root(dt);
  return out;
}

// What one cut did, in terms of the stepped tree's vertex ids. A mid-edge cut
// splits the edge below split_child at `offset` from its child end; the new
// vertex is the cut point and stays behind as `leaf`. A cut exactly at a
// vertex has split_child == -1 and leaf == that vertex. `moved` lists the
// vertices whose edges were re-hung at the root.
struct RgrCut {
  int leaf = -1;
  int split_child = -1;
  double offset = 0.0;
  std::vector<int> moved;
};

// Prune the subtree strictly above p and re-attach it with its cut end
// identified with the root. Vertex ids are stable: no vertex is deleted, and
// a mid-edge cut appends exactly one vertex.
inline RgrCut rgr_step_inplace(RootedTree& t, TreePoint p) {
  p = canon_point(t, p);
  if (p.vertex == t.root() && p.offset == 0.0)
    throw TreeError(TreeErrorCode::BadPoint, "cut at the root");
  RgrCut cut;
  cut.offset = p.offset;
  if (p.offset == 0.0) {
    cut.leaf = p.vertex;
    auto ch = t.children();
    cut.moved = ch[static_cast<std::size_t>(p.vertex)];
    for (int c : cut.moved) t.reparent(c, t.root());
  } else {
    int v = p.vertex;
    int m = t.split_edge(v, p.offset);
    t.reparent(v, t.root());
    cut.leaf = m;
    cut.split_child = v;
    cut.moved.push_back(v);
  }
  return cut;
}

inline RootedTree rgr_step(const RootedTree& t, TreePoint p) {
  RootedTree out = t;
  rgr_step_inplace(out, p);
  return out;
}

namespace detail {

// Fenwick tree over edge lengths keyed by vertex id, so a length-uniform
// point can be drawn in O(log n) instead of scanning every edge. Slots are
// appended in vertex-id order as vertices are created.
class LengthIndex {
 public:
  void push(double w) {
    int i = ++cap_;
    int low = i & -i;
    double base = prefix(i - 1) - prefix(i - low);
    bit_.push_back(base + w);
  }

  void add(int slot, double d) {
    for (int i = slot; i <= cap_; i += i & -i) bit_[i - 1] += d;
  }

  double prefix(int i) const {
    double s = 0.0;
    for (; i > 0; i -= i & -i) s += bit_[i - 1];
    return s;
  }

  double total() const { return prefix(cap_); }

  // Smallest slot whose cumulative weight exceeds target, plus the residual
  // inside that slot. target must lie in [0, total()).
  std::pair<int, double> locate(double target) const {
    int pos = 0;
    double acc = 0.0;
    int pw = 1;
    while (2 * pw <= cap_) pw *= 2;
    for (; pw > 0; pw /= 2) {
      int nxt = pos + pw;
      if (nxt <= cap_ && acc + bit_[nxt - 1] <= target) {
        pos = nxt;
        acc += bit_[nxt - 1];
      }
    }
    return {pos + 1, target - acc};
  }

  int size() const { return cap_; }

 private:
  std::vector<double> bit_;
  int cap_ = 0;
};

}  // namespace detail

// Run the dynamics from `initial` up to t_max. Cut points are drawn uniformly
// by length measure on the current tree, which is the projection of the
// underlying pair of point processes on the initial skeleton and the grown
// part; the source tag records which side each cut came from. Marks keep
// their identity through every split and re-graft, and their height series is
// recorded at time 0, at every jump, and at t_max.
inline Trajectory simulate_rgr(const RootedTree& initial, double t_max,
                               Rng& rng,
                               const std::vector<TreePoint>& marks = {},
                               const SnapshotPolicy& policy = {}) {
  if (!(t_max > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "t_max must be > 0");
  initial.validate();

  RootedTree t = initial;
  const double lambda0 = t.total_length();
  std::vector<TreePoint> ms;
  ms.reserve(marks.size());
  for (const TreePoint& m : marks) ms.push_back(canon_point(t, m));

  Trajectory out;
  out.log.initial = initial;
  out.log.horizon = t_max;

  detail::LengthIndex len;
  std::vector<char> grown;
  for (int v = 0; v < t.n(); ++v) {
    len.push(v == t.root() ? 0.0 : t.edge_length(v));
    grown.push_back(0);
  }

  std::vector<double> snap_at = policy.at_times;
  std::sort(snap_at.begin(), snap_at.end());
  for (double s : snap_at)
    if (!(s >= 0.0 && s <= t_max))
      throw TreeError(TreeErrorCode::BadInput, "snapshot time out of range");
  std::size_t snap_ptr = 0;

  out.times.push_back(0.0);
  out.total_lengths.push_back(lambda0);
  out.mark_heights.resize(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i)
    out.mark_heights[i].push_back(point_height(t, ms[i]));

  double now = 0.0;
  double expected = lambda0;

  auto grow_to = [&](double target) {
    while (snap_ptr < snap_at.size() && snap_at[snap_ptr] <= target) {
      double s = snap_at[snap_ptr++];
      RootedTree c = t;
      if (s > now) c.add_root(s - now);
      out.snapshots.emplace_back(s, std::move(c));
    }
    if (target > now) {
      int old_root = t.root();
      t.add_root(target - now);
      grown[old_root] = 1;
      grown.push_back(0);
      len.add(old_root + 1, target - now);
      len.push(0.0);
      expected += target - now;
      now = target;
    }
  };

  std::size_t event_i = 0;
  double t_ev = 0.0;
  for (;;) {
    t_ev += ramp_gap(lambda0 + t_ev, rng);
    if (t_ev > t_max) break;
    grow_to(t_ev);

    TreePoint p{-1, 0.0};
    for (;;) {
      double target = rng.uniform() * len.total();
      auto [slot, off] = len.locate(target);
      int v = slot - 1;
      if (v < 0 || v >= t.n() || v == t.root()) continue;
      double w = t.edge_length(v);
      if (!(off >= 0.0)) continue;
      if (off >= w) {
        // Boundary draw: the point is the parent vertex itself.
        if (t.parent(v) == t.root()) {
          ++out.log.root_rejections;
          continue;
        }
        off = w;
      }
      p = {v, off};
      break;
    }
    CutSource src =
        grown[p.vertex] ? CutSource::grown_part : CutSource::initial_tree;
    out.log.events.push_back({t_ev, p, src});

    double w_old =
        p.offset > 0.0 && p.offset < t.edge_length(p.vertex)
            ? t.edge_length(p.vertex)
            : 0.0;
    RgrCut cut = rgr_step_inplace(t, p);
    if (cut.split_child >= 0) {
      int v = cut.split_child;
      len.add(v + 1, t.edge_length(v) - w_old);
      len.push(t.edge_length(cut.leaf));
      grown.push_back(grown[v]);
      for (TreePoint& m : ms)
        if (m.vertex == v && m.offset >= cut.offset)
          m = {cut.leaf, m.offset - cut.offset};
    }

    if (std::abs(len.total() - expected) > 1e-9)
      throw TreeError(TreeErrorCode::BadInput,
                      "length conservation violated");

    out.times.push_back(t_ev);
    out.total_lengths.push_back(len.total());
    for (std::size_t i = 0; i < ms.size(); ++i)
      out.mark_heights[i].push_back(point_height(t, ms[i]));

    ++event_i;
    if (policy.every_k != 0 && event_i % policy.every_k == 0)
      out.snapshots.emplace_back(t_ev, t);
  }

  grow_to(t_max);
  out.times.push_back(t_max);
  out.total_lengths.push_back(len.total());
  for (std::size_t i = 0; i < ms.size(); ++i)
    out.mark_heights[i].push_back(point_height(t, ms[i]));

  if (std::abs(t.total_length() - (lambda0 + t_max)) > 1e-9)
    throw TreeError(TreeErrorCode::BadInput, "length conservation violated");

  out.final_marks = ms;
  out.final_tree = std::move(t);
  return out;
}

struct LineBreak {
  RootedTree tree;
  std::vector<double> taus;
  std::vector<double> us;
};

namespace detail {

// Fold the interval (0, tau_n] into a tree: segment k runs over
// (tau_k, tau_{k+1}] and hangs, for k >= 1, at coordinate u_k tau_k inside an
// earlier segment; segment 0 hangs at the root. The leaf at tau_{k+1} gets
// label k+2 in arrival order (leaf 1 is the end of segment 0).
inline RootedTree build_line_tree(const std::vector<double>& taus,
                                  const std::vector<double>& us) {
  std::size_t n = taus.size();
  std::vector<double> att(n);
  att[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) att[k] = us[k - 1] * taus[k - 1];

  // inner[j]: attachment coordinates that land inside segment j.
  std::vector<std::vector<double>> inner(n);
  for (std::size_t k = 1; k < n; ++k) {
    std::size_t j = static_cast<std::size_t>(
        std::lower_bound(taus.begin(), taus.end(), att[k]) - taus.begin());
    if (j >= k)
      throw TreeError(TreeErrorCode::BadInput,
                      "attachment must precede its segment");
    inner[j].push_back(att[k]);
  }
  for (auto& v : inner) std::sort(v.begin(), v.end());

  RootedTree t;
  std::map<double, int> at;
  at[0.0] = t.root();
  for (std::size_t j = 0; j < n; ++j) {
    double lo = j == 0 ? 0.0 : taus[j - 1];
    double hi = taus[j];
    auto it = at.find(att[j]);
    if (it == at.end())
      throw TreeError(TreeErrorCode::BadInput, "unplaced attachment");
    int prev = it->second;
    double prev_c = lo;
    for (double c : inner[j]) {
      if (c == hi) continue;  // the leaf vertex will own this coordinate
      auto known = at.find(c);
      if (known != at.end()) {
        prev = known->second;
        prev_c = c;
        continue;
      }
      prev = t.add_child(prev, c - prev_c);
      at[c] = prev;
      prev_c = c;
    }
    int leaf = t.add_child(prev, hi - prev_c);
    at[hi] = leaf;
    t.set_label(leaf, std::to_string(j + 1));
  }
  return t;
}

}  // namespace detail

// Aldous's line-breaking process run to the n-th cut time: branches arrive at
// rate t at time t, each new branch starting from a uniform point of the
// current tree. Returns R at time tau_n- with leaves labeled 1..n.
inline LineBreak simulate_line_breaking(std::uint64_t n, Rng& rng) {
  if (n < 1) throw TreeError(TreeErrorCode::BadInput, "need n >= 1");
  LineBreak out;
  double t = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    t += ramp_gap(t, rng);
    out.taus.push_back(t);
  }
  for (std::uint64_t i = 0; i + 1 < n; ++i)
    out.us.push_back(rng.uniform_pos());
  out.tree = detail::build_line_tree(out.taus, out.us);
  return out;
}

struct CoupledPair {
  RootedTree r_tree;
  RootedTree t_tree;
  std::vector<double> taus;
  std::vector<double> us;
};

// One draw of (tau_1..tau_n, u_1..u_{n-1}) drives both constructions: the
// line-breaking tree directly, and the growth dynamics by cutting at
// coordinate u_k tau_k, where each edge remembers the interval of creation
// times it carries. The two trees then share one set of edge lengths.
inline CoupledPair coupled_Rn_Tn(std::uint64_t n, Rng& rng) {
  if (n < 1) throw TreeError(TreeErrorCode::BadInput, "need n >= 1");
  CoupledPair out;
  double t = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    t += ramp_gap(t, rng);
    out.taus.push_back(t);
  }
  for (std::uint64_t i = 0; i + 1 < n; ++i)
    out.us.push_back(rng.uniform_pos());
  out.r_tree = detail::build_line_tree(out.taus, out.us);

  // Replay. lo[v] and hi[v] bound the creation-time coordinates carried by
  // the edge below v, child end at lo[v]; the current root sits at the
  // current time.
  RootedTree tr;
  std::vector<double> lo{0.0}, hi{0.0};
  double prev = 0.0;
  for (std::uint64_t k = 1; k < n; ++k) {
    double tk = out.taus[k - 1];
    int old_root = tr.root();
    tr.add_root(tk - prev);
    lo.resize(tr.n(), 0.0);
    hi.resize(tr.n(), 0.0);
    lo[old_root] = prev;
    hi[old_root] = tk;

    double c = out.us[k - 1] * tk;
    int v = -1;
    for (int w = 0; w < tr.n(); ++w) {
      if (w == tr.root()) continue;
      if (lo[w] < c && c <= hi[w]) {
        v = w;
        break;
      }
    }
    if (v < 0) throw TreeError(TreeErrorCode::BadInput, "cut off the tree");
    double off = c - lo[v];
    double w_len = tr.edge_length(v);
    if (off > w_len) off = w_len;  // c == hi[v] up to rounding: a vertex cut

    RgrCut cut = rgr_step_inplace(tr, {v, off});
    if (cut.split_child >= 0) {
      lo.resize(tr.n(), 0.0);
      hi.resize(tr.n(), 0.0);
      lo[cut.leaf] = c;
      hi[cut.leaf] = hi[v];
      hi[v] = c;
    }
    tr.set_label(cut.leaf, std::to_string(k + 1));
    prev = tk;
  }
  tr.add_root(out.taus[n - 1] - prev);
  tr.set_label(0, "1");
  out.t_tree = std::move(tr);
  return out;
}

// Edge lengths in the canonical order: the root-to-leaf-1 path first, then
// for each further leaf the edges from its path's junction with what was
// already walked, root side first. 2n-1 entries for a bifurcating tree with
// leaves labeled 1..n.
inline std::vector<double> canonical_lengths(const RootedTree& t) {
  std::map<std::string, int> by_label;
  for (const auto& [v, s] : t.labels()) by_label[s] = v;
  std::size_t n = by_label.size();
  if (n == 0)
    throw TreeError(TreeErrorCode::BadInput, "no labeled leaves");
  std::vector<double> out;
  std::vector<char> vis(static_cast<std::size_t>(t.n()), 0);
  vis[static_cast<std::size_t>(t.root())] = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    auto it = by_label.find(std::to_string(i));
    if (it == by_label.end())
      throw TreeError(TreeErrorCode::BadInput, "labels must be 1..n");
    std::vector<double> seg;
    int v = it->second;
    while (!vis[static_cast<std::size_t>(v)]) {
      seg.push_back(t.edge_length(v));
      vis[static_cast<std::size_t>(v)] = 1;
      v = t.parent(v);
    }
    out.insert(out.end(), seg.rbegin(), seg.rend());
  }
  return out;
}

// Canonical code of the rooted leaf-labeled combinatorial tree, invariant
// under isometry and vertex renumbering. Degree-2 vertices are suppressed
// before encoding, so transient split points do not change the code.
inline std::string shape_of(const RootedTree& t) {
  RootedTree c = canonicalize(t, 0.0);
  auto kids = c.children();
  auto code = [&](auto&& self, int v) -> std::string {
    if (kids[v].empty()) {
      auto it = c.labels().find(v);
      if (it == c.labels().end())
        throw TreeError(TreeErrorCode::BadInput, "unlabeled leaf");
      return "L" + it->second;
    }
    std::vector<std::string> parts;
    for (int k : kids[v]) parts.push_back(self(self, k));
    std::sort(parts.begin(), parts.end());
    std::string s = "(";
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) s += ",";
      s += parts[i];
    }
    s += ")";
    return s;
  };
  return code(code, c.root());
}

}  // namespace retree
