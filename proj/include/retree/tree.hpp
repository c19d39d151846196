#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "retree/rng.hpp"

namespace retree {

enum class TreeErrorCode {
  NegativeLength,
  Cycle,
  Disconnected,
  BadVertex,
  BadPoint,
  BadMatrix,
  NetTooLarge,
  BadInput,
};

struct TreeError : std::runtime_error {
  TreeErrorCode code;
  TreeError(TreeErrorCode c, const std::string& what)
      : std::runtime_error(what), code(c) {}
};

// A point of the tree: either the vertex itself (offset 0) or a point on the
// edge from `vertex` toward its parent, `offset` away from the vertex.
struct TreePoint {
  int vertex = 0;
  double offset = 0.0;
};

// Finite rooted tree with positive edge lengths. Vertices are dense indices;
// parent(root) == -1. Ids stay stable under the mutating edits used by the
// simulators (splits and re-parenting never renumber).
class RootedTree {
 public:
  RootedTree() : parent_{-1}, plen_{0.0}, root_(0) {}

  static RootedTree trivial() { return RootedTree(); }

  static RootedTree from_parents(std::vector<int> parent,
                                 std::vector<double> plen, int root) {
    RootedTree t;
    t.parent_ = std::move(parent);
    t.plen_ = std::move(plen);
    t.root_ = root;
    t.validate();
    return t;
  }

  int n() const { return static_cast<int>(parent_.size()); }
  int root() const { return root_; }
  int parent(int v) const { return parent_[v]; }
  double edge_length(int v) const { return plen_[v]; }

  const std::map<int, std::string>& labels() const { return labels_; }
  void set_label(int v, std::string s) {
    check_vertex(v);
    labels_[v] = std::move(s);
  }

  double total_length() const {
    double s = 0.0;
    for (int v = 0; v < n(); ++v)
      if (v != root_) s += plen_[v];
    return s;
  }

  std::vector<std::vector<int>> children() const {
    std::vector<std::vector<int>> ch(n());
    for (int v = 0; v < n(); ++v)
      if (v != root_) ch[parent_[v]].push_back(v);
    return ch;
  }

  int depth_of(int v) const {
    check_vertex(v);
    int d = 0;
    while (parent_[v] >= 0) {
      v = parent_[v];
      ++d;
    }
    return d;
  }

  double height_of(int v) const {
    check_vertex(v);
    double h = 0.0;
    while (parent_[v] >= 0) {
      h += plen_[v];
      v = parent_[v];
    }
    return h;
  }

  // --- mutating edits used by the dynamics ---

  // New vertex attached below `parent` (away from the root).
  int add_child(int parent, double len) {
    check_vertex(parent);
    if (!(len > 0.0))
      throw TreeError(TreeErrorCode::NegativeLength, "add_child: need len > 0");
    parent_.push_back(parent);
    plen_.push_back(len);
    return n() - 1;
  }

  // New root above the old one; every old point gains `len` of height.
  int add_root(double len) {
    if (!(len > 0.0))
      throw TreeError(TreeErrorCode::NegativeLength, "add_root: need len > 0");
    parent_.push_back(-1);
    plen_.push_back(0.0);
    int r = n() - 1;
    parent_[root_] = r;
    plen_[root_] = len;
    root_ = r;
    return r;
  }

  // Splits the edge above `v` at `offset` from v; returns the new vertex
  // sitting at the split point. Offsets in (0, edge_length(v)) only.
  int split_edge(int v, double offset) {
    check_vertex(v);
    if (v == root_ || !(offset > 0.0) || !(offset < plen_[v]))
      throw TreeError(TreeErrorCode::BadPoint, "split_edge: bad position");
    parent_.push_back(parent_[v]);
    plen_.push_back(plen_[v] - offset);
    int m = n() - 1;
    parent_[v] = m;
    plen_[v] = offset;
    return m;
  }

  // Re-hangs v (with its whole subtree) below `new_parent`, keeping the edge
  // length. The caller is responsible for not creating a cycle.
  void reparent(int v, int new_parent) {
    check_vertex(v);
    check_vertex(new_parent);
    if (v == root_)
      throw TreeError(TreeErrorCode::BadVertex, "reparent: cannot move root");
    parent_[v] = new_parent;
  }

  void validate() const {
    int nn = n();
    if (nn == 0 || root_ < 0 || root_ >= nn || parent_[root_] != -1)
      throw TreeError(TreeErrorCode::BadInput, "validate: bad root");
    for (int v = 0; v < nn; ++v) {
      if (v == root_) continue;
      if (parent_[v] < 0 || parent_[v] >= nn)
        throw TreeError(TreeErrorCode::Disconnected, "validate: missing parent");
      if (!(plen_[v] > 0.0))
        throw TreeError(TreeErrorCode::NegativeLength,
                        "validate: edge length must be positive");
    }
    // Every vertex must reach the root without revisiting anything.
    std::vector<int> state(nn, 0);  // 0 fresh, 1 on path, 2 done
    state[root_] = 2;
    std::vector<int> path;
    for (int v0 = 0; v0 < nn; ++v0) {
      int v = v0;
      path.clear();
      while (state[v] == 0) {
        state[v] = 1;
        path.push_back(v);
        v = parent_[v];
      }
      if (state[v] == 1)
        throw TreeError(TreeErrorCode::Cycle, "validate: cycle");
      for (int u : path) state[u] = 2;
    }
  }

 private:
  void check_vertex(int v) const {
    if (v < 0 || v >= n())
      throw TreeError(TreeErrorCode::BadVertex, "vertex out of range");
  }

  std::vector<int> parent_;
  std::vector<double> plen_;
  int root_;
  std::map<int, std::string> labels_;
};

// Normalizes a point: an offset equal to the full edge length means the
// parent vertex.
inline TreePoint canon_point(const RootedTree& t, TreePoint p) {
  if (p.vertex < 0 || p.vertex >= t.n())
    throw TreeError(TreeErrorCode::BadPoint, "point anchor out of range");
  if (p.offset == 0.0) return p;
  if (p.vertex == t.root() || p.offset < 0.0 ||
      p.offset > t.edge_length(p.vertex))
    throw TreeError(TreeErrorCode::BadPoint, "point off its edge");
  if (p.offset == t.edge_length(p.vertex))
    return TreePoint{t.parent(p.vertex), 0.0};
  return p;
}

inline double point_height(const RootedTree& t, TreePoint p) {
  p = canon_point(t, p);
  return t.height_of(p.vertex) - p.offset;
}

inline int lca_vertex(const RootedTree& t, int u, int w) {
  int du = t.depth_of(u), dw = t.depth_of(w);
  while (du > dw) {
    u = t.parent(u);
    --du;
  }
  while (dw > du) {
    w = t.parent(w);
    --dw;
  }
  while (u != w) {
    u = t.parent(u);
    w = t.parent(w);
  }
  return u;
}

// Geodesic distance between two points.
inline double distance(const RootedTree& t, TreePoint a, TreePoint b) {
  a = canon_point(t, a);
  b = canon_point(t, b);
  if (a.vertex == b.vertex) return std::abs(a.offset - b.offset);
  int l = lca_vertex(t, a.vertex, b.vertex);
  double ha = t.height_of(a.vertex) - a.offset;
  double hb = t.height_of(b.vertex) - b.offset;
  // With the anchor on the root side, the shallower point lies on the other
  // one's root path; otherwise the paths join at the lca vertex.
  if (l == a.vertex) return std::max(0.0, hb - ha);
  if (l == b.vertex) return std::max(0.0, ha - hb);
  double hl = t.height_of(l);
  return std::max(0.0, ha - hl) + std::max(0.0, hb - hl);
}

// Most recent common ancestor: the deepest point lying on both root paths.
inline TreePoint mca(const RootedTree& t, TreePoint a, TreePoint b) {
  a = canon_point(t, a);
  b = canon_point(t, b);
  if (a.vertex == b.vertex)
    return TreePoint{a.vertex, std::max(a.offset, b.offset)};
  int l = lca_vertex(t, a.vertex, b.vertex);
  if (l == a.vertex) return a;
  if (l == b.vertex) return b;
  return TreePoint{l, 0.0};
}

inline double height(const RootedTree& t) {
  double h = 0.0;
  for (int v = 0; v < t.n(); ++v) h = std::max(h, t.height_of(v));
  return h;
}

// The closed subtree of points having p on their root path, re-rooted at p.
// Returns a fresh tree; `old_ids`, when given, receives for each new vertex
// the id it had in `t` (-1 for a root materialized mid-edge).
inline RootedTree subtree_above(const RootedTree& t, TreePoint p,
                                std::vector<int>* old_ids = nullptr) {
  p = canon_point(t, p);
  auto ch = t.children();
  std::vector<int> order;  // vertices of the subtree hanging below p's anchor
  order.push_back(p.vertex);
  for (std::size_t i = 0; i < order.size(); ++i)
    for (int c : ch[order[i]]) order.push_back(c);

  std::vector<int> newid(t.n(), -1);
  std::vector<int> par;
  std::vector<double> plen;
  std::vector<int> olds;
  int root;
  if (p.offset == 0.0) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      newid[order[i]] = static_cast<int>(i);
      par.push_back(i == 0 ? -1 : newid[t.parent(order[i])]);
      plen.push_back(i == 0 ? 0.0 : t.edge_length(order[i]));
      olds.push_back(order[i]);
    }
    root = 0;
  } else {
    par.push_back(-1);  // the cut point becomes the root
    plen.push_back(0.0);
    olds.push_back(-1);
    for (std::size_t i = 0; i < order.size(); ++i) {
      newid[order[i]] = static_cast<int>(i) + 1;
      par.push_back(i == 0 ? 0 : newid[t.parent(order[i])]);
      plen.push_back(i == 0 ? p.offset : t.edge_length(order[i]));
      olds.push_back(order[i]);
    }
    root = 0;
  }
  RootedTree out = RootedTree::from_parents(par, plen, root);
  for (auto& [v, s] : t.labels())
    if (newid[v] >= 0) out.set_label(newid[v], s);
  if (old_ids) *old_ids = olds;
  return out;
}

// Point drawn uniformly with respect to arc length; the root for a trivial
// tree. Edges are scanned in vertex order, so a fixed seed gives a fixed
// draw sequence.
inline TreePoint sample_point(const RootedTree& t, Rng& rng) {
  double total = t.total_length();
  if (total <= 0.0) return TreePoint{t.root(), 0.0};
  for (;;) {
    double target = rng.uniform() * total;
    for (int v = 0; v < t.n(); ++v) {
      if (v == t.root()) continue;
      double len = t.edge_length(v);
      if (target < len) return TreePoint{v, target};
      target -= len;
    }
    // fell off the end by rounding; redraw
  }
}

// --- distance-matrix utilities ---

inline void check_matrix(const std::vector<std::vector<double>>& d) {
  std::size_t n = d.size();
  if (n == 0) throw TreeError(TreeErrorCode::BadMatrix, "empty matrix");
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i].size() != n)
      throw TreeError(TreeErrorCode::BadMatrix, "matrix not square");
    if (d[i][i] != 0.0)
      throw TreeError(TreeErrorCode::BadMatrix, "nonzero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      if (d[i][j] < 0.0 || std::abs(d[i][j] - d[j][i]) > 1e-12)
        throw TreeError(TreeErrorCode::BadMatrix, "matrix not symmetric");
    }
  }
}

// Checks the tree inequality on every quadruple: d14 + d23 never exceeds the
// larger of the two other pairings by more than `tol`.
inline bool four_point_check(const std::vector<std::vector<double>>& d,
                             double tol = 1e-9) {
  check_matrix(d);
  std::size_t n = d.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) {
          double a = d[i][j] + d[k][l];
          double b = d[i][k] + d[j][l];
          double c = d[i][l] + d[j][k];
          double hi = std::max({a, b, c});
          double mid = a + b + c - hi - std::min({a, b, c});
          if (hi > mid + tol) return false;
        }
  return true;
}

// Total length of the subtree spanned by points x_0..x_{n-1}, from their
// pairwise distances alone: each new point adds its distance to the span,
// which is the smallest half-sum gap over pairs already included.
inline double spanned_length_from_distances(
    const std::vector<std::vector<double>>& d) {
  check_matrix(d);
  std::size_t n = d.size();
  if (n < 2)
    throw TreeError(TreeErrorCode::BadMatrix, "need at least two points");
  double total = d[0][1];
  for (std::size_t k = 2; k < n; ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        best = std::min(best, 0.5 * (d[k][i] + d[k][j] - d[i][j]));
    total += std::max(0.0, best);
  }
  return total;
}

// --- canonical form ---

// Contracts zero-length edges and splices out degree-2 interior vertices.
// Labels on removed vertices migrate to the surviving vertex (contraction)
// or are dropped (splice).
inline RootedTree canonicalize(const RootedTree& t, double zero_tol = 0.0) {
  int nn = t.n();
  // Union zero-length edges child-into-parent.
  std::vector<int> rep(nn);
  for (int v = 0; v < nn; ++v) rep[v] = v;
  auto find = [&](int v) {
    while (rep[v] != v) v = rep[v] = rep[rep[v]];
    return v;
  };
  for (int v = 0; v < nn; ++v)
    if (v != t.root() && t.edge_length(v) <= zero_tol) rep[find(v)] = find(t.parent(v));

  std::vector<int> par(nn, -2);
  std::vector<double> plen(nn, 0.0);
  int root = find(t.root());
  for (int v = 0; v < nn; ++v) {
    if (find(v) != v) continue;
    if (v == root) {
      par[v] = -1;
      continue;
    }
    // A representative's own edge survived contraction, so its length is kept.
    par[v] = find(t.parent(v));
    plen[v] = t.edge_length(v);
  }
  // Splice chains of degree-2 interior vertices.
  std::vector<int> nchild(nn, 0);
  for (int v = 0; v < nn; ++v)
    if (find(v) == v && v != root) nchild[par[v]]++;
  std::vector<bool> splice(nn, false);
  for (int v = 0; v < nn; ++v)
    if (find(v) == v && v != root && nchild[v] == 1) splice[v] = true;
  for (int v = 0; v < nn; ++v) {
    if (find(v) != v || v == root || par[v] == -2) continue;
    if (splice[v]) continue;
    int u = par[v];
    double acc = plen[v];
    while (u != root && splice[u]) {
      acc += plen[u];
      u = par[u];
    }
    par[v] = u;
    plen[v] = acc;
  }

  // Compact ids (kept vertices in old-id order).
  std::vector<int> newid(nn, -1);
  int m = 0;
  for (int v = 0; v < nn; ++v)
    if (find(v) == v && !splice[v]) newid[v] = m++;
  std::vector<int> par2(m);
  std::vector<double> plen2(m);
  for (int v = 0; v < nn; ++v) {
    if (newid[v] < 0) continue;
    par2[newid[v]] = v == root ? -1 : newid[par[v]];
    plen2[newid[v]] = v == root ? 0.0 : plen[v];
  }
  RootedTree out = RootedTree::from_parents(par2, plen2, newid[root]);
  // A surviving vertex keeps its own label; labels of vertices contracted
  // into it fill in only when it had none.
  std::map<int, std::string> fallback;
  for (auto& [v, s] : t.labels()) {
    int r = find(v);
    if (newid[r] < 0) continue;
    if (v == r)
      out.set_label(newid[r], s);
    else
      fallback.emplace(newid[r], s);
  }
  for (auto& [v, s] : fallback)
    if (out.labels().count(v) == 0) out.set_label(v, s);
  return out;
}

namespace detail {

// Perfect matching on a boolean compatibility matrix (Kuhn's algorithm).
inline bool perfect_matching(const std::vector<std::vector<bool>>& ok) {
  int n = static_cast<int>(ok.size());
  if (n == 0) return true;
  int m = static_cast<int>(ok[0].size());
  if (n != m) return false;
  std::vector<int> match(m, -1);
  std::vector<bool> used;
  std::function<bool(int)> try_row = [&](int i) -> bool {
    for (int j = 0; j < m; ++j) {
      if (!ok[i][j] || used[j]) continue;
      used[j] = true;
      if (match[j] < 0 || try_row(match[j])) {
        match[j] = i;
        return true;
      }
    }
    return false;
  };
  for (int i = 0; i < n; ++i) {
    used.assign(m, false);
    if (!try_row(i)) return false;
  }
  return true;
}

}  // namespace detail

// Root-preserving isometry test, up to `tol` on every edge length. Both
// trees are canonicalized first, so transient degree-2 vertices or
// zero-length edges do not affect the outcome. Leaf labels are ignored.
inline bool trees_isometric(const RootedTree& ta, const RootedTree& tb,
                            double tol = 1e-9) {
  RootedTree a = canonicalize(ta, tol * 1e-3);
  RootedTree b = canonicalize(tb, tol * 1e-3);
  if (a.n() != b.n()) return false;
  if (std::abs(a.total_length() - b.total_length()) > tol * a.n()) return false;
  auto cha = a.children();
  auto chb = b.children();
  std::map<std::pair<int, int>, bool> memo;
  std::function<bool(int, int)> eq = [&](int u, int v) -> bool {
    auto key = std::make_pair(u, v);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    bool res = false;
    if (cha[u].size() == chb[v].size()) {
      std::size_t k = cha[u].size();
      std::vector<std::vector<bool>> ok(k, std::vector<bool>(k, false));
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
          int cu = cha[u][i], cv = chb[v][j];
          ok[i][j] = std::abs(a.edge_length(cu) - b.edge_length(cv)) <= tol &&
                     eq(cu, cv);
        }
      res = detail::perfect_matching(ok);
    }
    memo[key] = res;
    return res;
  };
  return eq(a.root(), b.root());
}

}  // namespace retree
