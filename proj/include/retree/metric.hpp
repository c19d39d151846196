#pragma once
// Comparisons between rooted trees: Hausdorff distance machinery over segment
// subsets, correspondences and their distortion, exact rooted GH values on
// small nets with a certified error bound, cheap sound lower/upper envelopes,
// epsilon-isometry checking, and the eta-trimming map.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "retree/tree.hpp"
#include "retree/tree_io.hpp"

namespace retree {

// Closed portion [lo, hi] of the edge below `vertex`, offsets measured from
// the vertex toward its parent. lo == hi is a single point; for the root
// (which has no edge) only the degenerate {root, 0, 0} form is meaningful.
struct Segment {
  int vertex;
  double lo;
  double hi;
};

inline std::vector<Segment> whole_tree_segments(const RootedTree& t) {
  std::vector<Segment> out;
  for (int v = 0; v < t.n(); ++v)
    if (v != t.root()) out.push_back({v, 0.0, t.edge_length(v)});
  if (out.empty()) out.push_back({t.root(), 0.0, 0.0});
  return out;
}

// Distance from a point to a closed segment. The geodesic meets the segment
// either at an endpoint or at the gate between them, and in every case the
// value is half the excess of the two endpoint routes over the segment span.
inline double point_segment_distance(const RootedTree& t, TreePoint q,
                                     Segment s) {
  double dlo = distance(t, q, {s.vertex, s.lo});
  double dhi = distance(t, q, {s.vertex, s.hi});
  return std::max(0.0, 0.5 * (dlo + dhi - (s.hi - s.lo)));
}

inline double dist_to_segments(const RootedTree& t, TreePoint q,
                               const std::vector<Segment>& segs) {
  if (segs.empty()) throw TreeError(TreeErrorCode::BadInput, "empty point set");
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& s : segs)
    best = std::min(best, point_segment_distance(t, q, s));
  return best;
}

namespace detail {

// Exact max over offsets in [lo, hi] on the edge below v of the distance to
// the union B. The distance restricted to one edge is the lower envelope of
// unit-slope pieces: a rising line through the child end, a falling line
// through the parent end, and a flat-bottomed V for every piece of B that
// lies on this very edge. The max sits at an interval end or where a rising
// piece crosses a falling one, so those crossings are the only candidates.
inline double max_dist_on_interval(const RootedTree& t, int v, double lo,
                                   double hi,
                                   const std::vector<Segment>& B) {
  double ec = dist_to_segments(t, {v, 0.0}, B);
  double L = v == t.root() ? 0.0 : t.edge_length(v);
  double ep =
      v == t.root() ? ec : dist_to_segments(t, {t.parent(v), 0.0}, B);
  std::vector<Segment> on_edge;
  for (const Segment& s : B)
    if (s.vertex == v) on_edge.push_back(s);

  auto value = [&](double x) {
    double g = std::min(x + ec, (L - x) + ep);
    for (const Segment& s : on_edge)
      g = std::min(g, std::max({0.0, s.lo - x, x - s.hi}));
    return g;
  };

  std::vector<double> cand{lo, hi};
  auto add = [&](double x) {
    if (x > lo && x < hi) cand.push_back(x);
  };
  add(0.5 * (L + ep - ec));
  for (const Segment& s : on_edge) {
    add(0.5 * (s.lo - ec));
    add(0.5 * (L + ep + s.hi));
    for (const Segment& r : on_edge) add(0.5 * (s.lo + r.hi));
  }
  double best = 0.0;
  for (double x : cand) best = std::max(best, value(x));
  return best;
}

}  // namespace detail

// sup over points of the union A of the distance to the union B.
inline double sup_dist_segments(const RootedTree& t,
                                const std::vector<Segment>& A,
                                const std::vector<Segment>& B) {
  if (A.empty()) throw TreeError(TreeErrorCode::BadInput, "empty point set");
  double best = 0.0;
  for (const Segment& s : A)
    best = std::max(best,
                    detail::max_dist_on_interval(t, s.vertex, s.lo, s.hi, B));
  return best;
}

// sup over the whole tree of the distance to the union B.
inline double sup_dist_to_segments(const RootedTree& t,
                                   const std::vector<Segment>& B) {
  return sup_dist_segments(t, whole_tree_segments(t), B);
}

inline double hausdorff_segments(const RootedTree& t,
                                 const std::vector<Segment>& A,
                                 const std::vector<Segment>& B) {
  return std::max(sup_dist_segments(t, A, B), sup_dist_segments(t, B, A));
}

// Hausdorff distance between finite point sets of one ambient tree.
inline double hausdorff(const RootedTree& t, const std::vector<TreePoint>& A,
                        const std::vector<TreePoint>& B) {
  if (A.empty() || B.empty())
    throw TreeError(TreeErrorCode::BadInput, "empty point set");
  double best = 0.0;
  for (const TreePoint& a : A) {
    double m = std::numeric_limits<double>::infinity();
    for (const TreePoint& b : B) m = std::min(m, distance(t, a, b));
    best = std::max(best, m);
  }
  for (const TreePoint& b : B) {
    double m = std::numeric_limits<double>::infinity();
    for (const TreePoint& a : A) m = std::min(m, distance(t, a, b));
    best = std::max(best, m);
  }
  return best;
}

// A relation between finite supports of two trees. The callers that build
// one for a distance bound keep it covering both supports and always include
// the root pair.
struct Correspondence {
  const RootedTree* tree_a = nullptr;
  const RootedTree* tree_b = nullptr;
  std::vector<std::pair<TreePoint, TreePoint>> pairs;
};

inline double distortion(const Correspondence& c) {
  if (!c.tree_a || !c.tree_b || c.pairs.empty())
    throw TreeError(TreeErrorCode::BadInput, "empty correspondence");
  std::size_t k = c.pairs.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      double da = distance(*c.tree_a, c.pairs[i].first, c.pairs[j].first);
      double db = distance(*c.tree_b, c.pairs[i].second, c.pairs[j].second);
      worst = std::max(worst, std::abs(da - db));
    }
  return worst;
}

// Finite covering of a tree: every vertex, plus each edge subdivided into
// ceil(length/delta) equal parts. radius is the exact Hausdorff distance
// from the tree to the net (half of the widest spacing used).
struct Net {
  std::vector<TreePoint> points;  // points[0] is the root
  double radius = 0.0;
};

inline Net build_net(const RootedTree& t, double delta) {
  if (!(delta > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "net resolution must be > 0");
  Net net;
  net.points.push_back({t.root(), 0.0});
  for (int v = 0; v < t.n(); ++v)
    if (v != t.root()) net.points.push_back({v, 0.0});
  for (int v = 0; v < t.n(); ++v) {
    if (v == t.root()) continue;
    double L = t.edge_length(v);
    if (L == 0.0) continue;
    int k = static_cast<int>(std::ceil(L / delta));
    net.radius = std::max(net.radius, L / k / 2.0);
    for (int j = 1; j < k; ++j) net.points.push_back({v, L * j / k});
  }
  return net;
}

namespace detail {

inline std::vector<std::vector<double>> net_distances(
    const RootedTree& t, const std::vector<TreePoint>& pts) {
  std::size_t n = pts.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d[i][j] = d[j][i] = distance(t, pts[i], pts[j]);
  return d;
}

// Depth-first minimisation of the distortion over coverings of two finite
// nets that contain the root pair. A minimal covering is a choice of one
// partner per point on each side together with the forced root pair, so the
// search assigns those slots in order, pruning as soon as the running
// distortion reaches the best complete assignment found so far.
class CorrespondenceSearch {
 public:
  CorrespondenceSearch(const std::vector<std::vector<double>>& d1,
                       const std::vector<std::vector<double>>& d2,
                       const std::vector<double>& h1,
                       const std::vector<double>& h2)
      : d1_(d1), d2_(d2), na_(d1.size()), nb_(d2.size()) {
    for (std::size_t i = 0; i < na_; ++i) {
      std::vector<int> order(nb_);
      for (std::size_t j = 0; j < nb_; ++j) order[j] = static_cast<int>(j);
      std::sort(order.begin(), order.end(), [&](int x, int y) {
        return std::abs(h1[i] - h2[x]) < std::abs(h1[i] - h2[y]);
      });
      f_order_.push_back(order);
    }
    for (std::size_t j = 0; j < nb_; ++j) {
      std::vector<int> order(na_);
      for (std::size_t i = 0; i < na_; ++i) order[i] = static_cast<int>(i);
      std::sort(order.begin(), order.end(), [&](int x, int y) {
        return std::abs(h2[j] - h1[x]) < std::abs(h2[j] - h1[y]);
      });
      g_order_.push_back(order);
    }
  }

  double run() {
    // Greedy height matching seeds the bound.
    pairs_.clear();
    push(0, 0);
    for (std::size_t i = 0; i < na_; ++i) push(static_cast<int>(i), f_order_[i][0]);
    for (std::size_t j = 0; j < nb_; ++j) push(g_order_[j][0], static_cast<int>(j));
    best_ = running_back();
    pairs_.clear();
    push(0, 0);
    dfs(0);
    return best_;
  }

 private:
  struct Entry {
    int i, j;
    double running;  // distortion of the prefix ending here
  };

  double running_back() const { return pairs_.back().running; }

  void push(int i, int j) {
    double run = pairs_.empty() ? 0.0 : pairs_.back().running;
    for (const Entry& e : pairs_)
      run = std::max(run, std::abs(d1_[i][e.i] - d2_[j][e.j]));
    pairs_.push_back({i, j, run});
  }

  void dfs(std::size_t slot) {
    if (running_back() >= best_) return;
    if (slot == na_ + nb_) {
      best_ = running_back();
      return;
    }
    if (slot < na_) {
      int i = static_cast<int>(slot);
      for (int j : f_order_[i]) {
        push(i, j);
        dfs(slot + 1);
        pairs_.pop_back();
      }
    } else {
      int j = static_cast<int>(slot - na_);
      for (int i : g_order_[j]) {
        push(i, j);
        dfs(slot + 1);
        pairs_.pop_back();
      }
    }
  }

  const std::vector<std::vector<double>>& d1_;
  const std::vector<std::vector<double>>& d2_;
  std::size_t na_, nb_;
  std::vector<std::vector<int>> f_order_, g_order_;
  std::vector<Entry> pairs_;
  double best_ = std::numeric_limits<double>::infinity();
};

}  // namespace detail

// Exact rooted GH distance between the delta-nets (half the minimum
// distortion over root-containing coverings), plus a certified additive
// error against the true value of the trees: the sum of the two net radii.
inline std::pair<double, double> gh_root_exact(const RootedTree& a,
                                               const RootedTree& b,
                                               double delta) {
  Net na = build_net(a, delta), nb = build_net(b, delta);
  if (na.points.size() > 6 || nb.points.size() > 6) {
    std::ostringstream msg;
    msg << "net too large for exhaustive search: " << na.points.size()
        << " and " << nb.points.size() << " points (max 6 each); "
        << "increase delta or use gh_root_bounds";
    throw TreeError(TreeErrorCode::NetTooLarge, msg.str());
  }
  auto d1 = detail::net_distances(a, na.points);
  auto d2 = detail::net_distances(b, nb.points);
  std::vector<double> h1, h2;
  for (const TreePoint& p : na.points) h1.push_back(point_height(a, p));
  for (const TreePoint& p : nb.points) h2.push_back(point_height(b, p));
  detail::CorrespondenceSearch search(d1, d2, h1, h2);
  return {0.5 * search.run(), na.radius + nb.radius};
}

namespace detail {

inline double tree_diameter(const RootedTree& t) {
  double best = 0.0;
  for (int u = 0; u < t.n(); ++u)
    for (int v = u + 1; v < t.n(); ++v)
      best = std::max(best, distance(t, {u, 0.0}, {v, 0.0}));
  return best;
}

// Voronoi decomposition of a tree over its net: cells[k] is the set of
// points whose nearest net point is points[k]. With every vertex in the net,
// each edge splits at the midpoints between consecutive net points on it.
inline std::vector<std::vector<Segment>> net_cells(
    const RootedTree& t, const std::vector<TreePoint>& pts) {
  std::vector<std::vector<Segment>> cells(pts.size());
  if (t.n() == 1) {
    cells[0].push_back({t.root(), 0.0, 0.0});
    return cells;
  }
  std::vector<int> vertex_index(t.n(), -1);
  std::vector<std::vector<std::pair<double, int>>> on_edge(t.n());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    TreePoint p = canon_point(t, pts[k]);
    if (p.offset == 0.0)
      vertex_index[p.vertex] = static_cast<int>(k);
    else
      on_edge[p.vertex].push_back({p.offset, static_cast<int>(k)});
  }
  for (int v = 0; v < t.n(); ++v) {
    if (v == t.root()) continue;
    auto& mids = on_edge[v];
    mids.push_back({0.0, vertex_index[v]});
    mids.push_back({t.edge_length(v), vertex_index[t.parent(v)]});
    std::sort(mids.begin(), mids.end());
    for (std::size_t i = 0; i + 1 < mids.size(); ++i) {
      double cut = 0.5 * (mids[i].first + mids[i + 1].first);
      cells[mids[i].second].push_back({v, mids[i].first, cut});
      cells[mids[i + 1].second].push_back({v, cut, mids[i + 1].first});
    }
  }
  return cells;
}

// Range of the distance over cellA x cellB inside one tree. The distance is
// separately convex along each segment, so the max sits at segment corners;
// the min does too, except that overlapping pieces of one edge meet at 0.
inline std::pair<double, double> cell_pair_range(
    const RootedTree& t, const std::vector<Segment>& A,
    const std::vector<Segment>& B) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const Segment& s : A)
    for (const Segment& r : B) {
      if (s.vertex == r.vertex && s.lo <= r.hi && r.lo <= s.hi) lo = 0.0;
      for (double x : {s.lo, s.hi})
        for (double y : {r.lo, r.hi}) {
          double d = distance(t, {s.vertex, x}, {r.vertex, y});
          lo = std::min(lo, d);
          hi = std::max(hi, d);
        }
    }
  return {lo, hi};
}

inline std::pair<double, double> point_cell_range(
    const RootedTree& t, TreePoint p, const std::vector<Segment>& B) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const Segment& r : B) {
    lo = std::min(lo, point_segment_distance(t, p, r));
    for (double y : {r.lo, r.hi})
      hi = std::max(hi, distance(t, p, {r.vertex, y}));
  }
  return {lo, hi};
}

}  // namespace detail

// Sound envelope around the rooted GH distance. The lower bound follows from
// height and diameter mismatch; the upper bound is half the distortion of an
// explicit correspondence: an exact isometry when one exists, otherwise a
// height-greedy net matching extended over the trees by nearest-net-point
// cells, whose distortion is evaluated exactly through per-cell distance
// ranges.
inline std::pair<double, double> gh_root_bounds(const RootedTree& a,
                                                const RootedTree& b) {
  double da = detail::tree_diameter(a), db = detail::tree_diameter(b);
  double lower =
      0.5 * std::max(std::abs(height(a) - height(b)), std::abs(da - db));
  if (trees_isometric(a, b)) return {lower, lower};

  double delta = std::max({da, db, 1e-9}) / 8.0;
  Net na = build_net(a, delta), nb = build_net(b, delta);
  auto cells_a = detail::net_cells(a, na.points);
  auto cells_b = detail::net_cells(b, nb.points);
  std::vector<double> ha, hb;
  for (const TreePoint& p : na.points) ha.push_back(point_height(a, p));
  for (const TreePoint& p : nb.points) hb.push_back(point_height(b, p));

  // Root pair plus nearest-height partners in both directions.
  std::vector<std::pair<int, int>> R{{0, 0}};
  for (std::size_t i = 1; i < na.points.size(); ++i) {
    std::size_t jb = 0;
    for (std::size_t j = 1; j < nb.points.size(); ++j)
      if (std::abs(ha[i] - hb[j]) < std::abs(ha[i] - hb[jb])) jb = j;
    R.push_back({static_cast<int>(i), static_cast<int>(jb)});
  }
  for (std::size_t j = 1; j < nb.points.size(); ++j) {
    std::size_t ia = 0;
    for (std::size_t i = 1; i < na.points.size(); ++i)
      if (std::abs(hb[j] - ha[i]) < std::abs(hb[j] - ha[ia])) ia = i;
    R.push_back({static_cast<int>(ia), static_cast<int>(j)});
  }

  // The extension pairs cell(a_i) with the point b_i and the point a_i with
  // cell(b_i); the distortion over two such families reduces to interval
  // arithmetic on exact distance ranges.
  double dis = 0.0;
  for (const auto& [i1, j1] : R)
    for (const auto& [i2, j2] : R) {
      auto [m1, M1] = detail::cell_pair_range(a, cells_a[i1], cells_a[i2]);
      double d2v = distance(b, nb.points[j1], nb.points[j2]);
      dis = std::max(dis, std::max(M1 - d2v, d2v - m1));
      auto [m2, M2] = detail::cell_pair_range(b, cells_b[j1], cells_b[j2]);
      double d1v = distance(a, na.points[i1], na.points[i2]);
      dis = std::max(dis, std::max(M2 - d1v, d1v - m2));
      auto [u1, U1] = detail::point_cell_range(a, na.points[i2], cells_a[i1]);
      auto [u2, U2] = detail::point_cell_range(b, nb.points[j1], cells_b[j2]);
      dis = std::max(dis, std::max(U1 - u2, U2 - u1));
    }
  return {lower, std::max(lower, 0.5 * dis)};
}

// True iff the pair list fixes the roots, has distortion strictly below eps,
// and its image covers the second tree within eps.
inline bool eps_isometry_check(
    const RootedTree& a, const RootedTree& b,
    const std::vector<std::pair<TreePoint, TreePoint>>& pairs, double eps) {
  if (!(eps > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "eps must be > 0");
  bool root_pair = false;
  for (const auto& [p, q] : pairs) {
    TreePoint cp = canon_point(a, p), cq = canon_point(b, q);
    root_pair |= cp.vertex == a.root() && cp.offset == 0.0 &&
                 cq.vertex == b.root() && cq.offset == 0.0;
  }
  if (!root_pair) return false;
  Correspondence c{&a, &b, pairs};
  if (!(distortion(c) < eps)) return false;
  std::vector<Segment> image;
  for (const auto& [p, q] : pairs) {
    TreePoint cq = canon_point(b, q);
    image.push_back({cq.vertex, cq.offset, cq.offset});
  }
  return sup_dist_to_segments(b, image) <= eps;
}

namespace detail {

// Depth of the deepest point below each vertex; the trimmed tree keeps a
// point at offset u on the edge below c exactly when u + below[c] >= eta.
inline std::vector<double> subtree_depths(const RootedTree& t) {
  std::vector<int> order(t.n());
  for (int v = 0; v < t.n(); ++v) order[v] = v;
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return t.depth_of(x) > t.depth_of(y); });
  std::vector<double> below(t.n(), 0.0);
  for (int v : order)
    if (v != t.root())
      below[t.parent(v)] =
          std::max(below[t.parent(v)], below[v] + t.edge_length(v));
  return below;
}

}  // namespace detail

// Surviving portion of the tree under eta-trimming, in the original tree's
// coordinates. Trivial result is the degenerate root segment.
inline std::vector<Segment> trim_segments(const RootedTree& t, double eta) {
  if (!(eta > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "trim depth must be > 0");
  auto below = detail::subtree_depths(t);
  std::vector<Segment> out;
  for (int v = 0; v < t.n(); ++v) {
    if (v == t.root()) continue;
    double L = t.edge_length(v);
    if (below[v] >= eta)
      out.push_back({v, 0.0, L});
    else if (below[v] + L > eta)
      out.push_back({v, eta - below[v], L});
  }
  if (out.empty()) out.push_back({t.root(), 0.0, 0.0});
  return out;
}

// Removes every point with less than eta of tree below it. Surviving
// vertices keep their adjacency; a partially surviving edge ends in a new
// leaf. The root always survives.
inline RootedTree trim(const RootedTree& t, double eta) {
  if (!(eta > 0.0))
    throw TreeError(TreeErrorCode::BadInput, "trim depth must be > 0");
  auto below = detail::subtree_depths(t);
  if (below[t.root()] < eta) {
    RootedTree out;
    auto it = t.labels().find(t.root());
    if (it != t.labels().end()) out.set_label(0, it->second);
    return out;
  }
  std::vector<EdgeSpec> edges;
  std::map<long long, std::string> labels;
  long long fresh = t.n();
  for (int v = 0; v < t.n(); ++v) {
    if (v == t.root()) continue;
    double L = t.edge_length(v);
    if (below[v] >= eta)
      edges.push_back({v, t.parent(v), L});
    else if (below[v] + L > eta)
      edges.push_back({fresh++, t.parent(v), below[v] + L - eta});
  }
  for (const auto& [v, name] : t.labels())
    if (v == t.root() || below[v] >= eta) labels[v] = name;
  // Ids shift when vertices drop out; rebuild labels through the id map.
  std::vector<long long> id_of;
  RootedTree out = build_tree(edges, t.root(), {}, &id_of);
  for (std::size_t nv = 0; nv < id_of.size(); ++nv) {
    auto it = labels.find(id_of[nv]);
    if (it != labels.end()) out.set_label(static_cast<int>(nv), it->second);
  }
  return out;
}

}  // namespace retree
