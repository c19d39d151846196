#pragma once
// Rebuilding a four-leaf tree from its leaf distance matrix. The three ways
// of splitting the leaves into two pairs order the matrix's pairing sums;
// the smallest sum names the topology and the gaps between sums give the
// internal edge, leaving the pendant lengths to three-point formulas.

#include <array>
#include <cmath>
#include <vector>

#include "retree/tree.hpp"

namespace retree {

// I pairs leaves {1,2} against {3,4}; II pairs {1,3} against {2,4};
// III pairs {1,4} against {2,3}; IV is the star on one branch point.
enum class QuartetShape { I, II, III, IV };

struct QuartetResult {
  QuartetShape shape;
  std::array<double, 4> pendant;  // distance from leaf i+1 to its branch point
  double internal_len;            // 0 for shape IV
  double chi;  // half of (d13 + d24) - (d12 + d34); sign picks I vs II
};

// Tree realizing the result, rooted at the branch point nearer leaves 1-side
// of the split, with leaves labeled "x1".."x4".
inline RootedTree quartet_tree(const QuartetResult& q) {
  static const int first_of[3][2] = {{0, 1}, {0, 2}, {0, 3}};
  static const int second_of[3][2] = {{2, 3}, {1, 3}, {1, 2}};
  int s = q.shape == QuartetShape::IV ? 0 : static_cast<int>(q.shape);
  RootedTree t;
  std::array<int, 4> leaf{};
  leaf[first_of[s][0]] = t.add_child(0, q.pendant[first_of[s][0]]);
  leaf[first_of[s][1]] = t.add_child(0, q.pendant[first_of[s][1]]);
  int far = q.shape == QuartetShape::IV ? 0 : t.add_child(0, q.internal_len);
  leaf[second_of[s][0]] = t.add_child(far, q.pendant[second_of[s][0]]);
  leaf[second_of[s][1]] = t.add_child(far, q.pendant[second_of[s][1]]);
  for (int i = 0; i < 4; ++i)
    t.set_label(leaf[i], std::string("x") + std::to_string(i + 1));
  return t;
}

inline QuartetResult quartet_reconstruct(
    const std::vector<std::vector<double>>& d, double tol = 1e-9) {
  check_matrix(d);
  if (d.size() != 4)
    throw TreeError(TreeErrorCode::BadMatrix, "need a 4x4 distance matrix");
  if (!four_point_check(d, tol))
    throw TreeError(TreeErrorCode::BadMatrix,
                    "matrix violates the four point condition");
  double pa = d[0][1] + d[2][3];
  double pb = d[0][2] + d[1][3];
  double pc = d[0][3] + d[1][2];

  QuartetResult q{};
  q.chi = 0.5 * (pb - pa);
  if (q.chi > tol)
    q.shape = QuartetShape::I;
  else if (q.chi < -tol)
    q.shape = QuartetShape::II;
  else if (0.5 * (pa - pc) > tol)
    q.shape = QuartetShape::III;
  else if (0.5 * (pa - pc) < -tol)
    throw TreeError(TreeErrorCode::BadMatrix,
                    "matrix violates the four point condition");
  else
    q.shape = QuartetShape::IV;

  // Relabel so the topology reads {s0,s1} | {s2,s3}, solve there, then put
  // each length back on the original leaf.
  static const std::array<std::array<int, 4>, 3> perm{
      {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}}};
  const auto& s =
      perm[q.shape == QuartetShape::IV ? 0 : static_cast<int>(q.shape)];
  auto dd = [&](int i, int j) { return d[s[i]][s[j]]; };
  q.pendant[s[0]] = 0.5 * (dd(0, 1) + dd(0, 2) - dd(1, 2));
  q.pendant[s[1]] = 0.5 * (dd(0, 1) + dd(1, 2) - dd(0, 2));
  q.pendant[s[2]] = 0.5 * (dd(2, 3) + dd(0, 2) - dd(0, 3));
  q.pendant[s[3]] = 0.5 * (dd(2, 3) + dd(0, 3) - dd(0, 2));
  q.internal_len = q.shape == QuartetShape::IV
                       ? 0.0
                       : 0.5 * (dd(0, 3) + dd(1, 2) - dd(0, 1) - dd(2, 3));

  for (double* len : {&q.pendant[0], &q.pendant[1], &q.pendant[2],
                      &q.pendant[3], &q.internal_len}) {
    if (*len < -tol)
      throw TreeError(TreeErrorCode::BadMatrix,
                      "reconstructed edge length is negative");
    *len = std::max(*len, 0.0);
  }

  RootedTree t = quartet_tree(q);
  std::array<TreePoint, 4> at{};
  for (const auto& [v, name] : t.labels())
    at[name[1] - '1'] = TreePoint{v, 0.0};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (std::abs(distance(t, at[i], at[j]) - d[i][j]) > 1e-9)
        throw TreeError(TreeErrorCode::BadMatrix,
                        "matrix is not realized by any four leaf tree");
  return q;
}

}  // namespace retree
