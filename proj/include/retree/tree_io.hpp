#pragma once

#include <cctype>
#include <charconv>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "retree/tree.hpp"

namespace retree {

// One edge as it appears on the wire: child id, parent id, length.
using EdgeSpec = std::tuple<long long, long long, double>;

// Builds a tree from an edge list with arbitrary integer ids. Ids are
// normalized to dense indices by ascending value. Zero-length edges are
// contracted (child merged into parent); negative lengths, cycles and
// disconnected parts are rejected.
inline RootedTree build_tree(const std::vector<EdgeSpec>& edges, long long root,
                             const std::map<long long, std::string>& labels = {},
                             std::vector<long long>* id_of_vertex = nullptr) {
  std::map<long long, int> idx;
  idx[root];
  for (auto& [c, p, len] : edges) {
    if (len < 0.0)
      throw TreeError(TreeErrorCode::NegativeLength,
                      "build_tree: negative edge length");
    idx[c];
    idx[p];
  }
  int m = 0;
  for (auto& [id, i] : idx) i = m++;
  const int ri = idx[root];
  std::vector<int> par(m, -1);
  std::vector<double> plen(m, 0.0);
  std::vector<bool> seen(m, false);
  for (auto& [c, p, len] : edges) {
    int ci = idx.at(c);
    if (seen[ci] || ci == ri)
      throw TreeError(TreeErrorCode::Cycle,
                      "build_tree: vertex with two parent edges");
    seen[ci] = true;
    par[ci] = idx.at(p);
    plen[ci] = len;
  }
  for (int v = 0; v < m; ++v)
    if (v != ri && !seen[v])
      throw TreeError(TreeErrorCode::Disconnected,
                      "build_tree: vertex without a parent edge");
  {
    std::vector<int> state(m, 0);
    state[ri] = 2;
    std::vector<int> path;
    for (int v0 = 0; v0 < m; ++v0) {
      int v = v0;
      path.clear();
      while (state[v] == 0) {
        state[v] = 1;
        path.push_back(v);
        v = par[v];
      }
      if (state[v] == 1) throw TreeError(TreeErrorCode::Cycle, "build_tree: cycle");
      for (int u : path) state[u] = 2;
    }
  }
  // Contract zero-length edges, child into parent.
  std::vector<int> rep(m);
  for (int v = 0; v < m; ++v) rep[v] = v;
  auto find = [&](int v) {
    while (rep[v] != v) v = rep[v] = rep[rep[v]];
    return v;
  };
  for (int v = 0; v < m; ++v)
    if (v != ri && plen[v] == 0.0) rep[find(v)] = find(par[v]);
  std::vector<int> newid(m, -1);
  int k = 0;
  for (int v = 0; v < m; ++v)
    if (find(v) == v) newid[v] = k++;
  std::vector<int> par2(k);
  std::vector<double> plen2(k);
  for (int v = 0; v < m; ++v) {
    if (newid[v] < 0) continue;
    if (v == find(ri)) {
      par2[newid[v]] = -1;
      plen2[newid[v]] = 0.0;
    } else {
      par2[newid[v]] = newid[find(par[v])];
      plen2[newid[v]] = plen[v];
    }
  }
  RootedTree t = RootedTree::from_parents(par2, plen2, newid[find(ri)]);
  std::map<int, std::string> fallback;
  for (auto& [id, s] : labels) {
    auto it = idx.find(id);
    if (it == idx.end())
      throw TreeError(TreeErrorCode::BadVertex, "build_tree: label on unknown id");
    int r = find(it->second);
    if (it->second == r)
      t.set_label(newid[r], s);
    else
      fallback.emplace(newid[r], s);
  }
  for (auto& [v, s] : fallback)
    if (t.labels().count(v) == 0) t.set_label(v, s);
  if (id_of_vertex) {
    id_of_vertex->clear();
    if (k == m) {
      id_of_vertex->assign(m, 0);
      for (auto& [id, i] : idx) (*id_of_vertex)[i] = id;
    }
  }
  return t;
}

// --- JSON form: {"root": id, "edges": [[child, parent, length], ...]} ---

inline nlohmann::json tree_to_json(const RootedTree& t) {
  nlohmann::json j;
  j["root"] = t.root();
  nlohmann::json edges = nlohmann::json::array();
  for (int v = 0; v < t.n(); ++v) {
    if (v == t.root()) continue;
    edges.push_back({v, t.parent(v), t.edge_length(v)});
  }
  j["edges"] = std::move(edges);
  if (!t.labels().empty()) {
    nlohmann::json labels = nlohmann::json::object();
    for (auto& [v, s] : t.labels()) labels[std::to_string(v)] = s;
    j["labels"] = std::move(labels);
  }
  return j;
}

inline RootedTree tree_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("root") || !j.contains("edges"))
    throw TreeError(TreeErrorCode::BadInput, "tree json: need root and edges");
  std::vector<EdgeSpec> edges;
  for (auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 3)
      throw TreeError(TreeErrorCode::BadInput, "tree json: bad edge entry");
    edges.emplace_back(e[0].get<long long>(), e[1].get<long long>(),
                       e[2].get<double>());
  }
  std::map<long long, std::string> labels;
  if (j.contains("labels"))
    for (auto& [k, v] : j["labels"].items())
      labels[std::stoll(k)] = v.get<std::string>();
  return build_tree(edges, j["root"].get<long long>(), labels);
}

inline std::string tree_to_json_string(const RootedTree& t) {
  return tree_to_json(t).dump();
}

inline RootedTree tree_from_json_string(const std::string& s) {
  return tree_from_json(nlohmann::json::parse(s));
}

// --- rooted Newick with branch lengths ---
//
// `(u:2,v:3)b:1;` is a root whose single child b (edge length 1) carries the
// leaves u and v. When the outermost group has no trailing length it is the
// root itself, e.g. `(u:2,v:3)r;`.

namespace detail {

inline void newick_node(const RootedTree& t,
                        const std::vector<std::vector<int>>& ch, int v,
                        bool with_len, std::ostringstream& out) {
  if (!ch[v].empty()) {
    out << '(';
    for (std::size_t i = 0; i < ch[v].size(); ++i) {
      if (i) out << ',';
      newick_node(t, ch, ch[v][i], true, out);
    }
    out << ')';
  }
  auto it = t.labels().find(v);
  if (it != t.labels().end()) out << it->second;
  if (with_len) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, t.edge_length(v));
    out << ':';
    out.write(buf, res.ptr - buf);
  }
}

}  // namespace detail

inline std::string tree_to_newick(const RootedTree& t) {
  auto ch = t.children();
  std::ostringstream out;
  int r = t.root();
  if (ch[r].size() == 1) {
    detail::newick_node(t, ch, ch[r][0], true, out);
  } else {
    detail::newick_node(t, ch, r, false, out);
  }
  out << ';';
  return out.str();
}

inline RootedTree tree_from_newick(const std::string& s) {
  std::size_t pos = 0;
  auto fail = [&](const char* msg) -> TreeError {
    return TreeError(TreeErrorCode::BadInput,
                     std::string("newick: ") + msg + " at offset " +
                         std::to_string(pos));
  };
  auto skip_ws = [&] {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  };
  std::vector<EdgeSpec> edges;
  std::map<long long, std::string> labels;
  long long next_id = 0;

  // Parses one node; returns (its id, whether a branch length was given,
  // the length).
  std::function<std::tuple<long long, bool, double>()> node =
      [&]() -> std::tuple<long long, bool, double> {
    skip_ws();
    long long id = next_id++;
    if (pos < s.size() && s[pos] == '(') {
      ++pos;
      for (;;) {
        auto [cid, has_len, len] = node();
        if (!has_len) throw fail("child without branch length");
        edges.emplace_back(cid, id, len);
        skip_ws();
        if (pos >= s.size()) throw fail("unterminated group");
        if (s[pos] == ',') {
          ++pos;
          continue;
        }
        if (s[pos] == ')') {
          ++pos;
          break;
        }
        throw fail("expected ',' or ')'");
      }
    }
    skip_ws();
    std::string name;
    while (pos < s.size() && s[pos] != ':' && s[pos] != ',' && s[pos] != ')' &&
           s[pos] != ';' && s[pos] != '(' &&
           !std::isspace(static_cast<unsigned char>(s[pos])))
      name += s[pos++];
    if (!name.empty()) labels[id] = name;
    skip_ws();
    bool has_len = false;
    double len = 0.0;
    if (pos < s.size() && s[pos] == ':') {
      ++pos;
      skip_ws();
      std::size_t start = pos;
      while (pos < s.size() &&
             (std::isdigit(static_cast<unsigned char>(s[pos])) ||
              s[pos] == '.' || s[pos] == '-' || s[pos] == '+' ||
              s[pos] == 'e' || s[pos] == 'E'))
        ++pos;
      if (start == pos) throw fail("missing branch length");
      len = std::stod(s.substr(start, pos - start));
      has_len = true;
    }
    return {id, has_len, len};
  };

  auto [top, has_len, len] = node();
  skip_ws();
  if (pos >= s.size() || s[pos] != ';') throw fail("missing ';'");
  long long root = top;
  if (has_len) {
    root = next_id++;  // implicit root above the outermost node
    edges.emplace_back(top, root, len);
  }
  return build_tree(edges, root, labels);
}

}  // namespace retree
