#pragma once

#include <cstdint>
#include <map>

#include "twistlab/linalg.hpp"
#include "twistlab/spaces.hpp"

namespace twistlab {

// Truncated Cayley tree of the free group on k generators: reduced words of
// length <= D, letters +-1 ... +-k.  ell_2 on the nodes.
struct TreeWord {
  std::vector<int> letters;  // nonzero, |letter| <= k, no cancelling adjacents

  std::size_t length() const { return letters.size(); }
  bool operator<(const TreeWord& o) const { return letters < o.letters; }
  bool operator==(const TreeWord& o) const { return letters == o.letters; }
};

inline TreeWord reduce_concat(const TreeWord& g, const TreeWord& t) {
  TreeWord out = g;
  for (int a : t.letters) {
    if (!out.letters.empty() && out.letters.back() == -a)
      out.letters.pop_back();
    else
      out.letters.push_back(a);
  }
  return out;
}

inline TreeWord word_inverse(const TreeWord& g) {
  TreeWord out;
  for (auto it = g.letters.rbegin(); it != g.letters.rend(); ++it) out.letters.push_back(-*it);
  return out;
}

struct TreeSpace {
  int k = 2, D = 4;
  std::vector<TreeWord> words;          // breadth-first, root first
  std::vector<std::size_t> parent;      // parent[0] unused
  std::vector<std::vector<std::size_t>> children;
  std::map<TreeWord, std::size_t> index;

  std::size_t dim() const { return words.size(); }
  std::size_t depth(std::size_t i) const { return words[i].length(); }
  SpaceSpec space() const { return SpaceSpec::lp(2.0, dim()); }

  // 1 + 2k ((2k-1)^D - 1) / (2k - 2)
  static std::size_t expected_node_count(int k, int D) {
    std::size_t q = 2ULL * k - 1, pw = 1;
    for (int i = 0; i < D; ++i) pw *= q;
    return 1 + 2ULL * k * (pw - 1) / (2ULL * k - 2);
  }
};

inline TreeSpace make_tree(int k, int D) {
  require(k >= 2 && k <= 4, "make_tree: k out of range");
  require(D >= 1 && D <= 8, "make_tree: D out of range");
  TreeSpace T;
  T.k = k;
  T.D = D;
  T.words.push_back(TreeWord{});
  T.parent.push_back(0);
  T.index[TreeWord{}] = 0;
  std::size_t frontier_begin = 0;
  for (int depth = 0; depth < D; ++depth) {
    const std::size_t frontier_end = T.words.size();
    for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
      const TreeWord w = T.words[i];
      for (int a = -k; a <= k; ++a) {
        if (a == 0) continue;
        if (!w.letters.empty() && w.letters.back() == -a) continue;  // would cancel
        TreeWord c = w;
        c.letters.push_back(a);
        T.index[c] = T.words.size();
        T.parent.push_back(i);
        T.words.push_back(std::move(c));
      }
    }
    frontier_begin = frontier_end;
  }
  T.children.resize(T.words.size());
  for (std::size_t i = 1; i < T.words.size(); ++i) T.children[T.parent[i]].push_back(i);
  require(T.dim() == TreeSpace::expected_node_count(k, D), "make_tree: node count mismatch");
  return T;
}

struct ShiftResult {
  Vec x;
  bool truncated = false;  // mass fell off the depth-D rim
};

// R e_t = sum of children of t; depth-D nodes have none (truncation flag)
inline ShiftResult right_shift(const TreeSpace& T, const Vec& x) {
  require(x.size() == T.dim(), "right_shift: dimension mismatch");
  ShiftResult out;
  out.x = zeros(T.dim());
  for (std::size_t t = 0; t < T.dim(); ++t) {
    if (x[t] == 0.0) continue;
    if (T.depth(t) == static_cast<std::size_t>(T.D)) {
      out.truncated = true;
      continue;
    }
    for (std::size_t c : T.children[t]) out.x[c] = x[t];
  }
  return out;
}

// L e_t = e_parent(t), L e_root = 0 (structural, not a truncation)
inline Vec left_shift(const TreeSpace& T, const Vec& x) {
  require(x.size() == T.dim(), "left_shift: dimension mismatch");
  Vec out = zeros(T.dim());
  for (std::size_t t = 1; t < T.dim(); ++t)
    if (x[t] != 0.0) out[T.parent[t]] += x[t];
  return out;
}

// u(g) e_t = e_{g t} (left translation); words pushed past depth D are dropped
inline ShiftResult translate(const TreeSpace& T, const TreeWord& g, const Vec& x) {
  require(x.size() == T.dim(), "translate: dimension mismatch");
  ShiftResult out;
  out.x = zeros(T.dim());
  for (std::size_t t = 0; t < T.dim(); ++t) {
    if (x[t] == 0.0) continue;
    TreeWord gt = reduce_concat(g, T.words[t]);
    if (gt.length() > static_cast<std::size_t>(T.D)) {
      out.truncated = true;
      continue;
    }
    out.x[T.index.at(gt)] += x[t];
  }
  return out;
}

// all reduced words of length <= maxlen (identity included)
inline std::vector<TreeWord> enumerate_words(int k, int maxlen) {
  std::vector<TreeWord> out;
  out.push_back(TreeWord{});
  std::size_t frontier_begin = 0;
  for (int len = 0; len < maxlen; ++len) {
    const std::size_t frontier_end = out.size();
    for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
      TreeWord w = out[i];
      for (int a = -k; a <= k; ++a) {
        if (a == 0) continue;
        if (!w.letters.empty() && w.letters.back() == -a) continue;
        TreeWord c = w;
        c.letters.push_back(a);
        out.push_back(std::move(c));
      }
    }
    frontier_begin = frontier_end;
  }
  return out;
}

// indices of nodes of depth <= max_depth: the subspace on which translated
// shifts act without touching the rim
inline std::vector<std::size_t> admissible_basis(const TreeSpace& T, std::size_t max_depth) {
  std::vector<std::size_t> basis;
  for (std::size_t t = 0; t < T.dim(); ++t)
    if (T.depth(t) <= max_depth) basis.push_back(t);
  return basis;
}

// [u(g), R] restricted to the admissible subspace, as a dense dim x |basis|
// matrix (columns indexed by the basis)
inline Mat tree_commutator_matrix(const TreeSpace& T, const TreeWord& g,
                                  const std::vector<std::size_t>& basis) {
  std::vector<Vec> cols;
  cols.reserve(basis.size());
  for (std::size_t t : basis) {
    Vec e = basis_vector(T.dim(), t);
    ShiftResult re = right_shift(T, e);
    ShiftResult ur = translate(T, g, re.x);
    ShiftResult ue = translate(T, g, e);
    ShiftResult ru = right_shift(T, ue.x);
    require(!re.truncated && !ur.truncated && !ue.truncated && !ru.truncated,
            "tree_commutator_matrix: basis not admissible for this word");
    cols.push_back(sub(ur.x, ru.x));
  }
  return Mat::from_columns(cols);
}

}  // namespace twistlab
