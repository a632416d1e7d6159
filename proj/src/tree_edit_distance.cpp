// Zhang-Shasha ordered tree edit distance with unit costs.

#include <algorithm>
#include <unordered_map>
#include <vector>

#include "parafuse/syntax.hpp"

namespace parafuse::syntax {
namespace {

// Postorder view of a tree: 1-based node numbers, label ids, leftmost leaf
// descendant of each node, and the keyroots.
struct PostorderTree {
  std::vector<int> label;     // [0] unused
  std::vector<int> leftmost;  // [0] unused
  std::vector<int> keyroots;

  PostorderTree(const ParseTree& tree, std::unordered_map<std::string, int>& ids) {
    label.push_back(0);
    leftmost.push_back(0);
    visit(tree, ids);
    const int n = static_cast<int>(label.size()) - 1;
    // A keyroot is the highest-numbered node for each distinct leftmost leaf.
    std::vector<bool> seen(n + 1, false);
    for (int i = n; i >= 1; --i) {
      if (!seen[leftmost[i]]) {
        seen[leftmost[i]] = true;
        keyroots.push_back(i);
      }
    }
    std::sort(keyroots.begin(), keyroots.end());
  }

  int size() const { return static_cast<int>(label.size()) - 1; }

 private:
  int visit(const ParseTree& node, std::unordered_map<std::string, int>& ids) {
    int first_leaf = 0;
    for (const auto& child : node.children()) {
      const int lm = visit(child, ids);
      if (first_leaf == 0) first_leaf = lm;
    }
    auto [it, inserted] = ids.try_emplace(node.label(), static_cast<int>(ids.size()));
    label.push_back(it->second);
    const int self = static_cast<int>(label.size()) - 1;
    leftmost.push_back(first_leaf == 0 ? self : first_leaf);
    return leftmost.back();
  }
};

}  // namespace

int ted(const ParseTree& a, const ParseTree& b) {
  std::unordered_map<std::string, int> ids;
  const PostorderTree ta(a, ids);
  const PostorderTree tb(b, ids);
  const int n = ta.size();
  const int m = tb.size();

  std::vector<int> tree_dist((n + 1) * (m + 1), 0);
  std::vector<int> forest((n + 1) * (m + 1), 0);
  const auto td = [&](int i, int j) -> int& { return tree_dist[i * (m + 1) + j]; };
  const auto fd = [&](int i, int j) -> int& { return forest[i * (m + 1) + j]; };

  for (int i : ta.keyroots) {
    for (int j : tb.keyroots) {
      const int li = ta.leftmost[i];
      const int lj = tb.leftmost[j];
      fd(li - 1, lj - 1) = 0;
      for (int di = li; di <= i; ++di) fd(di, lj - 1) = fd(di - 1, lj - 1) + 1;
      for (int dj = lj; dj <= j; ++dj) fd(li - 1, dj) = fd(li - 1, dj - 1) + 1;
      for (int di = li; di <= i; ++di) {
        for (int dj = lj; dj <= j; ++dj) {
          const int del = fd(di - 1, dj) + 1;
          const int ins = fd(di, dj - 1) + 1;
          if (ta.leftmost[di] == li && tb.leftmost[dj] == lj) {
            const int rel = fd(di - 1, dj - 1) + (ta.label[di] != tb.label[dj] ? 1 : 0);
            fd(di, dj) = std::min({del, ins, rel});
            td(di, dj) = fd(di, dj);
          } else {
            const int sub = fd(ta.leftmost[di] - 1, tb.leftmost[dj] - 1) + td(di, dj);
            fd(di, dj) = std::min({del, ins, sub});
          }
        }
      }
    }
  }
  return td(n, m);
}

}  // namespace parafuse::syntax
