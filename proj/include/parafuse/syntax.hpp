#pragma once

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "parafuse/error.hpp"

namespace parafuse::syntax {

// Ordered labeled tree read from bracket notation.
//
// A node is either a phrase, written "(LABEL child ...)", or a token, written
// bare as "LABEL". Tokens never have children. A phrase may have none, as in
// "(A)". The distinction only affects the canonical string; edit distance and
// node pairs look at labels alone.
class ParseTree {
 public:
  enum class Kind { phrase, token };

  explicit ParseTree(std::string label, std::vector<ParseTree> children = {});
  static ParseTree token(std::string label);

  const std::string& label() const { return label_; }
  const std::vector<ParseTree>& children() const { return children_; }
  Kind kind() const { return kind_; }
  bool is_leaf() const { return children_.empty(); }

  size_t node_count() const;
  // Number of layers; a single node has depth 1.
  size_t depth() const;

  bool operator==(const ParseTree&) const = default;

 private:
  ParseTree(Kind kind, std::string label, std::vector<ParseTree> children);

  std::string label_;
  std::vector<ParseTree> children_;
  Kind kind_ = Kind::phrase;
};

class BracketError : public InputError {
 public:
  BracketError(const std::string& what, size_t position);
  // Byte offset into the input where parsing stopped.
  size_t position() const { return position_; }

 private:
  size_t position_;
};

// Parses one parenthesized expression, e.g. "(S (NP (DT The) (NN cat)) (VP (VBD sat)))".
// Labels are maximal runs of characters other than whitespace and parentheses.
ParseTree parse_bracket(std::string_view text);

// Canonical form: phrases parenthesized, tokens bare, one space between items.
std::string serialize(const ParseTree& tree);

// Keeps layers 1..k (the root is layer 1). A layer-k phrase that loses its
// children collapses to a token carrying its label.
ParseTree truncate_layers(const ParseTree& tree, int k);

// Unit-cost ordered tree edit distance (insert, delete, relabel).
int ted(const ParseTree& a, const ParseTree& b);

// Edit distance between the first three layers of each tree.
int ted_3(const ParseTree& a, const ParseTree& b);

// Canonical strings of every complete subtree.
std::set<std::string> enumerate_subtrees(const ParseTree& tree);

using NodePair = std::pair<std::string, std::string>;

// (ancestor label, descendant label) over all strict ancestor-descendant pairs.
std::set<NodePair> enumerate_node_pairs(const ParseTree& tree);

// 1 - Jaccard similarity of the unique subtree sets.
double st_kernel_score(const ParseTree& a, const ParseTree& b);

// 1 - Jaccard similarity of the unique node-pair sets; 0 when both are empty.
double np_kernel_score(const ParseTree& a, const ParseTree& b);

struct SyntaxScores {
  int ted_f = 0;
  int ted_3 = 0;
  double st_kernel = 0.0;
  double np_kernel = 0.0;
};

SyntaxScores syntax_profile(const ParseTree& source, const ParseTree& paraphrase);

}  // namespace parafuse::syntax
