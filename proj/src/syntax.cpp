#include "parafuse/syntax.hpp"

#include <algorithm>

namespace parafuse::syntax {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_label_char(char c) { return !is_space(c) && c != '(' && c != ')'; }

class BracketParser {
 public:
  explicit BracketParser(std::string_view text) : text_(text) {}

  ParseTree parse() {
    skip_space();
    if (pos_ == text_.size()) fail("empty input");
    if (text_[pos_] != '(') fail("expected '('");
    ParseTree root = parse_phrase();
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters after root expression");
    return root;
  }

 private:
  // Iterative to stay safe on deep inputs.
  ParseTree parse_phrase() {
    struct Frame {
      std::string label;
      std::vector<ParseTree> children;
    };
    std::vector<Frame> stack;
    for (;;) {
      skip_space();
      if (pos_ == text_.size()) fail("unbalanced parentheses: unexpected end of input");
      const char c = text_[pos_];
      if (c == '(') {
        ++pos_;
        skip_space();
        std::string label = read_label();
        if (label.empty()) fail("empty label");
        stack.push_back({std::move(label), {}});
      } else if (c == ')') {
        if (stack.empty()) fail("unbalanced parentheses: unexpected ')'");
        ++pos_;
        Frame done = std::move(stack.back());
        stack.pop_back();
        ParseTree node(std::move(done.label), std::move(done.children));
        if (stack.empty()) return node;
        stack.back().children.push_back(std::move(node));
      } else {
        if (stack.empty()) fail("expected '('");
        stack.back().children.push_back(ParseTree::token(read_label()));
      }
    }
  }

  std::string read_label() {
    const size_t start = pos_;
    while (pos_ < text_.size() && is_label_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw BracketError(what + " at position " + std::to_string(pos_), pos_);
  }

  std::string_view text_;
  size_t pos_ = 0;
};

void serialize_into(const ParseTree& node, std::string& out) {
  if (node.kind() == ParseTree::Kind::token) {
    out += node.label();
    return;
  }
  out.push_back('(');
  out += node.label();
  for (const auto& child : node.children()) {
    out.push_back(' ');
    serialize_into(child, out);
  }
  out.push_back(')');
}

ParseTree truncate_at(const ParseTree& node, int layer, int k) {
  if (node.is_leaf()) return node;
  if (layer == k) return ParseTree::token(node.label());
  std::vector<ParseTree> kids;
  kids.reserve(node.children().size());
  for (const auto& child : node.children()) kids.push_back(truncate_at(child, layer + 1, k));
  return ParseTree(node.label(), std::move(kids));
}

// Returns the string of `node` as it appears inside its parent and records
// serialize() of every subtree. Tokens print bare inside a parent but as
// "(x)" on their own.
std::string collect_subtrees(const ParseTree& node, std::set<std::string>& out) {
  if (node.kind() == ParseTree::Kind::token) {
    out.insert("(" + node.label() + ")");
    return node.label();
  }
  std::string s = "(" + node.label();
  for (const auto& child : node.children()) {
    s.push_back(' ');
    s += collect_subtrees(child, out);
  }
  s.push_back(')');
  out.insert(s);
  return s;
}

void collect_pairs(const ParseTree& node, std::vector<const std::string*>& ancestors,
                   std::set<NodePair>& out) {
  for (const std::string* a : ancestors) out.emplace(*a, node.label());
  ancestors.push_back(&node.label());
  for (const auto& child : node.children()) collect_pairs(child, ancestors, out);
  ancestors.pop_back();
}

template <typename Set>
double jaccard_distance(const Set& a, const Set& b) {
  if (a.empty() && b.empty()) return 0.0;
  size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const size_t total = a.size() + b.size() - common;
  return 1.0 - static_cast<double>(common) / static_cast<double>(total);
}

}  // namespace

ParseTree::ParseTree(std::string label, std::vector<ParseTree> children)
    : ParseTree(Kind::phrase, std::move(label), std::move(children)) {}

ParseTree ParseTree::token(std::string label) { return ParseTree(Kind::token, std::move(label), {}); }

ParseTree::ParseTree(Kind kind, std::string label, std::vector<ParseTree> children)
    : label_(std::move(label)), children_(std::move(children)), kind_(kind) {
  if (label_.empty()) throw InputError("parse tree label must be non-empty");
  if (!std::all_of(label_.begin(), label_.end(), is_label_char)) {
    throw InputError("parse tree label contains whitespace or parentheses: \"" + label_ + "\"");
  }
}

size_t ParseTree::node_count() const {
  size_t n = 1;
  for (const auto& c : children_) n += c.node_count();
  return n;
}

size_t ParseTree::depth() const {
  size_t d = 0;
  for (const auto& c : children_) d = std::max(d, c.depth());
  return d + 1;
}

BracketError::BracketError(const std::string& what, size_t position)
    : InputError(what), position_(position) {}

ParseTree parse_bracket(std::string_view text) { return BracketParser(text).parse(); }

std::string serialize(const ParseTree& tree) {
  // The root is always written as a phrase so the string parses again.
  if (tree.kind() == ParseTree::Kind::token) return "(" + tree.label() + ")";
  std::string out;
  serialize_into(tree, out);
  return out;
}

ParseTree truncate_layers(const ParseTree& tree, int k) {
  if (k < 1) throw InputError("truncate_layers: k must be >= 1");
  if (k == 1) return ParseTree(tree.label());
  return truncate_at(tree, 1, k);
}

int ted_3(const ParseTree& a, const ParseTree& b) {
  return ted(truncate_layers(a, 3), truncate_layers(b, 3));
}

std::set<std::string> enumerate_subtrees(const ParseTree& tree) {
  std::set<std::string> out;
  collect_subtrees(tree, out);
  return out;
}

std::set<NodePair> enumerate_node_pairs(const ParseTree& tree) {
  std::set<NodePair> out;
  std::vector<const std::string*> ancestors;
  collect_pairs(tree, ancestors, out);
  return out;
}

double st_kernel_score(const ParseTree& a, const ParseTree& b) {
  return jaccard_distance(enumerate_subtrees(a), enumerate_subtrees(b));
}

double np_kernel_score(const ParseTree& a, const ParseTree& b) {
  return jaccard_distance(enumerate_node_pairs(a), enumerate_node_pairs(b));
}

SyntaxScores syntax_profile(const ParseTree& source, const ParseTree& paraphrase) {
  return {ted(source, paraphrase), ted_3(source, paraphrase), st_kernel_score(source, paraphrase),
          np_kernel_score(source, paraphrase)};
}

}  // namespace parafuse::syntax
