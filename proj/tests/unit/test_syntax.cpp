#include <random>

#include "doctest.h"
#include "parafuse/syntax.hpp"
#include "random_data.hpp"
#include "ted_oracle.hpp"

using namespace parafuse;
using namespace parafuse::syntax;

namespace {
ParseTree P(std::string_view s) { return parse_bracket(s); }
}  // namespace

TEST_CASE("parse_bracket") {
  const ParseTree a = P("(A)");
  CHECK(a.label() == "A");
  CHECK(a.children().empty());
  CHECK(a.node_count() == 1);

  const ParseTree t = P("(A (B x) (C y))");
  CHECK(t.node_count() == 5);
  REQUIRE(t.children().size() == 2);
  CHECK(t.children()[0].label() == "B");
  CHECK(t.children()[0].children()[0].label() == "x");
  CHECK(t.children()[0].children()[0].kind() == ParseTree::Kind::token);
  CHECK(t.depth() == 3);

  try {
    P("(A (B");
    FAIL("expected an error");
  } catch (const BracketError& e) {
    CHECK(e.position() == 5);
  }
  CHECK_THROWS_AS(P("( )"), BracketError);
  CHECK_THROWS_AS(P("(A) junk"), BracketError);
  CHECK_THROWS_AS(P("(A))"), BracketError);
  CHECK_THROWS_AS(P(""), BracketError);
  CHECK_THROWS_AS(P("A"), BracketError);
  CHECK(P("(-LRB- -LRB-)").children()[0].label() == "-LRB-");
}

TEST_CASE("serialize") {
  CHECK(serialize(ParseTree("A", {ParseTree::token("x")})) == "(A x)");
  CHECK(serialize(P("( A  ( B  x ) )")) == "(A (B x))");
  CHECK(serialize(P("(A (B) (C y))")) == "(A (B) (C y))");
  CHECK(serialize(ParseTree::token("x")) == "(x)");
  const std::string once = serialize(P("(S\n  (NP (DT The)   (NN cat))\t(VP (VBD sat)))"));
  CHECK(serialize(P(once)) == once);
}

TEST_CASE("truncate_layers") {
  CHECK(serialize(truncate_layers(P("(A (B (C (D))))"), 3)) == "(A (B C))");
  const ParseTree t = P("(A (B x) (C y))");
  CHECK(truncate_layers(t, 3) == t);
  CHECK(truncate_layers(t, 10) == t);
  CHECK(serialize(truncate_layers(t, 1)) == "(A)");
  CHECK_THROWS(truncate_layers(t, 0));
}

TEST_CASE("ted examples") {
  CHECK(ted(P("(A (B) (C))"), P("(A (B) (C))")) == 0);
  CHECK(ted(P("(A (B) (C))"), P("(A (B))")) == 1);
  CHECK(ted(P("(A (B (D)) (C))"), P("(A (B) (C (D)))")) == 2);
  CHECK(ted_3(P("(A (B (C (D))))"), P("(A (B (C (E))))")) == 0);
  CHECK(ted_3(P("(A (B x))"), P("(Z (B x))")) == 1);
  CHECK(oracle::mapping_ted(P("(A (B (D)) (C))"), P("(A (B) (C (D)))")) == 2);
  CHECK(oracle::mapping_ted(P("(A (B x))"), P("(Z (B x))")) == 1);
}

TEST_CASE("ted agrees with the mapping oracle and is a metric") {
  std::mt19937 rng(7);
  const std::vector<std::string> labels = {"a", "b", "c"};
  for (int i = 0; i < 60; ++i) {
    const auto a = testdata::random_tree(rng, 1 + rng() % 6, labels);
    const auto b = testdata::random_tree(rng, 1 + rng() % 6, labels);
    const auto c = testdata::random_tree(rng, 1 + rng() % 6, labels);
    const int ab = ted(a, b);
    CAPTURE(serialize(a));
    CAPTURE(serialize(b));
    CHECK(ab == oracle::mapping_ted(a, b));
    CHECK(ab == ted(b, a));
    CHECK(ted(a, a) == 0);
    CHECK(ted(a, c) <= ab + ted(b, c));
    CHECK(ab <= static_cast<int>(a.node_count() + b.node_count()));
    CHECK(ted_3(a, b) == ted(truncate_layers(a, 3), truncate_layers(b, 3)));
  }
}

TEST_CASE("subtrees and node pairs") {
  CHECK(enumerate_subtrees(P("(A)")) == std::set<std::string>{"(A)"});
  CHECK(enumerate_subtrees(P("(S (A) (B))")) == std::set<std::string>{"(A)", "(B)", "(S (A) (B))"});
  CHECK(enumerate_subtrees(P("(S (NP x) (NP x))")) == std::set<std::string>{"(x)", "(NP x)", "(S (NP x) (NP x))"});
  CHECK(enumerate_node_pairs(P("(A)")).empty());
  CHECK(enumerate_node_pairs(P("(S (A) (B))")) == std::set<NodePair>{{"S", "A"}, {"S", "B"}});
  CHECK(enumerate_node_pairs(P("(S (A (B)))")) == std::set<NodePair>{{"S", "A"}, {"S", "B"}, {"A", "B"}});
}

TEST_CASE("kernel scores") {
  const auto a = P("(S (A) (B))");
  const auto b = P("(S (A) (C))");
  CHECK(st_kernel_score(a, a) == 0.0);
  CHECK(np_kernel_score(a, a) == 0.0);
  CHECK(st_kernel_score(a, P("(X (Y) (Z))")) == 1.0);
  CHECK(st_kernel_score(a, b) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(np_kernel_score(a, b) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(np_kernel_score(P("(A)"), P("(B)")) == 0.0);

  const SyntaxScores s = syntax_profile(a, b);
  CHECK(s.ted_f == 1);
  CHECK(s.ted_3 == 1);
}
