#include <sstream>

#include "doctest.h"
#include "parafuse/corpus.hpp"
#include "parafuse/error.hpp"
#include "parafuse/utf8.hpp"

using namespace parafuse;

namespace {

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

Corpus sample() {
  Corpus c;
  c.add({"p1", "How do I learn?", "What is the way to learn?", OriginTag(Origin::qqp)});
  c.add({"p2", "tab\there", "line\nbreak and back\\slash", OriginTag::custom("web_crawl")});
  c.add({"p3", "Ünïcödé · “quotes”", "日本語のテキスト", OriginTag(Origin::para_common)});
  return c;
}

}  // namespace

TEST_CASE("utf8 helpers") {
  CHECK(utf8::is_valid("héllo"));
  CHECK_FALSE(utf8::is_valid("\xC3"));
  CHECK_FALSE(utf8::is_valid("\xC0\xAF"));  // overlong
  CHECK_FALSE(utf8::is_valid("\xED\xA0\x80"));  // surrogate
  CHECK_THROWS_AS(utf8::decode("\xFF"), InputError);
  CHECK(utf8::encode(utf8::decode("aé日😀")) == "aé日😀");
  CHECK(utf8::is_space(U' '));
  CHECK(utf8::is_space(U'　'));
  CHECK(utf8::to_lower(U'Ä') == U'ä');
  CHECK(utf8::to_lower(U'Σ') == U'σ');
  CHECK(utf8::to_lower(U'Ж') == U'ж');
  CHECK(utf8::normalize_space("  a \t b  c  ") == "a b c");
}

TEST_CASE("origin tags") {
  CHECK(OriginTag::parse("mrpc").kind() == Origin::mrpc);
  CHECK(OriginTag::parse("para_common").str() == "para_common");
  CHECK(OriginTag::parse("custom:my_set2").custom_name() == "my_set2");
  CHECK_THROWS_AS(OriginTag::parse("custom:Bad"), InputError);
  CHECK_THROWS_AS(OriginTag::parse("custom:"), InputError);
  CHECK(error_of([] { OriginTag::parse("imdb"); }).find("imdb") != std::string::npos);
}

TEST_CASE("load_corpus jsonl") {
  std::istringstream one(R"j({"id":"p1","source":"a b","paraphrase":"b a","origin":"qqp"})j");
  const Corpus c = read_corpus(one, PairFormat::jsonl);
  REQUIRE(c.size() == 1);
  CHECK(c[0].source == "a b");
  CHECK(c[0].origin.kind() == Origin::qqp);

  std::istringstream dup(
      "{\"id\":\"p1\",\"source\":\"a\",\"paraphrase\":\"b\",\"origin\":\"qqp\"}\n"
      "{\"id\":\"p1\",\"source\":\"c\",\"paraphrase\":\"d\",\"origin\":\"qqp\"}\n");
  const std::string msg = error_of([&] { read_corpus(dup, PairFormat::jsonl, "f.jsonl"); });
  CHECK(msg.find("p1") != std::string::npos);
  CHECK(msg.find("f.jsonl:2") != std::string::npos);

  std::istringstream empty("");
  CHECK(read_corpus(empty, PairFormat::jsonl).empty());

  std::istringstream bad_origin(R"j({"id":"p1","source":"a","paraphrase":"b","origin":"imdb"})j");
  CHECK_THROWS_AS(read_corpus(bad_origin, PairFormat::jsonl), InputError);

  std::istringstream missing("\n{\"id\":\"p1\",\"source\":\"a\",\"origin\":\"qqp\"}\n");
  CHECK(error_of([&] { read_corpus(missing, PairFormat::jsonl, "m"); }).find("m:2") != std::string::npos);

  std::istringstream blank_text(R"j({"id":"p1","source":"   ","paraphrase":"b","origin":"qqp"})j");
  CHECK_THROWS_AS(read_corpus(blank_text, PairFormat::jsonl), InputError);

  std::istringstream bad_utf8("{\"id\":\"p1\",\"source\":\"\xFF\",\"paraphrase\":\"b\",\"origin\":\"qqp\"}");
  CHECK_THROWS_AS(read_corpus(bad_utf8, PairFormat::jsonl), InputError);
}

TEST_CASE("write_pairs round-trips in both formats") {
  for (auto format : {PairFormat::jsonl, PairFormat::tsv}) {
    const Corpus c = sample();
    std::stringstream buf;
    write_pairs(c, buf, format);
    const Corpus back = read_corpus(buf, format);
    CHECK(back == c);
  }
  std::stringstream tsv;
  write_pairs(sample(), tsv, PairFormat::tsv);
  std::string first;
  std::getline(tsv, first);
  CHECK(std::count(first.begin(), first.end(), '\t') == 3);

  std::stringstream empty;
  write_pairs(Corpus{}, empty, PairFormat::jsonl);
  CHECK(empty.str().empty());
  CHECK(read_corpus(empty, PairFormat::jsonl).empty());
  CHECK(pair_format_for("x/y.tsv") == PairFormat::tsv);
  CHECK(pair_format_for("x/y.jsonl") == PairFormat::jsonl);
}

TEST_CASE("tree sidecar") {
  std::istringstream one(R"j({"id":"p1","source_tree":"(A (B x))","paraphrase_tree":"(A (C y))"})j");
  const TreeSidecar t = read_tree_sidecar(one);
  REQUIRE(t.size() == 1);
  CHECK(t.find("p1")->paraphrase_tree == "(A (C y))");

  std::istringstream dup(
      "{\"id\":\"p1\",\"source_tree\":\"(A)\",\"paraphrase_tree\":\"(A)\"}\n"
      "{\"id\":\"p1\",\"source_tree\":\"(A)\",\"paraphrase_tree\":\"(A)\"}\n");
  CHECK_THROWS_AS(read_tree_sidecar(dup), InputError);

  std::istringstream missing("{\"id\":\"p1\",\"source_tree\":\"(A)\"}\n");
  const std::string msg = error_of([&] { read_tree_sidecar(missing, "t.jsonl"); });
  CHECK(msg.find("t.jsonl:1") != std::string::npos);
  CHECK(msg.find("paraphrase_tree") != std::string::npos);
}

TEST_CASE("embedding records") {
  std::istringstream one(R"j({"id":"p1","source_vec":[1,0],"paraphrase_vec":[0,1],"model":"m"})j");
  const auto recs = read_embeddings(one);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].dim() == 2);

  std::istringstream mismatch(R"j({"id":"p1","source_vec":[1,0],"paraphrase_vec":[0,1,0],"model":"m"})j");
  CHECK(error_of([&] { read_embeddings(mismatch); }).find("dimension") != std::string::npos);
  std::istringstream zero(R"j({"id":"p1","source_vec":[1,0],"paraphrase_vec":[0,0],"model":"m"})j");
  CHECK(error_of([&] { read_embeddings(zero); }).find("zero-norm") != std::string::npos);
  EmbeddingRecord inf{"p1", {1.0, std::numeric_limits<double>::infinity()}, {1.0, 1.0}, "m"};
  CHECK_THROWS_AS(validate_embedding(inf), InputError);
}

TEST_CASE("join check reports exactly the missing ids") {
  const Corpus c = sample();
  TreeSidecar trees;
  trees.add("p1", {"(A)", "(A)"});
  trees.add("zz", {"(A)", "(A)"});
  std::vector<EmbeddingRecord> emb = {{"p2", {1, 0}, {0, 1}, "m"}, {"p3", {1, 0}, {0, 1}, "m"},
                                      {"p1", {1, 0}, {0, 1}, "n"}};
  const JoinReport r = join_check(c, &trees, &emb);
  CHECK(r.missing_trees == std::vector<std::string>{"p2", "p3"});
  CHECK(r.missing_embeddings.at("m") == std::vector<std::string>{"p1"});
  CHECK(r.missing_embeddings.at("n") == std::vector<std::string>{"p2", "p3"});
  CHECK(r.orphan_trees == std::vector<std::string>{"zz"});
  CHECK_FALSE(r.complete());

  TreeSidecar all;
  for (const auto& p : c) all.add(p.id, {"(A)", "(A)"});
  CHECK(join_check(c, &all, nullptr).complete());
}

TEST_CASE("sources for generation") {
  std::istringstream in(
      "{\"id\":\"s1\",\"source\":\"The cat sat.\",\"origin\":\"mrpc\",\"paraphrase\":\"ignored\"}\n"
      "{\"id\":\"s2\",\"source\":\"El gato.\",\"origin\":\"custom:es\"}\n");
  const auto s = read_sources(in);
  REQUIRE(s.size() == 2);
  CHECK(s[1].origin.custom_name() == "es");
}
