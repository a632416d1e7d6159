#include <sstream>

#include "doctest.h"
#include "parafuse/error.hpp"
#include "parafuse/report.hpp"

using namespace parafuse;
using namespace parafuse::report;

namespace {

const OriginTag kMrpc(Origin::mrpc);
const OriginTag kQqp(Origin::qqp);

}  // namespace

TEST_CASE("metric selection") {
  bool sem = false;
  CHECK(parse_metric_selection("syntactic", &sem) ==
        std::vector<Metric>{Metric::ted_f, Metric::ted_3, Metric::st_kernel, Metric::np_kernel});
  CHECK_FALSE(sem);
  CHECK(parse_metric_selection("wer, token_jaccard,semantic", &sem) ==
        std::vector<Metric>{Metric::token_jaccard, Metric::wer});
  CHECK(sem);
  CHECK(parse_metric_selection("all", &sem).size() == kMetricCount);
  CHECK(parse_metric_selection("lexical", &sem).size() == 13);
  CHECK_THROWS_AS(parse_metric_selection("bleurt", &sem), InputError);
  CHECK_THROWS_AS(parse_metric_selection("", &sem), InputError);
}

TEST_CASE("subset means and skip counts") {
  Corpus c;
  // token_jaccard: {a b c d e} vs {a b c d x} -> 1 - 4/6; chosen pairs below give 0.2 and 0.4 exactly.
  c.add({"m1", "a b c d", "a b c d e", kMrpc});  // 1 - 4/5 = 0.2
  c.add({"m2", "a b c", "a b c d e", kMrpc});    // 1 - 3/5 = 0.4
  c.add({"q1", "x y", "x z", kQqp});
  TreeSidecar trees;
  trees.add("m1", {"(S (A) (B))", "(S (A) (C))"});
  trees.add("m2", {"(S (A) (B))", "(S (A) (B))"});

  EvalConfig cfg;
  cfg.metrics = {Metric::ted_f, Metric::token_jaccard};
  cfg.subsets = {"paws"};
  Sidecars sc;
  sc.trees = &trees;
  std::vector<PairScores> per_pair;
  const auto reports = evaluate_corpus(c, sc, cfg, &per_pair);
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].subset == "mrpc");
  CHECK(reports[1].subset == "paws");
  CHECK(reports[2].subset == "qqp");

  const auto& mrpc = reports[0];
  CHECK(mrpc.count == 2);
  CHECK(mrpc.find("token_jaccard")->value == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(mrpc.find("ted_f")->value == 0.5);
  CHECK(mrpc.find("ted_f")->skipped == 0);

  CHECK(reports[1].count == 0);
  for (const auto& cell : reports[1].metrics) CHECK_FALSE(cell.value);

  const auto* qqp_ted = reports[2].find("ted_f");
  CHECK_FALSE(qqp_ted->value);
  CHECK(qqp_ted->skipped == 1);
  CHECK(qqp_ted->skip_reasons.at("missing tree") == 1);

  REQUIRE(per_pair.size() == 3);
  CHECK(per_pair[2].skipped.at(0) == std::pair<std::string, std::string>{"ted_f", "missing tree"});

  cfg.strict = true;
  CHECK_THROWS_AS(evaluate_corpus(c, sc, cfg), InputError);
}

TEST_CASE("one of three pairs without a tree") {
  Corpus c;
  c.add({"a", "x y", "x z", kMrpc});
  c.add({"b", "x y", "x z", kMrpc});
  c.add({"c", "x y", "x z", kMrpc});
  TreeSidecar trees;
  trees.add("a", {"(S (A))", "(S (B))"});
  trees.add("b", {"(S (A))", "(S (A) (C))"});
  EvalConfig cfg;
  cfg.metrics = parse_metric_selection("syntactic", nullptr);
  Sidecars sc;
  sc.trees = &trees;
  const auto r = evaluate_corpus(c, sc, cfg);
  REQUIRE(r.size() == 1);
  CHECK(r[0].find("ted_f")->value == 1.0);
  for (const auto& cell : r[0].metrics) CHECK(cell.skipped == 1);
}

TEST_CASE("config invariants") {
  Corpus c;
  c.add({"a", "x", "y", kMrpc});
  EvalConfig cfg;
  cfg.metrics = {Metric::ted_3};
  CHECK_THROWS_AS(evaluate_corpus(c, {}, cfg), InputError);
  cfg.metrics = {};
  cfg.semantic = true;
  CHECK_THROWS_AS(evaluate_corpus(c, {}, cfg), InputError);
}

TEST_CASE("corpus bleu is computed over grouped counts") {
  Corpus c;
  c.add({"1", "the cat sat on the mat", "the cat the cat on the mat", kMrpc});
  c.add({"2", "a quick brown fox jumps", "a quick brown fox jumps", kMrpc});
  EvalConfig cfg;
  cfg.metrics = {Metric::corpus_bleu, Metric::corpus_bleu2, Metric::sentence_bleu};
  const auto r = evaluate_corpus(c, {}, cfg);
  std::vector<std::pair<lexical::TokenSeq, lexical::TokenSeq>> pairs;
  for (const auto& p : c) pairs.emplace_back(lexical::tokenize(p.source), lexical::tokenize(p.paraphrase));
  CHECK(*r[0].find("corpus_bleu")->value == lexical::corpus_bleu(pairs, lexical::Smoothing::none));
  CHECK(*r[0].find("corpus_bleu2")->value == lexical::corpus_bleu(pairs, lexical::Smoothing::method1));
}

TEST_CASE("rendering") {
  SubsetReport r;
  r.subset = "mrpc";
  r.count = 2;
  r.metrics = {{"ted_f", 9.333, 0, {}}, {"token_jaccard", 0.5, 0, {}}, {"wer", 0.7607, 1, {{"x", 1}}}};
  const std::vector<SubsetReport> reports = {r};
  const std::string md = render_report(reports, OutputFormat::markdown);
  CHECK(md.find("| 9.33 |") != std::string::npos);
  CHECK(md.find("| 50.00% |") != std::string::npos);
  CHECK(md.find("| 76.07 |") != std::string::npos);
  CHECK(render_report(reports, OutputFormat::markdown) == md);

  const std::string csv = render_report(reports, OutputFormat::csv);
  CHECK(csv == "subset,count,ted_f,token_jaccard,wer,skipped:ted_f,skipped:token_jaccard,skipped:wer\n"
               "mrpc,2,9.33,50.00%,76.07,0,0,1\n");

  const auto j = nlohmann::json::parse(render_report(reports, OutputFormat::json));
  CHECK(j[0]["subset"] == "mrpc");
  CHECK(j[0]["count"] == 2);
  CHECK(j[0]["metrics"]["token_jaccard"] == 0.5);
  CHECK(j[0]["skipped"]["wer"] == 1);
  CHECK_THROWS_AS(render_report({}, OutputFormat::json), InputError);
  CHECK_THROWS_AS(parse_output_format("xml"), InputError);

  CHECK(format_cell("sentence_bleu", -4.4e-16) == "0.00%");
  CHECK(format_cell("ted_3", 3.755) == "3.75");  // binary value just under 3.755
}

TEST_CASE("dumped per-pair values reproduce the means") {
  Corpus c;
  const char* texts[][2] = {{"the cat sat", "a cat sat down"}, {"one two three", "three two one"},
                            {"hello world", "hello there world"}, {"a b c d", "a b c d"}};
  for (int i = 0; i < 4; ++i) c.add({"p" + std::to_string(i), texts[i][0], texts[i][1], i % 2 ? kQqp : kMrpc});
  EvalConfig cfg;
  cfg.metrics = parse_metric_selection("lexical", nullptr);
  std::vector<PairScores> dump;
  const auto reports = evaluate_corpus(c, {}, cfg, &dump);
  for (const auto& rep : reports) {
    for (const auto& cell : rep.metrics) {
      if (cell.name == "corpus_bleu" || cell.name == "corpus_bleu2") continue;
      double sum = 0;
      int n = 0;
      for (const auto& p : dump) {
        if (p.subset != rep.subset) continue;
        for (const auto& [name, v] : p.values) {
          if (name == cell.name) {
            sum += v;
            ++n;
          }
        }
      }
      REQUIRE(n > 0);
      CHECK(std::abs(sum / n - *cell.value) <= 1e-12);
    }
  }
  std::ostringstream out;
  write_pair_dump(dump, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  const auto j = nlohmann::json::parse(line);
  CHECK(j["id"] == "p0");
  CHECK(j["metrics"].contains("wer"));
  CHECK(j["bleu"]["matches"].size() == 4);
}
