#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "mock_server.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / ("pf_cli_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = std::string(PF_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream s;
  s << in.rdbuf();
  fs::remove(log);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pf_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("cli evaluate") {
  const fs::path pairs = scratch("p.jsonl");
  const fs::path trees = scratch("t.jsonl");
  const fs::path out = scratch("r.json");
  write(pairs, R"j({"id":"p1","source":"a b","paraphrase":"b a","origin":"qqp"})j" "\n");
  write(trees, R"j({"id":"p1","source_tree":"(A (B x))","paraphrase_tree":"(A (C y))"})j" "\n");

  Run r = run("evaluate --pairs " + pairs.string() + " --trees " + trees.string() +
              " --metrics syntactic --out " + out.string());
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j[0]["metrics"]["ted_f"] == 2.0);

  r = run("evaluate --pairs " + pairs.string() + " --metrics syntactic");
  CHECK(r.code == 1);
  CHECK(r.out.find("--trees") != std::string::npos);

  r = run("evaluate --pairs " + pairs.string() + " --bogus-flag");
  CHECK(r.code == 1);
  CHECK(r.out.find("--pairs") != std::string::npos);  // usage text

  r = run("evaluate --pairs " + scratch("missing.jsonl").string());
  CHECK(r.code == 1);
}

TEST_CASE("cli validate") {
  const fs::path pairs = scratch("vp.jsonl");
  const fs::path trees = scratch("vt.jsonl");
  write(pairs, R"j({"id":"p1","source":"a","paraphrase":"b","origin":"qqp"})j" "\n"
               R"j({"id":"p2","source":"a","paraphrase":"b","origin":"qqp"})j" "\n");
  write(trees, R"j({"id":"p1","source_tree":"(A x)","paraphrase_tree":"(A y)"})j" "\n");
  Run r = run("validate --pairs " + pairs.string() + " --trees " + trees.string());
  CHECK(r.code == 1);
  CHECK(r.out.find("missing tree: p2") != std::string::npos);
  r = run("validate --trees " + trees.string());
  CHECK(r.code == 0);
  write(trees, R"j({"id":"p1","source_tree":"(A x","paraphrase_tree":"(A y)"})j" "\n");
  r = run("validate --trees " + trees.string());
  CHECK(r.code == 1);
}

TEST_CASE("cli generate, pool, filter and judge against a mock") {
  mock::Server server;
  server.on("/chat/completions", [](const nlohmann::json& body, httplib::Response& res) {
    const std::string prompt = body.at("messages").at(0).at("content");
    if (prompt.find("Rating Scale") != std::string::npos) {
      return mock::reply_json(res, mock::chat_reply(R"({"Semantic Similarity": 5, "Lexical Diversity": 4,
        "Syntactic Diversity": 3, "Grammatical Correctness": 5})"));
    }
    mock::reply_json(res, mock::chat_reply("1. a one\n2. a two\n3. a three"));
  });
  server.on("/moderations", [](const nlohmann::json& body, httplib::Response& res) {
    const std::string t = body.at("input");
    mock::reply_json(res, mock::moderation_reply(t.find("bad") != std::string::npos
                                                     ? std::vector<std::string>{"violence"}
                                                     : std::vector<std::string>{}));
  });
  const fs::path sources = scratch("s.jsonl");
  write(sources, R"j({"id":"s1","source":"a source","origin":"mrpc"})j" "\n");
  const fs::path out = scratch("gen.jsonl");
  const fs::path audit = scratch("gen.audit.jsonl");
  Run r = run("generate --sources " + sources.string() + " --endpoint " + server.base_url() +
              " --model m --out " + out.string() + " --audit " + audit.string());
  CHECK(r.code == 0);
  const std::string pairs_text = slurp(out);
  CHECK(std::count(pairs_text.begin(), pairs_text.end(), '\n') == 6);  // C(4,2)
  CHECK(slurp(audit).find("\"status\":\"ok\"") != std::string::npos);

  const fs::path pooled = scratch("pooled.tsv");
  r = run("pool --records " + audit.string() + " --out " + pooled.string());
  CHECK(r.code == 0);
  const std::string tsv = slurp(pooled);
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 6);

  const fs::path mixed = scratch("mixed.jsonl");
  write(mixed, R"j({"id":"g","source":"good","paraphrase":"x","origin":"qqp"})j" "\n"
               R"j({"id":"b","source":"bad","paraphrase":"x","origin":"qqp"})j" "\n");
  const fs::path kept = scratch("kept.jsonl");
  const fs::path dropped = scratch("dropped.jsonl");
  r = run("filter --pairs " + mixed.string() + " --endpoint " + server.base_url() + " --out " + kept.string() +
          " --dropped " + dropped.string());
  CHECK(r.code == 0);
  CHECK(slurp(kept).find("\"g\"") != std::string::npos);
  CHECK(slurp(dropped) == "{\"categories\":[\"violence\"],\"id\":\"b\"}\n");

  const fs::path ratings = scratch("ratings.jsonl");
  r = run("judge --pairs " + kept.string() + " --endpoint " + server.base_url() + " --model j --out " +
          ratings.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("5.00") != std::string::npos);
  CHECK(slurp(ratings).find("\"Lexical Diversity\":4") != std::string::npos);
}

TEST_CASE("cli strict remote failure exits 2") {
  mock::Server server;
  server.on("/chat/completions", [](const nlohmann::json&, httplib::Response& res) { res.status = 500; });
  const fs::path sources = scratch("s2.jsonl");
  write(sources, R"j({"id":"s1","source":"a source","origin":"mrpc"})j" "\n");
  const std::string base = "generate --sources " + sources.string() + " --endpoint " + server.base_url() +
                           " --model m --retries 0 --out " + scratch("o.jsonl").string();
  CHECK(run(base + " --strict").code == 2);
  CHECK(run(base).code == 0);
}
