#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "parafuse/corpus.hpp"
#include "parafuse/error.hpp"
#include "parafuse/pipeline.hpp"
#include "parafuse/report.hpp"
#include "parafuse/semantic.hpp"
#include "parafuse/syntax.hpp"

using namespace parafuse;

namespace {

struct RemoteOptions {
  std::string endpoint;
  int retries = 5;
  int backoff_ms = 1000;
  int max_in_flight = 4;
  double rps = 0.0;
  int timeout_s = 60;

  void attach(CLI::App* app, const std::string& endpoint_flag, bool required) {
    auto* opt = app->add_option(endpoint_flag, endpoint, "Base URL of an OpenAI-compatible API");
    if (required) opt->required();
    app->add_option("--retries", retries, "Retries for 429/5xx/connection errors")->capture_default_str();
    app->add_option("--backoff-ms", backoff_ms, "First retry delay; doubles each attempt")->capture_default_str();
    app->add_option("--max-in-flight", max_in_flight, "Concurrent requests")->capture_default_str();
    app->add_option("--rps", rps, "Request rate limit per second (0 = none)")->capture_default_str();
    app->add_option("--timeout", timeout_s, "Per-request timeout in seconds")->capture_default_str();
  }

  remote::ClientConfig config(const char* key_variable) const {
    remote::ClientConfig c;
    c.base_url = endpoint;
    c.api_key = remote::api_key_from_env(key_variable);
    c.retry.max_retries = retries;
    c.retry.backoff_base = std::chrono::milliseconds(backoff_ms);
    c.max_in_flight = max_in_flight;
    c.requests_per_second = rps;
    c.timeout = std::chrono::seconds(timeout_s);
    return c;
  }
};

// Writes to `path`, or stdout for "" and "-".
void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed: " + path);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

Corpus read_pairs(const std::string& path, const std::string& format) {
  return load_corpus(path, format.empty() ? pair_format_for(path) : parse_pair_format(format));
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string pairs, pairs_format, trees, metrics = "lexical", format = "json", out, group_by = "origin";
  std::string dump_pairs, synonyms, embed_model;
  std::vector<std::string> embeddings, subsets;
  int parallelism = 1;
  size_t embed_batch = 32;
  bool strict = false;
  RemoteOptions remote;
};

int run_evaluate(const EvaluateArgs& a) {
  report::EvalConfig config;
  config.metrics = report::parse_metric_selection(a.metrics, &config.semantic);
  config.format = report::parse_output_format(a.format);
  if (a.group_by == "origin") config.group_by = report::GroupBy::origin;
  else if (a.group_by == "none") config.group_by = report::GroupBy::none;
  else throw InputError("unknown --group-by \"" + a.group_by + "\" (expected origin or none)");
  config.subsets = a.subsets;
  config.parallelism = a.parallelism;
  config.strict = a.strict;

  // Check the configuration before reading anything large.
  for (auto m : config.metrics) {
    if (report::is_syntactic(m) && a.trees.empty()) {
      throw InputError("syntactic metric " + std::string(report::metric_name(m)) + " needs --trees");
    }
  }
  if (config.semantic && a.embeddings.empty() && a.remote.endpoint.empty()) {
    throw InputError("semantic metrics need --embeddings or --embed-endpoint");
  }
  if (!a.remote.endpoint.empty() && a.embed_model.empty()) throw InputError("--embed-endpoint needs --embed-model");

  const Corpus corpus = read_pairs(a.pairs, a.pairs_format);
  std::optional<TreeSidecar> trees;
  if (!a.trees.empty()) trees = load_tree_sidecar(a.trees);
  std::optional<lexical::SynonymLexicon> synonyms;
  if (!a.synonyms.empty()) synonyms = lexical::SynonymLexicon::load(a.synonyms);

  std::vector<std::unique_ptr<semantic::EmbeddingProvider>> owned;
  for (const auto& path : a.embeddings) {
    for (auto& p : semantic::file_providers(load_embeddings(path))) owned.push_back(std::move(p));
  }
  if (!a.remote.endpoint.empty()) {
    semantic::HttpProviderConfig hc;
    hc.client = a.remote.config("PARAFUSE_EMBED_KEY");
    hc.model = a.embed_model;
    hc.batch_size = a.embed_batch;
    owned.push_back(std::make_unique<semantic::HttpEmbeddingProvider>(std::move(hc)));
  }

  report::Sidecars sidecars;
  sidecars.trees = trees ? &*trees : nullptr;
  sidecars.synonyms = synonyms ? &*synonyms : nullptr;
  for (auto& p : owned) sidecars.providers.push_back(p.get());

  std::vector<report::PairScores> per_pair;
  const auto reports =
      report::evaluate_corpus(corpus, sidecars, config, a.dump_pairs.empty() ? nullptr : &per_pair);
  if (reports.empty()) throw InputError("empty corpus: nothing to report");
  write_text(a.out, report::render_report(reports, config.format));
  if (!a.dump_pairs.empty()) {
    auto out = open_out(a.dump_pairs);
    report::write_pair_dump(per_pair, out);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string sources, model, variant = "plain", template_file, audit, out, out_format;
  double temperature = 0.0;
  bool moderate = false, strict = false, no_dedupe = false;
  int parallelism = 4;
  RemoteOptions remote;
};

int run_generate(const GenerateArgs& a) {
  pipeline::GenerationOptions opts;
  opts.model = a.model;
  opts.temperature = a.temperature;
  opts.variant = pipeline::parse_prompt_variant(a.variant);
  if (!a.template_file.empty()) {
    std::ifstream in(a.template_file, std::ios::binary);
    if (!in) throw InputError("cannot open " + a.template_file);
    std::ostringstream text;
    text << in.rdbuf();
    std::string t = text.str();
    while (!t.empty() && (t.back() == '\n' || t.back() == '\r')) t.pop_back();
    opts.prompt_template = std::move(t);
  }
  opts.moderate_first = a.moderate;
  opts.parallelism = a.parallelism;
  opts.fail_fast = a.strict;

  const auto sources = load_sources(a.sources);
  pipeline::LlmClient client(a.remote.config("PARAFUSE_LLM_KEY"));
  const auto records = pipeline::generate(sources, client, opts);

  const std::string audit = a.audit.empty() ? a.out + ".audit.jsonl" : a.audit;
  {
    auto out = open_out(audit);
    pipeline::write_audit_log(records, out);
  }
  pipeline::PoolSummary summary;
  Corpus pairs = pipeline::pool_records(records, &summary);
  if (!a.no_dedupe) pairs = pipeline::dedupe_corpus(pairs);
  write_pairs(pairs, a.out, a.out_format.empty() ? pair_format_for(a.out) : parse_pair_format(a.out_format));

  std::map<std::string_view, size_t> by_status;
  for (const auto& r : records) ++by_status[pipeline::status_name(r.status)];
  std::cerr << "generated " << records.size() << " records:";
  for (const auto& [name, n] : by_status) std::cerr << ' ' << name << '=' << n;
  std::cerr << "; " << pairs.size() << " pairs written to " << a.out << "; audit log " << audit << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct FilterArgs {
  std::string pairs, pairs_format, out, dropped;
  bool strict = false;
  int parallelism = 4;
  RemoteOptions remote;
};

int run_filter(const FilterArgs& a) {
  const Corpus corpus = read_pairs(a.pairs, a.pairs_format);
  pipeline::LlmClient client(a.remote.config("PARAFUSE_LLM_KEY"));
  pipeline::FilterOptions opts;
  opts.policy = a.strict ? pipeline::FailurePolicy::fail_run : pipeline::FailurePolicy::skip_and_log;
  opts.parallelism = a.parallelism;
  const auto result = pipeline::filter_offensive(corpus, client, opts);
  write_pairs(result.kept, a.out, a.pairs_format.empty() ? pair_format_for(a.out) : parse_pair_format(a.pairs_format));

  std::ostringstream log;
  for (const auto& d : result.dropped) log << nlohmann::json{{"id", d.id}, {"categories", d.categories}}.dump() << '\n';
  for (const auto& f : result.failures) log << nlohmann::json{{"id", f.id}, {"error", f.error}}.dump() << '\n';
  if (!a.dropped.empty()) write_text(a.dropped, log.str());
  else std::cerr << log.str();
  std::cerr << "kept " << result.kept.size() << ", dropped " << result.dropped.size() << ", moderation failures "
            << result.failures.size() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct JudgeArgs {
  std::string pairs, pairs_format, model, out;
  double temperature = 0.0;
  bool strict = false;
  int parallelism = 4;
  RemoteOptions remote;
};

int run_judge(const JudgeArgs& a) {
  const Corpus corpus = read_pairs(a.pairs, a.pairs_format);
  pipeline::LlmClient client(a.remote.config("PARAFUSE_LLM_KEY"));
  pipeline::JudgeOptions opts;
  opts.model = a.model;
  opts.temperature = a.temperature;
  opts.parallelism = a.parallelism;
  opts.fail_fast = a.strict;
  const auto results = pipeline::judge(corpus, client, opts);

  std::ostringstream lines;
  struct Sum {
    size_t n = 0, failed = 0;
    double v[4] = {0, 0, 0, 0};
  };
  std::map<std::string, Sum> by_subset;
  for (size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    nlohmann::ordered_json j = {{"id", r.id}};
    Sum& s = by_subset[corpus[i].origin.str()];
    if (r.ratings) {
      const int v[4] = {r.ratings->semantic_similarity, r.ratings->lexical_diversity, r.ratings->syntactic_diversity,
                        r.ratings->grammatical_correctness};
      nlohmann::ordered_json ratings = nlohmann::ordered_json::object();
      for (size_t k = 0; k < 4; ++k) {
        ratings[std::string(pipeline::kJudgeAspects[k])] = v[k];
        s.v[k] += v[k];
      }
      ++s.n;
      j["ratings"] = std::move(ratings);
    } else {
      ++s.failed;
      j["error"] = r.error;
    }
    j["raw_response"] = r.raw_response;
    lines << j.dump() << '\n';
  }
  if (!a.out.empty()) write_text(a.out, lines.str());

  std::cout << "| subset | rated | failed |";
  for (auto aspect : pipeline::kJudgeAspects) std::cout << ' ' << aspect << " |";
  std::cout << "\n|---|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& [name, s] : by_subset) {
    std::cout << "| " << name << " | " << s.n << " | " << s.failed << " |";
    for (double v : s.v) {
      char buf[32];
      if (s.n) std::snprintf(buf, sizeof buf, "%.2f", v / static_cast<double>(s.n));
      else std::snprintf(buf, sizeof buf, "-");
      std::cout << ' ' << buf << " |";
    }
    std::cout << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct PoolArgs {
  std::string records, out, out_format;
  bool no_dedupe = false;
};

int run_pool(const PoolArgs& a) {
  const auto records = pipeline::load_audit_log(a.records);
  pipeline::PoolSummary summary;
  Corpus pairs = pipeline::pool_records(records, &summary);
  if (!a.no_dedupe) pairs = pipeline::dedupe_corpus(pairs);
  write_pairs(pairs, a.out, a.out_format.empty() ? pair_format_for(a.out) : parse_pair_format(a.out_format));
  std::cerr << "pooled " << summary.records_used << " records (" << summary.records_skipped << " skipped) into "
            << pairs.size() << " pairs\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ValidateArgs {
  std::string pairs, pairs_format, trees;
  std::vector<std::string> embeddings;
};

int run_validate(const ValidateArgs& a) {
  if (a.pairs.empty() && a.trees.empty() && a.embeddings.empty()) {
    throw InputError("validate needs --pairs, --trees or --embeddings");
  }
  std::optional<Corpus> corpus;
  if (!a.pairs.empty()) corpus = read_pairs(a.pairs, a.pairs_format);
  std::optional<TreeSidecar> trees;
  bool ok = true;
  if (!a.trees.empty()) {
    trees = load_tree_sidecar(a.trees);
    for (const auto& [id, entry] : trees->entries()) {
      for (const auto* text : {&entry.source_tree, &entry.paraphrase_tree}) {
        try {
          (void)syntax::parse_bracket(*text);
        } catch (const InputError& e) {
          std::cout << "bad tree for \"" << id << "\": " << e.what() << '\n';
          ok = false;
        }
      }
    }
  }
  std::optional<std::vector<EmbeddingRecord>> embeddings;
  if (!a.embeddings.empty()) {
    embeddings.emplace();
    for (const auto& path : a.embeddings) {
      auto records = load_embeddings(path);
      embeddings->insert(embeddings->end(), std::make_move_iterator(records.begin()),
                         std::make_move_iterator(records.end()));
    }
    (void)semantic::file_providers(*embeddings);  // enforces per-model invariants
  }
  if (corpus) {
    const JoinReport join = join_check(*corpus, trees ? &*trees : nullptr, embeddings ? &*embeddings : nullptr);
    for (const auto& id : join.missing_trees) std::cout << "missing tree: " << id << '\n';
    for (const auto& [model, ids] : join.missing_embeddings) {
      for (const auto& id : ids) std::cout << "missing embedding (" << model << "): " << id << '\n';
    }
    for (const auto& id : join.orphan_trees) std::cout << "orphan tree: " << id << '\n';
    for (const auto& id : join.orphan_embeddings) std::cout << "orphan embedding: " << id << '\n';
    ok = ok && join.complete();
    std::cout << corpus->size() << " pairs";
  } else {
    std::cout << "0 pairs";
  }
  if (trees) std::cout << ", " << trees->size() << " tree entries";
  if (embeddings) std::cout << ", " << embeddings->size() << " embedding records";
  std::cout << (ok ? ": ok\n" : ": INVALID\n");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Paraphrase corpus evaluation and construction toolkit", "parafuse"};
  app.require_subcommand(1);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score a pair corpus and write a per-subset report");
  evaluate->add_option("--pairs", ev.pairs, "Pair corpus (.jsonl or .tsv)")->required();
  evaluate->add_option("--pairs-format", ev.pairs_format, "jsonl or tsv (default: by extension)");
  evaluate->add_option("--trees", ev.trees, "Tree sidecar JSONL");
  evaluate->add_option("--embeddings", ev.embeddings, "Embedding sidecar JSONL (repeatable)");
  evaluate->add_option("--embed-endpoint", ev.remote.endpoint, "OpenAI-compatible embeddings base URL");
  evaluate->add_option("--embed-model", ev.embed_model, "Model name for --embed-endpoint");
  evaluate->add_option("--embed-batch", ev.embed_batch, "Texts per embedding request")->capture_default_str();
  evaluate->add_option("--retries", ev.remote.retries)->capture_default_str();
  evaluate->add_option("--backoff-ms", ev.remote.backoff_ms)->capture_default_str();
  evaluate->add_option("--max-in-flight", ev.remote.max_in_flight)->capture_default_str();
  evaluate->add_option("--rps", ev.remote.rps)->capture_default_str();
  evaluate->add_option("--timeout", ev.remote.timeout_s)->capture_default_str();
  evaluate->add_option("--metrics", ev.metrics, "semantic, syntactic, lexical, all or metric names")
      ->capture_default_str();
  evaluate->add_option("--format", ev.format, "json, csv or markdown")->capture_default_str();
  evaluate->add_option("--out", ev.out, "Report path (default: stdout)");
  evaluate->add_option("--group-by", ev.group_by, "origin or none")->capture_default_str();
  evaluate->add_option("--subset", ev.subsets, "Always report this subset (repeatable)");
  evaluate->add_option("-j,--parallelism", ev.parallelism)->capture_default_str();
  evaluate->add_option("--synonyms", ev.synonyms, "Synonym groups for METEOR");
  evaluate->add_option("--dump-pairs", ev.dump_pairs, "Write per-pair values as JSONL");
  evaluate->add_flag("--strict", ev.strict, "Fail on missing sidecar entries and remote errors");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate paraphrases and pool them into pairs");
  generate->add_option("--sources", gen.sources, "Source JSONL: {id, source, origin}")->required();
  generate->add_option("--model", gen.model)->required();
  generate->add_option("--out", gen.out, "Pooled pair corpus")->required();
  generate->add_option("--out-format", gen.out_format, "jsonl or tsv (default: by extension)");
  generate->add_option("--audit", gen.audit, "Audit JSONL (default: <out>.audit.jsonl)");
  generate->add_option("--variant", gen.variant, "plain or english_guard")->capture_default_str();
  generate->add_option("--template", gen.template_file, "Prompt template file containing $Source Sentence");
  generate->add_option("--temperature", gen.temperature)->capture_default_str();
  generate->add_flag("--moderate", gen.moderate, "Moderate sources first and skip flagged ones");
  generate->add_flag("--no-dedupe", gen.no_dedupe);
  generate->add_flag("--strict", gen.strict, "Abort on the first failed request");
  generate->add_option("-j,--parallelism", gen.parallelism)->capture_default_str();
  gen.remote.attach(generate, "--endpoint", true);

  FilterArgs fil;
  auto* filter = app.add_subcommand("filter", "Drop pairs whose source is flagged by moderation");
  filter->add_option("--pairs", fil.pairs)->required();
  filter->add_option("--pairs-format", fil.pairs_format);
  filter->add_option("--out", fil.out, "Kept pairs")->required();
  filter->add_option("--dropped", fil.dropped, "JSONL log of dropped ids and categories (default: stderr)");
  filter->add_flag("--strict", fil.strict, "Abort when a moderation call fails");
  filter->add_option("-j,--parallelism", fil.parallelism)->capture_default_str();
  fil.remote.attach(filter, "--endpoint", true);

  JudgeArgs jud;
  auto* judge = app.add_subcommand("judge", "Rate pairs with an LLM judge");
  judge->add_option("--pairs", jud.pairs)->required();
  judge->add_option("--pairs-format", jud.pairs_format);
  judge->add_option("--model", jud.model)->required();
  judge->add_option("--out", jud.out, "Per-pair ratings JSONL");
  judge->add_option("--temperature", jud.temperature)->capture_default_str();
  judge->add_flag("--strict", jud.strict, "Abort on the first failed request");
  judge->add_option("-j,--parallelism", jud.parallelism)->capture_default_str();
  jud.remote.attach(judge, "--endpoint", true);

  PoolArgs pl;
  auto* pool = app.add_subcommand("pool", "Turn generation audit records into a pair corpus");
  pool->add_option("--records", pl.records, "Audit JSONL from generate")->required();
  pool->add_option("--out", pl.out)->required();
  pool->add_option("--out-format", pl.out_format);
  pool->add_flag("--no-dedupe", pl.no_dedupe);

  ValidateArgs val;
  auto* validate = app.add_subcommand("validate", "Check corpus and sidecar files");
  validate->add_option("--pairs", val.pairs);
  validate->add_option("--pairs-format", val.pairs_format);
  validate->add_option("--trees", val.trees);
  validate->add_option("--embeddings", val.embeddings);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    std::cerr << failing->help();
    return 1;
  }

  try {
    if (*evaluate) return run_evaluate(ev);
    if (*generate) return run_generate(gen);
    if (*filter) return run_filter(fil);
    if (*judge) return run_judge(jud);
    if (*pool) return run_pool(pl);
    if (*validate) return run_validate(val);
  } catch (const RemoteError& e) {
    std::cerr << "remote error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
