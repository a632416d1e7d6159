#include "parafuse/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "parafuse/error.hpp"
#include "parafuse/parallel.hpp"
#include "parafuse/syntax.hpp"

namespace parafuse::report {
namespace {

using ojson = nlohmann::ordered_json;

constexpr std::array<Metric, kMetricCount> kAllMetrics = {
    Metric::ted_f,       Metric::ted_3,   Metric::st_kernel,     Metric::np_kernel, Metric::bow_overlap,
    Metric::corpus_bleu, Metric::corpus_bleu2, Metric::sentence_bleu, Metric::meteor, Metric::rouge1,
    Metric::rouge2,      Metric::rougeL,  Metric::token_jaccard, Metric::ter,       Metric::wer,
    Metric::cer,         Metric::google_bleu};

constexpr std::string_view kSemanticPrefix = "semantic:";

bool is_corpus_level(Metric m) { return m == Metric::corpus_bleu || m == Metric::corpus_bleu2; }

double lexical_value(const lexical::LexicalScores& s, Metric m) {
  switch (m) {
    case Metric::bow_overlap: return s.bow_overlap;
    case Metric::sentence_bleu: return s.sentence_bleu;
    case Metric::meteor: return s.meteor;
    case Metric::rouge1: return s.rouge1;
    case Metric::rouge2: return s.rouge2;
    case Metric::rougeL: return s.rougeL;
    case Metric::token_jaccard: return s.token_jaccard;
    case Metric::ter: return s.ter;
    case Metric::wer: return s.wer;
    case Metric::cer: return s.cer;
    case Metric::google_bleu: return s.google_bleu;
    default: return 0.0;
  }
}

double syntax_value(const syntax::SyntaxScores& s, Metric m) {
  switch (m) {
    case Metric::ted_f: return s.ted_f;
    case Metric::ted_3: return s.ted_3;
    case Metric::st_kernel: return s.st_kernel;
    case Metric::np_kernel: return s.np_kernel;
    default: return 0.0;
  }
}

struct PairResult {
  std::vector<std::optional<double>> values;  // by column
  std::vector<std::string> reasons;           // by column, set when skipped
  lexical::BleuStats bleu;
};

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string md_field(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::ted_f: return "ted_f";
    case Metric::ted_3: return "ted_3";
    case Metric::st_kernel: return "st_kernel";
    case Metric::np_kernel: return "np_kernel";
    case Metric::bow_overlap: return "bow_overlap";
    case Metric::corpus_bleu: return "corpus_bleu";
    case Metric::corpus_bleu2: return "corpus_bleu2";
    case Metric::sentence_bleu: return "sentence_bleu";
    case Metric::meteor: return "meteor";
    case Metric::rouge1: return "rouge1";
    case Metric::rouge2: return "rouge2";
    case Metric::rougeL: return "rougeL";
    case Metric::token_jaccard: return "token_jaccard";
    case Metric::ter: return "ter";
    case Metric::wer: return "wer";
    case Metric::cer: return "cer";
    case Metric::google_bleu: return "google_bleu";
  }
  return "";
}

std::optional<Metric> parse_metric(std::string_view name) {
  for (Metric m : kAllMetrics) {
    if (metric_name(m) == name) return m;
  }
  return std::nullopt;
}

bool is_syntactic(Metric m) {
  return m == Metric::ted_f || m == Metric::ted_3 || m == Metric::st_kernel || m == Metric::np_kernel;
}

const std::array<Metric, kMetricCount>& all_metrics() { return kAllMetrics; }

std::vector<Metric> parse_metric_selection(std::string_view text, bool* semantic) {
  std::array<bool, kMetricCount> on{};
  bool sem = false;
  size_t start = 0;
  bool any = false;
  while (start <= text.size()) {
    size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    start = end + 1;
    if (item.empty()) continue;
    any = true;
    if (item == "all") {
      sem = true;
      on.fill(true);
    } else if (item == "semantic") {
      sem = true;
    } else if (item == "syntactic" || item == "lexical") {
      for (size_t i = 0; i < kMetricCount; ++i) {
        if (is_syntactic(kAllMetrics[i]) == (item == "syntactic")) on[i] = true;
      }
    } else if (auto m = parse_metric(item)) {
      on[static_cast<size_t>(*m)] = true;
    } else {
      throw InputError("unknown metric \"" + std::string(item) + "\"");
    }
  }
  if (!any) throw InputError("no metrics selected");
  std::vector<Metric> out;
  for (size_t i = 0; i < kMetricCount; ++i) {
    if (on[i]) out.push_back(kAllMetrics[i]);
  }
  if (semantic) {
    *semantic = sem;
  } else if (sem) {
    throw InputError("semantic metrics are not available here");
  }
  return out;
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  if (name == "markdown" || name == "md") return OutputFormat::markdown;
  throw InputError("unknown output format \"" + std::string(name) + "\" (expected csv, json or markdown)");
}

void validate_config(const EvalConfig& config, const Sidecars& sidecars) {
  if (config.metrics.empty() && !config.semantic) throw InputError("no metrics enabled");
  for (Metric m : config.metrics) {
    if (is_syntactic(m) && !sidecars.trees) {
      throw InputError("syntactic metric " + std::string(metric_name(m)) + " needs a tree sidecar");
    }
  }
  if (config.semantic && sidecars.providers.empty()) {
    throw InputError("semantic metrics need at least one embedding provider");
  }
  if (config.parallelism < 1) throw InputError("parallelism must be >= 1");
  std::vector<std::string> models;
  for (const auto* p : sidecars.providers) {
    if (!p) throw InputError("null embedding provider");
    for (const auto& seen : models) {
      if (seen == p->model_name()) throw InputError("two embedding providers share model \"" + seen + "\"");
    }
    models.push_back(p->model_name());
  }
}

const MetricCell* SubsetReport::find(std::string_view name) const {
  for (const auto& c : metrics) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<SubsetReport> evaluate_corpus(const Corpus& corpus, const Sidecars& sidecars, const EvalConfig& config,
                                          std::vector<PairScores>* per_pair) {
  validate_config(config, sidecars);

  std::vector<std::string> columns;
  const std::vector<semantic::EmbeddingProvider*> providers =
      config.semantic ? sidecars.providers : std::vector<semantic::EmbeddingProvider*>{};
  for (const auto* p : providers) columns.push_back(std::string(kSemanticPrefix) + p->model_name());
  const size_t first_fixed = columns.size();
  bool want_lexical = false;
  bool want_syntax = false;
  for (Metric m : config.metrics) {
    columns.emplace_back(metric_name(m));
    (is_syntactic(m) ? want_syntax : want_lexical) = true;
  }

  if (!config.strict) {
    for (auto* p : providers) {
      try {
        p->prefetch(corpus.pairs());
      } catch (const Error&) {
        // Per-pair calls below retry and record the failures individually.
      }
    }
  } else {
    for (auto* p : providers) p->prefetch(corpus.pairs());
  }

  std::vector<PairResult> results(corpus.size());
  parallel_for(corpus.size(), config.parallelism, [&](size_t i) {
    const SentencePair& pair = corpus[i];
    PairResult& r = results[i];
    r.values.resize(columns.size());
    r.reasons.resize(columns.size());
    const auto skip_columns = [&](size_t from, size_t to, bool syntactic, const std::string& reason) {
      for (size_t c = from; c < to; ++c) {
        if (c >= first_fixed && is_syntactic(config.metrics[c - first_fixed]) != syntactic) continue;
        r.reasons[c] = reason;
      }
    };

    for (size_t k = 0; k < providers.size(); ++k) {
      try {
        r.values[k] = semantic::semantic_score(pair, *providers[k]).value;
      } catch (const InputError&) {
        if (config.strict) throw;
        r.reasons[k] = "embedding unavailable";
      } catch (const RemoteError&) {
        if (config.strict) throw;
        r.reasons[k] = "remote failure";
      }
    }

    if (want_lexical) {
      const auto scores = lexical::lexical_profile(pair, sidecars.synonyms);
      r.bleu = lexical::bleu_stats(lexical::tokenize(pair.source), lexical::tokenize(pair.paraphrase));
      for (size_t c = first_fixed; c < columns.size(); ++c) {
        const Metric m = config.metrics[c - first_fixed];
        if (!is_syntactic(m) && !is_corpus_level(m)) r.values[c] = lexical_value(scores, m);
      }
    }

    if (want_syntax) {
      const TreeEntry* entry = sidecars.trees->find(pair.id);
      if (!entry) {
        if (config.strict) throw InputError("pair \"" + pair.id + "\": no parse trees in sidecar");
        skip_columns(first_fixed, columns.size(), true, "missing tree");
      } else {
        std::optional<syntax::SyntaxScores> scores;
        try {
          scores = syntax::syntax_profile(syntax::parse_bracket(entry->source_tree),
                                          syntax::parse_bracket(entry->paraphrase_tree));
        } catch (const InputError& e) {
          if (config.strict) throw InputError("pair \"" + pair.id + "\": " + e.what());
          skip_columns(first_fixed, columns.size(), true, "unparseable tree");
        }
        if (scores) {
          for (size_t c = first_fixed; c < columns.size(); ++c) {
            const Metric m = config.metrics[c - first_fixed];
            if (is_syntactic(m)) r.values[c] = syntax_value(*scores, m);
          }
        }
      }
    }

    for (size_t c = 0; c < columns.size(); ++c) {
      if (r.values[c] && !std::isfinite(*r.values[c])) {
        throw InputError("pair \"" + pair.id + "\": non-finite " + columns[c]);
      }
    }
  });

  // Group in corpus order; reducing sequentially keeps sums independent of
  // how the work above was scheduled.
  std::map<std::string, std::vector<size_t>> groups;
  for (const auto& name : config.subsets) groups[name];
  for (size_t i = 0; i < corpus.size(); ++i) {
    groups[config.group_by == GroupBy::origin ? corpus[i].origin.str() : "all"].push_back(i);
  }

  std::vector<SubsetReport> reports;
  for (const auto& [name, members] : groups) {
    SubsetReport rep;
    rep.subset = name;
    rep.count = members.size();
    lexical::BleuStats bleu;
    for (size_t i : members) bleu += results[i].bleu;
    for (size_t c = 0; c < columns.size(); ++c) {
      MetricCell cell;
      cell.name = columns[c];
      if (c >= first_fixed && is_corpus_level(config.metrics[c - first_fixed])) {
        if (!members.empty()) {
          const auto smoothing = config.metrics[c - first_fixed] == Metric::corpus_bleu
                                     ? lexical::Smoothing::none
                                     : lexical::Smoothing::method1;
          cell.value = 1.0 - bleu.bleu(smoothing);
        }
      } else {
        double sum = 0.0;
        size_t n = 0;
        for (size_t i : members) {
          if (const auto& v = results[i].values[c]) {
            sum += *v;
            ++n;
          } else {
            ++cell.skipped;
            ++cell.skip_reasons[results[i].reasons[c]];
          }
        }
        if (n > 0) cell.value = sum / static_cast<double>(n);
      }
      rep.metrics.push_back(std::move(cell));
    }
    reports.push_back(std::move(rep));
  }

  if (per_pair) {
    per_pair->clear();
    per_pair->reserve(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i) {
      PairScores ps;
      ps.id = corpus[i].id;
      ps.subset = config.group_by == GroupBy::origin ? corpus[i].origin.str() : "all";
      ps.bleu = results[i].bleu;
      for (size_t c = 0; c < columns.size(); ++c) {
        if (results[i].values[c]) {
          ps.values.emplace_back(columns[c], *results[i].values[c]);
        } else if (!results[i].reasons[c].empty()) {
          ps.skipped.emplace_back(columns[c], results[i].reasons[c]);
        }
      }
      per_pair->push_back(std::move(ps));
    }
  }
  return reports;
}

std::string format_cell(std::string_view metric, double value) {
  char buf[64];
  if (metric == "ted_f" || metric == "ted_3") {
    std::snprintf(buf, sizeof buf, "%.2f", value);
  } else if (metric == "ter" || metric == "wer") {
    std::snprintf(buf, sizeof buf, "%.2f", value * 100.0);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f%%", value * 100.0);
  }
  std::string out = buf;
  // Rounding noise such as -4e-16 should not print as "-0.00".
  if (out.starts_with("-") && out.find_first_not_of("-0.%") == std::string::npos) out.erase(0, 1);
  return out;
}

std::string render_report(const std::vector<SubsetReport>& reports, OutputFormat format) {
  if (reports.empty()) throw InputError("nothing to render: empty report list");
  std::vector<std::string> columns;
  for (const auto& c : reports.front().metrics) columns.push_back(c.name);
  for (const auto& r : reports) {
    bool same = r.metrics.size() == columns.size();
    for (size_t i = 0; same && i < columns.size(); ++i) same = r.metrics[i].name == columns[i];
    if (!same) throw InputError("subset reports disagree on metric columns");
  }

  std::ostringstream out;
  switch (format) {
    case OutputFormat::json: {
      ojson rows = ojson::array();
      for (const auto& r : reports) {
        ojson metrics = ojson::object();
        ojson skipped = ojson::object();
        ojson reasons = ojson::object();
        for (const auto& c : r.metrics) {
          if (c.value) metrics[c.name] = *c.value;
          skipped[c.name] = c.skipped;
          if (!c.skip_reasons.empty()) {
            ojson why = ojson::object();
            for (const auto& [reason, n] : c.skip_reasons) why[reason] = n;
            reasons[c.name] = std::move(why);
          }
        }
        ojson row = {{"subset", r.subset}, {"count", r.count}, {"metrics", metrics}, {"skipped", skipped}};
        if (!reasons.empty()) row["skip_reasons"] = std::move(reasons);
        rows.push_back(std::move(row));
      }
      out << rows.dump(2) << '\n';
      break;
    }
    case OutputFormat::csv: {
      out << "subset,count";
      for (const auto& c : columns) out << ',' << csv_field(c);
      for (const auto& c : columns) out << ',' << csv_field("skipped:" + c);
      out << '\n';
      for (const auto& r : reports) {
        out << csv_field(r.subset) << ',' << r.count;
        for (const auto& c : r.metrics) out << ',' << (c.value ? format_cell(c.name, *c.value) : "");
        for (const auto& c : r.metrics) out << ',' << c.skipped;
        out << '\n';
      }
      break;
    }
    case OutputFormat::markdown: {
      out << "| subset | count |";
      for (const auto& c : columns) out << ' ' << md_field(c) << " |";
      out << "\n|---|---:|";
      for (size_t i = 0; i < columns.size(); ++i) out << "---:|";
      out << '\n';
      bool any_skipped = false;
      for (const auto& r : reports) {
        out << "| " << md_field(r.subset) << " | " << r.count << " |";
        for (const auto& c : r.metrics) {
          out << ' ' << (c.value ? format_cell(c.name, *c.value) : "-") << " |";
          any_skipped = any_skipped || c.skipped > 0;
        }
        out << '\n';
      }
      if (any_skipped) {
        out << "\nSkipped pairs:\n\n| subset | metric | skipped | reasons |\n|---|---|---:|---|\n";
        for (const auto& r : reports) {
          for (const auto& c : r.metrics) {
            if (c.skipped == 0) continue;
            std::string why;
            for (const auto& [reason, n] : c.skip_reasons) {
              if (!why.empty()) why += ", ";
              why += reason + " (" + std::to_string(n) + ")";
            }
            out << "| " << md_field(r.subset) << " | " << md_field(c.name) << " | " << c.skipped << " | "
                << md_field(why) << " |\n";
          }
        }
      }
      break;
    }
  }
  return out.str();
}

void write_pair_dump(const std::vector<PairScores>& scores, std::ostream& out) {
  for (const auto& s : scores) {
    ojson metrics = ojson::object();
    for (const auto& [name, v] : s.values) metrics[name] = v;
    ojson skipped = ojson::object();
    for (const auto& [name, why] : s.skipped) skipped[name] = why;
    ojson bleu = {{"matches", s.bleu.matches},
                  {"totals", s.bleu.totals},
                  {"hyp_len", s.bleu.hyp_len},
                  {"ref_len", s.bleu.ref_len}};
    ojson line = {{"id", s.id}, {"subset", s.subset}, {"metrics", metrics}, {"skipped", skipped}, {"bleu", bleu}};
    out << line.dump() << '\n';
  }
}

}  // namespace parafuse::report
