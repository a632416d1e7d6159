#include <string>

#include "parafuse/pipeline.hpp"
#include "parafuse/utf8.hpp"
#include "templates.hpp"

namespace parafuse::pipeline {
namespace {

void replace_all(std::string& text, std::string_view needle, std::string_view value) {
  size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
}

}  // namespace

std::string_view prompt_template(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::plain:
      return templates::kParaphrasePlain;
    case PromptVariant::english_guard:
      return templates::kEnglishGuard;
  }
  return templates::kParaphrasePlain;
}

std::string_view prompt_template_name(PromptVariant variant) {
  return variant == PromptVariant::plain ? "paraphrase_plain.v1" : "english_guard.v1";
}

PromptVariant parse_prompt_variant(std::string_view name) {
  if (name == "plain") return PromptVariant::plain;
  if (name == "english_guard") return PromptVariant::english_guard;
  throw InputError("unknown prompt variant \"" + std::string(name) + "\" (expected plain or english_guard)");
}

std::string build_prompt_from_template(std::string_view source, std::string_view templ) {
  if (utf8::trim(source).empty()) throw InputError("cannot build a prompt for an empty source sentence");
  if (templ.find(kSourcePlaceholder) == std::string_view::npos) {
    throw InputError("prompt template lacks the " + std::string(kSourcePlaceholder) + " placeholder");
  }
  std::string out(templ);
  replace_all(out, kSourcePlaceholder, source);
  return out;
}

std::string build_prompt(std::string_view source, PromptVariant variant) {
  return build_prompt_from_template(source, prompt_template(variant));
}

std::string_view judge_template() { return templates::kJudge; }

std::string build_judge_prompt(std::string_view source, std::string_view paraphrase) {
  if (utf8::trim(source).empty()) throw InputError("judge prompt: empty source text");
  if (utf8::trim(paraphrase).empty()) throw InputError("judge prompt: empty paraphrase");
  // Substitute in one pass so a source containing "$paraphrase" stays literal.
  const std::string_view templ = templates::kJudge;
  std::string out;
  out.reserve(templ.size() + source.size() + paraphrase.size());
  constexpr std::string_view kSrc = "$source_text";
  constexpr std::string_view kPar = "$paraphrase";
  for (size_t i = 0; i < templ.size();) {
    if (templ.substr(i, kSrc.size()) == kSrc) {
      out += source;
      i += kSrc.size();
    } else if (templ.substr(i, kPar.size()) == kPar) {
      out += paraphrase;
      i += kPar.size();
    } else {
      out += templ[i++];
    }
  }
  return out;
}

}  // namespace parafuse::pipeline
