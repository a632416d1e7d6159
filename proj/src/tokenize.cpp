#include "parafuse/error.hpp"
#include "parafuse/lexical.hpp"
#include "parafuse/utf8.hpp"

namespace parafuse::lexical {

TokenSeq TokenSeq::from_tokens(std::vector<std::string> tokens) {
  for (const auto& t : tokens) {
    if (t.empty()) throw InputError("empty token");
    for (char32_t c : utf8::decode(t)) {
      if (utf8::is_space(c)) throw InputError("token contains whitespace: \"" + t + "\"");
    }
  }
  TokenSeq seq;
  seq.tokens_ = std::move(tokens);
  return seq;
}

TokenSeq tokenize(std::string_view text) {
  TokenSeq seq;
  std::u32string word;
  const auto flush = [&] {
    if (!word.empty()) seq.tokens_.push_back(utf8::encode(word));
    word.clear();
  };
  for (char32_t c : utf8::decode(text)) {
    if (utf8::is_space(c)) {
      flush();
    } else if (utf8::is_punct(c)) {
      flush();
      seq.tokens_.push_back(utf8::encode(std::u32string(1, c)));
    } else {
      word.push_back(utf8::to_lower(c));
    }
  }
  flush();
  return seq;
}

std::string normalize_text(std::string_view text) {
  std::u32string lowered = utf8::decode(utf8::normalize_space(text));
  for (char32_t& c : lowered) c = utf8::to_lower(c);
  return utf8::encode(lowered);
}

}  // namespace parafuse::lexical
