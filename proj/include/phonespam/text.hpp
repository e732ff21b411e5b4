#pragma once

#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "phonespam/common.hpp"

namespace phonespam {

struct OffsetToken {
  std::string text;
  std::size_t begin;  // byte offset of the token in the source
};

// "http://...", "www...." or "host.tld/path". Bare "host.tld" is not a URL.
inline bool looks_like_url(std::string_view word) {
  const auto w = to_lower(word);
  if (w.find("://") != std::string::npos) return true;
  if (starts_with(w, "www.") && w.size() > 4) return true;
  const auto slash = w.find('/');
  if (slash == std::string::npos || slash == 0) return false;
  const std::string_view host(w.data(), slash);
  const auto dot = host.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 2 > host.size()) return false;
  for (char c : host)
    if (!(is_ascii_alpha(c) || is_ascii_digit(c) || c == '.' || c == '-')) return false;
  for (char c : host.substr(dot + 1))
    if (!is_ascii_alpha(c)) return false;
  return true;
}

// URL-looking words of the text, trailing punctuation stripped.
inline std::vector<std::string> extract_text_urls(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    auto word = text.substr(i, j - i);
    while (!word.empty() && std::string_view(".,;:!?)]}\"'").find(word.back()) != std::string_view::npos)
      word.remove_suffix(1);
    while (!word.empty() && std::string_view("([{\"'").find(word.front()) != std::string_view::npos)
      word.remove_prefix(1);
    if (!word.empty() && looks_like_url(word)) out.emplace_back(word);
    i = j;
  }
  return out;
}

// Lowercase unigrams: words split on whitespace, URLs and @mentions dropped,
// leading '#' stripped, then split on non-alphanumeric boundaries. Tokens
// shorter than two bytes and pure digit runs are dropped.
inline std::vector<OffsetToken> tokenize_with_offsets(std::string_view text) {
  std::vector<OffsetToken> out;
  std::size_t i = 0;
  const auto n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    const auto word = text.substr(i, j - i);
    if (!word.empty() && word.front() != '@' && !looks_like_url(word)) {
      std::size_t k = 0;
      while (k < word.size()) {
        const auto alnum = [](char c) {
          return is_ascii_alpha(c) || is_ascii_digit(c) || static_cast<unsigned char>(c) >= 0x80;
        };
        while (k < word.size() && !alnum(word[k])) ++k;
        const std::size_t b = k;
        bool all_digits = true;
        while (k < word.size() && alnum(word[k])) {
          all_digits = all_digits && is_ascii_digit(word[k]);
          ++k;
        }
        if (k - b >= 2 && !all_digits) out.push_back({to_lower(word.substr(b, k - b)), i + b});
      }
    }
    i = j;
  }
  return out;
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize_with_offsets(text)) out.push_back(std::move(t.text));
  return out;
}

inline const std::set<std::string, std::less<>>& default_stopwords() {
  static const std::set<std::string, std::less<>> s = {
      "a",     "about", "after", "all",  "also", "am",   "an",    "and",   "any",   "are",   "as",    "at",
      "be",    "been",  "but",   "by",   "can",  "do",   "does",  "for",   "from",  "get",   "got",   "had",
      "has",   "have",  "he",    "her",  "him",  "his",  "how",   "if",    "in",    "into",  "is",    "it",
      "its",   "just",  "me",    "more", "my",   "no",   "not",   "now",   "of",    "on",    "one",   "only",
      "or",    "our",   "out",   "over", "she",  "so",   "some",  "than",  "that",  "the",   "their", "them",
      "then",  "there", "these", "they", "this", "to",   "too",   "up",    "us",    "very",  "was",   "we",
      "were",  "what",  "when",  "where", "which", "who", "why",  "will",  "with",  "would", "you",   "your",
      "rt",    "via",   "amp",   "yang", "dan",  "di",   "ke",    "dari",  "untuk", "ini",   "itu",   "el",
      "la",    "los",   "las",   "de",   "del",  "en",   "es",    "por",   "para",  "con",   "que",   "se"};
  return s;
}

}  // namespace phonespam
