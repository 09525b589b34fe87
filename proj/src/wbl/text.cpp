#include <cctype>

#include "wbl/corpus.hpp"

namespace wbl {

namespace {

bool is_token_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// Frozen list (snowball English, contraction fragments included since the
// tokenizer splits on apostrophes). Changing it changes every word count.
const std::set<std::string>& default_stoplist() {
  static const std::set<std::string> list = {
      "a",        "about",    "above",   "after",   "again",   "against", "all",     "am",
      "an",       "and",      "any",     "are",     "aren",    "as",      "at",      "be",
      "because",  "been",     "before",  "being",   "below",   "between", "both",    "but",
      "by",       "can",      "cannot",  "could",   "couldn",  "d",       "did",     "didn",
      "do",       "does",     "doesn",   "doing",   "don",     "down",    "during",  "each",
      "few",      "for",      "from",    "further", "had",     "hadn",    "has",     "hasn",
      "have",     "haven",    "having",  "he",      "her",     "here",    "hers",    "herself",
      "him",      "himself",  "his",     "how",     "i",       "if",      "in",      "into",
      "is",       "isn",      "it",      "its",     "itself",  "let",     "ll",      "m",
      "me",       "more",     "most",    "mustn",   "my",      "myself",  "no",      "nor",
      "not",      "of",       "off",     "on",      "once",    "only",    "or",      "other",
      "ought",    "our",      "ours",    "ourselves", "out",   "over",    "own",     "re",
      "s",        "same",     "shan",    "she",     "should",  "shouldn", "so",      "some",
      "such",     "t",        "than",    "that",    "the",     "their",   "theirs",  "them",
      "themselves", "then",   "there",   "these",   "they",    "this",    "those",   "through",
      "to",       "too",      "under",   "until",   "up",      "ve",      "very",    "was",
      "wasn",     "we",       "were",    "weren",   "what",    "when",    "where",   "which",
      "while",    "who",      "whom",    "why",     "with",    "won",     "would",   "wouldn",
      "you",      "your",     "yours",   "yourself", "yourselves",
  };
  return list;
}

std::size_t word_count(std::string_view text, const std::set<std::string>& stoplist) {
  std::size_t n = 0;
  for (const auto& token : tokenize(text)) {
    if (!stoplist.contains(token)) ++n;
  }
  return n;
}

}  // namespace wbl
