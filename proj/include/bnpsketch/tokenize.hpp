#pragma once

// Turning text input into tokens for sketching.

#include <cctype>
#include <deque>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>

#include "bnpsketch/errors.hpp"

namespace bnps {

struct TokenizerSpec {
  enum class Kind { lines, words, kmer, ngram };
  Kind kind = Kind::lines;
  std::size_t size = 0; // K for kmer, N for ngram

  static TokenizerSpec parse(std::string_view s) {
    if (s == "lines") return {Kind::lines, 0};
    if (s == "words") return {Kind::words, 0};
    for (auto [prefix, kind] : {std::pair{std::string_view("kmer:"), Kind::kmer}, std::pair{std::string_view("ngram:"), Kind::ngram}}) {
      if (s.substr(0, prefix.size()) != prefix) continue;
      const std::string_view num = s.substr(prefix.size());
      std::size_t k = 0;
      if (num.empty() || num.size() > 6) throw DataError("invalid tokenizer size in '" + std::string(s) + "'");
      for (char ch : num) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) throw DataError("invalid tokenizer size in '" + std::string(s) + "'");
        k = k * 10 + static_cast<std::size_t>(ch - '0');
      }
      if (k == 0) throw DataError("tokenizer size must be positive in '" + std::string(s) + "'");
      return {kind, k};
    }
    throw DataError("unknown tokenizer '" + std::string(s) + "' (expected lines, words, kmer:K or ngram:N)");
  }
};

/// Lowercase, drop ASCII punctuation.
inline std::string normalize_word(std::string_view w) {
  std::string out;
  out.reserve(w.size());
  for (char ch : w) {
    const auto u = static_cast<unsigned char>(ch);
    if (u < 128 && std::ispunct(u)) continue;
    out.push_back(u < 128 ? static_cast<char>(std::tolower(u)) : ch);
  }
  return out;
}

inline std::unordered_set<std::string> load_dictionary(std::istream& in) {
  std::unordered_set<std::string> dict;
  std::string line;
  while (std::getline(in, line)) {
    const std::string w = normalize_word(line);
    if (!w.empty()) dict.insert(w);
  }
  return dict;
}

/// Streams tokens from `in` to `emit`.
///
/// lines: each line (trailing '\r' removed) is a token, empty lines included.
/// words: whitespace-split, normalised words; empty results dropped.
/// kmer:K: every length-K window within a sequence record. Lines starting
///   with '>' are FASTA headers and end the current record; other lines are
///   concatenated with whitespace removed.
/// ngram:N: sliding windows of N consecutive normalised words joined by a
///   single space, running across line breaks.
/// With a dictionary, words outside it are dropped before n-grams form.
inline void tokenize(std::istream& in, const TokenizerSpec& spec, const std::function<void(std::string_view)>& emit,
                     const std::unordered_set<std::string>* dictionary = nullptr) {
  std::string line;
  switch (spec.kind) {
  case TokenizerSpec::Kind::lines:
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      emit(line);
    }
    return;
  case TokenizerSpec::Kind::kmer: {
    std::string window;
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] == '>') {
        window.clear();
        continue;
      }
      for (char ch : line) {
        if (std::isspace(static_cast<unsigned char>(ch))) continue;
        window.push_back(ch);
        if (window.size() > spec.size) window.erase(window.begin());
        if (window.size() == spec.size) emit(window);
      }
    }
    return;
  }
  case TokenizerSpec::Kind::words:
  case TokenizerSpec::Kind::ngram: {
    const std::size_t N = spec.kind == TokenizerSpec::Kind::words ? 1 : spec.size;
    std::deque<std::string> window;
    std::string joined;
    std::string raw;
    while (in >> raw) {
      std::string w = normalize_word(raw);
      if (w.empty()) continue;
      if (dictionary && !dictionary->contains(w)) continue;
      window.push_back(std::move(w));
      if (window.size() > N) window.pop_front();
      if (window.size() == N) {
        joined.clear();
        for (std::size_t i = 0; i < N; ++i) {
          if (i) joined.push_back(' ');
          joined += window[i];
        }
        emit(joined);
      }
    }
    return;
  }
  }
}

} // namespace bnps
