// Copyright (c) 2026 The g2p Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef G2P_LEXICON_H_
#define G2P_LEXICON_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace g2p {

// Pronunciation dictionary with exactly one pronunciation per normalized
// word. Entry order is the order of first appearance in the source, which
// makes the derived phoneme inventory deterministic.
class Lexicon {
 public:
  using Entry = std::pair<std::string, std::vector<std::string>>;

  Lexicon() = default;
  explicit Lexicon(std::string dialect_id) : dialect_id_(std::move(dialect_id)) {}

  const std::string& dialect_id() const { return dialect_id_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool contains(const std::string& word) const;
  // Null when the word is absent. The key must already be normalized.
  const std::vector<std::string>* find(const std::string& word) const;

  // Keeps the first pronunciation for a repeated word; returns false when
  // the word was already present.
  bool add(const std::string& word, std::vector<std::string> phonemes);

  // Entries in first-appearance order.
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::string dialect_id_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, size_t> index_;
};

enum class LexiconFormat { kCmudict, kTsv };

// Upper-cases and trims a word; internal characters (apostrophes included)
// are untouched. Throws DataError when nothing is left after trimming.
std::string normalize_word(const std::string& raw);

// Parses dictionary text. cmudict-style lines are `WORD  PH1 PH2 ...` with
// `;;;` comments and `WORD(n)` alternate pronunciations, which are dropped;
// tsv lines are `WORD<TAB>PH1 PH2 ...`. For any word appearing on several
// lines only the first pronunciation is kept. Throws DataError on malformed
// lines (with the line number) and when no entries survive.
Lexicon parse_lexicon(const std::string& text, LexiconFormat format,
                      std::string dialect_id = "");

Lexicon load_lexicon(const std::filesystem::path& path, LexiconFormat format,
                     std::string dialect_id = "");

LexiconFormat lexicon_format_from_name(const std::string& name);

// Whitespace-token word counts over a sentence corpus. Leading/trailing
// punctuation is stripped before normalization; punctuation-only tokens are
// skipped. Absent words count as zero.
class WordFrequencyTable {
 public:
  void bump(const std::string& word, int64_t by = 1);
  int64_t count(const std::string& word) const;
  size_t size() const { return counts_.size(); }

 private:
  std::unordered_map<std::string, int64_t> counts_;
};

WordFrequencyTable build_frequency_table(std::span<const std::string> sentences);

// The min(k, |lexicon|) highest-frequency words, ties broken by ascending
// word order. Entry order of the result follows the parent lexicon.
Lexicon subset_lexicon(const Lexicon& lexicon, const WordFrequencyTable& freq,
                       int64_t k);

// All phoneme tokens in first-appearance order over the entries.
std::vector<std::string> phoneme_inventory(const Lexicon& lexicon);

// Normalized TSV, sorted by word; bit-stable for a given lexicon.
std::string write_lexicon(const Lexicon& lexicon);

}  // namespace g2p

#endif  // G2P_LEXICON_H_
