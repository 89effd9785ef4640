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

#include "g2p/lexicon.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "g2p/error.h"
#include "g2p/text.h"

namespace g2p {

namespace {

// "WORD(2)" and friends mark alternate pronunciations.
bool is_alternate_entry(const std::string& word) {
  if (word.size() < 4 || word.back() != ')') return false;
  size_t open = word.rfind('(');
  if (open == std::string::npos || open == 0) return false;
  size_t digits_begin = open + 1;
  size_t digits_end = word.size() - 1;
  if (digits_begin >= digits_end) return false;
  for (size_t i = digits_begin; i < digits_end; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(word[i]))) return false;
  }
  return true;
}

[[noreturn]] void malformed(size_t line_no, const std::string& why) {
  std::ostringstream os;
  os << "lexicon line " << line_no << ": " << why;
  throw DataError(os.str());
}

}  // namespace

bool Lexicon::contains(const std::string& word) const {
  return index_.find(word) != index_.end();
}

const std::vector<std::string>* Lexicon::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return nullptr;
  return &entries_[it->second].second;
}

bool Lexicon::add(const std::string& word, std::vector<std::string> phonemes) {
  if (contains(word)) return false;
  index_.emplace(word, entries_.size());
  entries_.emplace_back(word, std::move(phonemes));
  return true;
}

std::string normalize_word(const std::string& raw) {
  std::string w = trim(raw);
  if (w.empty()) throw DataError("cannot normalize an empty word");
  return to_upper_ascii(w);
}

Lexicon parse_lexicon(const std::string& text, LexiconFormat format,
                      std::string dialect_id) {
  Lexicon lex(std::move(dialect_id));
  size_t line_no = 0;
  for (std::string line : split_on(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    std::string word_field;
    std::vector<std::string> phonemes;
    if (format == LexiconFormat::kCmudict) {
      if (line.rfind(";;;", 0) == 0) continue;
      std::vector<std::string> fields = split_whitespace(line);
      if (fields.size() < 2) malformed(line_no, "expected `WORD PH1 PH2 ...`");
      word_field = fields[0];
      phonemes.assign(fields.begin() + 1, fields.end());
    } else {
      size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        malformed(line_no, "expected `WORD<TAB>PH1 PH2 ...`");
      }
      word_field = line.substr(0, tab);
      phonemes = split_whitespace(line.substr(tab + 1));
      if (phonemes.empty()) malformed(line_no, "entry has no phonemes");
    }

    if (trim(word_field).empty()) malformed(line_no, "entry has an empty word");
    if (is_alternate_entry(word_field)) continue;

    std::string word;
    try {
      word = normalize_word(word_field);
    } catch (const DataError&) {
      malformed(line_no, "entry has an empty word");
    }
    lex.add(word, std::move(phonemes));  // first appearance wins
  }

  if (lex.empty()) throw DataError("lexicon has no entries");
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path, LexiconFormat format,
                     std::string dialect_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lexicon file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (dialect_id.empty()) dialect_id = path.stem().string();
  return parse_lexicon(buf.str(), format, std::move(dialect_id));
}

LexiconFormat lexicon_format_from_name(const std::string& name) {
  if (name == "cmudict") return LexiconFormat::kCmudict;
  if (name == "tsv") return LexiconFormat::kTsv;
  throw UsageError("unknown lexicon format: " + name +
                   " (expected cmudict or tsv)");
}

void WordFrequencyTable::bump(const std::string& word, int64_t by) {
  counts_[word] += by;
}

int64_t WordFrequencyTable::count(const std::string& word) const {
  auto it = counts_.find(word);
  return it == counts_.end() ? 0 : it->second;
}

WordFrequencyTable build_frequency_table(
    std::span<const std::string> sentences) {
  WordFrequencyTable table;
  for (const std::string& sentence : sentences) {
    for (const SentenceToken& tok : split_sentence_tokens(sentence)) {
      if (tok.core.empty()) continue;
      table.bump(normalize_word(tok.core));
    }
  }
  return table;
}

Lexicon subset_lexicon(const Lexicon& lexicon, const WordFrequencyTable& freq,
                       int64_t k) {
  if (k < 1) throw DataError("subset size k must be >= 1");

  // Rank by descending count, then ascending word.
  std::vector<const Lexicon::Entry*> ranked;
  ranked.reserve(lexicon.size());
  for (const auto& entry : lexicon.entries()) ranked.push_back(&entry);
  std::sort(ranked.begin(), ranked.end(),
            [&freq](const Lexicon::Entry* a, const Lexicon::Entry* b) {
              int64_t ca = freq.count(a->first);
              int64_t cb = freq.count(b->first);
              if (ca != cb) return ca > cb;
              return a->first < b->first;
            });
  size_t keep = std::min<size_t>(static_cast<size_t>(k), ranked.size());
  ranked.resize(keep);

  std::unordered_map<std::string, bool> chosen;
  for (const Lexicon::Entry* e : ranked) chosen.emplace(e->first, true);

  // Preserve parent entry order in the result.
  Lexicon out(lexicon.dialect_id());
  for (const auto& entry : lexicon.entries()) {
    if (chosen.find(entry.first) != chosen.end()) {
      out.add(entry.first, entry.second);
    }
  }
  return out;
}

std::vector<std::string> phoneme_inventory(const Lexicon& lexicon) {
  std::vector<std::string> inventory;
  std::unordered_map<std::string, bool> seen;
  for (const auto& [word, phonemes] : lexicon.entries()) {
    (void)word;
    for (const std::string& p : phonemes) {
      if (seen.emplace(p, true).second) inventory.push_back(p);
    }
  }
  return inventory;
}

std::string write_lexicon(const Lexicon& lexicon) {
  std::vector<const Lexicon::Entry*> sorted;
  sorted.reserve(lexicon.size());
  for (const auto& entry : lexicon.entries()) sorted.push_back(&entry);
  std::sort(sorted.begin(), sorted.end(),
            [](const Lexicon::Entry* a, const Lexicon::Entry* b) {
              return a->first < b->first;
            });

  std::string out;
  for (const Lexicon::Entry* e : sorted) {
    out += e->first;
    out += '\t';
    for (size_t i = 0; i < e->second.size(); ++i) {
      if (i) out += ' ';
      out += e->second[i];
    }
    out += '\n';
  }
  return out;
}

}  // namespace g2p
