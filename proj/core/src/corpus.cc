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

#include "g2p/corpus.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "g2p/text.h"
#include "src/io_util.h"

namespace g2p {

int64_t TranscribedPair::grapheme_length() const {
  return static_cast<int64_t>(split_codepoints(graphemes).size());
}

std::optional<TranscribedPair> transcribe_sentence(const std::string& sentence,
                                                   const Lexicon& lexicon,
                                                   std::string* oov_word) {
  if (oov_word) oov_word->clear();
  std::vector<SentenceToken> tokens = split_sentence_tokens(sentence);
  if (tokens.empty()) return std::nullopt;

  std::vector<std::string> phonemes;
  bool any_word = false;
  bool any_token = false;
  for (const SentenceToken& tok : tokens) {
    for (const std::string& p : tok.leading) {
      phonemes.push_back(p);
      any_token = true;
    }
    if (!tok.core.empty()) {
      std::string word = normalize_word(tok.core);
      const std::vector<std::string>* pron = lexicon.find(word);
      if (!pron) {
        if (oov_word) *oov_word = word;
        return std::nullopt;
      }
      if (any_word) phonemes.push_back(kWordBoundary);
      phonemes.insert(phonemes.end(), pron->begin(), pron->end());
      any_word = true;
      any_token = true;
    }
    for (const std::string& p : tok.trailing) {
      phonemes.push_back(p);
      any_token = true;
    }
  }
  if (!any_token) return std::nullopt;

  TranscribedPair pair;
  pair.graphemes = normalize_grapheme_text(sentence);
  pair.phonemes = std::move(phonemes);
  if (pair.graphemes.empty() || pair.phonemes.empty()) return std::nullopt;
  return pair;
}

std::vector<TranscribedPair> filter_by_length(std::vector<TranscribedPair> pairs,
                                              double low_frac,
                                              double high_frac) {
  if (low_frac < 0 || high_frac < 0 || low_frac + high_frac >= 1.0) {
    throw DataError("invalid length-filter fractions");
  }
  size_t n = pairs.size();
  size_t drop_low = static_cast<size_t>(low_frac * static_cast<double>(n) + 1e-9);
  size_t drop_high =
      static_cast<size_t>(high_frac * static_cast<double>(n) + 1e-9);
  if (drop_low + drop_high >= n) {
    pairs.clear();
    return pairs;
  }

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<int64_t> lengths(n);
  for (size_t i = 0; i < n; ++i) lengths[i] = pairs[i].grapheme_length();
  std::sort(order.begin(), order.end(), [&lengths](size_t a, size_t b) {
    if (lengths[a] != lengths[b]) return lengths[a] < lengths[b];
    return a < b;
  });

  std::vector<bool> keep(n, false);
  for (size_t r = drop_low; r < n - drop_high; ++r) keep[order[r]] = true;

  std::vector<TranscribedPair> out;
  out.reserve(n - drop_low - drop_high);
  for (size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(std::move(pairs[i]));
  }
  return out;
}

Vocabulary Vocabulary::with_specials() {
  Vocabulary v;
  v.add(pad_token());
  v.add(bos_token());
  v.add(eos_token());
  v.add(unk_token());
  return v;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 4 || tokens[0] != pad_token() ||
      tokens[1] != bos_token() || tokens[2] != eos_token() ||
      tokens[3] != unk_token()) {
    throw DataError("vocabulary must start with <pad>, <bos>, <eos>, <unk>");
  }
  Vocabulary v;
  for (std::string& t : tokens) {
    if (v.contains(t)) throw DataError("duplicate vocabulary token: " + t);
    v.add(std::move(t));
  }
  return v;
}

int32_t Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  int32_t id = static_cast<int32_t>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

int32_t Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
  return index_.find(token) != index_.end();
}

const std::string& Vocabulary::token(int32_t id) const {
  if (id < 0 || id >= size()) throw DataError("token id out of range");
  return tokens_[static_cast<size_t>(id)];
}

std::pair<Vocabulary, Vocabulary> build_vocabularies(
    std::span<const TranscribedPair> train) {
  if (train.empty()) throw DataError("cannot build vocabularies from an empty train split");
  Vocabulary source = Vocabulary::with_specials();
  Vocabulary target = Vocabulary::with_specials();
  target.add(kWordBoundary);
  for (const TranscribedPair& pair : train) {
    for (const std::string& g : split_codepoints(pair.graphemes)) source.add(g);
    for (const std::string& p : pair.phonemes) target.add(p);
  }
  return {std::move(source), std::move(target)};
}

std::vector<int32_t> encode_graphemes(const std::string& graphemes,
                                      const Vocabulary& vocab) {
  std::vector<int32_t> ids;
  std::vector<std::string> tokens = split_codepoints(graphemes);
  ids.reserve(tokens.size() + 2);
  ids.push_back(Vocabulary::kBos);
  for (const std::string& t : tokens) ids.push_back(vocab.id(t));
  ids.push_back(Vocabulary::kEos);
  return ids;
}

std::vector<int32_t> encode_phonemes(std::span<const std::string> phonemes,
                                     const Vocabulary& vocab) {
  std::vector<int32_t> ids;
  ids.reserve(phonemes.size() + 2);
  ids.push_back(Vocabulary::kBos);
  for (const std::string& t : phonemes) ids.push_back(vocab.id(t));
  ids.push_back(Vocabulary::kEos);
  return ids;
}

namespace {

std::vector<Batch> batches_in_order(std::span<const TranscribedPair> pairs,
                                    const std::vector<size_t>& order,
                                    const Vocabulary& source_vocab,
                                    const Vocabulary& target_vocab,
                                    int64_t batch_size) {
  if (batch_size < 1) throw DataError("batch size must be >= 1");

  std::vector<Batch> batches;
  for (size_t start = 0; start < order.size();
       start += static_cast<size_t>(batch_size)) {
    size_t end = std::min(order.size(), start + static_cast<size_t>(batch_size));
    std::vector<std::vector<int32_t>> src_rows;
    std::vector<std::vector<int32_t>> tgt_rows;
    int64_t src_len = 0;
    int64_t tgt_len = 0;
    for (size_t i = start; i < end; ++i) {
      const TranscribedPair& pair = pairs[order[i]];
      std::vector<int32_t> src = encode_graphemes(pair.graphemes, source_vocab);
      std::vector<int32_t> tgt = encode_phonemes(pair.phonemes, target_vocab);
      if (static_cast<int64_t>(src.size()) > kMaxSeqLen ||
          static_cast<int64_t>(tgt.size()) > kMaxSeqLen) {
        throw DataError("encoded pair exceeds the sequence budget of " +
                        std::to_string(kMaxSeqLen));
      }
      src_len = std::max<int64_t>(src_len, static_cast<int64_t>(src.size()));
      tgt_len = std::max<int64_t>(tgt_len, static_cast<int64_t>(tgt.size()));
      src_rows.push_back(std::move(src));
      tgt_rows.push_back(std::move(tgt));
    }

    Batch batch;
    batch.size = static_cast<int64_t>(src_rows.size());
    batch.src_len = src_len;
    batch.tgt_len = tgt_len;
    batch.source_ids.assign(static_cast<size_t>(batch.size * src_len),
                            Vocabulary::kPad);
    batch.target_ids.assign(static_cast<size_t>(batch.size * tgt_len),
                            Vocabulary::kPad);
    batch.source_mask.assign(static_cast<size_t>(batch.size * src_len), 0);
    batch.target_mask.assign(static_cast<size_t>(batch.size * tgt_len), 0);
    for (int64_t r = 0; r < batch.size; ++r) {
      const auto& src = src_rows[static_cast<size_t>(r)];
      const auto& tgt = tgt_rows[static_cast<size_t>(r)];
      for (size_t c = 0; c < src.size(); ++c) {
        batch.source_ids[static_cast<size_t>(r * src_len) + c] = src[c];
        batch.source_mask[static_cast<size_t>(r * src_len) + c] = 1;
      }
      for (size_t c = 0; c < tgt.size(); ++c) {
        batch.target_ids[static_cast<size_t>(r * tgt_len) + c] = tgt[c];
        batch.target_mask[static_cast<size_t>(r * tgt_len) + c] = 1;
      }
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace

std::vector<Batch> make_batches(std::span<const TranscribedPair> pairs,
                                const Vocabulary& source_vocab,
                                const Vocabulary& target_vocab,
                                int64_t batch_size, uint64_t seed,
                                int64_t epoch) {
  std::vector<size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::substream(seed, static_cast<uint64_t>(epoch));
  rng.shuffle(order);
  return batches_in_order(pairs, order, source_vocab, target_vocab, batch_size);
}

std::vector<Batch> make_eval_batches(std::span<const TranscribedPair> pairs,
                                     const Vocabulary& source_vocab,
                                     const Vocabulary& target_vocab,
                                     int64_t batch_size) {
  std::vector<size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  return batches_in_order(pairs, order, source_vocab, target_vocab, batch_size);
}

const std::vector<TranscribedPair>& CorpusDataset::split(
    const std::string& name) const {
  if (name == "train") return train;
  if (name == "dev") return dev;
  if (name == "test") return test;
  throw DataError("unknown split: " + name + " (expected train, dev or test)");
}

namespace {

// Transcribes a sentence list, dropping OOV rejections; counts drops.
std::vector<TranscribedPair> transcribe_all(
    const std::vector<std::string>& sentences, const Lexicon& lexicon,
    int64_t* dropped) {
  std::vector<TranscribedPair> pairs;
  for (const std::string& s : sentences) {
    std::optional<TranscribedPair> pair = transcribe_sentence(s, lexicon);
    if (pair.has_value()) {
      pairs.push_back(std::move(*pair));
    } else {
      ++*dropped;
    }
  }
  return pairs;
}

// Length filter plus the hard sequence cap (BOS/EOS included).
std::vector<TranscribedPair> filter_split(std::vector<TranscribedPair> pairs,
                                          int64_t* dropped) {
  size_t before = pairs.size();
  pairs = filter_by_length(std::move(pairs));
  std::vector<TranscribedPair> out;
  out.reserve(pairs.size());
  for (TranscribedPair& p : pairs) {
    if (p.grapheme_length() <= kMaxSeqLen - 2 &&
        static_cast<int64_t>(p.phonemes.size()) <= kMaxSeqLen - 2) {
      out.push_back(std::move(p));
    }
  }
  *dropped += static_cast<int64_t>(before - out.size());
  return out;
}

}  // namespace

CorpusDataset build_corpus(const std::vector<std::string>& sentences,
                           const Lexicon& full_lexicon, int64_t k,
                           uint64_t seed, std::array<double, 3> ratios) {
  if (k < 1) throw DataError("dictionary size k must be >= 1");

  // Sentence identities per split are fixed before any dictionary work so a
  // dictionary-size sweep varies only coverage.
  auto splits = split_corpus(sentences, ratios, seed);

  WordFrequencyTable freq = build_frequency_table(splits[0]);
  Lexicon subset = subset_lexicon(full_lexicon, freq, k);

  CorpusDataset ds;
  ds.provenance.dialect = full_lexicon.dialect_id();
  ds.provenance.k = static_cast<int64_t>(subset.size());
  ds.provenance.seed = seed;
  ds.provenance.ratios = ratios;
  ds.provenance.sentences_total = static_cast<int64_t>(sentences.size());

  ds.train = transcribe_all(splits[0], subset, &ds.provenance.oov_dropped[0]);
  ds.dev = transcribe_all(splits[1], subset, &ds.provenance.oov_dropped[1]);
  ds.test = transcribe_all(splits[2], full_lexicon,
                           &ds.provenance.oov_dropped[2]);

  ds.train = filter_split(std::move(ds.train), &ds.provenance.length_dropped[0]);
  ds.dev = filter_split(std::move(ds.dev), &ds.provenance.length_dropped[1]);
  ds.test = filter_split(std::move(ds.test), &ds.provenance.length_dropped[2]);

  if (ds.train.empty()) {
    throw DataError("corpus pipeline produced no train sentences (k=" +
                    std::to_string(k) + ")");
  }

  auto [source, target] = build_vocabularies(ds.train);
  // Cover the full phoneme inventory so full-dictionary test targets encode
  // without UNK, then sweep dev/test for leftover tokens (punctuation or
  // graphemes unseen in train).
  for (const std::string& p : phoneme_inventory(full_lexicon)) target.add(p);
  for (const std::vector<TranscribedPair>* split : {&ds.dev, &ds.test}) {
    for (const TranscribedPair& pair : *split) {
      for (const std::string& g : split_codepoints(pair.graphemes)) {
        source.add(g);
      }
      for (const std::string& p : pair.phonemes) target.add(p);
    }
  }
  ds.source_vocab = std::move(source);
  ds.target_vocab = std::move(target);
  return ds;
}

namespace {

std::string pairs_to_tsv(const std::vector<TranscribedPair>& pairs) {
  std::string out;
  for (const TranscribedPair& pair : pairs) {
    out += pair.graphemes;
    out += '\t';
    for (size_t i = 0; i < pair.phonemes.size(); ++i) {
      if (i) out += ' ';
      out += pair.phonemes[i];
    }
    out += '\n';
  }
  return out;
}

std::vector<TranscribedPair> pairs_from_tsv(const std::string& text,
                                            const std::string& where) {
  std::vector<TranscribedPair> pairs;
  size_t line_no = 0;
  for (const std::string& line : split_on(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(where + " line " + std::to_string(line_no) +
                      ": expected `graphemes<TAB>tokens`");
    }
    TranscribedPair pair;
    pair.graphemes = line.substr(0, tab);
    pair.phonemes = split_whitespace(line.substr(tab + 1));
    if (pair.graphemes.empty() || pair.phonemes.empty()) {
      throw DataError(where + " line " + std::to_string(line_no) +
                      ": empty pair");
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::string vocab_to_text(const Vocabulary& vocab) {
  std::string out;
  for (const std::string& t : vocab.tokens()) {
    out += t;
    out += '\n';
  }
  return out;
}

Vocabulary vocab_from_text(const std::string& text) {
  std::vector<std::string> lines = split_on(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return Vocabulary::from_tokens(std::move(lines));
}

}  // namespace

void save_dataset(const CorpusDataset& dataset, const Lexicon& train_lexicon,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "train.tsv", pairs_to_tsv(dataset.train));
  write_file_atomic(dir / "dev.tsv", pairs_to_tsv(dataset.dev));
  write_file_atomic(dir / "test.tsv", pairs_to_tsv(dataset.test));
  write_file_atomic(dir / "source.vocab", vocab_to_text(dataset.source_vocab));
  write_file_atomic(dir / "target.vocab", vocab_to_text(dataset.target_vocab));
  write_file_atomic(dir / "lexicon.tsv", write_lexicon(train_lexicon));

  const DatasetProvenance& p = dataset.provenance;
  std::ostringstream meta;
  meta << "dialect=" << p.dialect << '\n'
       << "k=" << p.k << '\n'
       << "seed=" << p.seed << '\n'
       << "ratio_train=" << format_double(p.ratios[0]) << '\n'
       << "ratio_dev=" << format_double(p.ratios[1]) << '\n'
       << "ratio_test=" << format_double(p.ratios[2]) << '\n'
       << "sentences_total=" << p.sentences_total << '\n'
       << "oov_dropped_train=" << p.oov_dropped[0] << '\n'
       << "oov_dropped_dev=" << p.oov_dropped[1] << '\n'
       << "oov_dropped_test=" << p.oov_dropped[2] << '\n'
       << "length_dropped_train=" << p.length_dropped[0] << '\n'
       << "length_dropped_dev=" << p.length_dropped[1] << '\n'
       << "length_dropped_test=" << p.length_dropped[2] << '\n'
       << "pairs_train=" << dataset.train.size() << '\n'
       << "pairs_dev=" << dataset.dev.size() << '\n'
       << "pairs_test=" << dataset.test.size() << '\n';
  write_file_atomic(dir / "meta", meta.str());
}

CorpusDataset load_dataset(const std::filesystem::path& dir) {
  CorpusDataset ds;
  ds.train = pairs_from_tsv(read_file(dir / "train.tsv"), "train.tsv");
  ds.dev = pairs_from_tsv(read_file(dir / "dev.tsv"), "dev.tsv");
  ds.test = pairs_from_tsv(read_file(dir / "test.tsv"), "test.tsv");
  ds.source_vocab = vocab_from_text(read_file(dir / "source.vocab"));
  ds.target_vocab = vocab_from_text(read_file(dir / "target.vocab"));

  DatasetProvenance& p = ds.provenance;
  for (const std::string& line : split_on(read_file(dir / "meta"), '\n')) {
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw DataError("meta: malformed line " + line);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "dialect") p.dialect = value;
    else if (key == "k") p.k = std::stoll(value);
    else if (key == "seed") p.seed = std::stoull(value);
    else if (key == "ratio_train") p.ratios[0] = std::stod(value);
    else if (key == "ratio_dev") p.ratios[1] = std::stod(value);
    else if (key == "ratio_test") p.ratios[2] = std::stod(value);
    else if (key == "sentences_total") p.sentences_total = std::stoll(value);
    else if (key == "oov_dropped_train") p.oov_dropped[0] = std::stoll(value);
    else if (key == "oov_dropped_dev") p.oov_dropped[1] = std::stoll(value);
    else if (key == "oov_dropped_test") p.oov_dropped[2] = std::stoll(value);
    else if (key == "length_dropped_train") p.length_dropped[0] = std::stoll(value);
    else if (key == "length_dropped_dev") p.length_dropped[1] = std::stoll(value);
    else if (key == "length_dropped_test") p.length_dropped[2] = std::stoll(value);
    // pairs_* counts are derivable; ignored on load.
  }
  return ds;
}

std::vector<std::string> read_sentence_file(const std::filesystem::path& path) {
  std::vector<std::string> sentences;
  for (std::string& line : split_on(read_file(path), '\n')) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) sentences.push_back(std::move(line));
  }
  return sentences;
}

}  // namespace g2p
