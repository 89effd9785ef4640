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

#ifndef G2P_CORPUS_H_
#define G2P_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "g2p/error.h"
#include "g2p/lexicon.h"
#include "g2p/rng.h"

namespace g2p {

// Model sequence budget; encoded sequences (BOS + tokens + EOS) must fit.
inline constexpr int64_t kMaxSeqLen = 240;

// Separator emitted between consecutive words in the phoneme stream.
// Punctuation tokens pass through without separators on either side.
inline constexpr const char* kWordBoundary = "<wb>";

// One sentence with its ground-truth transcription. graphemes is the
// lower-cased sentence surface (whitespace collapsed); its token sequence is
// the code points of that string, spaces and punctuation included.
struct TranscribedPair {
  std::string graphemes;
  std::vector<std::string> phonemes;

  int64_t grapheme_length() const;
};

// Sentence-level lookup transcription. Returns nullopt when any word is
// missing from the lexicon (an OOV rejection, not a failure) or when the
// sentence has no tokens at all; *oov_word names the first missing word.
std::optional<TranscribedPair> transcribe_sentence(
    const std::string& sentence, const Lexicon& lexicon,
    std::string* oov_word = nullptr);

// Drops the floor(low_frac*n) shortest and floor(high_frac*n) longest pairs
// by grapheme length (ties kept in input order); survivors keep their
// original relative order.
std::vector<TranscribedPair> filter_by_length(
    std::vector<TranscribedPair> pairs, double low_frac = 0.03,
    double high_frac = 0.03);

// Deterministic shuffle then contiguous partition: floor(r0*n) train,
// floor(r1*n) dev, remainder test.
template <typename T>
std::array<std::vector<T>, 3> split_corpus(const std::vector<T>& items,
                                           std::array<double, 3> ratios,
                                           uint64_t seed) {
  double sum = ratios[0] + ratios[1] + ratios[2];
  if (sum < 1.0 - 1e-9 || sum > 1.0 + 1e-9) {
    throw DataError("split ratios must sum to 1");
  }
  std::vector<T> shuffled = items;
  Rng rng(seed);
  rng.shuffle(shuffled);
  size_t n = shuffled.size();
  // The epsilon keeps floor() at its exact-arithmetic value when r*n is a
  // whole number that binary rounding left just below it.
  size_t n_train =
      static_cast<size_t>(ratios[0] * static_cast<double>(n) + 1e-9);
  size_t n_dev = static_cast<size_t>(ratios[1] * static_cast<double>(n) + 1e-9);
  std::array<std::vector<T>, 3> out;
  out[0].assign(shuffled.begin(), shuffled.begin() + n_train);
  out[1].assign(shuffled.begin() + n_train,
                shuffled.begin() + n_train + n_dev);
  out[2].assign(shuffled.begin() + n_train + n_dev, shuffled.end());
  return out;
}

// Token index space with PAD/BOS/EOS/UNK pinned at 0..3.
class Vocabulary {
 public:
  // Empty until populated via with_specials() or from_tokens().
  Vocabulary() = default;

  static constexpr int32_t kPad = 0;
  static constexpr int32_t kBos = 1;
  static constexpr int32_t kEos = 2;
  static constexpr int32_t kUnk = 3;

  static const char* pad_token() { return "<pad>"; }
  static const char* bos_token() { return "<bos>"; }
  static const char* eos_token() { return "<eos>"; }
  static const char* unk_token() { return "<unk>"; }

  // Just the four specials.
  static Vocabulary with_specials();
  // From a full token listing whose first four entries must be the specials.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  // Appends if absent; returns the token id either way.
  int32_t add(const std::string& token);
  // kUnk for unknown tokens.
  int32_t id(const std::string& token) const;
  bool contains(const std::string& token) const;
  const std::string& token(int32_t id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  int64_t size() const { return static_cast<int64_t>(tokens_.size()); }

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> index_;
};

// Source = specials + grapheme tokens in first appearance order over train;
// target = specials + <wb> + phoneme/punctuation tokens likewise.
std::pair<Vocabulary, Vocabulary> build_vocabularies(
    std::span<const TranscribedPair> train);

// BOS + token ids + EOS. Unknown tokens map to UNK.
std::vector<int32_t> encode_graphemes(const std::string& graphemes,
                                      const Vocabulary& vocab);
std::vector<int32_t> encode_phonemes(std::span<const std::string> phonemes,
                                     const Vocabulary& vocab);

struct Batch {
  int64_t size = 0;
  int64_t src_len = 0;
  int64_t tgt_len = 0;
  std::vector<int32_t> source_ids;   // row-major [size, src_len], PAD-filled
  std::vector<int32_t> target_ids;   // row-major [size, tgt_len], PAD-filled
  std::vector<uint8_t> source_mask;  // 1 = real token
  std::vector<uint8_t> target_mask;
};

// Deterministic (seed, epoch) shuffle, then fixed-size batches padded to the
// longest member; the final partial batch is kept. Throws DataError when an
// encoded sequence exceeds kMaxSeqLen.
std::vector<Batch> make_batches(std::span<const TranscribedPair> pairs,
                                const Vocabulary& source_vocab,
                                const Vocabulary& target_vocab,
                                int64_t batch_size, uint64_t seed,
                                int64_t epoch);

// Input-order batches for evaluation passes.
std::vector<Batch> make_eval_batches(std::span<const TranscribedPair> pairs,
                                     const Vocabulary& source_vocab,
                                     const Vocabulary& target_vocab,
                                     int64_t batch_size);

struct DatasetProvenance {
  std::string dialect;
  int64_t k = 0;
  uint64_t seed = 0;
  std::array<double, 3> ratios = {0.8, 0.1, 0.1};
  int64_t sentences_total = 0;
  std::array<int64_t, 3> oov_dropped = {0, 0, 0};
  std::array<int64_t, 3> length_dropped = {0, 0, 0};
};

struct CorpusDataset {
  std::vector<TranscribedPair> train;
  std::vector<TranscribedPair> dev;
  std::vector<TranscribedPair> test;
  Vocabulary source_vocab = Vocabulary::with_specials();
  Vocabulary target_vocab = Vocabulary::with_specials();
  DatasetProvenance provenance;

  const std::vector<TranscribedPair>& split(const std::string& name) const;
};

// Full dataset-creation pipeline: split sentences by seed, rank words by
// train-side frequency, subset the dictionary to k words, transcribe
// train/dev with the subset and test with the full lexicon (dropping OOV
// sentences), length-filter each split, then build vocabularies that cover
// every kept token. Throws DataError when no train sentences survive.
CorpusDataset build_corpus(const std::vector<std::string>& sentences,
                           const Lexicon& full_lexicon, int64_t k,
                           uint64_t seed,
                           std::array<double, 3> ratios = {0.8, 0.1, 0.1});

// Dataset directory: train/dev/test.tsv, source/target.vocab, lexicon.tsv
// (the subset actually used for train), meta. Byte-stable given the same
// dataset.
void save_dataset(const CorpusDataset& dataset, const Lexicon& train_lexicon,
                  const std::filesystem::path& dir);
CorpusDataset load_dataset(const std::filesystem::path& dir);

std::vector<std::string> read_sentence_file(const std::filesystem::path& path);

}  // namespace g2p

#endif  // G2P_CORPUS_H_
