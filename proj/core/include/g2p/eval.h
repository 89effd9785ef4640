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

#ifndef G2P_EVAL_H_
#define G2P_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "g2p/checkpoint.h"
#include "g2p/corpus.h"
#include "g2p/lexicon.h"
#include "g2p/model.h"

namespace g2p {

// Unit-cost edit distance between token sequences.
int64_t levenshtein(std::span<const std::string> a,
                    std::span<const std::string> b);

struct PerReport {
  int64_t distance = 0;
  int64_t ref_tokens = 0;
  int64_t sentences = 0;
  int64_t truncations = 0;  // decodes that hit the length cap

  double per() const {
    return 100.0 * static_cast<double>(distance) /
           static_cast<double>(ref_tokens);
  }
};

// Corpus micro-average: sum of distances over sum of reference lengths.
// Tokens listed in `exclude` are removed from both sides before scoring.
// Throws DataError on count mismatch or when a reference sentence is empty
// (before or after exclusion).
PerReport compute_per(const std::vector<std::vector<std::string>>& hypotheses,
                      const std::vector<std::vector<std::string>>& references,
                      const std::vector<std::string>& exclude = {});

// Greedy-decodes each pair's graphemes and scores against its phonemes.
// Unknown graphemes encode as UNK.
PerReport evaluate(TransformerModel<float>& model,
                   const Vocabulary& source_vocab,
                   const Vocabulary& target_vocab,
                   const std::vector<TranscribedPair>& pairs,
                   const std::vector<std::string>& exclude = {});

PerReport evaluate(const Checkpoint& ckpt,
                   const std::vector<TranscribedPair>& pairs,
                   const std::vector<std::string>& exclude = {});

struct SweepRow {
  std::string dialect;
  int64_t k = 0;
  std::string mode;  // scratch | finetune
  bool failed = false;
  double per = 0.0;
  int64_t distance = 0;
  int64_t ref_tokens = 0;
  std::string checkpoint;  // checkpoint file path; empty when failed
  std::string error;       // failure note, not written to the CSV
};

struct SweepConfig {
  std::vector<std::string> sentences;
  Lexicon source_lexicon;
  std::vector<Lexicon> target_lexicons;
  std::vector<int64_t> ks;
  uint64_t seed = 1234;
  TransformerConfig model;
  int64_t pretrain_epochs = 0;  // 0 means the mode default
  int64_t scratch_epochs = 0;
  int64_t finetune_epochs = 0;
  int64_t batch_size = 128;
  double lr = 0.0005;
  double clip_norm = 1.0;
  std::vector<std::string> per_exclude;
  std::filesystem::path out_dir;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::filesystem::path pretrain_checkpoint;
};

// Pretrains once on the source dialect, then runs scratch and finetune for
// every (target dialect, k), evaluating each on the full-dictionary test
// split. A failing row is recorded as failed and the sweep continues.
// Existing checkpoints whose config_hash matches are reused, making reruns
// idempotent. Writes sweep.csv and sweep_plot.dat into out_dir.
SweepResult run_sweep(const SweepConfig& cfg);

// CSV with header dialect,k,mode,per,distance,ref_tokens,checkpoint.
void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::filesystem::path& path);

// Two-column (k, per) blocks, one per (dialect, mode) series, blank-line
// separated; failed rows are skipped.
void write_sweep_plot(const std::vector<SweepRow>& rows,
                      const std::filesystem::path& path);

}  // namespace g2p

#endif  // G2P_EVAL_H_
