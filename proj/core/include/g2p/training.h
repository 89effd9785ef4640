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

#ifndef G2P_TRAINING_H_
#define G2P_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "g2p/checkpoint.h"
#include "g2p/corpus.h"
#include "g2p/model.h"
#include "g2p/rng.h"

namespace g2p {

enum class TrainMode { kPretrain, kScratch, kFinetune };

const char* train_mode_name(TrainMode mode);
TrainMode train_mode_from_name(const std::string& name);

// 100 / 50 / 25 for pretrain / scratch / finetune.
int64_t default_epochs(TrainMode mode);

struct TrainConfig {
  TrainMode mode = TrainMode::kScratch;
  int64_t epochs = 0;  // 0 means the mode default
  int64_t batch_size = 128;
  double lr = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 1.0;
  uint64_t seed = 1234;
};

struct EpochRecord {
  int64_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
  int64_t clips = 0;
};

struct TrainResult {
  Checkpoint best;
  int64_t best_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<EpochRecord> records;
};

// Full training loop: deterministic (seed, epoch) batch order, gradient
// clipping, Adam, end-of-epoch dev loss, best-validation checkpoint with
// ties resolved to the earlier epoch. An empty dev split falls back to the
// epoch's train loss for selection. Non-finite losses abort with the
// offending epoch and batch named.
TrainResult train(TransformerModel<float>& model, const CorpusDataset& dataset,
                  const TrainConfig& cfg);

// Position-weighted mean teacher-forced loss, dropout off.
double evaluate_loss(TransformerModel<float>& model,
                     const std::vector<TranscribedPair>& pairs,
                     const Vocabulary& source_vocab,
                     const Vocabulary& target_vocab, int64_t batch_size);

// Loads the pretrained model and swaps in a freshly initialized target
// embedding and output projection sized for new_target_vocab.
TransformerModel<float> transfer_surgery(const Checkpoint& pretrained,
                                         const Vocabulary& new_target_vocab,
                                         Rng& rng);

// One paper setup end to end. finetune requires `base`; the other modes
// forbid it. For finetune the dataset is re-encoded with the base
// checkpoint's source vocabulary, which must cover the dataset's graphemes.
TrainResult run_setup(TrainMode mode, const CorpusDataset& dataset,
                      const TransformerConfig& model_cfg, TrainConfig cfg,
                      const Checkpoint* base);

// CSV: epoch,train_loss,val_loss,seconds,clips
void write_train_log(const std::vector<EpochRecord>& records,
                     const std::filesystem::path& path);

}  // namespace g2p

#endif  // G2P_TRAINING_H_
