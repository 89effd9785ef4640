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

#include "g2p/training.h"

#include <chrono>
#include <limits>
#include <sstream>

#include "g2p/error.h"
#include "g2p/nn.h"
#include "src/io_util.h"

namespace g2p {

const char* train_mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::kPretrain: return "pretrain";
    case TrainMode::kScratch: return "scratch";
    case TrainMode::kFinetune: return "finetune";
  }
  return "unknown";
}

TrainMode train_mode_from_name(const std::string& name) {
  if (name == "pretrain") return TrainMode::kPretrain;
  if (name == "scratch") return TrainMode::kScratch;
  if (name == "finetune") return TrainMode::kFinetune;
  throw DataError("unknown training mode: " + name +
                  " (expected pretrain, scratch or finetune)");
}

int64_t default_epochs(TrainMode mode) {
  switch (mode) {
    case TrainMode::kPretrain: return 100;
    case TrainMode::kScratch: return 50;
    case TrainMode::kFinetune: return 25;
  }
  return 0;
}

double evaluate_loss(TransformerModel<float>& model,
                     const std::vector<TranscribedPair>& pairs,
                     const Vocabulary& source_vocab,
                     const Vocabulary& target_vocab, int64_t batch_size) {
  if (pairs.empty()) throw DataError("cannot evaluate loss on an empty split");
  double loss_sum = 0;
  int64_t tokens = 0;
  for (const Batch& batch :
       make_eval_batches(pairs, source_vocab, target_vocab, batch_size)) {
    LossStats stats = model.batch_loss(batch, false, false);
    loss_sum += stats.loss * static_cast<double>(stats.tokens);
    tokens += stats.tokens;
  }
  return loss_sum / static_cast<double>(tokens);
}

TrainResult train(TransformerModel<float>& model, const CorpusDataset& dataset,
                  const TrainConfig& cfg) {
  if (model.config().source_vocab_size != dataset.source_vocab.size() ||
      model.config().target_vocab_size != dataset.target_vocab.size()) {
    throw DataError("dataset vocabularies do not match the model config");
  }
  if (cfg.batch_size < 1 || cfg.lr <= 0 || cfg.clip_norm <= 0) {
    throw DataError("training config values must be positive");
  }
  if (dataset.train.empty()) throw DataError("train split is empty");
  int64_t epochs = cfg.epochs > 0 ? cfg.epochs : default_epochs(cfg.mode);

  std::vector<Parameter<float>*> params = model.parameters();
  Adam<float> adam(params, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
  model.seed_dropout(mix64(cfg.seed, 0x9D0));

  TrainResult res;
  res.best_val_loss = std::numeric_limits<double>::infinity();

  for (int64_t epoch = 1; epoch <= epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<Batch> batches =
        make_batches(dataset.train, dataset.source_vocab, dataset.target_vocab,
                     cfg.batch_size, cfg.seed, epoch);
    double loss_sum = 0;
    int64_t tokens = 0;
    int64_t clips = 0;
    for (size_t bi = 0; bi < batches.size(); ++bi) {
      zero_grads(params);
      try {
        LossStats stats = model.batch_loss(batches[bi], true, true);
        double norm = clip_grad_norm(params, cfg.clip_norm);
        if (norm > cfg.clip_norm) ++clips;
        loss_sum += stats.loss * static_cast<double>(stats.tokens);
        tokens += stats.tokens;
      } catch (const NumericError& e) {
        throw NumericError("training aborted at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(bi + 1) + ": " + e.what());
      }
      adam.step();
    }
    double train_loss = loss_sum / static_cast<double>(tokens);
    double val_loss =
        dataset.dev.empty()
            ? train_loss
            : evaluate_loss(model, dataset.dev, dataset.source_vocab,
                            dataset.target_vocab, cfg.batch_size);
    double seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    res.records.push_back({epoch, train_loss, val_loss, seconds, clips});

    if (val_loss < res.best_val_loss) {
      res.best_val_loss = val_loss;
      res.best_epoch = epoch;
      res.best = snapshot_model(model, dataset.source_vocab,
                                dataset.target_vocab);
    }
  }

  res.best.set_metadata("mode", train_mode_name(cfg.mode));
  res.best.set_metadata("epochs", std::to_string(epochs));
  res.best.set_metadata("best_epoch", std::to_string(res.best_epoch));
  res.best.set_metadata("best_val_loss", format_double(res.best_val_loss));
  res.best.set_metadata("seed", std::to_string(cfg.seed));
  res.best.set_metadata("batch_size", std::to_string(cfg.batch_size));
  res.best.set_metadata("lr", format_double(cfg.lr));
  res.best.set_metadata("clip_norm", format_double(cfg.clip_norm));
  res.best.set_metadata("dataset_dialect", dataset.provenance.dialect);
  res.best.set_metadata("dataset_k", std::to_string(dataset.provenance.k));
  res.best.set_metadata("dataset_seed",
                        std::to_string(dataset.provenance.seed));
  return res;
}

TransformerModel<float> transfer_surgery(const Checkpoint& pretrained,
                                         const Vocabulary& new_target_vocab,
                                         Rng& rng) {
  if (!new_target_vocab.contains(kWordBoundary)) {
    throw DataError("target vocabulary lacks the word boundary token " +
                    std::string(kWordBoundary));
  }
  TransformerModel<float> model = model_from_checkpoint(pretrained);
  model.reset_target_head(new_target_vocab.size(), rng);
  return model;
}

TrainResult run_setup(TrainMode mode, const CorpusDataset& dataset,
                      const TransformerConfig& model_cfg, TrainConfig cfg,
                      const Checkpoint* base) {
  cfg.mode = mode;

  if (mode == TrainMode::kFinetune) {
    if (!base) throw DataError("finetune requires a base checkpoint");
    for (const std::string& token : dataset.source_vocab.tokens()) {
      if (!base->source_vocab.contains(token)) {
        throw DataError("source vocabulary mismatch: grapheme '" + token +
                        "' is absent from the base checkpoint");
      }
    }
    // Keep the base source embedding meaningful: encode with its vocabulary.
    CorpusDataset ds = dataset;
    ds.source_vocab = base->source_vocab;
    Rng rng = Rng::substream(cfg.seed, 0xF1);
    TransformerModel<float> model =
        transfer_surgery(*base, ds.target_vocab, rng);
    return train(model, ds, cfg);
  }

  if (base) {
    throw DataError(std::string(train_mode_name(mode)) +
                    " does not take a base checkpoint");
  }
  TransformerConfig mc = model_cfg;
  mc.source_vocab_size = dataset.source_vocab.size();
  mc.target_vocab_size = dataset.target_vocab.size();
  TransformerModel<float> model(mc, cfg.seed);
  return train(model, dataset, cfg);
}

void write_train_log(const std::vector<EpochRecord>& records,
                     const std::filesystem::path& path) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,seconds,clips\n";
  char buf[160];
  for (const EpochRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g,%.3f,%lld\n",
                  static_cast<long long>(r.epoch), r.train_loss, r.val_loss,
                  r.seconds, static_cast<long long>(r.clips));
    out << buf;
  }
  write_file_atomic(path, out.str());
}

}  // namespace g2p
