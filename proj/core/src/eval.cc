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

#include "g2p/eval.h"

#include <algorithm>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "g2p/error.h"
#include "g2p/training.h"
#include "src/io_util.h"

namespace g2p {

int64_t levenshtein(std::span<const std::string> a,
                    std::span<const std::string> b) {
  size_t n = a.size();
  size_t m = b.size();
  std::vector<int64_t> prev(m + 1);
  std::vector<int64_t> cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int64_t>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int64_t>(i);
    for (size_t j = 1; j <= m; ++j) {
      int64_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

PerReport compute_per(const std::vector<std::vector<std::string>>& hypotheses,
                      const std::vector<std::vector<std::string>>& references,
                      const std::vector<std::string>& exclude) {
  if (hypotheses.size() != references.size()) {
    throw DataError("hypothesis and reference counts differ");
  }
  if (references.empty()) throw DataError("no reference sentences");

  std::unordered_set<std::string> drop(exclude.begin(), exclude.end());
  auto filtered = [&drop](const std::vector<std::string>& tokens) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const std::string& t : tokens) {
      if (drop.find(t) == drop.end()) out.push_back(t);
    }
    return out;
  };

  PerReport report;
  for (size_t i = 0; i < references.size(); ++i) {
    std::vector<std::string> ref = filtered(references[i]);
    if (ref.empty()) {
      throw DataError("reference sentence " + std::to_string(i + 1) +
                      " is empty");
    }
    std::vector<std::string> hyp = filtered(hypotheses[i]);
    report.distance += levenshtein(hyp, ref);
    report.ref_tokens += static_cast<int64_t>(ref.size());
    ++report.sentences;
  }
  return report;
}

PerReport evaluate(TransformerModel<float>& model,
                   const Vocabulary& source_vocab,
                   const Vocabulary& target_vocab,
                   const std::vector<TranscribedPair>& pairs,
                   const std::vector<std::string>& exclude) {
  std::vector<std::vector<std::string>> hyps;
  std::vector<std::vector<std::string>> refs;
  hyps.reserve(pairs.size());
  refs.reserve(pairs.size());
  int64_t truncations = 0;
  for (const TranscribedPair& pair : pairs) {
    std::vector<int32_t> src = encode_graphemes(pair.graphemes, source_vocab);
    DecodeResult decode = model.greedy_decode(src);
    if (decode.truncated) ++truncations;
    std::vector<std::string> hyp;
    hyp.reserve(decode.ids.size());
    for (int32_t id : decode.ids) hyp.push_back(target_vocab.token(id));
    hyps.push_back(std::move(hyp));
    refs.push_back(pair.phonemes);
  }
  PerReport report = compute_per(hyps, refs, exclude);
  report.truncations = truncations;
  return report;
}

PerReport evaluate(const Checkpoint& ckpt,
                   const std::vector<TranscribedPair>& pairs,
                   const std::vector<std::string>& exclude) {
  TransformerModel<float> model = model_from_checkpoint(ckpt);
  return evaluate(model, ckpt.source_vocab, ckpt.target_vocab, pairs, exclude);
}

namespace {

std::string hash_lexicon(const Lexicon& lexicon) {
  std::string bytes = write_lexicon(lexicon);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", crc32(bytes.data(), bytes.size()));
  return buf;
}

std::string hash_sentences(const std::vector<std::string>& sentences) {
  std::string bytes;
  for (const std::string& s : sentences) {
    bytes += s;
    bytes += '\n';
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", crc32(bytes.data(), bytes.size()));
  return buf;
}

std::string describe_model(const TransformerConfig& m) {
  std::ostringstream out;
  out << m.n_encoder_layers << '/' << m.n_decoder_layers << '/' << m.d_model
      << '/' << m.d_ff << '/' << m.n_heads << '/' << format_double(m.dropout)
      << '/' << m.max_seq_len;
  return out.str();
}

std::string row_hash(const SweepConfig& cfg, const std::string& sentences_hash,
                     const std::string& lexicon_hash,
                     const std::string& dialect, int64_t k,
                     const std::string& mode, int64_t epochs,
                     const std::string& base_hash) {
  std::ostringstream out;
  out << "model=" << describe_model(cfg.model) << ";sentences="
      << sentences_hash << ";lexicon=" << lexicon_hash << ";dialect="
      << dialect << ";k=" << k << ";mode=" << mode << ";epochs=" << epochs
      << ";batch=" << cfg.batch_size << ";lr=" << format_double(cfg.lr)
      << ";clip=" << format_double(cfg.clip_norm) << ";seed=" << cfg.seed
      << ";base=" << base_hash;
  std::string s = out.str();
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", crc32(s.data(), s.size()));
  return buf;
}

// A checkpoint on disk can stand in for retraining only when it records the
// same effective configuration.
bool checkpoint_matches(const std::filesystem::path& path,
                        const std::string& hash, Checkpoint* out) {
  if (!std::filesystem::exists(path)) return false;
  try {
    Checkpoint ckpt = load_checkpoint(path);
    const std::string* stored = ckpt.find_metadata("config_hash");
    if (!stored || *stored != hash) return false;
    *out = std::move(ckpt);
    return true;
  } catch (const CheckpointError&) {
    return false;
  }
}

std::string format_per(double per) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", per);
  return buf;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg) {
  if (cfg.target_lexicons.empty()) {
    throw DataError("sweep needs at least one target dialect");
  }
  if (cfg.ks.empty()) throw DataError("sweep needs a non-empty k set");
  std::filesystem::create_directories(cfg.out_dir);

  std::string sentences_hash = hash_sentences(cfg.sentences);

  TrainConfig base_tc;
  base_tc.batch_size = cfg.batch_size;
  base_tc.lr = cfg.lr;
  base_tc.clip_norm = cfg.clip_norm;
  base_tc.seed = cfg.seed;

  SweepResult result;

  // Pretrain once on the source dialect with its full dictionary.
  int64_t pretrain_epochs = cfg.pretrain_epochs > 0
                                ? cfg.pretrain_epochs
                                : default_epochs(TrainMode::kPretrain);
  std::string pre_hash = row_hash(
      cfg, sentences_hash, hash_lexicon(cfg.source_lexicon),
      cfg.source_lexicon.dialect_id(),
      static_cast<int64_t>(cfg.source_lexicon.size()), "pretrain",
      pretrain_epochs, "none");
  std::filesystem::path pre_dir = cfg.out_dir / "pretrain";
  std::filesystem::path pre_ckpt_path = pre_dir / "ckpt.g2pc";
  Checkpoint pretrained;
  if (!checkpoint_matches(pre_ckpt_path, pre_hash, &pretrained)) {
    CorpusDataset pre_ds =
        build_corpus(cfg.sentences, cfg.source_lexicon,
                     static_cast<int64_t>(cfg.source_lexicon.size()), cfg.seed);
    TrainConfig tc = base_tc;
    tc.epochs = pretrain_epochs;
    TrainResult tr =
        run_setup(TrainMode::kPretrain, pre_ds, cfg.model, tc, nullptr);
    tr.best.set_metadata("config_hash", pre_hash);
    std::filesystem::create_directories(pre_dir);
    save_checkpoint(tr.best, pre_ckpt_path);
    write_train_log(tr.records, pre_dir / "train_log.csv");
    pretrained = std::move(tr.best);
  }
  result.pretrain_checkpoint = pre_ckpt_path;

  for (const Lexicon& lexicon : cfg.target_lexicons) {
    for (int64_t k : cfg.ks) {
      CorpusDataset ds;
      bool ds_ok = true;
      std::string ds_error;
      try {
        ds = build_corpus(cfg.sentences, lexicon, k, cfg.seed);
      } catch (const std::exception& e) {
        ds_ok = false;
        ds_error = e.what();
      }

      for (TrainMode mode : {TrainMode::kScratch, TrainMode::kFinetune}) {
        SweepRow row;
        row.dialect = lexicon.dialect_id();
        row.k = k;
        row.mode = train_mode_name(mode);
        if (!ds_ok) {
          row.failed = true;
          row.error = ds_error;
          std::cerr << "sweep row " << row.dialect << " k=" << k << " "
                    << row.mode << " failed: " << ds_error << "\n";
          result.rows.push_back(std::move(row));
          continue;
        }
        try {
          TrainConfig tc = base_tc;
          tc.epochs = mode == TrainMode::kScratch
                          ? (cfg.scratch_epochs > 0
                                 ? cfg.scratch_epochs
                                 : default_epochs(TrainMode::kScratch))
                          : (cfg.finetune_epochs > 0
                                 ? cfg.finetune_epochs
                                 : default_epochs(TrainMode::kFinetune));
          std::string hash = row_hash(
              cfg, sentences_hash, hash_lexicon(lexicon), row.dialect, k,
              row.mode, tc.epochs,
              mode == TrainMode::kFinetune ? pre_hash : "none");
          std::filesystem::path row_dir =
              cfg.out_dir / (row.dialect + "_k" + std::to_string(k) + "_" +
                             row.mode);
          std::filesystem::path ckpt_path = row_dir / "ckpt.g2pc";

          Checkpoint best;
          if (!checkpoint_matches(ckpt_path, hash, &best)) {
            TrainResult tr = run_setup(
                mode, ds, cfg.model, tc,
                mode == TrainMode::kFinetune ? &pretrained : nullptr);
            tr.best.set_metadata("config_hash", hash);
            std::filesystem::create_directories(row_dir);
            save_checkpoint(tr.best, ckpt_path);
            write_train_log(tr.records, row_dir / "train_log.csv");
            best = std::move(tr.best);
          }

          PerReport report = evaluate(best, ds.test, cfg.per_exclude);
          row.per = report.per();
          row.distance = report.distance;
          row.ref_tokens = report.ref_tokens;
          row.checkpoint = ckpt_path.string();
        } catch (const std::exception& e) {
          row.failed = true;
          row.error = e.what();
          std::cerr << "sweep row " << row.dialect << " k=" << k << " "
                    << row.mode << " failed: " << e.what() << "\n";
        }
        result.rows.push_back(std::move(row));
      }
    }
  }

  write_sweep_csv(result.rows, cfg.out_dir / "sweep.csv");
  write_sweep_plot(result.rows, cfg.out_dir / "sweep_plot.dat");
  return result;
}

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::filesystem::path& path) {
  std::ostringstream out;
  out << "dialect,k,mode,per,distance,ref_tokens,checkpoint\n";
  for (const SweepRow& row : rows) {
    out << row.dialect << ',' << row.k << ',' << row.mode << ',';
    if (row.failed) {
      out << "failed,0,0,\n";
    } else {
      out << format_per(row.per) << ',' << row.distance << ','
          << row.ref_tokens << ',' << row.checkpoint << '\n';
    }
  }
  write_file_atomic(path, out.str());
}

void write_sweep_plot(const std::vector<SweepRow>& rows,
                      const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> series;
  for (const SweepRow& row : rows) {
    if (row.failed) continue;
    std::pair<std::string, std::string> key{row.dialect, row.mode};
    if (std::find(series.begin(), series.end(), key) == series.end()) {
      series.push_back(std::move(key));
    }
  }

  std::ostringstream out;
  bool first = true;
  for (const auto& [dialect, mode] : series) {
    std::vector<const SweepRow*> points;
    for (const SweepRow& row : rows) {
      if (!row.failed && row.dialect == dialect && row.mode == mode) {
        points.push_back(&row);
      }
    }
    std::sort(points.begin(), points.end(),
              [](const SweepRow* a, const SweepRow* b) { return a->k < b->k; });
    if (!first) out << '\n';
    first = false;
    out << "# " << dialect << ' ' << mode << '\n';
    for (const SweepRow* p : points) {
      out << p->k << ' ' << format_per(p->per) << '\n';
    }
  }
  write_file_atomic(path, out.str());
}

}  // namespace g2p
