// Copyright 2026 The ellqa Authors.
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

// Training loop, windowed prediction and checkpoints for the span reader.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ellqa/io.hpp"
#include "ellqa/metrics.hpp"
#include "ellqa/model/reader.hpp"
#include "ellqa/predictions.hpp"
#include "ellqa/rng.hpp"
#include "ellqa/sampler.hpp"
#include "json.hpp"

namespace ellqa::model {

struct TrainerSettings {
  int epochs = 30;
  double learning_rate = 1e-3;
  int batch_size = 32;
  std::uint64_t seed = 1;
  std::size_t max_answer_length = 100;
  std::size_t window = 400;
  std::size_t stride = 200;
  double max_grad_norm = 5.0;  // 0 disables clipping
  // Stop once the dev score reaches this value.
  std::optional<double> target_dev_f1;
};

inline nlohmann::json to_json(const TrainerSettings& s) {
  nlohmann::json j = {{"epochs", s.epochs},
                      {"learning_rate", s.learning_rate},
                      {"batch_size", s.batch_size},
                      {"seed", s.seed},
                      {"max_answer_length", s.max_answer_length},
                      {"window", s.window},
                      {"stride", s.stride},
                      {"max_grad_norm", s.max_grad_norm}};
  j["target_dev_f1"] = s.target_dev_f1 ? nlohmann::json(*s.target_dev_f1)
                                       : nlohmann::json(nullptr);
  return j;
}

// Reads trainer settings. "seeds" is accepted alongside the other keys and
// returned separately by the caller; it is ignored here.
inline TrainerSettings trainer_settings_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {
      "epochs", "learning_rate", "batch_size", "seed", "seeds",
      "max_answer_length", "window", "stride", "max_grad_norm",
      "target_dev_f1"};
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) throw Error("trainer config: unknown field '" + k + "'");
  }
  TrainerSettings s;
  s.epochs = j.value("epochs", s.epochs);
  s.learning_rate = j.value("learning_rate", s.learning_rate);
  s.batch_size = j.value("batch_size", s.batch_size);
  s.seed = j.value("seed", s.seed);
  s.max_answer_length = j.value("max_answer_length", s.max_answer_length);
  s.window = j.value("window", s.window);
  s.stride = j.value("stride", s.stride);
  s.max_grad_norm = j.value("max_grad_norm", s.max_grad_norm);
  if (j.contains("target_dev_f1") && !j.at("target_dev_f1").is_null()) {
    s.target_dev_f1 = j.at("target_dev_f1").get<double>();
  }
  if (s.epochs <= 0 || s.batch_size <= 0 || s.max_answer_length == 0 ||
      s.window == 0 || s.stride == 0 || s.learning_rate <= 0.0) {
    throw Error("trainer config: non-positive setting");
  }
  return s;
}

// A trained model plus everything needed to run it.
struct ModelCheckpoint {
  EncoderConfig config;
  Vocabulary vocabulary;
  std::vector<std::pair<std::string, Matrix>> parameters;
  std::size_t max_answer_length = 100;
  std::size_t window = 400;
  std::size_t stride = 200;
  std::uint64_t seed = 0;
  int epoch = 0;
  double dev_f1 = 0.0;

  SpanReader reader() const {
    SpanReader r(config, vocabulary);
    if (r.params().size() != parameters.size()) {
      throw Error("checkpoint does not match the model layout");
    }
    for (std::size_t k = 0; k < parameters.size(); ++k) {
      Param& p = r.params()[k];
      if (p.name != parameters[k].first ||
          p.value.rows() != parameters[k].second.rows() ||
          p.value.cols() != parameters[k].second.cols()) {
        throw Error("checkpoint parameter " + parameters[k].first +
                    " does not match the model layout");
      }
      p.value = parameters[k].second;
    }
    return r;
  }
};

inline ModelCheckpoint snapshot(const SpanReader& reader,
                                const TrainerSettings& settings, int epoch,
                                double dev_f1) {
  ModelCheckpoint c;
  c.config = reader.config();
  c.vocabulary = reader.vocabulary();
  for (const Param& p : reader.params()) c.parameters.emplace_back(p.name, p.value);
  c.max_answer_length = settings.max_answer_length;
  c.window = settings.window;
  c.stride = settings.stride;
  c.seed = settings.seed;
  c.epoch = epoch;
  c.dev_f1 = dev_f1;
  return c;
}

inline void save_checkpoint(const ModelCheckpoint& c, std::ostream& out) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& [name, m] : c.parameters) {
    std::vector<double> data(m.data(), m.data() + m.size());  // column-major
    params.push_back(
        {{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"data", data}});
  }
  nlohmann::json j = {{"format", "ellqa-span-reader-1"},
                      {"config", to_json(c.config)},
                      {"vocabulary", c.vocabulary.words()},
                      {"parameters", params},
                      {"max_answer_length", c.max_answer_length},
                      {"window", c.window},
                      {"stride", c.stride},
                      {"seed", c.seed},
                      {"epoch", c.epoch},
                      {"dev_f1", c.dev_f1}};
  out << j.dump() << '\n';
}

inline ModelCheckpoint load_checkpoint(std::istream& in) {
  ModelCheckpoint c;
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format") != "ellqa-span-reader-1") {
      throw Error("unsupported checkpoint format");
    }
    c.config = encoder_config_from_json(j.at("config"));
    const auto words = j.at("vocabulary").get<std::vector<std::string>>();
    if (words.empty() || words[0] != "<unk>") {
      throw Error("checkpoint vocabulary must start with <unk>");
    }
    for (std::size_t i = 1; i < words.size(); ++i) c.vocabulary.add(words[i]);
    if (c.vocabulary.size() != words.size()) {
      throw Error("checkpoint vocabulary has duplicate words");
    }
    for (const auto& p : j.at("parameters")) {
      const auto rows = p.at("rows").get<Eigen::Index>();
      const auto cols = p.at("cols").get<Eigen::Index>();
      const auto data = p.at("data").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw Error("checkpoint parameter has the wrong size");
      }
      c.parameters.emplace_back(p.at("name").get<std::string>(),
                                Eigen::Map<const Matrix>(data.data(), rows, cols));
    }
    c.max_answer_length = j.at("max_answer_length").get<std::size_t>();
    c.window = j.at("window").get<std::size_t>();
    c.stride = j.at("stride").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.epoch = j.at("epoch").get<int>();
    c.dev_f1 = j.at("dev_f1").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
  c.reader();  // validates the parameter layout
  return c;
}

// Builds a vocabulary from the context and question tokens of instances.
inline Vocabulary build_vocabulary(const std::vector<QAInstance>& instances,
                                   const Corpus& corpus) {
  Vocabulary v;
  std::set<std::string> seen_docs;
  for (const QAInstance& inst : instances) {
    for (const Token& t : inst.question_tokens) v.add(t.text);
    if (seen_docs.insert(inst.context_doc_id).second) {
      for (const Token& t : corpus.document(inst.context_doc_id).tokens) {
        v.add(t.text);
      }
    }
  }
  return v;
}

struct SkippedInstance {
  std::string instance_id;
  std::string reason;
};

// Training example for an instance: the first window that fully contains the
// contiguous gold span.
inline std::optional<Example> training_example(const Vocabulary& vocab,
                                               const QAInstance& inst,
                                               const Corpus& corpus,
                                               const TrainerSettings& settings,
                                               std::string* why_not) {
  if (!inst.gold_contiguous) {
    *why_not = "no contiguous gold span";
    return std::nullopt;
  }
  if (inst.question_tokens.empty()) {
    *why_not = "empty question";
    return std::nullopt;
  }
  const Document& doc = corpus.document(inst.context_doc_id);
  const TokenSpan gold = *inst.gold_contiguous;
  for (const TokenSpan& w :
       context_windows(doc.tokens.size(), settings.window, settings.stride)) {
    if (!w.contains(gold)) continue;
    Example ex = make_example(vocab, doc, match_features(doc, inst.question_tokens),
                              inst.question_tokens, w);
    ex.target_start = gold.start - w.start;
    ex.target_end = gold.end - 1 - w.start;
    return ex;
  }
  *why_not = "gold span does not fit in any context window";
  return std::nullopt;
}

// Best span over all windows of the instance's context, in document
// coordinates. EMPTY only when every window prefers the empty answer.
inline SpanPrediction predict_instance(const SpanReader& reader,
                                       const QAInstance& inst,
                                       const Document& doc,
                                       std::size_t max_answer_length,
                                       std::size_t window, std::size_t stride) {
  const Matrix features = match_features(doc, inst.question_tokens);
  std::optional<SpanPrediction> best;
  double best_null = -std::numeric_limits<double>::infinity();
  for (const TokenSpan& w : context_windows(doc.tokens.size(), window, stride)) {
    Example ex = make_example(reader.vocabulary(), doc, features,
                              inst.question_tokens, w);
    SpanPrediction p = decode(reader.score(ex), max_answer_length);
    if (!p.span) {
      best_null = std::max(best_null, p.score);
      continue;
    }
    p.span->start += w.start;
    p.span->end += w.start;
    if (!best || p.score > best->score) best = p;
  }
  if (best) return *best;
  return {std::nullopt, best_null};
}

struct PredictDiagnostic {
  std::string instance_id;
  std::string message;
};

// One prediction per instance; failures become EMPTY with a diagnostic.
inline Predictions predict(const ModelCheckpoint& checkpoint,
                           const std::vector<QAInstance>& instances,
                           const Corpus& corpus,
                           std::vector<PredictDiagnostic>* diagnostics = nullptr) {
  std::set<std::string> ids;
  for (const QAInstance& inst : instances) {
    if (!ids.insert(inst.instance_id).second) {
      throw Error("duplicate instance_id " + inst.instance_id);
    }
  }
  const SpanReader reader = checkpoint.reader();
  Predictions out;
  for (const QAInstance& inst : instances) {
    try {
      out[inst.instance_id] = predict_instance(
          reader, inst, corpus.document(inst.context_doc_id),
          checkpoint.max_answer_length, checkpoint.window, checkpoint.stride);
    } catch (const Error& e) {
      out[inst.instance_id] = SpanPrediction{};
      if (diagnostics) diagnostics->push_back({inst.instance_id, e.what()});
    }
  }
  return out;
}

inline double mean_token_f1(const SpanReader& reader,
                            const std::vector<QAInstance>& instances,
                            const Corpus& corpus,
                            const TrainerSettings& settings) {
  if (instances.empty()) return 0.0;
  double total = 0.0;
  for (const QAInstance& inst : instances) {
    SpanPrediction p =
        predict_instance(reader, inst, corpus.document(inst.context_doc_id),
                         settings.max_answer_length, settings.window,
                         settings.stride);
    total += token_f1(p.tokens(), inst.gold_answer).f1;
  }
  return total / static_cast<double>(instances.size());
}

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double best_train_loss = 0.0;
  double dev_f1 = 0.0;
};

struct TrainResult {
  ModelCheckpoint best;
  std::vector<EpochLog> log;
  std::vector<SkippedInstance> skipped;
};

// Supplies the training mixture for an epoch; used for per-epoch
// resampling.
using MixtureSource = std::function<JointDataset(std::uint64_t epoch)>;

// Minimizes start plus end cross-entropy with Adam. Dev token F1 is measured
// after every epoch and the best-scoring parameters are kept; when `dev` is
// empty the training instances are used instead. Fully deterministic for a
// given seed.
inline TrainResult train(const JointDataset& mixture,
                         const std::vector<QAInstance>& dev,
                         const Corpus& corpus, const EncoderConfig& config,
                         const TrainerSettings& settings,
                         const MixtureSource& resampler = {}) {
  if (mixture.instances.empty()) throw Error("train: empty mixture");
  Vocabulary vocab = build_vocabulary(mixture.instances, corpus);
  SpanReader reader(config, vocab);
  reader.initialize(settings.seed);
  if (!config.pretrained_embeddings.empty()) {
    reader.load_embeddings(config.pretrained_embeddings);
  }

  TrainResult result;
  auto prepare = [&](const std::vector<QAInstance>& instances,
                     bool record_skips) {
    std::vector<Example> examples;
    for (const QAInstance& inst : instances) {
      std::string why;
      auto ex = training_example(reader.vocabulary(), inst, corpus, settings, &why);
      if (ex) {
        examples.push_back(std::move(*ex));
      } else if (record_skips) {
        result.skipped.push_back({inst.instance_id, why});
      }
    }
    return examples;
  };
  std::vector<Example> examples = prepare(mixture.instances, true);
  if (examples.empty()) throw Error("train: every instance was skipped");
  const std::vector<QAInstance>& dev_set = dev.empty() ? mixture.instances : dev;

  Adam adam(reader.params(), {settings.learning_rate, 0.9, 0.999, 1e-8});
  Rng dropout_rng(mix_seed(settings.seed, 0xd5));
  double best_loss = std::numeric_limits<double>::infinity();
  double best_dev = -1.0;

  for (int epoch = 1; epoch <= settings.epochs; ++epoch) {
    if (resampler && epoch > 1) {
      examples = prepare(resampler(static_cast<std::uint64_t>(epoch - 1)).instances,
                         false);
    }
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng(mix_seed(settings.seed, static_cast<std::uint64_t>(epoch))).shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < order.size();
         b += static_cast<std::size_t>(settings.batch_size)) {
      const std::size_t e =
          std::min(order.size(), b + static_cast<std::size_t>(settings.batch_size));
      reader.params().zero_grad();
      for (std::size_t k = b; k < e; ++k) {
        epoch_loss += reader.loss(examples[order[k]], true,
                                  config.dropout_rate > 0.0 ? &dropout_rng : nullptr);
      }
      reader.params().scale_grad(1.0 / static_cast<double>(e - b));
      if (settings.max_grad_norm > 0.0) {
        const double norm = reader.params().grad_norm();
        if (norm > settings.max_grad_norm) {
          reader.params().scale_grad(settings.max_grad_norm / norm);
        }
      }
      adam.step(reader.params());
    }
    epoch_loss /= static_cast<double>(examples.size());
    best_loss = std::min(best_loss, epoch_loss);

    const double dev_f1 = mean_token_f1(reader, dev_set, corpus, settings);
    result.log.push_back({epoch, epoch_loss, best_loss, dev_f1});
    if (dev_f1 > best_dev) {
      best_dev = dev_f1;
      result.best = snapshot(reader, settings, epoch, dev_f1);
    }
    if (settings.target_dev_f1 && dev_f1 >= *settings.target_dev_f1) break;
  }
  return result;
}

struct MultiSeedResult {
  std::vector<TrainResult> runs;
  double mean_dev_f1 = 0.0;
};

// Independent runs, one per seed, with the best dev scores averaged.
inline MultiSeedResult train_seeds(const JointDataset& mixture,
                                   const std::vector<QAInstance>& dev,
                                   const Corpus& corpus,
                                   const EncoderConfig& config,
                                   TrainerSettings settings,
                                   const std::vector<std::uint64_t>& seeds,
                                   const MixtureSource& resampler = {}) {
  if (seeds.empty()) throw Error("train: empty seed list");
  MultiSeedResult out;
  for (std::uint64_t seed : seeds) {
    settings.seed = seed;
    out.runs.push_back(train(mixture, dev, corpus, config, settings, resampler));
    out.mean_dev_f1 += out.runs.back().best.dev_f1;
  }
  out.mean_dev_f1 /= static_cast<double>(seeds.size());
  return out;
}

// Sanity baseline: the whole sentence right before the question sentence.
// The question sentence is located by exact token match (ignoring <ref>
// markers); EMPTY when it cannot be found or is the first sentence.
inline SpanPrediction baseline_previous_sentence(const QAInstance& inst,
                                                 const Document& doc) {
  std::vector<std::string> question;
  for (const Token& t : inst.question_tokens) {
    if (t.text != kRefOpen && t.text != kRefClose) question.push_back(t.text);
  }
  for (std::size_t k = 0; k < doc.sentence_bounds.size(); ++k) {
    const TokenSpan& s = doc.sentence_bounds[k];
    if (s.size() != question.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < s.size() && same; ++i) {
      same = doc.tokens[s.start + i].text == question[i];
    }
    if (!same) continue;
    if (k == 0) return {};
    return {doc.sentence_bounds[k - 1], 0.0};
  }
  return {};
}

}  // namespace ellqa::model
