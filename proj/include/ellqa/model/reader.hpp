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

// Extractive span reader.
//
// Context tokens are embedded, extended with match features (exact match of
// the original and lowercased form against the question, in-document term
// frequency) and encoded by a stacked bidirectional LSTM whose per-layer
// states are concatenated. The question is encoded by a second stack and
// pooled into one vector with learned attention. Start and end scores are
// bilinear forms between each context position and the question vector; an
// extra sentinel position scores the empty answer. Start and end are trained
// with independent cross-entropy losses.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ellqa/corpus.hpp"
#include "ellqa/model/lstm.hpp"
#include "ellqa/model/params.hpp"
#include "ellqa/predictions.hpp"
#include "json.hpp"

namespace ellqa::model {

struct EncoderConfig {
  int embedding_dim = 64;
  int hidden_dim = 64;
  int num_encoder_layers = 2;
  double dropout_rate = 0.2;
  std::string pretrained_embeddings;  // optional whitespace-separated text file
  // Start the bilinear and sentinel weights at zero so that initial scores
  // are uniform.
  bool zero_init_output = true;
};

inline void validate(const EncoderConfig& c) {
  if (c.embedding_dim <= 0 || c.hidden_dim <= 0 || c.num_encoder_layers <= 0) {
    throw Error("encoder dimensions must be positive");
  }
  if (!(c.dropout_rate >= 0.0 && c.dropout_rate < 1.0)) {
    throw Error("dropout_rate must lie in [0, 1)");
  }
}

inline nlohmann::json to_json(const EncoderConfig& c) {
  return {{"embedding_dim", c.embedding_dim},
          {"hidden_dim", c.hidden_dim},
          {"num_encoder_layers", c.num_encoder_layers},
          {"dropout_rate", c.dropout_rate},
          {"pretrained_embeddings", c.pretrained_embeddings},
          {"zero_init_output", c.zero_init_output}};
}

inline EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {
      "embedding_dim", "hidden_dim", "num_encoder_layers",
      "dropout_rate", "pretrained_embeddings", "zero_init_output"};
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) throw Error("encoder config: unknown field '" + k + "'");
  }
  EncoderConfig c;
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.num_encoder_layers = j.value("num_encoder_layers", c.num_encoder_layers);
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  c.pretrained_embeddings =
      j.value("pretrained_embeddings", c.pretrained_embeddings);
  c.zero_init_output = j.value("zero_init_output", c.zero_init_output);
  validate(c);
  return c;
}

// Lowercased word vocabulary; id 0 is the unknown word.
class Vocabulary {
 public:
  static constexpr int kUnknown = 0;

  Vocabulary() : words_{"<unk>"} { index_.emplace("<unk>", 0); }

  int add(const std::string& word) {
    const std::string key = to_lower(word);
    auto [it, inserted] = index_.emplace(key, static_cast<int>(words_.size()));
    if (inserted) words_.push_back(key);
    return it->second;
  }

  int id(const std::string& word) const {
    auto it = index_.find(to_lower(word));
    return it == index_.end() ? kUnknown : it->second;
  }

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  bool operator==(const Vocabulary& o) const { return words_ == o.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

inline constexpr int kFeatureCount = 3;

// Model input for one context window and question.
struct Example {
  std::vector<int> context_ids;
  Matrix context_features;  // kFeatureCount x window length
  std::vector<int> question_ids;
  std::size_t window_start = 0;  // offset of the window in the document
  // Training targets relative to the window (inclusive end).
  std::optional<std::size_t> target_start, target_end;
};

// Per-token match features over a whole document: exact match of the
// original form, exact match of the lowercased form, and term frequency.
inline Matrix match_features(const Document& doc,
                             const std::vector<Token>& question) {
  std::set<std::string> original, lowered;
  for (const Token& t : question) {
    original.insert(t.text);
    lowered.insert(to_lower(t.text));
  }
  std::unordered_map<std::string, int> counts;
  for (const Token& t : doc.tokens) ++counts[to_lower(t.text)];
  const auto n = static_cast<Eigen::Index>(doc.tokens.size());
  Matrix f(kFeatureCount, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Token& t = doc.tokens[static_cast<std::size_t>(i)];
    const std::string low = to_lower(t.text);
    f(0, i) = original.count(t.text) ? 1.0 : 0.0;
    f(1, i) = lowered.count(low) ? 1.0 : 0.0;
    f(2, i) = static_cast<double>(counts[low]) / static_cast<double>(n);
  }
  return f;
}

// Window starts covering a context of length n: 0, stride, 2*stride, ...
// until a window reaches the end.
inline std::vector<TokenSpan> context_windows(std::size_t n, std::size_t window,
                                              std::size_t stride) {
  if (window == 0 || stride == 0) throw Error("window and stride must be positive");
  std::vector<TokenSpan> out;
  if (n == 0) return out;
  std::size_t start = 0;
  out.push_back({0, std::min(n, window)});
  while (start + window < n) {
    start += stride;
    out.push_back({start, std::min(n, start + window)});
  }
  return out;
}

inline Example make_example(const Vocabulary& vocab, const Document& doc,
                            const Matrix& features,
                            const std::vector<Token>& question,
                            const TokenSpan& window) {
  Example ex;
  ex.window_start = window.start;
  for (std::size_t i = window.start; i < window.end; ++i) {
    ex.context_ids.push_back(vocab.id(doc.tokens[i].text));
  }
  ex.context_features = features.middleCols(
      static_cast<Eigen::Index>(window.start),
      static_cast<Eigen::Index>(window.size()));
  for (const Token& t : question) ex.question_ids.push_back(vocab.id(t.text));
  return ex;
}

// Scores over context positions plus a trailing empty-answer sentinel.
struct SpanScores {
  Vector start;
  Vector end;

  Eigen::Index context_length() const { return start.size() - 1; }
};

struct Encoding {
  Matrix context;   // D x L
  Vector question;  // D
};

class SpanReader {
 public:
  SpanReader(EncoderConfig config, Vocabulary vocab)
      : config_(std::move(config)), vocab_(std::move(vocab)) {
    validate(config_);
    const Eigen::Index E = config_.embedding_dim;
    const Eigen::Index H = config_.hidden_dim;
    const int K = config_.num_encoder_layers;
    emb_ = params_.add("embedding", static_cast<Eigen::Index>(vocab_.size()), E);
    context_encoder_ = BiLstmStack(params_, "context", E + kFeatureCount, H, K);
    question_encoder_ = BiLstmStack(params_, "question", E, H, K);
    const Eigen::Index D = context_encoder_.output_width();
    attention_ = params_.add("question_attention", D, 1);
    start_bilinear_ = params_.add("start_bilinear", D, D);
    end_bilinear_ = params_.add("end_bilinear", D, D);
    start_null_ = params_.add("start_null", D + 1, 1);
    end_null_ = params_.add("end_null", D + 1, 1);
  }

  void initialize(std::uint64_t seed) {
    Rng rng(seed);
    fill_uniform(params_[emb_].value, 0.1, rng);
    params_[emb_].value.row(Vocabulary::kUnknown).setZero();
    context_encoder_.init(params_, rng);
    question_encoder_.init(params_, rng);
    const double scale =
        1.0 / std::sqrt(static_cast<double>(representation_width()));
    fill_uniform(params_[attention_].value, scale, rng);
    for (std::size_t p : {start_bilinear_, end_bilinear_, start_null_, end_null_}) {
      if (config_.zero_init_output) {
        params_[p].value.setZero();
      } else {
        fill_uniform(params_[p].value, scale, rng);
      }
    }
  }

  // Overwrites embedding rows of known words from a text file with lines
  // "word v1 ... vE". Returns the number of rows loaded.
  std::size_t load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open embeddings file " + path);
    std::size_t loaded = 0;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream s(line);
      std::string word;
      s >> word;
      const int id = vocab_.id(word);
      if (id == Vocabulary::kUnknown) continue;
      Vector v(config_.embedding_dim);
      for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (!(s >> v(k))) {
          throw Error("embedding for '" + word + "' has the wrong dimension");
        }
      }
      params_[emb_].value.row(id) = v.transpose();
      ++loaded;
    }
    return loaded;
  }

  const EncoderConfig& config() const { return config_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  Eigen::Index representation_width() const {
    return context_encoder_.output_width();
  }

  Encoding encode(const Example& ex) const {
    Cache cache;
    forward(ex, cache, nullptr);
    return {cache.context.output, cache.question_vector};
  }

  SpanScores score_spans(const Encoding& enc) const {
    return {scores(enc.context, enc.question, start_bilinear_, start_null_),
            scores(enc.context, enc.question, end_bilinear_, end_null_)};
  }

  SpanScores score(const Example& ex) const { return score_spans(encode(ex)); }

  // Scores each example independently.
  std::vector<SpanScores> score_batch(const std::vector<Example>& batch) const {
    std::vector<SpanScores> out;
    out.reserve(batch.size());
    for (const Example& ex : batch) out.push_back(score(ex));
    return out;
  }

  // Start plus end cross-entropy for a labelled example. Accumulates
  // gradients into params() when `backprop` is set; dropout_rng enables
  // dropout.
  double loss(const Example& ex, bool backprop, Rng* dropout_rng) {
    if (!ex.target_start || !ex.target_end) {
      throw Error("example has no training target");
    }
    Cache cache;
    forward(ex, cache, dropout_rng);
    const Eigen::Index L = cache.context.output.cols();
    const Vector s = scores(cache.context.output, cache.question_vector,
                            start_bilinear_, start_null_);
    const Vector e = scores(cache.context.output, cache.question_vector,
                            end_bilinear_, end_null_);
    const auto ts = static_cast<Eigen::Index>(*ex.target_start);
    const auto te = static_cast<Eigen::Index>(*ex.target_end);
    Vector ps = softmax(s), pe = softmax(e);
    const double value = -std::log(ps(ts)) - std::log(pe(te));
    if (!backprop) return value;

    ps(ts) -= 1.0;
    pe(te) -= 1.0;
    Matrix d_context = Matrix::Zero(representation_width(), L);
    Vector d_question = Vector::Zero(representation_width());
    scores_backward(cache.context.output, cache.question_vector, ps,
                    start_bilinear_, start_null_, d_context, d_question);
    scores_backward(cache.context.output, cache.question_vector, pe,
                    end_bilinear_, end_null_, d_context, d_question);

    // Attention pooling.
    const Matrix& qh = cache.question.output;
    const Vector& alpha = cache.attention;
    Matrix d_qh = d_question * alpha.transpose();
    Vector d_alpha = qh.transpose() * d_question;
    Vector d_logits =
        alpha.cwiseProduct((d_alpha.array() - alpha.dot(d_alpha)).matrix());
    params_[attention_].grad.col(0) += qh * d_logits;
    d_qh += params_[attention_].value.col(0) * d_logits.transpose();

    const Eigen::Index E = config_.embedding_dim;
    Matrix dq_in = question_encoder_.backward(params_, cache.question, d_qh);
    for (std::size_t t = 0; t < ex.question_ids.size(); ++t) {
      params_[emb_].grad.row(ex.question_ids[t]) +=
          dq_in.col(static_cast<Eigen::Index>(t)).transpose();
    }
    Matrix dc_in = context_encoder_.backward(params_, cache.context, d_context);
    for (std::size_t t = 0; t < ex.context_ids.size(); ++t) {
      params_[emb_].grad.row(ex.context_ids[t]) +=
          dc_in.col(static_cast<Eigen::Index>(t)).topRows(E).transpose();
    }
    return value;
  }

 private:
  struct Cache {
    BiLstmStack::Cache context, question;
    Vector attention;
    Vector question_vector;
  };

  static Vector softmax(const Vector& v) {
    Vector e = (v.array() - v.maxCoeff()).exp().matrix();
    return e / e.sum();
  }

  void forward(const Example& ex, Cache& cache, Rng* dropout_rng) const {
    if (ex.context_ids.empty()) throw Error("encode: empty context window");
    if (ex.question_ids.empty()) throw Error("encode: empty question");
    const Eigen::Index E = config_.embedding_dim;
    const auto L = static_cast<Eigen::Index>(ex.context_ids.size());
    const auto Q = static_cast<Eigen::Index>(ex.question_ids.size());
    const Matrix& emb = params_[emb_].value;
    Matrix cx(E + kFeatureCount, L);
    for (Eigen::Index t = 0; t < L; ++t) {
      cx.col(t).head(E) = emb.row(ex.context_ids[static_cast<std::size_t>(t)]).transpose();
      cx.col(t).tail(kFeatureCount) = ex.context_features.col(t);
    }
    Matrix qx(E, Q);
    for (Eigen::Index t = 0; t < Q; ++t) {
      qx.col(t) = emb.row(ex.question_ids[static_cast<std::size_t>(t)]).transpose();
    }
    const double p = config_.dropout_rate;
    context_encoder_.forward(params_, cx, cache.context, p, dropout_rng);
    question_encoder_.forward(params_, qx, cache.question, p, dropout_rng);
    const Matrix& qh = cache.question.output;
    cache.attention = softmax(qh.transpose() * params_[attention_].value.col(0));
    cache.question_vector = qh * cache.attention;
  }

  Vector scores(const Matrix& context, const Vector& q, std::size_t bilinear,
                std::size_t null) const {
    const Eigen::Index L = context.cols();
    const Eigen::Index D = q.size();
    Vector out(L + 1);
    out.head(L) = context.transpose() * (params_[bilinear].value * q);
    out(L) = params_[null].value.col(0).head(D).dot(q) + params_[null].value(D, 0);
    return out;
  }

  void scores_backward(const Matrix& context, const Vector& q,
                       const Vector& d_scores, std::size_t bilinear,
                       std::size_t null, Matrix& d_context,
                       Vector& d_question) {
    const Eigen::Index L = context.cols();
    const Eigen::Index D = q.size();
    const Matrix& W = params_[bilinear].value;
    const Vector wq = W * q;
    const Vector dl = d_scores.head(L);
    d_context.noalias() += wq * dl.transpose();
    const Vector d_wq = context * dl;
    params_[bilinear].grad.noalias() += d_wq * q.transpose();
    d_question.noalias() += W.transpose() * d_wq;
    const double dn = d_scores(L);
    params_[null].grad.col(0).head(D) += dn * q;
    params_[null].grad(D, 0) += dn;
    d_question += dn * params_[null].value.col(0).head(D);
  }

  EncoderConfig config_;
  Vocabulary vocab_;
  ParamStore params_;
  std::size_t emb_ = 0;
  BiLstmStack context_encoder_, question_encoder_;
  std::size_t attention_ = 0;
  std::size_t start_bilinear_ = 0, end_bilinear_ = 0;
  std::size_t start_null_ = 0, end_null_ = 0;
};

// Best span (s, e) with s <= e < L and e - s + 1 <= max_answer_length under
// start[s] + end[e]. Ties go to the earlier start, then the shorter span.
// Returns EMPTY when the sentinel pair start[L] + end[L] scores strictly
// higher than the best span.
inline SpanPrediction decode(const SpanScores& scores,
                             std::size_t max_answer_length) {
  if (max_answer_length == 0) throw Error("max_answer_length must be >= 1");
  const Eigen::Index L = scores.context_length();
  const double null_score = scores.start(L) + scores.end(L);
  std::optional<TokenSpan> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index s = 0; s < L; ++s) {
    const Eigen::Index last =
        std::min<Eigen::Index>(L - 1, s + static_cast<Eigen::Index>(max_answer_length) - 1);
    for (Eigen::Index e = s; e <= last; ++e) {
      const double v = scores.start(s) + scores.end(e);
      if (v > best_score) {
        best_score = v;
        best = TokenSpan{static_cast<std::size_t>(s), static_cast<std::size_t>(e + 1)};
      }
    }
  }
  if (!best || null_score > best_score) return {std::nullopt, null_score};
  return {best, best_score};
}

}  // namespace ellqa::model
