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

// Token-level span scores and coreference cluster metrics.

#pragma once

#include <algorithm>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ellqa/assignment.hpp"
#include "ellqa/corpus.hpp"
#include "ellqa/io.hpp"
#include "ellqa/predictions.hpp"

namespace ellqa {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline double harmonic_f1(double p, double r) {
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

inline Prf make_prf(double p, double r) { return {p, r, harmonic_f1(p, r)}; }

// ---------------------------------------------------------------------------
// Span scores.

using TokenF1Result = Prf;

inline TokenF1Result token_f1(const TokenSet& pred, const TokenSet& gold) {
  if (gold.empty()) throw Error("token_f1: empty gold answer");
  std::size_t overlap = 0;
  for (std::size_t i : pred) overlap += gold.count(i);
  const double p = pred.empty() ? 0.0
                                : static_cast<double>(overlap) /
                                      static_cast<double>(pred.size());
  const double r =
      static_cast<double>(overlap) / static_cast<double>(gold.size());
  return make_prf(p, r);
}

inline bool exact_match(const TokenSet& pred, const TokenSet& gold) {
  if (gold.empty()) throw Error("exact_match: empty gold answer");
  return pred == gold;
}

// ---------------------------------------------------------------------------
// Clusterings.

using MentionId = std::string;
using Cluster = std::set<MentionId>;
using Clustering = std::vector<Cluster>;

inline void validate(const Clustering& c) {
  std::set<MentionId> seen;
  for (const Cluster& cluster : c) {
    if (cluster.empty()) throw Error("clustering contains an empty cluster");
    for (const MentionId& m : cluster) {
      if (!seen.insert(m).second) {
        throw Error("mention " + m + " appears in two clusters");
      }
    }
  }
}

namespace detail {

inline std::map<MentionId, std::size_t> cluster_index(const Clustering& c) {
  std::map<MentionId, std::size_t> out;
  for (std::size_t k = 0; k < c.size(); ++k) {
    for (const MentionId& m : c[k]) out[m] = k;
  }
  return out;
}

// Link recall of `key` against `response`: each key cluster is split into
// the partitions induced by response clusters; mentions the response does
// not mention form their own partition.
inline double muc_recall(const Clustering& key, const Clustering& response) {
  const auto index = cluster_index(response);
  std::size_t numerator = 0;
  std::size_t denominator = 0;
  for (const Cluster& k : key) {
    std::set<std::size_t> parts;
    std::size_t unaligned = 0;
    for (const MentionId& m : k) {
      auto it = index.find(m);
      if (it == index.end()) {
        ++unaligned;
      } else {
        parts.insert(it->second);
      }
    }
    numerator += k.size() - (parts.size() + unaligned);
    denominator += k.size() - 1;
  }
  return denominator == 0 ? 0.0
                          : static_cast<double>(numerator) /
                                static_cast<double>(denominator);
}

// Mean over mentions of `key` of |key(m) ∩ response(m)| / |key(m)|.
inline double b_cubed_recall(const Clustering& key,
                             const Clustering& response) {
  const auto index = cluster_index(response);
  double total = 0.0;
  std::size_t mentions = 0;
  for (const Cluster& k : key) {
    for (const MentionId& m : k) {
      ++mentions;
      auto it = index.find(m);
      if (it == index.end()) continue;
      const Cluster& r = response[it->second];
      std::size_t overlap = 0;
      for (const MentionId& x : k) overlap += r.count(x);
      total += static_cast<double>(overlap) / static_cast<double>(k.size());
    }
  }
  return mentions == 0 ? 0.0 : total / static_cast<double>(mentions);
}

}  // namespace detail

inline double phi4(const Cluster& a, const Cluster& b) {
  std::size_t overlap = 0;
  for (const MentionId& m : a) overlap += b.count(m);
  return 2.0 * static_cast<double>(overlap) /
         static_cast<double>(a.size() + b.size());
}

inline Prf muc(const Clustering& gold, const Clustering& pred) {
  validate(gold);
  validate(pred);
  return make_prf(detail::muc_recall(pred, gold), detail::muc_recall(gold, pred));
}

inline Prf b_cubed(const Clustering& gold, const Clustering& pred) {
  validate(gold);
  validate(pred);
  return make_prf(detail::b_cubed_recall(pred, gold),
                  detail::b_cubed_recall(gold, pred));
}

// Entity-based CEAF with the phi4 similarity and an optimal one-to-one
// cluster alignment.
inline Prf ceaf_phi4(const Clustering& gold, const Clustering& pred) {
  validate(gold);
  validate(pred);
  if (gold.empty() || pred.empty()) return {};
  std::vector<std::vector<double>> w(gold.size(),
                                     std::vector<double>(pred.size()));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) w[i][j] = phi4(gold[i], pred[j]);
  }
  const auto match = max_weight_assignment(w);
  double total = 0.0;
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match[i] >= 0) total += w[i][static_cast<std::size_t>(match[i])];
  }
  return make_prf(total / static_cast<double>(pred.size()),
                  total / static_cast<double>(gold.size()));
}

struct CorefScores {
  Prf muc;
  Prf b_cubed;
  Prf ceaf_phi4;
  double macro = 0.0;
};

inline CorefScores coref_scores(const Clustering& gold, const Clustering& pred) {
  CorefScores s;
  s.muc = muc(gold, pred);
  s.b_cubed = b_cubed(gold, pred);
  s.ceaf_phi4 = ceaf_phi4(gold, pred);
  s.macro = (s.muc.f1 + s.b_cubed.f1 + s.ceaf_phi4.f1) / 3.0;
  return s;
}

inline double coref_macro(const Clustering& gold, const Clustering& pred) {
  return coref_scores(gold, pred).macro;
}

// ---------------------------------------------------------------------------
// QA pairs back to clusters.

inline MentionId mention_id(const std::string& doc_id, const TokenSpan& span) {
  return doc_id + ":" + std::to_string(span.start) + "-" +
         std::to_string(span.end);
}

struct ClusterPair {
  Clustering gold;
  Clustering pred;
};

namespace detail {

class UnionFind {
 public:
  std::size_t add(const MentionId& m) {
    auto [it, inserted] = ids_.emplace(m, parent_.size());
    if (inserted) parent_.push_back(parent_.size());
    return it->second;
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(const MentionId& a, const MentionId& b) {
    std::size_t ra = find(add(a));
    std::size_t rb = find(add(b));
    if (ra != rb) parent_[std::max(ra, rb)] = std::min(ra, rb);
  }
  Clustering clusters() {
    std::map<std::size_t, Cluster> groups;
    for (const auto& [m, id] : ids_) groups[find(id)].insert(m);
    Clustering out;
    for (auto& [root, c] : groups) out.push_back(std::move(c));
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::map<MentionId, std::size_t> ids_;
  std::vector<std::size_t> parent_;
};

}  // namespace detail

// Gold clusters link each question mention to its gold antecedent. Predicted
// clusters link a question mention to its predicted span only when that span
// is exactly a known mention (an anchor or gold antecedent) of the same
// document; otherwise the mention stays a singleton.
template <typename Instances>
ClusterPair qa_to_clusters(const Instances& instances,
                           const Predictions& predictions) {
  std::map<std::string, std::set<TokenSpan>> known;
  for (const QAInstance& inst : instances) {
    if (!is_coref(inst.task) || !inst.anchor) {
      throw Error("qa_to_clusters: instance " + inst.instance_id +
                  " is not a coreference question");
    }
    known[inst.context_doc_id].insert(*inst.anchor);
    known[inst.context_doc_id].insert(hull(inst.gold_answer));
  }
  detail::UnionFind gold, pred;
  for (const auto& [doc, spans] : known) {
    for (const TokenSpan& s : spans) {
      gold.add(mention_id(doc, s));
      pred.add(mention_id(doc, s));
    }
  }
  for (const QAInstance& inst : instances) {
    const MentionId q = mention_id(inst.context_doc_id, *inst.anchor);
    gold.unite(q, mention_id(inst.context_doc_id, hull(inst.gold_answer)));
    auto it = predictions.find(inst.instance_id);
    if (it == predictions.end() || !it->second.span) continue;
    if (known[inst.context_doc_id].count(*it->second.span)) {
      pred.unite(q, mention_id(inst.context_doc_id, *it->second.span));
    }
  }
  return {gold.clusters(), pred.clusters()};
}

// ---------------------------------------------------------------------------
// Evaluation reports.

struct InstanceScore {
  std::string instance_id;
  Task task = Task::kSluice;
  Direction direction = Direction::kBackward;
  std::optional<TokenSpan> predicted;
  TokenF1Result f1;
  bool exact = false;
};

struct EvalReport {
  std::size_t size = 0;
  TokenF1Result token;  // per-instance means
  double exact_match = 0.0;
  std::size_t empty_predictions = 0;
  std::vector<InstanceScore> instances;
  std::optional<CorefScores> coref;
  bool coref_per_document = false;
};

struct EvalOptions {
  // Average coreference metrics over documents instead of pooling all
  // mentions into one corpus-wide clustering.
  bool coref_per_document = false;
};

inline InstanceScore score_instance(const QAInstance& inst,
                                    const SpanPrediction& pred) {
  InstanceScore s;
  s.instance_id = inst.instance_id;
  s.task = inst.task;
  s.direction = inst.antecedent_direction;
  s.predicted = pred.span;
  const TokenSet tokens = pred.tokens();
  s.f1 = token_f1(tokens, inst.gold_answer);
  s.exact = exact_match(tokens, inst.gold_answer);
  return s;
}

// Scores predictions for the given instances. Every instance needs a
// prediction and every prediction must name a known instance.
inline EvalReport evaluate(const std::vector<QAInstance>& instances,
                           const Predictions& predictions,
                           const EvalOptions& options = {},
                           const Corpus* corpus = nullptr) {
  if (instances.empty()) throw Error("evaluate: nothing to score");
  std::set<std::string> ids;
  for (const QAInstance& inst : instances) ids.insert(inst.instance_id);
  for (const auto& [id, p] : predictions) {
    if (!ids.count(id)) {
      throw Error("prediction for unknown instance_id " + id);
    }
  }

  EvalReport report;
  report.size = instances.size();
  report.coref_per_document = options.coref_per_document;
  std::vector<QAInstance> coref_instances;
  for (const QAInstance& inst : instances) {
    auto it = predictions.find(inst.instance_id);
    if (it == predictions.end()) {
      throw Error("no prediction for instance_id " + inst.instance_id);
    }
    if (corpus && it->second.span &&
        it->second.span->end >
            corpus->document(inst.context_doc_id).tokens.size()) {
      throw Error("prediction for " + inst.instance_id +
                  " lies outside its context");
    }
    InstanceScore s = score_instance(inst, it->second);
    report.token.precision += s.f1.precision;
    report.token.recall += s.f1.recall;
    report.token.f1 += s.f1.f1;
    report.exact_match += s.exact ? 1.0 : 0.0;
    if (!s.predicted) ++report.empty_predictions;
    report.instances.push_back(std::move(s));
    if (is_coref(inst.task)) coref_instances.push_back(inst);
  }
  const double n = static_cast<double>(report.size);
  report.token.precision /= n;
  report.token.recall /= n;
  report.token.f1 /= n;
  report.exact_match /= n;

  if (!coref_instances.empty()) {
    if (!options.coref_per_document) {
      auto clusters = qa_to_clusters(coref_instances, predictions);
      report.coref = coref_scores(clusters.gold, clusters.pred);
    } else {
      std::map<std::string, std::vector<QAInstance>> by_doc;
      for (const QAInstance& inst : coref_instances) {
        by_doc[inst.context_doc_id].push_back(inst);
      }
      CorefScores mean;
      for (const auto& [doc, group] : by_doc) {
        auto clusters = qa_to_clusters(group, predictions);
        CorefScores s = coref_scores(clusters.gold, clusters.pred);
        for (auto [acc, part] : {std::pair{&mean.muc, &s.muc},
                                 std::pair{&mean.b_cubed, &s.b_cubed},
                                 std::pair{&mean.ceaf_phi4, &s.ceaf_phi4}}) {
          acc->precision += part->precision;
          acc->recall += part->recall;
          acc->f1 += part->f1;
        }
        mean.macro += s.macro;
      }
      const double docs = static_cast<double>(by_doc.size());
      for (Prf* p : {&mean.muc, &mean.b_cubed, &mean.ceaf_phi4}) {
        p->precision /= docs;
        p->recall /= docs;
        p->f1 /= docs;
      }
      mean.macro /= docs;
      report.coref = mean;
    }
  }
  return report;
}

// Scores only the instances whose ids are in `keep`.
inline EvalReport score_subset(const std::vector<QAInstance>& instances,
                               const Predictions& predictions,
                               const std::set<std::string>& keep,
                               const EvalOptions& options = {}) {
  if (keep.empty()) throw Error("score_subset: empty keep set");
  std::set<std::string> ids;
  std::vector<QAInstance> subset;
  for (const QAInstance& inst : instances) {
    ids.insert(inst.instance_id);
    if (keep.count(inst.instance_id)) subset.push_back(inst);
  }
  for (const std::string& id : keep) {
    if (!ids.count(id)) throw Error("keep list names unknown instance " + id);
  }
  Predictions restricted;
  for (const auto& [id, p] : predictions) {
    if (keep.count(id)) restricted.emplace(id, p);
  }
  return evaluate(subset, restricted, options);
}

namespace detail {

inline std::string fmt4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

inline nlohmann::json prf_json(const Prf& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

}  // namespace detail

inline void print_report(const EvalReport& r, std::ostream& out) {
  out << "instances          " << r.size << '\n'
      << "token precision    " << detail::fmt4(r.token.precision) << '\n'
      << "token recall       " << detail::fmt4(r.token.recall) << '\n'
      << "token F1           " << detail::fmt4(r.token.f1) << '\n'
      << "exact match        " << detail::fmt4(r.exact_match) << '\n'
      << "empty predictions  " << r.empty_predictions << '\n';
  if (r.coref) {
    const char* scope = r.coref_per_document ? " (per-document mean)" : "";
    auto line = [&](const char* name, const Prf& p) {
      out << name << "  P " << detail::fmt4(p.precision) << "  R "
          << detail::fmt4(p.recall) << "  F1 " << detail::fmt4(p.f1) << '\n';
    };
    out << "coreference" << scope << '\n';
    line("  MUC     ", r.coref->muc);
    line("  B3      ", r.coref->b_cubed);
    line("  CEAF-e4 ", r.coref->ceaf_phi4);
    out << "  macro F1   " << detail::fmt4(r.coref->macro) << '\n';
  }
}

// One summary record followed by one record per instance.
inline void write_report_records(const EvalReport& r, std::ostream& out) {
  nlohmann::json summary = {{"record", "summary"},
                            {"size", r.size},
                            {"token", detail::prf_json(r.token)},
                            {"exact_match", r.exact_match},
                            {"empty_predictions", r.empty_predictions}};
  if (r.coref) {
    summary["coref"] = {{"muc", detail::prf_json(r.coref->muc)},
                        {"b_cubed", detail::prf_json(r.coref->b_cubed)},
                        {"ceaf_phi4", detail::prf_json(r.coref->ceaf_phi4)},
                        {"macro", r.coref->macro},
                        {"per_document", r.coref_per_document}};
  }
  out << summary.dump() << '\n';
  for (const InstanceScore& s : r.instances) {
    nlohmann::json j = {{"record", "instance"},
                        {"instance_id", s.instance_id},
                        {"task", to_string(s.task)},
                        {"direction", to_string(s.direction)},
                        {"f1", s.f1.f1},
                        {"exact", s.exact}};
    j["span"] = s.predicted
                    ? nlohmann::json::array({s.predicted->start, s.predicted->end})
                    : nlohmann::json(nullptr);
    out << j.dump() << '\n';
  }
}

}  // namespace ellqa
