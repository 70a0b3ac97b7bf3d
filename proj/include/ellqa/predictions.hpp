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

// Prediction file: one JSON object per line,
//
//   {"instance_id": "...", "span": [start, end] | null, "score": x}
//
// span is a half-open context token range; null is the empty prediction.
// Any system can produce this file for scoring.

#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include "ellqa/corpus.hpp"
#include "json.hpp"

namespace ellqa {

struct SpanPrediction {
  std::optional<TokenSpan> span;  // nullopt is EMPTY
  double score = 0.0;

  bool empty() const { return !span.has_value(); }
  TokenSet tokens() const { return span ? span_tokens(*span) : TokenSet{}; }

  bool operator==(const SpanPrediction&) const = default;
};

using Predictions = std::map<std::string, SpanPrediction>;

inline void write_predictions(const Predictions& predictions,
                              std::ostream& out) {
  for (const auto& [id, p] : predictions) {
    nlohmann::json j;
    j["instance_id"] = id;
    j["span"] = p.span ? nlohmann::json::array({p.span->start, p.span->end})
                       : nlohmann::json(nullptr);
    j["score"] = p.score;
    out << j.dump() << '\n';
  }
}

inline Predictions read_predictions(std::istream& in) {
  Predictions out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "predictions line " + std::to_string(line_no);
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      if (!j.is_object()) throw Error(where + ": record is not an object");
      for (const auto& [k, v] : j.items()) {
        if (k != "instance_id" && k != "span" && k != "score") {
          throw Error(where + ": unknown field '" + k + "'");
        }
      }
      SpanPrediction p;
      const std::string id = j.at("instance_id").get<std::string>();
      const auto& span = j.at("span");
      if (!span.is_null()) {
        auto s = span.at(0).get<std::size_t>();
        auto e = span.at(1).get<std::size_t>();
        if (span.size() != 2 || s >= e) {
          throw Error(where + ": span must be [start, end) with start < end");
        }
        p.span = TokenSpan{s, e};
      }
      p.score = j.value("score", 0.0);
      if (!out.emplace(id, p).second) {
        throw Error(where + ": duplicate instance_id " + id);
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(where + ": " + e.what());
    }
  }
  return out;
}

// Gold answers as a prediction set; useful as a perfect reference system.
template <typename Instances>
Predictions gold_predictions(const Instances& instances) {
  Predictions out;
  for (const QAInstance& inst : instances) {
    out[inst.instance_id] = SpanPrediction{hull(inst.gold_answer), 0.0};
  }
  return out;
}

}  // namespace ellqa
