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

// Error analysis over a prediction set: span edge agreement, antecedent
// direction breakdown and accuracy per referential form.

#pragma once

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ellqa/corpus.hpp"
#include "ellqa/metrics.hpp"
#include "ellqa/predictions.hpp"

namespace ellqa {

struct PeripheryCounts {
  std::size_t left_matches = 0;
  std::size_t right_matches = 0;
  std::size_t exact_matches = 0;
  std::size_t empty_predictions = 0;
  std::size_t total = 0;

  bool operator==(const PeripheryCounts&) const = default;
};

namespace detail {

inline const SpanPrediction& prediction_for(const Predictions& predictions,
                                            const QAInstance& inst) {
  auto it = predictions.find(inst.instance_id);
  if (it == predictions.end()) {
    throw Error("no prediction for instance_id " + inst.instance_id);
  }
  return it->second;
}

}  // namespace detail

// Left (right) match: first (last) predicted token equals the first (last)
// gold token. Gold edges of discontiguous answers are the hull edges.
inline PeripheryCounts periphery_analysis(
    const std::vector<QAInstance>& instances, const Predictions& predictions) {
  PeripheryCounts c;
  for (const QAInstance& inst : instances) {
    const SpanPrediction& p = detail::prediction_for(predictions, inst);
    ++c.total;
    if (!p.span) {
      ++c.empty_predictions;
      continue;
    }
    const TokenSpan gold = hull(inst.gold_answer);
    const bool left = p.span->start == gold.start;
    const bool right = p.span->end == gold.end;
    c.left_matches += left;
    c.right_matches += right;
    c.exact_matches += exact_match(p.tokens(), inst.gold_answer);
  }
  return c;
}

struct DirectionRow {
  Direction direction;
  std::size_t count = 0;
  TokenF1Result f1;  // per-instance means
};

// Rows only for directions that occur, in BACKWARD, FORWARD, SAME_SENTENCE
// order.
inline std::vector<DirectionRow> direction_breakdown(
    const std::vector<QAInstance>& instances, const Predictions& predictions) {
  std::map<Direction, DirectionRow> rows;
  for (const QAInstance& inst : instances) {
    const SpanPrediction& p = detail::prediction_for(predictions, inst);
    DirectionRow& row = rows[inst.antecedent_direction];
    row.direction = inst.antecedent_direction;
    ++row.count;
    const TokenF1Result f = token_f1(p.tokens(), inst.gold_answer);
    row.f1.precision += f.precision;
    row.f1.recall += f.recall;
    row.f1.f1 += f.f1;
  }
  std::vector<DirectionRow> out;
  for (auto& [d, row] : rows) {
    const double n = static_cast<double>(row.count);
    row.f1.precision /= n;
    row.f1.recall /= n;
    row.f1.f1 /= n;
    out.push_back(row);
  }
  return out;
}

inline constexpr const char* kDefiniteForm = "the ...";

struct FormBreakdownRow {
  std::string form;
  std::size_t occurrences = 0;
  std::size_t exact = 0;
  double exact_match_rate = 0.0;

  bool operator==(const FormBreakdownRow&) const = default;
};

// The lowercased text between <ref> and </ref> in a coreference question.
inline std::string marked_mention(const QAInstance& inst) {
  std::string out;
  bool inside = false;
  bool found = false;
  for (const Token& t : inst.question_tokens) {
    if (t.text == kRefOpen) {
      inside = true;
      found = true;
      continue;
    }
    if (t.text == kRefClose) break;
    if (inside) {
      if (!out.empty()) out += ' ';
      out += to_lower(t.text);
    }
  }
  if (!found) {
    throw Error("question of " + inst.instance_id + " has no <ref> mention");
  }
  return out;
}

// Multi-word mentions starting with "the" collapse into one definite
// description group; every other surface form is its own group.
inline std::string referential_form(const std::string& mention) {
  if (mention.rfind("the ", 0) == 0) return kDefiniteForm;
  return mention;
}

inline std::vector<FormBreakdownRow> referential_form_breakdown(
    const std::vector<QAInstance>& instances, const Predictions& predictions,
    std::size_t min_occurrences) {
  std::map<std::string, FormBreakdownRow> groups;
  for (const QAInstance& inst : instances) {
    if (!is_coref(inst.task)) continue;
    const SpanPrediction& p = detail::prediction_for(predictions, inst);
    const std::string form = referential_form(marked_mention(inst));
    FormBreakdownRow& row = groups[form];
    row.form = form;
    ++row.occurrences;
    row.exact += exact_match(p.tokens(), inst.gold_answer);
  }
  std::vector<FormBreakdownRow> out;
  for (auto& [form, row] : groups) {
    if (row.occurrences < min_occurrences) continue;
    row.exact_match_rate =
        static_cast<double>(row.exact) / static_cast<double>(row.occurrences);
    out.push_back(row);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FormBreakdownRow& a, const FormBreakdownRow& b) {
                     return a.occurrences > b.occurrences;
                   });
  return out;
}

struct AnalysisReport {
  PeripheryCounts periphery;
  std::vector<DirectionRow> directions;
  std::vector<FormBreakdownRow> forms;
  std::vector<InstanceScore> instances;
};

inline AnalysisReport analyze(const std::vector<QAInstance>& instances,
                              const Predictions& predictions,
                              std::size_t min_occurrences) {
  AnalysisReport r;
  r.periphery = periphery_analysis(instances, predictions);
  r.directions = direction_breakdown(instances, predictions);
  r.forms = referential_form_breakdown(instances, predictions, min_occurrences);
  for (const QAInstance& inst : instances) {
    r.instances.push_back(
        score_instance(inst, detail::prediction_for(predictions, inst)));
  }
  return r;
}

inline void render_text(const AnalysisReport& r, std::ostream& out) {
  const PeripheryCounts& p = r.periphery;
  out << "== periphery ==\n"
      << "instances          " << p.total << '\n'
      << "left matches       " << p.left_matches << '\n'
      << "right matches      " << p.right_matches << '\n'
      << "exact matches      " << p.exact_matches << '\n'
      << "empty predictions  " << p.empty_predictions << '\n';
  out << "== antecedent direction ==\n";
  if (r.directions.empty()) out << "(no instances)\n";
  for (const DirectionRow& row : r.directions) {
    out << std::left << std::setw(14) << to_string(row.direction) << std::right
        << std::setw(7) << row.count << "  F1 " << detail::fmt4(row.f1.f1)
        << '\n';
  }
  out << "== referential forms ==\n";
  if (r.forms.empty()) out << "(no rows)\n";
  for (const FormBreakdownRow& row : r.forms) {
    out << std::left << std::setw(20) << row.form << std::right << std::setw(7)
        << row.occurrences << "  exact " << detail::fmt4(row.exact_match_rate)
        << '\n';
  }
}

inline void render_records(const AnalysisReport& r, std::ostream& out) {
  const PeripheryCounts& p = r.periphery;
  out << nlohmann::json{{"record", "periphery"},
                        {"total", p.total},
                        {"left_matches", p.left_matches},
                        {"right_matches", p.right_matches},
                        {"exact_matches", p.exact_matches},
                        {"empty_predictions", p.empty_predictions}}
             .dump()
      << '\n';
  for (const DirectionRow& row : r.directions) {
    out << nlohmann::json{{"record", "direction"},
                          {"direction", to_string(row.direction)},
                          {"count", row.count},
                          {"token", detail::prf_json(row.f1)}}
               .dump()
        << '\n';
  }
  for (const FormBreakdownRow& row : r.forms) {
    out << nlohmann::json{{"record", "form"},
                          {"form", row.form},
                          {"occurrences", row.occurrences},
                          {"exact", row.exact},
                          {"exact_match_rate", row.exact_match_rate}}
               .dump()
        << '\n';
  }
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

// Bar (exact-match rate) plus dot (occurrences) chart of the form table as a
// standalone SVG image.
inline void render_form_plot(const std::vector<FormBreakdownRow>& rows,
                             std::ostream& out) {
  const int bar = 36;
  const int left = 60, top = 30, height = 240;
  const int width = left + bar * static_cast<int>(std::max<std::size_t>(rows.size(), 1)) + 60;
  std::size_t max_occ = 1;
  for (const auto& r : rows) max_occ = std::max(max_occ, r.occurrences);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << top + height + 110 << "\">\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + height << "\" x2=\""
      << width - 40 << "\" y2=\"" << top + height
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"4\" y=\"" << top - 10
      << "\" font-size=\"11\">exact match % (bars), occurrences (dots, max "
      << max_occ << ")</text>\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const int x = left + bar * static_cast<int>(i);
    const int h = static_cast<int>(r.exact_match_rate * height + 0.5);
    const int dot_y =
        top + height -
        static_cast<int>(static_cast<double>(r.occurrences) /
                             static_cast<double>(max_occ) * height + 0.5);
    out << "<rect x=\"" << x + 4 << "\" y=\"" << top + height - h
        << "\" width=\"" << bar - 8 << "\" height=\"" << h
        << "\" fill=\"steelblue\"/>\n";
    out << "<circle cx=\"" << x + bar / 2 << "\" cy=\"" << dot_y
        << "\" r=\"4\" fill=\"darkorange\"/>\n";
    std::string label;
    for (char c : r.form) {
      if (c == '<') label += "&lt;";
      else if (c == '>') label += "&gt;";
      else if (c == '&') label += "&amp;";
      else if (c == '"') label += "&quot;";
      else label += c;
    }
    out << "<text x=\"" << x + bar / 2 << "\" y=\"" << top + height + 12
        << "\" font-size=\"10\" transform=\"rotate(60 " << x + bar / 2 << ","
        << top + height + 12 << ")\">" << label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace ellqa
