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


#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "ellqa/analysis.hpp"
#include "ellqa/converters.hpp"
#include "test_util.hpp"

namespace ellqa {
namespace {

// Three coreference questions and one VPE question over small documents.
struct Scenario {
  Document doc = make_document("d", "The old man saw his dog . He smiled at the dog .");
  std::vector<QAInstance> instances;
  Scenario() {
    auto add = [&](const std::string& id, TokenSpan anchor, TokenSet gold,
                   Direction dir) {
      auto inst = testing::make_instance(id, Task::kCorefOntoNotes, doc, gold);
      inst.anchor = anchor;
      inst.antecedent_direction = dir;
      const TokenSpan s = doc.sentence_bounds[doc.sentence_of(anchor.start)];
      std::tie(inst.question_text, inst.question_tokens) =
          sentence_question(doc, s, anchor);
      instances.push_back(inst);
    };
    add("his", {4, 5}, {0, 1, 2}, Direction::kSameSentence);
    add("he", {7, 8}, {0, 1, 2}, Direction::kBackward);
    add("the-dog", {10, 12}, {4, 5}, Direction::kBackward);
    auto vpe = testing::make_instance("vpe", Task::kVpe, doc, {3, 5});
    vpe.antecedent_direction = Direction::kForward;
    instances.push_back(vpe);
  }
};

Predictions scenario_predictions() {
  Predictions p;
  p["his"] = {TokenSpan{1, 3}, 1.0};   // right edge only
  p["he"] = {TokenSpan{0, 3}, 1.0};    // exact
  p["the-dog"] = {std::nullopt, 0.0};  // empty
  p["vpe"] = {TokenSpan{3, 6}, 1.0};   // hull edges match, not exact
  return p;
}

TEST(Periphery, CountsEdges) {
  Scenario s;
  PeripheryCounts c = periphery_analysis(s.instances, scenario_predictions());
  EXPECT_EQ(c.total, 4u);
  EXPECT_EQ(c.empty_predictions, 1u);
  EXPECT_EQ(c.left_matches, 2u);
  EXPECT_EQ(c.right_matches, 3u);
  EXPECT_EQ(c.exact_matches, 1u);
}

TEST(Direction, RowsSumToTotal) {
  Scenario s;
  auto rows = direction_breakdown(s.instances, scenario_predictions());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].direction, Direction::kBackward);
  EXPECT_EQ(rows[0].count, 2u);
  EXPECT_DOUBLE_EQ(rows[0].f1.f1, 0.5);  // exact + empty
  EXPECT_EQ(rows[1].direction, Direction::kForward);
  EXPECT_DOUBLE_EQ(rows[1].f1.f1, 0.8);  // {3,4,5} vs {3,5}
  EXPECT_EQ(rows[2].direction, Direction::kSameSentence);
  EXPECT_DOUBLE_EQ(rows[2].f1.f1, 0.8);  // {1,2} vs {0,1,2}
}

TEST(ReferentialForm, Groups) {
  EXPECT_EQ(referential_form("the dog"), kDefiniteForm);
  EXPECT_EQ(referential_form("the"), "the");
  EXPECT_EQ(referential_form("he"), "he");
  Scenario s;
  EXPECT_EQ(marked_mention(s.instances[2]), "the dog");
  EXPECT_THROW(marked_mention(s.instances[3]), Error);
  auto rows = referential_form_breakdown(s.instances, scenario_predictions(), 1);
  ASSERT_EQ(rows.size(), 3u);  // the VPE question has no mention
  std::map<std::string, FormBreakdownRow> by_form;
  for (const auto& r : rows) by_form[r.form] = r;
  EXPECT_EQ(by_form["he"].exact_match_rate, 1.0);
  EXPECT_EQ(by_form["his"].exact_match_rate, 0.0);
  EXPECT_EQ(by_form[kDefiniteForm].occurrences, 1u);
  EXPECT_TRUE(referential_form_breakdown(s.instances, scenario_predictions(), 2)
                  .empty());
}

TEST(ReferentialForm, SortedByOccurrences) {
  auto in = testing::open_fixture("conll_mini.conll");
  ConversionResult r;
  for (const auto& cd : read_conll(in)) {
    r.append(convert_coref(cd, Task::kCorefOntoNotes, Split::kTest));
  }
  auto rows = referential_form_breakdown(r.instances, gold_predictions(r.instances), 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(rows[i - 1].occurrences, rows[i].occurrences);
  }
  for (const auto& row : rows) EXPECT_EQ(row.exact_match_rate, 1.0);
}

TEST(Render, GoldenText) {
  Scenario s;
  AnalysisReport r = analyze(s.instances, scenario_predictions(), 1);
  std::ostringstream out;
  render_text(r, out);
  std::ifstream golden(testing::fixture("golden/analysis_scenario.txt"));
  ASSERT_TRUE(golden) << "missing golden file";
  std::stringstream expected;
  expected << golden.rdbuf();
  EXPECT_EQ(out.str(), expected.str());
}

TEST(Render, RecordsAndPlot) {
  Scenario s;
  AnalysisReport r = analyze(s.instances, scenario_predictions(), 1);
  std::ostringstream records;
  render_records(r, records);
  std::istringstream lines(records.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("record"));
    ++n;
  }
  EXPECT_EQ(n, 1 + r.directions.size() + r.forms.size() + r.instances.size());
  std::ostringstream svg;
  render_form_plot(r.forms, svg);
  EXPECT_EQ(svg.str().rfind("<svg", 0), 0u);
  EXPECT_NE(svg.str().find("the ..."), std::string::npos);
}

TEST(Analyze, MissingPrediction) {
  Scenario s;
  Predictions p = scenario_predictions();
  p.erase("he");
  EXPECT_THROW(analyze(s.instances, p, 1), Error);
}

}  // namespace
}  // namespace ellqa
