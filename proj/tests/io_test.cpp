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

#include <sstream>

#include "ellqa/io.hpp"
#include "ellqa/rng.hpp"
#include "test_util.hpp"

namespace ellqa {
namespace {

struct Written {
  std::string instances, documents;
};

Written write(const std::vector<QAInstance>& insts, const std::vector<Document>& docs) {
  std::ostringstream i, d;
  write_instances(insts, docs, i, d);
  return {i.str(), d.str()};
}

Corpus read(const Written& w) {
  std::istringstream i(w.instances), d(w.documents);
  return read_instances(i, d);
}

// Random documents and instances covering every optional field.
Corpus random_corpus(Rng& rng) {
  const std::vector<std::string> words = {"the", "cat", "sat", ".", "Why", "?",
                                          "caf\xc3\xa9", "\"", "don't", "tab\there"};
  Corpus c;
  const auto ndocs = 1 + rng.below(3);
  for (std::uint64_t k = 0; k < ndocs; ++k) {
    std::string text;
    for (std::uint64_t i = 0, n = 1 + rng.below(20); i < n; ++i) {
      text += words[rng.below(words.size())] + (rng.below(4) ? " " : "\n");
    }
    c.documents.push_back(make_document("doc" + std::to_string(k), text));
  }
  const auto ninst = rng.below(6);
  for (std::uint64_t k = 0; k < ninst; ++k) {
    const Document& d = c.documents[rng.below(c.documents.size())];
    QAInstance inst;
    inst.instance_id = "q" + std::to_string(k);
    inst.task = kAllTasks[rng.below(5)];
    inst.split = static_cast<Split>(rng.below(3));
    inst.context_doc_id = d.doc_id;
    inst.question_text = d.span_text(
        d.sentence_bounds[rng.below(d.sentence_bounds.size())]);
    inst.question_tokens = tokenize(inst.question_text);
    const auto n = d.tokens.size();
    for (std::uint64_t i = 0, m = 1 + rng.below(3); i < m; ++i) {
      inst.gold_answer.insert(rng.below(n));
    }
    if (is_contiguous(inst.gold_answer)) inst.gold_contiguous = hull(inst.gold_answer);
    inst.antecedent_direction = static_cast<Direction>(rng.below(3));
    if (rng.below(2)) {
      const auto s = rng.below(n);
      inst.anchor = TokenSpan{s, s + 1 + rng.below(n - s)};
    }
    c.instances.push_back(inst);
  }
  return c;
}

TEST(Io, RoundTripProperty) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    Corpus c = random_corpus(rng);
    Written w = write(c.instances, c.documents);
    Corpus back = read(w);
    ASSERT_EQ(back.documents, c.documents);
    ASSERT_EQ(back.instances.size(), c.instances.size());
    for (const QAInstance& inst : c.instances) {
      auto it = std::find_if(back.instances.begin(), back.instances.end(),
                             [&](const QAInstance& b) {
                               return b.instance_id == inst.instance_id;
                             });
      ASSERT_NE(it, back.instances.end());
      ASSERT_EQ(*it, inst);
    }
    // Writing what was read is byte-identical.
    Written again = write(back.instances, back.documents);
    ASSERT_EQ(again.instances, w.instances);
    ASSERT_EQ(again.documents, w.documents);
  }
}

TEST(Io, SortedOutput) {
  Document d = make_document("d", "a b c");
  auto a = testing::make_instance("b", Task::kVpe, d, {0});
  auto b = testing::make_instance("a", Task::kVpe, d, {1});
  auto c = testing::make_instance("z", Task::kSluice, d, {2});
  b.split = Split::kDev;
  Corpus back = read(write({a, b, c}, {d}));
  ASSERT_EQ(back.instances.size(), 3u);
  EXPECT_EQ(back.instances[0].instance_id, "z");  // SLUICE before VPE
  EXPECT_EQ(back.instances[1].instance_id, "b");  // TRAIN before DEV
  EXPECT_EQ(back.instances[2].instance_id, "a");
}

TEST(Io, RejectsGoldAtTokenCount) {
  Document d = make_document("d", "a b c");
  auto inst = testing::make_instance("i", Task::kVpe, d, {2});
  Written w = write({inst}, {d});
  auto pos = w.instances.find("\"gold_answer\":[2]");
  ASSERT_NE(pos, std::string::npos);
  w.instances.replace(pos, 17, "\"gold_answer\":[3]");
  EXPECT_THROW(read(w), Error);
}

TEST(Io, RejectsDuplicatesAndUnknowns) {
  Document d = make_document("d", "a b c");
  auto inst = testing::make_instance("i", Task::kVpe, d, {0});
  Written w = write({inst}, {d});

  Written dup = w;
  dup.instances += dup.instances;
  EXPECT_THROW(read(dup), Error);

  Written dupdoc = w;
  dupdoc.documents += dupdoc.documents;
  EXPECT_THROW(read(dupdoc), Error);

  Written nodoc = w;
  nodoc.documents.clear();
  EXPECT_THROW(read(nodoc), Error);

  Written extra = w;
  extra.instances.insert(1, "\"bogus\":1,");
  EXPECT_THROW(read(extra), Error);

  Written garbage = w;
  garbage.instances = "{not json\n";
  EXPECT_THROW(read(garbage), Error);

  auto orphan = testing::make_instance("o", Task::kVpe, d, {0});
  orphan.context_doc_id = "missing";
  EXPECT_THROW(write({orphan}, {d}), Error);
  EXPECT_THROW(write({inst}, {d, d}), Error);
}

TEST(Io, ErrorNamesLine) {
  Document d = make_document("d", "a b c");
  auto i1 = testing::make_instance("i1", Task::kVpe, d, {0});
  Written w = write({i1}, {d});
  w.instances += "[]\n";
  try {
    read(w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("instances line 2"), std::string::npos)
        << e.what();
  }
}

TEST(Io, SaveAndLoadDirectory) {
  auto dir = testing::scratch_dir("io");
  Document d = make_document("d", "a b c");
  auto inst = testing::make_instance("i", Task::kSluice, d, {1, 2});
  save_corpus(dir, {inst}, {d});
  Corpus back = load_corpus(dir);
  ASSERT_EQ(back.instances.size(), 1u);
  EXPECT_EQ(back.instances[0], inst);
  EXPECT_EQ(&back.document("d"), &back.documents[0]);
  EXPECT_THROW(back.document("nope"), Error);
  EXPECT_THROW(load_corpus(dir / "absent"), Error);
}

}  // namespace
}  // namespace ellqa
