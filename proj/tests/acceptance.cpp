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

// Release checks. Prints one PASS/FAIL line per criterion and exits nonzero
// if any fails.
//
//   acceptance [--corpora DIR]
//
// DIR (or $ELLQA_CORPORA) holds unified corpus directories converted from the
// licensed sources: sluice/, vpe/, wikicoref/, squad/. Without it the
// conversion check runs on the bundled fixtures.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "ellqa/ellqa.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace {

using namespace ellqa;
using Clock = std::chrono::steady_clock;

const fs::path kFixtures = ELLQA_FIXTURES;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Thrown by checks; the message becomes the FAIL detail.
struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

std::string str(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// 1. conversion counts

using Counts = std::map<std::pair<Task, Split>, std::size_t>;

Counts count_of(const std::vector<QAInstance>& instances) {
  Counts c;
  for (const QAInstance& i : instances) ++c[{i.task, i.split}];
  return c;
}

void expect_count(const Counts& c, Task t, Split s, double want, double tol,
                  const std::string& label) {
  auto it = c.find({t, s});
  const double got = it == c.end() ? 0.0 : static_cast<double>(it->second);
  require(std::fabs(got - want) <= tol,
          label + " " + to_string(s) + ": got " + str(got) + ", want " + str(want) +
              (tol > 0 ? " +- " + str(tol) : ""));
}

std::string check_real_corpora(const fs::path& root) {
  std::string detail;
  int checked = 0;
  auto source = [&](const std::string& name,
                    const std::function<void(const Counts&)>& check) {
    const fs::path dir = root / name;
    if (!fs::exists(dir / kInstancesFile)) {
      detail += " " + name + ":SKIP";
      return;
    }
    check(count_of(load_corpus(dir).instances));
    detail += " " + name + ":ok";
    ++checked;
  };
  source("sluice", [](const Counts& c) {
    expect_count(c, Task::kSluice, Split::kTrain, 1400, 5, "sluice");
    expect_count(c, Task::kSluice, Split::kDev, 480, 0, "sluice");
    expect_count(c, Task::kSluice, Split::kTest, 992, 0, "sluice");
  });
  source("vpe", [](const Counts& c) {
    expect_count(c, Task::kVpe, Split::kTrain, 264, 0, "vpe");
    expect_count(c, Task::kVpe, Split::kDev, 20, 0, "vpe");
    expect_count(c, Task::kVpe, Split::kTest, 78, 0, "vpe");
  });
  source("wikicoref", [](const Counts& c) {
    expect_count(c, Task::kCorefWikiCoref, Split::kTrain, 5600, 56, "wikicoref");
    expect_count(c, Task::kCorefWikiCoref, Split::kDev, 630, 0, "wikicoref");
    expect_count(c, Task::kCorefWikiCoref, Split::kTest, 638, 0, "wikicoref");
  });
  source("squad", [](const Counts& c) {
    expect_count(c, Task::kSquad, Split::kTrain, 87600, 87600 * 0.005, "squad");
    expect_count(c, Task::kSquad, Split::kDev, 10600, 10600 * 0.005, "squad");
  });
  require(checked > 0, "no converted corpora under " + root.string());
  return "real corpora" + detail;
}

std::string check_fixture_conversion() {
  auto convert = [](SourceFormat f, std::vector<fs::path> inputs,
                    std::optional<Split> split = std::nullopt,
                    fs::path documents = {}) {
    ConvertOptions o;
    o.format = f;
    o.inputs = std::move(inputs);
    o.split = split;
    o.documents = std::move(documents);
    return convert_sources(o);
  };
  {
    auto r = convert(SourceFormat::kSluice, {kFixtures / "sluice_mini.tsv"});
    auto c = count_of(r.instances);
    require(r.input_records == 7 && r.dropped() == 2, "sluice_mini records/drops");
    expect_count(c, Task::kSluice, Split::kTrain, 3, 0, "sluice_mini");
    expect_count(c, Task::kSluice, Split::kDev, 1, 0, "sluice_mini");
    expect_count(c, Task::kSluice, Split::kTest, 1, 0, "sluice_mini");
  }
  {
    auto r = convert(SourceFormat::kVpe, {kFixtures / "vpe_mini.tsv"}, std::nullopt,
                     kFixtures / "wsj_mini.txt");
    auto c = count_of(r.instances);
    expect_count(c, Task::kVpe, Split::kTrain, 1, 0, "vpe_mini");
    expect_count(c, Task::kVpe, Split::kDev, 1, 0, "vpe_mini");
    expect_count(c, Task::kVpe, Split::kTest, 2, 0, "vpe_mini");
  }
  {
    auto r = convert(SourceFormat::kConll, {kFixtures / "conll_mini.conll"}, Split::kTest);
    expect_count(count_of(r.instances), Task::kCorefOntoNotes, Split::kTest, 3, 0,
                 "conll_mini");
    require(r.documents.size() == 1, "conll_mini documents");
  }
  {
    auto r = convert(SourceFormat::kSquad, {kFixtures / "squad_mini.json"}, Split::kTrain);
    require(r.input_records == 4 && r.dropped() == 2, "squad_mini records/drops");
    expect_count(count_of(r.instances), Task::kSquad, Split::kTrain, 2, 0, "squad_mini");
  }
  {
    auto r = convert(SourceFormat::kSluice, {kFixtures / "ellipsis_sluice.tsv"});
    auto c = count_of(r.instances);
    require(r.input_records == 160 && r.dropped() == 4, "ellipsis_sluice drops");
    expect_count(c, Task::kSluice, Split::kTrain, 112, 0, "ellipsis_sluice");
    expect_count(c, Task::kSluice, Split::kDev, 16, 0, "ellipsis_sluice");
    expect_count(c, Task::kSluice, Split::kTest, 28, 0, "ellipsis_sluice");
  }
  {
    auto r = convert(SourceFormat::kVpe, {kFixtures / "ellipsis_vpe.tsv"}, std::nullopt,
                     kFixtures / "ellipsis_wsj.txt");
    auto c = count_of(r.instances);
    expect_count(c, Task::kVpe, Split::kTrain, 70, 0, "ellipsis_vpe");
    expect_count(c, Task::kVpe, Split::kDev, 10, 0, "ellipsis_vpe");
    expect_count(c, Task::kVpe, Split::kTest, 20, 0, "ellipsis_vpe");
  }
  return "fixtures in all four source formats";
}

std::string ac1(const std::string& corpora) {
  const auto t0 = Clock::now();
  std::string detail =
      corpora.empty() ? check_fixture_conversion() : check_real_corpora(corpora);
  const double s = seconds_since(t0);
  require(s < 300, "took " + str(s) + " s");
  return detail + ", " + str(s) + " s";
}

// ---------------------------------------------------------------------------
// 2. metrics vs brute force

std::string ac2() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  auto close = [](double a, double b) { return std::fabs(a - b) <= 1e-9; };
  auto same = [&](const Prf& a, const oracle::Scores& b) {
    return close(a.precision, b.p) && close(a.recall, b.r) && close(a.f1, b.f);
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    Clustering gold = oracle::random_clustering(rng, n);
    Clustering pred = oracle::random_clustering(rng, n);
    if (gold.empty()) gold = {{"m0"}};
    const std::string at = "trial " + std::to_string(trial);
    require(same(muc(gold, pred), oracle::muc(gold, pred)), "MUC " + at);
    require(same(b_cubed(gold, pred), oracle::b_cubed(gold, pred)), "B3 " + at);
    require(same(ceaf_phi4(gold, pred), oracle::ceaf_phi4(gold, pred)), "CEAF " + at);
  }
  for (int trial = 0; trial < 1000; ++trial) {
    TokenSet pred, gold;
    for (std::size_t i = 0; i < 30; ++i) {
      if (rng.below(3) == 0) pred.insert(i);
      if (rng.below(3) == 0) gold.insert(i);
    }
    if (gold.empty()) gold.insert(rng.below(30));
    require(same(token_f1(pred, gold), oracle::token_f1(pred, gold)),
            "token F1 trial " + std::to_string(trial));
  }
  const double s = seconds_since(t0);
  require(s < 60, "took " + str(s) + " s");
  return "1000 clusterings, 1000 span pairs, " + str(s) + " s";
}

// ---------------------------------------------------------------------------
// 3. worked examples

std::string ac3() {
  const double two_thirds = 2.0 / 3.0;
  auto eq = [](double a, double b) { return a == b; };
  Prf m = muc({{"a", "b", "c"}}, {{"a", "b"}, {"c"}});
  require(eq(m.recall, 0.5) && eq(m.precision, 1.0) && eq(m.f1, two_thirds), "MUC");
  Prf b1 = b_cubed({{"a", "b"}}, {{"a"}, {"b"}});
  require(eq(b1.recall, 0.5) && eq(b1.precision, 1.0) && eq(b1.f1, two_thirds),
          "B3 split");
  Prf b2 = b_cubed({{"a"}, {"b"}}, {{"a", "b"}});
  require(eq(b2.recall, 1.0) && eq(b2.precision, 0.5) && eq(b2.f1, two_thirds),
          "B3 merge");
  Prf c = ceaf_phi4({{"a", "b"}}, {{"a"}});
  require(eq(c.precision, two_thirds) && eq(c.recall, two_thirds) && eq(c.f1, two_thirds),
          "CEAF");
  TokenF1Result t = token_f1({1, 2, 3}, {2, 3});
  require(eq(t.recall, 1.0) && std::fabs(t.f1 - 0.8) <= 1e-15, "token F1");
  return "MUC 2/3, B3 2/3 both ways, CEAF 2/3, token F1 0.8";
}

// ---------------------------------------------------------------------------
// 4. decoder vs exhaustive argmax

std::string ac4() {
  Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto L = static_cast<Eigen::Index>(1 + rng.below(30));
    model::SpanScores s{model::Vector(L + 1), model::Vector(L + 1)};
    const bool coarse = rng.below(2);
    for (Eigen::Index i = 0; i <= L; ++i) {
      s.start(i) = coarse ? double(rng.below(4)) : rng.uniform(-3, 3);
      s.end(i) = coarse ? double(rng.below(4)) : rng.uniform(-3, 3);
    }
    const std::size_t max_len = 1 + rng.below(static_cast<std::uint64_t>(L) + 2);
    SpanPrediction got = model::decode(s, max_len);
    oracle::DecodeAnswer want = oracle::decode(s, max_len);
    const std::string at = "trial " + std::to_string(trial);
    require(got.empty() == want.empty, "null choice, " + at);
    require(got.score == want.score, "score, " + at);
    if (!want.empty) {
      require(got.span->start == want.start && got.span->end == want.end, "span, " + at);
    }
  }
  return "1000 score vectors, L <= 30";
}

// ---------------------------------------------------------------------------
// 5. gradient check

double relative_gradient_error(int layers) {
  model::Vocabulary vocab;
  for (const char* w : {"john", "ate", "pie", "mary", "did", "too", "."}) vocab.add(w);
  Document d1 = make_document("a", "John ate pie . Mary did too .");
  Document d2 = make_document("b", "Mary ate . John did too");
  auto q1 = tokenize("Mary did too .");
  auto q2 = tokenize("John did");
  auto e1 = model::make_example(vocab, d1, model::match_features(d1, q1), q1,
                                {0, d1.tokens.size()});
  e1.target_start = 1;
  e1.target_end = 2;
  auto e2 = model::make_example(vocab, d2, model::match_features(d2, q2), q2,
                                {0, d2.tokens.size()});
  e2.target_start = 1;
  e2.target_end = 1;
  const std::vector<model::Example> examples = {e1, e2};

  model::EncoderConfig c;
  c.embedding_dim = 8;
  c.hidden_dim = 8;
  c.num_encoder_layers = layers;
  c.dropout_rate = 0.0;
  c.zero_init_output = false;
  model::SpanReader r(c, vocab);
  r.initialize(17);
  auto loss = [&](bool backprop) {
    double sum = 0.0;
    for (const auto& ex : examples) sum += r.loss(ex, backprop, nullptr);
    return sum;
  };
  r.params().zero_grad();
  loss(true);
  const double h = 1e-5;
  double worst = 0.0;
  Rng pick(5);
  for (model::Param& p : r.params()) {
    const model::Matrix analytic = p.grad;
    double diff = 0.0, norm = 0.0;
    const Eigen::Index n = p.value.size();
    const Eigen::Index checks = std::min<Eigen::Index>(n, 60);
    for (Eigen::Index k = 0; k < checks; ++k) {
      const Eigen::Index idx = checks == n
                                   ? k
                                   : static_cast<Eigen::Index>(
                                         pick.below(static_cast<std::uint64_t>(n)));
      double& x = p.value.data()[idx];
      const double saved = x;
      x = saved + h;
      const double up = loss(false);
      x = saved - h;
      const double down = loss(false);
      x = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic.data()[idx];
      diff += (a - numeric) * (a - numeric);
      norm += std::max(a * a, numeric * numeric);
    }
    worst = std::max(worst, norm > 1e-20 ? std::sqrt(diff / norm) : std::sqrt(diff));
  }
  return worst;
}

std::string ac5() {
  const auto t0 = Clock::now();
  const double e1 = relative_gradient_error(1);
  const double e2 = relative_gradient_error(2);
  const double s = seconds_since(t0);
  require(e1 <= 1e-3 && e2 <= 1e-3,
          "relative error " + str(e1) + " / " + str(e2));
  require(s < 120, "took " + str(s) + " s");
  return "max relative error " + str(std::max(e1, e2)) + ", " + str(s) + " s";
}

// ---------------------------------------------------------------------------
// 6. overfit

std::string ac6() {
  const auto t0 = Clock::now();
  const Corpus corpus = testing::memorization_set(50, 6);
  JointDataset mixture;
  mixture.instances = corpus.instances;
  mixture.provenance[Task::kVpe] = corpus.instances.size();
  model::EncoderConfig config;  // default desk-scale encoder
  config.dropout_rate = 0.0;
  model::TrainerSettings s;
  s.epochs = 200;
  s.seed = 1;
  s.batch_size = 10;
  s.learning_rate = 3e-3;
  s.target_dev_f1 = 0.99;
  model::TrainResult r = model::train(mixture, corpus.instances, corpus, config, s);
  const double secs = seconds_since(t0);
  for (std::size_t k = 1; k < r.log.size(); ++k) {
    require(r.log[k].best_train_loss <= r.log[k - 1].best_train_loss,
            "best-so-far loss rose at epoch " + std::to_string(r.log[k].epoch));
  }
  // Score the kept checkpoint on the training set itself.
  const Predictions p = model::predict(r.best, corpus.instances, corpus);
  const EvalReport rep = evaluate(corpus.instances, p);
  require(rep.token.f1 >= 0.99, "token F1 " + str(rep.token.f1) + " after " +
                                    std::to_string(r.log.size()) + " epochs");
  require(secs < 300, "took " + str(secs) + " s");
  return "token F1 " + str(rep.token.f1) + " at epoch " + std::to_string(r.best.epoch) +
         ", " + str(secs) + " s";
}

// ---------------------------------------------------------------------------
// 7. sampler law

std::string fingerprint(const JointDataset& d) {
  std::ostringstream s;
  for (const QAInstance& i : d.instances) s << to_json(i).dump() << '\n';
  return s.str();
}

std::string ac7() {
  static const Document doc = make_document("d", "a b c");
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Task> tasks(std::begin(kAllTasks), std::end(kAllTasks));
    rng.shuffle(tasks);
    SamplingPlan plan;
    plan.main_task = tasks[0];
    plan.seed = rng.below(1000);
    for (std::size_t k = 1; k < tasks.size(); ++k) {
      if (rng.below(2)) plan.auxiliary_tasks.push_back(tasks[k]);
    }
    TaskPools pools;
    for (Task t : tasks) {
      const std::size_t n = 1 + rng.below(60);
      for (std::size_t i = 0; i < n; ++i) {
        auto inst = QAInstance{};
        inst.instance_id = to_string(t) + "-" + std::to_string(i);
        inst.task = t;
        inst.split = Split::kTrain;
        inst.context_doc_id = doc.doc_id;
        inst.question_text = "q";
        inst.question_tokens = tokenize("q");
        inst.gold_answer = {0};
        inst.gold_contiguous = TokenSpan{0, 1};
        pools[t].push_back(inst);
      }
    }
    const std::string at = "trial " + std::to_string(trial);
    const JointDataset a = build_mixture(plan, pools);
    const JointDataset b = build_mixture(plan, pools);
    const std::size_t main_n = pools[plan.main_task].size();
    std::size_t want = main_n;
    for (Task t : plan.auxiliary_tasks) want += std::min(pools[t].size(), main_n);
    require(a.instances.size() == want, "size law, " + at);
    std::set<std::string> ids;
    std::size_t main_seen = 0;
    for (const QAInstance& i : a.instances) {
      require(ids.insert(i.instance_id).second, "duplicate " + i.instance_id + ", " + at);
      main_seen += i.task == plan.main_task;
    }
    for (const QAInstance& i : pools[plan.main_task]) {
      require(ids.count(i.instance_id) > 0, "main instance missing, " + at);
    }
    require(main_seen == main_n, "main count, " + at);
    require(fingerprint(a) == fingerprint(b), "seed determinism, " + at);
  }
  return "200 random plans";
}

// ---------------------------------------------------------------------------
// 8. external predictions; joint vs single non-regression

Corpus ellipsis_corpus() {
  ConvertOptions o;
  o.format = SourceFormat::kSluice;
  o.inputs = {kFixtures / "ellipsis_sluice.tsv"};
  ConversionResult r = convert_sources(o);
  o.format = SourceFormat::kVpe;
  o.inputs = {kFixtures / "ellipsis_vpe.tsv"};
  o.documents = kFixtures / "ellipsis_wsj.txt";
  r.append(convert_sources(o));
  Corpus c;
  c.instances = std::move(r.instances);
  c.documents = std::move(r.documents);
  std::sort(c.documents.begin(), c.documents.end(),
            [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
  return c;
}

std::string ac8a(const Corpus& corpus) {
  const auto test = select(corpus.instances, {Split::kTest, Task::kVpe});
  Rng rng(8);
  Predictions external;
  for (const QAInstance& inst : test) {
    const std::size_t n = corpus.document(inst.context_doc_id).tokens.size();
    if (rng.below(5) == 0) {
      external[inst.instance_id] = {std::nullopt, 0.0};
    } else {
      const std::size_t a = rng.below(n);
      external[inst.instance_id] = {TokenSpan{a, a + 1 + rng.below(n - a)}, 0.0};
    }
  }
  std::stringstream file;
  write_predictions(external, file);
  const std::string bytes = file.str();
  std::string first;
  for (int k = 0; k < 3; ++k) {
    std::istringstream in(bytes);
    std::ostringstream report;
    print_report(evaluate(test, read_predictions(in), {}, &corpus), report);
    if (k == 0) first = report.str();
    require(report.str() == first, "report differs between runs");
  }
  return "external file scored identically 3 times";
}

std::string ac8b(const Corpus& corpus) {
  const auto dev = select(corpus.instances, {Split::kDev, Task::kVpe});
  const auto test = select(corpus.instances, {Split::kTest, Task::kVpe});
  const TaskPools pools = train_pools(corpus.instances);
  model::EncoderConfig config;
  config.embedding_dim = 32;
  config.hidden_dim = 32;
  config.num_encoder_layers = 1;
  config.dropout_rate = 0.1;
  model::TrainerSettings s;
  s.epochs = 15;
  s.learning_rate = 3e-3;
  s.batch_size = 16;
  auto test_f1 = [&](const SamplingPlan& plan) {
    const JointDataset mix = build_mixture(plan, pools);
    double sum = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
      s.seed = seed;
      const model::TrainResult r = model::train(mix, dev, corpus, config, s);
      sum += evaluate(test, model::predict(r.best, test, corpus)).token.f1;
    }
    return sum / 3.0;
  };
  const double single = test_f1({Task::kVpe, {}, 0, false});
  const double joint = test_f1({Task::kVpe, {Task::kSluice}, 0, false});
  const double delta = 100.0 * (joint - single);
  require(delta >= -1.0, "VPE-only " + str(100 * single) + ", VPE+Sluice " +
                             str(100 * joint) + " F1");
  return "VPE test F1: VPE-only " + str(100 * single) + ", VPE+Sluice " +
         str(100 * joint) + " (delta " + str(delta) + ")";
}

std::string ac8() {
  const Corpus corpus = ellipsis_corpus();
  return ac8a(corpus) + "; " + ac8b(corpus);
}

// ---------------------------------------------------------------------------
// 9. analysis invariants

void check_analysis(const std::vector<QAInstance>& instances, const Predictions& preds,
                    const std::string& label) {
  const AnalysisReport r = analyze(instances, preds, 1);
  const PeripheryCounts& p = r.periphery;
  require(p.exact_matches <= std::min(p.left_matches, p.right_matches),
          label + ": exact > min(left, right)");
  require(p.total == instances.size(), label + ": periphery total");
  std::size_t rows = 0;
  for (const DirectionRow& d : r.directions) rows += d.count;
  require(rows == instances.size(), label + ": direction rows do not sum to total");

  // Recount forms from the raw JSONL records.
  std::ostringstream records;
  render_records(r, records);
  std::map<std::string, std::pair<std::size_t, std::size_t>> raw;  // form -> occ, exact
  std::map<std::string, double> reported;
  std::map<std::string, bool> exact_by_id;
  std::istringstream in(records.str());
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const std::string kind = j.at("record");
    if (kind == "form") reported[j.at("form")] = j.at("exact_match_rate");
    if (kind == "instance") exact_by_id[j.at("instance_id")] = j.at("exact");
  }
  for (const QAInstance& inst : instances) {
    if (!is_coref(inst.task)) continue;
    auto& [occ, exact] = raw[referential_form(marked_mention(inst))];
    ++occ;
    exact += exact_by_id.at(inst.instance_id);
  }
  require(raw.size() == reported.size(), label + ": form rows");
  for (const auto& [form, counts] : raw) {
    const double rate =
        static_cast<double>(counts.second) / static_cast<double>(counts.first);
    require(reported.count(form) && reported[form] == rate,
            label + ": rate for '" + form + "'");
  }
}

std::string ac9() {
  Corpus corpus = ellipsis_corpus();
  {
    ConvertOptions o;
    o.format = SourceFormat::kConll;
    o.split = Split::kTest;
    o.inputs = {kFixtures / "conll_mini.conll"};
    ConversionResult r = convert_sources(o);
    corpus.instances.insert(corpus.instances.end(), r.instances.begin(),
                            r.instances.end());
    corpus.documents.insert(corpus.documents.end(), r.documents.begin(),
                            r.documents.end());
    std::sort(corpus.documents.begin(), corpus.documents.end(),
              [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
  }
  const auto& all = corpus.instances;

  Predictions baseline, gold;
  for (const QAInstance& inst : all) {
    baseline[inst.instance_id] =
        model::baseline_previous_sentence(inst, corpus.document(inst.context_doc_id));
    gold[inst.instance_id] = {hull(inst.gold_answer), 0.0};
  }
  check_analysis(all, baseline, "baseline predictions");
  check_analysis(all, gold, "gold predictions");

  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    Predictions p;
    for (const QAInstance& inst : all) {
      const TokenSpan g = hull(inst.gold_answer);
      const std::size_t n = corpus.document(inst.context_doc_id).tokens.size();
      switch (rng.below(4)) {
        case 0: p[inst.instance_id] = {std::nullopt, 0.0}; break;
        case 1: p[inst.instance_id] = {g, 0.0}; break;
        case 2: {  // jitter the gold edges
          const std::size_t a = g.start > 0 && rng.below(2) ? g.start - 1 : g.start;
          const std::size_t b = g.end < n && rng.below(2) ? g.end + 1 : g.end;
          p[inst.instance_id] = {TokenSpan{a, b}, 0.0};
          break;
        }
        default: {
          const std::size_t a = rng.below(n);
          p[inst.instance_id] = {TokenSpan{a, a + 1 + rng.below(n - a)}, 0.0};
        }
      }
    }
    check_analysis(all, p, "random set " + std::to_string(trial));
  }
  return "fixtures (" + std::to_string(all.size()) + " instances) + 100 random sets";
}

}  // namespace

int main(int argc, char** argv) {
  std::string corpora;
  if (const char* env = std::getenv("ELLQA_CORPORA")) corpora = env;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--corpora" && i + 1 < argc) {
      corpora = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--corpora DIR]\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<std::string()>>> checks = {
      {"conversion counts", [&] { return ac1(corpora); }},
      {"metric oracle equivalence", ac2},
      {"worked examples", ac3},
      {"decoder equivalence", ac4},
      {"gradient check", ac5},
      {"overfit", ac6},
      {"sampler law", ac7},
      {"external scoring and joint non-regression", ac8},
      {"analysis invariants", ac9},
  };
  int failed = 0;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    std::string verdict, detail;
    try {
      detail = checks[k].second();
      verdict = "PASS";
    } catch (const Failure& f) {
      verdict = "FAIL";
      detail = f.what;
    } catch (const std::exception& e) {
      verdict = "FAIL";
      detail = std::string("error: ") + e.what();
    }
    failed += verdict == "FAIL";
    std::cout << verdict << " " << (k + 1) << " " << checks[k].first << ": " << detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
