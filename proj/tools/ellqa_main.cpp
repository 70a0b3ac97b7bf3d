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

// ellqa: convert corpora, sample joint training sets, train and apply the
// span reader, and score predictions.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "ellqa/commands.hpp"

namespace {

using ellqa::fs::path;

nlohmann::json plan_argument(const std::string& arg) {
  if (ellqa::fs::is_regular_file(arg)) {
    std::ifstream in(arg);
    try {
      return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ellqa::Error("plan file " + arg + ": " + e.what());
    }
  }
  if (arg.find('.') != std::string::npos || arg.find('/') != std::string::npos) {
    throw ellqa::Error("plan file not found: " + arg);
  }
  return {{"preset", arg}};
}

struct FilterArgs {
  std::string split, task;

  void add(CLI::App* app) {
    app->add_option("--split", split, "TRAIN, DEV or TEST");
    app->add_option("--task", task, "restrict to one task");
  }
  ellqa::InstanceFilter get() const {
    ellqa::InstanceFilter f;
    if (!split.empty()) f.split = ellqa::parse_split(split);
    if (!task.empty()) f.task = ellqa::parse_task(task);
    return f;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ellipsis and coreference resolution as span extraction"};
  app.require_subcommand(1);

  // convert
  auto* convert = app.add_subcommand("convert", "convert a source corpus");
  std::string format, conv_split, conv_task;
  ellqa::ConvertOptions conv;
  std::vector<std::string> conv_inputs;
  std::string conv_docs, conv_out;
  convert->add_option("format", format, "sluice, vpe, conll or squad")->required();
  convert->add_option("-i,--input", conv_inputs, "source file")->required();
  convert->add_option("--documents", conv_docs, "tokenized WSJ text (vpe)");
  convert->add_option("--split", conv_split, "split for conll and squad inputs");
  convert->add_option("--task", conv_task, "COREF_ONTONOTES or COREF_WIKICOREF");
  convert->add_option("-o,--out", conv_out, "output directory")->required();

  // sample
  auto* sample = app.add_subcommand("sample", "draw a joint training mixture");
  std::vector<std::string> sample_data;
  std::string sample_plan, sample_out;
  std::uint64_t sample_epoch = 0;
  sample->add_option("-d,--data", sample_data, "corpus directory")->required();
  sample->add_option("-p,--plan", sample_plan, "preset name or plan JSON file")->required();
  sample->add_option("--epoch", sample_epoch, "resampling epoch");
  sample->add_option("-o,--out", sample_out, "write the mixture here");

  // train
  auto* train = app.add_subcommand("train", "train span readers");
  std::string train_config;
  std::optional<int> train_epochs;
  std::vector<std::uint64_t> train_seeds;
  std::string train_output;
  train->add_option("-c,--config", train_config, "training config JSON")->required();
  train->add_option("--epochs", train_epochs, "override trainer.epochs");
  train->add_option("--seeds", train_seeds, "override seeds");
  train->add_option("--output-dir", train_output, "override output_dir");

  // predict
  auto* predict = app.add_subcommand("predict", "write span predictions");
  std::vector<std::string> pred_data;
  std::string pred_ckpt, pred_baseline, pred_out;
  FilterArgs pred_filter;
  predict->add_option("-d,--data", pred_data, "corpus directory")->required();
  predict->add_option("--checkpoint", pred_ckpt, "trained checkpoint");
  predict->add_option("--baseline", pred_baseline, "previous-sentence");
  predict->add_option("-o,--out", pred_out, "predictions JSONL")->required();
  pred_filter.add(predict);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score predictions");
  std::vector<std::string> eval_data;
  std::string eval_preds, eval_keep, eval_records;
  bool eval_per_doc = false;
  FilterArgs eval_filter;
  evaluate->add_option("-d,--data", eval_data, "corpus directory")->required();
  evaluate->add_option("-p,--predictions", eval_preds, "predictions JSONL")->required();
  evaluate->add_option("--keep", eval_keep, "file of instance ids to score");
  evaluate->add_flag("--per-document", eval_per_doc,
                     "average coreference metrics over documents");
  evaluate->add_option("--records", eval_records, "write JSONL records");
  eval_filter.add(evaluate);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "error analysis of predictions");
  std::vector<std::string> an_data;
  std::string an_preds, an_records, an_plot;
  std::size_t an_min = 1;
  FilterArgs an_filter;
  analyze->add_option("-d,--data", an_data, "corpus directory")->required();
  analyze->add_option("-p,--predictions", an_preds, "predictions JSONL")->required();
  analyze->add_option("--min-occurrences", an_min, "hide rarer referential forms");
  analyze->add_option("--records", an_records, "write JSONL records");
  analyze->add_option("--plot", an_plot, "write an SVG bar chart of forms");
  an_filter.add(analyze);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto paths = [](const std::vector<std::string>& v) {
    return std::vector<path>(v.begin(), v.end());
  };

  try {
    if (*convert) {
      conv.format = ellqa::parse_source_format(format);
      conv.inputs = paths(conv_inputs);
      conv.documents = conv_docs;
      if (!conv_split.empty()) conv.split = ellqa::parse_split(conv_split);
      if (!conv_task.empty()) conv.task = ellqa::parse_task(conv_task);
      conv.out = conv_out;
      ellqa::cmd_convert(conv, std::cout);
    } else if (*sample) {
      ellqa::SampleOptions o;
      o.data = paths(sample_data);
      o.plan = plan_argument(sample_plan);
      o.epoch = sample_epoch;
      o.out = sample_out;
      ellqa::cmd_sample(o, std::cout);
    } else if (*train) {
      ellqa::detail::require_file(train_config);
      std::ifstream in(train_config);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ellqa::Error("config " + train_config + ": " + e.what());
      }
      const path base = path(train_config).parent_path();
      ellqa::TrainConfig c = ellqa::train_config_from_json(j, base);
      if (train_epochs) c.trainer.epochs = *train_epochs;
      if (!train_seeds.empty()) c.seeds = train_seeds;
      if (!train_output.empty()) c.output_dir = train_output;
      ellqa::cmd_train(c, std::cout);
    } else if (*predict) {
      ellqa::PredictOptions o;
      o.data = paths(pred_data);
      o.filter = pred_filter.get();
      o.checkpoint = pred_ckpt;
      o.baseline = pred_baseline;
      o.out = pred_out;
      ellqa::cmd_predict(o, std::cerr);
    } else if (*evaluate) {
      ellqa::EvaluateOptions o;
      o.data = paths(eval_data);
      o.filter = eval_filter.get();
      o.predictions = eval_preds;
      o.keep = eval_keep;
      o.per_document = eval_per_doc;
      o.records = eval_records;
      ellqa::cmd_evaluate(o, std::cout);
    } else if (*analyze) {
      ellqa::AnalyzeOptions o;
      o.data = paths(an_data);
      o.filter = an_filter.get();
      o.predictions = an_preds;
      o.min_occurrences = an_min;
      o.records = an_records;
      o.plot = an_plot;
      ellqa::cmd_analyze(o, std::cout);
    }
  } catch (const ellqa::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
