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

// Command implementations behind the ellqa tool. Each command reads its
// inputs completely, validates them, and only then writes outputs. Failures
// are reported by throwing Error.

#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ellqa/analysis.hpp"
#include "ellqa/converters.hpp"
#include "ellqa/io.hpp"
#include "ellqa/metrics.hpp"
#include "ellqa/model/trainer.hpp"
#include "ellqa/predictions.hpp"
#include "ellqa/sampler.hpp"

namespace ellqa {

namespace fs = std::filesystem;

namespace detail {

inline void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw Error("input not found: " + p.string());
}

inline std::ifstream open_in(const fs::path& p) {
  require_file(p);
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  return in;
}

// Writes through a temporary sibling so a failed write leaves no file.
template <typename Fn>
void write_file(const fs::path& p, Fn&& fill) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    fill(out);
    if (!out) throw Error("write failed for " + p.string());
  }
  fs::rename(tmp, p);
}

}  // namespace detail

// Loads and merges corpus directories. Shared documents must agree; instance
// ids must be unique across directories.
inline Corpus load_corpora(const std::vector<fs::path>& dirs) {
  if (dirs.empty()) throw Error("no data directory given");
  ConversionResult merged;
  std::set<std::string> ids;
  for (const fs::path& dir : dirs) {
    Corpus c = load_corpus(dir);
    for (QAInstance& inst : c.instances) {
      if (!ids.insert(inst.instance_id).second) {
        throw Error("instance_id " + inst.instance_id + " appears in more than "
                    "one data directory");
      }
      merged.instances.push_back(std::move(inst));
    }
    for (Document& d : c.documents) merged.add_document(std::move(d));
  }
  Corpus out;
  out.instances = std::move(merged.instances);
  out.documents = std::move(merged.documents);
  std::sort(out.documents.begin(), out.documents.end(),
            [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
  return out;
}

struct InstanceFilter {
  std::optional<Split> split;
  std::optional<Task> task;
};

inline std::vector<QAInstance> select(const std::vector<QAInstance>& instances,
                                      const InstanceFilter& f) {
  std::vector<QAInstance> out;
  for (const QAInstance& inst : instances) {
    if (f.split && inst.split != *f.split) continue;
    if (f.task && inst.task != *f.task) continue;
    out.push_back(inst);
  }
  return out;
}

// ---------------------------------------------------------------------------
// convert

enum class SourceFormat { kSluice, kVpe, kConll, kSquad };

inline SourceFormat parse_source_format(std::string_view s) {
  if (s == "sluice") return SourceFormat::kSluice;
  if (s == "vpe") return SourceFormat::kVpe;
  if (s == "conll") return SourceFormat::kConll;
  if (s == "squad") return SourceFormat::kSquad;
  throw Error("unknown source format '" + std::string(s) +
              "' (expected sluice, vpe, conll or squad)");
}

struct ConvertOptions {
  SourceFormat format = SourceFormat::kSluice;
  std::vector<fs::path> inputs;
  fs::path documents;            // vpe: pre-tokenized WSJ text
  std::optional<Split> split;    // conll, squad
  std::optional<Task> task;      // conll
  fs::path out;
};

inline ConversionResult convert_sources(const ConvertOptions& o) {
  if (o.inputs.empty()) throw Error("convert: no input files");
  for (const fs::path& p : o.inputs) detail::require_file(p);
  ConversionResult result;
  switch (o.format) {
    case SourceFormat::kSluice: {
      std::vector<SluiceRecord> records;
      for (const fs::path& p : o.inputs) {
        auto in = detail::open_in(p);
        auto part = read_sluice_records(in);
        records.insert(records.end(), part.begin(), part.end());
      }
      result = convert_sluice(records);
      break;
    }
    case SourceFormat::kVpe: {
      if (o.documents.empty()) throw Error("convert vpe: --documents is required");
      auto din = detail::open_in(o.documents);
      const auto docs = read_tokenized_documents(din);
      std::vector<VpeRecord> records;
      for (const fs::path& p : o.inputs) {
        auto in = detail::open_in(p);
        auto part = read_vpe_records(in);
        records.insert(records.end(), part.begin(), part.end());
      }
      result = convert_vpe(records, docs);
      break;
    }
    case SourceFormat::kConll: {
      if (!o.split) throw Error("convert conll: --split is required");
      const Task task = o.task.value_or(Task::kCorefOntoNotes);
      if (!is_coref(task)) throw Error("convert conll: --task must be a coreference task");
      for (const fs::path& p : o.inputs) {
        auto in = detail::open_in(p);
        for (const CorefDocument& cd : read_conll(in)) {
          result.append(convert_coref(cd, task, *o.split));
        }
      }
      break;
    }
    case SourceFormat::kSquad: {
      if (!o.split) throw Error("convert squad: --split is required");
      for (const fs::path& p : o.inputs) {
        auto in = detail::open_in(p);
        result.append(convert_squad(in, *o.split));
      }
      break;
    }
  }
  std::set<std::string> ids;
  for (const QAInstance& inst : result.instances) {
    if (!ids.insert(inst.instance_id).second) {
      throw Error("convert: duplicate instance_id " + inst.instance_id);
    }
  }
  return result;
}

// Converts, writes the unified corpus, and prints the statistics table and
// the drop/warning report.
inline ConversionResult cmd_convert(const ConvertOptions& o, std::ostream& out) {
  ConversionResult r = convert_sources(o);
  if (o.out.empty()) throw Error("convert: --out is required");
  std::ostringstream inst_buf, doc_buf;
  write_instances(r.instances, r.documents, inst_buf, doc_buf);
  detail::write_file(o.out / kDocumentsFile, [&](std::ostream& f) { f << doc_buf.str(); });
  detail::write_file(o.out / kInstancesFile, [&](std::ostream& f) { f << inst_buf.str(); });
  print_stats(conversion_stats(r.instances, r.documents), out);
  out << "records " << r.input_records << ", converted " << r.instances.size()
      << ", dropped " << r.dropped() << '\n';
  print_report(r.report, out);
  return r;
}

// ---------------------------------------------------------------------------
// sample

struct SampleOptions {
  std::vector<fs::path> data;
  nlohmann::json plan;
  std::uint64_t epoch = 0;
  fs::path out;
};

inline JointDataset mixture_for(const SamplingPlan& plan, const TaskPools& pools,
                                std::uint64_t epoch) {
  if (epoch == 0 || !plan.resample_each_epoch) {
    if (epoch != 0) throw Error("sample: --epoch needs a resampling plan");
    return build_mixture(plan, pools);
  }
  return resample(plan, pools, epoch);
}

inline void cmd_sample(const SampleOptions& o, std::ostream& out) {
  const SamplingPlan plan = plan_from_json(o.plan);
  const Corpus corpus = load_corpora(o.data);
  const JointDataset mix = mixture_for(plan, train_pools(corpus.instances), o.epoch);
  if (!o.out.empty()) {
    std::set<std::string> used;
    for (const QAInstance& i : mix.instances) used.insert(i.context_doc_id);
    std::vector<Document> docs;
    for (const Document& d : corpus.documents) {
      if (used.count(d.doc_id)) docs.push_back(d);
    }
    std::ostringstream ib, db;
    write_instances(mix.instances, docs, ib, db);
    detail::write_file(o.out / kDocumentsFile, [&](std::ostream& f) { f << db.str(); });
    detail::write_file(o.out / kInstancesFile, [&](std::ostream& f) { f << ib.str(); });
  }
  for (const auto& [task, n] : mix.provenance) {
    out << std::left << std::setw(18) << to_string(task) << std::right
        << std::setw(8) << n << '\n';
  }
  out << std::left << std::setw(18) << "total" << std::right << std::setw(8)
      << mix.instances.size() << '\n';
}

// ---------------------------------------------------------------------------
// train

struct TrainConfig {
  std::vector<fs::path> data;
  SamplingPlan plan;
  model::EncoderConfig encoder;
  model::TrainerSettings trainer;
  std::vector<std::uint64_t> seeds = {0};
  fs::path output_dir;
};

// Relative paths are taken relative to `base` (the config file directory).
inline TrainConfig train_config_from_json(const nlohmann::json& j,
                                          const fs::path& base) {
  static const std::set<std::string> kKeys = {"data", "plan", "encoder",
                                              "trainer", "seeds", "output_dir"};
  if (!j.is_object()) throw Error("train config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) throw Error("train config: unknown field '" + k + "'");
  }
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
  };
  TrainConfig c;
  try {
    if (!j.contains("data")) throw Error("train config: missing 'data'");
    const auto& data = j.at("data");
    if (data.is_string()) {
      c.data.push_back(resolve(data.get<std::string>()));
    } else {
      for (const auto& d : data) c.data.push_back(resolve(d.get<std::string>()));
    }
    if (!j.contains("plan")) throw Error("train config: missing 'plan'");
    c.plan = plan_from_json(j.at("plan"));
    if (j.contains("encoder")) {
      c.encoder = model::encoder_config_from_json(j.at("encoder"));
      if (!c.encoder.pretrained_embeddings.empty()) {
        c.encoder.pretrained_embeddings =
            resolve(c.encoder.pretrained_embeddings).string();
      }
    }
    if (j.contains("trainer")) c.trainer = model::trainer_settings_from_json(j.at("trainer"));
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (!j.contains("output_dir")) throw Error("train config: missing 'output_dir'");
    c.output_dir = resolve(j.at("output_dir").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("train config: ") + e.what());
  }
  return c;
}

inline void validate(const TrainConfig& c) {
  if (c.data.empty()) throw Error("train config: no data directories");
  for (const fs::path& d : c.data) {
    if (!fs::is_directory(d)) throw Error("data directory not found: " + d.string());
  }
  validate(c.plan);
  model::validate(c.encoder);
  if (c.seeds.empty()) throw Error("train config: seeds must not be empty");
  if (!c.encoder.pretrained_embeddings.empty()) {
    detail::require_file(c.encoder.pretrained_embeddings);
  }
}

inline nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json data = nlohmann::json::array();
  for (const fs::path& d : c.data) data.push_back(d.string());
  return {{"data", data},
          {"plan", to_json(c.plan)},
          {"encoder", model::to_json(c.encoder)},
          {"trainer", model::to_json(c.trainer)},
          {"seeds", c.seeds},
          {"output_dir", c.output_dir.string()}};
}

struct TrainSummary {
  std::vector<double> dev_f1;  // best per seed
  double mean_dev_f1 = 0.0;
};

// Trains one model per seed on the plan's mixture. Dev data is the DEV split
// of the main task. Writes, under output_dir:
//   config.resolved.json, seed_<s>/checkpoint.json, seed_<s>/epochs.jsonl,
//   summary.json
inline TrainSummary cmd_train(const TrainConfig& config, std::ostream& out) {
  validate(config);
  const Corpus corpus = load_corpora(config.data);
  const TaskPools pools = train_pools(corpus.instances);
  const JointDataset mixture = build_mixture(config.plan, pools);
  const std::vector<QAInstance> dev =
      select(corpus.instances, {Split::kDev, config.plan.main_task});
  model::MixtureSource resampler;
  if (config.plan.resample_each_epoch) {
    resampler = [&](std::uint64_t epoch) { return resample(config.plan, pools, epoch); };
  }

  fs::create_directories(config.output_dir);
  detail::write_file(config.output_dir / "config.resolved.json",
                     [&](std::ostream& f) { f << to_json(config).dump(2) << '\n'; });
  out << "mixture:";
  for (const auto& [task, n] : mixture.provenance) out << ' ' << to_string(task) << '=' << n;
  out << "; dev " << dev.size() << " instances of " << to_string(config.plan.main_task)
      << '\n';

  TrainSummary summary;
  for (std::uint64_t seed : config.seeds) {
    model::TrainerSettings s = config.trainer;
    s.seed = seed;
    model::TrainResult r = model::train(mixture, dev, corpus, config.encoder, s, resampler);
    const fs::path dir = config.output_dir / ("seed_" + std::to_string(seed));
    detail::write_file(dir / "checkpoint.json",
                       [&](std::ostream& f) { model::save_checkpoint(r.best, f); });
    detail::write_file(dir / "epochs.jsonl", [&](std::ostream& f) {
      for (const model::EpochLog& e : r.log) {
        f << nlohmann::json{{"seed", seed},
                            {"epoch", e.epoch},
                            {"train_loss", e.train_loss},
                            {"best_train_loss", e.best_train_loss},
                            {"dev_f1", e.dev_f1}}
                 .dump()
          << '\n';
      }
    });
    for (const model::SkippedInstance& sk : r.skipped) {
      out << "skipped " << sk.instance_id << ": " << sk.reason << '\n';
    }
    out << "seed " << seed << ": best dev F1 " << detail::fmt4(r.best.dev_f1)
        << " at epoch " << r.best.epoch << " of " << r.log.size() << '\n';
    summary.dev_f1.push_back(r.best.dev_f1);
  }
  for (double f : summary.dev_f1) summary.mean_dev_f1 += f;
  summary.mean_dev_f1 /= static_cast<double>(summary.dev_f1.size());
  detail::write_file(config.output_dir / "summary.json", [&](std::ostream& f) {
    f << nlohmann::json{{"seeds", config.seeds},
                        {"dev_f1", summary.dev_f1},
                        {"mean_dev_f1", summary.mean_dev_f1}}
             .dump()
      << '\n';
  });
  out << "mean best dev F1 over " << config.seeds.size() << " seeds: "
      << detail::fmt4(summary.mean_dev_f1) << '\n';
  return summary;
}

// ---------------------------------------------------------------------------
// predict

struct PredictOptions {
  std::vector<fs::path> data;
  InstanceFilter filter;
  fs::path checkpoint;
  std::string baseline;  // "previous-sentence"
  fs::path out;
};

inline Predictions cmd_predict(const PredictOptions& o, std::ostream& log) {
  const Corpus corpus = load_corpora(o.data);
  const auto instances = select(corpus.instances, o.filter);
  if (instances.empty()) throw Error("predict: no instances selected");
  Predictions preds;
  if (!o.baseline.empty()) {
    if (!o.checkpoint.empty()) throw Error("predict: give a checkpoint or a baseline, not both");
    if (o.baseline != "previous-sentence") {
      throw Error("predict: unknown baseline '" + o.baseline + "'");
    }
    for (const QAInstance& inst : instances) {
      preds[inst.instance_id] =
          model::baseline_previous_sentence(inst, corpus.document(inst.context_doc_id));
    }
  } else {
    if (o.checkpoint.empty()) throw Error("predict: --checkpoint or --baseline is required");
    auto in = detail::open_in(o.checkpoint);
    const model::ModelCheckpoint ckpt = model::load_checkpoint(in);
    std::vector<model::PredictDiagnostic> diags;
    preds = model::predict(ckpt, instances, corpus, &diags);
    for (const auto& d : diags) log << "EMPTY " << d.instance_id << ": " << d.message << '\n';
  }
  if (o.out.empty()) throw Error("predict: --out is required");
  detail::write_file(o.out, [&](std::ostream& f) { write_predictions(preds, f); });
  log << "wrote " << preds.size() << " predictions to " << o.out.string() << '\n';
  return preds;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  std::vector<fs::path> data;
  InstanceFilter filter;
  fs::path predictions;
  fs::path keep;  // optional file of instance ids, one per line
  bool per_document = false;
  fs::path records;  // optional JSONL output
};

inline std::set<std::string> read_id_list(const fs::path& p) {
  auto in = detail::open_in(p);
  std::set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) ids.insert(line);
  }
  return ids;
}

inline EvalReport cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  const Corpus corpus = load_corpora(o.data);
  auto pin = detail::open_in(o.predictions);
  const Predictions preds = read_predictions(pin);
  const EvalOptions options{o.per_document};
  EvalReport report;
  if (!o.keep.empty()) {
    const auto keep = read_id_list(o.keep);
    const auto pool = select(corpus.instances, o.filter);
    report = score_subset(pool, preds, keep, options);
  } else {
    report = evaluate(select(corpus.instances, o.filter), preds, options, &corpus);
  }
  print_report(report, out);
  if (!o.records.empty()) {
    detail::write_file(o.records, [&](std::ostream& f) { write_report_records(report, f); });
  }
  return report;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOptions {
  std::vector<fs::path> data;
  InstanceFilter filter;
  fs::path predictions;
  std::size_t min_occurrences = 1;
  fs::path records;
  fs::path plot;
};

inline AnalysisReport cmd_analyze(const AnalyzeOptions& o, std::ostream& out) {
  const Corpus corpus = load_corpora(o.data);
  auto pin = detail::open_in(o.predictions);
  const Predictions preds = read_predictions(pin);
  const auto instances = select(corpus.instances, o.filter);
  if (instances.empty()) throw Error("analyze: no instances selected");
  AnalysisReport r = analyze(instances, preds, o.min_occurrences);
  render_text(r, out);
  if (!o.records.empty()) {
    detail::write_file(o.records, [&](std::ostream& f) { render_records(r, f); });
  }
  if (!o.plot.empty()) {
    detail::write_file(o.plot, [&](std::ostream& f) { render_form_plot(r.forms, f); });
  }
  return r;
}

}  // namespace ellqa
