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

// Unified on-disk format.
//
// Instances and documents live in two line-delimited JSON files. Every line
// is one object with a fixed key set; unknown or missing keys are rejected.
//
//   instance: {"instance_id", "task", "split", "context_doc_id",
//              "question_text", "question_offsets": [[b,e],...],
//              "gold_answer": [i,...], "gold_contiguous": [s,e] | null,
//              "antecedent_direction", "anchor": [s,e] | null}
//   document: {"doc_id", "raw_text", "token_offsets": [[b,e],...],
//              "sentence_bounds": [[s,e],...]}
//
// Token texts are not stored; they are recovered from the offsets. Keys are
// emitted in sorted order so equal inputs produce byte-identical files.

#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ellqa/corpus.hpp"
#include "json.hpp"

namespace ellqa {

using Json = nlohmann::json;

inline constexpr const char* kInstancesFile = "instances.jsonl";
inline constexpr const char* kDocumentsFile = "documents.jsonl";

namespace detail {

inline Json span_json(const std::optional<TokenSpan>& s) {
  if (!s) return nullptr;
  return Json::array({s->start, s->end});
}

inline void check_keys(const Json& obj, const std::set<std::string>& keys,
                       const std::string& where) {
  if (!obj.is_object()) throw Error(where + ": record is not an object");
  for (const auto& [k, v] : obj.items()) {
    if (!keys.count(k)) throw Error(where + ": unknown field '" + k + "'");
  }
  for (const auto& k : keys) {
    if (!obj.contains(k)) throw Error(where + ": missing field '" + k + "'");
  }
}

inline std::pair<std::size_t, std::size_t> pair_of(const Json& j,
                                                   const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() ||
      !j[1].is_number_unsigned()) {
    throw Error(where + ": expected a pair of non-negative integers");
  }
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

inline std::optional<TokenSpan> span_of(const Json& j,
                                        const std::string& where) {
  if (j.is_null()) return std::nullopt;
  auto [s, e] = pair_of(j, where);
  if (s >= e) throw Error(where + ": span must satisfy start < end");
  return TokenSpan{s, e};
}

inline bool instance_less(const QAInstance& a, const QAInstance& b) {
  return std::tie(a.task, a.split, a.instance_id) <
         std::tie(b.task, b.split, b.instance_id);
}

}  // namespace detail

inline Json to_json(const Document& doc) {
  Json offsets = Json::array();
  for (const Token& t : doc.tokens) {
    offsets.push_back(Json::array({t.char_start, t.char_end}));
  }
  Json bounds = Json::array();
  for (const TokenSpan& s : doc.sentence_bounds) {
    bounds.push_back(Json::array({s.start, s.end}));
  }
  return Json{{"doc_id", doc.doc_id},
              {"raw_text", doc.raw_text},
              {"token_offsets", std::move(offsets)},
              {"sentence_bounds", std::move(bounds)}};
}

inline Json to_json(const QAInstance& inst) {
  Json offsets = Json::array();
  for (const Token& t : inst.question_tokens) {
    offsets.push_back(Json::array({t.char_start, t.char_end}));
  }
  return Json{{"instance_id", inst.instance_id},
              {"task", to_string(inst.task)},
              {"split", to_string(inst.split)},
              {"context_doc_id", inst.context_doc_id},
              {"question_text", inst.question_text},
              {"question_offsets", std::move(offsets)},
              {"gold_answer", Json(std::vector<std::size_t>(
                                  inst.gold_answer.begin(),
                                  inst.gold_answer.end()))},
              {"gold_contiguous", detail::span_json(inst.gold_contiguous)},
              {"antecedent_direction", to_string(inst.antecedent_direction)},
              {"anchor", detail::span_json(inst.anchor)}};
}

inline Document document_from_json(const Json& j, const std::string& where) {
  detail::check_keys(j, {"doc_id", "raw_text", "token_offsets",
                         "sentence_bounds"},
                     where);
  Document doc;
  doc.doc_id = j.at("doc_id").get<std::string>();
  doc.raw_text = j.at("raw_text").get<std::string>();
  for (const Json& o : j.at("token_offsets")) {
    auto [b, e] = detail::pair_of(o, where);
    if (b >= e || e > doc.raw_text.size()) {
      throw Error(where + ": token offsets out of range");
    }
    doc.tokens.push_back({doc.raw_text.substr(b, e - b), b, e});
  }
  for (const Json& s : j.at("sentence_bounds")) {
    auto [b, e] = detail::pair_of(s, where);
    doc.sentence_bounds.push_back({b, e});
  }
  try {
    validate(doc);
  } catch (const Error& err) {
    throw Error(where + ": " + err.what());
  }
  return doc;
}

inline QAInstance instance_from_json(const Json& j, const std::string& where) {
  detail::check_keys(j, {"instance_id", "task", "split", "context_doc_id",
                         "question_text", "question_offsets", "gold_answer",
                         "gold_contiguous", "antecedent_direction", "anchor"},
                     where);
  QAInstance inst;
  inst.instance_id = j.at("instance_id").get<std::string>();
  inst.task = parse_task(j.at("task").get<std::string>());
  inst.split = parse_split(j.at("split").get<std::string>());
  inst.context_doc_id = j.at("context_doc_id").get<std::string>();
  inst.question_text = j.at("question_text").get<std::string>();
  for (const Json& o : j.at("question_offsets")) {
    auto [b, e] = detail::pair_of(o, where);
    if (b >= e || e > inst.question_text.size()) {
      throw Error(where + ": question offsets out of range");
    }
    inst.question_tokens.push_back({inst.question_text.substr(b, e - b), b, e});
  }
  for (const Json& i : j.at("gold_answer")) {
    if (!i.is_number_unsigned()) throw Error(where + ": bad gold index");
    inst.gold_answer.insert(i.get<std::size_t>());
  }
  inst.gold_contiguous = detail::span_of(j.at("gold_contiguous"), where);
  inst.antecedent_direction =
      parse_direction(j.at("antecedent_direction").get<std::string>());
  inst.anchor = detail::span_of(j.at("anchor"), where);
  return inst;
}

// Writes instances and their documents. Instances are sorted by
// (task, split, instance_id) and documents by doc_id.
inline void write_instances(const std::vector<QAInstance>& instances,
                            const std::vector<Document>& documents,
                            std::ostream& instances_out,
                            std::ostream& documents_out) {
  std::map<std::string, const Document*> by_id;
  for (const Document& d : documents) {
    if (!by_id.emplace(d.doc_id, &d).second) {
      throw Error("duplicate document id " + d.doc_id);
    }
  }
  std::vector<const QAInstance*> sorted;
  sorted.reserve(instances.size());
  for (const QAInstance& inst : instances) {
    if (!by_id.count(inst.context_doc_id)) {
      throw Error("instance " + inst.instance_id +
                  " refers to unknown document " + inst.context_doc_id);
    }
    sorted.push_back(&inst);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const QAInstance* a, const QAInstance* b) {
              return detail::instance_less(*a, *b);
            });
  for (const QAInstance* inst : sorted) {
    instances_out << to_json(*inst).dump() << '\n';
  }
  for (const auto& [id, doc] : by_id) {
    documents_out << to_json(*doc).dump() << '\n';
  }
}

struct Corpus {
  std::vector<QAInstance> instances;
  std::vector<Document> documents;

  const Document& document(const std::string& doc_id) const {
    auto it = std::lower_bound(
        documents.begin(), documents.end(), doc_id,
        [](const Document& d, const std::string& id) { return d.doc_id < id; });
    if (it == documents.end() || it->doc_id != doc_id) {
      throw Error("unknown document " + doc_id);
    }
    return *it;
  }

  bool operator==(const Corpus&) const = default;
};

// Reads a corpus written by write_instances, validating every record.
// Documents come back sorted by doc_id; instances keep file order.
inline Corpus read_instances(std::istream& instances_in,
                             std::istream& documents_in) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> doc_ids;
  while (std::getline(documents_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "documents line " + std::to_string(line_no);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error(where + ": " + e.what());
    }
    Document doc = document_from_json(j, where);
    if (!doc_ids.insert(doc.doc_id).second) {
      throw Error(where + ": duplicate doc_id " + doc.doc_id);
    }
    corpus.documents.push_back(std::move(doc));
  }
  std::sort(corpus.documents.begin(), corpus.documents.end(),
            [](const Document& a, const Document& b) {
              return a.doc_id < b.doc_id;
            });

  line_no = 0;
  std::set<std::string> ids;
  while (std::getline(instances_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "instances line " + std::to_string(line_no);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error(where + ": " + e.what());
    }
    QAInstance inst;
    try {
      inst = instance_from_json(j, where);
    } catch (const Json::exception& e) {
      throw Error(where + ": " + e.what());
    }
    if (!ids.insert(inst.instance_id).second) {
      throw Error(where + ": duplicate instance_id " + inst.instance_id);
    }
    if (!doc_ids.count(inst.context_doc_id)) {
      throw Error(where + ": instance " + inst.instance_id +
                  " refers to unknown document " + inst.context_doc_id);
    }
    validate(inst, corpus.document(inst.context_doc_id));
    corpus.instances.push_back(std::move(inst));
  }
  return corpus;
}

inline void save_corpus(const std::filesystem::path& dir,
                        const std::vector<QAInstance>& instances,
                        const std::vector<Document>& documents) {
  std::filesystem::create_directories(dir);
  std::ofstream inst_out(dir / kInstancesFile, std::ios::binary);
  std::ofstream doc_out(dir / kDocumentsFile, std::ios::binary);
  if (!inst_out || !doc_out) {
    throw Error("cannot write corpus to " + dir.string());
  }
  write_instances(instances, documents, inst_out, doc_out);
}

inline Corpus load_corpus(const std::filesystem::path& dir) {
  std::ifstream inst_in(dir / kInstancesFile, std::ios::binary);
  std::ifstream doc_in(dir / kDocumentsFile, std::ios::binary);
  if (!inst_in || !doc_in) {
    throw Error("cannot read corpus from " + dir.string() + " (expected " +
                kInstancesFile + " and " + kDocumentsFile + ")");
  }
  return read_instances(inst_in, doc_in);
}

}  // namespace ellqa
