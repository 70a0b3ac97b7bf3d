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

// Source corpus readers and their conversion into QA instances.
//
// Every converter returns the instances, the context documents they refer to
// and a report of dropped or suspicious records.

#pragma once

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ellqa/corpus.hpp"
#include "json.hpp"

namespace ellqa {

struct ReportEntry {
  enum class Severity { kDropped, kWarning };
  std::string record_id;
  Severity severity = Severity::kDropped;
  std::string reason;
};

struct ConversionResult {
  std::vector<QAInstance> instances;
  std::vector<Document> documents;
  std::vector<ReportEntry> report;
  std::size_t input_records = 0;

  std::size_t dropped() const {
    return static_cast<std::size_t>(std::count_if(
        report.begin(), report.end(), [](const ReportEntry& e) {
          return e.severity == ReportEntry::Severity::kDropped;
        }));
  }

  void append(ConversionResult other) {
    instances.insert(instances.end(),
                     std::make_move_iterator(other.instances.begin()),
                     std::make_move_iterator(other.instances.end()));
    for (Document& d : other.documents) add_document(std::move(d));
    report.insert(report.end(), other.report.begin(), other.report.end());
    input_records += other.input_records;
  }

  // Adds a document unless an identical one is already present. A different
  // document under the same id is an error.
  void add_document(Document doc) {
    auto [it, inserted] = doc_index_.emplace(doc.doc_id, documents.size());
    if (!inserted) {
      if (documents[it->second] == doc) return;
      throw Error("conflicting contents for document " + doc.doc_id);
    }
    documents.push_back(std::move(doc));
  }

 private:
  std::map<std::string, std::size_t> doc_index_;
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

// Undoes the \t, \n and \\ escapes used inside record fields.
inline std::string unescape(std::string_view s, const std::string& where) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (i + 1 >= s.size()) throw Error(where + ": dangling escape");
    char c = s[++i];
    if (c == 't') out += '\t';
    else if (c == 'n') out += '\n';
    else if (c == '\\') out += '\\';
    else throw Error(where + ": unknown escape \\" + std::string(1, c));
  }
  return out;
}

inline std::size_t parse_index(std::string_view s, const std::string& where) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(where + ": expected a non-negative integer, got '" +
                std::string(s) + "'");
  }
  return v;
}

// All (possibly overlapping) occurrences of needle in haystack.
inline std::vector<std::size_t> find_all(std::string_view haystack,
                                         std::string_view needle) {
  std::vector<std::size_t> out;
  if (needle.empty()) return out;
  std::size_t pos = haystack.find(needle);
  while (pos != std::string_view::npos) {
    out.push_back(pos);
    pos = haystack.find(needle, pos + 1);
  }
  return out;
}

// Smallest token range covering the character range [begin, end).
inline std::optional<TokenSpan> covering_tokens(const Document& doc,
                                                std::size_t begin,
                                                std::size_t end) {
  std::optional<std::size_t> first;
  std::size_t last = 0;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const Token& t = doc.tokens[i];
    if (t.char_end > begin && t.char_start < end) {
      if (!first) first = i;
      last = i;
    }
  }
  if (!first) return std::nullopt;
  return TokenSpan{*first, last + 1};
}

inline bool is_wh_word(const std::string& word) {
  static const std::set<std::string> kWh = {
      "who", "whom", "whose", "what", "which", "when",
      "where", "why", "how", "whether"};
  return kWh.count(to_lower(word)) > 0;
}

template <typename Record>
std::vector<Record> read_records(std::istream& in, std::size_t columns,
                                 const char* format_name,
                                 Record (*parse)(const std::vector<std::string>&,
                                                 const std::string&)) {
  std::vector<Record> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where =
        std::string(format_name) + " line " + std::to_string(line_no);
    auto fields = split_tabs(line);
    if (fields.size() != columns) {
      throw Error(where + ": expected " + std::to_string(columns) +
                  " tab-separated columns, found " +
                  std::to_string(fields.size()));
    }
    out.push_back(parse(fields, where));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sluice ellipsis.
//
// Record file: one record per line, seven tab-separated columns, '#' starts a
// comment line. Fields may use the escapes \t, \n and \\.
//
//   record_id  doc_id  split  sentence_index  wh_token  antecedent  context
//
// sentence_index selects the sluice sentence among the context sentences
// produced by the default tokenizer. wh_token is the index of the sluiced
// wh-word inside that sentence, or "-" to detect it automatically.

struct SluiceRecord {
  std::string record_id;
  std::string doc_id;
  Split split = Split::kTrain;
  std::size_t sluice_sentence_index = 0;
  std::optional<std::size_t> wh_token;
  std::string antecedent;
  std::string context;
};

inline SluiceRecord parse_sluice_fields(const std::vector<std::string>& f,
                                        const std::string& where) {
  SluiceRecord r;
  r.record_id = f[0];
  r.doc_id = f[1];
  r.split = parse_split(f[2]);
  r.sluice_sentence_index = detail::parse_index(f[3], where);
  if (f[4] != "-") r.wh_token = detail::parse_index(f[4], where);
  r.antecedent = detail::unescape(f[5], where);
  r.context = detail::unescape(f[6], where);
  if (r.record_id.empty() || r.doc_id.empty()) {
    throw Error(where + ": empty record or document id");
  }
  if (r.antecedent.empty()) throw Error(where + ": empty antecedent");
  return r;
}

inline std::vector<SluiceRecord> read_sluice_records(std::istream& in) {
  return detail::read_records<SluiceRecord>(in, 7, "sluice",
                                            &parse_sluice_fields);
}

// Resolves each annotated antecedent by verbatim search in its context:
// case-sensitive first, then case-insensitive, taking the first occurrence.
// Records without any match are dropped and reported.
inline ConversionResult convert_sluice(const std::vector<SluiceRecord>& records) {
  ConversionResult result;
  result.input_records = records.size();
  for (const SluiceRecord& r : records) {
    Document doc = make_document(r.doc_id, r.context);
    auto drop = [&](std::string reason) {
      result.report.push_back(
          {r.record_id, ReportEntry::Severity::kDropped, std::move(reason)});
    };
    if (r.sluice_sentence_index >= doc.sentence_bounds.size()) {
      drop("sluice sentence index out of range");
      continue;
    }
    const TokenSpan sentence = doc.sentence_bounds[r.sluice_sentence_index];

    auto matches = detail::find_all(doc.raw_text, r.antecedent);
    bool case_folded = false;
    if (matches.empty()) {
      matches = detail::find_all(to_lower(doc.raw_text), to_lower(r.antecedent));
      case_folded = true;
    }
    if (matches.empty()) {
      drop("antecedent string not found in context");
      continue;
    }
    if (matches.size() > 1) {
      result.report.push_back(
          {r.record_id, ReportEntry::Severity::kWarning,
           "antecedent occurs " + std::to_string(matches.size()) +
               " times in context; using the first occurrence"});
    }
    if (case_folded) {
      result.report.push_back({r.record_id, ReportEntry::Severity::kWarning,
                               "antecedent matched case-insensitively"});
    }
    auto answer = detail::covering_tokens(doc, matches.front(),
                                          matches.front() + r.antecedent.size());
    if (!answer) {
      drop("antecedent match covers no tokens");
      continue;
    }

    std::optional<std::size_t> wh;
    if (r.wh_token) {
      if (*r.wh_token >= sentence.size()) {
        drop("wh_token index outside the sluice sentence");
        continue;
      }
      wh = sentence.start + *r.wh_token;
    } else {
      for (std::size_t i = sentence.start; i < sentence.end; ++i) {
        if (detail::is_wh_word(doc.tokens[i].text)) {
          wh = i;
          break;
        }
      }
    }

    QAInstance inst;
    inst.instance_id = r.record_id;
    inst.task = Task::kSluice;
    inst.split = r.split;
    inst.context_doc_id = doc.doc_id;
    std::tie(inst.question_text, inst.question_tokens) =
        sentence_question(doc, sentence);
    inst.gold_answer = span_tokens(*answer);
    inst.gold_contiguous = *answer;
    inst.antecedent_direction = antecedent_direction(sentence, *answer, wh);
    if (wh) inst.anchor = TokenSpan{*wh, *wh + 1};
    result.instances.push_back(std::move(inst));
    result.add_document(std::move(doc));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Verb phrase ellipsis over WSJ.
//
// Record file: five tab-separated columns per line.
//
//   record_id  wsj_section  doc_id  trigger_token  gold
//
// trigger_token is the document token index of the stranded auxiliary. gold
// is a comma-separated list of document token indices or inclusive ranges,
// e.g. "5-6,9".
//
// Documents come from a pre-tokenized file: a line "# doc <doc_id>" opens a
// document, each following non-blank line is one sentence of space-separated
// tokens.

struct VpeRecord {
  std::string record_id;
  int wsj_section = 0;
  std::string doc_id;
  std::size_t trigger_token = 0;
  TokenSet gold;
};

inline Split vpe_split(int wsj_section) {
  if (wsj_section < 0 || wsj_section > 24) {
    throw Error("WSJ section " + std::to_string(wsj_section) +
                " outside 0-24");
  }
  if (wsj_section <= 17) return Split::kTrain;
  if (wsj_section <= 19) return Split::kDev;
  return Split::kTest;
}

inline TokenSet parse_token_set(std::string_view spec, const std::string& where) {
  TokenSet out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t comma = spec.find(',', start);
    std::string_view item = spec.substr(
        start, comma == std::string_view::npos ? spec.npos : comma - start);
    std::size_t dash = item.find('-');
    if (dash == std::string_view::npos) {
      out.insert(detail::parse_index(item, where));
    } else {
      std::size_t lo = detail::parse_index(item.substr(0, dash), where);
      std::size_t hi = detail::parse_index(item.substr(dash + 1), where);
      if (hi < lo) throw Error(where + ": descending range in token set");
      for (std::size_t i = lo; i <= hi; ++i) out.insert(i);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw Error(where + ": empty token set");
  return out;
}

inline VpeRecord parse_vpe_fields(const std::vector<std::string>& f,
                                  const std::string& where) {
  VpeRecord r;
  r.record_id = f[0];
  std::size_t section = detail::parse_index(f[1], where);
  if (section > 24) throw Error(where + ": WSJ section outside 0-24");
  r.wsj_section = static_cast<int>(section);
  r.doc_id = f[2];
  r.trigger_token = detail::parse_index(f[3], where);
  r.gold = parse_token_set(f[4], where);
  if (r.record_id.empty() || r.doc_id.empty()) {
    throw Error(where + ": empty record or document id");
  }
  return r;
}

inline std::vector<VpeRecord> read_vpe_records(std::istream& in) {
  return detail::read_records<VpeRecord>(in, 5, "vpe", &parse_vpe_fields);
}

inline std::vector<Document> read_tokenized_documents(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::string> current;
  std::vector<std::vector<std::string>> sentences;
  auto flush = [&]() {
    if (current) docs.push_back(make_document(*current, sentences));
    sentences.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("# doc ", 0) == 0) {
      flush();
      current = line.substr(6);
      if (current->empty()) {
        throw Error("tokenized documents line " + std::to_string(line_no) +
                    ": empty doc id");
      }
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!current) {
      throw Error("tokenized documents line " + std::to_string(line_no) +
                  ": sentence before any '# doc' header");
    }
    std::istringstream words(line);
    std::vector<std::string> sentence;
    for (std::string w; words >> w;) sentence.push_back(w);
    sentences.push_back(std::move(sentence));
  }
  flush();
  return docs;
}

// One instance per record; the question is the sentence holding the trigger
// and the gold answer is the annotated (possibly discontiguous) token set.
inline ConversionResult convert_vpe(const std::vector<VpeRecord>& records,
                                    const std::vector<Document>& documents) {
  std::map<std::string, const Document*> by_id;
  for (const Document& d : documents) by_id[d.doc_id] = &d;
  ConversionResult result;
  result.input_records = records.size();
  for (const VpeRecord& r : records) {
    auto it = by_id.find(r.doc_id);
    if (it == by_id.end()) {
      throw Error("VPE record " + r.record_id + ": unknown document " +
                  r.doc_id);
    }
    const Document& doc = *it->second;
    if (r.trigger_token >= doc.tokens.size()) {
      throw Error("VPE record " + r.record_id +
                  ": trigger index outside document " + r.doc_id);
    }
    if (*r.gold.rbegin() >= doc.tokens.size()) {
      throw Error("VPE record " + r.record_id +
                  ": gold index outside document " + r.doc_id);
    }
    const TokenSpan sentence =
        doc.sentence_bounds[doc.sentence_of(r.trigger_token)];
    QAInstance inst;
    inst.instance_id = r.record_id;
    inst.task = Task::kVpe;
    inst.split = vpe_split(r.wsj_section);
    inst.context_doc_id = doc.doc_id;
    std::tie(inst.question_text, inst.question_tokens) =
        sentence_question(doc, sentence);
    inst.gold_answer = r.gold;
    inst.gold_contiguous = hull(r.gold);
    inst.antecedent_direction =
        antecedent_direction(sentence, hull(r.gold), r.trigger_token);
    inst.anchor = TokenSpan{r.trigger_token, r.trigger_token + 1};
    result.instances.push_back(std::move(inst));
    result.add_document(doc);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Coreference (CoNLL-2012 column format).

struct CorefDocument {
  Document document;
  std::vector<Mention> mentions;
};

// Reads CoNLL-2012 files: "#begin document (<name>); part <n>" headers,
// whitespace-separated columns, blank lines between sentences. Column 0 is
// the document name, column 2 the word number, column 3 the word and the last
// column the coreference annotation ("-", "(7", "7)", "(7)" joined by '|').
inline std::vector<CorefDocument> read_conll(std::istream& in) {
  static const std::regex kBegin(R"(^#begin document \((.*)\);\s*part\s+(\d+)\s*$)");
  static const std::regex kCorefPart(R"(^(\()?(\d+)(\))?$)");

  std::vector<CorefDocument> out;
  std::string line;
  std::size_t line_no = 0;

  bool in_doc = false;
  std::string doc_name;
  std::string doc_id;
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> sentence;
  std::size_t columns = 0;
  std::size_t token_base = 0;
  std::map<std::string, std::vector<std::size_t>> open;
  std::vector<Mention> mentions;

  auto where = [&]() { return "conll line " + std::to_string(line_no); };
  auto end_sentence = [&]() {
    if (sentence.empty()) return;
    for (const auto& [chain, starts] : open) {
      if (!starts.empty()) {
        throw Error(where() + ": mention of chain " + chain +
                    " crosses a sentence boundary");
      }
    }
    token_base += sentence.size();
    sentences.push_back(std::move(sentence));
    sentence.clear();
    columns = 0;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, kBegin)) {
      if (in_doc) throw Error(where() + ": nested #begin document");
      in_doc = true;
      doc_name = m[1];
      std::ostringstream id;
      id << doc_name << "_" << std::setw(3) << std::setfill('0')
         << std::stoi(m[2]);
      doc_id = id.str();
      sentences.clear();
      sentence.clear();
      token_base = 0;
      open.clear();
      mentions.clear();
      continue;
    }
    if (line.rfind("#end document", 0) == 0) {
      if (!in_doc) throw Error(where() + ": #end document without #begin");
      end_sentence();
      CorefDocument cd;
      cd.document = make_document(doc_id, sentences);
      for (Mention& mention : mentions) mention.doc_id = doc_id;
      cd.mentions = std::move(mentions);
      std::sort(cd.mentions.begin(), cd.mentions.end(),
                [](const Mention& a, const Mention& b) {
                  return std::tie(a.span, a.chain_id) <
                         std::tie(b.span, b.chain_id);
                });
      out.push_back(std::move(cd));
      mentions.clear();
      in_doc = false;
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string::npos) {
      end_sentence();
      continue;
    }
    if (line[0] == '#') continue;
    if (!in_doc) throw Error(where() + ": token line outside a document");

    std::istringstream cols(line);
    std::vector<std::string> f;
    for (std::string c; cols >> c;) f.push_back(c);
    if (f.size() < 5) {
      throw Error(where() + ": expected at least 5 columns, found " +
                  std::to_string(f.size()));
    }
    if (columns == 0) columns = f.size();
    if (f.size() != columns) {
      throw Error(where() + ": column count changes within a sentence");
    }
    if (f[0] != doc_name) {
      throw Error(where() + ": document column '" + f[0] +
                  "' does not match header '" + doc_name + "'");
    }
    if (detail::parse_index(f[2], where()) != sentence.size()) {
      throw Error(where() + ": word number out of sequence");
    }
    const std::size_t token = token_base + sentence.size();
    sentence.push_back(f[3]);

    const std::string& coref = f.back();
    if (coref == "-") continue;
    std::size_t start = 0;
    while (start <= coref.size()) {
      std::size_t bar = coref.find('|', start);
      std::string part = coref.substr(start, bar - start);
      std::smatch pm;
      if (!std::regex_match(part, pm, kCorefPart) ||
          (!pm[1].matched && !pm[3].matched)) {
        throw Error(where() + ": malformed coreference field '" + coref + "'");
      }
      const std::string chain = pm[2];
      if (pm[1].matched) open[chain].push_back(token);
      if (pm[3].matched) {
        auto& starts = open[chain];
        if (starts.empty()) {
          throw Error(where() + ": closing unopened mention of chain " + chain);
        }
        mentions.push_back({"", TokenSpan{starts.back(), token + 1}, chain});
        starts.pop_back();
      }
      if (bar == std::string::npos) break;
      start = bar + 1;
    }
  }
  if (in_doc) throw Error("conll: missing #end document for " + doc_name);
  return out;
}

// For every chain, each mention after the chain's first becomes a question:
// its sentence with the mention wrapped in <ref> ... </ref>. The answer is the
// chain's first mention in document order.
inline ConversionResult convert_coref(const CorefDocument& cd, Task task,
                                      Split split) {
  if (!is_coref(task)) throw Error("convert_coref needs a coreference task");
  const Document& doc = cd.document;
  std::map<std::string, std::vector<const Mention*>> chains;
  for (const Mention& m : cd.mentions) {
    if (m.span.start >= m.span.end || m.span.end > doc.tokens.size()) {
      throw Error("mention outside document " + doc.doc_id);
    }
    if (doc.sentence_of(m.span.start) != doc.sentence_of(m.span.end - 1)) {
      throw Error("mention crosses a sentence boundary in " + doc.doc_id);
    }
    chains[m.chain_id].push_back(&m);
  }

  ConversionResult result;
  result.input_records = cd.mentions.size();
  for (auto& [chain_id, members] : chains) {
    std::sort(members.begin(), members.end(),
              [](const Mention* a, const Mention* b) { return a->span < b->span; });
    if (members.size() < 2) continue;
    const TokenSpan antecedent = members.front()->span;
    for (std::size_t k = 1; k < members.size(); ++k) {
      const TokenSpan mention = members[k]->span;
      const TokenSpan sentence =
          doc.sentence_bounds[doc.sentence_of(mention.start)];
      QAInstance inst;
      inst.instance_id = doc.doc_id + "/" + chain_id + "/" +
                         std::to_string(mention.start) + "-" +
                         std::to_string(mention.end);
      inst.task = task;
      inst.split = split;
      inst.context_doc_id = doc.doc_id;
      std::tie(inst.question_text, inst.question_tokens) =
          sentence_question(doc, sentence, mention);
      inst.gold_answer = span_tokens(antecedent);
      inst.gold_contiguous = antecedent;
      inst.antecedent_direction =
          antecedent_direction(sentence, antecedent, mention.start);
      inst.anchor = mention;
      result.instances.push_back(std::move(inst));
    }
  }
  if (!result.instances.empty()) result.add_document(doc);
  return result;
}

// ---------------------------------------------------------------------------
// SQuAD v1.1 JSON.

// Each (paragraph, question) pair becomes one instance answered by its first
// answer. Character answers are widened to whole covering tokens.
inline ConversionResult convert_squad(const nlohmann::json& dataset,
                                      Split split) {
  using nlohmann::json;
  auto require_keys = [](const json& obj, std::set<std::string> required,
                         std::set<std::string> optional,
                         const std::string& where) {
    if (!obj.is_object()) throw Error("squad: " + where + " is not an object");
    for (const auto& [k, v] : obj.items()) {
      if (!required.count(k) && !optional.count(k)) {
        throw Error("squad: unknown field '" + k + "' in " + where);
      }
    }
    for (const auto& k : required) {
      if (!obj.contains(k)) {
        throw Error("squad: missing field '" + k + "' in " + where);
      }
    }
  };

  ConversionResult result;
  try {
    require_keys(dataset, {"data"}, {"version"}, "root");
    std::size_t article_index = 0;
    for (const json& article : dataset.at("data")) {
      const std::string article_where = "article " + std::to_string(article_index);
      require_keys(article, {"paragraphs"}, {"title"}, article_where);
      const std::string title = article.value("title", article_where);
      std::size_t paragraph_index = 0;
      for (const json& paragraph : article.at("paragraphs")) {
        const std::string doc_id =
            title + "#" + std::to_string(paragraph_index++);
        require_keys(paragraph, {"context", "qas"}, {}, doc_id);
        Document doc = make_document(doc_id, paragraph.at("context").get<std::string>());
        bool used = false;
        for (const json& qa : paragraph.at("qas")) {
          require_keys(qa, {"id", "question", "answers"}, {}, doc_id + " qa");
          ++result.input_records;
          const std::string id = qa.at("id").get<std::string>();
          const json& answers = qa.at("answers");
          if (!answers.is_array() || answers.empty()) {
            result.report.push_back(
                {id, ReportEntry::Severity::kDropped, "no answers"});
            continue;
          }
          const json& answer = answers.front();
          require_keys(answer, {"text", "answer_start"}, {}, id + " answer");
          const std::string text = answer.at("text").get<std::string>();
          const std::size_t begin = answer.at("answer_start").get<std::size_t>();
          if (text.empty() || begin + text.size() > doc.raw_text.size()) {
            result.report.push_back({id, ReportEntry::Severity::kDropped,
                                     "answer_start beyond context"});
            continue;
          }
          if (doc.raw_text.compare(begin, text.size(), text) != 0) {
            result.report.push_back(
                {id, ReportEntry::Severity::kDropped,
                 "answer text does not match context at answer_start"});
            continue;
          }
          auto span = detail::covering_tokens(doc, begin, begin + text.size());
          if (!span) {
            result.report.push_back({id, ReportEntry::Severity::kDropped,
                                     "answer covers no tokens"});
            continue;
          }
          QAInstance inst;
          inst.instance_id = id;
          inst.task = Task::kSquad;
          inst.split = split;
          inst.context_doc_id = doc_id;
          inst.question_text = qa.at("question").get<std::string>();
          inst.question_tokens = tokenize(inst.question_text);
          inst.gold_answer = span_tokens(*span);
          inst.gold_contiguous = *span;
          inst.antecedent_direction = Direction::kBackward;
          result.instances.push_back(std::move(inst));
          used = true;
        }
        if (used) result.add_document(std::move(doc));
      }
      ++article_index;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("squad: malformed schema: ") + e.what());
  }
  return result;
}

inline ConversionResult convert_squad(std::istream& in, Split split) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("squad: invalid JSON: ") + e.what());
  }
  return convert_squad(j, split);
}

// ---------------------------------------------------------------------------
// Statistics.

struct StatsRow {
  Task task;
  Split split;
  std::size_t count = 0;
  // Mean context length in words over the instances.
  double average_context_length = 0.0;
};

inline std::vector<StatsRow> conversion_stats(
    const std::vector<QAInstance>& instances,
    const std::vector<Document>& documents) {
  std::map<std::string, std::size_t> lengths;
  for (const Document& d : documents) lengths[d.doc_id] = d.tokens.size();
  std::map<std::pair<Task, Split>, std::pair<std::size_t, double>> acc;
  for (const QAInstance& inst : instances) {
    auto it = lengths.find(inst.context_doc_id);
    if (it == lengths.end()) {
      throw Error("instance " + inst.instance_id + " has no document");
    }
    auto& [n, words] = acc[{inst.task, inst.split}];
    ++n;
    words += static_cast<double>(it->second);
  }
  std::vector<StatsRow> rows;
  for (const auto& [key, value] : acc) {
    rows.push_back({key.first, key.second, value.first,
                    value.second / static_cast<double>(value.first)});
  }
  return rows;
}

inline void print_stats(const std::vector<StatsRow>& rows, std::ostream& out) {
  out << std::left << std::setw(18) << "task" << std::setw(7) << "split"
      << std::right << std::setw(9) << "count" << std::setw(10) << "ACL"
      << '\n';
  for (const StatsRow& r : rows) {
    out << std::left << std::setw(18) << to_string(r.task) << std::setw(7)
        << to_string(r.split) << std::right << std::setw(9) << r.count
        << std::setw(10) << std::fixed << std::setprecision(1)
        << r.average_context_length << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

inline void print_report(const std::vector<ReportEntry>& report,
                         std::ostream& out) {
  for (const ReportEntry& e : report) {
    out << (e.severity == ReportEntry::Severity::kDropped ? "DROPPED "
                                                          : "WARNING ")
        << e.record_id << ": " << e.reason << '\n';
  }
}

}  // namespace ellqa
