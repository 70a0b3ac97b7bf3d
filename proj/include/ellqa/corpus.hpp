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

// Shared data model: tokens, documents, spans and QA instances.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ellqa {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Token {
  std::string text;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  bool operator==(const Token&) const = default;
};

// Half-open token range [start, end). The empty span is never a TokenSpan;
// callers use std::optional<TokenSpan> for that.
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool contains(std::size_t i) const { return i >= start && i < end; }
  bool contains(const TokenSpan& other) const {
    return other.start >= start && other.end <= end;
  }

  auto operator<=>(const TokenSpan&) const = default;
};

using TokenSet = std::set<std::size_t>;

inline TokenSet span_tokens(const TokenSpan& span) {
  TokenSet out;
  for (std::size_t i = span.start; i < span.end; ++i) out.insert(i);
  return out;
}

// Smallest contiguous span covering a non-empty token set.
inline TokenSpan hull(const TokenSet& tokens) {
  if (tokens.empty()) throw Error("hull of an empty token set");
  return TokenSpan{*tokens.begin(), *tokens.rbegin() + 1};
}

inline bool is_contiguous(const TokenSet& tokens) {
  return !tokens.empty() && hull(tokens).size() == tokens.size();
}

struct Document {
  std::string doc_id;
  std::string raw_text;
  std::vector<Token> tokens;
  // (first token, one past last token) per sentence.
  std::vector<TokenSpan> sentence_bounds;

  // Index of the sentence containing token i.
  std::size_t sentence_of(std::size_t i) const {
    auto it = std::upper_bound(
        sentence_bounds.begin(), sentence_bounds.end(), i,
        [](std::size_t v, const TokenSpan& s) { return v < s.end; });
    if (it == sentence_bounds.end() || !it->contains(i)) {
      throw Error("token " + std::to_string(i) + " outside document " + doc_id);
    }
    return static_cast<std::size_t>(it - sentence_bounds.begin());
  }

  std::string span_text(const TokenSpan& span) const {
    if (span.start >= span.end || span.end > tokens.size()) return {};
    return raw_text.substr(tokens[span.start].char_start,
                           tokens[span.end - 1].char_end -
                               tokens[span.start].char_start);
  }

  bool operator==(const Document&) const = default;
};

enum class Task { kSluice, kVpe, kCorefOntoNotes, kCorefWikiCoref, kSquad };
enum class Split { kTrain, kDev, kTest };
enum class Direction { kBackward, kForward, kSameSentence };

inline constexpr Task kAllTasks[] = {Task::kSluice, Task::kVpe,
                                     Task::kCorefOntoNotes,
                                     Task::kCorefWikiCoref, Task::kSquad};

inline std::string to_string(Task t) {
  switch (t) {
    case Task::kSluice: return "SLUICE";
    case Task::kVpe: return "VPE";
    case Task::kCorefOntoNotes: return "COREF_ONTONOTES";
    case Task::kCorefWikiCoref: return "COREF_WIKICOREF";
    case Task::kSquad: return "SQUAD";
  }
  return "?";
}

inline std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "TRAIN";
    case Split::kDev: return "DEV";
    case Split::kTest: return "TEST";
  }
  return "?";
}

inline std::string to_string(Direction d) {
  switch (d) {
    case Direction::kBackward: return "BACKWARD";
    case Direction::kForward: return "FORWARD";
    case Direction::kSameSentence: return "SAME_SENTENCE";
  }
  return "?";
}

inline Task parse_task(std::string_view s) {
  for (Task t : kAllTasks) {
    if (to_string(t) == s) return t;
  }
  throw Error("unknown task: " + std::string(s));
}

inline Split parse_split(std::string_view s) {
  for (Split v : {Split::kTrain, Split::kDev, Split::kTest}) {
    if (to_string(v) == s) return v;
  }
  throw Error("unknown split: " + std::string(s));
}

inline Direction parse_direction(std::string_view s) {
  for (Direction v : {Direction::kBackward, Direction::kForward,
                      Direction::kSameSentence}) {
    if (to_string(v) == s) return v;
  }
  throw Error("unknown antecedent direction: " + std::string(s));
}

inline bool is_coref(Task t) {
  return t == Task::kCorefOntoNotes || t == Task::kCorefWikiCoref;
}

inline constexpr std::string_view kRefOpen = "<ref>";
inline constexpr std::string_view kRefClose = "</ref>";

struct QAInstance {
  std::string instance_id;
  Task task = Task::kSluice;
  Split split = Split::kTrain;
  std::string context_doc_id;
  // Question tokens carry offsets into question_text, not into the context.
  std::string question_text;
  std::vector<Token> question_tokens;
  TokenSet gold_answer;
  std::optional<TokenSpan> gold_contiguous;
  Direction antecedent_direction = Direction::kBackward;
  // Context position of the thing being resolved: the marked mention for
  // coreference, the trigger token for ellipsis. Absent for reading
  // comprehension questions.
  std::optional<TokenSpan> anchor;

  bool operator==(const QAInstance&) const = default;
};

struct Mention {
  std::string doc_id;
  TokenSpan span;
  std::string chain_id;

  bool operator==(const Mention&) const = default;
};

// ---------------------------------------------------------------------------
// Tokenization.

inline bool is_punct_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

inline bool is_space_byte(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

// Splits on whitespace, then peels leading and trailing punctuation off
// each chunk one character at a time. Internal punctuation ("don't",
// "3.5") stays inside the token.
inline std::vector<Token> tokenize(std::string_view raw_text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = raw_text.size();
  while (i < n) {
    while (i < n && is_space_byte(raw_text[i])) ++i;
    if (i >= n) break;
    std::size_t chunk_end = i;
    while (chunk_end < n && !is_space_byte(raw_text[chunk_end])) ++chunk_end;

    std::size_t lo = i;
    std::size_t hi = chunk_end;
    std::vector<Token> trailing;
    while (lo < hi && is_punct_byte(raw_text[lo])) {
      tokens.push_back({std::string(1, raw_text[lo]), lo, lo + 1});
      ++lo;
    }
    while (hi > lo && is_punct_byte(raw_text[hi - 1])) {
      trailing.push_back({std::string(1, raw_text[hi - 1]), hi - 1, hi});
      --hi;
    }
    if (lo < hi) {
      tokens.push_back({std::string(raw_text.substr(lo, hi - lo)), lo, hi});
    }
    tokens.insert(tokens.end(), trailing.rbegin(), trailing.rend());
    i = chunk_end;
  }
  return tokens;
}

// Sentence boundaries: a sentence ends after ".", "!" or "?", absorbing any
// closing brackets that follow and any quotes written flush against the
// previous token.
inline std::vector<TokenSpan> split_sentences(const std::vector<Token>& tokens) {
  auto is_terminal = [](const std::string& t) {
    return t == "." || t == "!" || t == "?";
  };
  auto is_quote = [](const std::string& t) { return t == "\"" || t == "'"; };
  auto is_bracket = [](const std::string& t) {
    return t == ")" || t == "]" || t == "}";
  };
  std::vector<TokenSpan> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (is_terminal(tokens[i].text)) {
      std::size_t end = i + 1;
      while (end < tokens.size()) {
        const Token& t = tokens[end];
        const bool flush = t.char_start == tokens[end - 1].char_end;
        if (is_terminal(t.text) || is_bracket(t.text) ||
            (is_quote(t.text) && flush)) {
          ++end;
        } else {
          break;
        }
      }
      out.push_back({start, end});
      start = end;
      i = end;
    } else {
      ++i;
    }
  }
  if (start < tokens.size()) out.push_back({start, tokens.size()});
  return out;
}

// Builds a document from raw text using the default tokenizer and sentence
// splitter.
inline Document make_document(std::string doc_id, std::string raw_text) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  doc.raw_text = std::move(raw_text);
  doc.tokens = tokenize(doc.raw_text);
  doc.sentence_bounds = split_sentences(doc.tokens);
  return doc;
}

// Builds a document from pre-tokenized sentences. Tokens are joined by one
// space and sentences by a newline.
inline Document make_document(
    std::string doc_id, const std::vector<std::vector<std::string>>& sentences) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  for (const auto& sentence : sentences) {
    if (sentence.empty()) continue;
    if (!doc.raw_text.empty()) doc.raw_text += '\n';
    std::size_t first = doc.tokens.size();
    for (std::size_t k = 0; k < sentence.size(); ++k) {
      const std::string& word = sentence[k];
      if (word.empty() ||
          std::any_of(word.begin(), word.end(), is_space_byte)) {
        throw Error("invalid token '" + word + "' in document " + doc.doc_id);
      }
      if (k > 0) doc.raw_text += ' ';
      std::size_t begin = doc.raw_text.size();
      doc.raw_text += word;
      doc.tokens.push_back({word, begin, doc.raw_text.size()});
    }
    doc.sentence_bounds.push_back({first, doc.tokens.size()});
  }
  return doc;
}

// Checks every Document invariant; throws Error describing the first
// violation.
inline void validate(const Document& doc) {
  const std::string where = "document " + doc.doc_id + ": ";
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const Token& t = doc.tokens[i];
    if (t.char_start >= t.char_end || t.char_end > doc.raw_text.size()) {
      throw Error(where + "token " + std::to_string(i) + " has bad offsets");
    }
    if (i > 0 && t.char_start < prev_end) {
      throw Error(where + "token offsets not increasing at " +
                  std::to_string(i));
    }
    if (doc.raw_text.compare(t.char_start, t.char_end - t.char_start, t.text) !=
        0) {
      throw Error(where + "token " + std::to_string(i) +
                  " text does not match raw text");
    }
    prev_end = t.char_end;
  }
  std::size_t expect = 0;
  for (const TokenSpan& s : doc.sentence_bounds) {
    if (s.start != expect || s.end <= s.start) {
      throw Error(where + "sentence bounds do not partition the tokens");
    }
    expect = s.end;
  }
  if (expect != doc.tokens.size()) {
    throw Error(where + "sentence bounds do not cover all tokens");
  }
}

// Checks the QAInstance invariants against its context document.
inline void validate(const QAInstance& inst, const Document& doc) {
  const std::string where = "instance " + inst.instance_id + ": ";
  if (inst.context_doc_id != doc.doc_id) {
    throw Error(where + "context_doc_id " + inst.context_doc_id +
                " does not name document " + doc.doc_id);
  }
  if (inst.gold_answer.empty()) throw Error(where + "empty gold answer");
  if (*inst.gold_answer.rbegin() >= doc.tokens.size()) {
    throw Error(where + "gold token index " +
                std::to_string(*inst.gold_answer.rbegin()) +
                " out of range for document " + doc.doc_id);
  }
  if (inst.gold_contiguous) {
    const TokenSpan& g = *inst.gold_contiguous;
    if (g.start >= g.end || g.end > doc.tokens.size()) {
      throw Error(where + "gold_contiguous out of range");
    }
    if (g != hull(inst.gold_answer)) {
      throw Error(where + "gold_contiguous is not the hull of gold_answer");
    }
  }
  if (inst.anchor) {
    const TokenSpan& a = *inst.anchor;
    if (a.start >= a.end || a.end > doc.tokens.size()) {
      throw Error(where + "anchor out of range");
    }
  }
  for (std::size_t i = 0; i < inst.question_tokens.size(); ++i) {
    const Token& t = inst.question_tokens[i];
    if (t.char_start >= t.char_end || t.char_end > inst.question_text.size() ||
        inst.question_text.compare(t.char_start, t.char_end - t.char_start,
                                   t.text) != 0 ||
        (i > 0 && t.char_start < inst.question_tokens[i - 1].char_end)) {
      throw Error(where + "question token " + std::to_string(i) +
                  " has bad offsets");
    }
  }
}

// Builds question text and tokens from a sentence of a document, keeping the
// original inter-token spacing. When `marked` is given, standalone <ref> and
// </ref> tokens are inserted around it.
inline std::pair<std::string, std::vector<Token>> sentence_question(
    const Document& doc, const TokenSpan& sentence,
    std::optional<TokenSpan> marked = std::nullopt) {
  std::string text;
  std::vector<Token> tokens;
  auto append = [&](std::string_view word) {
    std::size_t begin = text.size();
    text += word;
    tokens.push_back({std::string(word), begin, text.size()});
  };
  for (std::size_t i = sentence.start; i < sentence.end; ++i) {
    if (i > sentence.start) {
      const Token& prev = doc.tokens[i - 1];
      text += doc.raw_text.substr(prev.char_end,
                                  doc.tokens[i].char_start - prev.char_end);
    }
    if (marked && i == marked->start) {
      append(kRefOpen);
      text += ' ';
    }
    append(doc.tokens[i].text);
    if (marked && i + 1 == marked->end) {
      text += ' ';
      append(kRefClose);
    }
  }
  return {std::move(text), std::move(tokens)};
}

// Direction of an antecedent relative to the question sentence. Inside the
// question sentence, an antecedent starting after the anchor is FORWARD.
inline Direction antecedent_direction(const TokenSpan& question_sentence,
                                      const TokenSpan& answer,
                                      std::optional<std::size_t> anchor_token) {
  if (answer.end <= question_sentence.start) return Direction::kBackward;
  if (answer.start >= question_sentence.end) return Direction::kForward;
  if (anchor_token && answer.start > *anchor_token) return Direction::kForward;
  return Direction::kSameSentence;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace ellqa
