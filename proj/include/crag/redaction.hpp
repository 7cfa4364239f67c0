// Copyright 2026 The crag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fstream>
#include <regex>
#include <sstream>
#include <utility>

#include "crag/records.hpp"

// Rule-based redaction producing the privacy-enhanced retrieval view of
// private records. Runs inside the enclave boundary; the redacted text is
// what gets embedded and stored for retrieval.
//
// Patterns are POSIX extended regular expressions. That grammar is chosen for
// its matching discipline: overlapping candidates resolve leftmost-longest,
// which keeps redaction deterministic and order-explainable.

namespace crag {

struct RedactionRule {
  std::string name;
  std::string pattern;
  std::string replacement_tag;
};

struct SafeRecord {
  RecordId record_id = 0;
  std::string redacted_text;
  std::vector<std::pair<std::string, std::size_t>> rule_hits;
  Digest source_digest;
};

class Redactor {
 public:
  std::size_t rule_count() const { return compiled_.size(); }

  const std::vector<RedactionRule>& rules() const { return rules_; }

  // Applies every rule in list order; returns the rewritten text and, when
  // hits is non-null, appends (rule name, count) for each rule that matched.
  std::string apply(const std::string& text,
                    std::vector<std::pair<std::string, std::size_t>>* hits = nullptr) const {
    std::string current = text;
    for (std::size_t i = 0; i < compiled_.size(); ++i) {
      std::size_t count = 0;
      std::string next;
      auto begin = std::sregex_iterator(current.begin(), current.end(), compiled_[i]);
      auto end = std::sregex_iterator();
      std::size_t last = 0;
      for (auto it = begin; it != end; ++it) {
        next.append(current, last, static_cast<std::size_t>(it->position()) - last);
        next.append(rules_[i].replacement_tag);
        last = static_cast<std::size_t>(it->position() + it->length());
        ++count;
      }
      next.append(current, last, current.size() - last);
      current = std::move(next);
      if (count > 0 && hits) hits->emplace_back(rules_[i].name, count);
    }
    return current;
  }

  // Name of the first rule still matching the text, if any. The redaction
  // postcondition is that this returns nothing for any redactor output.
  std::optional<std::string> first_residual_match(const std::string& text) const {
    for (std::size_t i = 0; i < compiled_.size(); ++i) {
      if (std::regex_search(text, compiled_[i])) return rules_[i].name;
    }
    return std::nullopt;
  }

 private:
  friend Redactor compile_rules(std::vector<RedactionRule> rules);
  std::vector<RedactionRule> rules_;
  std::vector<std::regex> compiled_;
};

// Compiles a rule list into an immutable Redactor. Beyond syntax, this
// enforces what the zero-match postcondition needs structurally: no pattern
// may match the empty string, and no pattern may match inside any rule's
// replacement tag (its own or another's), so inserted tags are inert under
// every rule and redaction is idempotent.
inline Redactor compile_rules(std::vector<RedactionRule> rules) {
  Redactor r;
  for (const auto& rule : rules) {
    if (rule.name.empty()) throw Error("redaction rule with empty name");
    for (const auto& prior : r.rules_) {
      if (prior.name == rule.name) throw Error("duplicate redaction rule name: " + rule.name);
    }
    std::regex re;
    try {
      re.assign(rule.pattern, std::regex::extended | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw Error("rule '" + rule.name + "' failed to compile: " + e.what());
    }
    if (std::regex_search(std::string{}, re))
      throw Error("rule '" + rule.name + "' matches the empty string");
    r.rules_.push_back(rule);
    r.compiled_.push_back(std::move(re));
  }
  for (const auto& rule : r.rules_) {
    for (std::size_t i = 0; i < r.compiled_.size(); ++i) {
      if (std::regex_search(rule.replacement_tag, r.compiled_[i]))
        throw Error("tag of rule '" + rule.name + "' is matched by rule '" + r.rules_[i].name +
                    "'");
    }
  }
  return r;
}

inline SafeRecord redact_record(const Redactor& redactor, const CommunityRecord& record) {
  if (record.visibility != Visibility::Private)
    throw Error("redact_record requires a private record");
  SafeRecord safe;
  safe.record_id = record.record_id;
  safe.source_digest = digest(record.text);
  safe.redacted_text = redactor.apply(record.text, &safe.rule_hits);
  return safe;
}

inline std::vector<SafeRecord> batch_sanitize(const Redactor& redactor,
                                              const std::vector<CommunityRecord>& records) {
  std::vector<SafeRecord> out;
  out.reserve(records.size());
  for (const auto& rec : records) out.push_back(redact_record(redactor, rec));
  return out;
}

// Demo rule pack: a heuristic, not a privacy guarantee. Tags are uppercase
// bracketed labels, which no pack pattern can match even partially.
inline std::vector<RedactionRule> default_rule_pack() {
  return {
      {"name", "[[:upper:]][[:lower:]]+ [[:upper:]][[:lower:]]+", "[NAME]"},
      {"phone", "([[:digit:]]{3}[-.])?[[:digit:]]{3}[-.][[:digit:]]{4}", "[PHONE]"},
      {"email", "[[:alnum:]._%+-]+@[[:alnum:].-]+\\.[[:alpha:]]{2,}", "[EMAIL]"},
      {"id", "[[:digit:]]{3}-[[:digit:]]{2}-[[:digit:]]{4}", "[ID]"},
  };
}

// Rules format: one rule per line, tab-separated name, pattern, tag. Blank
// lines and lines starting with '#' are skipped.
inline std::vector<RedactionRule> parse_rules_stream(std::istream& in) {
  std::vector<RedactionRule> rules;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw Error("rules line " + std::to_string(lineno) +
                  ": expected name<TAB>pattern<TAB>tag");
    rules.push_back({line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)});
  }
  return rules;
}

inline std::vector<RedactionRule> parse_rules_text(const std::string& text) {
  std::istringstream in(text);
  return parse_rules_stream(in);
}

inline std::vector<RedactionRule> load_rules_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rules file: " + path);
  return parse_rules_stream(in);
}

inline void save_rules_file(const std::string& path, const std::vector<RedactionRule>& rules) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write rules file: " + path);
  for (const auto& r : rules) out << r.name << '\t' << r.pattern << '\t' << r.replacement_tag << '\n';
}

}  // namespace crag
