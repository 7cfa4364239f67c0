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

#include <doctest.h>

#include "crag/redaction.hpp"
#include "support/tmpdir.hpp"

using namespace crag;

namespace {

// Fixture rules with hand-verified expected outputs. The name pattern is
// anchored to known first names so the expected text can be written down
// exactly.
std::vector<RedactionRule> fixture_rules() {
  return {
      {"name", "(John|Jane) [[:upper:]][[:lower:]]+", "[NAME]"},
      {"phone", "[[:digit:]]{3}-[[:digit:]]{4}", "[PHONE]"},
  };
}

CommunityRecord private_record(RecordId id, std::string text) {
  return {id, std::move(text), Visibility::Private, "alice"};
}

}  // namespace

TEST_CASE("fixture document redacts to the expected text") {
  Redactor r = compile_rules(fixture_rules());
  std::vector<std::pair<std::string, std::size_t>> hits;
  std::string out = r.apply("Call John Smith at 555-0100", &hits);
  CHECK(out == "Call [NAME] at [PHONE]");
  REQUIRE(hits.size() == 2);
  CHECK(hits[0] == std::pair<std::string, std::size_t>{"name", 1});
  CHECK(hits[1] == std::pair<std::string, std::size_t>{"phone", 1});
}

TEST_CASE("text without matches passes through untouched") {
  Redactor r = compile_rules(fixture_rules());
  std::vector<std::pair<std::string, std::size_t>> hits;
  std::string text = "the library opens at nine";
  CHECK(r.apply(text, &hits) == text);
  CHECK(hits.empty());
}

TEST_CASE("redaction output has no residual matches") {
  Redactor r = compile_rules(fixture_rules());
  for (const char* doc : {"Call John Smith at 555-0100",
                          "Jane Doe, Jane Roe and John Smith: 555-0100, 555-0199",
                          "nothing sensitive here"}) {
    std::string out = r.apply(doc);
    CHECK(r.first_residual_match(out) == std::nullopt);
  }
}

TEST_CASE("redaction is idempotent") {
  Redactor r = compile_rules(fixture_rules());
  for (const char* doc : {"Call John Smith at 555-0100",
                          "John Smith met Jane Doe", "already [NAME] clean"}) {
    std::string once = r.apply(doc);
    CHECK(r.apply(once) == once);
  }
}

TEST_CASE("empty rule list is the identity transform") {
  Redactor r = compile_rules({});
  CHECK(r.rule_count() == 0);
  std::string text = "Call John Smith at 555-0100";
  CHECK(r.apply(text) == text);
}

TEST_CASE("rules apply in list order") {
  // Rule order changes the outcome when patterns overlap: this is the
  // documented order-sensitivity of sequential application.
  std::vector<RedactionRule> ab = {
      {"long", "foo bar", "[L]"},
      {"short", "bar", "[S]"},
  };
  std::vector<RedactionRule> ba = {
      {"short", "bar", "[S]"},
      {"long", "foo bar", "[L]"},
  };
  CHECK(compile_rules(ab).apply("foo bar") == "[L]");
  CHECK(compile_rules(ba).apply("foo bar") == "foo [S]");
}

TEST_CASE("matching is leftmost longest") {
  // POSIX alternation takes the longest match, not the first alternative.
  Redactor r = compile_rules({{"alt", "ab|abc", "[X]"}});
  CHECK(r.apply("abc") == "[X]");
  Redactor r2 = compile_rules({{"rep", "a+", "[A]"}});
  CHECK(r2.apply("caaab") == "c[A]b");
}

TEST_CASE("multiple matches of one rule are all replaced and counted") {
  Redactor r = compile_rules(fixture_rules());
  std::vector<std::pair<std::string, std::size_t>> hits;
  std::string out = r.apply("555-0100 or 555-0199 or 555-0142", &hits);
  CHECK(out == "[PHONE] or [PHONE] or [PHONE]");
  REQUIRE(hits.size() == 1);
  CHECK(hits[0] == std::pair<std::string, std::size_t>{"phone", 3});
}

TEST_CASE("compile rejects duplicate rule names") {
  CHECK_THROWS_AS(compile_rules({{"x", "a+", "[A]"}, {"x", "b+", "[B]"}}), Error);
}

TEST_CASE("compile rejects invalid patterns and names the rule") {
  CHECK_THROWS_WITH_AS(compile_rules({{"broken", "(", "[T]"}}),
                       doctest::Contains("broken"), Error);
}

TEST_CASE("compile rejects patterns that match the empty string") {
  CHECK_THROWS_AS(compile_rules({{"empty", "a*", "[A]"}}), Error);
}

TEST_CASE("compile rejects rules whose tags other rules would re-match") {
  // A tag that a pattern matches would make redaction non-idempotent.
  CHECK_THROWS_AS(compile_rules({{"shouty", "[[:upper:]]{3,}", "[LOUD]"}}), Error);
  CHECK_THROWS_AS(
      compile_rules({{"a", "x+", "[ZZZ]"}, {"z", "Z+", "[Q]"}}), Error);
}

TEST_CASE("redact_record fills the safe record") {
  Redactor r = compile_rules(fixture_rules());
  CommunityRecord rec = private_record(42, "Call John Smith at 555-0100");
  SafeRecord safe = redact_record(r, rec);
  CHECK(safe.record_id == 42);
  CHECK(safe.redacted_text == "Call [NAME] at [PHONE]");
  CHECK(safe.source_digest == digest("Call John Smith at 555-0100"));
  CHECK(safe.rule_hits.size() == 2);
}

TEST_CASE("redact_record requires a private record") {
  Redactor r = compile_rules(fixture_rules());
  CommunityRecord open{1, "text", Visibility::Open, "alice"};
  CHECK_THROWS_AS(redact_record(r, open), Error);
}

TEST_CASE("batch sanitize preserves order and matches element-wise redaction") {
  Redactor r = compile_rules(fixture_rules());
  std::vector<CommunityRecord> records = {
      private_record(1, "John Smith called"),
      private_record(2, "nothing here"),
      private_record(3, "dial 555-0100 now"),
  };
  std::vector<SafeRecord> batch = batch_sanitize(r, records);
  REQUIRE(batch.size() == 3);
  for (std::size_t i = 0; i < records.size(); ++i) {
    SafeRecord single = redact_record(r, records[i]);
    CHECK(batch[i].record_id == records[i].record_id);
    CHECK(batch[i].redacted_text == single.redacted_text);
    CHECK(batch[i].source_digest == single.source_digest);
  }
  CHECK(batch_sanitize(r, {}).empty());
}

TEST_CASE("default rule pack compiles and scrubs common identifier shapes") {
  Redactor r = compile_rules(default_rule_pack());
  std::string out = r.apply(
      "Reach Alice Cooper at alice@example.org, 555-123-4567, SSN 123-45-6789.");
  CHECK(out.find("alice@example.org") == std::string::npos);
  CHECK(out.find("555-123-4567") == std::string::npos);
  CHECK(out.find("123-45-6789") == std::string::npos);
  CHECK(out.find("Alice Cooper") == std::string::npos);
  CHECK(out.find("[EMAIL]") != std::string::npos);
  CHECK(out.find("[PHONE]") != std::string::npos);
  CHECK(r.first_residual_match(out) == std::nullopt);
  // Idempotent on its own output.
  CHECK(r.apply(out) == out);
}

TEST_CASE("rules file round trip") {
  test::TempDir dir;
  std::string path = dir.file("rules.tsv");
  std::vector<RedactionRule> rules = fixture_rules();
  save_rules_file(path, rules);
  std::vector<RedactionRule> back = load_rules_file(path);
  REQUIRE(back.size() == rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) {
    CHECK(back[i].name == rules[i].name);
    CHECK(back[i].pattern == rules[i].pattern);
    CHECK(back[i].replacement_tag == rules[i].replacement_tag);
  }
  Redactor r = compile_rules(back);
  CHECK(r.apply("Call John Smith at 555-0100") == "Call [NAME] at [PHONE]");
}

TEST_CASE("rules parser rejects malformed lines") {
  CHECK_THROWS_AS(parse_rules_text("name-only-no-tabs\n"), Error);
  CHECK_THROWS_AS(parse_rules_text("name\tpattern\n"), Error);
  // Comments and blank lines are skipped.
  auto rules = parse_rules_text("# comment\n\nname\t(John) X\t[NAME]\n");
  REQUIRE(rules.size() == 1);
  CHECK(rules[0].name == "name");
}

TEST_CASE("loading a missing rules file fails") {
  CHECK_THROWS_AS(load_rules_file("/nonexistent/rules.tsv"), Error);
}
