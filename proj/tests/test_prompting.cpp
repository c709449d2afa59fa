#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "helix/prompting.hpp"

using namespace helix;

namespace {

SolutionRecord record(RecordId id, std::optional<RecordId> parent, int iteration,
                      std::string content, double reward, bool valid, std::string feedback) {
  SolutionRecord r;
  r.id = id;
  r.parent_id = parent;
  r.iteration = iteration;
  r.content = std::move(content);
  r.reward = reward;
  r.valid = valid;
  r.feedback = std::move(feedback);
  return r;
}

// root(1) <- mid(2) <- leaf(3)
LineageStore three_generation_store() {
  LineageStore store;
  store.insert(record(1, std::nullopt, 0, "root content", 0.25, true, "root feedback"));
  store.insert(record(2, 1, 1, "mid content", 0.5, true, "mid feedback"));
  store.insert(record(3, 2, 2, "leaf content", 0.75, false, "leaf feedback"));
  return store;
}

PromptTemplate bare_template() {
  PromptTemplate tpl;
  tpl.system_preamble = "SYS";
  tpl.problem_description = "PROBLEM";
  tpl.entry_format = "[{status}]\n{content}\n<{feedback}>";
  tpl.current_marker = "CURRENT";
  tpl.ancestor_marker = "ANCESTOR {k}";
  return tpl;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& text) {
    path = std::string("/tmp/helix_tpl_") + std::to_string(reinterpret_cast<std::uintptr_t>(this)) +
           ".txt";
    std::ofstream out(path);
    out << text;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("format_significant: fixed significant digits, trailing zeros kept") {
  CHECK(format_significant(0.5, 6) == "0.500000");
  CHECK(format_significant(123.456789, 6) == "123.457");
  CHECK(format_significant(-1.0, 6) == "-1.00000");
  CHECK(format_significant(0.75, 3) == "0.750");
}

TEST_CASE("render_status: roots versus scored records") {
  LineageStore store = three_generation_store();
  CHECK(render_status(store.get(1)) == "Initial Program");
  const std::string mid = render_status(store.get(2));
  CHECK(mid.find("Reward: 0.500000") != std::string::npos);
  CHECK(mid.find("Valid: yes") != std::string::npos);
  const std::string leaf = render_status(store.get(3));
  CHECK(leaf.find("Reward: 0.750000") != std::string::npos);
  CHECK(leaf.find("Valid: no") != std::string::npos);
}

TEST_CASE("construct_prompt: block order is current first, ancestors nearest-first") {
  const LineageStore store = three_generation_store();
  const PromptBundle b = construct_prompt(bare_template(), store, 3, 5, 100000);

  REQUIRE(b.included_ids == std::vector<RecordId>{3, 2, 1});
  CHECK(b.char_count == b.text.size());

  const auto pos_sys = b.text.find("SYS");
  const auto pos_problem = b.text.find("PROBLEM");
  const auto pos_current = b.text.find("CURRENT");
  const auto pos_leaf = b.text.find("leaf content");
  const auto pos_a1 = b.text.find("ANCESTOR 1");
  const auto pos_mid = b.text.find("mid content");
  const auto pos_a2 = b.text.find("ANCESTOR 2");
  const auto pos_root = b.text.find("root content");
  REQUIRE(pos_sys != std::string::npos);
  REQUIRE(pos_problem != std::string::npos);
  REQUIRE(pos_current != std::string::npos);
  REQUIRE(pos_a1 != std::string::npos);
  REQUIRE(pos_a2 != std::string::npos);
  CHECK(pos_sys < pos_problem);
  CHECK(pos_problem < pos_current);
  CHECK(pos_current < pos_leaf);
  CHECK(pos_leaf < pos_a1);
  CHECK(pos_a1 < pos_mid);
  CHECK(pos_mid < pos_a2);
  CHECK(pos_a2 < pos_root);
  // The ancestor marker numbers from nearest (1) outward.
  CHECK(b.text.find("ANCESTOR 1") < b.text.find("mid content"));
  CHECK(b.text.find("ANCESTOR 2") < b.text.find("root content"));
}

TEST_CASE("construct_prompt: n_ancestors limits the chain") {
  const LineageStore store = three_generation_store();
  const PromptBundle b = construct_prompt(bare_template(), store, 3, 1, 100000);
  CHECK(b.included_ids == std::vector<RecordId>{3, 2});
  CHECK(b.text.find("root content") == std::string::npos);

  const PromptBundle none = construct_prompt(bare_template(), store, 3, 0, 100000);
  CHECK(none.included_ids == std::vector<RecordId>{3});
}

TEST_CASE("construct_prompt: over budget, farthest ancestors drop first") {
  const LineageStore store = three_generation_store();
  const PromptBundle full = construct_prompt(bare_template(), store, 3, 5, 100000);
  REQUIRE(full.included_ids.size() == 3);

  // Shrink the budget just below the full size: the root goes first.
  const PromptBundle minus_one =
      construct_prompt(bare_template(), store, 3, 5, full.char_count - 1);
  CHECK(minus_one.included_ids == std::vector<RecordId>{3, 2});
  CHECK(minus_one.char_count <= full.char_count - 1);
  CHECK(minus_one.text.find("root content") == std::string::npos);

  const PromptBundle only_current =
      construct_prompt(bare_template(), store, 3, 5, minus_one.char_count - 1);
  CHECK(only_current.included_ids == std::vector<RecordId>{3});
}

TEST_CASE("construct_prompt: current feedback is truncated before failing") {
  LineageStore store;
  store.insert(record(1, std::nullopt, 0, "tiny", 0.0, true, std::string(2000, 'f')));
  const PromptBundle full = construct_prompt(bare_template(), store, 1, 0, 100000);
  REQUIRE(full.char_count > 1500);

  const std::size_t budget = full.char_count - 1000;
  const PromptBundle cut = construct_prompt(bare_template(), store, 1, 0, budget);
  CHECK(cut.char_count <= budget);
  CHECK(cut.included_ids == std::vector<RecordId>{1});
  CHECK(cut.text.find("tiny") != std::string::npos);  // content survives intact
}

TEST_CASE("construct_prompt: feedback truncation lands on a UTF-8 boundary") {
  // Feedback of 3-byte glyphs; any cut point inside a glyph would emit a
  // dangling continuation byte.
  std::string glyphs;
  for (int i = 0; i < 600; ++i) glyphs += "\xE2\x98\x83";  // snowman
  LineageStore store;
  store.insert(record(1, std::nullopt, 0, "x", 0.0, true, glyphs));

  const PromptBundle full = construct_prompt(bare_template(), store, 1, 0, 100000);
  for (std::size_t budget = full.char_count - 40; budget < full.char_count; ++budget) {
    const PromptBundle cut = construct_prompt(bare_template(), store, 1, 0, budget);
    CHECK(cut.char_count <= budget);
    // No byte sequence may end mid-glyph: scan for a continuation byte whose
    // predecessor chain has no lead byte.
    const std::string& t = cut.text;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto b = static_cast<unsigned char>(t[i]);
      if (b == 0xE2) {
        REQUIRE(i + 2 < t.size());
        CHECK(static_cast<unsigned char>(t[i + 1]) == 0x98);
        CHECK(static_cast<unsigned char>(t[i + 2]) == 0x83);
        i += 2;
      }
    }
  }
}

TEST_CASE("construct_prompt: budget too small for the bare current block throws") {
  const LineageStore store = three_generation_store();
  CHECK_THROWS_AS(construct_prompt(bare_template(), store, 3, 5, 10), BudgetTooSmallError);
}

TEST_CASE("construct_prompt: placeholders in record text are not re-expanded") {
  LineageStore store;
  store.insert(record(1, std::nullopt, 0, "content with {feedback} inside", 0.0, true,
                      "feedback with {content} inside"));
  const PromptBundle b = construct_prompt(bare_template(), store, 1, 0, 100000);
  CHECK(b.text.find("content with {feedback} inside") != std::string::npos);
  CHECK(b.text.find("feedback with {content} inside") != std::string::npos);
}

TEST_CASE("construct_prompt: ancestor feedback can be omitted") {
  PromptTemplate tpl = bare_template();
  tpl.include_ancestor_feedback = false;
  const LineageStore store = three_generation_store();
  const PromptBundle b = construct_prompt(tpl, store, 3, 5, 100000);
  CHECK(b.text.find("leaf feedback") != std::string::npos);
  CHECK(b.text.find("mid feedback") == std::string::npos);
  CHECK(b.text.find("root feedback") == std::string::npos);
}

TEST_CASE("default_template: per-task wording and response-mode instructions") {
  const PromptTemplate packing = default_template("circle-packing", MutationMode::kDiff);
  CHECK(packing.system_preamble.find("circle") != std::string::npos);
  CHECK(packing.system_preamble.find("SEARCH") != std::string::npos);
  CHECK(packing.system_preamble.find("REPLACE") != std::string::npos);

  const PromptTemplate fmin = default_template("function-min", MutationMode::kFullAnswer);
  CHECK(fmin.system_preamble.find("minim") != std::string::npos);
  CHECK(fmin.system_preamble.find("fenced") != std::string::npos);
  CHECK(fmin.system_preamble.find("SEARCH") == std::string::npos);

  const PromptTemplate sr = default_template("symbolic-regression", MutationMode::kFullAnswer);
  CHECK(sr.system_preamble.find("expression") != std::string::npos);

  const PromptTemplate generic = default_template("anything-else", MutationMode::kDiff);
  CHECK_FALSE(generic.system_preamble.empty());
  CHECK_FALSE(generic.entry_format.empty());
  // Every built-in entry block exposes content and feedback to the model.
  for (const auto* tpl : {&packing, &fmin, &sr, &generic}) {
    CHECK(tpl->entry_format.find("{content}") != std::string::npos);
    CHECK(tpl->entry_format.find("{feedback}") != std::string::npos);
    CHECK(tpl->entry_format.find("{status}") != std::string::npos);
  }
}

TEST_CASE("load_template_file: sections map onto the template fields") {
  TempFile f(
      "%%system%%\nSYS TEXT\n"
      "%%problem%%\nPROBLEM TEXT\n"
      "%%entry%%\n{status}:{content}:{feedback}\n"
      "%%current_marker%%\nNOW\n"
      "%%ancestor_marker%%\nBACK {k}\n"
      "%%ancestor_feedback%%\nfalse\n");
  const PromptTemplate tpl = load_template_file(f.path);
  CHECK(tpl.system_preamble == "SYS TEXT");
  CHECK(tpl.problem_description == "PROBLEM TEXT");
  CHECK(tpl.entry_format == "{status}:{content}:{feedback}");
  CHECK(tpl.current_marker == "NOW");
  CHECK(tpl.ancestor_marker == "BACK {k}");
  CHECK_FALSE(tpl.include_ancestor_feedback);
}

TEST_CASE("load_template_file: unknown section or missing file is a fault") {
  TempFile f("%%system%%\nSYS\n%%bogus%%\nX\n");
  CHECK_THROWS_AS(load_template_file(f.path), ConfigError);
  TempFile headless("no section header\n");
  CHECK_THROWS_AS(load_template_file(headless.path), ConfigError);
  CHECK_THROWS_AS(load_template_file("/tmp/definitely_missing_template.txt"), IoError);
}
