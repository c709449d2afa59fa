#include <doctest.h>

#include <string>

#include "helix/core_model.hpp"
#include "helix/errors.hpp"

using namespace helix;

namespace {

SolutionRecord make_record(RecordId id, std::optional<RecordId> parent, int iteration) {
  SolutionRecord r;
  r.id = id;
  r.parent_id = parent;
  r.iteration = iteration;
  r.content = "content-" + std::to_string(id);
  r.valid = true;
  return r;
}

}  // namespace

TEST_CASE("content_hash: FNV-1a fixtures") {
  // Pinned offsets of the 64-bit FNV-1a reference implementation.
  CHECK(content_hash("") == 14695981039346656037ull);
  CHECK(content_hash("a") == 12638187200555641996ull);
  CHECK(content_hash("abc") == 16654208175385433931ull);
  CHECK(content_hash("abc") != content_hash("acb"));
}

TEST_CASE("cap_feedback: short feedback passes through") {
  CHECK(cap_feedback("fine") == "fine");
  CHECK(cap_feedback("") == "");
}

TEST_CASE("cap_feedback: oversized feedback is truncated with a marker") {
  const std::string big(kFeedbackCapBytes + 500, 'x');
  const std::string capped = cap_feedback(big);
  CHECK(capped.size() < big.size());
  CHECK(capped.find("[feedback truncated]") != std::string::npos);
  CHECK(capped.substr(0, 10) == big.substr(0, 10));
}

TEST_CASE("cap_feedback: never splits a UTF-8 sequence") {
  std::string big;
  while (big.size() < kFeedbackCapBytes + 8) big += "\xE2\x82\xAC";  // 3-byte euro sign
  const std::string capped = cap_feedback(big);
  const std::string body = capped.substr(0, capped.find('\n'));
  CHECK(body.size() % 3 == 0);  // only whole code points survive
}

TEST_CASE("sanitize_utf8: valid text passes through untouched") {
  CHECK(sanitize_utf8("") == "");
  CHECK(sanitize_utf8("plain ascii") == "plain ascii");
  const std::string mixed = "caf\xC3\xA9 \xE2\x82\xAC \xF0\x9F\x9A\x80";  // é € rocket
  CHECK(sanitize_utf8(mixed) == mixed);
}

TEST_CASE("sanitize_utf8: invalid bytes become replacement characters") {
  const std::string replacement = "\xEF\xBF\xBD";
  CHECK(sanitize_utf8("a\xFF b") == "a" + replacement + " b");
  CHECK(sanitize_utf8("\x80") == replacement);                 // stray continuation
  CHECK(sanitize_utf8("\xE2\x82") == replacement + replacement);  // truncated sequence
  CHECK(sanitize_utf8("\xC0\xAF") == replacement + replacement);  // overlong '/'
  CHECK(sanitize_utf8("\xED\xA0\x80") ==
        replacement + replacement + replacement);  // surrogate half
}

TEST_CASE("sanitize_utf8: idempotent") {
  const std::string dirty = "x\xFF\xE2\x82 y\xED\xA0\x80 z\xF0\x9F\x9A\x80";
  const std::string once = sanitize_utf8(dirty);
  CHECK(sanitize_utf8(once) == once);
}

TEST_CASE("LineageStore: insert and lookup") {
  LineageStore store;
  store.insert(make_record(1, std::nullopt, 0));
  store.insert(make_record(2, 1, 1));
  CHECK(store.size() == 2);
  CHECK(store.contains(1));
  CHECK(!store.contains(3));
  CHECK(store.get(2).parent_id == RecordId{1});
  CHECK(store.roots().size() == 1);
  CHECK(store.roots()[0] == 1);
}

TEST_CASE("LineageStore: rejects duplicate ids") {
  LineageStore store;
  store.insert(make_record(1, std::nullopt, 0));
  CHECK_THROWS_AS(store.insert(make_record(1, std::nullopt, 0)), DuplicateIdError);
}

TEST_CASE("LineageStore: rejects dangling parents") {
  LineageStore store;
  CHECK_THROWS_AS(store.insert(make_record(2, 99, 1)), DanglingParentError);
}

TEST_CASE("LineageStore: a child never precedes its parent in time") {
  LineageStore store;
  store.insert(make_record(1, std::nullopt, 0));
  store.insert(make_record(2, 1, 3));
  CHECK_THROWS_AS(store.insert(make_record(3, 2, 3)), Error);   // same iteration
  CHECK_THROWS_AS(store.insert(make_record(4, 2, 1)), Error);   // earlier
  store.insert(make_record(5, 2, 4));
}

TEST_CASE("LineageStore: roots must sit at iteration zero") {
  LineageStore store;
  CHECK_THROWS_AS(store.insert(make_record(1, std::nullopt, 2)), Error);
}

TEST_CASE("LineageStore: unknown id lookups throw") {
  LineageStore store;
  CHECK_THROWS_AS(store.get(5), UnknownIdError);
  CHECK_THROWS_AS(store.get_mutable(5), UnknownIdError);
}

TEST_CASE("LineageStore: feedback capped on insert") {
  LineageStore store;
  SolutionRecord r = make_record(1, std::nullopt, 0);
  r.feedback = std::string(kFeedbackCapBytes * 2, 'y');
  store.insert(std::move(r));
  CHECK(store.get(1).feedback.size() <= kFeedbackCapBytes + 64);
}

TEST_CASE("LineageStore: stored text is always valid UTF-8") {
  LineageStore store;
  SolutionRecord r = make_record(1, std::nullopt, 0);
  r.content = "genome \xFF bytes";
  r.feedback = "note \xE2\x82";
  store.insert(std::move(r));
  CHECK(store.get(1).content == std::string("genome \xEF\xBF\xBD bytes"));
  CHECK(store.get(1).feedback == std::string("note \xEF\xBF\xBD\xEF\xBF\xBD"));
}

TEST_CASE("LineageStore: insertion order is preserved") {
  LineageStore store;
  store.insert(make_record(5, std::nullopt, 0));
  store.insert(make_record(2, std::nullopt, 0));
  store.insert(make_record(9, 5, 1));
  const std::vector<RecordId> expect{5, 2, 9};
  CHECK(store.ids_in_insertion_order() == expect);
}

TEST_CASE("ancestor_chain: nearest first, capped by limit") {
  LineageStore store;
  store.insert(make_record(1, std::nullopt, 0));
  store.insert(make_record(2, 1, 1));
  store.insert(make_record(3, 2, 2));
  store.insert(make_record(4, 3, 3));

  const std::vector<RecordId> full{3, 2, 1};
  CHECK(ancestor_chain(store, 4, 10) == full);

  const std::vector<RecordId> two{3, 2};
  CHECK(ancestor_chain(store, 4, 2) == two);

  CHECK(ancestor_chain(store, 1, 10).empty());
  CHECK(ancestor_chain(store, 4, 0).empty());
}

TEST_CASE("ancestor_chain: unknown start id throws") {
  LineageStore store;
  CHECK_THROWS_AS(ancestor_chain(store, 42, 3), UnknownIdError);
}
