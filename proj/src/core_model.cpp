#include "helix/core_model.hpp"

#include <utility>

namespace helix {

std::uint64_t content_hash(const std::string& content) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : content) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string cap_feedback(std::string feedback) {
  static const std::string marker = "\n[feedback truncated]";
  if (feedback.size() <= kFeedbackCapBytes) return feedback;
  std::size_t cut = kFeedbackCapBytes - marker.size();
  // Back off so a multi-byte UTF-8 sequence is never split.
  while (cut > 0 && (static_cast<unsigned char>(feedback[cut]) & 0xc0) == 0x80) --cut;
  feedback.resize(cut);
  feedback += marker;
  return feedback;
}

std::string sanitize_utf8(const std::string& text) {
  static const char kReplacement[] = "\xef\xbf\xbd";  // U+FFFD
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    if (b0 < 0x80) {
      out.push_back(text[i]);
      ++i;
      continue;
    }
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if ((b0 & 0xe0) == 0xc0) {
      len = 2;
      cp = b0 & 0x1fu;
    } else if ((b0 & 0xf0) == 0xe0) {
      len = 3;
      cp = b0 & 0x0fu;
    } else if ((b0 & 0xf8) == 0xf0) {
      len = 4;
      cp = b0 & 0x07u;
    }
    bool ok = len != 0 && i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto bk = static_cast<unsigned char>(text[i + k]);
      ok = (bk & 0xc0) == 0x80;
      cp = (cp << 6) | (bk & 0x3fu);
    }
    // Overlong forms, surrogate halves and beyond-plane values are invalid
    // even when structurally well-formed.
    if (ok) {
      ok = !(len == 2 && cp < 0x80) && !(len == 3 && cp < 0x800) &&
           !(len == 4 && cp < 0x10000) && !(cp >= 0xd800 && cp <= 0xdfff) && cp <= 0x10ffff;
    }
    if (ok) {
      out.append(text, i, len);
      i += len;
    } else {
      out += kReplacement;
      ++i;
    }
  }
  return out;
}

void LineageStore::insert(SolutionRecord record) {
  if (records_.count(record.id)) {
    throw DuplicateIdError("record id " + std::to_string(record.id) + " already present");
  }
  if (record.parent_id) {
    auto it = records_.find(*record.parent_id);
    if (it == records_.end()) {
      throw DanglingParentError("parent " + std::to_string(*record.parent_id) +
                                " of record " + std::to_string(record.id) + " not in store");
    }
    if (it->second.iteration >= record.iteration) {
      throw DanglingParentError("parent " + std::to_string(*record.parent_id) +
                                " does not precede record " + std::to_string(record.id));
    }
  } else if (record.iteration != 0) {
    throw DanglingParentError("record " + std::to_string(record.id) +
                              " has no parent but iteration != 0");
  }
  // The store only ever holds valid UTF-8, so every record serializes to the
  // event log byte-exactly and replays under the same content hash.
  record.content = sanitize_utf8(record.content);
  record.feedback = cap_feedback(sanitize_utf8(record.feedback));

  const RecordId id = record.id;
  const bool is_root = !record.parent_id.has_value();
  records_.emplace(id, std::move(record));
  order_.push_back(id);
  if (is_root) roots_.push_back(id);
}

const SolutionRecord& LineageStore::get(RecordId id) const {
  auto it = records_.find(id);
  if (it == records_.end()) {
    throw UnknownIdError("no record with id " + std::to_string(id));
  }
  return it->second;
}

SolutionRecord& LineageStore::get_mutable(RecordId id) {
  auto it = records_.find(id);
  if (it == records_.end()) {
    throw UnknownIdError("no record with id " + std::to_string(id));
  }
  return it->second;
}

bool LineageStore::contains(RecordId id) const { return records_.count(id) != 0; }

std::vector<RecordId> ancestor_chain(const LineageStore& store, RecordId id, std::size_t limit) {
  std::vector<RecordId> chain;
  const SolutionRecord* cur = &store.get(id);
  while (chain.size() < limit && cur->parent_id) {
    chain.push_back(*cur->parent_id);
    cur = &store.get(*cur->parent_id);
  }
  return chain;
}

}  // namespace helix
