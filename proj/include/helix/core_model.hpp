#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "helix/errors.hpp"

namespace helix {

using RecordId = std::uint64_t;

// Position of a rollout inside its iteration: (batch index, rollout index).
struct GroupKey {
  int batch = 0;
  int rollout = 0;
};

inline constexpr std::size_t kFeedbackCapBytes = 16 * 1024;

// One candidate solution plus everything selection and prompting need to
// know about it. Roots (iteration 0) have no parent and no group key.
struct SolutionRecord {
  RecordId id = 0;
  std::optional<RecordId> parent_id;
  int iteration = 0;
  std::string content;
  double reward = 0.0;
  bool valid = false;
  std::string feedback;
  std::optional<Eigen::VectorXd> embedding;
  std::optional<double> diversity;
  std::string mutator_tag;
  std::optional<GroupKey> group_key;
};

// FNV-1a, 64 bit. Stable across platforms; hash of "" is the offset basis.
std::uint64_t content_hash(const std::string& content);

// Truncates at a UTF-8 boundary and appends a marker when over the cap.
std::string cap_feedback(std::string feedback);

// Replaces every invalid UTF-8 byte with U+FFFD. Idempotent; valid input
// passes through untouched, so stored text always serializes byte-exactly.
std::string sanitize_utf8(const std::string& text);

// Append-only id-keyed store. Insertion order is the dataset order used
// everywhere a deterministic ordering is needed.
class LineageStore {
 public:
  // Enforces: unique id, parent exists, parent.iteration < record.iteration,
  // roots at iteration 0. Feedback is capped on the way in.
  void insert(SolutionRecord record);

  const SolutionRecord& get(RecordId id) const;
  SolutionRecord& get_mutable(RecordId id);
  bool contains(RecordId id) const;

  std::size_t size() const { return order_.size(); }
  const std::vector<RecordId>& ids_in_insertion_order() const { return order_; }
  const std::vector<RecordId>& roots() const { return roots_; }

 private:
  std::unordered_map<RecordId, SolutionRecord> records_;
  std::vector<RecordId> order_;
  std::vector<RecordId> roots_;
};

// Ancestors of `id`, nearest first (parent, grandparent, ...), at most
// `limit` of them. The record itself is not included.
std::vector<RecordId> ancestor_chain(const LineageStore& store, RecordId id, std::size_t limit);

// Current population: ids are a subset of the store, capped at capacity.
struct Population {
  std::vector<RecordId> member_ids;
  std::size_t capacity = 0;
};

}  // namespace helix
