#pragma once

#include <string>
#include <vector>

#include "helix/core_model.hpp"

namespace helix {

// Mutation prompts are assembled from these pieces. entry_format may use the
// placeholders {status}, {content}, {reward} and {feedback}; ancestor_marker
// may use {k} (1-based, nearest ancestor first).
struct PromptTemplate {
  std::string system_preamble;
  std::string problem_description;
  std::string entry_format;
  std::string current_marker;
  std::string ancestor_marker;
  bool include_ancestor_feedback = true;
};

struct PromptBundle {
  std::string text;
  // Current solution first, then ancestors nearest-first, in the order their
  // blocks appear in the text.
  std::vector<RecordId> included_ids;
  std::size_t char_count = 0;
};

// Fixed-width significant-digit formatting (trailing zeros kept).
std::string format_significant(double value, int digits);

// Roots read "Initial Program"; everything else carries reward to six
// significant digits plus validity.
std::string render_status(const SolutionRecord& record);

// Deterministic assembly under a character budget: over budget, the farthest
// ancestors are dropped first, then the current solution's feedback is
// truncated. Content is never cut; if the current block alone cannot fit,
// the budget is a configuration fault.
PromptBundle construct_prompt(const PromptTemplate& tpl, const LineageStore& store,
                              RecordId solution_id, std::size_t n_ancestors,
                              std::size_t char_budget);

enum class MutationMode { kDiff, kFullAnswer };

// Built-in templates per task kind ("circle-packing", "function-min",
// "symbolic-regression", anything else gets a generic one). The mode picks
// the response-format instructions.
PromptTemplate default_template(const std::string& task_kind, MutationMode mode);

// Template files are plain text split into %%section%% blocks: system,
// problem, entry, current_marker, ancestor_marker, ancestor_feedback.
PromptTemplate load_template_file(const std::string& path);

}  // namespace helix
