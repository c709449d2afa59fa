#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "helix/core_model.hpp"
#include "helix/diversity.hpp"
#include "helix/prompting.hpp"

namespace helix {

struct DiffBlock {
  std::string search;
  std::string replace;
};

// Removes <think>...</think> spans; an unclosed opener swallows the rest.
std::string strip_think_tags(const std::string& text);

// Extracts search/replace blocks. Prose and think-tag content around the
// blocks is ignored; an opener without its full terminator sequence is a
// MalformedDiffError, as is an empty SEARCH section.
std::vector<DiffBlock> parse_diff(const std::string& response);

// Applies blocks in order, each replacing the first exact occurrence of its
// search text. A miss throws SearchNotFoundError carrying the block index.
std::string apply_diff(const std::string& content, const std::vector<DiffBlock>& blocks);

// Body of the last fenced code block with the given language tag (any
// language when the tag is empty); nullopt when there is none.
std::optional<std::string> parse_full_answer(const std::string& response,
                                             const std::string& fence_language);

struct LlmEndpointConfig {
  std::string endpoint;  // empty falls back to HELIX_LLM_URL
  std::string api_key;   // empty falls back to HELIX_LLM_KEY
  std::string model;
  double temperature = 1.0;
  double top_p = 0.95;
  int max_tokens = 4096;
  int retries = 2;
  double backoff_initial_ms = 250.0;
  MutationMode mode = MutationMode::kDiff;
  std::string fence_language;
};

struct MutationOutcome {
  bool parse_ok = false;
  std::string content;         // only meaningful when parse_ok
  std::string failure_reason;  // only meaningful when !parse_ok
  std::string raw_response;
};

// Chat-completions transport; injectable so tests run without a server.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  // Returns the raw response body. Throws EndpointUnavailableError once the
  // configured retries are exhausted.
  virtual std::string complete(const std::string& request_body) = 0;
};

std::unique_ptr<ChatTransport> make_http_chat_transport(const LlmEndpointConfig& config,
                                                        std::shared_ptr<HttpPoster> poster);

// One mutation round trip: request, strip think tags, then either parse and
// apply a diff or take the last fenced block, per config.mode. Parse and
// apply failures are outcomes, not exceptions; only transport exhaustion
// escapes as EndpointUnavailableError.
MutationOutcome llm_mutate(const LlmEndpointConfig& config, ChatTransport& transport,
                           const std::string& prompt, const std::string& parent_content);

enum class StubKind { kNumericJitter, kCircleRefine, kExprSubtree };

struct StubParams {
  double sigma = 0.05;
  // numeric-jitter only: with probability restart_prob all literals are
  // redrawn uniformly from [restart_low, restart_high] instead of jittered.
  double restart_prob = 0.0;
  double restart_low = 0.0;
  double restart_high = 1.0;
  // circle-refine only.
  bool disk_domain = false;
  // expr-subtree only.
  int num_vars = 1;
  int max_depth = 12;
};

// Deterministic offline mutation: same (kind, parent, seed, params), same
// output bytes. Parents the kind cannot read raise UnparseableParentError.
std::string stub_mutate(StubKind kind, const std::string& parent_content, std::uint64_t rng_seed,
                        const StubParams& params);

// What the engine drives. Stub mutators ignore the prompt text.
class Mutator {
 public:
  virtual ~Mutator() = default;
  virtual std::string tag() const = 0;
  virtual MutationOutcome mutate(const PromptBundle& prompt, const SolutionRecord& parent,
                                 std::uint64_t seed) = 0;
};

std::unique_ptr<Mutator> make_stub_mutator(StubKind kind, StubParams params);
std::unique_ptr<Mutator> make_llm_mutator(LlmEndpointConfig config,
                                          std::shared_ptr<ChatTransport> transport);

}  // namespace helix
