#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <string>

#include "helix/diversity.hpp"
#include "helix/errors.hpp"
#include "helix/mutators.hpp"

namespace helix {

enum class SelectionMode { kNsga2, kTopScore, kTopDiversity, kRandom };

std::string to_string(SelectionMode mode);
SelectionMode selection_mode_from_string(const std::string& name);

struct EngineConfig {
  int batch_size = 4;           // parents sampled per iteration
  int group_size = 4;           // rollouts per parent (>= 2, advantages need a spread)
  int population_capacity = 64;
  int n_ancestors = 2;          // lineage entries shown in each prompt
  std::size_t prompt_char_budget = 16384;
  SelectionMode selection = SelectionMode::kNsga2;
  int diversity_k = 5;          // nearest neighbors per diversity score
  bool recompute_diversity = true;  // refresh stored diversity for old records too
  double parent_weighting_alpha = 0.0;  // 0 = uniform parent sampling
  int eval_workers = 1;
};

// Which mutation operator drives the run. "auto" resolves per task kind.
struct MutatorSpec {
  std::string kind = "auto";  // auto | numeric-jitter | circle-refine | expr-subtree | llm
  StubParams stub;
  LlmEndpointConfig llm;
};

struct RunConfig {
  std::uint64_t seed = 0;
  int iterations = 10;
  int checkpoint_every = 1;
  EngineConfig engine;
  MutatorSpec mutator;
  EmbeddingProviderSpec embedding;
  std::string template_file;  // empty = built-in template for the task kind
  std::string task_json;      // canonical task section, consumed by make_task
};

struct LoadedConfig {
  RunConfig config;       // env-interpolated and validated
  std::string raw_text;   // file bytes as given; written verbatim as the snapshot
  std::uint64_t hash = 0; // over the canonical raw JSON, so secrets never pin values
};

// Replaces every ${NAME} occurrence with the environment value; an unset
// variable is a ConfigError.
std::string interpolate_env(const std::string& value);

// Canonical structural hash of a config document (key-sorted dump, FNV-1a).
std::uint64_t config_hash(const nlohmann::json& raw);

// Validates the schema (unknown keys are errors, recursively), interpolates
// ${ENV} in string values, and checks cross-field invariants.
RunConfig parse_run_config(const nlohmann::json& raw);

LoadedConfig parse_run_config_text(const std::string& text);
LoadedConfig load_run_config(const std::filesystem::path& path);

}  // namespace helix
