#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "helix/config.hpp"
#include "helix/core_model.hpp"
#include "helix/diversity.hpp"
#include "helix/mutators.hpp"
#include "helix/persistence.hpp"
#include "helix/prompting.hpp"
#include "helix/tasks.hpp"

namespace helix {

// Everything the search loop calls out to; injectable for tests.
struct EngineDeps {
  std::shared_ptr<Task> task;
  std::shared_ptr<Mutator> mutator;
  std::shared_ptr<EmbeddingProvider> embedder;
  PromptTemplate prompt_template;
};

// Builds deps straight from the config: the task from its section, a stub or
// LLM mutator ("auto" resolves by task kind), the embedding provider, and the
// prompt template (file or built-in).
EngineDeps build_default_deps(const RunConfig& config);

// One search run bound to a directory:
//   config.snapshot.json, events.jsonl, checkpoints/iter-<t>.json,
//   best_solution.txt, report.csv
//
// Every random draw derives from the master seed plus (purpose, iteration,
// indices) counters, so a run is a pure function of config + seed and can be
// resumed bit-for-bit from any checkpoint.
class Engine {
 public:
  // Starts a fresh run: writes the snapshot, evaluates and logs the task's
  // initial solutions as iteration 0, checkpoints. Fails if the directory
  // already holds an event log.
  static std::unique_ptr<Engine> create(const LoadedConfig& loaded,
                                        const std::filesystem::path& run_dir, EngineDeps deps);

  // Continues from the newest checkpoint: verifies the config hash, truncates
  // the event log back to that iteration boundary, and replays it.
  static std::unique_ptr<Engine> resume(const LoadedConfig& loaded,
                                        const std::filesystem::path& run_dir, EngineDeps deps);

  IterationSummary run_iteration();

  // Runs until iteration() reaches `target` or *stop becomes true. Returns
  // the number of iterations executed.
  int run_to(int target, const std::atomic<bool>* stop = nullptr);

  // Writes a checkpoint at the current iteration boundary (idempotent).
  void checkpoint_now();

  int iteration() const { return iteration_; }
  const RunConfig& config() const { return config_; }
  const LineageStore& store() const { return store_; }
  const Population& population() const { return population_; }
  std::optional<RecordId> best_id() const { return best_id_; }
  const std::vector<IterationSummary>& summaries() const { return summaries_; }
  const std::filesystem::path& run_dir() const { return run_dir_; }

  // Order-sensitive digest over ids, contents, rewards, validity and the
  // population; equal digests mean the same search state.
  std::uint64_t state_hash() const;

 private:
  Engine(RunConfig config, std::uint64_t config_hash, std::filesystem::path run_dir,
         EngineDeps deps);

  std::vector<RecordId> sample_parents(int t);
  void embed_and_score(const std::vector<RecordId>& new_ids);
  std::vector<RecordId> select_population(int t);
  void note_candidate(const SolutionRecord& record);
  void write_artifacts();

  RunConfig config_;
  std::uint64_t config_hash_ = 0;
  std::filesystem::path run_dir_;
  EngineDeps deps_;

  LineageStore store_;
  Population population_;
  std::unique_ptr<EventLog> log_;
  std::vector<IterationSummary> summaries_;
  int iteration_ = 0;
  RecordId next_id_ = 1;
  std::optional<RecordId> best_id_;
  double best_reward_ = 0.0;
};

}  // namespace helix
