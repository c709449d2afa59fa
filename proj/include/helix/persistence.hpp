#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "helix/core_model.hpp"
#include "helix/errors.hpp"

namespace helix {

// One parent's rollout group within an iteration, as logged for analysis.
struct GroupRollout {
  int t = 0;
  int batch = 0;
  RecordId prompt_key = 0;  // parent record id the group was prompted from
  std::vector<RecordId> rollout_ids;
  std::vector<double> rewards;
  std::vector<double> advantages;
};

struct IterationSummary {
  int t = 0;
  double best_so_far = 0.0;
  double mean_reward = 0.0;     // over this iteration's new records
  double validity_rate = 0.0;   // over this iteration's new records
  std::vector<RecordId> population;
  double population_mean_diversity = 0.0;
};

// Append-only JSONL event stream. Each line is one self-contained event of
// type "solution", "group" or "iteration"; lines are flushed as written so an
// interrupted run loses at most the line in flight.
class EventLog {
 public:
  // append=false truncates; append=true continues an existing stream.
  explicit EventLog(const std::filesystem::path& path, bool append);

  void append_solution(const SolutionRecord& record);
  void append_group(const GroupRollout& group);
  void append_iteration(const IterationSummary& summary);

  const std::filesystem::path& path() const { return path_; }

 private:
  void write_line(const std::string& line);

  std::filesystem::path path_;
  std::ofstream out_;
};

struct EventLogContents {
  std::vector<SolutionRecord> solutions;  // embeddings are never logged
  std::vector<GroupRollout> groups;
  std::vector<IterationSummary> iterations;
};

// Reads the whole stream back. A malformed or truncated final line is skipped
// with a warning on stderr (interrupted write); malformed interior lines
// raise CorruptLogError.
EventLogContents read_event_log(const std::filesystem::path& path);

// Byte offset just past the last event of the given iteration: past its
// "iteration" event, or for iteration 0 past the initial solution block.
// Truncating the file here rewinds the stream to that iteration boundary.
std::uintmax_t resume_offset(const std::filesystem::path& path, int iteration);

// Everything needed to continue a run: all randomness is derived from the
// master seed plus counters, so seed + iteration fully pins the RNG.
struct Checkpoint {
  int iteration = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t record_count = 0;  // records existing at this boundary
  std::vector<RecordId> population;
  std::uint64_t config_hash = 0;
};

// Writes checkpoints/iter-<t>.json atomically (temp file + rename).
std::filesystem::path write_checkpoint(const std::filesystem::path& checkpoint_dir,
                                       const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& file);
std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& checkpoint_dir);

void write_report_csv(const std::filesystem::path& path,
                      const std::vector<IterationSummary>& iterations);
void write_best_solution(const std::filesystem::path& path, const std::string& content);

}  // namespace helix
