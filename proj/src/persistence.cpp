#include "helix/persistence.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <iostream>
#include <nlohmann/json.hpp>

namespace helix {

namespace {

using nlohmann::json;

// Invalid UTF-8 can arrive in mutated content; replace rather than throw so
// the log always stays writable.
std::string dump_line(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string format_double(double v) {
  // Shortest round-trip form, matching the JSON serializer.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json solution_to_json(const SolutionRecord& r) {
  json j{{"type", "solution"},
         {"t", r.iteration},
         {"id", r.id},
         {"reward", r.reward},
         {"valid", r.valid},
         {"feedback", r.feedback},
         {"mutator", r.mutator_tag},
         {"content_hash", content_hash(r.content)},
         {"content", r.content}};
  j["parent_id"] = r.parent_id ? json(*r.parent_id) : json(nullptr);
  j["batch"] = r.group_key ? json(r.group_key->batch) : json(nullptr);
  j["rollout"] = r.group_key ? json(r.group_key->rollout) : json(nullptr);
  j["diversity"] = r.diversity ? json(*r.diversity) : json(nullptr);
  return j;
}

SolutionRecord solution_from_json(const json& j) {
  SolutionRecord r;
  r.id = j.at("id").get<RecordId>();
  if (!j.at("parent_id").is_null()) r.parent_id = j.at("parent_id").get<RecordId>();
  r.iteration = j.at("t").get<int>();
  r.content = j.at("content").get<std::string>();
  r.reward = j.at("reward").get<double>();
  r.valid = j.at("valid").get<bool>();
  r.feedback = j.at("feedback").get<std::string>();
  r.mutator_tag = j.at("mutator").get<std::string>();
  if (!j.at("batch").is_null()) {
    r.group_key = GroupKey{j.at("batch").get<int>(), j.at("rollout").get<int>()};
  }
  if (!j.at("diversity").is_null()) r.diversity = j.at("diversity").get<double>();
  if (j.at("content_hash").get<std::uint64_t>() != content_hash(r.content)) {
    throw CorruptLogError("content hash mismatch for record " + std::to_string(r.id));
  }
  return r;
}

json group_to_json(const GroupRollout& g) {
  return json{{"type", "group"},        {"t", g.t},
              {"batch", g.batch},       {"prompt_key", g.prompt_key},
              {"rollout_ids", g.rollout_ids}, {"rewards", g.rewards},
              {"advantages", g.advantages}};
}

GroupRollout group_from_json(const json& j) {
  GroupRollout g;
  g.t = j.at("t").get<int>();
  g.batch = j.at("batch").get<int>();
  g.prompt_key = j.at("prompt_key").get<RecordId>();
  g.rollout_ids = j.at("rollout_ids").get<std::vector<RecordId>>();
  g.rewards = j.at("rewards").get<std::vector<double>>();
  g.advantages = j.at("advantages").get<std::vector<double>>();
  return g;
}

json iteration_to_json(const IterationSummary& s) {
  return json{{"type", "iteration"},
              {"t", s.t},
              {"best_so_far", s.best_so_far},
              {"mean_reward", s.mean_reward},
              {"validity_rate", s.validity_rate},
              {"population", s.population},
              {"population_mean_diversity", s.population_mean_diversity}};
}

IterationSummary iteration_from_json(const json& j) {
  IterationSummary s;
  s.t = j.at("t").get<int>();
  s.best_so_far = j.at("best_so_far").get<double>();
  s.mean_reward = j.at("mean_reward").get<double>();
  s.validity_rate = j.at("validity_rate").get<double>();
  s.population = j.at("population").get<std::vector<RecordId>>();
  s.population_mean_diversity = j.at("population_mean_diversity").get<double>();
  return s;
}

// Calls visit(line, offset_after_line, is_last) for each newline-terminated
// or trailing line of the file.
template <typename Visit>
void for_each_line(const std::filesystem::path& path, Visit visit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open event log " + path.string());
  std::string line;
  std::uintmax_t offset = 0;
  while (std::getline(in, line)) {
    const bool had_newline = !in.eof();
    offset += line.size() + (had_newline ? 1 : 0);
    visit(line, offset, !had_newline || in.peek() == std::char_traits<char>::eof());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// EventLog
// ---------------------------------------------------------------------------

EventLog::EventLog(const std::filesystem::path& path, bool append) : path_(path) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  out_.open(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
  if (!out_) throw IoError("cannot open event log " + path.string() + " for writing");
}

void EventLog::write_line(const std::string& line) {
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw IoError("write to event log " + path_.string() + " failed");
}

void EventLog::append_solution(const SolutionRecord& record) {
  write_line(dump_line(solution_to_json(record)));
}

void EventLog::append_group(const GroupRollout& group) {
  write_line(dump_line(group_to_json(group)));
}

void EventLog::append_iteration(const IterationSummary& summary) {
  write_line(dump_line(iteration_to_json(summary)));
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

EventLogContents read_event_log(const std::filesystem::path& path) {
  EventLogContents out;
  for_each_line(path, [&](const std::string& line, std::uintmax_t, bool is_last) {
    if (line.empty()) return;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("type")) {
      if (is_last) {
        std::cerr << "warning: skipping malformed trailing line in " << path.string() << "\n";
        return;
      }
      throw CorruptLogError("malformed event line in " + path.string());
    }
    const std::string type = j.at("type").get<std::string>();
    try {
      if (type == "solution") {
        out.solutions.push_back(solution_from_json(j));
      } else if (type == "group") {
        out.groups.push_back(group_from_json(j));
      } else if (type == "iteration") {
        out.iterations.push_back(iteration_from_json(j));
      } else {
        throw CorruptLogError("unknown event type '" + type + "' in " + path.string());
      }
    } catch (const json::exception& e) {
      if (is_last) {
        std::cerr << "warning: skipping malformed trailing line in " << path.string() << "\n";
        return;
      }
      throw CorruptLogError("bad event fields in " + path.string() + ": " + e.what());
    }
  });
  return out;
}

std::uintmax_t resume_offset(const std::filesystem::path& path, int iteration) {
  std::uintmax_t found = 0;
  bool seen = false;
  bool in_root_block = true;
  for_each_line(path, [&](const std::string& line, std::uintmax_t offset, bool is_last) {
    if (line.empty()) return;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("type") || !j.contains("t")) {
      if (is_last) return;  // interrupted write; the offset before it stands
      throw CorruptLogError("malformed event line in " + path.string());
    }
    const std::string type = j.at("type").get<std::string>();
    const int t = j.at("t").get<int>();
    if (iteration == 0) {
      // The iteration-0 boundary sits after the initial solution block.
      if (type == "solution" && t == 0 && in_root_block) {
        found = offset;
        seen = true;
      } else {
        in_root_block = false;
      }
    } else if (type == "iteration" && t == iteration) {
      found = offset;
      seen = true;
    }
  });
  if (!seen) {
    throw MissingCheckpointError("event log " + path.string() +
                                 " has no boundary for iteration " + std::to_string(iteration));
  }
  return found;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

std::filesystem::path write_checkpoint(const std::filesystem::path& checkpoint_dir,
                                       const Checkpoint& checkpoint) {
  std::filesystem::create_directories(checkpoint_dir);
  const json j{{"iteration", checkpoint.iteration},
               {"master_seed", checkpoint.master_seed},
               {"record_count", checkpoint.record_count},
               {"population", checkpoint.population},
               {"config_hash", checkpoint.config_hash}};
  const auto final_path =
      checkpoint_dir / ("iter-" + std::to_string(checkpoint.iteration) + ".json");
  const auto tmp_path = checkpoint_dir / (".iter-tmp-" + std::to_string(checkpoint.iteration));
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp_path.string());
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw IoError("write to checkpoint " + tmp_path.string() + " failed");
  }
  std::filesystem::rename(tmp_path, final_path);
  return final_path;
}

Checkpoint read_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw MissingCheckpointError("cannot open checkpoint " + file.string());
  json j;
  try {
    in >> j;
    Checkpoint c;
    c.iteration = j.at("iteration").get<int>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    c.record_count = j.at("record_count").get<std::uint64_t>();
    c.population = j.at("population").get<std::vector<RecordId>>();
    c.config_hash = j.at("config_hash").get<std::uint64_t>();
    return c;
  } catch (const json::exception& e) {
    throw CorruptLogError("bad checkpoint " + file.string() + ": " + e.what());
  }
}

std::optional<std::filesystem::path> latest_checkpoint(
    const std::filesystem::path& checkpoint_dir) {
  if (!std::filesystem::is_directory(checkpoint_dir)) return std::nullopt;
  std::optional<std::filesystem::path> best;
  long best_t = -1;
  for (const auto& entry : std::filesystem::directory_iterator(checkpoint_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("iter-", 0) != 0 || entry.path().extension() != ".json") continue;
    const std::string digits = name.substr(5, name.size() - 5 - 5);
    long t = -1;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), t);
    if (res.ec != std::errc() || res.ptr != digits.data() + digits.size()) continue;
    if (t > best_t) {
      best_t = t;
      best = entry.path();
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

void write_report_csv(const std::filesystem::path& path,
                      const std::vector<IterationSummary>& iterations) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write report " + path.string());
  out << "t,best_so_far,mean_reward,validity_rate,population_mean_diversity\n";
  for (const auto& s : iterations) {
    out << s.t << ',' << format_double(s.best_so_far) << ',' << format_double(s.mean_reward)
        << ',' << format_double(s.validity_rate) << ','
        << format_double(s.population_mean_diversity) << '\n';
  }
  out.flush();
  if (!out) throw IoError("write to report " + path.string() + " failed");
}

void write_best_solution(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.parent_path() / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace helix
