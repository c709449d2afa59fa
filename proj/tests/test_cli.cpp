#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "helix/cli.hpp"
#include "helix/persistence.hpp"

using namespace helix;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("helix-cli-test-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cli(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"helix"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(storage.size());
  for (const std::string& s : storage) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

json small_config() {
  return json{
      {"seed", 11},
      {"iterations", 2},
      {"engine",
       {{"batch_size", 2}, {"group_size", 4}, {"population_capacity", 8}, {"diversity_k", 3}}},
      {"mutator",
       {{"kind", "numeric-jitter"},
        {"sigma", 25.0},
        {"restart_prob", 0.1},
        {"restart_low", -512.0},
        {"restart_high", 512.0}}},
      {"embedding", {{"dimension", 64}}},
      {"task",
       {{"kind", "function-min"},
        {"function", "eggholder"},
        {"initial_solutions", json::array({"[0.0, 0.0]", "[100.0, 100.0]"})}}},
  };
}

fs::path write_config(const TempDir& dir, const json& cfg) {
  const fs::path path = dir.path / "run.json";
  std::ofstream(path, std::ios::binary) << cfg.dump(2) << "\n";
  return path;
}

}  // namespace

// ---------------------------------------------------------------------------
// run / resume
// ---------------------------------------------------------------------------

TEST_CASE("run_cli: run then resume completes a short search") {
  TempDir dir;
  const fs::path cfg = write_config(dir, small_config());
  const std::string out = (dir.path / "run1").string();

  CHECK(cli({"run", "--config", cfg.string(), "--out", out}) == 0);
  CHECK(fs::exists(dir.path / "run1" / "events.jsonl"));
  CHECK(fs::exists(dir.path / "run1" / "report.csv"));
  CHECK(fs::exists(dir.path / "run1" / "best_solution.txt"));
  CHECK(fs::exists(dir.path / "run1" / "checkpoints" / "iter-2.json"));
  CHECK(read_file(dir.path / "run1" / "config.snapshot.json") == read_file(cfg));

  // extend the finished run by two more iterations
  CHECK(cli({"resume", "--out", out, "--iterations", "4"}) == 0);
  const EventLogContents events = read_event_log(dir.path / "run1" / "events.jsonl");
  CHECK(events.iterations.size() == 4);
  CHECK(fs::exists(dir.path / "run1" / "checkpoints" / "iter-4.json"));

  // already past the configured target: a no-op, not an error
  CHECK(cli({"resume", "--out", out}) == 0);
  CHECK(read_event_log(dir.path / "run1" / "events.jsonl").iterations.size() == 4);
}

TEST_CASE("run_cli: a zero-iteration run still writes the scaffolding") {
  TempDir dir;
  const fs::path cfg = write_config(dir, small_config());
  const std::string out = (dir.path / "run0").string();
  CHECK(cli({"run", "--config", cfg.string(), "--out", out, "--iterations", "0"}) == 0);
  const EventLogContents events = read_event_log(dir.path / "run0" / "events.jsonl");
  CHECK(events.solutions.size() == 2);
  CHECK(events.iterations.empty());
  CHECK(fs::exists(dir.path / "run0" / "checkpoints" / "iter-0.json"));
}

TEST_CASE("run_cli: run onto an existing run directory fails") {
  TempDir dir;
  const fs::path cfg = write_config(dir, small_config());
  const std::string out = (dir.path / "run1").string();
  CHECK(cli({"run", "--config", cfg.string(), "--out", out, "--iterations", "0"}) == 0);
  CHECK(cli({"run", "--config", cfg.string(), "--out", out}) == 1);
}

TEST_CASE("run_cli: resume of a directory that never ran is a config error") {
  TempDir dir;
  CHECK(cli({"resume", "--out", (dir.path / "nothing-here").string()}) == 2);
}

TEST_CASE("run_cli: a task that cannot evaluate fails at runtime") {
  TempDir dir;
  json cfg = small_config();
  cfg["task"] = {{"kind", "external"},
                 {"command", json::array({"/no/such/binary"})},
                 {"initial_solutions", json::array({"x"})}};
  const fs::path path = write_config(dir, cfg);
  CHECK(cli({"run", "--config", path.string(), "--out", (dir.path / "run-ext").string()}) == 1);
}

// ---------------------------------------------------------------------------
// validate / report / pareto
// ---------------------------------------------------------------------------

TEST_CASE("run_cli: validate accepts good configs and rejects bad ones") {
  TempDir dir;
  const fs::path good = write_config(dir, small_config());
  CHECK(cli({"validate", "--config", good.string()}) == 0);

  CHECK(cli({"validate", "--config", (dir.path / "missing.json").string()}) == 2);

  const fs::path broken = dir.path / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK(cli({"validate", "--config", broken.string()}) == 2);

  json bad = small_config();
  bad["bogus"] = 1;
  const fs::path unknown = dir.path / "unknown.json";
  std::ofstream(unknown) << bad.dump();
  CHECK(cli({"validate", "--config", unknown.string()}) == 2);
}

TEST_CASE("run_cli: report rebuilds the CSV from the event log") {
  TempDir dir;
  const fs::path cfg = write_config(dir, small_config());
  const std::string out = (dir.path / "run1").string();
  REQUIRE(cli({"run", "--config", cfg.string(), "--out", out}) == 0);

  const std::string original = read_file(dir.path / "run1" / "report.csv");
  fs::remove(dir.path / "run1" / "report.csv");
  CHECK(cli({"report", "--out", out}) == 0);
  CHECK(read_file(dir.path / "run1" / "report.csv") == original);

  CHECK(cli({"report", "--out", (dir.path / "nothing-here").string()}) == 1);
}

TEST_CASE("run_cli: pareto prints the current population") {
  TempDir dir;
  const fs::path cfg = write_config(dir, small_config());
  const std::string out = (dir.path / "run1").string();
  REQUIRE(cli({"run", "--config", cfg.string(), "--out", out}) == 0);
  CHECK(cli({"pareto", "--out", out, "--limit", "5"}) == 0);

  CHECK(cli({"pareto", "--out", (dir.path / "nothing-here").string()}) == 1);
}

// ---------------------------------------------------------------------------
// usage errors
// ---------------------------------------------------------------------------

TEST_CASE("run_cli: usage errors exit with 2, help with 0") {
  CHECK(cli({}) == 2);                       // a subcommand is required
  CHECK(cli({"launch"}) == 2);               // unknown subcommand
  CHECK(cli({"run"}) == 2);                  // missing required options
  CHECK(cli({"run", "--config", "x"}) == 2); // still missing --out
  CHECK(cli({"--help"}) == 0);
}
