#include "helix/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <unordered_map>

#include "helix/config.hpp"
#include "helix/engine.hpp"
#include "helix/persistence.hpp"
#include "helix/selection.hpp"

namespace helix {

namespace {

std::atomic<bool> g_interrupted{false};

void handle_interrupt(int) { g_interrupted.store(true); }

void print_progress(const IterationSummary& s) {
  std::printf("t=%d best=%.6g mean=%.6g valid=%.0f%% div=%.3f\n", s.t, s.best_so_far,
              s.mean_reward, 100.0 * s.validity_rate, s.population_mean_diversity);
  std::fflush(stdout);
}

int drive(Engine& engine, int target) {
  g_interrupted.store(false);
  auto* previous = std::signal(SIGINT, handle_interrupt);

  const int start = engine.iteration();
  const int span = target - start;
  const int stride = span <= 50 ? 1 : (span + 49) / 50;

  while (engine.iteration() < target && !g_interrupted.load()) {
    const IterationSummary s = engine.run_iteration();
    if ((s.t - start) % stride == 0 || s.t == target) print_progress(s);
  }
  std::signal(SIGINT, previous);

  if (engine.iteration() < target) {
    engine.checkpoint_now();  // interrupt between iterations is a clean boundary
    std::printf("interrupted at iteration %d; run directory is resumable\n", engine.iteration());
  } else if (engine.iteration() > start && engine.iteration() % engine.config().checkpoint_every != 0) {
    // An off-cadence finish still checkpoints: pareto and resume read the latest
    // checkpoint, and replaying skipped iterations re-spends mutator calls.
    engine.checkpoint_now();
  }

  if (engine.best_id()) {
    const SolutionRecord& best = engine.store().get(*engine.best_id());
    std::printf("done: iteration %d, best reward %.6g (record %llu)\n", engine.iteration(),
                best.reward, static_cast<unsigned long long>(best.id));
  } else {
    std::printf("done: iteration %d, no valid solution found yet\n", engine.iteration());
  }
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int iterations_override) {
  LoadedConfig loaded = load_run_config(config_path);
  const int target =
      iterations_override >= 0 ? iterations_override : loaded.config.iterations;
  EngineDeps deps = build_default_deps(loaded.config);
  auto engine = Engine::create(loaded, out_dir, std::move(deps));
  return drive(*engine, target);
}

int cmd_resume(const std::string& out_dir, int iterations_override) {
  LoadedConfig loaded = load_run_config(std::filesystem::path(out_dir) / "config.snapshot.json");
  const int target =
      iterations_override >= 0 ? iterations_override : loaded.config.iterations;
  EngineDeps deps = build_default_deps(loaded.config);
  auto engine = Engine::resume(loaded, out_dir, std::move(deps));
  if (engine->iteration() >= target) {
    std::printf("nothing to do: run is already at iteration %d (target %d)\n",
                engine->iteration(), target);
    return 0;
  }
  return drive(*engine, target);
}

int cmd_validate(const std::string& config_path) {
  const LoadedConfig loaded = load_run_config(config_path);
  const EngineDeps deps = build_default_deps(loaded.config);
  std::printf("config OK: task %s, mutator %s, %d iterations, seed %llu\n",
              deps.task->name().c_str(), deps.mutator->tag().c_str(), loaded.config.iterations,
              static_cast<unsigned long long>(loaded.config.seed));
  return 0;
}

int cmd_report(const std::string& out_dir) {
  const std::filesystem::path dir(out_dir);
  const EventLogContents events = read_event_log(dir / "events.jsonl");
  write_report_csv(dir / "report.csv", events.iterations);
  if (events.iterations.empty()) {
    std::printf("no iterations logged yet (%zu initial solutions)\n", events.solutions.size());
    return 0;
  }
  const IterationSummary& last = events.iterations.back();
  std::printf("%zu iterations, %zu records; final best %.6g, final mean diversity %.3f\n",
              events.iterations.size(), events.solutions.size(), last.best_so_far,
              last.population_mean_diversity);
  std::printf("report written to %s\n", (dir / "report.csv").string().c_str());
  return 0;
}

int cmd_pareto(const std::string& out_dir, std::size_t limit) {
  const std::filesystem::path dir(out_dir);
  const auto cp_path = latest_checkpoint(dir / "checkpoints");
  if (!cp_path) throw MissingCheckpointError(out_dir + " holds no checkpoints");
  const Checkpoint cp = read_checkpoint(*cp_path);
  const EventLogContents events = read_event_log(dir / "events.jsonl");

  std::unordered_map<RecordId, const SolutionRecord*> by_id;
  for (const SolutionRecord& rec : events.solutions) by_id[rec.id] = &rec;

  std::vector<ObjectivePoint> points;
  for (RecordId id : cp.population) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw CorruptLogError("population record " + std::to_string(id) + " missing from log");
    }
    points.push_back({id, it->second->reward, it->second->diversity.value_or(0.0)});
  }
  const FrontAssignment fronts = nondominated_sort(points);

  std::printf("population at iteration %d (%zu members, %zu fronts)\n", cp.iteration,
              points.size(), fronts.fronts.size());
  std::size_t printed = 0;
  for (std::size_t f = 0; f < fronts.fronts.size() && printed < limit; ++f) {
    for (RecordId id : fronts.fronts[f]) {
      if (printed == limit) break;
      const SolutionRecord* rec = by_id.at(id);
      std::printf("front=%zu id=%llu t=%d reward=%.6g diversity=%.4f mutator=%s\n", f,
                  static_cast<unsigned long long>(id), rec->iteration, rec->reward,
                  rec->diversity.value_or(0.0), rec->mutator_tag.c_str());
      ++printed;
    }
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"quality-diversity evolutionary search over verifiable tasks"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int iterations = -1;
  std::size_t limit = 32;

  CLI::App* run = app.add_subcommand("run", "start a fresh run in a new directory");
  run->add_option("--config", config_path, "run config JSON")->required();
  run->add_option("--out", out_dir, "run directory to create")->required();
  run->add_option("--iterations", iterations, "override the configured iteration count");

  CLI::App* resume = app.add_subcommand("resume", "continue a run from its latest checkpoint");
  resume->add_option("--out", out_dir, "existing run directory")->required();
  resume->add_option("--iterations", iterations, "override the target iteration count");

  CLI::App* validate = app.add_subcommand("validate", "check a config without running");
  validate->add_option("--config", config_path, "run config JSON")->required();

  CLI::App* report = app.add_subcommand("report", "rebuild report.csv from the event log");
  report->add_option("--out", out_dir, "existing run directory")->required();

  CLI::App* pareto = app.add_subcommand("pareto", "print the population's nondominated fronts");
  pareto->add_option("--out", out_dir, "existing run directory")->required();
  pareto->add_option("--limit", limit, "maximum rows to print");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(config_path, out_dir, iterations);
    if (resume->parsed()) return cmd_resume(out_dir, iterations);
    if (validate->parsed()) return cmd_validate(config_path);
    if (report->parsed()) return cmd_report(out_dir);
    if (pareto->parsed()) return cmd_pareto(out_dir, limit);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help exits cleanly
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigMismatchError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace helix
