#include "helix/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <future>
#include <nlohmann/json.hpp>

#include "helix/grpo.hpp"
#include "helix/rng.hpp"
#include "helix/selection.hpp"

namespace helix {

namespace {

// Purpose tags keeping every seed stream disjoint.
constexpr std::uint64_t kTagParents = 0x706172656e747301ull;
constexpr std::uint64_t kTagMutate = 0x6d75746174650a01ull;
constexpr std::uint64_t kTagSelect = 0x73656c6563740a01ull;

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv_step(std::uint64_t& h, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (8 * i)) & 0xffull;
    h *= kFnvPrime;
  }
}

StubKind stub_kind_for(const std::string& name) {
  if (name == "numeric-jitter") return StubKind::kNumericJitter;
  if (name == "circle-refine") return StubKind::kCircleRefine;
  if (name == "expr-subtree") return StubKind::kExprSubtree;
  throw ConfigError("no stub mutator named '" + name + "'");
}

std::string auto_stub_for_task(const std::string& task_kind) {
  if (task_kind == "circle-packing") return "circle-refine";
  if (task_kind == "symbolic-regression") return "expr-subtree";
  return "numeric-jitter";
}

}  // namespace

// ---------------------------------------------------------------------------
// Dependency wiring
// ---------------------------------------------------------------------------

EngineDeps build_default_deps(const RunConfig& config) {
  EngineDeps deps;
  deps.task = make_task(nlohmann::json::parse(config.task_json));

  std::string kind = config.mutator.kind;
  if (kind == "auto") kind = auto_stub_for_task(deps.task->kind());

  if (kind == "llm") {
    auto transport = std::shared_ptr<ChatTransport>(
        make_http_chat_transport(config.mutator.llm, make_httplib_poster()));
    deps.mutator = make_llm_mutator(config.mutator.llm, std::move(transport));
  } else {
    StubParams params = config.mutator.stub;
    params.disk_domain = deps.task->uses_disk_domain();
    params.num_vars = deps.task->input_dimension();
    deps.mutator = make_stub_mutator(stub_kind_for(kind), params);
  }

  deps.embedder = make_provider(config.embedding);

  if (!config.template_file.empty()) {
    deps.prompt_template = load_template_file(config.template_file);
  } else {
    deps.prompt_template = default_template(deps.task->kind(), config.mutator.llm.mode);
  }
  if (deps.prompt_template.problem_description.empty()) {
    deps.prompt_template.problem_description = deps.task->problem_description();
  }
  return deps;
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

Engine::Engine(RunConfig config, std::uint64_t config_hash, std::filesystem::path run_dir,
               EngineDeps deps)
    : config_(std::move(config)),
      config_hash_(config_hash),
      run_dir_(std::move(run_dir)),
      deps_(std::move(deps)) {
  if (!deps_.task || !deps_.mutator || !deps_.embedder) {
    throw ConfigError("engine needs a task, a mutator and an embedding provider");
  }
  population_.capacity = static_cast<std::size_t>(config_.engine.population_capacity);
}

std::unique_ptr<Engine> Engine::create(const LoadedConfig& loaded,
                                       const std::filesystem::path& run_dir, EngineDeps deps) {
  std::filesystem::create_directories(run_dir);
  std::filesystem::create_directories(run_dir / "checkpoints");
  if (std::filesystem::exists(run_dir / "events.jsonl")) {
    throw IoError(run_dir.string() + " already holds a run; resume it or pick a fresh directory");
  }

  {
    std::ofstream snap(run_dir / "config.snapshot.json", std::ios::binary | std::ios::trunc);
    if (!snap) throw IoError("cannot write config snapshot in " + run_dir.string());
    snap << loaded.raw_text;  // verbatim; ${ENV} secrets stay unresolved
  }

  auto engine = std::unique_ptr<Engine>(
      new Engine(loaded.config, loaded.hash, run_dir, std::move(deps)));
  engine->log_ = std::make_unique<EventLog>(run_dir / "events.jsonl", /*append=*/false);

  const std::vector<std::string> roots = engine->deps_.task->initial_solutions();
  if (roots.empty()) {
    throw NoInitialSolutionsError(engine->deps_.task->name() + " provided no initial solutions");
  }

  std::vector<RecordId> root_ids;
  for (const std::string& content : roots) {
    const EvalResult eval = engine->deps_.task->evaluate(content);
    SolutionRecord rec;
    rec.id = engine->next_id_++;
    rec.iteration = 0;
    rec.content = content;
    rec.reward = eval.reward;
    rec.valid = eval.valid;
    rec.feedback = eval.feedback;
    rec.mutator_tag = "init";
    root_ids.push_back(rec.id);
    engine->store_.insert(std::move(rec));
    engine->note_candidate(engine->store_.get(root_ids.back()));
  }

  engine->embed_and_score(root_ids);
  for (RecordId id : root_ids) engine->log_->append_solution(engine->store_.get(id));
  engine->population_.member_ids = engine->select_population(0);

  Checkpoint cp;
  cp.iteration = 0;
  cp.master_seed = engine->config_.seed;
  cp.record_count = engine->store_.size();
  cp.population = engine->population_.member_ids;
  cp.config_hash = engine->config_hash_;
  write_checkpoint(run_dir / "checkpoints", cp);

  engine->write_artifacts();
  return engine;
}

std::unique_ptr<Engine> Engine::resume(const LoadedConfig& loaded,
                                       const std::filesystem::path& run_dir, EngineDeps deps) {
  const auto events_path = run_dir / "events.jsonl";
  if (!std::filesystem::exists(events_path)) {
    throw IoError(run_dir.string() + " holds no event log to resume");
  }
  const auto cp_path = latest_checkpoint(run_dir / "checkpoints");
  if (!cp_path) {
    throw MissingCheckpointError(run_dir.string() + " holds no checkpoints");
  }
  const Checkpoint cp = read_checkpoint(*cp_path);
  if (cp.config_hash != loaded.hash) {
    throw ConfigMismatchError("config snapshot does not match the checkpointed run");
  }
  if (cp.master_seed != loaded.config.seed) {
    throw ConfigMismatchError("checkpoint seed does not match the config");
  }

  // Rewind the log to the checkpoint boundary; anything later is recomputed.
  const std::uintmax_t offset = resume_offset(events_path, cp.iteration);
  std::filesystem::resize_file(events_path, offset);

  auto engine = std::unique_ptr<Engine>(
      new Engine(loaded.config, loaded.hash, run_dir, std::move(deps)));

  const EventLogContents events = read_event_log(events_path);
  for (const SolutionRecord& rec : events.solutions) {
    engine->store_.insert(rec);
    engine->next_id_ = std::max(engine->next_id_, rec.id + 1);
    engine->note_candidate(engine->store_.get(rec.id));
  }
  if (engine->store_.size() != cp.record_count) {
    throw CorruptLogError("event log holds " + std::to_string(engine->store_.size()) +
                          " records but the checkpoint expects " +
                          std::to_string(cp.record_count));
  }
  for (RecordId id : cp.population) {
    if (!engine->store_.contains(id)) {
      throw CorruptLogError("checkpoint population references unknown record " +
                            std::to_string(id));
    }
  }

  // Embeddings are never logged; rebuild them from content.
  for (RecordId id : engine->store_.ids_in_insertion_order()) {
    SolutionRecord& rec = engine->store_.get_mutable(id);
    rec.embedding = embed(*engine->deps_.embedder, rec.content);
  }

  engine->population_.member_ids = cp.population;
  engine->iteration_ = cp.iteration;
  engine->summaries_ = events.iterations;
  engine->log_ = std::make_unique<EventLog>(events_path, /*append=*/true);
  engine->write_artifacts();  // resync report/best with the rewound state
  return engine;
}

// ---------------------------------------------------------------------------
// The loop
// ---------------------------------------------------------------------------

std::vector<RecordId> Engine::sample_parents(int t) {
  const std::vector<RecordId>& members = population_.member_ids;
  const std::size_t P = members.size();
  const std::size_t B = static_cast<std::size_t>(config_.engine.batch_size);
  Rng rng(derive_seed(config_.seed, {kTagParents, static_cast<std::uint64_t>(t)}));
  std::vector<RecordId> parents;
  parents.reserve(B);

  const double alpha = config_.engine.parent_weighting_alpha;
  if (alpha > 0.0) {
    std::vector<double> cumulative(P);
    double total = 0.0;
    for (std::size_t i = 0; i < P; ++i) {
      total += std::exp(alpha * store_.get(members[i]).reward);
      cumulative[i] = total;
    }
    for (std::size_t b = 0; b < B; ++b) {
      const double u = rng.uniform() * total;
      const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
      parents.push_back(members[std::min<std::size_t>(
          static_cast<std::size_t>(it - cumulative.begin()), P - 1)]);
    }
    return parents;
  }

  if (B <= P) {
    // Partial Fisher-Yates: uniform without replacement.
    std::vector<RecordId> pool = members;
    for (std::size_t i = 0; i < B; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(P - i));
      std::swap(pool[i], pool[j]);
      parents.push_back(pool[i]);
    }
  } else {
    for (std::size_t b = 0; b < B; ++b) {
      parents.push_back(members[static_cast<std::size_t>(rng.below(P))]);
    }
  }
  return parents;
}

void Engine::embed_and_score(const std::vector<RecordId>& new_ids) {
  for (RecordId id : new_ids) {
    SolutionRecord& rec = store_.get_mutable(id);
    rec.embedding = embed(*deps_.embedder, rec.content);
  }

  const std::vector<RecordId>& all = store_.ids_in_insertion_order();
  std::vector<Eigen::VectorXd> embeddings;
  embeddings.reserve(all.size());
  for (RecordId id : all) embeddings.push_back(*store_.get(id).embedding);

  const std::vector<double> scores = score_all(embeddings, config_.engine.diversity_k);
  if (config_.engine.recompute_diversity) {
    for (std::size_t i = 0; i < all.size(); ++i) {
      store_.get_mutable(all[i]).diversity = scores[i];
    }
  } else {
    std::unordered_map<RecordId, std::size_t> index;
    for (std::size_t i = 0; i < all.size(); ++i) index.emplace(all[i], i);
    for (RecordId id : new_ids) store_.get_mutable(id).diversity = scores[index.at(id)];
  }
}

std::vector<RecordId> Engine::select_population(int t) {
  const std::vector<RecordId>& all = store_.ids_in_insertion_order();
  std::vector<ObjectivePoint> points;
  points.reserve(all.size());
  for (RecordId id : all) {
    const SolutionRecord& rec = store_.get(id);
    points.push_back({id, rec.reward, rec.diversity.value_or(1.0)});
  }
  const std::size_t n = population_.capacity;

  switch (config_.engine.selection) {
    case SelectionMode::kNsga2:
      return select_top(points, n);
    case SelectionMode::kTopScore: {
      std::stable_sort(points.begin(), points.end(),
                       [](const ObjectivePoint& a, const ObjectivePoint& b) {
                         return a.reward > b.reward;
                       });
      break;
    }
    case SelectionMode::kTopDiversity: {
      std::stable_sort(points.begin(), points.end(),
                       [](const ObjectivePoint& a, const ObjectivePoint& b) {
                         return a.diversity > b.diversity;
                       });
      break;
    }
    case SelectionMode::kRandom: {
      Rng rng(derive_seed(config_.seed, {kTagSelect, static_cast<std::uint64_t>(t)}));
      for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(rng.below(points.size() - i));
        std::swap(points[i], points[j]);
      }
      break;
    }
  }

  std::vector<RecordId> out;
  out.reserve(std::min(n, points.size()));
  for (std::size_t i = 0; i < points.size() && i < n; ++i) out.push_back(points[i].id);
  return out;
}

void Engine::note_candidate(const SolutionRecord& record) {
  if (!record.valid) return;
  if (!best_id_ || record.reward > best_reward_) {
    best_id_ = record.id;
    best_reward_ = record.reward;
  }
}

void Engine::write_artifacts() {
  write_report_csv(run_dir_ / "report.csv", summaries_);
  if (best_id_) {
    write_best_solution(run_dir_ / "best_solution.txt", store_.get(*best_id_).content);
  }
}

IterationSummary Engine::run_iteration() {
  const int t = iteration_ + 1;
  const auto& eng = config_.engine;
  const std::size_t G = static_cast<std::size_t>(eng.group_size);

  const std::vector<RecordId> parents = sample_parents(t);
  const std::size_t B = parents.size();

  // Phase 1: prompts and mutations, fully deterministic in (t, i, j).
  std::vector<std::vector<MutationOutcome>> outcomes(B);
  for (std::size_t i = 0; i < B; ++i) {
    const SolutionRecord& parent = store_.get(parents[i]);
    const PromptBundle bundle = construct_prompt(deps_.prompt_template, store_, parent.id,
                                                 static_cast<std::size_t>(eng.n_ancestors),
                                                 eng.prompt_char_budget);
    outcomes[i].reserve(G);
    for (std::size_t j = 0; j < G; ++j) {
      const std::uint64_t seed =
          derive_seed(config_.seed, {kTagMutate, static_cast<std::uint64_t>(t),
                                     static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
      outcomes[i].push_back(deps_.mutator->mutate(bundle, parent, seed));
    }
  }

  // Phase 2: evaluation; joined in index order, so worker count never
  // affects results.
  std::vector<std::vector<EvalResult>> evals(B, std::vector<EvalResult>(G));
  std::vector<std::pair<std::size_t, std::size_t>> todo;
  for (std::size_t i = 0; i < B; ++i) {
    for (std::size_t j = 0; j < G; ++j) {
      if (outcomes[i][j].parse_ok) {
        todo.emplace_back(i, j);
      } else {
        evals[i][j].feedback = "mutation failed: " + outcomes[i][j].failure_reason;
      }
    }
  }
  const std::size_t workers = static_cast<std::size_t>(eng.eval_workers);
  if (workers <= 1) {
    for (const auto& [i, j] : todo) {
      evals[i][j] = deps_.task->evaluate(outcomes[i][j].content);
    }
  } else {
    for (std::size_t base = 0; base < todo.size(); base += workers) {
      const std::size_t wave = std::min(workers, todo.size() - base);
      std::vector<std::future<EvalResult>> futures;
      futures.reserve(wave);
      for (std::size_t w = 0; w < wave; ++w) {
        const auto [i, j] = todo[base + w];
        futures.push_back(std::async(std::launch::async, [this, i, j, &outcomes] {
          return deps_.task->evaluate(outcomes[i][j].content);
        }));
      }
      for (std::size_t w = 0; w < wave; ++w) {
        const auto [i, j] = todo[base + w];
        evals[i][j] = futures[w].get();
      }
    }
  }

  // Phase 3: insert in (batch, rollout) order; ids stay sequential.
  std::vector<RecordId> new_ids;
  new_ids.reserve(B * G);
  std::vector<GroupRollout> groups;
  groups.reserve(B);
  double reward_sum = 0.0;
  std::size_t valid_count = 0;
  for (std::size_t i = 0; i < B; ++i) {
    GroupRollout g;
    g.t = t;
    g.batch = static_cast<int>(i);
    g.prompt_key = parents[i];
    for (std::size_t j = 0; j < G; ++j) {
      SolutionRecord rec;
      rec.id = next_id_++;
      rec.parent_id = parents[i];
      rec.iteration = t;
      rec.content = outcomes[i][j].content;
      rec.reward = evals[i][j].reward;
      rec.valid = evals[i][j].valid;
      rec.feedback = evals[i][j].feedback;
      rec.mutator_tag = deps_.mutator->tag();
      rec.group_key = GroupKey{static_cast<int>(i), static_cast<int>(j)};
      g.rollout_ids.push_back(rec.id);
      g.rewards.push_back(rec.reward);
      reward_sum += rec.reward;
      valid_count += rec.valid ? 1 : 0;
      new_ids.push_back(rec.id);
      store_.insert(std::move(rec));
      note_candidate(store_.get(new_ids.back()));
    }
    g.advantages = group_advantages(g.rewards);
    groups.push_back(std::move(g));
  }

  embed_and_score(new_ids);

  for (RecordId id : new_ids) log_->append_solution(store_.get(id));
  for (const GroupRollout& g : groups) log_->append_group(g);

  population_.member_ids = select_population(t);

  IterationSummary summary;
  summary.t = t;
  summary.best_so_far = best_id_ ? best_reward_ : 0.0;
  summary.mean_reward = reward_sum / static_cast<double>(new_ids.size());
  summary.validity_rate = static_cast<double>(valid_count) / static_cast<double>(new_ids.size());
  summary.population = population_.member_ids;
  double div_sum = 0.0;
  for (RecordId id : population_.member_ids) {
    div_sum += store_.get(id).diversity.value_or(0.0);
  }
  summary.population_mean_diversity =
      population_.member_ids.empty()
          ? 0.0
          : div_sum / static_cast<double>(population_.member_ids.size());
  log_->append_iteration(summary);
  summaries_.push_back(summary);
  iteration_ = t;

  if (t % config_.checkpoint_every == 0) checkpoint_now();
  write_artifacts();
  return summary;
}

void Engine::checkpoint_now() {
  Checkpoint cp;
  cp.iteration = iteration_;
  cp.master_seed = config_.seed;
  cp.record_count = store_.size();
  cp.population = population_.member_ids;
  cp.config_hash = config_hash_;
  write_checkpoint(run_dir_ / "checkpoints", cp);
}

int Engine::run_to(int target, const std::atomic<bool>* stop) {
  int done = 0;
  while (iteration_ < target) {
    if (stop != nullptr && stop->load()) break;
    run_iteration();
    ++done;
  }
  // An off-cadence stop still leaves a checkpoint at the exact boundary.
  if (done > 0 && iteration_ % config_.checkpoint_every != 0) checkpoint_now();
  return done;
}

std::uint64_t Engine::state_hash() const {
  std::uint64_t h = kFnvOffset;
  fnv_step(h, static_cast<std::uint64_t>(iteration_));
  fnv_step(h, store_.size());
  for (RecordId id : store_.ids_in_insertion_order()) {
    const SolutionRecord& rec = store_.get(id);
    fnv_step(h, id);
    fnv_step(h, content_hash(rec.content));
    fnv_step(h, std::bit_cast<std::uint64_t>(rec.reward));
    fnv_step(h, rec.valid ? 1u : 0u);
  }
  for (RecordId id : population_.member_ids) fnv_step(h, id);
  fnv_step(h, best_id_.value_or(0));
  return h;
}

}  // namespace helix
