#include "helix/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "helix/core_model.hpp"

namespace helix {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& section,
                  const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + section);
    }
  }
}

json interpolate_tree(const json& j) {
  if (j.is_string()) return interpolate_env(j.get<std::string>());
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [key, value] : j.items()) out[key] = interpolate_tree(value);
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& value : j) out.push_back(interpolate_tree(value));
    return out;
  }
  return j;
}

MutationMode mode_from_string(const std::string& name) {
  if (name == "diff") return MutationMode::kDiff;
  if (name == "full-answer") return MutationMode::kFullAnswer;
  throw ConfigError("mutator mode must be 'diff' or 'full-answer', got '" + name + "'");
}

EngineConfig parse_engine(const json& j) {
  require_keys(j, "engine",
               {"batch_size", "group_size", "population_capacity", "n_ancestors",
                "prompt_char_budget", "selection", "diversity_k", "recompute_diversity",
                "parent_weighting_alpha", "eval_workers"});
  EngineConfig e;
  e.batch_size = j.value("batch_size", e.batch_size);
  e.group_size = j.value("group_size", e.group_size);
  e.population_capacity = j.value("population_capacity", e.population_capacity);
  e.n_ancestors = j.value("n_ancestors", e.n_ancestors);
  e.prompt_char_budget = j.value("prompt_char_budget", e.prompt_char_budget);
  if (j.contains("selection")) {
    e.selection = selection_mode_from_string(j.at("selection").get<std::string>());
  }
  e.diversity_k = j.value("diversity_k", e.diversity_k);
  e.recompute_diversity = j.value("recompute_diversity", e.recompute_diversity);
  e.parent_weighting_alpha = j.value("parent_weighting_alpha", e.parent_weighting_alpha);
  e.eval_workers = j.value("eval_workers", e.eval_workers);

  if (e.batch_size < 1) throw ConfigError("engine.batch_size must be >= 1");
  if (e.group_size < 2) throw ConfigError("engine.group_size must be >= 2");
  if (e.population_capacity < e.batch_size) {
    throw ConfigError("engine.population_capacity must be >= engine.batch_size");
  }
  if (e.n_ancestors < 0) throw ConfigError("engine.n_ancestors must be >= 0");
  if (e.prompt_char_budget < 1) throw ConfigError("engine.prompt_char_budget must be >= 1");
  if (e.diversity_k < 1) throw ConfigError("engine.diversity_k must be >= 1");
  if (!(e.parent_weighting_alpha >= 0.0) || !std::isfinite(e.parent_weighting_alpha)) {
    throw ConfigError("engine.parent_weighting_alpha must be finite and >= 0");
  }
  if (e.eval_workers < 1) throw ConfigError("engine.eval_workers must be >= 1");
  return e;
}

MutatorSpec parse_mutator(const json& j) {
  require_keys(j, "mutator",
               {"kind", "sigma", "restart_prob", "restart_low", "restart_high", "max_depth",
                "endpoint", "api_key", "model", "temperature", "top_p", "max_tokens", "retries",
                "backoff_initial_ms", "mode", "fence_language"});
  MutatorSpec m;
  m.kind = j.value("kind", m.kind);
  static const std::set<std::string> kinds{"auto", "numeric-jitter", "circle-refine",
                                           "expr-subtree", "llm"};
  if (!kinds.count(m.kind)) throw ConfigError("unknown mutator kind '" + m.kind + "'");

  m.stub.sigma = j.value("sigma", m.stub.sigma);
  m.stub.restart_prob = j.value("restart_prob", m.stub.restart_prob);
  m.stub.restart_low = j.value("restart_low", m.stub.restart_low);
  m.stub.restart_high = j.value("restart_high", m.stub.restart_high);
  m.stub.max_depth = j.value("max_depth", m.stub.max_depth);

  m.llm.endpoint = j.value("endpoint", m.llm.endpoint);
  m.llm.api_key = j.value("api_key", m.llm.api_key);
  m.llm.model = j.value("model", m.llm.model);
  m.llm.temperature = j.value("temperature", m.llm.temperature);
  m.llm.top_p = j.value("top_p", m.llm.top_p);
  m.llm.max_tokens = j.value("max_tokens", m.llm.max_tokens);
  m.llm.retries = j.value("retries", m.llm.retries);
  m.llm.backoff_initial_ms = j.value("backoff_initial_ms", m.llm.backoff_initial_ms);
  if (j.contains("mode")) m.llm.mode = mode_from_string(j.at("mode").get<std::string>());
  m.llm.fence_language = j.value("fence_language", m.llm.fence_language);

  if (!(m.stub.sigma > 0.0) || !std::isfinite(m.stub.sigma)) {
    throw ConfigError("mutator.sigma must be finite and > 0");
  }
  if (m.stub.restart_prob < 0.0 || m.stub.restart_prob > 1.0) {
    throw ConfigError("mutator.restart_prob must be in [0, 1]");
  }
  if (m.stub.restart_high < m.stub.restart_low) {
    throw ConfigError("mutator.restart_high must be >= mutator.restart_low");
  }
  if (m.stub.max_depth < 1) throw ConfigError("mutator.max_depth must be >= 1");
  if (m.llm.retries < 0) throw ConfigError("mutator.retries must be >= 0");
  return m;
}

EmbeddingProviderSpec parse_embedding(const json& j) {
  require_keys(j, "embedding",
               {"kind", "dimension", "endpoint", "model", "retries", "backoff_initial_ms"});
  EmbeddingProviderSpec e;
  const std::string kind = j.value("kind", std::string("hashed-ngram"));
  if (kind == "hashed-ngram") {
    e.kind = EmbeddingKind::kHashedNgram;
  } else if (kind == "http") {
    e.kind = EmbeddingKind::kHttp;
  } else {
    throw ConfigError("embedding.kind must be 'hashed-ngram' or 'http', got '" + kind + "'");
  }
  e.dimension = j.value("dimension", e.dimension);
  e.endpoint = j.value("endpoint", e.endpoint);
  e.model_name = j.value("model", e.model_name);
  e.retries = j.value("retries", e.retries);
  e.backoff_initial_ms = j.value("backoff_initial_ms", e.backoff_initial_ms);
  if (e.dimension < 1) throw ConfigError("embedding.dimension must be >= 1");
  if (e.retries < 0) throw ConfigError("embedding.retries must be >= 0");
  return e;
}

void validate_task_section(const json& task) {
  if (!task.is_object() || !task.contains("kind")) {
    throw ConfigError("task section must be an object with a 'kind'");
  }
  const std::string kind = task.at("kind").get<std::string>();
  const std::set<std::string> common{"kind", "time_limit", "initial_solutions"};
  auto with = [&common](std::initializer_list<const char*> extra) {
    std::set<std::string> keys = common;
    for (const char* k : extra) keys.insert(k);
    return keys;
  };
  if (kind == "circle-packing") {
    require_keys(task, "task", with({"n", "domain", "tolerance"}));
  } else if (kind == "function-min") {
    require_keys(task, "task", with({"function", "dimension"}));
  } else if (kind == "symbolic-regression") {
    require_keys(task, "task",
                 with({"cases", "fit_restarts", "fit_iterations", "name", "fit_seed"}));
    if (task.contains("cases")) {
      for (const auto& c : task.at("cases")) {
        if (c.is_string()) continue;
        require_keys(c, "task.cases entry",
                     {"name", "expression", "params", "input_ranges", "n_train", "n_test",
                      "noise_sigma", "seed"});
      }
    }
  } else if (kind == "external") {
    require_keys(task, "task", with({"command", "description"}));
  } else {
    throw ConfigError("unknown task kind '" + kind + "'");
  }
}

}  // namespace

std::string to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::kNsga2: return "nsga2";
    case SelectionMode::kTopScore: return "top-score";
    case SelectionMode::kTopDiversity: return "top-diversity";
    case SelectionMode::kRandom: return "random";
  }
  return "nsga2";
}

SelectionMode selection_mode_from_string(const std::string& name) {
  if (name == "nsga2") return SelectionMode::kNsga2;
  if (name == "top-score") return SelectionMode::kTopScore;
  if (name == "top-diversity") return SelectionMode::kTopDiversity;
  if (name == "random") return SelectionMode::kRandom;
  throw ConfigError("unknown selection mode '" + name + "'");
}

std::string interpolate_env(const std::string& value) {
  std::string out;
  out.reserve(value.size());
  std::size_t i = 0;
  while (i < value.size()) {
    if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
      const std::size_t close = value.find('}', i + 2);
      if (close != std::string::npos) {
        const std::string name = value.substr(i + 2, close - i - 2);
        const bool valid_name =
            !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_') &&
            std::all_of(name.begin(), name.end(), [](char c) {
              return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
            });
        if (valid_name) {
          const char* env = std::getenv(name.c_str());
          if (env == nullptr) {
            throw ConfigError("config references unset environment variable '" + name + "'");
          }
          out += env;
          i = close + 1;
          continue;
        }
      }
    }
    out += value[i];
    ++i;
  }
  return out;
}

std::uint64_t config_hash(const nlohmann::json& raw) {
  // dump() emits keys sorted, so structurally equal documents hash equally.
  return content_hash(raw.dump(-1, ' ', false, json::error_handler_t::replace));
}

RunConfig parse_run_config(const nlohmann::json& raw) {
  if (!raw.is_object()) throw ConfigError("config root must be a JSON object");
  require_keys(raw, "config",
               {"seed", "iterations", "checkpoint_every", "engine", "mutator", "embedding",
                "template_file", "task"});
  if (!raw.contains("task")) throw ConfigError("config needs a task section");

  const json j = interpolate_tree(raw);

  RunConfig c;
  c.seed = j.value("seed", c.seed);
  c.iterations = j.value("iterations", c.iterations);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  if (c.iterations < 0) throw ConfigError("iterations must be >= 0");
  if (c.checkpoint_every < 1) throw ConfigError("checkpoint_every must be >= 1");

  if (j.contains("engine")) c.engine = parse_engine(j.at("engine"));
  if (j.contains("mutator")) c.mutator = parse_mutator(j.at("mutator"));
  if (j.contains("embedding")) c.embedding = parse_embedding(j.at("embedding"));
  c.template_file = j.value("template_file", c.template_file);

  validate_task_section(j.at("task"));
  c.task_json = j.at("task").dump();
  return c;
}

LoadedConfig parse_run_config_text(const std::string& text) {
  json raw;
  try {
    raw = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  LoadedConfig out;
  out.config = parse_run_config(raw);
  out.raw_text = text;
  out.hash = config_hash(raw);
  return out;
}

LoadedConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config_text(buf.str());
}

}  // namespace helix
