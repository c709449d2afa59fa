#include "helix/mutators.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <sstream>

#include "helix/expression.hpp"
#include "helix/rng.hpp"

namespace helix {

std::string strip_think_tags(const std::string& text) {
  static const std::string open = "<think>";
  static const std::string close = "</think>";
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = text.find(open, pos);
    if (start == std::string::npos) {
      out.append(text, pos, text.size() - pos);
      break;
    }
    out.append(text, pos, start - pos);
    const std::size_t end = text.find(close, start + open.size());
    if (end == std::string::npos) break;
    pos = end + close.size();
  }
  return out;
}

namespace {

std::string rstrip(const std::string& line) {
  std::size_t end = line.size();
  while (end > 0 && (line[end - 1] == ' ' || line[end - 1] == '\t' || line[end - 1] == '\r')) {
    --end;
  }
  return line.substr(0, end);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  lines.push_back(std::move(cur));
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines, std::size_t begin,
                       std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

}  // namespace

std::vector<DiffBlock> parse_diff(const std::string& response) {
  const std::string text = strip_think_tags(response);
  const std::vector<std::string> lines = split_lines(text);

  std::vector<DiffBlock> blocks;
  std::size_t i = 0;
  while (i < lines.size()) {
    if (rstrip(lines[i]) != "<<<<<<< SEARCH") {
      ++i;
      continue;
    }
    const std::size_t opener_line = i++;
    std::size_t sep = std::string::npos;
    std::size_t term = std::string::npos;
    for (std::size_t j = i; j < lines.size(); ++j) {
      const std::string t = rstrip(lines[j]);
      if (t == "=======" && sep == std::string::npos) {
        sep = j;
      } else if (t == ">>>>>>> REPLACE") {
        term = j;
        break;
      } else if (t == "<<<<<<< SEARCH") {
        break;
      }
    }
    if (sep == std::string::npos || term == std::string::npos || sep > term) {
      throw MalformedDiffError("search/replace block opened at line " +
                               std::to_string(opener_line + 1) + " is not terminated");
    }
    DiffBlock block;
    block.search = join_lines(lines, i, sep);
    block.replace = join_lines(lines, sep + 1, term);
    if (block.search.empty()) {
      throw MalformedDiffError("block opened at line " + std::to_string(opener_line + 1) +
                               " has an empty SEARCH section");
    }
    blocks.push_back(std::move(block));
    i = term + 1;
  }
  return blocks;
}

std::string apply_diff(const std::string& content, const std::vector<DiffBlock>& blocks) {
  std::string out = content;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::size_t pos = out.find(blocks[b].search);
    if (pos == std::string::npos) {
      throw SearchNotFoundError(b, "SearchNotFound at block " + std::to_string(b) +
                                       ": search text does not occur in the content");
    }
    out.replace(pos, blocks[b].search.size(), blocks[b].replace);
  }
  return out;
}

std::optional<std::string> parse_full_answer(const std::string& response,
                                             const std::string& fence_language) {
  const std::vector<std::string> lines = split_lines(response);
  std::optional<std::string> last;
  std::size_t i = 0;
  while (i < lines.size()) {
    const std::string t = rstrip(lines[i]);
    if (t.rfind("```", 0) != 0) {
      ++i;
      continue;
    }
    const std::string lang = t.substr(3);
    ++i;
    const std::size_t body_start = i;
    while (i < lines.size() && rstrip(lines[i]) != "```") ++i;
    if (i >= lines.size()) break;  // unterminated fence: ignore
    if (fence_language.empty() || lang == fence_language) {
      last = join_lines(lines, body_start, i);
    }
    ++i;
  }
  return last;
}

// ---------------------------------------------------------------------------
// LLM-backed mutation
// ---------------------------------------------------------------------------

MutationOutcome llm_mutate(const LlmEndpointConfig& config, ChatTransport& transport,
                           const std::string& prompt, const std::string& parent_content) {
  nlohmann::json request = {
      {"model", config.model},
      {"messages", nlohmann::json::array({nlohmann::json{{"role", "user"}, {"content", prompt}}})},
      {"temperature", config.temperature},
      {"top_p", config.top_p},
      {"max_tokens", config.max_tokens},
  };

  MutationOutcome out;
  out.raw_response = transport.complete(request.dump());

  std::string reply;
  try {
    const nlohmann::json body = nlohmann::json::parse(out.raw_response);
    reply = body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    out.failure_reason = std::string("unparseable endpoint response: ") + e.what();
    return out;
  }

  const std::string visible = strip_think_tags(reply);
  if (config.mode == MutationMode::kFullAnswer) {
    std::optional<std::string> answer = parse_full_answer(visible, config.fence_language);
    if (!answer) {
      out.failure_reason = "no fenced answer block in response";
      return out;
    }
    out.parse_ok = true;
    out.content = std::move(*answer);
    return out;
  }

  std::vector<DiffBlock> blocks;
  try {
    blocks = parse_diff(visible);
  } catch (const MalformedDiffError& e) {
    out.failure_reason = std::string("malformed diff: ") + e.what();
    return out;
  }
  if (blocks.empty()) {
    out.failure_reason = "no search/replace blocks in response";
    return out;
  }
  try {
    out.content = apply_diff(parent_content, blocks);
  } catch (const SearchNotFoundError& e) {
    out.failure_reason = e.what();
    return out;
  }
  out.parse_ok = true;
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic stubs
// ---------------------------------------------------------------------------

namespace {

std::string format_shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct LiteralSpan {
  std::size_t begin = 0;
  std::size_t length = 0;
  double value = 0.0;
};

std::vector<LiteralSpan> find_numeric_literals(const std::string& text) {
  std::vector<LiteralSpan> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    const char prev = i > 0 ? text[i - 1] : '\0';
    const bool prev_blocks = std::isalnum(static_cast<unsigned char>(prev)) || prev == '_' ||
                             prev == '.';
    const bool starts_number =
        std::isdigit(static_cast<unsigned char>(c)) ||
        ((c == '-' || c == '+' || c == '.') && i + 1 < text.size() &&
         std::isdigit(static_cast<unsigned char>(text[i + 1])));
    if (!starts_number || prev_blocks) {
      ++i;
      continue;
    }
    char* end = nullptr;
    const double v = std::strtod(text.c_str() + i, &end);
    const std::size_t len = static_cast<std::size_t>(end - (text.c_str() + i));
    if (len == 0) {
      ++i;
      continue;
    }
    spans.push_back({i, len, v});
    i += len;
  }
  return spans;
}

std::string numeric_jitter(const std::string& parent, Rng& rng, const StubParams& params) {
  const std::vector<LiteralSpan> spans = find_numeric_literals(parent);
  if (spans.empty()) {
    throw UnparseableParentError("numeric-jitter found no numeric literals in the parent");
  }
  const bool restart = params.restart_prob > 0.0 && rng.uniform() < params.restart_prob;
  std::string out;
  out.reserve(parent.size() + spans.size() * 8);
  std::size_t pos = 0;
  for (const LiteralSpan& s : spans) {
    out.append(parent, pos, s.begin - pos);
    const double v = restart ? rng.uniform(params.restart_low, params.restart_high)
                             : s.value + rng.gaussian(0.0, params.sigma);
    out += format_shortest(v);
    pos = s.begin + s.length;
  }
  out.append(parent, pos, parent.size() - pos);
  return out;
}

struct Circle {
  double x, y, r;
};

double boundary_slack(const Circle& c, bool disk) {
  if (disk) return 1.0 - std::sqrt(c.x * c.x + c.y * c.y);
  return std::min(std::min(c.x, 1.0 - c.x), std::min(c.y, 1.0 - c.y));
}

std::string circle_refine(const std::string& parent, Rng& rng, const StubParams& params) {
  std::vector<Circle> circles;
  try {
    const nlohmann::json arr = nlohmann::json::parse(parent);
    if (!arr.is_array() || arr.empty()) {
      throw UnparseableParentError("circle-refine expects a non-empty JSON array");
    }
    for (const auto& item : arr) {
      if (!item.is_array() || item.size() != 3) {
        throw UnparseableParentError("circle-refine expects [x, y, r] triples");
      }
      circles.push_back({item[0].get<double>(), item[1].get<double>(), item[2].get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw UnparseableParentError(std::string("circle-refine cannot parse parent: ") + e.what());
  }

  // Move a few centers, not all of them: a one-to-three-circle neighborhood
  // hill-climbs, a full shake is just random search in 2n dimensions. The
  // step scale is drawn log-uniform down to sigma/100 per mutation so the
  // same operator serves coarse escapes and late tangency refinements.
  const std::size_t n = circles.size();
  const std::size_t moves = 1 + rng.below(std::min<std::uint64_t>(n, 3));
  const double scale = params.sigma * std::pow(10.0, rng.uniform(-2.0, 0.0));
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  for (std::size_t i = 0; i < moves; ++i) {
    std::swap(pick[i], pick[i + rng.below(n - i)]);
    Circle& c = circles[pick[i]];
    if (params.restart_prob > 0.0 && rng.uniform() < params.restart_prob) {
      // Teleport: drop the circle somewhere fresh inside the domain.
      if (params.disk_domain) {
        const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        const double radius = std::sqrt(rng.uniform());
        c.x = radius * std::cos(angle);
        c.y = radius * std::sin(angle);
      } else {
        c.x = rng.uniform();
        c.y = rng.uniform();
      }
    } else {
      c.x += rng.gaussian(0.0, scale);
      c.y += rng.gaussian(0.0, scale);
    }
    if (params.disk_domain) {
      const double norm = std::sqrt(c.x * c.x + c.y * c.y);
      if (norm > 1.0) {
        c.x /= norm;
        c.y /= norm;
      }
    } else {
      c.x = std::clamp(c.x, 0.0, 1.0);
      c.y = std::clamp(c.y, 0.0, 1.0);
    }
  }
  for (auto& c : circles) c.r = 0.0;

  // Radii rebuilt from scratch in a random order; the second pass re-grows
  // each circle against the final neighborhood, which only enlarges radii.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t idx : order) {
      Circle& c = circles[idx];
      double limit = boundary_slack(c, params.disk_domain);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == idx) continue;
        const double dx = c.x - circles[j].x;
        const double dy = c.y - circles[j].y;
        limit = std::min(limit, std::sqrt(dx * dx + dy * dy) - circles[j].r);
      }
      c.r = std::max(0.0, limit);
    }
  }

  // Float rounding can leave a constraint violated by an ulp; shrink until
  // the configuration verifies with zero slack. The predicates are written
  // in exactly the forms the evaluator uses.
  auto violates_boundary = [&](const Circle& c) {
    if (params.disk_domain) return std::sqrt(c.x * c.x + c.y * c.y) + c.r > 1.0;
    return c.x - c.r < 0.0 || c.x + c.r > 1.0 || c.y - c.r < 0.0 || c.y + c.r > 1.0;
  };
  for (int guard = 0; guard < 20000; ++guard) {
    bool fixed_something = false;
    for (std::size_t i = 0; i < n; ++i) {
      Circle& c = circles[i];
      while (c.r > 0.0 && violates_boundary(c)) {
        c.r = std::max(0.0, std::nextafter(c.r, -1.0));
        fixed_something = true;
      }
    }
    for (std::size_t i = 0; i < n && !fixed_something; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = circles[i].x - circles[j].x;
        const double dy = circles[i].y - circles[j].y;
        if (circles[i].r + circles[j].r > std::sqrt(dx * dx + dy * dy)) {
          Circle& larger = circles[i].r >= circles[j].r ? circles[i] : circles[j];
          larger.r = std::max(0.0, std::nextafter(larger.r, -1.0));
          fixed_something = true;
          break;
        }
      }
    }
    if (!fixed_something) break;
  }

  nlohmann::json out = nlohmann::json::array();
  for (const Circle& c : circles) {
    out.push_back(nlohmann::json::array({c.x, c.y, c.r}));
  }
  return out.dump();
}

ExprPtr random_subtree(Rng& rng, int depth, const StubParams& params) {
  const double roll = rng.uniform();
  if (depth <= 0 || roll < 0.30) {
    const double leaf = rng.uniform();
    if (leaf < 0.40 && params.num_vars > 0) {
      return make_var(static_cast<int>(rng.below(static_cast<std::uint64_t>(params.num_vars))));
    }
    if (leaf < 0.80) {
      return make_param(static_cast<int>(rng.below(kMaxFitParams)));
    }
    return make_const(rng.uniform(-2.0, 2.0));
  }
  if (roll < 0.70) {
    static const BinaryOp ops[] = {BinaryOp::kAdd, BinaryOp::kSub, BinaryOp::kMul,
                                   BinaryOp::kDiv, BinaryOp::kPow};
    const BinaryOp op = ops[rng.below(5)];
    return make_binary(op, random_subtree(rng, depth - 1, params),
                       random_subtree(rng, depth - 1, params));
  }
  static const UnaryOp ops[] = {UnaryOp::kNeg, UnaryOp::kExp, UnaryOp::kLog, UnaryOp::kSin,
                                UnaryOp::kCos, UnaryOp::kSqrt, UnaryOp::kAbs};
  const UnaryOp op = ops[rng.below(7)];
  return make_unary(op, random_subtree(rng, depth - 1, params));
}

std::string expr_subtree(const std::string& parent, Rng& rng, const StubParams& params) {
  ExprPtr root;
  try {
    root = parse_expression(parent, params.max_depth);
  } catch (const ExpressionParseError& e) {
    throw UnparseableParentError(std::string("expr-subtree cannot parse parent: ") + e.what());
  }
  const ExprPtr replacement = random_subtree(rng, 2, params);
  const int size = expr_size(root);
  for (int attempt = 0; attempt < 8; ++attempt) {
    const int target = static_cast<int>(rng.below(static_cast<std::uint64_t>(size)));
    ExprPtr mutated = replace_node(root, target, replacement);
    if (expr_depth(mutated) <= params.max_depth) return to_string(mutated);
  }
  // Everything puts the tree over the cap; replace the whole genome.
  return to_string(replacement);
}

}  // namespace

std::string stub_mutate(StubKind kind, const std::string& parent_content, std::uint64_t rng_seed,
                        const StubParams& params) {
  Rng rng(rng_seed);
  switch (kind) {
    case StubKind::kNumericJitter:
      return numeric_jitter(parent_content, rng, params);
    case StubKind::kCircleRefine:
      return circle_refine(parent_content, rng, params);
    case StubKind::kExprSubtree:
      return expr_subtree(parent_content, rng, params);
  }
  throw ConfigError("unknown stub kind");
}

namespace {

class StubMutator final : public Mutator {
 public:
  StubMutator(StubKind kind, StubParams params) : kind_(kind), params_(params) {
    switch (kind) {
      case StubKind::kNumericJitter:
        tag_ = "numeric-jitter";
        break;
      case StubKind::kCircleRefine:
        tag_ = "circle-refine";
        break;
      case StubKind::kExprSubtree:
        tag_ = "expr-subtree";
        break;
    }
  }

  std::string tag() const override { return tag_; }

  MutationOutcome mutate(const PromptBundle&, const SolutionRecord& parent,
                         std::uint64_t seed) override {
    MutationOutcome out;
    try {
      out.content = stub_mutate(kind_, parent.content, seed, params_);
      out.parse_ok = true;
    } catch (const UnparseableParentError& e) {
      out.failure_reason = e.what();
    }
    return out;
  }

 private:
  StubKind kind_;
  StubParams params_;
  std::string tag_;
};

class LlmMutator final : public Mutator {
 public:
  LlmMutator(LlmEndpointConfig config, std::shared_ptr<ChatTransport> transport)
      : config_(std::move(config)), transport_(std::move(transport)) {}

  std::string tag() const override { return "llm"; }

  MutationOutcome mutate(const PromptBundle& prompt, const SolutionRecord& parent,
                         std::uint64_t) override {
    return llm_mutate(config_, *transport_, prompt.text, parent.content);
  }

 private:
  LlmEndpointConfig config_;
  std::shared_ptr<ChatTransport> transport_;
};

}  // namespace

std::unique_ptr<Mutator> make_stub_mutator(StubKind kind, StubParams params) {
  return std::make_unique<StubMutator>(kind, params);
}

std::unique_ptr<Mutator> make_llm_mutator(LlmEndpointConfig config,
                                          std::shared_ptr<ChatTransport> transport) {
  return std::make_unique<LlmMutator>(std::move(config), std::move(transport));
}

}  // namespace helix
