#include "helix/prompting.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace helix {

std::string format_significant(double value, int digits) {
  char buf[64];
  // '#' keeps trailing zeros so six significant digits always render as six.
  std::snprintf(buf, sizeof(buf), "%#.*g", digits, value);
  std::string s(buf);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

std::string render_status(const SolutionRecord& record) {
  if (!record.parent_id) return "Initial Program";
  return "Reward: " + format_significant(record.reward, 6) +
         ", Valid: " + (record.valid ? "yes" : "no");
}

namespace {

void replace_all(std::string& text, const std::string& needle, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
}

// Single pass so placeholder-shaped text inside a value is never expanded.
std::string render_entry(const PromptTemplate& tpl, const SolutionRecord& record,
                         const std::string& feedback) {
  const std::string& fmt = tpl.entry_format;
  std::string out;
  out.reserve(fmt.size() + record.content.size() + feedback.size());
  std::size_t pos = 0;
  while (pos < fmt.size()) {
    const std::size_t open = fmt.find('{', pos);
    if (open == std::string::npos) {
      out.append(fmt, pos, fmt.size() - pos);
      break;
    }
    out.append(fmt, pos, open - pos);
    const std::size_t close = fmt.find('}', open);
    const std::string key =
        close == std::string::npos ? std::string() : fmt.substr(open + 1, close - open - 1);
    if (key == "status") {
      out += render_status(record);
    } else if (key == "content") {
      out += record.content;
    } else if (key == "reward") {
      out += format_significant(record.reward, 6);
    } else if (key == "feedback") {
      out += feedback;
    } else {
      out.push_back('{');
      pos = open + 1;
      continue;
    }
    pos = close + 1;
  }
  return out;
}

std::string assemble(const PromptTemplate& tpl, const LineageStore& store,
                     const SolutionRecord& current, const std::string& current_feedback,
                     const std::vector<RecordId>& ancestors, std::size_t ancestor_count) {
  std::string text = tpl.system_preamble;
  if (!tpl.problem_description.empty()) {
    text += "\n\n";
    text += tpl.problem_description;
  }
  text += "\n\n";
  text += tpl.current_marker;
  text += "\n";
  text += render_entry(tpl, current, current_feedback);
  for (std::size_t k = 0; k < ancestor_count; ++k) {
    const SolutionRecord& anc = store.get(ancestors[k]);
    std::string marker = tpl.ancestor_marker;
    replace_all(marker, "{k}", std::to_string(k + 1));
    text += "\n";
    text += marker;
    text += "\n";
    text += render_entry(tpl, anc, tpl.include_ancestor_feedback ? anc.feedback : std::string());
  }
  return text;
}

// Cut at a UTF-8 boundary so truncation never splits a code point.
std::size_t utf8_safe_cut(const std::string& s, std::size_t cut) {
  while (cut > 0 && cut < s.size() && (static_cast<unsigned char>(s[cut]) & 0xc0) == 0x80) --cut;
  return cut;
}

}  // namespace

PromptBundle construct_prompt(const PromptTemplate& tpl, const LineageStore& store,
                              RecordId solution_id, std::size_t n_ancestors,
                              std::size_t char_budget) {
  const SolutionRecord& current = store.get(solution_id);
  const std::vector<RecordId> ancestors = ancestor_chain(store, solution_id, n_ancestors);

  // Drop the farthest ancestor until the text fits.
  for (std::size_t count = ancestors.size() + 1; count-- > 0;) {
    std::string text = assemble(tpl, store, current, current.feedback, ancestors, count);
    if (text.size() <= char_budget) {
      PromptBundle out;
      out.text = std::move(text);
      out.included_ids.push_back(solution_id);
      out.included_ids.insert(out.included_ids.end(), ancestors.begin(),
                              ancestors.begin() + static_cast<std::ptrdiff_t>(count));
      out.char_count = out.text.size();
      return out;
    }
  }

  // No ancestors fit; shorten the current feedback, never the content.
  if (assemble(tpl, store, current, std::string(), ancestors, 0).size() > char_budget) {
    throw BudgetTooSmallError("prompt budget " + std::to_string(char_budget) +
                              " cannot fit the current solution block");
  }
  std::size_t lo = 0, hi = current.feedback.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    const std::size_t cut = utf8_safe_cut(current.feedback, mid);
    const std::string text =
        assemble(tpl, store, current, current.feedback.substr(0, cut), ancestors, 0);
    if (text.size() <= char_budget) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  const std::size_t cut = utf8_safe_cut(current.feedback, lo);
  PromptBundle out;
  out.text = assemble(tpl, store, current, current.feedback.substr(0, cut), ancestors, 0);
  out.included_ids.push_back(solution_id);
  out.char_count = out.text.size();
  return out;
}

namespace {

const char* kDiffInstructions =
    "Propose an improvement as one or more search/replace edits to the current\n"
    "solution, each in exactly this form:\n"
    "<<<<<<< SEARCH\n"
    "(exact text copied from the current solution)\n"
    "=======\n"
    "(replacement text)\n"
    ">>>>>>> REPLACE\n"
    "The SEARCH text must match the current solution exactly. You may think out\n"
    "loud first inside <think>...</think> tags; everything inside them is ignored.";

const char* kFullAnswerInstructions =
    "Respond with the complete improved solution inside a fenced code block. The\n"
    "last fenced block in your reply is taken as the answer. You may think out\n"
    "loud first inside <think>...</think> tags; everything inside them is ignored.";

std::string entry_with_fence(const std::string& fence) {
  return "Status: {status}\n```" + fence + "\n{content}\n```\nFeedback: {feedback}\n";
}

}  // namespace

PromptTemplate default_template(const std::string& task_kind, MutationMode mode) {
  PromptTemplate tpl;
  tpl.current_marker = "## Current Program";
  tpl.ancestor_marker = "## Ancestor {k}";
  const std::string instructions =
      mode == MutationMode::kDiff ? kDiffInstructions : kFullAnswerInstructions;

  if (task_kind == "circle-packing") {
    tpl.system_preamble =
        "You are an expert at geometric packing problems. Improve the circle\n"
        "configuration below so the radii sum as high as possible while every\n"
        "constraint stays satisfied.\n\n" +
        instructions;
    tpl.entry_format = entry_with_fence("json");
  } else if (task_kind == "function-min") {
    tpl.system_preamble =
        "You are an expert at global optimization. Propose a better candidate\n"
        "point for the minimization problem described below.\n\n" +
        instructions;
    tpl.entry_format = entry_with_fence("json");
  } else if (task_kind == "symbolic-regression") {
    tpl.system_preamble =
        "You are an expert at discovering symbolic formulas from data. Improve\n"
        "the candidate expression below. Write expressions in prefix form, e.g.\n"
        "(+ (* p0 (var 0)) p1). Up to ten numeric parameters p0..p9 are fitted\n"
        "to the data after parsing, so prefer parameters over hard-coded\n"
        "constants.\n\n" +
        instructions;
    tpl.entry_format = entry_with_fence("lisp");
  } else {
    tpl.system_preamble =
        "You are an expert problem solver. Improve the current solution below;\n"
        "its evaluation feedback tells you what is wrong or weak.\n\n" +
        instructions;
    tpl.entry_format = entry_with_fence("");
  }
  return tpl;
}

PromptTemplate load_template_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read template file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string raw = ss.str();

  PromptTemplate tpl = default_template("", MutationMode::kDiff);
  std::string section;
  std::string body;
  auto commit = [&]() {
    if (section.empty()) return;
    // Trim one trailing newline left by the section layout.
    if (!body.empty() && body.back() == '\n') body.pop_back();
    if (section == "system") {
      tpl.system_preamble = body;
    } else if (section == "problem") {
      tpl.problem_description = body;
    } else if (section == "entry") {
      tpl.entry_format = body;
    } else if (section == "current_marker") {
      tpl.current_marker = body;
    } else if (section == "ancestor_marker") {
      tpl.ancestor_marker = body;
    } else if (section == "ancestor_feedback") {
      tpl.include_ancestor_feedback = (body == "true" || body == "yes" || body == "1");
    } else {
      throw ConfigError("unknown template section %%" + section + "%% in " + path);
    }
    body.clear();
  };

  std::istringstream lines(raw);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() > 4 && line.rfind("%%", 0) == 0 && line.rfind("%%") == line.size() - 2) {
      commit();
      section = line.substr(2, line.size() - 4);
      continue;
    }
    if (section.empty() && !line.empty()) {
      throw ConfigError("template file " + path + " must start with a %%section%% line");
    }
    body += line;
    body += '\n';
  }
  commit();
  return tpl;
}

}  // namespace helix
