#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "helix/errors.hpp"
#include "helix/expression.hpp"
#include "helix/sr_datasets.hpp"

namespace helix {

struct EvalResult {
  double reward = 0.0;
  bool valid = false;
  std::string feedback;
  double wall_time_seconds = 0.0;
};

// ---------------------------------------------------------------------------
// Circle packing
// ---------------------------------------------------------------------------

enum class PackingDomain { kUnitSquare, kUnitDisk };

struct CirclePackingInstance {
  int n = 26;
  PackingDomain domain = PackingDomain::kUnitSquare;
  double tolerance = 1e-9;
};

struct Violation {
  std::string description;
  double magnitude = 0.0;
};

struct PackingCheck {
  bool feasible = false;
  double sum_radii = 0.0;
  double min_slack = 0.0;
  std::vector<Violation> violations;
};

// Containment and pairwise non-overlap, tolerance-relaxed. Circles are
// (x, y, r) triples.
PackingCheck check_circle_packing(const std::vector<std::array<double, 3>>& circles,
                                  const CirclePackingInstance& instance);

// Content is a JSON array of exactly n [x, y, r] triples. Feasible
// configurations score the radius sum; anything else is invalid with the
// worst violation in the feedback.
EvalResult eval_circle_packing(const std::string& content,
                               const CirclePackingInstance& instance);

// ---------------------------------------------------------------------------
// Benchmark function minimization
// ---------------------------------------------------------------------------

struct BenchmarkFunction {
  std::string name;
  int dimension = 2;
  std::vector<std::pair<double, double>> bounds;  // per coordinate
  double known_min_value = 0.0;
  // Unset when the constrained optimum location is not reliably known.
  std::optional<std::vector<double>> known_min_point;
  // Extra inequality constraints g(x) >= 0 beyond the box bounds.
  std::vector<std::pair<std::string, std::function<double(const std::vector<double>&)>>>
      constraints;
  std::function<double(const std::vector<double>&)> fn;
};

// Catalog: "eggholder", "mishras-bird", "keanes-bump" (dimension 10, 20 or
// 30 for the latter).
BenchmarkFunction make_benchmark(const std::string& name, int dimension = 0);

double eval_benchmark(const BenchmarkFunction& f, const std::vector<double>& x);

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
  // Smallest non-violated margin, for near-boundary feedback.
  double min_margin = 0.0;
  std::string tightest;
};

FeasibilityReport check_constraints(const BenchmarkFunction& f, const std::vector<double>& x);

// |f*| / (|f*| + |found - f*|): 1 at the known minimum, decaying with the
// gap.
double minimization_reward(double found_value, const BenchmarkFunction& f);

// Content is a JSON array of `dimension` numbers.
EvalResult eval_function_min(const std::string& content, const BenchmarkFunction& f);

// ---------------------------------------------------------------------------
// Scoring transforms shared with ML-flavored tasks
// ---------------------------------------------------------------------------

// Mean per-class F1 over the given class set. Classes absent from both
// predictions and labels contribute zero.
double macro_f1(const std::vector<int>& predicted, const std::vector<int>& actual,
                const std::vector<int>& classes);

double rmse_reward(double rmse);

// 1 - RMSLE in log1p space; every value must exceed -1.
double rmsle_reward(const std::vector<double>& predictions, const std::vector<double>& actuals);
// Column-wise variant, averaged over target columns.
double rmsle_reward(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& actuals);

// Normalized mean squared error against the target variance. Targets must
// not be all identical.
double nmse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets);

// -log10(median + 1e-300) over per-case NMSE values.
double sr_category_reward(std::vector<double> case_nmses);

// ---------------------------------------------------------------------------
// External subprocess evaluator
// ---------------------------------------------------------------------------

// Spawns argv, writes {"content": ...} as one JSON line to its stdin, and
// reads a {"reward", "valid", "feedback"} JSON object from its stdout.
// Overrunning the limit kills the process and scores invalid/0 "timeout";
// nonzero exit scores invalid/0 with stderr as feedback. A command that
// cannot be spawned at all is a configuration fault (SpawnFailureError).
EvalResult external_evaluate(const std::vector<std::string>& command, const std::string& content,
                             double time_limit_seconds);

// ---------------------------------------------------------------------------
// Task plug-in contract
// ---------------------------------------------------------------------------

class Task {
 public:
  virtual ~Task() = default;
  virtual std::string name() const = 0;
  // Picks the default prompt template and stub mutator.
  virtual std::string kind() const = 0;
  virtual std::vector<std::string> initial_solutions() const = 0;
  virtual EvalResult evaluate(const std::string& content) const = 0;
  virtual std::string problem_description() const = 0;
  virtual double time_limit_seconds() const = 0;
  // Hints for configuring stub mutators; harmless defaults elsewhere.
  virtual bool uses_disk_domain() const { return false; }
  virtual int input_dimension() const { return 1; }
};

// Builds a task from its JSON config section. Kinds: "circle-packing",
// "function-min", "symbolic-regression", "external".
std::shared_ptr<Task> make_task(const nlohmann::json& config);

struct SrFitBudget {
  int restarts = 8;
  int iterations = 200;
};

// Exposed for tests: the symbolic-regression scoring path for one
// expression over a set of cases.
std::vector<double> sr_case_nmses(const ExprPtr& expr, const std::vector<Dataset>& cases,
                                  const SrFitBudget& budget, std::uint64_t seed);

}  // namespace helix
