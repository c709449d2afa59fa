#include "helix/tasks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "helix/rng.hpp"

namespace helix {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Circle packing
// ---------------------------------------------------------------------------

PackingCheck check_circle_packing(const std::vector<std::array<double, 3>>& circles,
                                  const CirclePackingInstance& instance) {
  const double tol = instance.tolerance;
  PackingCheck out;
  out.min_slack = kInfinity;

  auto note = [&](const std::string& what, double slack) {
    out.min_slack = std::min(out.min_slack, slack);
    if (slack < -tol) out.violations.push_back({what, -slack});
  };

  for (std::size_t i = 0; i < circles.size(); ++i) {
    const auto& [x, y, r] = circles[i];
    const std::string tag = "circle " + std::to_string(i);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(r)) {
      out.violations.push_back({tag + " has a non-finite coordinate", kInfinity});
      continue;
    }
    note(tag + " negative radius", r);
    if (instance.domain == PackingDomain::kUnitSquare) {
      note(tag + " crosses x=0", x - r);
      note(tag + " crosses x=1", 1.0 - (x + r));
      note(tag + " crosses y=0", y - r);
      note(tag + " crosses y=1", 1.0 - (y + r));
    } else {
      note(tag + " leaves the unit disk", 1.0 - (std::sqrt(x * x + y * y) + r));
    }
    out.sum_radii += r;
  }

  for (std::size_t i = 0; i < circles.size(); ++i) {
    for (std::size_t j = i + 1; j < circles.size(); ++j) {
      const double dx = circles[i][0] - circles[j][0];
      const double dy = circles[i][1] - circles[j][1];
      const double dist = std::sqrt(dx * dx + dy * dy);
      note("circles " + std::to_string(i) + " and " + std::to_string(j) + " overlap",
           dist - (circles[i][2] + circles[j][2]));
    }
  }

  out.feasible = out.violations.empty();
  if (!out.feasible) {
    std::stable_sort(out.violations.begin(), out.violations.end(),
                     [](const Violation& a, const Violation& b) {
                       return a.magnitude > b.magnitude;
                     });
  }
  return out;
}

EvalResult eval_circle_packing(const std::string& content,
                               const CirclePackingInstance& instance) {
  const auto start = std::chrono::steady_clock::now();
  EvalResult out;

  std::vector<std::array<double, 3>> circles;
  try {
    const nlohmann::json arr = nlohmann::json::parse(content);
    if (!arr.is_array()) throw ConfigError("top level is not an array");
    for (const auto& item : arr) {
      if (!item.is_array() || item.size() != 3 || !item[0].is_number() ||
          !item[1].is_number() || !item[2].is_number()) {
        throw ConfigError("entries must be [x, y, r] number triples");
      }
      circles.push_back({item[0].get<double>(), item[1].get<double>(), item[2].get<double>()});
    }
  } catch (const std::exception& e) {
    out.feedback = std::string("parse error: ") + e.what();
    out.wall_time_seconds = elapsed_since(start);
    return out;
  }

  if (static_cast<int>(circles.size()) != instance.n) {
    out.feedback = "expected exactly " + std::to_string(instance.n) + " circles, got " +
                   std::to_string(circles.size());
    out.wall_time_seconds = elapsed_since(start);
    return out;
  }

  const PackingCheck check = check_circle_packing(circles, instance);
  if (!check.feasible) {
    std::ostringstream fb;
    fb << "infeasible: " << check.violations.size() << " violated constraint(s); worst: "
       << check.violations.front().description << " by " << check.violations.front().magnitude;
    out.feedback = fb.str();
    out.wall_time_seconds = elapsed_since(start);
    return out;
  }

  out.valid = true;
  out.reward = std::max(0.0, check.sum_radii);
  std::ostringstream fb;
  fb << "feasible: sum of radii " << check.sum_radii << ", tightest slack " << check.min_slack;
  out.feedback = fb.str();
  out.wall_time_seconds = elapsed_since(start);
  return out;
}

// ---------------------------------------------------------------------------
// Benchmark functions
// ---------------------------------------------------------------------------

namespace {

double eggholder(const std::vector<double>& x) {
  const double a = x[1] + 47.0;
  return -a * std::sin(std::sqrt(std::abs(x[0] / 2.0 + a))) -
         x[0] * std::sin(std::sqrt(std::abs(x[0] - a)));
}

double mishras_bird(const std::vector<double>& x) {
  const double c = std::cos(x[0]);
  const double s = std::sin(x[1]);
  return s * std::exp((1.0 - c) * (1.0 - c)) + c * std::exp((1.0 - s) * (1.0 - s)) +
         (x[0] - x[1]) * (x[0] - x[1]);
}

double keanes_bump(const std::vector<double>& x) {
  double sum_cos4 = 0.0, prod_cos2 = 1.0, denom = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = std::cos(x[i]);
    sum_cos4 += c * c * c * c;
    prod_cos2 *= c * c;
    denom += static_cast<double>(i + 1) * x[i] * x[i];
  }
  if (denom <= 0.0) return 0.0;
  return -std::abs(sum_cos4 - 2.0 * prod_cos2) / std::sqrt(denom);
}

}  // namespace

BenchmarkFunction make_benchmark(const std::string& name, int dimension) {
  BenchmarkFunction f;
  f.name = name;
  if (name == "eggholder") {
    f.dimension = 2;
    f.bounds.assign(2, {-512.0, 512.0});
    f.known_min_value = -959.6407;
    f.known_min_point = std::vector<double>{512.0, 404.2319};
    f.fn = eggholder;
  } else if (name == "mishras-bird") {
    f.dimension = 2;
    f.bounds = {{-10.0, 0.0}, {-6.5, 0.0}};
    f.known_min_value = -106.7645;
    // The widely recorded minimum location violates the ring constraint
    // below, so no feasible optimum point is claimed; rewards anchor on the
    // value alone.
    f.known_min_point = std::nullopt;
    f.constraints.emplace_back("x0^2 + x1^2 >= 25", [](const std::vector<double>& x) {
      return x[0] * x[0] + x[1] * x[1] - 25.0;
    });
    f.fn = mishras_bird;
  } else if (name == "keanes-bump") {
    const int d = dimension == 0 ? 10 : dimension;
    if (d != 10 && d != 20 && d != 30) {
      throw ConfigError("keanes-bump is cataloged for dimensions 10, 20 and 30");
    }
    f.dimension = d;
    // Strictly positive coordinates; the lower bound stands in for x > 0.
    f.bounds.assign(static_cast<std::size_t>(d), {1e-12, 10.0});
    if (d == 10) f.known_min_value = -0.747310362;
    if (d == 20) f.known_min_value = -0.803619104;
    if (d == 30) f.known_min_value = -0.818056222;
    f.known_min_point = std::nullopt;
    f.constraints.emplace_back("prod(x) >= 0.75", [](const std::vector<double>& x) {
      double prod = 1.0;
      for (double v : x) prod *= v;
      return prod - 0.75;
    });
    f.constraints.emplace_back("sum(x) <= 7.5 * d", [](const std::vector<double>& x) {
      double sum = 0.0;
      for (double v : x) sum += v;
      return 7.5 * static_cast<double>(x.size()) - sum;
    });
    f.fn = keanes_bump;
  } else {
    throw ConfigError("unknown benchmark function '" + name + "'");
  }
  return f;
}

double eval_benchmark(const BenchmarkFunction& f, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != f.dimension) {
    throw FunctionDimensionError(f.name + " expects " + std::to_string(f.dimension) +
                                 " coordinates, got " + std::to_string(x.size()));
  }
  return f.fn(x);
}

FeasibilityReport check_constraints(const BenchmarkFunction& f, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != f.dimension) {
    throw FunctionDimensionError(f.name + " expects " + std::to_string(f.dimension) +
                                 " coordinates, got " + std::to_string(x.size()));
  }
  FeasibilityReport out;
  out.min_margin = kInfinity;

  auto note = [&](const std::string& what, double margin) {
    if (margin < 0.0) {
      out.violations.push_back({what, -margin});
    } else if (margin < out.min_margin) {
      out.min_margin = margin;
      out.tightest = what;
    }
  };

  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      out.violations.push_back({"x" + std::to_string(i) + " is non-finite", kInfinity});
      continue;
    }
    const auto& [lo, hi] = f.bounds[i];
    note("x" + std::to_string(i) + " >= " + std::to_string(lo), x[i] - lo);
    note("x" + std::to_string(i) + " <= " + std::to_string(hi), hi - x[i]);
  }
  for (const auto& [desc, g] : f.constraints) {
    note(desc, g(x));
  }
  out.feasible = out.violations.empty();
  return out;
}

double minimization_reward(double found_value, const BenchmarkFunction& f) {
  const double target = f.known_min_value;
  return std::abs(target) / (std::abs(target) + std::abs(found_value - target));
}

EvalResult eval_function_min(const std::string& content, const BenchmarkFunction& f) {
  const auto start = std::chrono::steady_clock::now();
  EvalResult out;

  std::vector<double> x;
  try {
    const nlohmann::json arr = nlohmann::json::parse(content);
    if (!arr.is_array()) throw ConfigError("top level is not an array");
    for (const auto& v : arr) {
      if (!v.is_number()) throw ConfigError("coordinates must be numbers");
      x.push_back(v.get<double>());
    }
  } catch (const std::exception& e) {
    out.feedback = std::string("parse error: ") + e.what();
    out.wall_time_seconds = elapsed_since(start);
    return out;
  }

  if (static_cast<int>(x.size()) != f.dimension) {
    out.feedback = "expected " + std::to_string(f.dimension) + " coordinates, got " +
                   std::to_string(x.size());
    out.wall_time_seconds = elapsed_since(start);
    return out;
  }

  const FeasibilityReport report = check_constraints(f, x);
  if (!report.feasible) {
    std::ostringstream fb;
    fb << "infeasible: ";
    for (std::size_t i = 0; i < report.violations.size(); ++i) {
      if (i) fb << "; ";
      fb << report.violations[i].description << " violated by " << report.violations[i].magnitude;
    }
    out.feedback = fb.str();
    out.wall_time_seconds = elapsed_since(start);
    return out;
  }

  const double value = f.fn(x);
  if (!std::isfinite(value)) {
    out.feedback = "function value is non-finite at this point";
    out.wall_time_seconds = elapsed_since(start);
    return out;
  }

  out.valid = true;
  out.reward = minimization_reward(value, f);
  std::ostringstream fb;
  fb << "f(x) = " << value << ", gap to target " << std::abs(value - f.known_min_value)
     << ", tightest constraint: " << report.tightest << " (margin " << report.min_margin << ")";
  out.feedback = fb.str();
  out.wall_time_seconds = elapsed_since(start);
  return out;
}

// ---------------------------------------------------------------------------
// Scoring transforms
// ---------------------------------------------------------------------------

double macro_f1(const std::vector<int>& predicted, const std::vector<int>& actual,
                const std::vector<int>& classes) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw ConfigError("macro_f1 needs equal-length, non-empty label vectors");
  }
  if (classes.empty()) throw ConfigError("macro_f1 needs a non-empty class set");

  double sum = 0.0;
  for (int c : classes) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      const bool p = predicted[i] == c;
      const bool a = actual[i] == c;
      tp += p && a;
      fp += p && !a;
      fn += !p && a;
    }
    // No true positives means zero F1, covering both the degenerate
    // precision/recall cases and classes absent from the split.
    if (tp > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
      sum += 2.0 * precision * recall / (precision + recall);
    }
  }
  return sum / static_cast<double>(classes.size());
}

double rmse_reward(double rmse) {
  if (rmse < 0.0) throw ValueDomainError("rmse must be non-negative");
  return 2.0 - std::log10(rmse + 1e-10);
}

double rmsle_reward(const std::vector<double>& predictions, const std::vector<double>& actuals) {
  if (predictions.size() != actuals.size() || predictions.empty()) {
    throw ConfigError("rmsle_reward needs equal-length, non-empty vectors");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] <= -1.0 || actuals[i] <= -1.0) {
      throw ValueDomainError("rmsle values must exceed -1");
    }
    const double d = std::log1p(predictions[i]) - std::log1p(actuals[i]);
    sum += d * d;
  }
  return 1.0 - std::sqrt(sum / static_cast<double>(predictions.size()));
}

double rmsle_reward(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& actuals) {
  if (predictions.rows() != actuals.rows() || predictions.cols() != actuals.cols() ||
      predictions.size() == 0) {
    throw ConfigError("rmsle_reward needs matching non-empty matrices");
  }
  double sum = 0.0;
  for (Eigen::Index c = 0; c < predictions.cols(); ++c) {
    std::vector<double> p(predictions.rows()), a(actuals.rows());
    for (Eigen::Index r = 0; r < predictions.rows(); ++r) {
      p[static_cast<std::size_t>(r)] = predictions(r, c);
      a[static_cast<std::size_t>(r)] = actuals(r, c);
    }
    sum += rmsle_reward(p, a);
  }
  return sum / static_cast<double>(predictions.cols());
}

double nmse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets) {
  if (predictions.size() != targets.size() || predictions.size() < 2) {
    throw ConfigError("nmse needs matching vectors with at least 2 samples");
  }
  const double mean = targets.mean();
  double denom = 0.0;
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    denom += (targets[i] - mean) * (targets[i] - mean);
  }
  if (denom == 0.0) {
    throw DegenerateTargetsError("targets are all identical; NMSE undefined");
  }
  double num = 0.0;
  for (Eigen::Index i = 0; i < predictions.size(); ++i) {
    if (!std::isfinite(predictions[i])) return kInfinity;
    num += (predictions[i] - targets[i]) * (predictions[i] - targets[i]);
  }
  return num / denom;
}

double sr_category_reward(std::vector<double> case_nmses) {
  if (case_nmses.empty()) throw ConfigError("sr_category_reward needs at least one case");
  for (double v : case_nmses) {
    if (std::isnan(v) || v < 0.0) throw ValueDomainError("case NMSE values must be >= 0");
  }
  std::sort(case_nmses.begin(), case_nmses.end());
  const std::size_t n = case_nmses.size();
  const double median = n % 2 == 1 ? case_nmses[n / 2]
                                   : 0.5 * (case_nmses[n / 2 - 1] + case_nmses[n / 2]);
  return -std::log10(median + 1e-300);
}

std::vector<double> sr_case_nmses(const ExprPtr& expr, const std::vector<Dataset>& cases,
                                  const SrFitBudget& budget, std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Dataset& data = cases[i];
    const FitResult fit = fit_params(expr, data.train_x, data.train_y, budget.restarts,
                                     budget.iterations, derive_seed(seed, {i}));
    const Eigen::VectorXd pred = eval_expression(expr, data.test_x, fit.params);
    out.push_back(nmse(pred, data.test_y));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Task implementations
// ---------------------------------------------------------------------------

namespace {

std::string format_bounds(const BenchmarkFunction& f) {
  std::ostringstream out;
  for (std::size_t i = 0; i < f.bounds.size(); ++i) {
    if (i) out << ", ";
    out << "x" << i << " in [" << f.bounds[i].first << ", " << f.bounds[i].second << "]";
  }
  return out.str();
}

class CirclePackingTask final : public Task {
 public:
  CirclePackingTask(CirclePackingInstance instance, std::vector<std::string> initial,
                    double time_limit)
      : instance_(instance), initial_(std::move(initial)), time_limit_(time_limit) {}

  std::string name() const override {
    return std::string("circle-packing-") +
           (instance_.domain == PackingDomain::kUnitSquare ? "square" : "disk") + "-" +
           std::to_string(instance_.n);
  }
  std::string kind() const override { return "circle-packing"; }

  std::vector<std::string> initial_solutions() const override {
    if (!initial_.empty()) return initial_;
    // Grid of zero-radius centers; the first refinement grows them.
    const int side = static_cast<int>(std::ceil(std::sqrt(instance_.n)));
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < instance_.n; ++i) {
      const double cx = (0.5 + i % side) / side;
      const double cy = (0.5 + i / side) / side;
      if (instance_.domain == PackingDomain::kUnitSquare) {
        arr.push_back({cx, cy, 0.0});
      } else {
        // Shrunk toward the origin: the raw corners of a square grid fall
        // outside the disk.
        arr.push_back({0.7 * (2.0 * cx - 1.0), 0.7 * (2.0 * cy - 1.0), 0.0});
      }
    }
    return {arr.dump()};
  }

  EvalResult evaluate(const std::string& content) const override {
    return eval_circle_packing(content, instance_);
  }

  std::string problem_description() const override {
    std::ostringstream out;
    out << "Place exactly " << instance_.n << " circles inside the "
        << (instance_.domain == PackingDomain::kUnitSquare ? "unit square [0,1] x [0,1]"
                                                           : "unit disk centered at the origin")
        << " so that no circle crosses the boundary and no two circles overlap.\n"
        << "Maximize the sum of the radii. A solution is a JSON array of exactly "
        << instance_.n << " [x, y, r] triples. Constraint checks allow slack "
        << instance_.tolerance << ".";
    return out.str();
  }

  double time_limit_seconds() const override { return time_limit_; }

  bool uses_disk_domain() const override {
    return instance_.domain == PackingDomain::kUnitDisk;
  }

 private:
  CirclePackingInstance instance_;
  std::vector<std::string> initial_;
  double time_limit_;
};

class FunctionMinTask final : public Task {
 public:
  FunctionMinTask(BenchmarkFunction f, std::vector<std::string> initial, double time_limit)
      : f_(std::move(f)), initial_(std::move(initial)), time_limit_(time_limit) {}

  std::string name() const override { return "function-min-" + f_.name; }
  std::string kind() const override { return "function-min"; }

  std::vector<std::string> initial_solutions() const override {
    if (!initial_.empty()) return initial_;
    std::vector<double> x;
    if (f_.name == "mishras-bird") {
      // A feasible point; the bounds-box center violates the ring constraint.
      x = {-6.0, -3.0};
    } else if (f_.name == "keanes-bump") {
      x.assign(static_cast<std::size_t>(f_.dimension), 3.0);
    } else {
      for (const auto& [lo, hi] : f_.bounds) x.push_back(0.5 * (lo + hi));
    }
    nlohmann::json arr = x;
    return {arr.dump()};
  }

  EvalResult evaluate(const std::string& content) const override {
    return eval_function_min(content, f_);
  }

  std::string problem_description() const override {
    std::ostringstream out;
    out << "Minimize the " << f_.name << " function over " << f_.dimension
        << " coordinates with bounds " << format_bounds(f_) << ".";
    for (const auto& [desc, g] : f_.constraints) {
      out << " Subject to " << desc << ".";
    }
    out << " The best known value is " << f_.known_min_value
        << "; reward is |target| / (|target| + |f(x) - target|)."
        << " A solution is a JSON array of " << f_.dimension << " numbers.";
    return out.str();
  }

  double time_limit_seconds() const override { return time_limit_; }

 private:
  BenchmarkFunction f_;
  std::vector<std::string> initial_;
  double time_limit_;
};

class SymbolicRegressionTask final : public Task {
 public:
  SymbolicRegressionTask(std::string name, std::vector<DatasetSpec> specs, SrFitBudget budget,
                         std::vector<std::string> initial, double time_limit, std::uint64_t seed)
      : name_(std::move(name)),
        specs_(std::move(specs)),
        budget_(budget),
        initial_(std::move(initial)),
        time_limit_(time_limit),
        seed_(seed) {
    for (const auto& spec : specs_) cases_.push_back(generate_dataset(spec));
  }

  std::string name() const override { return "symbolic-regression-" + name_; }
  std::string kind() const override { return "symbolic-regression"; }

  std::vector<std::string> initial_solutions() const override {
    if (!initial_.empty()) return initial_;
    // Linear genome over all input variables.
    const int dims = static_cast<int>(specs_.front().input_ranges.size());
    ExprPtr e = make_binary(BinaryOp::kMul, make_param(0), make_var(0));
    for (int i = 1; i < dims && i < kMaxFitParams; ++i) {
      e = make_binary(BinaryOp::kAdd, e, make_binary(BinaryOp::kMul, make_param(i), make_var(i)));
    }
    return {to_string(e)};
  }

  EvalResult evaluate(const std::string& content) const override {
    const auto start = std::chrono::steady_clock::now();
    EvalResult out;
    ExprPtr expr;
    try {
      expr = parse_expression(content);
    } catch (const ExpressionParseError& e) {
      out.feedback = std::string("parse error: ") + e.what();
      out.wall_time_seconds = elapsed_since(start);
      return out;
    }

    std::vector<double> nmses;
    try {
      nmses = sr_case_nmses(expr, cases_, budget_, seed_);
    } catch (const DegenerateTargetsError& e) {
      out.feedback = e.what();
      out.wall_time_seconds = elapsed_since(start);
      return out;
    }

    bool all_finite = true;
    for (double v : nmses) all_finite = all_finite && std::isfinite(v);
    if (!all_finite) {
      out.feedback = "expression evaluates to non-finite values on at least one case";
      out.wall_time_seconds = elapsed_since(start);
      return out;
    }

    out.valid = true;
    // The category transform can go negative for NMSE > 1; records never
    // carry negative rewards, so it is floored at zero.
    out.reward = std::max(0.0, sr_category_reward(nmses));
    std::ostringstream fb;
    fb << "case NMSE:";
    for (std::size_t i = 0; i < nmses.size(); ++i) fb << " " << specs_[i].name << "=" << nmses[i];
    fb << " (reward floor at 0; raw category reward " << sr_category_reward(nmses) << ")";
    out.feedback = fb.str();
    out.wall_time_seconds = elapsed_since(start);
    return out;
  }

  std::string problem_description() const override {
    std::ostringstream out;
    const int dims = static_cast<int>(specs_.front().input_ranges.size());
    out << "Find a symbolic expression y = f(x) that fits " << specs_.size()
        << " regression case(s) with " << dims
        << " input variable(s) (var 0) ... (var " << dims - 1 << ").\n"
        << "Expressions are prefix s-expressions over + - * / pow exp log sin cos sqrt abs,\n"
        << "numeric constants, and fitted parameters p0..p9. Score is -log10 of the median\n"
        << "test NMSE across cases; parameters are refit to the training split each time.";
    return out.str();
  }

  double time_limit_seconds() const override { return time_limit_; }

  int input_dimension() const override {
    return static_cast<int>(specs_.front().input_ranges.size());
  }

  const std::vector<Dataset>& cases() const { return cases_; }

 private:
  std::string name_;
  std::vector<DatasetSpec> specs_;
  SrFitBudget budget_;
  std::vector<std::string> initial_;
  double time_limit_;
  std::uint64_t seed_;
  std::vector<Dataset> cases_;
};

class ExternalTask final : public Task {
 public:
  ExternalTask(std::vector<std::string> command, std::vector<std::string> initial,
               std::string description, double time_limit)
      : command_(std::move(command)),
        initial_(std::move(initial)),
        description_(std::move(description)),
        time_limit_(time_limit) {}

  std::string name() const override { return "external"; }
  std::string kind() const override { return "external"; }

  std::vector<std::string> initial_solutions() const override { return initial_; }

  EvalResult evaluate(const std::string& content) const override {
    return external_evaluate(command_, content, time_limit_);
  }

  std::string problem_description() const override { return description_; }

  double time_limit_seconds() const override { return time_limit_; }

 private:
  std::vector<std::string> command_;
  std::vector<std::string> initial_;
  std::string description_;
  double time_limit_;
};

std::vector<std::string> read_initial_solutions(const nlohmann::json& config) {
  std::vector<std::string> out;
  if (config.contains("initial_solutions")) {
    for (const auto& item : config.at("initial_solutions")) {
      out.push_back(item.get<std::string>());
    }
  }
  return out;
}

}  // namespace

std::shared_ptr<Task> make_task(const nlohmann::json& config) {
  const std::string kind = config.at("kind").get<std::string>();
  std::vector<std::string> initial = read_initial_solutions(config);

  if (kind == "circle-packing") {
    CirclePackingInstance instance;
    instance.n = config.value("n", 26);
    const std::string domain = config.value("domain", "unit-square");
    if (domain == "unit-square") {
      instance.domain = PackingDomain::kUnitSquare;
    } else if (domain == "unit-disk") {
      instance.domain = PackingDomain::kUnitDisk;
    } else {
      throw ConfigError("circle-packing domain must be unit-square or unit-disk");
    }
    instance.tolerance = config.value("tolerance", 1e-9);
    if (instance.n < 1) throw ConfigError("circle-packing needs n >= 1");
    return std::make_shared<CirclePackingTask>(instance, std::move(initial),
                                               config.value("time_limit", 60.0));
  }

  if (kind == "function-min") {
    const std::string fname = config.at("function").get<std::string>();
    BenchmarkFunction f = make_benchmark(fname, config.value("dimension", 0));
    return std::make_shared<FunctionMinTask>(std::move(f), std::move(initial),
                                             config.value("time_limit", 120.0));
  }

  if (kind == "symbolic-regression") {
    std::vector<DatasetSpec> specs;
    if (!config.contains("cases") || config.at("cases").empty()) {
      throw ConfigError("symbolic-regression needs a non-empty cases list");
    }
    for (const auto& c : config.at("cases")) {
      if (c.is_string()) {
        specs.push_back(example_dataset_spec(c.get<std::string>()));
        continue;
      }
      DatasetSpec spec;
      spec.name = c.value("name", "case-" + std::to_string(specs.size()));
      spec.expression = c.at("expression").get<std::string>();
      const auto params = c.value("params", std::vector<double>{});
      spec.true_params = Eigen::Map<const Eigen::VectorXd>(
          params.data(), static_cast<Eigen::Index>(params.size()));
      for (const auto& pair : c.at("input_ranges")) {
        spec.input_ranges.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
      }
      spec.n_train = c.value("n_train", 128);
      spec.n_test = c.value("n_test", 128);
      spec.noise_sigma = c.value("noise_sigma", 0.0);
      spec.rng_seed = c.value("seed", std::uint64_t{0});
      specs.push_back(std::move(spec));
    }
    SrFitBudget budget;
    budget.restarts = config.value("fit_restarts", 8);
    budget.iterations = config.value("fit_iterations", 200);
    const std::string name = config.value("name", specs.front().name);
    return std::make_shared<SymbolicRegressionTask>(name, std::move(specs), budget,
                                                    std::move(initial),
                                                    config.value("time_limit", 60.0),
                                                    config.value("fit_seed", std::uint64_t{7}));
  }

  if (kind == "external") {
    const auto command = config.at("command").get<std::vector<std::string>>();
    if (command.empty()) throw ConfigError("external task needs a non-empty command");
    if (initial.empty()) {
      throw ConfigError("external task needs explicit initial_solutions");
    }
    return std::make_shared<ExternalTask>(command, std::move(initial),
                                          config.value("description", std::string()),
                                          config.value("time_limit", 120.0));
  }

  throw ConfigError("unknown task kind '" + kind + "'");
}

}  // namespace helix
