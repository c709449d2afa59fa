#include "helix/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>

#include "helix/rng.hpp"

namespace helix {

namespace {

constexpr double kDivGuard = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

ExprPtr make_const(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::kConst;
  e->value = v;
  return e;
}

ExprPtr make_param(int index) {
  if (index < 0 || index >= kMaxFitParams) {
    throw ExpressionParseError("parameter index " + std::to_string(index) + " out of range");
  }
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::kParam;
  e->index = index;
  return e;
}

ExprPtr make_var(int index) {
  if (index < 0) throw ExpressionParseError("variable index must be non-negative");
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::kVar;
  e->index = index;
  return e;
}

ExprPtr make_unary(UnaryOp op, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::kUnary;
  e->uop = op;
  e->a = std::move(a);
  return e;
}

ExprPtr make_binary(BinaryOp op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::kBinary;
  e->bop = op;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

namespace {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;
  int max_depth;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ExpressionParseError(why + " at offset " + std::to_string(pos));
  }

  std::string next_token() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input");
    const char c = text[pos];
    if (c == '(' || c == ')') {
      ++pos;
      return std::string(1, c);
    }
    std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')') {
      ++pos;
    }
    return text.substr(start, pos - start);
  }

  ExprPtr parse_atom(const std::string& tok) {
    if (tok.size() >= 2 && tok[0] == 'p' &&
        std::all_of(tok.begin() + 1, tok.end(),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      const int idx = std::atoi(tok.c_str() + 1);
      if (idx >= kMaxFitParams) fail("parameter " + tok + " beyond p9");
      return make_param(idx);
    }
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() + tok.size() && end != tok.c_str()) return make_const(v);
    fail("unknown atom '" + tok + "'");
  }

  ExprPtr parse(int depth) {
    if (depth > max_depth) fail("expression deeper than cap " + std::to_string(max_depth));
    std::string tok = next_token();
    if (tok == ")") fail("unexpected ')'");
    if (tok != "(") return parse_atom(tok);

    const std::string head = next_token();
    if (head == "var") {
      const std::string idx_tok = next_token();
      char* end = nullptr;
      const long idx = std::strtol(idx_tok.c_str(), &end, 10);
      if (end != idx_tok.c_str() + idx_tok.size() || idx < 0) fail("bad var index");
      expect_close();
      return make_var(static_cast<int>(idx));
    }

    std::vector<ExprPtr> args;
    for (;;) {
      skip_ws();
      if (pos < text.size() && text[pos] == ')') {
        ++pos;
        break;
      }
      args.push_back(parse(depth + 1));
      if (args.size() > 2) fail("too many arguments to '" + head + "'");
    }

    if (head == "-" && args.size() == 1) return make_unary(UnaryOp::kNeg, args[0]);

    static const std::vector<std::pair<std::string, UnaryOp>> unary = {
        {"neg", UnaryOp::kNeg}, {"exp", UnaryOp::kExp},   {"log", UnaryOp::kLog},
        {"sin", UnaryOp::kSin}, {"cos", UnaryOp::kCos},   {"sqrt", UnaryOp::kSqrt},
        {"abs", UnaryOp::kAbs}};
    for (const auto& [name, op] : unary) {
      if (head == name) {
        if (args.size() != 1) fail("'" + head + "' takes one argument");
        return make_unary(op, args[0]);
      }
    }

    static const std::vector<std::pair<std::string, BinaryOp>> binary = {
        {"+", BinaryOp::kAdd}, {"-", BinaryOp::kSub}, {"*", BinaryOp::kMul},
        {"/", BinaryOp::kDiv}, {"pow", BinaryOp::kPow}};
    for (const auto& [name, op] : binary) {
      if (head == name) {
        if (args.size() != 2) fail("'" + head + "' takes two arguments");
        return make_binary(op, args[0], args[1]);
      }
    }
    fail("unknown operator '" + head + "'");
  }

  void expect_close() {
    skip_ws();
    if (pos >= text.size() || text[pos] != ')') fail("expected ')'");
    ++pos;
  }
};

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

ExprPtr parse_expression(const std::string& text, int max_depth) {
  Parser p{text, 0, max_depth};
  ExprPtr e = p.parse(1);
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input after expression");
  return e;
}

std::string to_string(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::kConst:
      return format_double(e->value);
    case Expr::Kind::kParam:
      return "p" + std::to_string(e->index);
    case Expr::Kind::kVar:
      return "(var " + std::to_string(e->index) + ")";
    case Expr::Kind::kUnary: {
      static const char* names[] = {"neg", "exp", "log", "sin", "cos", "sqrt", "abs"};
      return std::string("(") + names[static_cast<int>(e->uop)] + " " + to_string(e->a) + ")";
    }
    case Expr::Kind::kBinary: {
      static const char* names[] = {"+", "-", "*", "/", "pow"};
      return std::string("(") + names[static_cast<int>(e->bop)] + " " + to_string(e->a) + " " +
             to_string(e->b) + ")";
    }
  }
  return "";
}

int expr_depth(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::kUnary:
      return 1 + expr_depth(e->a);
    case Expr::Kind::kBinary:
      return 1 + std::max(expr_depth(e->a), expr_depth(e->b));
    default:
      return 1;
  }
}

int expr_size(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::kUnary:
      return 1 + expr_size(e->a);
    case Expr::Kind::kBinary:
      return 1 + expr_size(e->a) + expr_size(e->b);
    default:
      return 1;
  }
}

int max_param_index(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::kParam:
      return e->index;
    case Expr::Kind::kUnary:
      return max_param_index(e->a);
    case Expr::Kind::kBinary:
      return std::max(max_param_index(e->a), max_param_index(e->b));
    default:
      return -1;
  }
}

namespace {

const ExprPtr* find_node(const ExprPtr& root, int& remaining) {
  if (remaining == 0) return &root;
  --remaining;
  if (root->kind == Expr::Kind::kUnary) return find_node(root->a, remaining);
  if (root->kind == Expr::Kind::kBinary) {
    const ExprPtr* left = find_node(root->a, remaining);
    if (left) return left;
    return find_node(root->b, remaining);
  }
  return nullptr;
}

ExprPtr replace_rec(const ExprPtr& root, int& remaining, const ExprPtr& replacement) {
  if (remaining == 0) {
    --remaining;
    return replacement;
  }
  --remaining;
  if (root->kind == Expr::Kind::kUnary) {
    ExprPtr child = replace_rec(root->a, remaining, replacement);
    return child == root->a ? root : make_unary(root->uop, child);
  }
  if (root->kind == Expr::Kind::kBinary) {
    ExprPtr left = replace_rec(root->a, remaining, replacement);
    if (left != root->a) return make_binary(root->bop, left, root->b);
    if (remaining < 0) return root;
    ExprPtr right = replace_rec(root->b, remaining, replacement);
    return right == root->b ? root : make_binary(root->bop, root->a, right);
  }
  return root;
}

}  // namespace

ExprPtr node_at(const ExprPtr& root, int preorder_index) {
  if (preorder_index < 0 || preorder_index >= expr_size(root)) {
    throw ExpressionParseError("node index out of range");
  }
  int remaining = preorder_index;
  const ExprPtr* found = find_node(root, remaining);
  return *found;
}

ExprPtr replace_node(const ExprPtr& root, int preorder_index, const ExprPtr& replacement) {
  if (preorder_index < 0 || preorder_index >= expr_size(root)) {
    throw ExpressionParseError("node index out of range");
  }
  int remaining = preorder_index;
  return replace_rec(root, remaining, replacement);
}

namespace {

void eval_rec(const ExprPtr& e, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& params,
              Eigen::ArrayXd& out) {
  const Eigen::Index n = inputs.rows();
  switch (e->kind) {
    case Expr::Kind::kConst:
      out.setConstant(n, e->value);
      return;
    case Expr::Kind::kParam:
      out.setConstant(n, e->index < params.size() ? params[e->index] : kNan);
      return;
    case Expr::Kind::kVar:
      if (e->index >= inputs.cols()) {
        out.setConstant(n, kNan);
      } else {
        out = inputs.col(e->index).array();
      }
      return;
    case Expr::Kind::kUnary: {
      Eigen::ArrayXd a;
      eval_rec(e->a, inputs, params, a);
      switch (e->uop) {
        case UnaryOp::kNeg:
          out = -a;
          break;
        case UnaryOp::kExp:
          out = a.exp();
          break;
        case UnaryOp::kLog:
          out = (a > 0.0).select(a.log(), kNan);
          break;
        case UnaryOp::kSin:
          out = a.sin();
          break;
        case UnaryOp::kCos:
          out = a.cos();
          break;
        case UnaryOp::kSqrt:
          out = (a >= 0.0).select(a.sqrt(), kNan);
          break;
        case UnaryOp::kAbs:
          out = a.abs();
          break;
      }
      return;
    }
    case Expr::Kind::kBinary: {
      Eigen::ArrayXd a, b;
      eval_rec(e->a, inputs, params, a);
      eval_rec(e->b, inputs, params, b);
      switch (e->bop) {
        case BinaryOp::kAdd:
          out = a + b;
          break;
        case BinaryOp::kSub:
          out = a - b;
          break;
        case BinaryOp::kMul:
          out = a * b;
          break;
        case BinaryOp::kDiv:
          out = (b.abs() > kDivGuard).select(a / b, kNan);
          break;
        case BinaryOp::kPow:
          out.resize(n);
          for (Eigen::Index i = 0; i < n; ++i) out[i] = std::pow(a[i], b[i]);
          break;
      }
      return;
    }
  }
}

}  // namespace

Eigen::VectorXd eval_expression(const ExprPtr& e, const Eigen::MatrixXd& inputs,
                                const Eigen::VectorXd& params) {
  Eigen::ArrayXd out;
  eval_rec(e, inputs, params, out);
  // Any non-finite result, however produced, becomes the NaN flag.
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) out[i] = kNan;
  }
  return out.matrix();
}

namespace {

double trial_mse(const ExprPtr& e, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                 const Eigen::VectorXd& params) {
  const Eigen::VectorXd pred = eval_expression(e, inputs, params);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (!std::isfinite(pred[i])) return kInf;
    const double d = pred[i] - targets[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

// Standard Nelder-Mead with reflection 1, expansion 2, contraction 0.5,
// shrink 0.5. Runs the full iteration budget; no early stopping, so the
// sequence is a pure function of the start simplex.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0, int iterations, double& best_value) {
  const int p = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> xs(p + 1, x0);
  std::vector<double> fs(p + 1);
  for (int i = 1; i <= p; ++i) xs[i][i - 1] += 0.25;
  for (int i = 0; i <= p; ++i) fs[i] = f(xs[i]);

  std::vector<int> ord(p + 1);
  for (int it = 0; it < iterations; ++it) {
    for (int i = 0; i <= p; ++i) ord[i] = i;
    std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    const int best = ord[0], worst = ord[p], second_worst = ord[p - 1];

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(p);
    for (int i = 0; i <= p; ++i) {
      if (i != worst) centroid += xs[i];
    }
    centroid /= static_cast<double>(p);

    const Eigen::VectorXd reflected = centroid + (centroid - xs[worst]);
    const double fr = f(reflected);
    if (fr < fs[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - xs[worst]);
      const double fe = f(expanded);
      if (fe < fr) {
        xs[worst] = expanded;
        fs[worst] = fe;
      } else {
        xs[worst] = reflected;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second_worst]) {
      xs[worst] = reflected;
      fs[worst] = fr;
      continue;
    }
    const Eigen::VectorXd contracted = centroid + 0.5 * (xs[worst] - centroid);
    const double fc = f(contracted);
    if (fc < fs[worst]) {
      xs[worst] = contracted;
      fs[worst] = fc;
      continue;
    }
    for (int i = 0; i <= p; ++i) {
      if (i == best) continue;
      xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
      fs[i] = f(xs[i]);
    }
  }

  int best = 0;
  for (int i = 1; i <= p; ++i) {
    if (fs[i] < fs[best]) best = i;
  }
  best_value = fs[best];
  return xs[best];
}

}  // namespace

FitResult fit_params(const ExprPtr& e, const Eigen::MatrixXd& inputs,
                     const Eigen::VectorXd& targets, int restarts, int iterations,
                     std::uint64_t seed) {
  if (inputs.rows() != targets.size()) {
    throw ConfigError("fit_params: inputs and targets disagree on sample count");
  }
  const int p = max_param_index(e) + 1;
  FitResult out;
  if (p == 0) {
    out.params = Eigen::VectorXd(0);
    out.mse = trial_mse(e, inputs, targets, out.params);
    return out;
  }

  auto objective = [&](const Eigen::VectorXd& v) { return trial_mse(e, inputs, targets, v); };

  const int starts = std::max(1, restarts);
  out.mse = kInf;
  out.params = Eigen::VectorXd::Zero(p);
  for (int s = 0; s < starts; ++s) {
    Rng rng(derive_seed(seed, {0x66697473ull, static_cast<std::uint64_t>(s)}));
    Eigen::VectorXd x0(p);
    for (int i = 0; i < p; ++i) x0[i] = rng.uniform();
    double value = kInf;
    Eigen::VectorXd x = nelder_mead(objective, x0, iterations, value);
    if (value < out.mse) {
      out.mse = value;
      out.params = x;
    }
  }
  return out;
}

}  // namespace helix
