#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "helix/errors.hpp"

namespace helix {

enum class UnaryOp { kNeg, kExp, kLog, kSin, kCos, kSqrt, kAbs };
enum class BinaryOp { kAdd, kSub, kMul, kDiv, kPow };

struct Expr;
// Immutable nodes with shared subtrees: mutation copies only the path from
// the root to the splice point.
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { kConst, kParam, kVar, kUnary, kBinary };
  Kind kind = Kind::kConst;
  double value = 0.0;  // kConst
  int index = 0;       // kParam / kVar
  UnaryOp uop = UnaryOp::kNeg;
  BinaryOp bop = BinaryOp::kAdd;
  ExprPtr a, b;  // unary uses a only
};

inline constexpr int kMaxFitParams = 10;
inline constexpr int kDefaultExprDepthCap = 16;

ExprPtr make_const(double v);
ExprPtr make_param(int index);
ExprPtr make_var(int index);
ExprPtr make_unary(UnaryOp op, ExprPtr a);
ExprPtr make_binary(BinaryOp op, ExprPtr a, ExprPtr b);

// Prefix s-expressions: numbers, p0..p9, (var i), (op args). Binary ops:
// + - * / pow. Unary: neg exp log sin cos sqrt abs; (- x) also reads as
// negation. Depth beyond the cap or params beyond p9 are parse errors.
ExprPtr parse_expression(const std::string& text, int max_depth = kDefaultExprDepthCap);
std::string to_string(const ExprPtr& e);

int expr_depth(const ExprPtr& e);
int expr_size(const ExprPtr& e);
// Highest parameter index used, or -1 when the expression has none.
int max_param_index(const ExprPtr& e);

// Node handle by preorder index (root = 0) and path-copying replacement.
ExprPtr node_at(const ExprPtr& root, int preorder_index);
ExprPtr replace_node(const ExprPtr& root, int preorder_index, const ExprPtr& replacement);

// Row-per-sample evaluation. Guarded operations (division by nearly zero,
// log of a non-positive, sqrt of a negative, non-finite results) yield NaN
// for that sample.
Eigen::VectorXd eval_expression(const ExprPtr& e, const Eigen::MatrixXd& inputs,
                                const Eigen::VectorXd& params);

struct FitResult {
  Eigen::VectorXd params;
  double mse = 0.0;
};

// Nelder-Mead over the parameters the expression actually uses, restarted
// from fresh uniform [0, 1] draws. A trial whose evaluation produces any
// NaN sample scores +inf. restarts <= 1 means a single start.
FitResult fit_params(const ExprPtr& e, const Eigen::MatrixXd& inputs,
                     const Eigen::VectorXd& targets, int restarts, int iterations,
                     std::uint64_t seed);

}  // namespace helix
