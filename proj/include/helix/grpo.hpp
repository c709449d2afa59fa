#pragma once

#include <vector>

#include "helix/errors.hpp"

namespace helix {

struct GrpoConfig {
  int group_size = 16;
  double clip_epsilon = 0.2;
  double kl_coeff = 1e-3;
  // Below this population standard deviation the group is degenerate and
  // all advantages are zero instead of blowing up.
  double degenerate_std_floor = 1e-8;
};

// Group-normalized advantages: (r - mean) / std, population convention
// (divide by G). Needs at least two rewards.
std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     double degenerate_std_floor = 1e-8);

// Token-level clipped surrogate: min(ratio * A, clip(ratio, 1-eps, 1+eps) * A).
// The probability ratio must be positive.
double clipped_term(double ratio, double advantage, double epsilon);

// Non-negative KL estimate from per-token log-probs: exp(d) - d - 1 with
// d = logp_ref - logp_policy.
double kl_penalty_term(double logp_policy, double logp_ref);

struct TokenTerm {
  double ratio = 1.0;
  double advantage = 0.0;
  double logp_policy = 0.0;
  double logp_ref = 0.0;
};

using SequenceTerms = std::vector<TokenTerm>;

// Average over sequences of the token-mean of (clipped surrogate minus
// beta * KL). Every sequence must be non-empty.
double grpo_objective(const std::vector<SequenceTerms>& group, const GrpoConfig& config);

}  // namespace helix
