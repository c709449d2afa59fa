#include "helix/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace helix {

std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     double degenerate_std_floor) {
  const std::size_t g = rewards.size();
  if (g < 2) {
    throw GroupTooSmallError("advantage normalization needs at least 2 rewards, got " +
                             std::to_string(g));
  }
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(g);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(g);
  const double std_dev = std::sqrt(var);

  std::vector<double> out(g, 0.0);
  if (std_dev > degenerate_std_floor) {
    for (std::size_t i = 0; i < g; ++i) out[i] = (rewards[i] - mean) / std_dev;
  }
  return out;
}

double clipped_term(double ratio, double advantage, double epsilon) {
  if (!(ratio > 0.0)) {
    throw NonPositiveRatioError("probability ratio must be positive, got " +
                                std::to_string(ratio));
  }
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double kl_penalty_term(double logp_policy, double logp_ref) {
  const double d = logp_ref - logp_policy;
  return std::exp(d) - d - 1.0;
}

double grpo_objective(const std::vector<SequenceTerms>& group, const GrpoConfig& config) {
  if (group.empty()) {
    throw EmptySequenceError("objective needs at least one sequence");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < group.size(); ++j) {
    const auto& seq = group[j];
    if (seq.empty()) {
      throw EmptySequenceError("sequence " + std::to_string(j) + " has no tokens");
    }
    double seq_sum = 0.0;
    for (const TokenTerm& t : seq) {
      seq_sum += clipped_term(t.ratio, t.advantage, config.clip_epsilon) -
                 config.kl_coeff * kl_penalty_term(t.logp_policy, t.logp_ref);
    }
    total += seq_sum / static_cast<double>(seq.size());
  }
  return total / static_cast<double>(group.size());
}

}  // namespace helix
