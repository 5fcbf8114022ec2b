#include "rewards.hpp"

#include <cmath>

#include "tasks.hpp"

namespace dlr {

double correctness_reward(std::string_view decoded, std::string_view truth) {
  return verify_answer(decoded, truth) ? 1.0 : -1.0;
}

double format_reward(std::string_view decoded) {
  return validate_structure(decoded) ? 1.0 : -1.0;
}

double total_reward(double r_corr, double r_fmt, double lambda) {
  if ((r_corr != 1.0 && r_corr != -1.0) || (r_fmt != 1.0 && r_fmt != -1.0)) {
    throw DomainError("reward components must be exactly +1 or -1");
  }
  if (lambda < 0.0) throw DomainError("lambda must be >= 0");
  return r_corr + lambda * r_fmt;
}

RewardRecord make_reward_record(std::string_view decoded,
                                std::string_view truth, double lambda) {
  RewardRecord r;
  r.r_corr = correctness_reward(decoded, truth);
  r.r_fmt = format_reward(decoded);
  r.r_total = total_reward(r.r_corr, r.r_fmt, lambda);
  return r;
}

std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     double eps_std) {
  const size_t g = rewards.size();
  if (g < 2) throw GroupError("group advantages need at least 2 rewards");

  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= double(g);

  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= double(g);  // population variance

  const double denom = std::sqrt(var) + eps_std;
  std::vector<double> adv(g, 0.0);
  if (denom == 0.0) return adv;  // constant group, eps_std == 0
  for (size_t i = 0; i < g; ++i) adv[i] = (rewards[i] - mean) / denom;
  return adv;
}

}  // namespace dlr
