#pragma once

#include <string_view>
#include <vector>

#include "core.hpp"

namespace dlr {

/// +1 iff the decoded answer span matches the truth, else -1.
double correctness_reward(std::string_view decoded, std::string_view truth);

/// +1 iff the decoded text has the exact tag structure, else -1.
double format_reward(std::string_view decoded);

/// r_corr + lambda * r_fmt. Inputs must be exactly +1 or -1.
double total_reward(double r_corr, double r_fmt, double lambda);

RewardRecord make_reward_record(std::string_view decoded,
                                std::string_view truth, double lambda);

/// Group-relative advantages: (R_i - mean(R)) / (pop_std(R) + eps_std).
/// Population standard deviation (divide by G). A zero-variance group maps
/// to all-zero advantages. Throws GroupError if fewer than two rewards.
std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     double eps_std);

}  // namespace dlr
