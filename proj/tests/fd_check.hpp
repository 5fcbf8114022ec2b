// Finite-difference gradient oracle shared by the unit tests and the
// acceptance suite. The reference loss is composed from the public loss ops
// (grpo_loss, contrastive_loss, total_loss) and the distribution primitives,
// independently of the backpropagation path in compute_gradients.
#pragma once

#include <cmath>
#include <vector>

#include "core.hpp"
#include "objective.hpp"
#include "policy.hpp"
#include "rewards.hpp"
#include "tasks.hpp"

namespace fdcheck {

inline std::vector<std::vector<double>*> param_blocks(dlr::PolicyParams& p) {
  return {&p.w1, &p.b1, &p.w2, &p.b2, &p.wp, &p.bp};
}

inline void perturb(dlr::PolicyParams& p, uint64_t seed, double scale) {
  dlr::SplitRng rng(seed);
  for (auto* block : param_blocks(p)) {
    for (auto& v : *block) v += rng.normal() * scale;
  }
}

// L_total recomputed from scratch through the public ops.
inline double reference_loss(const dlr::PolicyParams& params,
                             const dlr::TrajectoryGroup& group,
                             const dlr::PolicyParams& ref,
                             const dlr::RunConfig& cfg) {
  const dlr::TrajectoryDistribution dist =
      dlr::trajectory_distribution(params, group.instance);
  const dlr::TrajectoryDistribution ref_dist =
      dlr::trajectory_distribution(ref, group.instance);
  const double kl = dlr::gaussian_kl(dist, ref_dist);

  std::vector<double> lp_new, lp_old, adv;
  for (int i = 0; i < group.size(); ++i) {
    if (!group.advantages[i].has_value()) continue;
    lp_new.push_back(dlr::log_prob(dist, group.trajectories[i]));
    lp_old.push_back(group.logp_old[i]);
    adv.push_back(*group.advantages[i]);
  }
  const double l_grpo =
      lp_new.empty()
          ? cfg.beta * kl
          : dlr::grpo_loss(lp_new, lp_old, adv, kl, cfg.eps_clip, cfg.beta);

  std::vector<std::vector<double>> pooled;
  for (int k = 0; k < group.size(); ++k) {
    dlr::LatentTrajectory z = dlr::LatentTrajectory::zeros(dist.steps, dist.dim);
    for (size_t c = 0; c < z.data.size(); ++c) {
      z.data[c] = dist.mu[c] + dist.sigma[c] * group.noise[k].data[c];
    }
    pooled.push_back(dlr::pool_trajectory(z));
  }
  const double l_cl = dlr::contrastive_loss(pooled);
  return dlr::total_loss(l_grpo, l_cl, cfg.gamma);
}

inline dlr::Gradients fd_gradient(dlr::PolicyParams params,
                                  const dlr::TrajectoryGroup& group,
                                  const dlr::PolicyParams& ref,
                                  const dlr::RunConfig& cfg, double h) {
  dlr::Gradients out = dlr::Gradients::zeros_like(params);
  auto blocks = param_blocks(params);
  std::vector<std::vector<double>*> gblocks = {&out.w1, &out.b1, &out.w2,
                                               &out.b2, &out.wp, &out.bp};
  for (size_t b = 0; b < blocks.size(); ++b) {
    for (size_t i = 0; i < blocks[b]->size(); ++i) {
      double& x = (*blocks[b])[i];
      const double saved = x;
      x = saved + h;
      const double lp = reference_loss(params, group, ref, cfg);
      x = saved - h;
      const double lm = reference_loss(params, group, ref, cfg);
      x = saved;
      (*gblocks[b])[i] = (lp - lm) / (2.0 * h);
    }
  }
  return out;
}

inline double max_rel_error(const dlr::Gradients& a, const dlr::Gradients& b) {
  const std::vector<const std::vector<double>*> ab = {&a.w1, &a.b1, &a.w2,
                                                      &a.b2, &a.wp, &a.bp};
  const std::vector<const std::vector<double>*> bb = {&b.w1, &b.b1, &b.w2,
                                                      &b.b2, &b.wp, &b.bp};
  double worst = 0.0;
  for (size_t k = 0; k < ab.size(); ++k) {
    for (size_t i = 0; i < ab[k]->size(); ++i) {
      const double x = (*ab[k])[i];
      const double y = (*bb[k])[i];
      const double rel = std::abs(x - y) / std::max(1e-4, std::abs(x) + std::abs(y));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

struct CheckSetup {
  dlr::RunConfig cfg;
  dlr::PolicyParams params;      // point where gradients are taken
  dlr::PolicyParams ref;         // frozen reference for the KL
  dlr::TrajectoryGroup group;
};

// Builds one randomized small-policy group with synthetic rewards, avoiding
// the clip kinks (|rho - (1 +- eps)| > 1e-3) and near-zero pooled means so
// central differences stay on one smooth branch.
inline CheckSetup make_setup(uint64_t seed) {
  for (uint64_t attempt = 0;; ++attempt) {
    const uint64_t s = dlr::split_seed(seed, "fd_setup", attempt);
    dlr::SplitRng pick(s);

    dlr::RunConfig cfg;
    cfg.embed_dim = 3 + pick.uniform_int(4);
    cfg.d = 1 + pick.uniform_int(3);
    cfg.T = 1 + pick.uniform_int(2);
    cfg.G = 4 + pick.uniform_int(5);
    cfg.K = 1;
    cfg.beta = 0.05;
    cfg.gamma = 0.1;
    cfg.eps_clip = 0.2;
    cfg.modulus = 5;

    const int hidden = 16 + 8 * pick.uniform_int(3);
    dlr::PolicyParams base = dlr::PolicyParams::init(
        cfg.embed_dim, hidden, cfg.T, cfg.d, dlr::split_seed(s, "base"));
    perturb(base, dlr::split_seed(s, "base_jitter"), 0.05);
    if (base.parameter_count() > 5000) continue;

    dlr::PolicyParams ref = base;
    perturb(ref, dlr::split_seed(s, "ref_jitter"), 0.05);

    const dlr::TaskInstance inst = dlr::generate_instance(
        dlr::TaskSpec{"mod_arith", cfg.modulus, 1}, dlr::split_seed(s, "inst"));
    dlr::TrajectoryGroup group =
        dlr::sample_group(base, inst, cfg.G, dlr::split_seed(s, "samp"));

    std::vector<double> totals(cfg.G);
    dlr::SplitRng rw(dlr::split_seed(s, "rewards"));
    for (auto& r : totals) r = 2.0 * rw.uniform() - 1.0;
    const std::vector<double> adv = dlr::group_advantages(totals, cfg.eps_std);
    for (int i = 0; i < cfg.G; ++i) {
      group.decode_mask[i] = true;
      group.rewards[i] = dlr::RewardRecord{1.0, 1.0, totals[i]};
      group.advantages[i] = adv[i];
    }

    dlr::PolicyParams moved = base;
    perturb(moved, dlr::split_seed(s, "move"), 0.05);

    // Kink guards.
    const dlr::TrajectoryDistribution dist =
        dlr::trajectory_distribution(moved, inst);
    bool ok = true;
    for (int i = 0; i < cfg.G && ok; ++i) {
      const double rho =
          std::exp(dlr::log_prob(dist, group.trajectories[i]) - group.logp_old[i]);
      if (!std::isfinite(rho) || rho > 5.0) ok = false;
      if (std::abs(rho - (1.0 - cfg.eps_clip)) < 1e-3) ok = false;
      if (std::abs(rho - (1.0 + cfg.eps_clip)) < 1e-3) ok = false;
      if (std::abs(adv[i]) < 1e-3) ok = false;
    }
    for (int k = 0; k < cfg.G && ok; ++k) {
      dlr::LatentTrajectory z = dlr::LatentTrajectory::zeros(dist.steps, dist.dim);
      double norm_sq = 0.0;
      std::vector<double> m(cfg.d, 0.0);
      for (size_t c = 0; c < z.data.size(); ++c) {
        z.data[c] = dist.mu[c] + dist.sigma[c] * group.noise[k].data[c];
        m[c % cfg.d] += z.data[c];
      }
      for (double x : m) norm_sq += x * x;
      if (std::sqrt(norm_sq) / cfg.T < 0.05) ok = false;
    }
    if (!ok) continue;

    return CheckSetup{cfg, std::move(moved), std::move(ref), std::move(group)};
  }
}

}  // namespace fdcheck
