#pragma once

#include <span>

#include "core.hpp"
#include "policy.hpp"

namespace dlr {

struct LossBreakdown {
  double l_grpo = 0.0;
  double l_cl = 0.0;
  double l_total = 0.0;  // l_grpo + gamma * l_cl
  double kl_value = 0.0;
  double clip_fraction = 0.0;  // members where the clipped branch was active / members
};

/// Clipped-surrogate group loss with KL penalty:
///   -(1/G) sum_i [ min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i) - beta*kl ]
/// with rho_i = exp(logp_new_i - logp_old_i), the log-ratio clamped to
/// [-20, 20] before exponentiation. clip_fraction_out (optional) receives the
/// fraction of members where the clipped branch was strictly smaller.
double grpo_loss(std::span<const double> logp_new,
                 std::span<const double> logp_old,
                 std::span<const double> advantages, double kl,
                 double eps_clip, double beta,
                 double* clip_fraction_out = nullptr);

/// Dispersion loss over pooled unit vectors:
///   -sum_k log( exp(v_k.v_k) / sum_j exp(v_k.v_j) )
/// computed with a stable log-sum-exp. Inputs must be unit-norm within 1e-6.
double contrastive_loss(const std::vector<std::vector<double>>& pooled);

double total_loss(double l_grpo, double l_cl, double gamma);

/// Gradient blocks, same shapes as PolicyParams.
struct Gradients {
  std::vector<double> w1, b1, w2, b2, wp, bp;

  static Gradients zeros_like(const PolicyParams& p);
  void accumulate(const Gradients& other, double scale);
  void scale_all(double s);
  bool finite() const;
};

struct ObjectiveResult {
  LossBreakdown breakdown;
  Gradients grads;
};

/// Exact reverse-mode gradients of L_total = L_GRPO + gamma * L_cl with
/// respect to every assistant and projection parameter.
///
/// - The surrogate differentiates the log-density of the *sampled*
///   trajectories (likelihood-ratio path); advantages are constants.
/// - The contrastive term differentiates through the reparameterized
///   trajectories z = mu + sigma*eta (stored noise), so the full gradient
///   flows through every pooled vector.
/// - The KL is the closed form against the frozen reference snapshot.
/// Members without advantages (not decoded) are excluded from the surrogate
/// mean but still enter the contrastive term.
ObjectiveResult compute_gradients(const PolicyParams& params,
                                  const TrajectoryGroup& group,
                                  const PolicySnapshot& old_snapshot,
                                  const PolicySnapshot& reference_snapshot,
                                  const RunConfig& config);

/// If the L2 norm of the in-scope block exceeds max_norm, scales that block
/// to max_norm; out-of-scope blocks are untouched.
void clip_gradients_l2(Gradients& grads, double max_norm, ClipScope scope);

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct AdamWState {
  Gradients m;
  Gradients v;
  int64_t t = 0;

  static AdamWState zeros_like(const PolicyParams& p) {
    return AdamWState{Gradients::zeros_like(p), Gradients::zeros_like(p), 0};
  }
};

/// Decoupled-weight-decay adaptive-moment step with bias correction and
/// per-block learning rates (assistant core vs projection head).
void adamw_step(PolicyParams& params, const Gradients& grads, AdamWState& state,
                double lr_assistant, double lr_projection,
                const AdamWConfig& hyper = {});

}  // namespace dlr
