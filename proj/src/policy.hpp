#pragma once

#include "core.hpp"

namespace dlr {

/// Assistant core width (two hidden layers of this size, tanh nonlinearity).
inline constexpr int kHiddenDim = 64;

/// The trainable policy pi_{phi,theta}: a small feed-forward assistant core
/// over a frozen query embedding, plus a projection head emitting per-step
/// Gaussian mean and log-std vectors. The per-step distributions are
/// independent given the query, so trajectory log-densities and KLs are
/// available in closed form.
struct PolicyParams {
  int embed_dim = 0;
  int hidden_dim = 0;
  int latent_steps = 0;  // T
  int latent_dim = 0;    // d
  double sigma_min = 1e-3;
  double sigma_max = 2.0;

  // Assistant core phi.
  std::vector<double> w1;  // hidden_dim x embed_dim, row-major
  std::vector<double> b1;  // hidden_dim
  std::vector<double> w2;  // hidden_dim x hidden_dim
  std::vector<double> b2;  // hidden_dim
  // Projection theta: hidden -> (mu, log-std head) for all T steps.
  std::vector<double> wp;  // (2*T*d) x hidden_dim
  std::vector<double> bp;  // 2*T*d

  /// Mean head starts at exactly zero; the log-std head bias is set so that
  /// sigma == sigma_init everywhere.
  static PolicyParams init(int embed_dim, int hidden_dim, int latent_steps,
                           int latent_dim, uint64_t seed,
                           double sigma_init = 0.5);

  size_t parameter_count() const;
  bool finite() const;
};

/// Frozen deep copy of the policy, tagged by role.
struct PolicySnapshot {
  enum class Tag { old_policy, reference };
  Tag tag;
  PolicyParams params;

  static PolicySnapshot capture(const PolicyParams& p, Tag tag) {
    return PolicySnapshot{tag, p};
  }
};

/// Per-step diagonal-Gaussian parameters, flattened T x d.
struct TrajectoryDistribution {
  int steps = 0;
  int dim = 0;
  std::vector<double> mu;
  std::vector<double> sigma;
};

/// Deterministic fixed-dimension embedding of (context, query): each
/// structural feature of the query (operands, operators, modulus) hashes to
/// a frozen pseudo-random dense vector; the embedding is their sum. Identical
/// instances give identical embeddings.
std::vector<double> embed_query(const TaskInstance& instance, int embed_dim);

/// Intermediate activations kept for backpropagation.
struct ForwardCache {
  std::vector<double> e;      // embedding
  std::vector<double> h1;     // tanh layer 1
  std::vector<double> h2;     // tanh layer 2
  std::vector<double> sig_s;  // sigmoid of the raw log-std head, per coordinate
};

/// Forward pass; throws NumericalError if any output is non-finite.
TrajectoryDistribution policy_forward(const PolicyParams& params,
                                      const TaskInstance& instance,
                                      ForwardCache* cache);

inline TrajectoryDistribution trajectory_distribution(
    const PolicyParams& params, const TaskInstance& instance) {
  return policy_forward(params, instance, nullptr);
}

/// Draws G independent trajectories z_t = mu_t + sigma_t * eta_t with eta
/// standard normal from per-trajectory split seeds; fills logp_current (and
/// logp_old, equal at sampling time) and stores eta for reparameterized
/// gradients.
TrajectoryGroup sample_group(const PolicyParams& params,
                             const TaskInstance& instance, int G,
                             uint64_t seed);

/// Diagonal-Gaussian log-density of the trajectory under the distribution,
/// summed over steps and dimensions (nats).
double log_prob(const TrajectoryDistribution& dist,
                const LatentTrajectory& traj);

/// Closed-form KL(p || q) for matching-shape diagonal Gaussians, summed over
/// steps and dimensions.
double gaussian_kl(const TrajectoryDistribution& p,
                   const TrajectoryDistribution& q);

/// Mean over steps, then L2-normalized. An exactly-zero mean maps to the
/// fixed fallback unit vector e_1.
std::vector<double> pool_trajectory(const LatentTrajectory& traj);

}  // namespace dlr
