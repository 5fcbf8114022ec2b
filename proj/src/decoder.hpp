#pragma once

#include "core.hpp"

namespace dlr {

/// The frozen main-model stand-in: a random linear readout over pooled
/// trajectories plus a format gate. Parameters never change after
/// construction; the checksum is the run-long witness of that.
struct FrozenDecoder {
  int latent_dim = 0;
  int num_classes = 0;       // M
  int format_gate_index = 0; // latent coordinate gating structural validity
  std::vector<double> readout_w;  // num_classes x latent_dim, row-major
  std::vector<double> readout_b;  // num_classes
  uint64_t parameter_checksum = 0;  // digest taken at construction

  static FrozenDecoder init(int latent_dim, int num_classes, uint64_t seed);

  /// Digest over the current parameter bytes and shape metadata. Equal to
  /// parameter_checksum for as long as the decoder is actually frozen.
  uint64_t compute_checksum() const;
};

/// Deterministic latent-to-text map. The answer class is the readout argmax
/// over the pooled trajectory (ties to the lowest class index). A positive
/// pooled gate coordinate yields the full template
///   <think>{step norms}</think><answer>{class}</answer>
/// and a non-positive one the same text with </answer> omitted.
std::string decode(const FrozenDecoder& dec, const LatentTrajectory& traj,
                   const TaskInstance& instance);

/// Trainable regression head over pooled trajectory vectors predicting
/// R_total; drives selective-decoding pre-screening.
struct LatentScorer {
  std::vector<double> w;
  double b = 0.0;

  static LatentScorer zeros(int latent_dim) {
    return LatentScorer{std::vector<double>(latent_dim, 0.0), 0.0};
  }
};

double score_trajectory(const LatentScorer& scorer,
                        const LatentTrajectory& traj);

/// Mask with exactly K true entries at the K highest scores; ties broken by
/// lower trajectory index.
std::vector<bool> prescreen_topk(const LatentScorer& scorer,
                                 const TrajectoryGroup& group, int K);

/// `steps` full-batch least-squares gradient steps (fixed small step size,
/// loss non-increasing on the given pairs).
LatentScorer fit_scorer(
    const LatentScorer& scorer,
    const std::vector<std::pair<std::vector<double>, double>>& pairs,
    int steps);

}  // namespace dlr
