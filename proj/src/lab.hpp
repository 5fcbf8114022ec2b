#pragma once

#include "core.hpp"

namespace dlr {
namespace lab {

enum class EstimatorKind { token_level, latent_level };

/// Synthetic-policy constants for the variance study. The policy is a
/// diagonal Gaussian with kParamDim mean parameters and fixed scale kSigma;
/// the latent estimator always treats the trajectory as one object of
/// kLatentSteps steps regardless of the token horizon.
inline constexpr int kParamDim = 2;
inline constexpr double kSigma = 0.8;
inline constexpr int kLatentSteps = 4;

struct VarianceReport {
  std::string kind;
  int horizon = 0;    // L
  int n_samples = 0;
  double var_mean = 0.0;  // mean per-coordinate gradient variance
  double var_max = 0.0;   // max per-coordinate gradient variance
};

/// Empirical variance of the score-function gradient estimator over
/// n_samples Monte-Carlo draws, with a unit reward so the estimate isolates
/// the score-term variance. token_level composes L per-step log-likelihood
/// terms; latent_level uses the single trajectory-level log-density and is
/// independent of L.
VarianceReport estimate_gradient_variance(EstimatorKind kind, int horizon,
                                          int n_samples, uint64_t seed);

struct CostReport {
  double g = 0.0;
  double k = 0.0;
  double c_a = 0.0;  // assistant forward cost
  double c_m = 0.0;  // main-model forward cost
  double cost_full = 0.0;          // G * (c_a + c_m)
  double cost_dlr = 0.0;           // G * c_a + K * c_m
  double main_forward_ratio = 0.0; // K / G
  double reduction_factor = 0.0;   // G / K
};

/// Pure arithmetic of the selective-decoding cost model. Real-valued K so
/// analytic ratios (e.g. K/G = 0.18) can be expressed exactly.
CostReport cost_report(double g, double k, double c_a, double c_m);

enum class AblationKind { no_contrastive, trainable_decoder };

AblationKind ablation_kind_from_string(std::string_view s);

struct AblationRow {
  std::string arm;  // "base" or the ablation name
  uint64_t seed = 0;
  bool ok = false;
  std::string error;  // populated when ok is false
  double pass_at_1 = 0.0;
  double mean_pairwise_cosine = 0.0;
  bool decoder_checksum_changed = false;
};

/// Paired trainings (base vs ablated) over matched seeds base.seed + i.
/// Per-arm failures are recorded in the row instead of aborting the other
/// arm. Run directories and ablation.csv land under out_dir.
std::vector<AblationRow> run_ablation(const RunConfig& base, AblationKind kind,
                                      int n_seeds, const std::string& out_dir);

std::string ablation_csv(const std::vector<AblationRow>& rows);
std::string ablation_summary(AblationKind kind,
                             const std::vector<AblationRow>& rows);

}  // namespace lab
}  // namespace dlr
