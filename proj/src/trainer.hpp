#pragma once

#include <optional>

#include "core.hpp"
#include "decoder.hpp"
#include "objective.hpp"
#include "policy.hpp"
#include "tasks.hpp"

namespace dlr {

struct EvalReport {
  double pass_at_1 = 0.0;
  double format_valid_rate = 0.0;
  int n_instances = 0;
};

struct RunArtifacts {
  std::string run_dir;
  std::string metrics_path;
  std::string eval_path;
  RunConfig config;
  std::vector<std::string> checkpoint_paths;
  uint64_t decoder_checksum_start = 0;
  uint64_t decoder_checksum_end = 0;
  bool decoder_checksum_changed = false;
  // Mean pairwise cosine of the pooled sampled trajectories at the final
  // iteration (diversity probe used by the ablation studies).
  double final_group_cosine = 0.0;
  std::optional<EvalReport> final_eval;
};

/// Everything needed to resume or evaluate a run, stored as named
/// shape-tagged flat arrays of 64-bit reals plus the resolved config.
struct Checkpoint {
  RunConfig config;
  PolicyParams params;
  LatentScorer scorer;
  AdamWState opt_state;
  FrozenDecoder decoder;
};

/// Binary container: magic, resolved config JSON, frozen-parameter digest,
/// named arrays, trailing whole-file digest. Byte-stable across round trips.
void save_checkpoint(const std::string& path, const Checkpoint& ck);
/// Verifies both digests; throws ChecksumError on corruption or a frozen
/// parameter mismatch, ShapeError if arrays disagree with the config.
Checkpoint load_checkpoint(const std::string& path);

/// Runs the Generate-Reward-Optimize loop for config.iterations iterations,
/// writing config.resolved.json, metrics.jsonl, ckpt_{iter}.bin and a final
/// evaluation into out_dir. Aborts (NumericalError) on two consecutive
/// non-finite losses and (ChecksumError) if the frozen decoder drifts.
RunArtifacts train(const RunConfig& config, const std::string& out_dir);

/// Deterministic evaluation: one trajectory per instance at the distribution
/// mean, decoded and verified.
EvalReport evaluate(const Checkpoint& ck, const TaskSpec& spec,
                    int n_instances, uint64_t seed);
EvalReport evaluate_checkpoint_file(const std::string& ckpt_path,
                                    int n_instances, uint64_t seed);

/// Mean pairwise cosine similarity of the pooled trajectories of a group.
double mean_pairwise_cosine(const TrajectoryGroup& group);

}  // namespace dlr
