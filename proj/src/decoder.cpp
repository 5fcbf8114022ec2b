#include "decoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "policy.hpp"

namespace dlr {

FrozenDecoder FrozenDecoder::init(int latent_dim, int num_classes,
                                  uint64_t seed) {
  if (latent_dim < 1 || num_classes < 2) {
    throw ShapeError("decoder needs latent_dim >= 1 and num_classes >= 2");
  }
  FrozenDecoder dec;
  dec.latent_dim = latent_dim;
  dec.num_classes = num_classes;
  dec.format_gate_index = 0;
  SplitRng rng(split_seed(seed, "frozen_decoder"));
  dec.readout_w.resize(size_t(num_classes) * latent_dim);
  const double scale = 1.0 / std::sqrt(double(latent_dim));
  for (auto& v : dec.readout_w) v = rng.normal() * scale;
  dec.readout_b.resize(num_classes);
  for (auto& v : dec.readout_b) v = rng.normal() * 0.1;
  dec.parameter_checksum = dec.compute_checksum();
  return dec;
}

uint64_t FrozenDecoder::compute_checksum() const {
  uint64_t h = 14695981039346656037ULL;
  const int64_t meta[3] = {latent_dim, num_classes, format_gate_index};
  h = fnv1a64_bytes(meta, sizeof(meta), h);
  h = fnv1a64_bytes(readout_w.data(), readout_w.size() * sizeof(double), h);
  h = fnv1a64_bytes(readout_b.data(), readout_b.size() * sizeof(double), h);
  return h;
}

std::string decode(const FrozenDecoder& dec, const LatentTrajectory& traj,
                   const TaskInstance& instance) {
  if (traj.dim != dec.latent_dim) {
    throw ShapeError("trajectory dimension does not match decoder");
  }
  (void)instance;  // the answer space is baked into the readout shape

  const std::vector<double> pooled = pool_trajectory(traj);

  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < dec.num_classes; ++c) {
    double s = dec.readout_b[c];
    const double* row = &dec.readout_w[size_t(c) * dec.latent_dim];
    for (int j = 0; j < dec.latent_dim; ++j) s += row[j] * pooled[j];
    if (s > best_score) {  // ties keep the lowest class index
      best_score = s;
      best = c;
    }
  }

  // Fixed rendering of the latent step norms as the reasoning trace.
  std::string trace = "steps";
  char buf[32];
  for (int t = 0; t < traj.steps; ++t) {
    double sq = 0.0;
    for (int j = 0; j < traj.dim; ++j) sq += traj.at(t, j) * traj.at(t, j);
    std::snprintf(buf, sizeof(buf), " %.4f", std::sqrt(sq));
    trace += buf;
  }

  std::string out = "<think>" + trace + "</think><answer>" +
                    std::to_string(best);
  if (pooled[dec.format_gate_index] > 0.0) out += "</answer>";
  return out;
}

double score_trajectory(const LatentScorer& scorer,
                        const LatentTrajectory& traj) {
  if (int(scorer.w.size()) != traj.dim) {
    throw ShapeError("scorer dimension does not match trajectory");
  }
  return dot(scorer.w, pool_trajectory(traj)) + scorer.b;
}

std::vector<bool> prescreen_topk(const LatentScorer& scorer,
                                 const TrajectoryGroup& group, int K) {
  const int g = group.size();
  if (K < 1 || K > g) {
    throw BudgetError("K must satisfy 1 <= K <= G, got K=" +
                      std::to_string(K) + " with G=" + std::to_string(g));
  }
  std::vector<double> scores(g);
  for (int i = 0; i < g; ++i) {
    scores[i] = score_trajectory(scorer, group.trajectories[i]);
  }
  std::vector<int> order(g);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[a] > scores[b];  // equal scores keep index order
  });
  std::vector<bool> mask(g, false);
  for (int i = 0; i < K; ++i) mask[order[i]] = true;
  return mask;
}

LatentScorer fit_scorer(
    const LatentScorer& scorer,
    const std::vector<std::pair<std::vector<double>, double>>& pairs,
    int steps) {
  if (pairs.empty()) throw ShapeError("fit_scorer needs at least one pair");
  const size_t dim = scorer.w.size();
  for (const auto& pr : pairs) {
    if (pr.first.size() != dim) {
      throw ShapeError("scorer pair dimension mismatch");
    }
  }

  // Pooled inputs are unit vectors, so the per-example quadratic has
  // curvature at most 2*(|x|^2 + 1) = 4; this step size keeps plain gradient
  // descent monotone.
  constexpr double kStep = 0.1;
  LatentScorer s = scorer;
  const double inv_n = 1.0 / double(pairs.size());
  std::vector<double> gw(dim);
  for (int it = 0; it < steps; ++it) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (const auto& [x, y] : pairs) {
      const double resid = dot(s.w, x) + s.b - y;
      for (size_t j = 0; j < dim; ++j) gw[j] += 2.0 * inv_n * resid * x[j];
      gb += 2.0 * inv_n * resid;
    }
    for (size_t j = 0; j < dim; ++j) s.w[j] -= kStep * gw[j];
    s.b -= kStep * gb;
  }
  return s;
}

}  // namespace dlr
