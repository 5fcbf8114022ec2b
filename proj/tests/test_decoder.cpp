#include "doctest.h"

#include <cmath>

#include "decoder.hpp"
#include "policy.hpp"
#include "rewards.hpp"
#include "tasks.hpp"

using namespace dlr;

namespace {

TaskInstance instance_for(uint64_t seed, int modulus = 16) {
  return generate_instance(TaskSpec{"mod_arith", modulus, 1}, seed);
}

// Decoder with hand-picked weights: class scores over a pooled vector
// (1, 0) are exactly the first readout column.
FrozenDecoder crafted_decoder(const std::vector<double>& col0, int gate_index) {
  FrozenDecoder dec;
  dec.latent_dim = 2;
  dec.num_classes = int(col0.size());
  dec.format_gate_index = gate_index;
  dec.readout_w.assign(size_t(dec.num_classes) * 2, 0.0);
  for (int c = 0; c < dec.num_classes; ++c) dec.readout_w[size_t(c) * 2] = col0[c];
  dec.readout_b.assign(dec.num_classes, 0.0);
  dec.parameter_checksum = dec.compute_checksum();
  return dec;
}

}  // namespace

TEST_CASE("decode is deterministic") {
  const FrozenDecoder dec = FrozenDecoder::init(4, 16, 77);
  const TaskInstance inst = instance_for(1);
  SplitRng rng(5);
  LatentTrajectory traj = LatentTrajectory::zeros(3, 4);
  for (auto& x : traj.data) x = rng.normal();
  CHECK(decode(dec, traj, inst) == decode(dec, traj, inst));
}

TEST_CASE("decode argmax and gate behave as constructed") {
  const FrozenDecoder dec = crafted_decoder({0.1, 0.9, 0.3}, 0);
  const TaskInstance inst = instance_for(2, 3);

  LatentTrajectory pos{1, 2, {2.0, 0.0}};  // pooled (1, 0), gate positive
  const std::string out = decode(dec, pos, inst);
  CHECK(validate_structure(out));
  CHECK(verify_answer(out, "1"));

  LatentTrajectory neg{1, 2, {-2.0, 0.0}};  // pooled (-1, 0), gate negative
  const std::string bad = decode(dec, neg, inst);
  CHECK_FALSE(validate_structure(bad));
  CHECK(bad.find("</answer>") == std::string::npos);

  LatentTrajectory wrong = LatentTrajectory::zeros(1, 5);
  CHECK_THROWS_AS(decode(dec, wrong, inst), ShapeError);
}

TEST_CASE("decode ties break to the lowest class index") {
  const FrozenDecoder dec = crafted_decoder({0.4, 0.4, 0.1}, 0);
  LatentTrajectory pos{1, 2, {2.0, 0.0}};
  CHECK(verify_answer(decode(dec, pos, instance_for(3, 3)), "0"));
}

TEST_CASE("gate soundness over random trajectories") {
  const FrozenDecoder dec = FrozenDecoder::init(6, 8, 123);
  const TaskInstance inst = instance_for(4, 8);
  SplitRng rng(88);
  for (int trial = 0; trial < 200; ++trial) {
    LatentTrajectory traj = LatentTrajectory::zeros(2, 6);
    for (auto& x : traj.data) x = rng.normal();
    const bool valid = validate_structure(decode(dec, traj, inst));
    const bool gate = pool_trajectory(traj)[dec.format_gate_index] > 0.0;
    CHECK(valid == gate);
  }
}

TEST_CASE("decoder checksum is stable and catches drift") {
  FrozenDecoder dec = FrozenDecoder::init(4, 16, 9);
  const uint64_t before = dec.parameter_checksum;
  CHECK(dec.compute_checksum() == before);

  const TaskInstance inst = instance_for(5);
  SplitRng rng(6);
  for (int i = 0; i < 50; ++i) {
    LatentTrajectory traj = LatentTrajectory::zeros(2, 4);
    for (auto& x : traj.data) x = rng.normal();
    (void)decode(dec, traj, inst);
  }
  CHECK(dec.compute_checksum() == before);

  dec.readout_w[0] += 1e-9;
  CHECK(dec.compute_checksum() != before);
}

TEST_CASE("scorer basics") {
  const LatentScorer zero = LatentScorer::zeros(4);
  SplitRng rng(7);
  LatentTrajectory traj = LatentTrajectory::zeros(2, 4);
  for (auto& x : traj.data) x = rng.normal();
  CHECK(score_trajectory(zero, traj) == 0.0);
  CHECK(score_trajectory(zero, traj) == score_trajectory(zero, traj));

  LatentTrajectory wrong = LatentTrajectory::zeros(2, 3);
  CHECK_THROWS_AS(score_trajectory(zero, wrong), ShapeError);
}

TEST_CASE("prescreen_topk picks the K best with index tie-breaks") {
  PolicyParams p = PolicyParams::init(8, 16, 1, 2, 3);
  const TaskInstance inst = instance_for(6);
  TrajectoryGroup group = sample_group(p, inst, 3, 42);
  // Pooling normalizes, so scores under w=(1,0) are the direction cosines:
  // 0.9487, 0.3162, 0.7071.
  group.trajectories[0] = LatentTrajectory{1, 2, {3.0, 1.0}};
  group.trajectories[1] = LatentTrajectory{1, 2, {1.0, 3.0}};
  group.trajectories[2] = LatentTrajectory{1, 2, {2.0, 2.0}};

  LatentScorer scorer{{1.0, 0.0}, 0.0};
  const auto mask = prescreen_topk(scorer, group, 2);
  CHECK(mask == std::vector<bool>{true, false, true});

  SUBCASE("budget covers the whole group") {
    const auto all = prescreen_topk(scorer, group, 3);
    CHECK(all == std::vector<bool>{true, true, true});
  }
  SUBCASE("equal scores select the lowest index") {
    LatentScorer flat{{0.0, 0.0}, 1.0};
    const auto one = prescreen_topk(flat, group, 1);
    CHECK(one == std::vector<bool>{true, false, false});
  }
  SUBCASE("budget bounds") {
    CHECK_THROWS_AS(prescreen_topk(scorer, group, 0), BudgetError);
    CHECK_THROWS_AS(prescreen_topk(scorer, group, 4), BudgetError);
  }
}

TEST_CASE("fit_scorer descends and converges on a single pair") {
  const LatentScorer zero = LatentScorer::zeros(3);
  const std::vector<std::pair<std::vector<double>, double>> one = {
      {{1.0, 0.0, 0.0}, 1.5}};
  CHECK(fit_scorer(zero, one, 0).w == zero.w);  // steps=0 is a no-op

  const LatentScorer fitted = fit_scorer(zero, one, 200);
  CHECK(std::abs(dot(fitted.w, one[0].first) + fitted.b - 1.5) < 1e-3);

  CHECK_THROWS_AS(fit_scorer(zero, {}, 5), ShapeError);
}

TEST_CASE("fit_scorer beats the constant-mean predictor on decoder rewards") {
  // 500 (pooled, R_total) pairs from one frozen decoder and instance; the
  // last 100 are held out.
  const FrozenDecoder dec = FrozenDecoder::init(6, 8, 2024);
  const TaskInstance inst = instance_for(7, 8);
  SplitRng rng(515);
  std::vector<std::pair<std::vector<double>, double>> pairs;
  for (int i = 0; i < 500; ++i) {
    LatentTrajectory traj = LatentTrajectory::zeros(2, 6);
    for (auto& x : traj.data) x = rng.normal();
    const RewardRecord r =
        make_reward_record(decode(dec, traj, inst), inst.ground_truth, 0.5);
    pairs.emplace_back(pool_trajectory(traj), r.r_total);
  }
  const std::vector<std::pair<std::vector<double>, double>> train(
      pairs.begin(), pairs.begin() + 400);
  const std::vector<std::pair<std::vector<double>, double>> held(
      pairs.begin() + 400, pairs.end());

  const LatentScorer fitted = fit_scorer(LatentScorer::zeros(6), train, 500);

  double train_mean = 0.0;
  for (const auto& pr : train) train_mean += pr.second;
  train_mean /= double(train.size());

  double mse_fit = 0.0, mse_const = 0.0;
  for (const auto& [x, y] : held) {
    const double pred = dot(fitted.w, x) + fitted.b;
    mse_fit += (pred - y) * (pred - y);
    mse_const += (train_mean - y) * (train_mean - y);
  }
  CHECK(mse_fit < mse_const);
}

TEST_CASE("fit_scorer training loss is non-increasing") {
  SplitRng rng(31);
  std::vector<std::pair<std::vector<double>, double>> pairs;
  for (int i = 0; i < 50; ++i) {
    LatentTrajectory traj = LatentTrajectory::zeros(2, 4);
    for (auto& x : traj.data) x = rng.normal();
    pairs.emplace_back(pool_trajectory(traj), 2.0 * rng.uniform() - 1.0);
  }
  const auto loss_of = [&](const LatentScorer& s) {
    double total = 0.0;
    for (const auto& [x, y] : pairs) {
      const double r = dot(s.w, x) + s.b - y;
      total += r * r;
    }
    return total / double(pairs.size());
  };
  LatentScorer s = LatentScorer::zeros(4);
  double prev = loss_of(s);
  for (int step = 0; step < 30; ++step) {
    s = fit_scorer(s, pairs, 1);
    const double now = loss_of(s);
    CHECK(now <= prev + 1e-12);
    prev = now;
  }
}
