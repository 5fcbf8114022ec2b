#include "doctest.h"

#include <cmath>

#include "fd_check.hpp"
#include "objective.hpp"

using namespace dlr;

TEST_CASE("grpo_loss hand-derived examples") {
  SUBCASE("inactive clip, unit ratio") {
    const double lp[] = {-1.0};
    const double adv[] = {2.0};
    CHECK(grpo_loss(std::span(lp, 1), std::span(lp, 1), std::span(adv, 1), 0.0,
                    0.2, 0.0) == doctest::Approx(-2.0).epsilon(1e-12));
  }
  SUBCASE("positive advantage, ratio above the band") {
    // rho = 1.5, A = 1, eps = 0.2: min(1.5, 1.2) = 1.2.
    const double lp_new[] = {std::log(1.5)};
    const double lp_old[] = {0.0};
    const double adv[] = {1.0};
    double cf = -1.0;
    CHECK(grpo_loss(std::span(lp_new, 1), std::span(lp_old, 1),
                    std::span(adv, 1), 0.0, 0.2, 0.0,
                    &cf) == doctest::Approx(-1.2).epsilon(1e-9));
    CHECK(cf == 1.0);
  }
  SUBCASE("negative advantage, ratio below the band") {
    // rho = 0.5, A = -1: min(-0.5, -0.8) = -0.8.
    const double lp_new[] = {std::log(0.5)};
    const double lp_old[] = {0.0};
    const double adv[] = {-1.0};
    double cf = -1.0;
    CHECK(grpo_loss(std::span(lp_new, 1), std::span(lp_old, 1),
                    std::span(adv, 1), 0.0, 0.2, 0.0,
                    &cf) == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(cf == 1.0);
  }
  SUBCASE("kl penalty adds beta*kl") {
    const double lp[] = {0.0};
    const double adv[] = {0.0};
    CHECK(grpo_loss(std::span(lp, 1), std::span(lp, 1), std::span(adv, 1), 2.5,
                    0.2, 0.1) == doctest::Approx(0.25));
  }
}

TEST_CASE("grpo_loss clip bookkeeping matches the branch definition") {
  SplitRng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int g = 1 + rng.uniform_int(8);
    std::vector<double> lp_new(g), lp_old(g, 0.0), adv(g);
    for (int i = 0; i < g; ++i) {
      lp_new[i] = rng.normal() * 0.5;
      adv[i] = rng.normal();
    }
    double cf = 0.0;
    const double loss = grpo_loss(lp_new, lp_old, adv, 0.0, 0.2, 0.0, &cf);

    double expect = 0.0;
    int active = 0;
    for (int i = 0; i < g; ++i) {
      const double rho = std::exp(lp_new[i]);
      const double unclipped = rho * adv[i];
      const double clipped = std::clamp(rho, 0.8, 1.2) * adv[i];
      if (clipped < unclipped) ++active;
      expect += std::min(unclipped, clipped);
    }
    CHECK(loss == doctest::Approx(-expect / g).epsilon(1e-12));
    CHECK(cf == doctest::Approx(double(active) / g));
  }
}

TEST_CASE("contrastive_loss closed forms") {
  const std::vector<double> e1 = {1.0, 0.0};
  const std::vector<double> e2 = {0.0, 1.0};
  CHECK(contrastive_loss({e1}) == 0.0);
  CHECK(contrastive_loss({e1, e2}) ==
        doctest::Approx(2.0 * std::log(1.0 + std::exp(-1.0))).epsilon(1e-6));
  CHECK(contrastive_loss({e1, e1}) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-6));
  // Orthogonal pairs disperse strictly better than identical pairs.
  CHECK(contrastive_loss({e1, e2}) < contrastive_loss({e1, e1}));

  CHECK_THROWS_AS(contrastive_loss({{0.5, 0.0}}), NormError);
  CHECK_THROWS_AS(contrastive_loss({e1, {1.0, 1.0}}), NormError);
}

TEST_CASE("total_loss is linear in gamma") {
  CHECK(total_loss(1.0, 0.626523, 0.1) == doctest::Approx(1.0626523));
  CHECK(total_loss(1.7, 5.0, 0.0) == 1.7);
  CHECK(total_loss(0.0, 3.0, 0.25) == doctest::Approx(0.75));
  for (double gamma : {0.0, 0.1, 0.5, 2.0}) {
    CHECK(total_loss(1.3, 2.7, gamma) == 1.3 + gamma * 2.7);
  }
  CHECK_THROWS_AS(total_loss(1.0, 1.0, -0.5), DomainError);
}

TEST_CASE("analytic gradients match central finite differences") {
  for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const fdcheck::CheckSetup setup = fdcheck::make_setup(seed);
    const PolicySnapshot old_snap = PolicySnapshot::capture(
        setup.params, PolicySnapshot::Tag::old_policy);
    const PolicySnapshot ref_snap = PolicySnapshot::capture(
        setup.ref, PolicySnapshot::Tag::reference);

    const ObjectiveResult res = compute_gradients(
        setup.params, setup.group, old_snap, ref_snap, setup.cfg);

    // The backprop loss and the op-composed loss must agree exactly.
    const double composed =
        fdcheck::reference_loss(setup.params, setup.group, setup.ref, setup.cfg);
    CHECK(res.breakdown.l_total == doctest::Approx(composed).epsilon(1e-12));

    const Gradients fd =
        fdcheck::fd_gradient(setup.params, setup.group, setup.ref, setup.cfg,
                             1e-5);
    CHECK(fdcheck::max_rel_error(res.grads, fd) < 1e-4);
  }
}

TEST_CASE("constant loss yields an identically zero gradient") {
  fdcheck::CheckSetup setup = fdcheck::make_setup(42);
  setup.cfg.gamma = 0.0;
  setup.cfg.beta = 0.0;
  for (int i = 0; i < setup.group.size(); ++i) {
    if (setup.group.advantages[i].has_value()) setup.group.advantages[i] = 0.0;
  }
  const ObjectiveResult res = compute_gradients(
      setup.params, setup.group,
      PolicySnapshot::capture(setup.params, PolicySnapshot::Tag::old_policy),
      PolicySnapshot::capture(setup.ref, PolicySnapshot::Tag::reference),
      setup.cfg);
  for (const auto* block :
       {&res.grads.w1, &res.grads.b1, &res.grads.w2, &res.grads.b2,
        &res.grads.wp, &res.grads.bp}) {
    for (double v : *block) CHECK(v == 0.0);
  }
}

TEST_CASE("duplicating the group leaves the grpo gradient unchanged") {
  fdcheck::CheckSetup setup = fdcheck::make_setup(77);
  setup.cfg.gamma = 0.0;  // contrastive does change under duplication
  const PolicySnapshot old_snap =
      PolicySnapshot::capture(setup.params, PolicySnapshot::Tag::old_policy);
  const PolicySnapshot ref_snap =
      PolicySnapshot::capture(setup.ref, PolicySnapshot::Tag::reference);

  const ObjectiveResult base = compute_gradients(
      setup.params, setup.group, old_snap, ref_snap, setup.cfg);

  TrajectoryGroup doubled = setup.group;
  const int g = setup.group.size();
  for (int i = 0; i < g; ++i) {
    doubled.trajectories.push_back(setup.group.trajectories[i]);
    doubled.noise.push_back(setup.group.noise[i]);
    doubled.logp_current.push_back(setup.group.logp_current[i]);
    doubled.logp_old.push_back(setup.group.logp_old[i]);
    doubled.decode_mask.push_back(setup.group.decode_mask[i]);
    doubled.decoded.push_back(setup.group.decoded[i]);
    doubled.rewards.push_back(setup.group.rewards[i]);
    doubled.advantages.push_back(setup.group.advantages[i]);
  }
  const ObjectiveResult dup = compute_gradients(setup.params, doubled, old_snap,
                                                ref_snap, setup.cfg);

  CHECK(dup.breakdown.l_grpo ==
        doctest::Approx(base.breakdown.l_grpo).epsilon(1e-12));
  const std::vector<const std::vector<double>*> a = {
      &base.grads.w1, &base.grads.b1, &base.grads.w2,
      &base.grads.b2, &base.grads.wp, &base.grads.bp};
  const std::vector<const std::vector<double>*> b = {
      &dup.grads.w1, &dup.grads.b1, &dup.grads.w2,
      &dup.grads.b2, &dup.grads.wp, &dup.grads.bp};
  for (size_t k = 0; k < a.size(); ++k) {
    for (size_t i = 0; i < a[k]->size(); ++i) {
      CHECK((*a[k])[i] == doctest::Approx((*b[k])[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("gradient clipping scales only the in-scope block") {
  PolicyParams p = PolicyParams::init(4, 8, 1, 2, 5);
  Gradients g = Gradients::zeros_like(p);
  for (auto& v : g.w1) v = 0.01;
  for (auto& v : g.wp) v = 3.0;
  for (auto& v : g.bp) v = 3.0;

  SUBCASE("below the bound: untouched") {
    Gradients small = Gradients::zeros_like(p);
    small.wp[0] = 0.5;
    clip_gradients_l2(small, 1.0, ClipScope::projection_only);
    CHECK(small.wp[0] == 0.5);
  }
  SUBCASE("projection scope rescales to the bound exactly") {
    Gradients c = g;
    clip_gradients_l2(c, 1.0, ClipScope::projection_only);
    double sq = 0.0;
    for (double v : c.wp) sq += v * v;
    for (double v : c.bp) sq += v * v;
    CHECK(std::abs(std::sqrt(sq) - 1.0) <= 1e-9);
    // Assistant block bit-identical.
    CHECK(c.w1 == g.w1);
  }
  SUBCASE("all scope rescales everything") {
    Gradients c = g;
    clip_gradients_l2(c, 1.0, ClipScope::all);
    double sq = 0.0;
    for (const auto* block : {&c.w1, &c.b1, &c.w2, &c.b2, &c.wp, &c.bp}) {
      for (double v : *block) sq += v * v;
    }
    CHECK(std::abs(std::sqrt(sq) - 1.0) <= 1e-9);
    CHECK(c.w1 != g.w1);
  }
}

TEST_CASE("adamw first step and determinism") {
  SUBCASE("zero gradient, zero decay: no movement") {
    PolicyParams p = PolicyParams::init(4, 8, 1, 2, 6);
    const PolicyParams before = p;
    AdamWState st = AdamWState::zeros_like(p);
    AdamWConfig h;
    h.weight_decay = 0.0;
    adamw_step(p, Gradients::zeros_like(p), st, 0.1, 0.1, h);
    CHECK(p.w1 == before.w1);
    CHECK(p.wp == before.wp);
  }
  SUBCASE("bias-corrected first step is about -lr for unit gradient") {
    PolicyParams p = PolicyParams::init(1, 1, 1, 1, 7);
    p.w1 = {0.0};
    Gradients g = Gradients::zeros_like(p);
    g.w1 = {1.0};
    AdamWState st = AdamWState::zeros_like(p);
    AdamWConfig h;
    h.weight_decay = 0.0;
    adamw_step(p, g, st, 0.1, 0.1, h);
    CHECK(std::abs(p.w1[0] + 0.1) < 1e-6);
  }
  SUBCASE("two runs reproduce bit-identically") {
    const auto run = [] {
      PolicyParams p = PolicyParams::init(4, 8, 1, 2, 8);
      AdamWState st = AdamWState::zeros_like(p);
      Gradients g = Gradients::zeros_like(p);
      SplitRng rng(14);
      for (auto& v : g.wp) v = rng.normal();
      adamw_step(p, g, st, 0.05, 0.02);
      adamw_step(p, g, st, 0.05, 0.02);
      return p;
    };
    const PolicyParams a = run();
    const PolicyParams b = run();
    CHECK(a.w1 == b.w1);
    CHECK(a.wp == b.wp);
    CHECK(a.bp == b.bp);
  }
  SUBCASE("per-block learning rates are honored") {
    PolicyParams p = PolicyParams::init(4, 8, 1, 2, 9);
    const PolicyParams before = p;
    Gradients g = Gradients::zeros_like(p);
    for (auto& v : g.w1) v = 1.0;
    for (auto& v : g.wp) v = 1.0;
    AdamWState st = AdamWState::zeros_like(p);
    AdamWConfig h;
    h.weight_decay = 0.0;
    adamw_step(p, g, st, 0.0, 0.1, h);
    CHECK(p.w1 == before.w1);  // assistant lr zero
    CHECK(p.wp != before.wp);
  }
}
