#include "objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dlr {

namespace {

constexpr double kLogRatioBound = 20.0;  // overflow guard on the importance ratio

double clamp_ratio_log(double r) {
  return std::clamp(r, -kLogRatioBound, kLogRatioBound);
}

}  // namespace

double grpo_loss(std::span<const double> logp_new,
                 std::span<const double> logp_old,
                 std::span<const double> advantages, double kl,
                 double eps_clip, double beta, double* clip_fraction_out) {
  const size_t g = logp_new.size();
  if (g < 1 || logp_old.size() != g || advantages.size() != g) {
    throw ShapeError("grpo_loss needs parallel lists of length G >= 1");
  }
  double sum = 0.0;
  size_t clipped_members = 0;
  for (size_t i = 0; i < g; ++i) {
    const double rho = std::exp(clamp_ratio_log(logp_new[i] - logp_old[i]));
    if (!std::isfinite(rho)) {
      throw NumericalError("non-finite importance ratio");
    }
    const double unclipped = rho * advantages[i];
    const double clipped =
        std::clamp(rho, 1.0 - eps_clip, 1.0 + eps_clip) * advantages[i];
    if (clipped < unclipped) ++clipped_members;
    sum += std::min(unclipped, clipped);
  }
  if (clip_fraction_out) {
    *clip_fraction_out = double(clipped_members) / double(g);
  }
  return -sum / double(g) + beta * kl;
}

double contrastive_loss(const std::vector<std::vector<double>>& pooled) {
  const size_t g = pooled.size();
  if (g < 1) throw ShapeError("contrastive_loss needs at least one vector");
  const size_t dim = pooled[0].size();
  for (const auto& v : pooled) {
    if (v.size() != dim) throw ShapeError("pooled vectors must share a dimension");
    if (std::abs(l2_norm(v) - 1.0) > 1e-6) {
      throw NormError("contrastive inputs must be unit-norm within 1e-6");
    }
  }
  double loss = 0.0;
  std::vector<double> row(g);
  for (size_t k = 0; k < g; ++k) {
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < g; ++j) {
      row[j] = dot(pooled[k], pooled[j]);
      mx = std::max(mx, row[j]);
    }
    double lse = 0.0;
    for (size_t j = 0; j < g; ++j) lse += std::exp(row[j] - mx);
    lse = mx + std::log(lse);
    loss += lse - row[k];
  }
  return loss;
}

double total_loss(double l_grpo, double l_cl, double gamma) {
  if (gamma < 0.0) throw DomainError("gamma must be >= 0");
  return l_grpo + gamma * l_cl;
}

Gradients Gradients::zeros_like(const PolicyParams& p) {
  Gradients g;
  g.w1.assign(p.w1.size(), 0.0);
  g.b1.assign(p.b1.size(), 0.0);
  g.w2.assign(p.w2.size(), 0.0);
  g.b2.assign(p.b2.size(), 0.0);
  g.wp.assign(p.wp.size(), 0.0);
  g.bp.assign(p.bp.size(), 0.0);
  return g;
}

void Gradients::accumulate(const Gradients& other, double scale) {
  const auto add = [scale](std::vector<double>& dst,
                           const std::vector<double>& src) {
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
  };
  add(w1, other.w1);
  add(b1, other.b1);
  add(w2, other.w2);
  add(b2, other.b2);
  add(wp, other.wp);
  add(bp, other.bp);
}

void Gradients::scale_all(double s) {
  for (auto* block : {&w1, &b1, &w2, &b2, &wp, &bp}) {
    for (auto& v : *block) v *= s;
  }
}

bool Gradients::finite() const {
  for (const auto* block : {&w1, &b1, &w2, &b2, &wp, &bp}) {
    for (double v : *block) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

ObjectiveResult compute_gradients(const PolicyParams& params,
                                  const TrajectoryGroup& group,
                                  const PolicySnapshot& old_snapshot,
                                  const PolicySnapshot& reference_snapshot,
                                  const RunConfig& config) {
  (void)old_snapshot;  // logp_old is carried on the group itself
  group.check();
  const int g = group.size();
  if (g < 1) throw ShapeError("compute_gradients needs a nonempty group");

  ForwardCache cache;
  const TrajectoryDistribution dist = policy_forward(params, group.instance, &cache);
  const TrajectoryDistribution ref_dist =
      trajectory_distribution(reference_snapshot.params, group.instance);
  const double kl = gaussian_kl(dist, ref_dist);

  const size_t td = dist.mu.size();
  const int T = dist.steps;
  const int d = dist.dim;
  std::vector<double> dmu(td, 0.0);
  std::vector<double> dsigma(td, 0.0);

  // --- Clipped surrogate over decoded members (likelihood-ratio path) ---
  std::vector<int> decoded_ids;
  for (int i = 0; i < g; ++i) {
    if (group.advantages[i].has_value()) decoded_ids.push_back(i);
  }
  LossBreakdown bd;
  bd.kl_value = kl;
  if (!decoded_ids.empty()) {
    const size_t n = decoded_ids.size();
    std::vector<double> lp_new(n), lp_old(n), adv(n);
    for (size_t k = 0; k < n; ++k) {
      const int i = decoded_ids[k];
      lp_new[k] = log_prob(dist, group.trajectories[i]);
      lp_old[k] = group.logp_old[i];
      adv[k] = *group.advantages[i];
    }
    bd.l_grpo = grpo_loss(lp_new, lp_old, adv, kl, config.eps_clip,
                          config.beta, &bd.clip_fraction);

    for (size_t k = 0; k < n; ++k) {
      const int i = decoded_ids[k];
      const double raw = lp_new[k] - lp_old[k];
      const double rho = std::exp(clamp_ratio_log(raw));
      const double unclipped = rho * adv[k];
      const double clipped =
          std::clamp(rho, 1.0 - config.eps_clip, 1.0 + config.eps_clip) * adv[k];
      // Clipped branch active means rho sits outside the band, where the
      // clip is flat; only the unclipped branch propagates a gradient.
      double dsur_drho = (unclipped <= clipped) ? adv[k] : 0.0;
      if (std::abs(raw) >= kLogRatioBound) dsur_drho = 0.0;  // saturated guard
      const double coef = -(1.0 / double(n)) * dsur_drho * rho;
      if (coef != 0.0) {
        const LatentTrajectory& z = group.trajectories[i];
        for (size_t c = 0; c < td; ++c) {
          const double sig = dist.sigma[c];
          const double diff = z.data[c] - dist.mu[c];
          dmu[c] += coef * diff / (sig * sig);
          dsigma[c] += coef * (diff * diff / (sig * sig * sig) - 1.0 / sig);
        }
      }
    }
  } else {
    bd.l_grpo = config.beta * kl;  // no decoded members: surrogate term empty
  }

  // --- KL penalty ---
  if (config.beta != 0.0) {
    for (size_t c = 0; c < td; ++c) {
      const double sq = ref_dist.sigma[c];
      dmu[c] += config.beta * (dist.mu[c] - ref_dist.mu[c]) / (sq * sq);
      dsigma[c] += config.beta * (dist.sigma[c] / (sq * sq) - 1.0 / dist.sigma[c]);
    }
  }

  // --- Contrastive dispersion over all members (reparameterized path) ---
  {
    std::vector<std::vector<double>> pooled_means(g);  // pre-normalization
    std::vector<std::vector<double>> v(g);
    std::vector<double> norms(g);
    for (int k = 0; k < g; ++k) {
      std::vector<double> m(d, 0.0);
      for (int t = 0; t < T; ++t) {
        for (int j = 0; j < d; ++j) {
          const size_t c = size_t(t) * d + j;
          m[j] += (dist.mu[c] + dist.sigma[c] * group.noise[k].data[c]);
        }
      }
      for (auto& x : m) x /= double(T);
      norms[k] = l2_norm(m);
      if (norms[k] == 0.0) {
        v[k].assign(d, 0.0);
        v[k][0] = 1.0;  // fallback direction carries no gradient
      } else {
        v[k] = m;
        for (auto& x : v[k]) x /= norms[k];
      }
      pooled_means[k] = std::move(m);
    }

    bd.l_cl = contrastive_loss(v);

    if (config.gamma != 0.0) {
      // dL/dS_kj = softmax_j(S_k.) - delta_kj, applied through both slots of
      // the Gram matrix.
      std::vector<std::vector<double>> dS(g, std::vector<double>(g, 0.0));
      std::vector<double> row(g);
      for (int k = 0; k < g; ++k) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < g; ++j) {
          row[j] = dot(v[k], v[j]);
          mx = std::max(mx, row[j]);
        }
        double z = 0.0;
        for (int j = 0; j < g; ++j) z += std::exp(row[j] - mx);
        for (int j = 0; j < g; ++j) {
          dS[k][j] = std::exp(row[j] - mx) / z - (j == k ? 1.0 : 0.0);
        }
      }
      for (int c = 0; c < g; ++c) {
        std::vector<double> dv(d, 0.0);
        for (int j = 0; j < g; ++j) {
          for (int x = 0; x < d; ++x) {
            dv[x] += dS[c][j] * v[j][x] + dS[j][c] * v[j][x];
          }
        }
        if (norms[c] == 0.0) continue;
        const double vdotdv = dot(v[c], dv);
        for (int x = 0; x < d; ++x) {
          const double dm = (dv[x] - v[c][x] * vdotdv) / norms[c];
          const double per_step = config.gamma * dm / double(T);
          for (int t = 0; t < T; ++t) {
            const size_t cc = size_t(t) * d + x;
            dmu[cc] += per_step;
            dsigma[cc] += per_step * group.noise[c].data[cc];
          }
        }
      }
    }
  }

  bd.l_total = total_loss(bd.l_grpo, bd.l_cl, config.gamma);

  // --- Chain rule through the smooth log-std squashing, then the linears ---
  const double c1 = std::log(params.sigma_max) - std::log(params.sigma_min);
  std::vector<double> du(2 * td);
  for (size_t c = 0; c < td; ++c) {
    du[c] = dmu[c];
    const double sg = cache.sig_s[c];
    du[td + c] = dsigma[c] * dist.sigma[c] * c1 * sg * (1.0 - sg);
  }

  Gradients grads = Gradients::zeros_like(params);
  const int H = params.hidden_dim;
  const int E = params.embed_dim;

  std::vector<double> dh2(H, 0.0);
  for (size_t r = 0; r < du.size(); ++r) {
    grads.bp[r] = du[r];
    const size_t base = r * H;
    for (int c = 0; c < H; ++c) {
      grads.wp[base + c] = du[r] * cache.h2[c];
      dh2[c] += params.wp[base + c] * du[r];
    }
  }

  std::vector<double> da2(H);
  for (int r = 0; r < H; ++r) {
    da2[r] = dh2[r] * (1.0 - cache.h2[r] * cache.h2[r]);
  }
  std::vector<double> dh1(H, 0.0);
  for (int r = 0; r < H; ++r) {
    grads.b2[r] = da2[r];
    const size_t base = size_t(r) * H;
    for (int c = 0; c < H; ++c) {
      grads.w2[base + c] = da2[r] * cache.h1[c];
      dh1[c] += params.w2[base + c] * da2[r];
    }
  }

  std::vector<double> da1(H);
  for (int r = 0; r < H; ++r) {
    da1[r] = dh1[r] * (1.0 - cache.h1[r] * cache.h1[r]);
  }
  for (int r = 0; r < H; ++r) {
    grads.b1[r] = da1[r];
    const size_t base = size_t(r) * E;
    for (int c = 0; c < E; ++c) {
      grads.w1[base + c] = da1[r] * cache.e[c];
    }
  }

  if (!grads.finite()) throw NumericalError("non-finite gradients");
  return ObjectiveResult{bd, std::move(grads)};
}

void clip_gradients_l2(Gradients& grads, double max_norm, ClipScope scope) {
  if (max_norm <= 0.0) throw DomainError("max_norm must be > 0");
  std::vector<std::vector<double>*> blocks;
  if (scope == ClipScope::all) {
    blocks = {&grads.w1, &grads.b1, &grads.w2, &grads.b2, &grads.wp, &grads.bp};
  } else {
    blocks = {&grads.wp, &grads.bp};
  }
  double sq = 0.0;
  for (auto* b : blocks) {
    for (double vv : *b) sq += vv * vv;
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double s = max_norm / norm;
  for (auto* b : blocks) {
    for (auto& vv : *b) vv *= s;
  }
}

namespace {

void adamw_block(std::vector<double>& p, const std::vector<double>& g,
                 std::vector<double>& m, std::vector<double>& v, int64_t t,
                 double lr, const AdamWConfig& h) {
  const double bc1 = 1.0 - std::pow(h.beta1, double(t));
  const double bc2 = 1.0 - std::pow(h.beta2, double(t));
  for (size_t i = 0; i < p.size(); ++i) {
    m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
    v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= lr * (mhat / (std::sqrt(vhat) + h.eps) + h.weight_decay * p[i]);
  }
}

}  // namespace

void adamw_step(PolicyParams& params, const Gradients& grads, AdamWState& state,
                double lr_assistant, double lr_projection,
                const AdamWConfig& hyper) {
  state.t += 1;
  adamw_block(params.w1, grads.w1, state.m.w1, state.v.w1, state.t,
              lr_assistant, hyper);
  adamw_block(params.b1, grads.b1, state.m.b1, state.v.b1, state.t,
              lr_assistant, hyper);
  adamw_block(params.w2, grads.w2, state.m.w2, state.v.w2, state.t,
              lr_assistant, hyper);
  adamw_block(params.b2, grads.b2, state.m.b2, state.v.b2, state.t,
              lr_assistant, hyper);
  adamw_block(params.wp, grads.wp, state.m.wp, state.v.wp, state.t,
              lr_projection, hyper);
  adamw_block(params.bp, grads.bp, state.m.bp, state.v.bp, state.t,
              lr_projection, hyper);
}

}  // namespace dlr
