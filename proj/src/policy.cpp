#include "policy.hpp"

#include <cctype>
#include <cmath>

namespace dlr {

namespace {

// Frozen seed of the query-embedding feature map. Not derived from the run
// seed: the embedding is part of the task representation, not of the policy.
constexpr uint64_t kEmbedSeed = 0x7A3C9D1E5B42F601ULL;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y = W x + b with W of shape (rows x cols), row-major.
void affine(const std::vector<double>& w, const std::vector<double>& b,
            const std::vector<double>& x, std::vector<double>& y) {
  const size_t rows = b.size();
  const size_t cols = x.size();
  y.assign(rows, 0.0);
  for (size_t r = 0; r < rows; ++r) {
    double s = b[r];
    const double* wr = &w[r * cols];
    for (size_t c = 0; c < cols; ++c) s += wr[c] * x[c];
    y[r] = s;
  }
}

}  // namespace

PolicyParams PolicyParams::init(int embed_dim, int hidden_dim,
                                int latent_steps, int latent_dim,
                                uint64_t seed, double sigma_init) {
  PolicyParams p;
  p.embed_dim = embed_dim;
  p.hidden_dim = hidden_dim;
  p.latent_steps = latent_steps;
  p.latent_dim = latent_dim;
  if (sigma_init <= p.sigma_min || sigma_init >= p.sigma_max) {
    throw DomainError("sigma_init must lie strictly inside [sigma_min, sigma_max]");
  }

  SplitRng rng(split_seed(seed, "policy_init"));
  const auto gaussian_block = [&](size_t n, double scale) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal() * scale;
    return v;
  };

  p.w1 = gaussian_block(size_t(hidden_dim) * embed_dim,
                        1.0 / std::sqrt(double(embed_dim)));
  p.b1.assign(hidden_dim, 0.0);
  p.w2 = gaussian_block(size_t(hidden_dim) * hidden_dim,
                        1.0 / std::sqrt(double(hidden_dim)));
  p.b2.assign(hidden_dim, 0.0);

  const size_t head = size_t(2) * latent_steps * latent_dim;
  p.wp.assign(head * hidden_dim, 0.0);
  p.bp.assign(head, 0.0);
  // Log-std head bias such that sigma == sigma_init at initialization.
  const double c0 = std::log(p.sigma_min);
  const double c1 = std::log(p.sigma_max) - c0;
  const double ratio = (std::log(sigma_init) - c0) / c1;
  const double s_bias = std::log(ratio / (1.0 - ratio));
  const size_t td = size_t(latent_steps) * latent_dim;
  for (size_t k = td; k < head; ++k) p.bp[k] = s_bias;
  return p;
}

size_t PolicyParams::parameter_count() const {
  return w1.size() + b1.size() + w2.size() + b2.size() + wp.size() + bp.size();
}

bool PolicyParams::finite() const {
  for (const auto* block : {&w1, &b1, &w2, &b2, &wp, &bp}) {
    for (double v : *block) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::vector<double> embed_query(const TaskInstance& instance, int embed_dim) {
  // Structural features, in positional order: numeric operands, operators,
  // the trailing modulus, and the context text.
  std::vector<std::string> features;
  std::vector<long long> numbers;
  int op_index = 0;
  const std::string& q = instance.query;
  for (size_t i = 0; i < q.size();) {
    if (std::isdigit(static_cast<unsigned char>(q[i]))) {
      size_t j = i;
      while (j < q.size() && std::isdigit(static_cast<unsigned char>(q[j]))) ++j;
      numbers.push_back(std::stoll(q.substr(i, j - i)));
      i = j;
    } else {
      if (q[i] == '+' || q[i] == '-' || q[i] == '*') {
        features.push_back("op" + std::to_string(op_index++) + "=" + q[i]);
      }
      ++i;
    }
  }
  // The final number is the modulus by construction of the renderer.
  for (size_t k = 0; k + 1 < numbers.size(); ++k) {
    features.push_back("arg" + std::to_string(k) + "=" +
                       std::to_string(numbers[k]));
  }
  if (!numbers.empty()) {
    features.push_back("mod=" + std::to_string(numbers.back()));
  }
  features.push_back("ctx=" + std::to_string(fnv1a64(instance.context)));

  std::vector<double> v(embed_dim, 0.0);
  const double scale = 1.0 / std::sqrt(double(embed_dim));
  for (const auto& f : features) {
    SplitRng rng(split_seed(kEmbedSeed, f));
    for (int j = 0; j < embed_dim; ++j) v[j] += rng.normal() * scale;
  }
  return v;
}

TrajectoryDistribution policy_forward(const PolicyParams& params,
                                      const TaskInstance& instance,
                                      ForwardCache* cache) {
  std::vector<double> e = embed_query(instance, params.embed_dim);
  std::vector<double> h1, h2, u;
  affine(params.w1, params.b1, e, h1);
  for (auto& x : h1) x = std::tanh(x);
  affine(params.w2, params.b2, h1, h2);
  for (auto& x : h2) x = std::tanh(x);
  affine(params.wp, params.bp, h2, u);

  const size_t td = size_t(params.latent_steps) * params.latent_dim;
  TrajectoryDistribution dist;
  dist.steps = params.latent_steps;
  dist.dim = params.latent_dim;
  dist.mu.assign(u.begin(), u.begin() + td);
  dist.sigma.resize(td);

  const double c0 = std::log(params.sigma_min);
  const double c1 = std::log(params.sigma_max) - c0;
  std::vector<double> sig_s(td);
  for (size_t k = 0; k < td; ++k) {
    const double s = sigmoid(u[td + k]);
    sig_s[k] = s;
    dist.sigma[k] = std::exp(c0 + c1 * s);
  }

  for (size_t k = 0; k < td; ++k) {
    if (!std::isfinite(dist.mu[k]) || !std::isfinite(dist.sigma[k])) {
      throw NumericalError("non-finite trajectory distribution output");
    }
  }
  if (cache) {
    cache->e = std::move(e);
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
    cache->sig_s = std::move(sig_s);
  }
  return dist;
}

TrajectoryGroup sample_group(const PolicyParams& params,
                             const TaskInstance& instance, int G,
                             uint64_t seed) {
  const TrajectoryDistribution dist = trajectory_distribution(params, instance);
  const int T = dist.steps;
  const int d = dist.dim;

  TrajectoryGroup group;
  group.instance = instance;
  group.trajectories.resize(G);
  group.noise.resize(G);
  group.logp_current.resize(G);
  group.logp_old.resize(G);
  group.decode_mask.assign(G, false);
  group.decoded.resize(G);
  group.rewards.resize(G);
  group.advantages.resize(G);

  for (int g = 0; g < G; ++g) {
    SplitRng rng(split_seed(seed, "traj", uint64_t(g)));
    LatentTrajectory eta = LatentTrajectory::zeros(T, d);
    LatentTrajectory z = LatentTrajectory::zeros(T, d);
    for (size_t k = 0; k < eta.data.size(); ++k) {
      eta.data[k] = rng.normal();
      z.data[k] = dist.mu[k] + dist.sigma[k] * eta.data[k];
    }
    group.noise[g] = std::move(eta);
    const double lp = log_prob(dist, z);
    group.trajectories[g] = std::move(z);
    group.logp_current[g] = lp;
    group.logp_old[g] = lp;
  }
  return group;
}

double log_prob(const TrajectoryDistribution& dist,
                const LatentTrajectory& traj) {
  if (traj.steps != dist.steps || traj.dim != dist.dim) {
    throw ShapeError("trajectory shape does not match distribution");
  }
  constexpr double half_log_2pi = 0.9189385332046727;
  double lp = 0.0;
  for (size_t k = 0; k < traj.data.size(); ++k) {
    const double zc = (traj.data[k] - dist.mu[k]) / dist.sigma[k];
    lp += -0.5 * zc * zc - std::log(dist.sigma[k]) - half_log_2pi;
  }
  return lp;
}

double gaussian_kl(const TrajectoryDistribution& p,
                   const TrajectoryDistribution& q) {
  if (p.steps != q.steps || p.dim != q.dim) {
    throw ShapeError("KL requires matching distribution shapes");
  }
  double kl = 0.0;
  for (size_t k = 0; k < p.mu.size(); ++k) {
    const double sp = p.sigma[k];
    const double sq = q.sigma[k];
    const double dm = p.mu[k] - q.mu[k];
    kl += std::log(sq / sp) + (sp * sp + dm * dm) / (2.0 * sq * sq) - 0.5;
  }
  return kl;
}

std::vector<double> pool_trajectory(const LatentTrajectory& traj) {
  if (traj.steps < 1 || traj.dim < 1) {
    throw ShapeError("pool_trajectory needs a nonempty trajectory");
  }
  std::vector<double> m(traj.dim, 0.0);
  for (int t = 0; t < traj.steps; ++t) {
    for (int j = 0; j < traj.dim; ++j) m[j] += traj.at(t, j);
  }
  for (auto& x : m) x /= double(traj.steps);
  const double n = l2_norm(m);
  if (n == 0.0) {
    std::vector<double> e1(traj.dim, 0.0);
    e1[0] = 1.0;
    return e1;
  }
  for (auto& x : m) x /= n;
  return m;
}

}  // namespace dlr
