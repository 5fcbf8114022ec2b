#include "core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace dlr {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Hashing / RNG
// ---------------------------------------------------------------------------

uint64_t fnv1a64_bytes(const void* data, size_t n, uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t fnv1a64(std::string_view s) {
  return fnv1a64_bytes(s.data(), s.size(), 14695981039346656037ULL);
}

uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t split_seed(uint64_t base, std::string_view tag, uint64_t a,
                    uint64_t b) {
  uint64_t h = mix64(base ^ fnv1a64(tag));
  h = mix64(h ^ (a * 0x9E3779B97F4A7C15ULL));
  h = mix64(h ^ (b * 0xC2B2AE3D27D4EB4FULL));
  return h;
}

uint64_t SplitRng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix64(state_);
}

double SplitRng::uniform() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

int SplitRng::uniform_int(int n) {
  int v = int(uniform() * n);
  return v >= n ? n - 1 : v;
}

double SplitRng::normal() {
  // u1 in (0, 1] keeps the log finite.
  double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = double(next_u64() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

bool LatentTrajectory::finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void TrajectoryGroup::check() const {
  const size_t g = trajectories.size();
  if (noise.size() != g || logp_current.size() != g || logp_old.size() != g ||
      decode_mask.size() != g || decoded.size() != g || rewards.size() != g ||
      advantages.size() != g) {
    throw ShapeError("trajectory group parallel lists must all have length G");
  }
  for (size_t i = 0; i < g; ++i) {
    if (advantages[i].has_value() && !rewards[i].has_value()) {
      throw ShapeError("advantage present without reward at index " +
                       std::to_string(i));
    }
  }
}

std::string to_string(DecodeMode m) {
  return m == DecodeMode::full ? "full" : "selective";
}

std::string to_string(ClipScope s) {
  return s == ClipScope::projection_only ? "projection_only" : "all";
}

DecodeMode decode_mode_from_string(std::string_view s) {
  if (s == "full") return DecodeMode::full;
  if (s == "selective") return DecodeMode::selective;
  throw ConfigError("decode_mode must be 'full' or 'selective', got '" +
                    std::string(s) + "'");
}

ClipScope clip_scope_from_string(std::string_view s) {
  if (s == "projection_only") return ClipScope::projection_only;
  if (s == "all") return ClipScope::all;
  throw ConfigError("clip_scope must be 'projection_only' or 'all', got '" +
                    std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

RunConfig validate_config(const RunConfig& raw) {
  require(raw.d >= 1, "d must be >= 1");
  require(raw.G >= 1, "G must be >= 1");
  require(raw.T >= 1, "T must be >= 1");
  require(raw.max_latent_steps >= 1, "max_latent_steps must be >= 1");
  require(raw.T <= raw.max_latent_steps, "T must be <= max_latent_steps");
  require(raw.embed_dim >= 1, "embed_dim must be >= 1");
  require(raw.K >= 1, "K must be >= 1");
  require(raw.K <= raw.G, "K must be <= G");
  require(raw.lambda >= 0.0, "lambda must be >= 0");
  require(raw.beta >= 0.0, "beta must be >= 0");
  require(raw.gamma >= 0.0, "gamma must be >= 0");
  require(raw.eps_clip > 0.0 && raw.eps_clip < 1.0,
          "eps_clip must be in (0,1)");
  require(raw.eps_std >= 0.0, "eps_std must be >= 0");
  require(raw.lr_assistant >= 0.0, "lr_assistant must be >= 0");
  require(raw.lr_projection >= 0.0, "lr_projection must be >= 0");
  require(raw.max_grad_norm > 0.0, "max_grad_norm must be > 0");
  clip_scope_from_string(raw.clip_scope);
  require(raw.updates_per_batch >= 1, "updates_per_batch must be >= 1");
  decode_mode_from_string(raw.decode_mode);
  require(raw.batch_instances >= 1, "batch_instances must be >= 1");
  require(raw.iterations >= 0, "iterations must be >= 0");
  require(raw.checkpoint_interval >= 1, "checkpoint_interval must be >= 1");
  require(raw.n_eval >= 0, "n_eval must be >= 0");
  require(raw.scorer_warmup_iters >= 0, "scorer_warmup_iters must be >= 0");
  require(raw.scorer_fit_steps >= 0, "scorer_fit_steps must be >= 0");
  require(raw.task_kind == "mod_arith",
          "task_kind must be 'mod_arith', got '" + raw.task_kind + "'");
  require(raw.modulus >= 2, "modulus must be >= 2");
  require(raw.chain_length >= 1, "chain_length must be >= 1");
  require(raw.workers >= 1, "workers must be >= 1");
  return raw;
}

namespace {

ordered_json config_to_ordered_json(const RunConfig& c) {
  ordered_json j;
  j["d"] = c.d;
  j["G"] = c.G;
  j["K"] = c.K;
  j["T"] = c.T;
  j["max_latent_steps"] = c.max_latent_steps;
  j["embed_dim"] = c.embed_dim;
  j["lambda"] = c.lambda;
  j["beta"] = c.beta;
  j["gamma"] = c.gamma;
  j["eps_clip"] = c.eps_clip;
  j["eps_std"] = c.eps_std;
  j["lr_assistant"] = c.lr_assistant;
  j["lr_projection"] = c.lr_projection;
  j["max_grad_norm"] = c.max_grad_norm;
  j["clip_scope"] = c.clip_scope;
  j["updates_per_batch"] = c.updates_per_batch;
  j["decode_mode"] = c.decode_mode;
  j["seed"] = c.seed;
  j["batch_instances"] = c.batch_instances;
  j["iterations"] = c.iterations;
  j["checkpoint_interval"] = c.checkpoint_interval;
  j["n_eval"] = c.n_eval;
  j["scorer_warmup_iters"] = c.scorer_warmup_iters;
  j["scorer_fit_steps"] = c.scorer_fit_steps;
  j["task_kind"] = c.task_kind;
  j["modulus"] = c.modulus;
  j["chain_length"] = c.chain_length;
  j["trainable_decoder"] = c.trainable_decoder;
  j["timing"] = c.timing;
  j["workers"] = c.workers;
  return j;
}

template <typename T>
void read_field(const ordered_json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config field '") + key +
                      "' has the wrong type");
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    const ordered_json defaults = config_to_ordered_json(RunConfig{});
    for (const auto& item : defaults.items()) {
      k.push_back(item.key());
    }
    return k;
  }();
  return keys;
}

std::string config_to_json(const RunConfig& cfg) {
  return config_to_ordered_json(cfg).dump(2) + "\n";
}

RunConfig config_from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  const auto& keys = config_keys();
  for (const auto& item : j.items()) {
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
      throw ConfigError("unknown config key '" + item.key() + "'");
    }
  }
  RunConfig c;
  read_field(j, "d", c.d);
  read_field(j, "G", c.G);
  read_field(j, "K", c.K);
  read_field(j, "T", c.T);
  read_field(j, "max_latent_steps", c.max_latent_steps);
  read_field(j, "embed_dim", c.embed_dim);
  read_field(j, "lambda", c.lambda);
  read_field(j, "beta", c.beta);
  read_field(j, "gamma", c.gamma);
  read_field(j, "eps_clip", c.eps_clip);
  read_field(j, "eps_std", c.eps_std);
  read_field(j, "lr_assistant", c.lr_assistant);
  read_field(j, "lr_projection", c.lr_projection);
  read_field(j, "max_grad_norm", c.max_grad_norm);
  read_field(j, "clip_scope", c.clip_scope);
  read_field(j, "updates_per_batch", c.updates_per_batch);
  read_field(j, "decode_mode", c.decode_mode);
  read_field(j, "seed", c.seed);
  read_field(j, "batch_instances", c.batch_instances);
  read_field(j, "iterations", c.iterations);
  read_field(j, "checkpoint_interval", c.checkpoint_interval);
  read_field(j, "n_eval", c.n_eval);
  read_field(j, "scorer_warmup_iters", c.scorer_warmup_iters);
  read_field(j, "scorer_fit_steps", c.scorer_fit_steps);
  read_field(j, "task_kind", c.task_kind);
  read_field(j, "modulus", c.modulus);
  read_field(j, "chain_length", c.chain_length);
  read_field(j, "trainable_decoder", c.trainable_decoder);
  read_field(j, "timing", c.timing);
  read_field(j, "workers", c.workers);
  return c;
}

RunConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

void apply_config_override(RunConfig& cfg, const std::string& key,
                           const std::string& value) {
  // Reuse the JSON path so types and key names stay in one place. String
  // fields need quoting; everything else is parsed as a JSON literal.
  std::string literal;
  if (key == "clip_scope" || key == "decode_mode" || key == "task_kind") {
    literal = ordered_json(value).dump();
  } else {
    literal = value;
  }
  ordered_json patch;
  try {
    patch = ordered_json::parse("{\"" + key + "\":" + literal + "}");
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("cannot parse value '" + value + "' for config key '" +
                      key + "'");
  }
  ordered_json merged = ordered_json::parse(config_to_json(cfg));
  for (const auto& item : patch.items()) merged[item.key()] = item.value();
  cfg = config_from_json_text(merged.dump());
}

// ---------------------------------------------------------------------------
// Utilities
// ---------------------------------------------------------------------------

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int nthreads = std::min(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int w = 0; w < nthreads; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += nthreads) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(const std::vector<double>& v) {
  return std::sqrt(dot(v, v));
}

}  // namespace dlr
