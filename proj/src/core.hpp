#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dlr {

// ---------------------------------------------------------------------------
// Error types. Every failure mode has a dedicated type so the C API can map
// it to a stable status code.
// ---------------------------------------------------------------------------
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GroupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NormError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ChecksumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Seeded randomness.
//
// All randomness in a run flows from one 64-bit seed through an explicit
// splitting scheme:
//
//   sub = mix64(mix64(mix64(base ^ fnv1a64(tag)) ^ a) ^ b)
//
// where `tag` names the consumer ("decoder", "policy", "instance", "sample",
// "traj", "eval", ...) and (a, b) are loop indices (iteration, batch slot,
// trajectory index). Any trajectory of a run is reproducible in isolation
// from (seed, tag, indices) alone.
// ---------------------------------------------------------------------------
uint64_t fnv1a64(std::string_view s);
uint64_t fnv1a64_bytes(const void* data, size_t n, uint64_t h);
uint64_t mix64(uint64_t z);
uint64_t split_seed(uint64_t base, std::string_view tag, uint64_t a = 0,
                    uint64_t b = 0);

/// Deterministic counter-based generator (splitmix64 stream). Never shared
/// between workers; fan-out happens by splitting seeds, not the generator.
class SplitRng {
 public:
  explicit SplitRng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64();
  /// Uniform double in [0, 1).
  double uniform();
  /// Uniform integer in [0, n).
  int uniform_int(int n);
  /// Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double normal();

 private:
  uint64_t state_;
};

// ---------------------------------------------------------------------------
// Domain types.
// ---------------------------------------------------------------------------

/// A sequence of `steps` latent vectors of dimension `dim`, stored row-major.
/// The atomic unit of exploration; decoded to text only by the frozen decoder.
struct LatentTrajectory {
  int steps = 0;
  int dim = 0;
  std::vector<double> data;  // steps * dim

  static LatentTrajectory zeros(int steps, int dim) {
    return LatentTrajectory{steps, dim,
                            std::vector<double>(size_t(steps) * dim, 0.0)};
  }
  double at(int t, int j) const { return data[size_t(t) * dim + j]; }
  double& at(int t, int j) { return data[size_t(t) * dim + j]; }
  bool finite() const;
};

struct TaskInstance {
  std::string context;       // shared task framing
  std::string query;         // the rendered question
  std::string ground_truth;  // canonical answer string
  int answer_space_size = 0;
};

struct RewardRecord {
  double r_corr = 0.0;   // in {+1, -1}
  double r_fmt = 0.0;    // in {+1, -1}
  double r_total = 0.0;  // r_corr + lambda * r_fmt
};

/// G trajectories for one query plus everything observed about them.
/// Parallel vectors all have length G; rewards/advantages are only present
/// for decoded members.
struct TrajectoryGroup {
  TaskInstance instance;
  std::vector<LatentTrajectory> trajectories;
  std::vector<LatentTrajectory> noise;  // eta with z = mu + sigma*eta, per member
  std::vector<double> logp_current;     // nats
  std::vector<double> logp_old;         // nats
  std::vector<bool> decode_mask;
  std::vector<std::optional<std::string>> decoded;
  std::vector<std::optional<RewardRecord>> rewards;
  std::vector<std::optional<double>> advantages;

  int size() const { return int(trajectories.size()); }
  /// Throws ShapeError if parallel lists disagree or an advantage exists
  /// without its reward.
  void check() const;
};

enum class DecodeMode { full, selective };
enum class ClipScope { projection_only, all };

std::string to_string(DecodeMode m);
std::string to_string(ClipScope s);
DecodeMode decode_mode_from_string(std::string_view s);
ClipScope clip_scope_from_string(std::string_view s);

// ---------------------------------------------------------------------------
// Run configuration. Desk-scale defaults; paper-scale values (d=512, G=64,
// T=32, ...) remain valid inputs. The validated config is immutable for the
// run and serialized verbatim into run artifacts as config.resolved.json.
// ---------------------------------------------------------------------------
struct RunConfig {
  // Latent geometry and group sizes.
  int d = 32;                // latent dimension
  int G = 16;                // group size
  int K = 3;                 // decode budget (selective mode)
  int T = 4;                 // latent steps per trajectory
  int max_latent_steps = 32; // upper bound on T
  int embed_dim = 64;        // frozen query-embedding dimension

  // Reward and objective weights.
  double lambda = 0.5;   // format-reward weight
  double beta = 0.01;    // KL penalty
  double gamma = 0.1;    // contrastive weight
  double eps_clip = 0.2; // surrogate clip radius, in (0,1)
  double eps_std = 1e-8; // advantage denominator stabilizer

  // Optimization.
  double lr_assistant = 0.004;
  double lr_projection = 0.012;
  double max_grad_norm = 1.0;
  std::string clip_scope = "projection_only";  // or "all"
  int updates_per_batch = 4;

  // Loop control.
  std::string decode_mode = "full";  // or "selective"
  uint64_t seed = 42;
  int batch_instances = 1;
  int iterations = 500;
  int checkpoint_interval = 100;
  int n_eval = 200;            // final evaluation size (0 = skip)
  int scorer_warmup_iters = 50;
  int scorer_fit_steps = 25;

  // Task.
  std::string task_kind = "mod_arith";
  int modulus = 16;
  int chain_length = 1;

  // Ablation / instrumentation switches.
  bool trainable_decoder = false;  // ablation only: unfreezes the readout
  bool timing = false;             // real wall_ms in metrics (breaks bitwise log reproducibility)
  int workers = 1;

  bool operator==(const RunConfig&) const = default;
};

/// Returns the config unchanged iff every invariant holds; otherwise throws
/// ConfigError naming the first violated constraint.
RunConfig validate_config(const RunConfig& raw);

/// Ordered list of keys accepted by the config file and by CLI overrides.
const std::vector<std::string>& config_keys();

/// Set one field from its string form. Throws ConfigError on unknown key or
/// unparsable value.
void apply_config_override(RunConfig& cfg, const std::string& key,
                           const std::string& value);

/// JSON round trip. Field order in the output is fixed (declaration order);
/// parsing rejects unknown keys.
std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json_text(const std::string& text);
RunConfig config_from_json_file(const std::string& path);

// ---------------------------------------------------------------------------
// Small shared utilities.
// ---------------------------------------------------------------------------

/// Runs fn(i) for i in [0, n). With workers > 1 the range is chunked across
/// threads; every index is written exactly once so results are identical to
/// the serial order.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double l2_norm(const std::vector<double>& v);

}  // namespace dlr
