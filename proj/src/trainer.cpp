#include "trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "rewards.hpp"

namespace dlr {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Checkpoint container
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'D', 'L', 'R', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kVersion = 1;

struct NamedArray {
  std::string name;
  std::vector<uint64_t> dims;
  std::vector<double> data;
};

void put_bytes(std::string& out, const void* p, size_t n) {
  out.append(static_cast<const char*>(p), n);
}

template <typename T>
void put_pod(std::string& out, T v) {
  put_bytes(out, &v, sizeof(v));
}

void put_array(std::string& out, const std::string& name,
               std::vector<uint64_t> dims, const std::vector<double>& data) {
  uint64_t count = 1;
  for (uint64_t d : dims) count *= d;
  if (count != data.size()) {
    throw ShapeError("array '" + name + "' dims do not match data size");
  }
  put_pod<uint32_t>(out, uint32_t(name.size()));
  put_bytes(out, name.data(), name.size());
  put_pod<uint32_t>(out, uint32_t(dims.size()));
  for (uint64_t d : dims) put_pod<uint64_t>(out, d);
  put_bytes(out, data.data(), data.size() * sizeof(double));
}

class Reader {
 public:
  explicit Reader(const std::string& buf) : buf_(buf) {}

  template <typename T>
  T pod() {
    if (pos_ + sizeof(T) > buf_.size()) {
      throw ChecksumError("checkpoint truncated");
    }
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string bytes(size_t n) {
    if (pos_ + n > buf_.size()) throw ChecksumError("checkpoint truncated");
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void doubles(size_t n, std::vector<double>& out) {
    if (pos_ + n * sizeof(double) > buf_.size()) {
      throw ChecksumError("checkpoint truncated");
    }
    out.resize(n);
    std::memcpy(out.data(), buf_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }

 private:
  const std::string& buf_;
  size_t pos_ = 0;
};

std::vector<std::pair<std::string, std::pair<std::vector<uint64_t>,
                                             const std::vector<double>*>>>
checkpoint_layout(const Checkpoint& ck, std::vector<std::vector<double>>& tmp) {
  const auto& p = ck.params;
  const uint64_t H = uint64_t(p.hidden_dim);
  const uint64_t E = uint64_t(p.embed_dim);
  const uint64_t head = uint64_t(2) * p.latent_steps * p.latent_dim;
  const uint64_t M = uint64_t(ck.decoder.num_classes);
  const uint64_t d = uint64_t(ck.decoder.latent_dim);

  tmp.clear();
  tmp.push_back({p.sigma_min, p.sigma_max});
  tmp.push_back({double(ck.opt_state.t)});
  tmp.push_back({ck.scorer.b});
  tmp.push_back({double(ck.decoder.format_gate_index)});
  const auto& sigma_bounds = tmp[0];
  const auto& opt_t = tmp[1];
  const auto& scorer_b = tmp[2];
  const auto& gate = tmp[3];

  return {
      {"assistant/w1", {{H, E}, &p.w1}},
      {"assistant/b1", {{H}, &p.b1}},
      {"assistant/w2", {{H, H}, &p.w2}},
      {"assistant/b2", {{H}, &p.b2}},
      {"proj/w", {{head, H}, &p.wp}},
      {"proj/b", {{head}, &p.bp}},
      {"policy/sigma_bounds", {{2}, &sigma_bounds}},
      {"opt/t", {{1}, &opt_t}},
      {"opt/m/w1", {{H, E}, &ck.opt_state.m.w1}},
      {"opt/m/b1", {{H}, &ck.opt_state.m.b1}},
      {"opt/m/w2", {{H, H}, &ck.opt_state.m.w2}},
      {"opt/m/b2", {{H}, &ck.opt_state.m.b2}},
      {"opt/m/wp", {{head, H}, &ck.opt_state.m.wp}},
      {"opt/m/bp", {{head}, &ck.opt_state.m.bp}},
      {"opt/v/w1", {{H, E}, &ck.opt_state.v.w1}},
      {"opt/v/b1", {{H}, &ck.opt_state.v.b1}},
      {"opt/v/w2", {{H, H}, &ck.opt_state.v.w2}},
      {"opt/v/b2", {{H}, &ck.opt_state.v.b2}},
      {"opt/v/wp", {{head, H}, &ck.opt_state.v.wp}},
      {"opt/v/bp", {{head}, &ck.opt_state.v.bp}},
      {"scorer/w", {{d}, &ck.scorer.w}},
      {"scorer/b", {{1}, &scorer_b}},
      {"frozen/readout_w", {{M, d}, &ck.decoder.readout_w}},
      {"frozen/readout_b", {{M}, &ck.decoder.readout_b}},
      {"frozen/gate_index", {{1}, &gate}},
  };
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::string buf;
  put_bytes(buf, kMagic, sizeof(kMagic));
  put_pod<uint32_t>(buf, kVersion);

  const std::string cfg_json = config_to_json(ck.config);
  put_pod<uint64_t>(buf, cfg_json.size());
  put_bytes(buf, cfg_json.data(), cfg_json.size());

  put_pod<uint64_t>(buf, ck.decoder.parameter_checksum);

  std::vector<std::vector<double>> tmp;
  const auto layout = checkpoint_layout(ck, tmp);
  put_pod<uint32_t>(buf, uint32_t(layout.size()));
  for (const auto& [name, spec] : layout) {
    put_array(buf, name, spec.first, *spec.second);
  }

  put_pod<uint64_t>(buf, fnv1a64_bytes(buf.data(), buf.size(),
                                       14695981039346656037ULL));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint file '" + path + "' for writing");
  out.write(buf.data(), std::streamsize(buf.size()));
  if (!out) throw IoError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();

  if (buf.size() < sizeof(kMagic) + sizeof(uint32_t) + sizeof(uint64_t)) {
    throw ChecksumError("checkpoint truncated");
  }
  const uint64_t stored_digest =
      [&] {
        uint64_t v;
        std::memcpy(&v, buf.data() + buf.size() - sizeof(uint64_t), sizeof(v));
        return v;
      }();
  const uint64_t digest = fnv1a64_bytes(buf.data(), buf.size() - sizeof(uint64_t),
                                        14695981039346656037ULL);
  if (digest != stored_digest) {
    throw ChecksumError("checkpoint digest mismatch (corrupt or truncated)");
  }

  Reader r(buf);
  if (r.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw ChecksumError("not a checkpoint file");
  }
  if (r.pod<uint32_t>() != kVersion) {
    throw ChecksumError("unsupported checkpoint version");
  }

  const uint64_t cfg_len = r.pod<uint64_t>();
  Checkpoint ck;
  ck.config = config_from_json_text(r.bytes(cfg_len));
  const uint64_t frozen_digest = r.pod<uint64_t>();

  const uint32_t n_arrays = r.pod<uint32_t>();
  std::vector<NamedArray> arrays(n_arrays);
  for (auto& a : arrays) {
    a.name = r.bytes(r.pod<uint32_t>());
    const uint32_t ndims = r.pod<uint32_t>();
    uint64_t count = 1;
    a.dims.resize(ndims);
    for (auto& dd : a.dims) {
      dd = r.pod<uint64_t>();
      count *= dd;
    }
    r.doubles(count, a.data);
  }

  const auto find = [&](const std::string& name) -> NamedArray& {
    for (auto& a : arrays) {
      if (a.name == name) return a;
    }
    throw ChecksumError("checkpoint missing array '" + name + "'");
  };

  const RunConfig& c = ck.config;
  auto& w1 = find("assistant/w1");
  if (w1.dims.size() != 2 || int(w1.dims[1]) != c.embed_dim) {
    throw ShapeError("checkpoint assistant shape does not match config");
  }
  const int hidden = int(w1.dims[0]);
  const size_t head = size_t(2) * c.T * c.d;

  PolicyParams& p = ck.params;
  p.embed_dim = c.embed_dim;
  p.hidden_dim = hidden;
  p.latent_steps = c.T;
  p.latent_dim = c.d;
  p.w1 = std::move(w1.data);
  p.b1 = std::move(find("assistant/b1").data);
  p.w2 = std::move(find("assistant/w2").data);
  p.b2 = std::move(find("assistant/b2").data);
  p.wp = std::move(find("proj/w").data);
  p.bp = std::move(find("proj/b").data);
  const auto& bounds = find("policy/sigma_bounds").data;
  p.sigma_min = bounds.at(0);
  p.sigma_max = bounds.at(1);
  if (p.bp.size() != head || p.wp.size() != head * size_t(hidden)) {
    throw ShapeError("checkpoint projection shape does not match config d/T");
  }

  ck.opt_state.t = int64_t(find("opt/t").data.at(0));
  ck.opt_state.m.w1 = std::move(find("opt/m/w1").data);
  ck.opt_state.m.b1 = std::move(find("opt/m/b1").data);
  ck.opt_state.m.w2 = std::move(find("opt/m/w2").data);
  ck.opt_state.m.b2 = std::move(find("opt/m/b2").data);
  ck.opt_state.m.wp = std::move(find("opt/m/wp").data);
  ck.opt_state.m.bp = std::move(find("opt/m/bp").data);
  ck.opt_state.v.w1 = std::move(find("opt/v/w1").data);
  ck.opt_state.v.b1 = std::move(find("opt/v/b1").data);
  ck.opt_state.v.w2 = std::move(find("opt/v/w2").data);
  ck.opt_state.v.b2 = std::move(find("opt/v/b2").data);
  ck.opt_state.v.wp = std::move(find("opt/v/wp").data);
  ck.opt_state.v.bp = std::move(find("opt/v/bp").data);

  ck.scorer.w = std::move(find("scorer/w").data);
  ck.scorer.b = find("scorer/b").data.at(0);
  if (int(ck.scorer.w.size()) != c.d) {
    throw ShapeError("checkpoint scorer shape does not match config d");
  }

  auto& rw = find("frozen/readout_w");
  if (rw.dims.size() != 2 || int(rw.dims[1]) != c.d ||
      int(rw.dims[0]) != c.modulus) {
    throw ShapeError("checkpoint frozen readout does not match config");
  }
  FrozenDecoder& dec = ck.decoder;
  dec.latent_dim = c.d;
  dec.num_classes = c.modulus;
  dec.format_gate_index = int(find("frozen/gate_index").data.at(0));
  dec.readout_w = std::move(rw.data);
  dec.readout_b = std::move(find("frozen/readout_b").data);
  dec.parameter_checksum = frozen_digest;
  if (dec.compute_checksum() != frozen_digest) {
    throw ChecksumError("frozen decoder parameters do not match their checksum");
  }
  return ck;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

struct ScorerBuffer {
  // FIFO of (pooled trajectory, observed total reward) pairs.
  std::vector<std::pair<std::vector<double>, double>> pairs;
  size_t cap = 4096;

  void push(std::vector<double> v, double r) {
    if (pairs.size() >= cap) pairs.erase(pairs.begin());
    pairs.emplace_back(std::move(v), r);
  }
};

int decoder_argmax(const FrozenDecoder& dec, const std::vector<double>& pooled) {
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < dec.num_classes; ++c) {
    double s = dec.readout_b[c];
    const double* row = &dec.readout_w[size_t(c) * dec.latent_dim];
    for (int j = 0; j < dec.latent_dim; ++j) s += row[j] * pooled[j];
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

// Ablation-only policy-gradient step on the (normally frozen) readout:
// advantage-weighted cross-entropy toward each decoded class.
void update_trainable_decoder(
    FrozenDecoder& dec, double lr,
    const std::vector<std::tuple<std::vector<double>, int, double>>& events) {
  for (const auto& [v, cls, adv] : events) {
    std::vector<double> logits(dec.num_classes);
    double mx = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < dec.num_classes; ++c) {
      double s = dec.readout_b[c];
      const double* row = &dec.readout_w[size_t(c) * dec.latent_dim];
      for (int j = 0; j < dec.latent_dim; ++j) s += row[j] * v[j];
      logits[c] = s;
      mx = std::max(mx, s);
    }
    double z = 0.0;
    for (double s : logits) z += std::exp(s - mx);
    for (int c = 0; c < dec.num_classes; ++c) {
      const double p = std::exp(logits[c] - mx) / z;
      const double coeff = lr * adv * ((c == cls ? 1.0 : 0.0) - p);
      dec.readout_b[c] += coeff;
      double* row = &dec.readout_w[size_t(c) * dec.latent_dim];
      for (int j = 0; j < dec.latent_dim; ++j) row[j] += coeff * v[j];
    }
  }
}

}  // namespace

double mean_pairwise_cosine(const TrajectoryGroup& group) {
  const int g = group.size();
  if (g < 2) return 0.0;
  std::vector<std::vector<double>> v(g);
  for (int i = 0; i < g; ++i) v[i] = pool_trajectory(group.trajectories[i]);
  double sum = 0.0;
  int pairs = 0;
  for (int i = 0; i < g; ++i) {
    for (int j = i + 1; j < g; ++j) {
      sum += dot(v[i], v[j]);
      ++pairs;
    }
  }
  return sum / double(pairs);
}

RunArtifacts train(const RunConfig& raw_config, const std::string& out_dir) {
  const RunConfig cfg = validate_config(raw_config);
  const TaskSpec spec = task_spec_from(cfg);

  fs::create_directories(out_dir);

  FrozenDecoder decoder =
      FrozenDecoder::init(cfg.d, cfg.modulus, split_seed(cfg.seed, "decoder"));
  PolicyParams params = PolicyParams::init(
      cfg.embed_dim, kHiddenDim, cfg.T, cfg.d, split_seed(cfg.seed, "policy"));
  const PolicySnapshot reference =
      PolicySnapshot::capture(params, PolicySnapshot::Tag::reference);
  LatentScorer scorer = LatentScorer::zeros(cfg.d);
  AdamWState opt = AdamWState::zeros_like(params);
  ScorerBuffer buffer;

  RunArtifacts art;
  art.run_dir = out_dir;
  art.config = cfg;
  art.decoder_checksum_start = decoder.parameter_checksum;

  {
    std::ofstream cf(out_dir + "/config.resolved.json", std::ios::trunc);
    if (!cf) throw IoError("cannot write config.resolved.json in '" + out_dir + "'");
    cf << config_to_json(cfg);
  }

  const auto save = [&](int iter) {
    const std::string path = out_dir + "/ckpt_" + std::to_string(iter) + ".bin";
    save_checkpoint(path, Checkpoint{cfg, params, scorer, opt, decoder});
    art.checkpoint_paths.push_back(path);
  };
  save(0);

  const DecodeMode mode = decode_mode_from_string(cfg.decode_mode);
  const ClipScope scope = clip_scope_from_string(cfg.clip_scope);

  std::ofstream metrics;
  if (cfg.iterations > 0) {
    art.metrics_path = out_dir + "/metrics.jsonl";
    metrics.open(art.metrics_path, std::ios::trunc);
    if (!metrics) throw IoError("cannot write metrics.jsonl in '" + out_dir + "'");
  }

  int nan_streak = 0;
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    const PolicySnapshot old_snap =
        PolicySnapshot::capture(params, PolicySnapshot::Tag::old_policy);

    int64_t main_forwards = 0;
    const int64_t assistant_forwards = int64_t(cfg.G) * cfg.batch_instances;
    double reward_sum = 0.0;
    int reward_count = 0;
    int correct_count = 0;
    std::vector<TrajectoryGroup> groups;
    groups.reserve(cfg.batch_instances);
    std::vector<std::tuple<std::vector<double>, int, double>> decoder_events;

    const bool filtering = mode == DecodeMode::selective &&
                           iter > cfg.scorer_warmup_iters;
    if (filtering && !buffer.pairs.empty() && cfg.scorer_fit_steps > 0) {
      scorer = fit_scorer(scorer, buffer.pairs, cfg.scorer_fit_steps);
    }

    for (int b = 0; b < cfg.batch_instances; ++b) {
      const TaskInstance inst =
          generate_instance(spec, split_seed(cfg.seed, "instance",
                                             uint64_t(iter), uint64_t(b)));
      TrajectoryGroup group = sample_group(
          params, inst, cfg.G,
          split_seed(cfg.seed, "sample", uint64_t(iter), uint64_t(b)));

      group.decode_mask = filtering ? prescreen_topk(scorer, group, cfg.K)
                                    : std::vector<bool>(cfg.G, true);

      std::vector<int> decode_ids;
      for (int i = 0; i < cfg.G; ++i) {
        if (group.decode_mask[i]) decode_ids.push_back(i);
      }
      parallel_for(int(decode_ids.size()), cfg.workers, [&](int k) {
        const int i = decode_ids[k];
        group.decoded[i] = decode(decoder, group.trajectories[i], inst);
      });
      main_forwards += int64_t(decode_ids.size());

      std::vector<double> totals;
      for (int i : decode_ids) {
        const RewardRecord rec =
            make_reward_record(*group.decoded[i], inst.ground_truth, cfg.lambda);
        group.rewards[i] = rec;
        totals.push_back(rec.r_total);
        reward_sum += rec.r_total;
        ++reward_count;
        if (rec.r_corr > 0.0) ++correct_count;
      }
      if (totals.size() >= 2) {
        const std::vector<double> adv = group_advantages(totals, cfg.eps_std);
        for (size_t k = 0; k < decode_ids.size(); ++k) {
          group.advantages[decode_ids[k]] = adv[k];
        }
      } else {
        // A decode budget of one leaves no within-group baseline.
        for (int i : decode_ids) group.advantages[i] = 0.0;
      }

      for (size_t k = 0; k < decode_ids.size(); ++k) {
        const int i = decode_ids[k];
        std::vector<double> pooled = pool_trajectory(group.trajectories[i]);
        if (cfg.trainable_decoder) {
          decoder_events.emplace_back(pooled, decoder_argmax(decoder, pooled),
                                      *group.advantages[i]);
        }
        buffer.push(std::move(pooled), group.rewards[i]->r_total);
      }
      groups.push_back(std::move(group));
    }

    if (cfg.trainable_decoder) {
      update_trainable_decoder(decoder, cfg.lr_projection, decoder_events);
    }

    LossBreakdown acc;
    bool aborted_this_iter = false;
    for (int u = 0; u < cfg.updates_per_batch; ++u) {
      try {
        Gradients grads = Gradients::zeros_like(params);
        LossBreakdown bd;
        for (const auto& group : groups) {
          ObjectiveResult res =
              compute_gradients(params, group, old_snap, reference, cfg);
          grads.accumulate(res.grads, 1.0 / double(groups.size()));
          bd.l_grpo += res.breakdown.l_grpo / double(groups.size());
          bd.l_cl += res.breakdown.l_cl / double(groups.size());
          bd.l_total += res.breakdown.l_total / double(groups.size());
          bd.kl_value += res.breakdown.kl_value / double(groups.size());
          bd.clip_fraction += res.breakdown.clip_fraction / double(groups.size());
        }
        if (!std::isfinite(bd.l_total)) {
          throw NumericalError("non-finite loss");
        }
        nan_streak = 0;
        clip_gradients_l2(grads, cfg.max_grad_norm, scope);
        adamw_step(params, grads, opt, cfg.lr_assistant, cfg.lr_projection);
        acc.l_grpo += bd.l_grpo / cfg.updates_per_batch;
        acc.l_cl += bd.l_cl / cfg.updates_per_batch;
        acc.l_total += bd.l_total / cfg.updates_per_batch;
        acc.kl_value += bd.kl_value / cfg.updates_per_batch;
        acc.clip_fraction += bd.clip_fraction / cfg.updates_per_batch;
      } catch (const NumericalError& e) {
        ++nan_streak;
        if (nan_streak >= 2) {
          throw NumericalError("aborting at iteration " + std::to_string(iter) +
                               ": " + e.what() + " (twice in a row)");
        }
        aborted_this_iter = true;
        break;  // skip the remaining updates for this batch
      }
    }
    (void)aborted_this_iter;

    const double wall_ms =
        cfg.timing ? std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count()
                   : 0.0;

    ordered_json row;
    row["iter"] = iter;
    row["mean_reward"] = reward_count ? reward_sum / reward_count : 0.0;
    row["pass_at_1_batch"] =
        reward_count ? double(correct_count) / reward_count : 0.0;
    row["l_grpo"] = acc.l_grpo;
    row["l_cl"] = acc.l_cl;
    row["l_total"] = acc.l_total;
    row["kl_value"] = acc.kl_value;
    row["clip_fraction"] = acc.clip_fraction;
    row["assistant_forwards"] = assistant_forwards;
    row["main_forwards"] = main_forwards;
    row["wall_ms"] = wall_ms;
    metrics << row.dump() << "\n";
    metrics.flush();

    if (iter == cfg.iterations) {
      art.final_group_cosine = mean_pairwise_cosine(groups.front());
    }
    if (iter % cfg.checkpoint_interval == 0 || iter == cfg.iterations) {
      save(iter);
    }
  }

  art.decoder_checksum_end = decoder.compute_checksum();
  art.decoder_checksum_changed =
      art.decoder_checksum_end != art.decoder_checksum_start;
  if (art.decoder_checksum_changed && !cfg.trainable_decoder) {
    throw ChecksumError("frozen decoder parameters changed during training");
  }

  if (cfg.iterations > 0 && cfg.n_eval > 0) {
    const EvalReport rep =
        evaluate(Checkpoint{cfg, params, scorer, opt, decoder}, spec,
                 cfg.n_eval, split_seed(cfg.seed, "final_eval"));
    art.final_eval = rep;
    art.eval_path = out_dir + "/eval.json";
    ordered_json j;
    j["pass_at_1"] = rep.pass_at_1;
    j["format_valid_rate"] = rep.format_valid_rate;
    j["n_instances"] = rep.n_instances;
    std::ofstream ef(art.eval_path, std::ios::trunc);
    if (!ef) throw IoError("cannot write eval.json in '" + out_dir + "'");
    ef << j.dump(2) << "\n";
  }
  return art;
}

EvalReport evaluate(const Checkpoint& ck, const TaskSpec& spec,
                    int n_instances, uint64_t seed) {
  if (n_instances < 1) throw DomainError("empty evaluation");
  if (ck.decoder.compute_checksum() != ck.decoder.parameter_checksum) {
    throw ChecksumError("frozen decoder parameters do not match their checksum");
  }
  int correct = 0;
  int well_formed = 0;
  for (int i = 0; i < n_instances; ++i) {
    const TaskInstance inst =
        generate_instance(spec, split_seed(seed, "eval", uint64_t(i)));
    const TrajectoryDistribution dist = trajectory_distribution(ck.params, inst);
    LatentTrajectory traj;
    traj.steps = dist.steps;
    traj.dim = dist.dim;
    traj.data = dist.mu;  // deterministic evaluation at the mean
    const std::string text = decode(ck.decoder, traj, inst);
    if (verify_answer(text, inst.ground_truth)) ++correct;
    if (validate_structure(text)) ++well_formed;
  }
  EvalReport rep;
  rep.pass_at_1 = double(correct) / n_instances;
  rep.format_valid_rate = double(well_formed) / n_instances;
  rep.n_instances = n_instances;
  return rep;
}

EvalReport evaluate_checkpoint_file(const std::string& ckpt_path,
                                    int n_instances, uint64_t seed) {
  const Checkpoint ck = load_checkpoint(ckpt_path);
  return evaluate(ck, task_spec_from(ck.config), n_instances, seed);
}

}  // namespace dlr
