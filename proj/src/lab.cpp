#include "lab.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trainer.hpp"

namespace dlr {
namespace lab {

VarianceReport estimate_gradient_variance(EstimatorKind kind, int horizon,
                                          int n_samples, uint64_t seed) {
  if (horizon < 1) throw DomainError("horizon must be >= 1");
  if (n_samples < 100) throw DomainError("n_samples must be >= 100");

  // Fixed small synthetic policy: actions a_t ~ N(mu, kSigma^2 I) with a
  // shared mean parameter vector. The per-coordinate score is
  // sum_t (a_t - mu) / sigma^2, so its variance is steps / sigma^2.
  const double mu[kParamDim] = {0.3, -0.2};
  const int steps = kind == EstimatorKind::token_level ? horizon : kLatentSteps;
  const double inv_var = 1.0 / (kSigma * kSigma);

  std::vector<double> sum(kParamDim, 0.0);
  std::vector<double> sum_sq(kParamDim, 0.0);
  for (int s = 0; s < n_samples; ++s) {
    SplitRng rng(split_seed(seed, "variance_draw", uint64_t(s)));
    double g[kParamDim] = {0.0, 0.0};
    for (int t = 0; t < steps; ++t) {
      for (int c = 0; c < kParamDim; ++c) {
        const double a = mu[c] + kSigma * rng.normal();
        g[c] += (a - mu[c]) * inv_var;  // unit reward times the score
      }
    }
    for (int c = 0; c < kParamDim; ++c) {
      sum[c] += g[c];
      sum_sq[c] += g[c] * g[c];
    }
  }

  VarianceReport rep;
  rep.kind = kind == EstimatorKind::token_level ? "token_level" : "latent_level";
  rep.horizon = horizon;
  rep.n_samples = n_samples;
  double total = 0.0;
  double mx = 0.0;
  for (int c = 0; c < kParamDim; ++c) {
    const double mean = sum[c] / n_samples;
    const double var =
        (sum_sq[c] - n_samples * mean * mean) / double(n_samples - 1);
    total += var;
    mx = std::max(mx, var);
  }
  rep.var_mean = total / kParamDim;
  rep.var_max = mx;
  return rep;
}

CostReport cost_report(double g, double k, double c_a, double c_m) {
  if (k > g) throw BudgetError("K must be <= G");
  if (k < 1e-12 || g < 1.0) throw BudgetError("need G >= 1 and K > 0");
  if (c_a <= 0.0 || c_m <= 0.0) throw DomainError("forward costs must be > 0");
  CostReport r;
  r.g = g;
  r.k = k;
  r.c_a = c_a;
  r.c_m = c_m;
  r.cost_full = g * (c_a + c_m);
  r.cost_dlr = g * c_a + k * c_m;
  r.main_forward_ratio = k / g;
  r.reduction_factor = g / k;
  return r;
}

AblationKind ablation_kind_from_string(std::string_view s) {
  if (s == "no_contrastive") return AblationKind::no_contrastive;
  if (s == "trainable_decoder") return AblationKind::trainable_decoder;
  throw ConfigError(
      "ablation kind must be 'no_contrastive' or 'trainable_decoder', got '" +
      std::string(s) + "'");
}

std::vector<AblationRow> run_ablation(const RunConfig& base, AblationKind kind,
                                      int n_seeds, const std::string& out_dir) {
  if (n_seeds < 1) throw DomainError("n_seeds must be >= 1");
  validate_config(base);
  std::filesystem::create_directories(out_dir);

  const std::string ablated_name = kind == AblationKind::no_contrastive
                                       ? "no_contrastive"
                                       : "trainable_decoder";
  std::vector<AblationRow> rows;
  for (int s = 0; s < n_seeds; ++s) {
    const uint64_t seed = base.seed + uint64_t(s);
    for (int arm = 0; arm < 2; ++arm) {
      RunConfig cfg = base;
      cfg.seed = seed;
      const bool is_base = arm == 0;
      if (!is_base) {
        if (kind == AblationKind::no_contrastive) {
          cfg.gamma = 0.0;
        } else {
          cfg.trainable_decoder = true;
        }
      }
      AblationRow row;
      row.arm = is_base ? "base" : ablated_name;
      row.seed = seed;
      const std::string run_dir =
          out_dir + "/" + row.arm + "_s" + std::to_string(seed);
      try {
        const RunArtifacts art = train(cfg, run_dir);
        row.ok = true;
        row.pass_at_1 = art.final_eval ? art.final_eval->pass_at_1 : 0.0;
        row.mean_pairwise_cosine = art.final_group_cosine;
        row.decoder_checksum_changed = art.decoder_checksum_changed;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }

  std::ofstream csv(out_dir + "/ablation.csv", std::ios::trunc);
  if (!csv) throw IoError("cannot write ablation.csv in '" + out_dir + "'");
  csv << ablation_csv(rows);
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "arm,seed,ok,pass_at_1,mean_pairwise_cosine,decoder_checksum_changed,error\n";
  for (const auto& r : rows) {
    out << r.arm << "," << r.seed << "," << (r.ok ? 1 : 0) << ","
        << r.pass_at_1 << "," << r.mean_pairwise_cosine << ","
        << (r.decoder_checksum_changed ? 1 : 0) << "," << r.error << "\n";
  }
  return out.str();
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string ablation_summary(AblationKind kind,
                             const std::vector<AblationRow>& rows) {
  std::vector<double> base_pass, abl_pass, base_cos, abl_cos;
  int base_changed = 0, abl_changed = 0;
  for (const auto& r : rows) {
    if (!r.ok) continue;
    if (r.arm == "base") {
      base_pass.push_back(r.pass_at_1);
      base_cos.push_back(r.mean_pairwise_cosine);
      base_changed += r.decoder_checksum_changed ? 1 : 0;
    } else {
      abl_pass.push_back(r.pass_at_1);
      abl_cos.push_back(r.mean_pairwise_cosine);
      abl_changed += r.decoder_checksum_changed ? 1 : 0;
    }
  }
  std::ostringstream out;
  const std::string name = kind == AblationKind::no_contrastive
                               ? "no_contrastive"
                               : "trainable_decoder";
  out << "ablation " << name << " over " << base_pass.size() << " seed(s)\n";
  out << "  arm=base             median pass@1=" << median(base_pass)
      << " median cosine=" << median(base_cos)
      << " checksum_changed=" << base_changed << "\n";
  out << "  arm=" << name
      << (kind == AblationKind::no_contrastive ? "      " : "")
      << " median pass@1=" << median(abl_pass)
      << " median cosine=" << median(abl_cos)
      << " checksum_changed=" << abl_changed << "\n";
  return out.str();
}

}  // namespace lab
}  // namespace dlr
