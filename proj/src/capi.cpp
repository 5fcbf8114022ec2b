#include "dlr/dlr.h"

#include <cstring>
#include <fstream>

#include "core.hpp"
#include "lab.hpp"
#include "tasks.hpp"
#include "trainer.hpp"

struct dlr_config {
  dlr::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
dlr_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DLR_OK;
  } catch (const dlr::ConfigError& e) {
    g_last_error = e.what();
    return DLR_ERR_CONFIG;
  } catch (const dlr::SpecError& e) {
    g_last_error = e.what();
    return DLR_ERR_CONFIG;
  } catch (const dlr::DomainError& e) {
    g_last_error = e.what();
    return DLR_ERR_CONFIG;
  } catch (const dlr::GroupError& e) {
    g_last_error = e.what();
    return DLR_ERR_CONFIG;
  } catch (const dlr::BudgetError& e) {
    g_last_error = e.what();
    return DLR_ERR_CONFIG;
  } catch (const dlr::NormError& e) {
    g_last_error = e.what();
    return DLR_ERR_CONFIG;
  } catch (const dlr::NumericalError& e) {
    g_last_error = e.what();
    return DLR_ERR_NUMERIC;
  } catch (const dlr::ChecksumError& e) {
    g_last_error = e.what();
    return DLR_ERR_CHECKSUM;
  } catch (const dlr::IoError& e) {
    g_last_error = e.what();
    return DLR_ERR_IO;
  } catch (const dlr::ShapeError& e) {
    g_last_error = e.what();
    return DLR_ERR_SHAPE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DLR_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DLR_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void fill_report(dlr_eval_report* out, const dlr::EvalReport& rep) {
  out->pass_at_1 = rep.pass_at_1;
  out->format_valid_rate = rep.format_valid_rate;
  out->n_instances = rep.n_instances;
}

}  // namespace

extern "C" {

const char* dlr_version_string(void) { return "0.1.0"; }

const char* dlr_status_name(dlr_status status) {
  switch (status) {
    case DLR_OK: return "ok";
    case DLR_ERR_INTERNAL: return "internal";
    case DLR_ERR_CONFIG: return "config";
    case DLR_ERR_NUMERIC: return "numeric";
    case DLR_ERR_CHECKSUM: return "checksum";
    case DLR_ERR_IO: return "io";
    case DLR_ERR_SHAPE: return "shape";
  }
  return "unknown";
}

const char* dlr_last_error(void) { return g_last_error.c_str(); }

void dlr_string_free(char* s) { delete[] s; }

dlr_config* dlr_config_create(void) { return new dlr_config{}; }

void dlr_config_free(dlr_config* cfg) { delete cfg; }

dlr_status dlr_config_load_file(dlr_config* cfg, const char* path) {
  return guarded([&] {
    if (!cfg || !path) throw dlr::ConfigError("null argument");
    cfg->cfg = dlr::config_from_json_file(path);
  });
}

dlr_status dlr_config_set(dlr_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    if (!cfg || !key || !value) throw dlr::ConfigError("null argument");
    dlr::apply_config_override(cfg->cfg, key, value);
  });
}

dlr_status dlr_config_validate(const dlr_config* cfg) {
  return guarded([&] {
    if (!cfg) throw dlr::ConfigError("null config");
    dlr::validate_config(cfg->cfg);
  });
}

dlr_status dlr_config_to_json(const dlr_config* cfg, char** json_out) {
  return guarded([&] {
    if (!cfg || !json_out) throw dlr::ConfigError("null argument");
    *json_out = dup_string(dlr::config_to_json(cfg->cfg));
  });
}

int dlr_config_key_count(void) { return int(dlr::config_keys().size()); }

const char* dlr_config_key(int index) {
  const auto& keys = dlr::config_keys();
  if (index < 0 || size_t(index) >= keys.size()) return nullptr;
  return keys[size_t(index)].c_str();
}

dlr_status dlr_train(const dlr_config* cfg, const char* out_dir,
                     dlr_eval_report* final_eval) {
  return guarded([&] {
    if (!cfg || !out_dir) throw dlr::ConfigError("null argument");
    const dlr::RunArtifacts art = dlr::train(cfg->cfg, out_dir);
    if (final_eval) {
      if (art.final_eval) {
        fill_report(final_eval, *art.final_eval);
      } else {
        *final_eval = dlr_eval_report{0.0, 0.0, 0};
      }
    }
  });
}

dlr_status dlr_evaluate(const char* ckpt_path, int n_instances, uint64_t seed,
                        dlr_eval_report* report) {
  return guarded([&] {
    if (!ckpt_path || !report) throw dlr::ConfigError("null argument");
    fill_report(report,
                dlr::evaluate_checkpoint_file(ckpt_path, n_instances, seed));
  });
}

dlr_status dlr_export_instances(const dlr_config* cfg, int n, uint64_t seed,
                                const char* path) {
  return guarded([&] {
    if (!cfg || !path) throw dlr::ConfigError("null argument");
    if (n < 1) throw dlr::DomainError("n must be >= 1");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw dlr::IoError(std::string("cannot open '") + path + "'");
    dlr::export_instances_jsonl(dlr::task_spec_from(cfg->cfg), n, seed, out);
  });
}

dlr_status dlr_cost_model(double g, double k, double c_a, double c_m,
                           dlr_cost_report* report) {
  return guarded([&] {
    if (!report) throw dlr::ConfigError("null report");
    const dlr::lab::CostReport r = dlr::lab::cost_report(g, k, c_a, c_m);
    report->g = r.g;
    report->k = r.k;
    report->c_a = r.c_a;
    report->c_m = r.c_m;
    report->cost_full = r.cost_full;
    report->cost_dlr = r.cost_dlr;
    report->main_forward_ratio = r.main_forward_ratio;
    report->reduction_factor = r.reduction_factor;
  });
}

dlr_status dlr_variance_study(dlr_estimator_kind kind, int horizon,
                               int n_samples, uint64_t seed,
                               dlr_variance_report* report) {
  return guarded([&] {
    if (!report) throw dlr::ConfigError("null report");
    const auto k = kind == DLR_ESTIMATOR_TOKEN_LEVEL
                       ? dlr::lab::EstimatorKind::token_level
                       : dlr::lab::EstimatorKind::latent_level;
    const dlr::lab::VarianceReport r =
        dlr::lab::estimate_gradient_variance(k, horizon, n_samples, seed);
    report->horizon = r.horizon;
    report->n_samples = r.n_samples;
    report->var_mean = r.var_mean;
    report->var_max = r.var_max;
  });
}

dlr_status dlr_ablate(const dlr_config* cfg, const char* kind, int n_seeds,
                      const char* out_dir, char** summary_out) {
  return guarded([&] {
    if (!cfg || !kind || !out_dir) throw dlr::ConfigError("null argument");
    const auto k = dlr::lab::ablation_kind_from_string(kind);
    const auto rows = dlr::lab::run_ablation(cfg->cfg, k, n_seeds, out_dir);
    if (summary_out) {
      *summary_out = dup_string(dlr::lab::ablation_summary(k, rows));
    }
  });
}

}  // extern "C"
