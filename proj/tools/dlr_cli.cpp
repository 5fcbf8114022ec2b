// Command-line front end. Links the shared dlr library through its public
// C API only; all domain logic lives behind that boundary.

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dlr/dlr.h"

namespace {

int exit_code_for(dlr_status s) {
  switch (s) {
    case DLR_OK: return 0;
    case DLR_ERR_CONFIG:
    case DLR_ERR_IO:
    case DLR_ERR_SHAPE: return 2;
    case DLR_ERR_NUMERIC: return 3;
    case DLR_ERR_CHECKSUM: return 4;
    case DLR_ERR_INTERNAL: return 1;
  }
  return 1;
}

int fail(dlr_status s) {
  std::fprintf(stderr, "error (%s): %s\n", dlr_status_name(s), dlr_last_error());
  return exit_code_for(s);
}

std::string default_out_dir() {
  const char* root = std::getenv("DLR_RUN_DIR");
  std::string base = root && *root ? root : "./runs";
  char stamp[32];
  std::time_t now = std::time(nullptr);
  std::tm tm_buf{};
  localtime_r(&now, &tm_buf);
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm_buf);
  return base + "/" + stamp;
}

struct ConfigHandle {
  dlr_config* ptr = dlr_config_create();
  ~ConfigHandle() { dlr_config_free(ptr); }
};

// Registers one CLI option per config field so every field is overridable
// by a flag of the same name.
void add_config_flags(CLI::App* cmd, std::map<std::string, std::string>& vals) {
  for (int i = 0; i < dlr_config_key_count(); ++i) {
    const std::string key = dlr_config_key(i);
    std::string flags = "--" + key;
    if (key == "decode_mode") flags += ",--decode-mode";
    cmd->add_option(flags, vals[key]);
  }
}

int apply_config(const ConfigHandle& cfg, const std::string& config_path,
                 CLI::App* cmd, const std::map<std::string, std::string>& vals) {
  if (!config_path.empty()) {
    if (dlr_status s = dlr_config_load_file(cfg.ptr, config_path.c_str());
        s != DLR_OK) {
      return fail(s);
    }
  }
  for (const auto& [key, value] : vals) {
    const std::string flag = "--" + key;
    if (cmd->count(flag) == 0) continue;
    if (dlr_status s = dlr_config_set(cfg.ptr, key.c_str(), value.c_str());
        s != DLR_OK) {
      return fail(s);
    }
  }
  if (dlr_status s = dlr_config_validate(cfg.ptr); s != DLR_OK) {
    return fail(s);
  }
  return 0;
}

std::vector<int> parse_horizons(const std::string& csv) {
  std::vector<int> out;
  size_t pos = 0;
  while (pos < csv.size()) {
    const size_t comma = csv.find(',', pos);
    const std::string tok =
        csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
    out.push_back(std::stoi(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DLR: latent-space group-relative policy optimization"};
  app.require_subcommand(1);

  // --- train ---
  auto* train_cmd = app.add_subcommand("train", "run the training loop");
  std::string train_config_path, train_out;
  train_cmd->add_option("--config", train_config_path, "config JSON file");
  train_cmd->add_option("--out", train_out, "run directory");
  std::map<std::string, std::string> train_vals;
  add_config_flags(train_cmd, train_vals);

  // --- eval ---
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_ckpt;
  int eval_n = 0;
  uint64_t eval_seed = 7;
  eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--n", eval_n, "number of instances")->required();
  eval_cmd->add_option("--seed", eval_seed, "evaluation seed");

  // --- variance-lab ---
  auto* var_cmd =
      app.add_subcommand("variance-lab", "gradient-variance scaling study");
  std::string var_horizons = "4,8,16,32";
  int var_samples = 10000;
  uint64_t var_seed = 42;
  std::string var_out;
  var_cmd->add_option("--horizons", var_horizons, "comma-separated horizons");
  var_cmd->add_option("--samples", var_samples, "Monte-Carlo draws");
  var_cmd->add_option("--seed", var_seed, "seed");
  var_cmd->add_option("--out", var_out, "output directory for variance.csv");

  // --- cost-report ---
  auto* cost_cmd =
      app.add_subcommand("cost-report", "selective-decoding cost model");
  double cost_g = 0, cost_k = 0, cost_ca = 1.0, cost_cm = 5.4;
  cost_cmd->add_option("--G", cost_g, "group size")->required();
  cost_cmd->add_option("--K", cost_k, "decode budget")->required();
  cost_cmd->add_option("--ca", cost_ca, "assistant forward cost");
  cost_cmd->add_option("--cm", cost_cm, "main-model forward cost");

  // --- ablate ---
  auto* abl_cmd = app.add_subcommand("ablate", "paired ablation study");
  std::string abl_config_path, abl_kind, abl_out;
  int abl_seeds = 1;
  abl_cmd->add_option("--config", abl_config_path, "config JSON file");
  abl_cmd->add_option("--kind", abl_kind,
                      "no_contrastive | trainable_decoder")->required();
  abl_cmd->add_option("--seeds", abl_seeds, "number of matched seeds");
  abl_cmd->add_option("--out", abl_out, "output directory");
  std::map<std::string, std::string> abl_vals;
  add_config_flags(abl_cmd, abl_vals);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (train_cmd->parsed()) {
    ConfigHandle cfg;
    if (int rc = apply_config(cfg, train_config_path, train_cmd, train_vals))
      return rc;
    const std::string out = train_out.empty() ? default_out_dir() : train_out;
    dlr_eval_report rep{};
    if (dlr_status s = dlr_train(cfg.ptr, out.c_str(), &rep); s != DLR_OK) {
      return fail(s);
    }
    std::printf("run_dir %s\n", out.c_str());
    if (rep.n_instances > 0) {
      std::printf("final_eval pass_at_1=%.4f format_valid_rate=%.4f n=%d\n",
                  rep.pass_at_1, rep.format_valid_rate, rep.n_instances);
    }
    return 0;
  }

  if (eval_cmd->parsed()) {
    dlr_eval_report rep{};
    if (dlr_status s = dlr_evaluate(eval_ckpt.c_str(), eval_n, eval_seed, &rep);
        s != DLR_OK) {
      return fail(s);
    }
    std::printf("pass_at_1=%.4f format_valid_rate=%.4f n=%d\n", rep.pass_at_1,
                rep.format_valid_rate, rep.n_instances);
    return 0;
  }

  if (var_cmd->parsed()) {
    std::vector<int> horizons;
    try {
      horizons = parse_horizons(var_horizons);
    } catch (const std::exception&) {
      std::fprintf(stderr, "error: cannot parse --horizons '%s'\n",
                   var_horizons.c_str());
      return 2;
    }
    const std::string out = var_out.empty() ? default_out_dir() : var_out;
    std::filesystem::create_directories(out);
    std::ofstream csv(out + "/variance.csv", std::ios::trunc);
    if (!csv) {
      std::fprintf(stderr, "error: cannot write %s/variance.csv\n", out.c_str());
      return 2;
    }
    csv << "kind,horizon,n_samples,var_mean,var_max\n";
    for (int kind = 0; kind < 2; ++kind) {
      const char* name = kind == 0 ? "token_level" : "latent_level";
      for (int L : horizons) {
        dlr_variance_report rep{};
        if (dlr_status s = dlr_variance_study(
                dlr_estimator_kind(kind), L, var_samples, var_seed, &rep);
            s != DLR_OK) {
          return fail(s);
        }
        csv << name << "," << rep.horizon << "," << rep.n_samples << ","
            << rep.var_mean << "," << rep.var_max << "\n";
        std::printf("%-12s L=%-3d var_mean=%.6f var_max=%.6f\n", name, L,
                    rep.var_mean, rep.var_max);
      }
    }
    std::printf("csv %s/variance.csv\n", out.c_str());
    return 0;
  }

  if (cost_cmd->parsed()) {
    dlr_cost_report rep{};
    if (dlr_status s = dlr_cost_model(cost_g, cost_k, cost_ca, cost_cm, &rep);
        s != DLR_OK) {
      return fail(s);
    }
    std::printf("cost_full=%.6g cost_dlr=%.6g\n", rep.cost_full, rep.cost_dlr);
    std::printf("main_forward_ratio=%.6g\n", rep.main_forward_ratio);
    std::printf("reduction_factor=%.2fx\n", rep.reduction_factor);
    return 0;
  }

  if (abl_cmd->parsed()) {
    ConfigHandle cfg;
    if (int rc = apply_config(cfg, abl_config_path, abl_cmd, abl_vals))
      return rc;
    const std::string out = abl_out.empty() ? default_out_dir() : abl_out;
    char* summary = nullptr;
    if (dlr_status s =
            dlr_ablate(cfg.ptr, abl_kind.c_str(), abl_seeds, out.c_str(),
                       &summary);
        s != DLR_OK) {
      return fail(s);
    }
    std::printf("%s", summary);
    dlr_string_free(summary);
    std::printf("csv %s/ablation.csv\n", out.c_str());
    return 0;
  }

  return 2;
}
