// Shells out to the built CLI binary (path injected by CMake) and checks
// exit codes and key output lines.
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef DLR_CLI_PATH
#error "DLR_CLI_PATH must be defined by the build"
#endif

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;
};

CmdResult run_cli(const std::string& args) {
  const std::string cmd = std::string(DLR_CLI_PATH) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  CmdResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), int(buf.size()), pipe)) res.output += buf.data();
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

}  // namespace

TEST_CASE("--help lists every subcommand and exits 0") {
  const CmdResult res = run_cli("--help");
  CHECK(res.exit_code == 0);
  for (const char* sub :
       {"train", "eval", "variance-lab", "cost-report", "ablate"}) {
    CHECK(res.output.find(sub) != std::string::npos);
  }
}

TEST_CASE("unknown flags are rejected with exit 2") {
  CHECK(run_cli("cost-report --G 64 --K 12 --bogus 1").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
}

TEST_CASE("cost-report prints the ratio and reduction") {
  const CmdResult res = run_cli("cost-report --G 64 --K 12");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("main_forward_ratio=0.1875") != std::string::npos);
  CHECK(res.output.find("reduction_factor=5.33x") != std::string::npos);
  CHECK(run_cli("cost-report --G 8 --K 12").exit_code == 2);
}

TEST_CASE("train with a missing config file exits 2 and names the path") {
  const CmdResult res = run_cli("train --config does_not_exist.json");
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("does_not_exist.json") != std::string::npos);
}

TEST_CASE("train honors config files plus flag overrides") {
  namespace fs = std::filesystem;
  fs::remove_all("test_runs/cli_train");
  fs::create_directories("test_runs");
  {
    std::ofstream cfg("test_runs/cli_cfg.json");
    cfg << "{\"d\": 8, \"G\": 6, \"K\": 2, \"T\": 2, \"embed_dim\": 12,\n"
        << " \"iterations\": 4, \"checkpoint_interval\": 4, \"n_eval\": 10,\n"
        << " \"modulus\": 8}\n";
  }
  const CmdResult res = run_cli(
      "train --config test_runs/cli_cfg.json --seed 5 --iterations 3 "
      "--out test_runs/cli_train");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("run_dir test_runs/cli_train") != std::string::npos);
  CHECK(fs::exists("test_runs/cli_train/metrics.jsonl"));
  CHECK(fs::exists("test_runs/cli_train/ckpt_3.bin"));

  // The resolved config reflects the overrides.
  std::ifstream rc("test_runs/cli_train/config.resolved.json");
  std::string text((std::istreambuf_iterator<char>(rc)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("\"iterations\": 3") != std::string::npos);
  CHECK(text.find("\"seed\": 5") != std::string::npos);

  SUBCASE("eval subcommand reads the produced checkpoint") {
    const CmdResult ev =
        run_cli("eval --ckpt test_runs/cli_train/ckpt_3.bin --n 20 --seed 3");
    CHECK(ev.exit_code == 0);
    CHECK(ev.output.find("pass_at_1=") != std::string::npos);
  }
  SUBCASE("invalid override values exit 2") {
    CHECK(run_cli("train --config test_runs/cli_cfg.json --G 0 "
                  "--out test_runs/cli_bad").exit_code == 2);
  }
}

TEST_CASE("variance-lab writes a csv into its out directory") {
  namespace fs = std::filesystem;
  fs::remove_all("test_runs/cli_var");
  const CmdResult res = run_cli(
      "variance-lab --horizons 4,8 --samples 500 --out test_runs/cli_var");
  CHECK(res.exit_code == 0);
  CHECK(fs::exists("test_runs/cli_var/variance.csv"));
  CHECK(res.output.find("token_level") != std::string::npos);
  CHECK(res.output.find("latent_level") != std::string::npos);
}

TEST_CASE("ablate runs both arms and writes the csv") {
  namespace fs = std::filesystem;
  fs::remove_all("test_runs/cli_abl");
  fs::create_directories("test_runs");
  {
    std::ofstream cfg("test_runs/cli_abl_cfg.json");
    cfg << "{\"d\": 8, \"G\": 6, \"K\": 2, \"T\": 2, \"embed_dim\": 12,\n"
        << " \"iterations\": 3, \"checkpoint_interval\": 3, \"n_eval\": 5,\n"
        << " \"modulus\": 8}\n";
  }
  const CmdResult res = run_cli(
      "ablate --config test_runs/cli_abl_cfg.json --kind no_contrastive "
      "--seeds 1 --out test_runs/cli_abl");
  CHECK(res.exit_code == 0);
  CHECK(fs::exists("test_runs/cli_abl/ablation.csv"));
  CHECK(res.output.find("median") != std::string::npos);

  CHECK(run_cli("ablate --config test_runs/cli_abl_cfg.json --kind nope "
                "--seeds 1 --out test_runs/cli_abl2").exit_code == 2);
}
