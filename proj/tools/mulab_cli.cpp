// Experiment harness CLI. Everything goes through the shared library's C
// interface; this binary only parses arguments and moves JSON around.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mulab/capi.h"

namespace {

int fail(mu_status status) {
  std::fprintf(stderr, "{\"error\": \"%s\", \"code\": %d}\n", mu_last_error(),
               static_cast<int>(status));
  return static_cast<int>(status);
}

void print_owned(char* json) {
  std::printf("%s\n", json);
  mu_string_free(json);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Machine-unlearning laboratory"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string method;
  std::string dataset;
  std::vector<std::string> manifests;
  std::int64_t seed = -1;

  auto add_common = [&](CLI::App* cmd, bool config_required) {
    auto* opt = cmd->add_option("--config", config, "experiment config file");
    if (config_required) opt->required();
    cmd->add_option("--out", out, "output directory (overrides run.out_dir)");
    return cmd;
  };

  auto* cmd_pretrain = add_common(
      app.add_subcommand("pretrain", "generate data and train the original model"),
      true);
  cmd_pretrain->add_option("--seed", seed, "single seed (default: all config seeds)");

  auto* cmd_unlearn = add_common(
      app.add_subcommand("unlearn", "run one unlearning method"), true);
  cmd_unlearn->add_option("--method", method, "unlearning method")->required();
  cmd_unlearn->add_option("--seed", seed, "single seed (default: all config seeds)");

  auto* cmd_evaluate = add_common(
      app.add_subcommand("evaluate", "compute metrics and emit result tables"),
      true);
  cmd_evaluate->add_option("--manifest", manifests,
                           "run manifest(s); default: discover under out dir");

  add_common(app.add_subcommand("sweep", "full pipeline over seeds and methods"),
             true);

  auto* cmd_leakage = add_common(
      app.add_subcommand("leakage-check", "scan splits for duplicate samples"),
      false);
  cmd_leakage->add_option("--seed", seed, "seed for the generated dataset");
  cmd_leakage->add_option("--dataset", dataset, "check a dataset file instead");

  CLI11_PARSE(app, argc, argv);

  const char* out_arg = out.empty() ? nullptr : out.c_str();

  // --seed narrows to one seed; otherwise every seed in the config runs.
  auto seeds_to_run = [&]() -> std::vector<std::uint64_t> {
    if (seed >= 0) return {static_cast<std::uint64_t>(seed)};
    size_t count = 0;
    if (mu_config_seeds(config.c_str(), nullptr, 0, &count) != MU_OK) return {};
    std::vector<std::uint64_t> seeds(count);
    if (mu_config_seeds(config.c_str(), seeds.data(), count, &count) != MU_OK) {
      return {};
    }
    return seeds;
  };

  if (app.got_subcommand("pretrain") || app.got_subcommand("unlearn")) {
    const bool unlearning = app.got_subcommand("unlearn");
    const std::vector<std::uint64_t> seeds = seeds_to_run();
    if (seeds.empty()) return fail(MU_ERR_RUNTIME);
    for (const auto s : seeds) {
      char* result = nullptr;
      const mu_status rc =
          unlearning ? mu_unlearn(config.c_str(), method.c_str(), s, out_arg, &result)
                     : mu_pretrain(config.c_str(), s, out_arg, &result);
      if (rc != MU_OK) return fail(rc);
      print_owned(result);
    }
    return 0;
  }

  if (app.got_subcommand("evaluate")) {
    std::vector<const char*> manifest_ptrs;
    for (const auto& m : manifests) manifest_ptrs.push_back(m.c_str());
    char* table = nullptr;
    const mu_status rc = mu_evaluate(
        config.c_str(), manifest_ptrs.empty() ? nullptr : manifest_ptrs.data(),
        manifest_ptrs.size(), out_arg, &table);
    if (rc != MU_OK) return fail(rc);
    print_owned(table);
    return 0;
  }

  if (app.got_subcommand("sweep")) {
    char* table = nullptr;
    const mu_status rc = mu_sweep(config.c_str(), out_arg, &table);
    if (rc != MU_OK) return fail(rc);
    print_owned(table);
    return 0;
  }

  if (app.got_subcommand("leakage-check")) {
    char* report = nullptr;
    const mu_status rc = mu_leakage_check(
        config.empty() ? nullptr : config.c_str(),
        seed >= 0 ? static_cast<std::uint64_t>(seed) : 0,
        dataset.empty() ? nullptr : dataset.c_str(), &report);
    if (rc != MU_OK) return fail(rc);
    print_owned(report);
    return 0;
  }

  return 1;
}
