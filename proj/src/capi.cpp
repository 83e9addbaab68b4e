#include "mulab/capi.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mulab/data.hpp"
#include "mulab/harness.hpp"
#include "mulab/io.hpp"
#include "mulab/metrics.hpp"
#include "mulab/nn.hpp"
#include "mulab/schedule.hpp"
#include "mulab/unlearn.hpp"

using nlohmann::json;

struct mu_dataset {
  mulab::SplitDataset splits;
};

struct mu_net {
  mulab::Mlp net;
  std::uint64_t seed_record = 0;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
mu_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MU_OK;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return MU_ERR_INVALID_ARGUMENT;
  } catch (const std::domain_error& e) {
    g_last_error = e.what();
    return MU_ERR_NUMERIC;
  } catch (const std::ios_base::failure& e) {
    g_last_error = e.what();
    return MU_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MU_ERR_RUNTIME;
  }
}

mu_status require(bool ok, const char* message) {
  if (ok) return MU_OK;
  g_last_error = message;
  return MU_ERR_INVALID_ARGUMENT;
}

mulab::ExperimentConfig load_experiment(const char* config_path,
                                        const char* out_dir) {
  auto cfg = mulab::ExperimentConfig::from_file(config_path);
  if (out_dir != nullptr && out_dir[0] != '\0') cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

extern "C" {

const char* mu_version(void) { return "0.1.0"; }

const char* mu_last_error(void) { return g_last_error.c_str(); }

void mu_dataset_spec_defaults(mu_dataset_spec* spec) {
  if (spec == nullptr) return;
  spec->k = 5;
  spec->n_per_class = 200;
  spec->dim = 8;
  spec->spread = 1.0;
  spec->seed = 0;
  spec->forget_fraction = 0.1;
  spec->unseen_fraction = 0.2;
  spec->test_fraction = 0.2;
  spec->stratified = 1;
  spec->forget_class = -1;
  spec->center_shift = 0.0;
}

mu_status mu_dataset_generate(const mu_dataset_spec* spec, mu_dataset** out) {
  if (auto rc = require(spec != nullptr && out != nullptr,
                        "dataset_generate: null argument")) {
    return rc;
  }
  return guarded([&] {
    mulab::BlobSpec blobs;
    blobs.k = spec->k;
    blobs.n_per_class = spec->n_per_class;
    blobs.dim = spec->dim;
    blobs.spread = spec->spread;
    blobs.seed = spec->seed;
    blobs.center_shift = spec->center_shift;
    mulab::SplitSpec split_spec;
    split_spec.forget_fraction = spec->forget_fraction;
    split_spec.stratified = spec->stratified != 0;
    split_spec.seed = spec->seed;
    split_spec.unseen_fraction = spec->unseen_fraction;
    split_spec.test_fraction = spec->test_fraction;
    auto samples = mulab::generate_blobs(blobs);
    auto handle = std::make_unique<mu_dataset>();
    handle->splits =
        spec->forget_class >= 0
            ? mulab::make_class_unlearn_splits(std::move(samples),
                                               spec->forget_class, split_spec,
                                               spec->k)
            : mulab::make_splits(std::move(samples), split_spec, spec->k);
    *out = handle.release();
  });
}

mu_status mu_dataset_load(const char* path, mu_dataset** out) {
  if (auto rc = require(path != nullptr && out != nullptr,
                        "dataset_load: null argument")) {
    return rc;
  }
  return guarded([&] {
    auto handle = std::make_unique<mu_dataset>();
    handle->splits = mulab::load_dataset(path);
    *out = handle.release();
  });
}

mu_status mu_dataset_save(const mu_dataset* ds, const char* path) {
  if (auto rc = require(ds != nullptr && path != nullptr,
                        "dataset_save: null argument")) {
    return rc;
  }
  return guarded([&] { mulab::save_dataset(ds->splits, path); });
}

mu_status mu_dataset_info_json(const mu_dataset* ds, char** json_out) {
  if (auto rc = require(ds != nullptr && json_out != nullptr,
                        "dataset_info: null argument")) {
    return rc;
  }
  return guarded([&] {
    json j;
    j["k"] = ds->splits.k;
    j["dim"] = ds->splits.forget.front().input.size();
    for (const char* name : mulab::kSplitNames) {
      auto split = ds->splits.split(name);
      j["counts"][name] = split.size();
      j["checksums"][name] = mulab::split_checksum(split);
    }
    *json_out = dup_string(j.dump(2));
  });
}

mu_status mu_dataset_leakage_json(const mu_dataset* ds, char** json_out) {
  if (auto rc = require(ds != nullptr && json_out != nullptr,
                        "dataset_leakage: null argument")) {
    return rc;
  }
  return guarded([&] {
    *json_out =
        dup_string(mulab::leakage_report_json(mulab::detect_leakage(ds->splits)));
  });
}

void mu_dataset_free(mu_dataset* ds) { delete ds; }

mu_status mu_net_load(const char* path, mu_net** out) {
  if (auto rc = require(path != nullptr && out != nullptr,
                        "net_load: null argument")) {
    return rc;
  }
  return guarded([&] {
    auto ck = mulab::load_checkpoint(path);
    auto handle = std::make_unique<mu_net>();
    handle->net = std::move(ck.net);
    handle->seed_record = ck.seed_record;
    *out = handle.release();
  });
}

mu_status mu_net_save(const mu_net* net, const char* path) {
  if (auto rc = require(net != nullptr && path != nullptr,
                        "net_save: null argument")) {
    return rc;
  }
  return guarded([&] {
    mulab::save_checkpoint(net->net, net->seed_record, path);
  });
}

mu_status mu_net_input_dim(const mu_net* net, int* out) {
  if (auto rc = require(net != nullptr && out != nullptr,
                        "net_input_dim: null argument")) {
    return rc;
  }
  *out = net->net.input_dim();
  return MU_OK;
}

mu_status mu_net_num_classes(const mu_net* net, int* out) {
  if (auto rc = require(net != nullptr && out != nullptr,
                        "net_num_classes: null argument")) {
    return rc;
  }
  *out = net->net.num_classes();
  return MU_OK;
}

mu_status mu_net_forward(const mu_net* net, const double* input,
                         size_t input_len, double* logits_out,
                         size_t logits_len) {
  if (auto rc = require(net != nullptr && input != nullptr &&
                            logits_out != nullptr,
                        "net_forward: null argument")) {
    return rc;
  }
  return guarded([&] {
    if (logits_len != static_cast<size_t>(net->net.num_classes())) {
      throw std::invalid_argument("net_forward: logits buffer length mismatch");
    }
    const auto logits = mulab::forward(
        net->net, std::span<const double>(input, input_len));
    std::memcpy(logits_out, logits.data(), logits.size() * sizeof(double));
  });
}

mu_status mu_net_accuracy(const mu_net* net, const mu_dataset* ds,
                          const char* split, double* out) {
  if (auto rc = require(net != nullptr && ds != nullptr && split != nullptr &&
                            out != nullptr,
                        "net_accuracy: null argument")) {
    return rc;
  }
  return guarded([&] {
    *out = mulab::accuracy(net->net, ds->splits.split(split));
  });
}

void mu_net_free(mu_net* net) { delete net; }

mu_status mu_config_seeds(const char* config_path, uint64_t* seeds_out,
                          size_t capacity, size_t* count_out) {
  if (auto rc = require(config_path != nullptr && count_out != nullptr,
                        "config_seeds: null argument")) {
    return rc;
  }
  return guarded([&] {
    const auto cfg = mulab::ExperimentConfig::from_file(config_path);
    *count_out = cfg.seeds.size();
    if (seeds_out != nullptr) {
      for (size_t i = 0; i < std::min(capacity, cfg.seeds.size()); ++i) {
        seeds_out[i] = cfg.seeds[i];
      }
    }
  });
}

mu_status mu_pretrain(const char* config_path, uint64_t seed,
                      const char* out_dir, char** result_json) {
  if (auto rc = require(config_path != nullptr && result_json != nullptr,
                        "pretrain: null argument")) {
    return rc;
  }
  return guarded([&] {
    const auto cfg = load_experiment(config_path, out_dir);
    const auto outcome = mulab::cmd_pretrain(cfg, seed, cfg.out_dir);
    json j{{"manifest_path", outcome.manifest_path.string()},
           {"checkpoint", outcome.checkpoint_path.string()},
           {"dataset", outcome.dataset_path.string()},
           {"train_accuracy", outcome.train_accuracy}};
    *result_json = dup_string(j.dump(2));
  });
}

mu_status mu_unlearn(const char* config_path, const char* method,
                     uint64_t seed, const char* out_dir, char** result_json) {
  if (auto rc = require(config_path != nullptr && method != nullptr &&
                            result_json != nullptr,
                        "unlearn: null argument")) {
    return rc;
  }
  return guarded([&] {
    const auto cfg = load_experiment(config_path, out_dir);
    const auto manifest =
        mulab::cmd_unlearn(cfg, mulab::parse_method(method), seed, cfg.out_dir);
    json j{{"manifest_path", manifest.string()}};
    *result_json = dup_string(j.dump(2));
  });
}

mu_status mu_evaluate(const char* config_path,
                      const char* const* manifest_paths, size_t n_manifests,
                      const char* out_dir, char** table_json) {
  if (auto rc = require(config_path != nullptr && table_json != nullptr,
                        "evaluate: null argument")) {
    return rc;
  }
  return guarded([&] {
    const auto cfg = load_experiment(config_path, out_dir);
    std::vector<std::filesystem::path> manifests;
    if (n_manifests > 0) {
      if (manifest_paths == nullptr) {
        throw std::invalid_argument("evaluate: null manifest list");
      }
      for (size_t i = 0; i < n_manifests; ++i) {
        manifests.emplace_back(manifest_paths[i]);
      }
    } else {
      // Discover every run manifest under the output directory.
      namespace fs = std::filesystem;
      if (fs::exists(cfg.out_dir)) {
        for (const auto& seed_entry : fs::directory_iterator(cfg.out_dir)) {
          const fs::path runs = seed_entry.path() / "runs";
          if (!fs::is_directory(runs)) continue;
          for (const auto& run_entry : fs::directory_iterator(runs)) {
            const fs::path manifest = run_entry.path() / "manifest.json";
            if (fs::exists(manifest)) manifests.push_back(manifest);
          }
        }
      }
      std::sort(manifests.begin(), manifests.end());
    }
    const auto table = mulab::cmd_evaluate(cfg, manifests, cfg.out_dir);
    *table_json = dup_string(table.to_json_text());
  });
}

mu_status mu_sweep(const char* config_path, const char* out_dir,
                   char** table_json) {
  if (auto rc = require(config_path != nullptr && table_json != nullptr,
                        "sweep: null argument")) {
    return rc;
  }
  return guarded([&] {
    const auto cfg = load_experiment(config_path, out_dir);
    const auto table = mulab::cmd_sweep(cfg, cfg.out_dir);
    *table_json = dup_string(table.to_json_text());
  });
}

mu_status mu_leakage_check(const char* config_path, uint64_t seed,
                           const char* dataset_path, char** report_json) {
  if (auto rc = require(report_json != nullptr &&
                            (config_path != nullptr || dataset_path != nullptr),
                        "leakage_check: null argument")) {
    return rc;
  }
  return guarded([&] {
    mulab::LeakageReport report;
    if (dataset_path != nullptr && dataset_path[0] != '\0') {
      report = mulab::cmd_leakage_check_file(dataset_path);
    } else {
      report = mulab::cmd_leakage_check(
          mulab::ExperimentConfig::from_file(config_path), seed);
    }
    *report_json = dup_string(mulab::leakage_report_json(report));
  });
}

void mu_string_free(char* s) { std::free(s); }

}  // extern "C"
