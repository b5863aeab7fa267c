#pragma once

// Flat key=value experiment configuration: file parsing, --set overrides,
// canonical serialization and the mapping onto model/training structs.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tbsm/model.hpp"
#include "tbsm/training.hpp"

namespace tbsm {

inline constexpr int kConfigVersion = 1;

struct ExperimentConfig {
  int version = kConfigVersion;
  std::string config_id = "default";

  // model dimensions and head selection
  int tau = 20;
  int n = 15;
  int d = 16;
  int k = 1;
  std::string head = "tsl";          // tsl | mha | lstm
  std::string similarity = "gen";    // dot | cos | gen | ind
  std::string arrangement = "inner"; // inner | seq
  std::vector<int> seq_lengths;      // used by the seq arrangement
  int mha_heads = 8;
  int mha_dim = 8;
  int lstm_layers = 5;
  bool use_embedding = true;
  std::int64_t num_users = 1;
  std::int64_t num_items = 1;
  std::int64_t num_cats = 1;

  // optimizer and loop
  double lr = 0.05;
  int batch_size = 128;
  double adagrad_eps = 1e-10;
  double validation_fraction = 0.05;
  int log_interval = 20;
  std::uint64_t seed = 1;
  int num_runs = 10;
  std::vector<std::uint64_t> seeds;  // explicit list; overrides seed/num_runs

  // synthetic generation (synth-gen)
  int synth_delta = 0;
  std::int64_t synth_count = 24000;
  double synth_test_fraction = 1.0 / 6.0;  // 20k train / 4k test at the default count

  // raw-corpus generation (gen-raw)
  std::int64_t corpus_users = 5000;
  std::int64_t corpus_items = 2000;
  std::int64_t corpus_cats = 50;
  int corpus_min_events = 40;
  int corpus_max_events = 360;
  int corpus_pref_percent = 90;

  // window sampling (prep)
  int train_positives = 1;
  int train_negatives = 1;

  // data and outputs
  std::string train_file;
  std::string test_file;
  std::string output_dir;
};

// `key = value` per line, everything after '#' ignored, blank lines allowed.
// Unknown keys and malformed values raise ConfigError with the line number.
std::map<std::string, std::string> parse_config_text(const std::string& text);
ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv);
ExperimentConfig load_config(const std::string& path);

// Applies one "key=value" override (the --set flag).
void apply_override(std::map<std::string, std::string>& kv, const std::string& assignment);

// Canonical text with every key echoed, so a run directory is self-describing.
// parse -> serialize -> parse is the identity.
std::string serialize_config(const ExperimentConfig& cfg);

// Run seeds: the explicit list when given, else num_runs streams derived
// from the base seed.
std::vector<std::uint64_t> experiment_seeds(const ExperimentConfig& cfg);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

TbsmConfig to_model_config(const ExperimentConfig& cfg);
TrainConfig to_train_config(const ExperimentConfig& cfg, std::uint64_t run_seed);

}  // namespace tbsm
