#include "tbsm/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tbsm/errors.hpp"
#include "tbsm/rng.hpp"

namespace tbsm {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + value + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  if (value.empty()) return out;
  std::string_view rest = value;
  while (true) {
    const std::size_t comma = rest.find(',');
    const std::string piece =
        trim(comma == std::string_view::npos ? rest : rest.substr(0, comma));
    out.push_back(parse_number<T>(key, piece));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

template <typename T>
std::string format_list(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(xs[i]);
  }
  return out;
}

void set_field(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "version") cfg.version = parse_number<int>(key, value);
  else if (key == "config_id") cfg.config_id = value;
  else if (key == "tau") cfg.tau = parse_number<int>(key, value);
  else if (key == "n") cfg.n = parse_number<int>(key, value);
  else if (key == "d") cfg.d = parse_number<int>(key, value);
  else if (key == "k") cfg.k = parse_number<int>(key, value);
  else if (key == "head") cfg.head = value;
  else if (key == "similarity") cfg.similarity = value;
  else if (key == "arrangement") cfg.arrangement = value;
  else if (key == "seq_lengths") cfg.seq_lengths = parse_list<int>(key, value);
  else if (key == "mha_heads") cfg.mha_heads = parse_number<int>(key, value);
  else if (key == "mha_dim") cfg.mha_dim = parse_number<int>(key, value);
  else if (key == "lstm_layers") cfg.lstm_layers = parse_number<int>(key, value);
  else if (key == "use_embedding") cfg.use_embedding = parse_bool(key, value);
  else if (key == "num_users") cfg.num_users = parse_number<std::int64_t>(key, value);
  else if (key == "num_items") cfg.num_items = parse_number<std::int64_t>(key, value);
  else if (key == "num_cats") cfg.num_cats = parse_number<std::int64_t>(key, value);
  else if (key == "lr") cfg.lr = parse_number<double>(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_number<int>(key, value);
  else if (key == "adagrad_eps") cfg.adagrad_eps = parse_number<double>(key, value);
  else if (key == "validation_fraction") cfg.validation_fraction = parse_number<double>(key, value);
  else if (key == "log_interval") cfg.log_interval = parse_number<int>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "num_runs") cfg.num_runs = parse_number<int>(key, value);
  else if (key == "seeds") cfg.seeds = parse_list<std::uint64_t>(key, value);
  else if (key == "synth_delta") cfg.synth_delta = parse_number<int>(key, value);
  else if (key == "synth_count") cfg.synth_count = parse_number<std::int64_t>(key, value);
  else if (key == "synth_test_fraction") cfg.synth_test_fraction = parse_number<double>(key, value);
  else if (key == "corpus_users") cfg.corpus_users = parse_number<std::int64_t>(key, value);
  else if (key == "corpus_items") cfg.corpus_items = parse_number<std::int64_t>(key, value);
  else if (key == "corpus_cats") cfg.corpus_cats = parse_number<std::int64_t>(key, value);
  else if (key == "corpus_min_events") cfg.corpus_min_events = parse_number<int>(key, value);
  else if (key == "corpus_max_events") cfg.corpus_max_events = parse_number<int>(key, value);
  else if (key == "corpus_pref_percent") cfg.corpus_pref_percent = parse_number<int>(key, value);
  else if (key == "train_positives") cfg.train_positives = parse_number<int>(key, value);
  else if (key == "train_negatives") cfg.train_negatives = parse_number<int>(key, value);
  else if (key == "train_file") cfg.train_file = value;
  else if (key == "test_file") cfg.test_file = value;
  else if (key == "output_dir") cfg.output_dir = value;
  else throw ConfigError("unknown key '" + key + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw ContractError("double formatting failed");
  return std::string(buf, ptr);
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::int64_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_number) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_number) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : kv) set_field(cfg, key, value);
  if (cfg.version != kConfigVersion) {
    throw ConfigError("unsupported config version " + std::to_string(cfg.version) +
                      " (this build reads version " + std::to_string(kConfigVersion) + ")");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_map(parse_config_text(buf.str()));
}

void apply_override(std::map<std::string, std::string>& kv, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  }
  kv[trim(std::string_view(assignment).substr(0, eq))] =
      trim(std::string_view(assignment).substr(eq + 1));
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "version = " << cfg.version << '\n';
  out << "config_id = " << cfg.config_id << '\n';
  out << "tau = " << cfg.tau << '\n';
  out << "n = " << cfg.n << '\n';
  out << "d = " << cfg.d << '\n';
  out << "k = " << cfg.k << '\n';
  out << "head = " << cfg.head << '\n';
  out << "similarity = " << cfg.similarity << '\n';
  out << "arrangement = " << cfg.arrangement << '\n';
  out << "seq_lengths = " << format_list(cfg.seq_lengths) << '\n';
  out << "mha_heads = " << cfg.mha_heads << '\n';
  out << "mha_dim = " << cfg.mha_dim << '\n';
  out << "lstm_layers = " << cfg.lstm_layers << '\n';
  out << "use_embedding = " << (cfg.use_embedding ? "true" : "false") << '\n';
  out << "num_users = " << cfg.num_users << '\n';
  out << "num_items = " << cfg.num_items << '\n';
  out << "num_cats = " << cfg.num_cats << '\n';
  out << "lr = " << format_double(cfg.lr) << '\n';
  out << "batch_size = " << cfg.batch_size << '\n';
  out << "adagrad_eps = " << format_double(cfg.adagrad_eps) << '\n';
  out << "validation_fraction = " << format_double(cfg.validation_fraction) << '\n';
  out << "log_interval = " << cfg.log_interval << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "num_runs = " << cfg.num_runs << '\n';
  out << "seeds = " << format_list(cfg.seeds) << '\n';
  out << "synth_delta = " << cfg.synth_delta << '\n';
  out << "synth_count = " << cfg.synth_count << '\n';
  out << "synth_test_fraction = " << format_double(cfg.synth_test_fraction) << '\n';
  out << "corpus_users = " << cfg.corpus_users << '\n';
  out << "corpus_items = " << cfg.corpus_items << '\n';
  out << "corpus_cats = " << cfg.corpus_cats << '\n';
  out << "corpus_min_events = " << cfg.corpus_min_events << '\n';
  out << "corpus_max_events = " << cfg.corpus_max_events << '\n';
  out << "corpus_pref_percent = " << cfg.corpus_pref_percent << '\n';
  out << "train_positives = " << cfg.train_positives << '\n';
  out << "train_negatives = " << cfg.train_negatives << '\n';
  out << "train_file = " << cfg.train_file << '\n';
  out << "test_file = " << cfg.test_file << '\n';
  out << "output_dir = " << cfg.output_dir << '\n';
  return out.str();
}

std::vector<std::uint64_t> experiment_seeds(const ExperimentConfig& cfg) {
  if (!cfg.seeds.empty()) return cfg.seeds;
  if (cfg.num_runs < 1) throw ConfigError("num_runs must be >= 1");
  std::vector<std::uint64_t> seeds;
  seeds.reserve(static_cast<std::size_t>(cfg.num_runs));
  for (int i = 0; i < cfg.num_runs; ++i) {
    seeds.push_back(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
  }
  return seeds;
}

TbsmConfig to_model_config(const ExperimentConfig& cfg) {
  TbsmConfig model;
  model.tau = cfg.tau;
  model.n = cfg.n;
  model.d = cfg.d;
  model.use_embedding = cfg.use_embedding;
  model.num_users = cfg.num_users;
  model.num_items = cfg.num_items;
  model.num_cats = cfg.num_cats;
  model.head_kind = head_kind_from_name(cfg.head);
  model.similarity = similarity_from_name(cfg.similarity);
  model.arrangement = arrangement_from_name(cfg.arrangement);
  model.k = cfg.k;
  model.seq_lengths = cfg.seq_lengths;
  model.mha_heads = cfg.mha_heads;
  model.mha_dim = cfg.mha_dim;
  model.lstm_layers = cfg.lstm_layers;
  return model;
}

TrainConfig to_train_config(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  TrainConfig train;
  train.lr = cfg.lr;
  train.batch_size = cfg.batch_size;
  train.adagrad_eps = cfg.adagrad_eps;
  train.validation_fraction = cfg.validation_fraction;
  train.log_interval = cfg.log_interval;
  train.seed = run_seed;
  return train;
}

}  // namespace tbsm
