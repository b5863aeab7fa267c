// Command-line front end: data generation, preprocessing, training,
// evaluation, gradient checking and report assembly.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tbsm/checkpoint.hpp"
#include "tbsm/config.hpp"
#include "tbsm/corpus.hpp"
#include "tbsm/dataset.hpp"
#include "tbsm/errors.hpp"
#include "tbsm/ops.hpp"
#include "tbsm/rng.hpp"
#include "tbsm/taobao.hpp"
#include "tbsm/training.hpp"

namespace fs = std::filesystem;
using namespace tbsm;

namespace {

// ---------------------------------------------------------------------------
// shared plumbing

ExperimentConfig resolve_config(const std::string& config_path,
                                const std::vector<std::string>& sets) {
  std::map<std::string, std::string> kv;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open: " + config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    kv = parse_config_text(buf.str());
  }
  for (const std::string& s : sets) apply_override(kv, s);
  return config_from_map(kv);
}

fs::path resolve_output_dir(const ExperimentConfig& cfg) {
  fs::path dir = cfg.output_dir.empty() ? fs::path(".") : fs::path(cfg.output_dir);
  if (dir.is_relative()) {
    if (const char* root = std::getenv("TBSM_OUTPUT_ROOT")) {
      dir = fs::path(root) / dir;
    }
  }
  fs::create_directories(dir);
  return dir;
}

std::uint64_t fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  return h;
}

void print_file(const fs::path& path, const std::string& note) {
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a_file(path)));
  std::cout << "wrote " << path.string() << " (" << note << ") checksum " << hex << '\n';
}

void echo_config(const ExperimentConfig& cfg, const fs::path& dir) {
  std::ofstream out(dir / "config_used.txt", std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + (dir / "config_used.txt").string());
  out << serialize_config(cfg);
}

void write_metrics_csv(const fs::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "run_seed,step,split,loss,accuracy\n";
  for (const MetricsRow& r : rows) {
    out << r.run_seed << ',' << r.step << ',' << r.split << ','
        << format_double(r.loss) << ',' << format_double(r.accuracy) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

struct SummaryRow {
  std::string config_id;
  std::string head_kind;
  int k = 0;
  int tau = 0;
  ExperimentSummary summary;
};

void write_summary_csv(const fs::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "config_id,head_kind,k,tau,auc_mean,auc_std,auc_range";
  const std::size_t runs = rows.empty() ? 0 : rows.front().summary.per_seed_auc.size();
  for (std::size_t i = 0; i < runs; ++i) out << ",auc_" << i;
  out << '\n';
  for (const SummaryRow& r : rows) {
    out << r.config_id << ',' << r.head_kind << ',' << r.k << ',' << r.tau << ','
        << format_double(r.summary.auc_mean) << ','
        << format_double(r.summary.auc_std) << ','
        << format_double(r.summary.auc_range);
    for (double a : r.summary.per_seed_auc) out << ',' << format_double(a);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// data loading shared by train / eval / report

struct DataBundle {
  bool synthetic = false;
  std::vector<SynthPoint> synth_train, synth_test;
  std::vector<std::vector<Event>> event_train, event_test;
  int tau = 0;
  int n = 0;  // synthetic embedding dimension
  std::int64_t num_users = 0, num_items = 0, num_cats = 0;

  std::size_t train_count() const {
    return synthetic ? synth_train.size() : event_train.size();
  }
  std::size_t test_count() const {
    return synthetic ? synth_test.size() : event_test.size();
  }
};

DataBundle load_data(const ExperimentConfig& cfg, bool need_train) {
  DataBundle d;
  const std::string& primary = need_train ? cfg.train_file : cfg.test_file;
  if (primary.empty()) {
    throw ConfigError(need_train ? "train_file is not set" : "test_file is not set");
  }
  d.synthetic = peek_dataset_kind(primary) == DatasetKind::Synthetic;

  if (d.synthetic) {
    SynthDataset first = read_synth_file(primary);
    d.tau = first.cfg.tau;
    d.n = first.cfg.n;
    if (!need_train) {
      // Evaluation uses the file's held-out block when it has one.
      auto split = first.points.begin() + first.train_count;
      d.synth_test.assign(first.test_count() > 0 ? split : first.points.begin(),
                          first.points.end());
      return d;
    }
    if (cfg.test_file.empty() || cfg.test_file == cfg.train_file) {
      d.synth_train.assign(first.points.begin(), first.points.begin() + first.train_count);
      d.synth_test.assign(first.points.begin() + first.train_count, first.points.end());
      if (d.synth_test.empty()) {
        throw ConfigError("synthetic file " + primary +
                          " has no test block; regenerate with synth_test_fraction > 0 "
                          "or set test_file");
      }
    } else {
      SynthDataset second = read_synth_file(cfg.test_file);
      if (second.cfg.n != first.cfg.n || second.cfg.tau != first.cfg.tau) {
        throw ConfigError("train and test synthetic files disagree on n or tau");
      }
      d.synth_train = std::move(first.points);
      d.synth_test = std::move(second.points);
    }
    return d;
  }

  EventDataset test_ds;
  if (need_train) {
    if (cfg.test_file.empty()) throw ConfigError("event data needs test_file");
    EventDataset train_ds = read_event_file(cfg.train_file);
    test_ds = read_event_file(cfg.test_file);
    if (train_ds.tau != test_ds.tau) {
      throw ConfigError("train and test event files disagree on tau");
    }
    d.tau = train_ds.tau;
    d.event_train = std::move(train_ds.records);
    d.num_users = std::max(train_ds.num_users, test_ds.num_users);
    d.num_items = std::max(train_ds.num_items, test_ds.num_items);
    d.num_cats = std::max(train_ds.num_cats, test_ds.num_cats);
  } else {
    test_ds = read_event_file(cfg.test_file);
    d.tau = test_ds.tau;
    d.num_users = test_ds.num_users;
    d.num_items = test_ds.num_items;
    d.num_cats = test_ds.num_cats;
  }
  d.event_test = std::move(test_ds.records);
  return d;
}

// Checks the model configuration against the loaded data and fills in the
// vocabulary sizes for event data.
TbsmConfig model_config_for(const ExperimentConfig& cfg, const DataBundle& d) {
  TbsmConfig mc = to_model_config(cfg);
  if (d.synthetic) {
    if (mc.use_embedding) {
      throw ConfigError("synthetic data is pre-embedded; set use_embedding = false");
    }
    if (mc.n != d.n || mc.tau != d.tau) {
      throw ConfigError("config (n=" + std::to_string(mc.n) + ", tau=" +
                        std::to_string(mc.tau) + ") does not match the synthetic file (n=" +
                        std::to_string(d.n) + ", tau=" + std::to_string(d.tau) + ")");
    }
  } else {
    if (!mc.use_embedding) {
      throw ConfigError("event data needs use_embedding = true");
    }
    if (mc.tau != d.tau) {
      throw ConfigError("config tau=" + std::to_string(mc.tau) +
                        " does not match the event file tau=" + std::to_string(d.tau));
    }
    mc.num_users = static_cast<int>(std::max<std::int64_t>(mc.num_users, d.num_users));
    mc.num_items = static_cast<int>(std::max<std::int64_t>(mc.num_items, d.num_items));
    mc.num_cats = static_cast<int>(std::max<std::int64_t>(mc.num_cats, d.num_cats));
  }
  return mc;
}

struct TestMetrics {
  double loss = 0.0;
  double acc = 0.0;
  double auc_value = 0.0;
  std::size_t count = 0;
};

TestMetrics score_test_set(const TbsmParams& model, const DataBundle& d) {
  ExampleFn ex = d.synthetic ? synth_examples(model, d.synth_test)
                             : event_examples(model, d.event_test);
  std::vector<double> scores;
  std::vector<int> labels;
  collect_scores(d.test_count(), ex, scores, labels);
  TestMetrics m;
  m.count = scores.size();
  for (std::size_t i = 0; i < scores.size(); ++i) m.loss += bce_value(scores[i], labels[i]);
  m.loss /= static_cast<double>(scores.size());
  m.acc = accuracy(scores, labels);
  m.auc_value = auc(scores, labels);
  return m;
}

// Trains one model per seed, appending metric rows (and a final "test" row
// per run) to all_rows; writes a checkpoint per run when ckpt_prefix is set.
ExperimentSummary run_training(const ExperimentConfig& cfg, const TbsmConfig& mc,
                               const DataBundle& d, const fs::path& out_dir,
                               const std::string& ckpt_prefix,
                               std::vector<MetricsRow>& all_rows) {
  std::size_t run_index = 0;
  auto run_one = [&](std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    auto init_rng = make_engine(derive_seed(seed, 1));
    TbsmParams model = make_tbsm(mc, init_rng);

    ExampleFn train_ex = d.synthetic ? synth_examples(model, d.synth_train)
                                     : event_examples(model, d.event_train);
    RunResult r;
    r.seed = seed;
    r.epoch = train_one_epoch(model, d.train_count(), train_ex,
                              to_train_config(cfg, seed));
    const TestMetrics tm = score_test_set(model, d);
    r.test_auc = tm.auc_value;
    r.test_accuracy = tm.acc;
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    all_rows.insert(all_rows.end(), r.epoch.rows.begin(), r.epoch.rows.end());
    all_rows.push_back({seed, r.epoch.batches, "test", tm.loss, tm.acc});
    if (!ckpt_prefix.empty()) {
      save_checkpoint((out_dir / (ckpt_prefix + "_run" + std::to_string(run_index) + ".bin"))
                          .string(),
                      model);
    }
    ++run_index;
    return r;
  };
  return run_experiment(experiment_seeds(cfg), run_one);
}

void print_summary(const std::string& id, const ExperimentSummary& s) {
  std::cout << id << ": auc mean " << format_double(s.auc_mean) << ", std "
            << format_double(s.auc_std) << ", range " << format_double(s.auc_range)
            << ", per-seed [";
  for (std::size_t i = 0; i < s.per_seed_auc.size(); ++i) {
    if (i) std::cout << ' ';
    std::cout << format_double(s.per_seed_auc[i]);
  }
  std::cout << "]\n";
}

// ---------------------------------------------------------------------------
// commands

int cmd_synth_gen(const ExperimentConfig& cfg, const std::string& preset) {
  ExperimentConfig eff = cfg;
  if (!preset.empty()) {
    if (preset == "delta0") eff.synth_delta = 0;
    else if (preset == "delta3") eff.synth_delta = 3;
    else if (preset == "delta12") eff.synth_delta = 12;
    else if (preset == "delta30") eff.synth_delta = 30;
    else throw ConfigError("unknown preset '" + preset +
                           "' (expected delta0, delta3, delta12 or delta30)");
  }
  SynthConfig sc;
  sc.n = eff.n;
  sc.tau = eff.tau;
  sc.delta = eff.synth_delta;
  sc.count = eff.synth_count;
  sc.seed = eff.seed;
  sc.test_fraction = eff.synth_test_fraction;

  const fs::path dir = resolve_output_dir(eff);
  echo_config(eff, dir);
  SynthDataset ds = gen_dataset(sc);
  const fs::path out = dir / "synth.bin";
  write_synth_file(out.string(), ds);

  if (ds.points.empty()) {
    std::cerr << "warning: synth_count = 0, wrote an empty dataset\n";
  } else {
    auto balance = [&](std::int64_t from, std::int64_t to) {
      std::int64_t pos = 0;
      for (std::int64_t i = from; i < to; ++i) pos += ds.points[static_cast<std::size_t>(i)].label;
      return static_cast<double>(pos) / static_cast<double>(to - from);
    };
    std::cout << "label balance: train ";
    if (ds.train_count > 0) std::cout << format_double(balance(0, ds.train_count));
    else std::cout << "n/a";
    std::cout << ", test ";
    if (ds.test_count() > 0)
      std::cout << format_double(balance(ds.train_count,
                                         static_cast<std::int64_t>(ds.points.size())));
    else std::cout << "n/a";
    std::cout << '\n';
  }
  print_file(out, std::to_string(ds.train_count) + " train / " +
                      std::to_string(ds.test_count()) + " test points, delta " +
                      std::to_string(sc.delta));
  return 0;
}

int cmd_gen_raw(const ExperimentConfig& cfg) {
  CorpusConfig cc;
  cc.num_users = cfg.corpus_users;
  cc.num_items = cfg.corpus_items;
  cc.num_cats = cfg.corpus_cats;
  cc.min_events = cfg.corpus_min_events;
  cc.max_events = cfg.corpus_max_events;
  cc.pref_percent = cfg.corpus_pref_percent;
  cc.seed = cfg.seed;

  const fs::path dir = resolve_output_dir(cfg);
  echo_config(cfg, dir);
  const std::vector<RawEvent> events = gen_raw_corpus(cc);
  const fs::path out = dir / "raw.csv";
  write_raw_csv(out.string(), events);
  print_file(out, std::to_string(events.size()) + " events, " +
                      std::to_string(cc.num_users) + " users");
  return 0;
}

int cmd_prep(const ExperimentConfig& cfg, const std::string& raw_path,
             const std::string& processed_path) {
  if (raw_path.empty() == processed_path.empty()) {
    throw ConfigError("prep needs exactly one of --raw or --processed");
  }
  const fs::path dir = resolve_output_dir(cfg);
  echo_config(cfg, dir);

  std::vector<ProcessedUserRecord> records;
  if (!raw_path.empty()) {
    const std::vector<RawEvent> events = read_raw_csv(raw_path);
    RawToProcessedResult result = raw_to_processed(events, cfg.seed);
    records = std::move(result.records);
    const fs::path processed_out = dir / "processed.txt";
    write_processed_file(processed_out.string(), records);
    std::cout << "processed " << events.size() << " events into " << records.size()
              << " user records (" << result.skipped_users << " skipped)\n";
    print_file(processed_out, std::to_string(records.size()) + " records");
  } else {
    records = read_processed_file(processed_path);
    std::cout << "read " << records.size() << " user records\n";
  }

  TrainSampleConfig sample_cfg;
  sample_cfg.tau = cfg.tau;
  sample_cfg.positives_per_record = cfg.train_positives;
  sample_cfg.negatives_per_record = cfg.train_negatives;

  EventDataset train_ds, test_ds;
  train_ds.tau = cfg.tau;
  test_ds.tau = cfg.tau;
  auto rng = make_engine(derive_seed(cfg.seed, 1));
  for (const ProcessedUserRecord& rec : records) {
    for (auto& pt : make_train_points(rec, sample_cfg, rng)) {
      train_ds.records.push_back(std::move(pt));
    }
    test_ds.records.push_back(make_test_point(rec, cfg.tau));
  }

  auto bump_vocab = [](EventDataset& ds) {
    for (const auto& rec : ds.records) {
      for (const Event& ev : rec) {
        ds.num_users = std::max(ds.num_users, ev.user + 1);
        ds.num_items = std::max(ds.num_items, ev.item + 1);
        ds.num_cats = std::max(ds.num_cats, ev.category + 1);
      }
    }
  };
  bump_vocab(train_ds);
  bump_vocab(test_ds);
  const std::int64_t users = std::max(train_ds.num_users, test_ds.num_users);
  const std::int64_t items = std::max(train_ds.num_items, test_ds.num_items);
  const std::int64_t cats = std::max(train_ds.num_cats, test_ds.num_cats);
  train_ds.num_users = test_ds.num_users = users;
  train_ds.num_items = test_ds.num_items = items;
  train_ds.num_cats = test_ds.num_cats = cats;

  if (records.empty()) std::cerr << "warning: no user records, wrote empty datasets\n";
  const fs::path train_out = dir / "train_events.bin";
  const fs::path test_out = dir / "test_events.bin";
  write_event_file(train_out.string(), train_ds);
  write_event_file(test_out.string(), test_ds);
  print_file(train_out, std::to_string(train_ds.records.size()) + " train points");
  print_file(test_out, std::to_string(test_ds.records.size()) + " test points");
  return 0;
}

int cmd_train(const ExperimentConfig& cfg) {
  const DataBundle d = load_data(cfg, /*need_train=*/true);
  const TbsmConfig mc = model_config_for(cfg, d);
  const fs::path dir = resolve_output_dir(cfg);
  echo_config(cfg, dir);

  std::vector<MetricsRow> rows;
  const ExperimentSummary summary = run_training(cfg, mc, d, dir, "ckpt", rows);
  write_metrics_csv(dir / "metrics.csv", rows);
  write_summary_csv(dir / "summary.csv",
                    {{cfg.config_id, cfg.head, context_count(mc), cfg.tau, summary}});
  print_summary(cfg.config_id, summary);
  print_file(dir / "metrics.csv", std::to_string(rows.size()) + " rows");
  print_file(dir / "summary.csv", "1 row");
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path, bool fresh) {
  if (checkpoint_path.empty() == !fresh) {
    throw ConfigError("eval needs exactly one of --checkpoint or --fresh");
  }
  const DataBundle d = load_data(cfg, /*need_train=*/false);
  if (d.test_count() == 0) throw ConfigError("test set is empty");

  TbsmParams model = [&] {
    if (fresh) {
      const TbsmConfig mc = model_config_for(cfg, d);
      auto rng = make_engine(derive_seed(cfg.seed, 1));
      return make_tbsm(mc, rng);
    }
    TbsmParams loaded = load_checkpoint(checkpoint_path);
    if (loaded.config.use_embedding == d.synthetic) {
      throw ConfigError("checkpoint and data disagree on the embedding layer");
    }
    if (loaded.config.tau != d.tau) {
      throw ConfigError("checkpoint tau=" + std::to_string(loaded.config.tau) +
                        " does not match the data tau=" + std::to_string(d.tau));
    }
    return loaded;
  }();

  const TestMetrics tm = score_test_set(model, d);
  const fs::path dir = resolve_output_dir(cfg);
  const fs::path out = dir / "eval.csv";
  std::ofstream csv(out, std::ios::trunc);
  if (!csv) throw IoError("cannot open for writing: " + out.string());
  csv << "source,count,loss,accuracy,auc\n"
      << (fresh ? std::string("fresh") : checkpoint_path) << ',' << tm.count << ','
      << format_double(tm.loss) << ',' << format_double(tm.acc) << ','
      << format_double(tm.auc_value) << '\n';
  std::cout << "eval: count " << tm.count << ", loss " << format_double(tm.loss)
            << ", accuracy " << format_double(tm.acc) << ", auc "
            << format_double(tm.auc_value) << '\n';
  return 0;
}

// Full-model finite-difference suite on a small fixture covering every head.
int cmd_gradcheck(double tolerance, double step) {
  constexpr int kTau = 5, kN = 4, kD = 4, kVocab = 10;

  std::vector<Event> seq;
  for (int j = 0; j < kTau; ++j) {
    seq.push_back(Event{(3 * j + 1) % kVocab, (5 * j + 2) % kVocab, (7 * j + 3) % kVocab,
                        static_cast<double>(j) / (kTau - 1), j % 2});
  }

  struct Case {
    const char* name;
    void (*configure)(TbsmConfig&);
  };
  const Case cases[] = {
      {"tsl-dot", [](TbsmConfig& c) { c.similarity = SimilarityVariant::DotSim; }},
      {"tsl-cos", [](TbsmConfig& c) { c.similarity = SimilarityVariant::CosSim; }},
      {"tsl-gen", [](TbsmConfig& c) { c.similarity = SimilarityVariant::GenSim; }},
      {"tsl-ind", [](TbsmConfig& c) { c.similarity = SimilarityVariant::IndSim; }},
      {"mha", [](TbsmConfig& c) { c.head_kind = HeadKind::Mha; c.mha_dim = 2; }},
      {"lstm", [](TbsmConfig& c) { c.head_kind = HeadKind::Lstm; }},
  };

  double overall = 0.0;
  bool nan_seen = false;
  std::uint64_t config_index = 0;
  for (const Case& c : cases) {
    TbsmConfig mc;
    mc.tau = kTau;
    mc.n = kN;
    mc.d = kD;
    mc.num_users = mc.num_items = mc.num_cats = kVocab;
    mc.k = 2;
    c.configure(mc);

    auto rng = make_engine(derive_seed(211, config_index++));
    TbsmParams model = make_tbsm(mc, rng);
    std::vector<Tensor> params;
    collect_params(model, params);
    // Nudge every parameter off its initial value so no ReLU pre-activation
    // sits exactly on the kink, where one-sided subgradients and central
    // differences legitimately disagree.
    std::normal_distribution<double> jitter(0.0, 0.05);
    for (Tensor& p : params) {
      for (double& v : p.values()) v += jitter(rng);
    }

    auto f = [&]() { return bce_loss(forward(model, seq).p, 1); };
    const GradCheckReport rep = grad_check_params(f, params, step);
    std::cout << "gradcheck " << c.name << ": max_rel_err "
              << format_double(rep.max_rel_error) << " (worst " << rep.worst_param
              << "[" << rep.worst_index << "])\n";
    overall = std::max(overall, rep.max_rel_error);
    nan_seen = nan_seen || rep.nan_detected;
  }
  std::cout << "gradcheck max relative error: " << format_double(overall) << '\n';
  if (nan_seen || !(overall <= tolerance)) {
    std::cerr << "E_GRADCHECK: max relative error " << format_double(overall)
              << " exceeds tolerance " << format_double(tolerance) << '\n';
    return 1;
  }
  return 0;
}

int cmd_report(const ExperimentConfig& cfg) {
  const DataBundle d = load_data(cfg, /*need_train=*/true);
  const fs::path dir = resolve_output_dir(cfg);
  echo_config(cfg, dir);

  // Evenly spaced history lengths ending at tau, floored at 2.
  std::vector<int> seq_lengths;
  for (int i = 1; i <= 4; ++i) {
    seq_lengths.push_back(std::max(2, cfg.tau * i / 4));
  }

  struct Row {
    const char* id;
    const char* head;
    const char* similarity;
    const char* arrangement;
    int k;
  };
  const Row table[] = {
      {"1-gen", "tsl", "gen", "inner", 1},
      {"1-dot", "tsl", "dot", "inner", 1},
      {"1-cos", "tsl", "cos", "inner", 1},
      {"1-ind", "tsl", "ind", "inner", 1},
      {"4-inner", "tsl", "gen", "inner", 4},
      {"8-inner", "tsl", "gen", "inner", 8},
      {"4-seq", "tsl", "gen", "seq", 4},
      {"mha8", "mha", "gen", "inner", 1},
      {"lstm5", "lstm", "gen", "inner", 1},
  };

  std::vector<SummaryRow> summary_rows;
  for (const Row& row : table) {
    ExperimentConfig variant = cfg;
    variant.config_id = row.id;
    variant.head = row.head;
    variant.similarity = row.similarity;
    variant.arrangement = row.arrangement;
    variant.k = row.k;
    variant.seq_lengths =
        variant.arrangement == "seq" ? seq_lengths : std::vector<int>{};

    const TbsmConfig mc = model_config_for(variant, d);
    std::vector<MetricsRow> rows;
    const ExperimentSummary summary = run_training(variant, mc, d, dir, "", rows);
    write_metrics_csv(dir / ("metrics_" + std::string(row.id) + ".csv"), rows);
    summary_rows.push_back({row.id, row.head, context_count(mc), cfg.tau, summary});
    print_summary(row.id, summary);
  }
  write_summary_csv(dir / "report_summary.csv", summary_rows);
  print_file(dir / "report_summary.csv", std::to_string(summary_rows.size()) + " rows");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-based sequence model pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--set", sets, "override a config key (key=value), repeatable");
  };

  CLI::App* synth_gen = app.add_subcommand("synth-gen", "generate a synthetic dataset");
  std::string preset;
  synth_gen->add_option("--preset", preset, "delta preset: delta0, delta3, delta12, delta30");
  add_common(synth_gen);

  CLI::App* gen_raw = app.add_subcommand("gen-raw", "generate a structured raw behavior log");
  add_common(gen_raw);

  CLI::App* prep = app.add_subcommand("prep", "preprocess a raw or processed log into "
                                              "sampled train/test event files");
  std::string raw_path, processed_path;
  prep->add_option("--raw", raw_path, "raw csv (user,item,category,timestamp)");
  prep->add_option("--processed", processed_path, "processed text file");
  add_common(prep);

  CLI::App* train = app.add_subcommand("train", "run the multi-seed training experiment");
  add_common(train);

  CLI::App* eval = app.add_subcommand("eval", "score a test set");
  std::string checkpoint_path;
  bool fresh = false;
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint to load");
  eval->add_flag("--fresh", fresh, "score a freshly initialized model instead");
  add_common(eval);

  CLI::App* gradcheck = app.add_subcommand("gradcheck",
                                           "finite-difference check of the full model");
  double tolerance = 1e-5;
  double step = 1e-6;
  gradcheck->add_option("--tolerance", tolerance, "max allowed relative error");
  gradcheck->add_option("--step", step, "central-difference step");

  CLI::App* report = app.add_subcommand("report", "train the full model table and "
                                                  "emit summary/metrics CSVs");
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "E_USAGE: " << e.what() << '\n';
    return e.get_exit_code();
  }

  try {
    if (gradcheck->parsed()) return cmd_gradcheck(tolerance, step);
    const ExperimentConfig cfg = resolve_config(config_path, sets);
    if (synth_gen->parsed()) return cmd_synth_gen(cfg, preset);
    if (gen_raw->parsed()) return cmd_gen_raw(cfg);
    if (prep->parsed()) return cmd_prep(cfg, raw_path, processed_path);
    if (train->parsed()) return cmd_train(cfg);
    if (eval->parsed()) return cmd_eval(cfg, checkpoint_path, fresh);
    if (report->parsed()) return cmd_report(cfg);
    std::cerr << "E_USAGE: no subcommand\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "E_PARSE: " << e.what() << '\n';
  } catch (const ConfigError& e) {
    std::cerr << "E_CONFIG: " << e.what() << '\n';
  } catch (const IoError& e) {
    std::cerr << "E_IO: " << e.what() << '\n';
  } catch (const MetricError& e) {
    std::cerr << "E_METRIC: " << e.what() << '\n';
  } catch (const LookupError& e) {
    std::cerr << "E_LOOKUP: " << e.what() << '\n';
  } catch (const ShapeError& e) {
    std::cerr << "E_SHAPE: " << e.what() << '\n';
  } catch (const Error& e) {
    std::cerr << "E_CONTRACT: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << '\n';
  }
  return 1;
}
