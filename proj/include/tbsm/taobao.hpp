#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tbsm/embedding.hpp"

namespace tbsm {

// Length of the stored behavior history per user in the processed format.
inline constexpr int kHistoryLen = 200;

// One line of the processed format: scalar header fields, then four
// comma-separated 200-id lists. last_item/last_cat duplicate position 200 of
// the true lists (which already holds the substituted fake when label = 0).
struct ProcessedUserRecord {
  std::int64_t user = 0;
  std::int64_t last_item = 0;
  std::int64_t last_cat = 0;
  int label = 0;
  std::vector<std::int64_t> true_items;
  std::vector<std::int64_t> true_cats;
  std::vector<std::int64_t> rand_items;
  std::vector<std::int64_t> rand_cats;
};

// Parses one record. line_number is used in error messages (1-based).
ProcessedUserRecord parse_line(const std::string& line, std::int64_t line_number);

// Canonical form: single spaces between fields, lists comma-joined.
// parse_line(serialize_record(r)) reproduces r exactly.
std::string serialize_record(const ProcessedUserRecord& rec);

std::vector<ProcessedUserRecord> read_processed_file(const std::string& path);
void write_processed_file(const std::string& path,
                          const std::vector<ProcessedUserRecord>& records);

struct RawEvent {
  std::int64_t user = 0;
  std::int64_t item = 0;
  std::int64_t category = 0;
  std::int64_t timestamp = 0;
};

// Raw behavior log, one "user,item,category,timestamp" line per event.
// Ids must be >= 1 (0 is the padding id), timestamps >= 0.
std::vector<RawEvent> read_raw_csv(const std::string& path);
void write_raw_csv(const std::string& path, const std::vector<RawEvent>& events);

struct RawToProcessedResult {
  std::vector<ProcessedUserRecord> records;  // one per user, first-appearance order
  std::int64_t skipped_users = 0;
};

// Builds processed records: per user, a chronologically (stable) sorted
// history truncated to the last 200 events or zero-padded in front; 200
// random (item, category) pairs drawn from the global pool excluding the
// user's true items; a fair coin label, with position 200 substituted by a
// fake pair when the label is 0. Each user's draws come from a sub-seed of
// (seed, record index), so output is independent of evaluation order.
RawToProcessedResult raw_to_processed(const std::vector<RawEvent>& events, std::uint64_t seed);

// Overwrites the time fields with the equally-spaced grid t_j = j/(tau-1)
// for 0-based j (a single event gets t = 0).
void attach_time(std::vector<Event>& point);

struct TrainSampleConfig {
  int tau = 20;
  int positives_per_record = 1;
  int negatives_per_record = 1;
};

// Draws max(positives, negatives) windows with uniform random starts in
// [0, 200 - tau]. Window w yields a label-1 point (while w < positives) and
// a label-0 twin (while w < negatives) that differs only in the final
// event's item/category, which are replaced by a uniformly chosen entry of
// the record's random lists.
std::vector<std::vector<Event>> make_train_points(const ProcessedUserRecord& rec,
                                                  const TrainSampleConfig& cfg,
                                                  std::mt19937_64& rng);

// The deterministic last-tau suffix of the true lists, labelled by the
// record's own label.
std::vector<Event> make_test_point(const ProcessedUserRecord& rec, int tau);

}  // namespace tbsm
