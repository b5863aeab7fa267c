#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tbsm/embedding.hpp"
#include "tbsm/synthetic.hpp"

namespace tbsm {

// Binary dataset container, magic "TBSMDS01". Two record kinds share the
// container: kind 1 holds synthetic (pre-embedded) points, kind 2 holds
// event sequences. Byte layout is documented in docs/formats.md.

// Fixed-length event sequences with vocabulary sizes recorded in the header.
// Every record holds exactly tau events; the label of the final event is the
// record's label.
struct EventDataset {
  int tau = 0;
  std::int64_t num_users = 0;
  std::int64_t num_items = 0;
  std::int64_t num_cats = 0;
  std::vector<std::vector<Event>> records;
};

void write_synth_file(const std::string& path, const SynthDataset& ds);
SynthDataset read_synth_file(const std::string& path);

void write_event_file(const std::string& path, const EventDataset& ds);
EventDataset read_event_file(const std::string& path);

enum class DatasetKind { Synthetic = 1, Events = 2 };

// Reads just the container header to tell the two kinds apart.
DatasetKind peek_dataset_kind(const std::string& path);

}  // namespace tbsm
