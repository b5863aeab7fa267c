#pragma once

// Structured raw-log generator: a stand-in behavior corpus with planted
// category preferences, so the sampled training task is learnable.

#include <cstdint>
#include <vector>

#include "tbsm/taobao.hpp"

namespace tbsm {

struct CorpusConfig {
  std::int64_t num_users = 5000;
  std::int64_t num_items = 2000;
  std::int64_t num_cats = 50;
  int min_events = 40;
  int max_events = 360;    // straddles the 200-event history window
  int pref_percent = 90;   // chance an event draws from the user's categories
  std::uint64_t seed = 0;
};

// Fixed item -> category map used by the generator.
std::int64_t corpus_category_of(std::int64_t item, const CorpusConfig& cfg);

// Each user favors 1-3 categories and browses items from them with
// probability pref_percent/100 (uniform pool items otherwise). Timestamps
// are strictly increasing per user; events are emitted user-major. Draws
// come from per-user sub-seeds, so output does not depend on user count.
std::vector<RawEvent> gen_raw_corpus(const CorpusConfig& cfg);

}  // namespace tbsm
