#include "tbsm/corpus.hpp"

#include <algorithm>

#include "tbsm/errors.hpp"
#include "tbsm/rng.hpp"

namespace tbsm {

namespace {

void validate(const CorpusConfig& cfg) {
  if (cfg.num_users < 1 || cfg.num_items < 1 || cfg.num_cats < 1) {
    throw ConfigError("corpus: user/item/category counts must be >= 1");
  }
  if (cfg.num_items < cfg.num_cats) {
    throw ConfigError("corpus: need at least one item per category");
  }
  if (cfg.min_events < 1 || cfg.max_events < cfg.min_events) {
    throw ConfigError("corpus: need 1 <= min_events <= max_events");
  }
  if (cfg.pref_percent < 0 || cfg.pref_percent > 100) {
    throw ConfigError("corpus: pref_percent must be in [0, 100]");
  }
}

// Items of category c are {c, c + num_cats, c + 2*num_cats, ...}.
std::int64_t items_in_category(std::int64_t c, const CorpusConfig& cfg) {
  return (cfg.num_items - c) / cfg.num_cats + 1;
}

}  // namespace

std::int64_t corpus_category_of(std::int64_t item, const CorpusConfig& cfg) {
  return (item - 1) % cfg.num_cats + 1;
}

std::vector<RawEvent> gen_raw_corpus(const CorpusConfig& cfg) {
  validate(cfg);
  std::vector<RawEvent> events;
  events.reserve(static_cast<std::size_t>(cfg.num_users) *
                 static_cast<std::size_t>((cfg.min_events + cfg.max_events) / 2));

  for (std::int64_t user = 1; user <= cfg.num_users; ++user) {
    auto rng = make_engine(derive_seed(cfg.seed, static_cast<std::uint64_t>(user)));

    const int num_prefs = 1 + static_cast<int>(rng() % 3);
    std::vector<std::int64_t> prefs;
    while (static_cast<int>(prefs.size()) < num_prefs) {
      const std::int64_t c = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(cfg.num_cats));
      if (std::find(prefs.begin(), prefs.end(), c) == prefs.end()) prefs.push_back(c);
    }

    const int count = cfg.min_events +
        static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.max_events - cfg.min_events + 1));
    std::int64_t timestamp = static_cast<std::int64_t>(rng() % 100000);

    for (int e = 0; e < count; ++e) {
      timestamp += 1 + static_cast<std::int64_t>(rng() % 50);
      std::int64_t item;
      if (static_cast<int>(rng() % 100) < cfg.pref_percent) {
        const std::int64_t c = prefs[rng() % prefs.size()];
        item = c + cfg.num_cats * static_cast<std::int64_t>(
                        rng() % static_cast<std::uint64_t>(items_in_category(c, cfg)));
      } else {
        item = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(cfg.num_items));
      }
      events.push_back(RawEvent{user, item, corpus_category_of(item, cfg), timestamp});
    }
  }
  return events;
}

}  // namespace tbsm
