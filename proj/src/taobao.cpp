#include "tbsm/taobao.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "tbsm/errors.hpp"
#include "tbsm/rng.hpp"

namespace tbsm {

namespace {

struct Token {
  std::string_view text;
  std::int64_t column;  // 1-based start position within the line
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t') {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    tokens.push_back(Token{std::string_view(line).substr(start, i - start),
                           static_cast<std::int64_t>(start) + 1});
  }
  return tokens;
}

[[noreturn]] void fail(std::int64_t line_number, std::int64_t column, const std::string& what) {
  throw ParseError(line_number, "column " + std::to_string(column) + ": " + what);
}

std::int64_t parse_id(std::string_view text, std::int64_t line_number, std::int64_t column) {
  std::int64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    fail(line_number, column, "expected an integer, got '" + std::string(text) + "'");
  }
  if (value < 0) {
    fail(line_number, column, "ids must be nonnegative, got " + std::string(text));
  }
  return value;
}

std::vector<std::int64_t> parse_id_list(const Token& tok, const char* list_name,
                                        std::int64_t line_number) {
  std::vector<std::int64_t> out;
  out.reserve(kHistoryLen);
  std::string_view rest = tok.text;
  std::int64_t col = tok.column;
  while (true) {
    std::size_t comma = rest.find(',');
    std::string_view piece = comma == std::string_view::npos ? rest : rest.substr(0, comma);
    if (piece.empty()) {
      fail(line_number, col, std::string("empty entry in ") + list_name);
    }
    out.push_back(parse_id(piece, line_number, col));
    if (comma == std::string_view::npos) break;
    col += static_cast<std::int64_t>(comma) + 1;
    rest = rest.substr(comma + 1);
  }
  if (static_cast<int>(out.size()) != kHistoryLen) {
    fail(line_number, tok.column,
         std::string(list_name) + " has " + std::to_string(out.size()) + " entries, expected " +
             std::to_string(kHistoryLen));
  }
  return out;
}

}  // namespace

ProcessedUserRecord parse_line(const std::string& line, std::int64_t line_number) {
  auto tokens = tokenize(line);
  if (tokens.size() != 8) {
    throw ParseError(line_number, "expected 8 fields (u i c l + four id lists), got " +
                                      std::to_string(tokens.size()));
  }
  ProcessedUserRecord rec;
  rec.user = parse_id(tokens[0].text, line_number, tokens[0].column);
  rec.last_item = parse_id(tokens[1].text, line_number, tokens[1].column);
  rec.last_cat = parse_id(tokens[2].text, line_number, tokens[2].column);
  std::int64_t label = parse_id(tokens[3].text, line_number, tokens[3].column);
  if (label != 0 && label != 1) {
    fail(line_number, tokens[3].column, "label must be 0 or 1, got " + std::to_string(label));
  }
  rec.label = static_cast<int>(label);
  rec.true_items = parse_id_list(tokens[4], "true item list", line_number);
  rec.true_cats = parse_id_list(tokens[5], "true category list", line_number);
  rec.rand_items = parse_id_list(tokens[6], "random item list", line_number);
  rec.rand_cats = parse_id_list(tokens[7], "random category list", line_number);
  return rec;
}

std::string serialize_record(const ProcessedUserRecord& rec) {
  std::string out;
  out.reserve(kHistoryLen * 4 * 8);
  out += std::to_string(rec.user);
  out += ' ';
  out += std::to_string(rec.last_item);
  out += ' ';
  out += std::to_string(rec.last_cat);
  out += ' ';
  out += std::to_string(rec.label);
  auto append_list = [&out](const std::vector<std::int64_t>& ids) {
    out += ' ';
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i > 0) out += ',';
      out += std::to_string(ids[i]);
    }
  };
  append_list(rec.true_items);
  append_list(rec.true_cats);
  append_list(rec.rand_items);
  append_list(rec.rand_cats);
  return out;
}

std::vector<ProcessedUserRecord> read_processed_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<ProcessedUserRecord> records;
  std::string line;
  std::int64_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    records.push_back(parse_line(line, line_number));
  }
  return records;
}

void write_processed_file(const std::string& path,
                          const std::vector<ProcessedUserRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& rec : records) out << serialize_record(rec) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::vector<RawEvent> read_raw_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<RawEvent> events;
  std::string line;
  std::int64_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::int64_t fields[4];
    std::string_view rest = line;
    std::int64_t col = 1;
    for (int f = 0; f < 4; ++f) {
      const std::size_t comma = rest.find(',');
      if ((f < 3) != (comma != std::string_view::npos)) {
        throw ParseError(line_number, "expected 4 comma-separated fields "
                                      "(user,item,category,timestamp)");
      }
      const std::string_view piece =
          comma == std::string_view::npos ? rest : rest.substr(0, comma);
      fields[f] = parse_id(piece, line_number, col);
      if (f < 3 && fields[f] == 0) {
        fail(line_number, col, "ids must be >= 1 (0 is the padding id)");
      }
      if (comma != std::string_view::npos) {
        col += static_cast<std::int64_t>(comma) + 1;
        rest = rest.substr(comma + 1);
      }
    }
    events.push_back(RawEvent{fields[0], fields[1], fields[2], fields[3]});
  }
  return events;
}

void write_raw_csv(const std::string& path, const std::vector<RawEvent>& events) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& ev : events) {
    out << ev.user << ',' << ev.item << ',' << ev.category << ',' << ev.timestamp << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

namespace {

// Uniform draw from the pool, rejecting the user's own items. The pool is
// ordered by first appearance in the raw stream, so draws are reproducible.
std::pair<std::int64_t, std::int64_t> draw_negative(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& pool,
    const std::unordered_set<std::int64_t>& own_items, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const auto& cand = pool[static_cast<std::size_t>(rng() % pool.size())];
    if (!own_items.contains(cand.first)) return cand;
  }
  throw ContractError("item pool has no entries outside the user's own history");
}

}  // namespace

RawToProcessedResult raw_to_processed(const std::vector<RawEvent>& events, std::uint64_t seed) {
  // Group by user, preserving first-appearance order.
  std::unordered_map<std::int64_t, std::size_t> user_slot;
  std::vector<std::int64_t> user_order;
  std::vector<std::vector<RawEvent>> grouped;
  for (const auto& ev : events) {
    auto [it, inserted] = user_slot.try_emplace(ev.user, grouped.size());
    if (inserted) {
      user_order.push_back(ev.user);
      grouped.emplace_back();
    }
    grouped[it->second].push_back(ev);
  }

  // Global item pool, first appearance order, each item with the category it
  // first appeared under.
  std::vector<std::pair<std::int64_t, std::int64_t>> pool;
  std::unordered_set<std::int64_t> pool_seen;
  for (const auto& ev : events) {
    if (pool_seen.insert(ev.item).second) pool.emplace_back(ev.item, ev.category);
  }

  RawToProcessedResult result;
  result.records.reserve(grouped.size());
  for (std::size_t u = 0; u < grouped.size(); ++u) {
    auto& evs = grouped[u];
    if (evs.empty()) {
      ++result.skipped_users;
      continue;
    }
    std::stable_sort(evs.begin(), evs.end(),
                     [](const RawEvent& a, const RawEvent& b) { return a.timestamp < b.timestamp; });

    ProcessedUserRecord rec;
    rec.user = user_order[u];
    rec.true_items.assign(kHistoryLen, 0);
    rec.true_cats.assign(kHistoryLen, 0);
    const std::size_t keep = std::min<std::size_t>(evs.size(), kHistoryLen);
    const std::size_t offset = kHistoryLen - keep;  // front padding
    for (std::size_t j = 0; j < keep; ++j) {
      const RawEvent& ev = evs[evs.size() - keep + j];
      rec.true_items[offset + j] = ev.item;
      rec.true_cats[offset + j] = ev.category;
    }

    std::unordered_set<std::int64_t> own(rec.true_items.begin(), rec.true_items.end());

    // Draw order per user: label coin, the optional position-200 fake, then
    // 200 random pairs. The fake joins the exclusion set so the random lists
    // never intersect the stored true list.
    auto rng = make_engine(derive_seed(seed, static_cast<std::uint64_t>(u)));
    rec.label = static_cast<int>(rng() % 2);
    if (rec.label == 0) {
      auto [item, cat] = draw_negative(pool, own, rng);
      rec.true_items[kHistoryLen - 1] = item;
      rec.true_cats[kHistoryLen - 1] = cat;
      own.insert(item);
    }
    rec.rand_items.reserve(kHistoryLen);
    rec.rand_cats.reserve(kHistoryLen);
    for (int j = 0; j < kHistoryLen; ++j) {
      auto [item, cat] = draw_negative(pool, own, rng);
      rec.rand_items.push_back(item);
      rec.rand_cats.push_back(cat);
    }
    rec.last_item = rec.true_items[kHistoryLen - 1];
    rec.last_cat = rec.true_cats[kHistoryLen - 1];
    result.records.push_back(std::move(rec));
  }
  return result;
}

void attach_time(std::vector<Event>& point) {
  const std::size_t tau = point.size();
  if (tau == 0) return;
  if (tau == 1) {
    point[0].time = 0.0;
    return;
  }
  for (std::size_t j = 0; j < tau; ++j) {
    point[j].time = static_cast<double>(j) / static_cast<double>(tau - 1);
  }
}

namespace {

std::vector<Event> window_events(const ProcessedUserRecord& rec, int start, int tau, int label) {
  std::vector<Event> point;
  point.reserve(tau);
  for (int j = 0; j < tau; ++j) {
    Event ev;
    ev.user = rec.user;
    ev.item = rec.true_items[start + j];
    ev.category = rec.true_cats[start + j];
    ev.label = 0;
    point.push_back(ev);
  }
  point.back().label = label;
  attach_time(point);
  return point;
}

void check_tau(int tau) {
  if (tau < 1 || tau > kHistoryLen) {
    throw ContractError("tau must lie in [1, " + std::to_string(kHistoryLen) + "]");
  }
}

}  // namespace

std::vector<std::vector<Event>> make_train_points(const ProcessedUserRecord& rec,
                                                  const TrainSampleConfig& cfg,
                                                  std::mt19937_64& rng) {
  check_tau(cfg.tau);
  if (cfg.positives_per_record < 0 || cfg.negatives_per_record < 0) {
    throw ContractError("sample counts must be nonnegative");
  }
  const int windows = std::max(cfg.positives_per_record, cfg.negatives_per_record);
  const std::uint64_t starts = static_cast<std::uint64_t>(kHistoryLen - cfg.tau + 1);
  std::vector<std::vector<Event>> points;
  points.reserve(static_cast<std::size_t>(cfg.positives_per_record) + cfg.negatives_per_record);
  for (int w = 0; w < windows; ++w) {
    const int start = static_cast<int>(rng() % starts);
    if (w < cfg.positives_per_record) {
      points.push_back(window_events(rec, start, cfg.tau, 1));
    }
    if (w < cfg.negatives_per_record) {
      auto neg = window_events(rec, start, cfg.tau, 0);
      const auto r = static_cast<std::size_t>(rng() % kHistoryLen);
      neg.back().item = rec.rand_items[r];
      neg.back().category = rec.rand_cats[r];
      points.push_back(std::move(neg));
    }
  }
  return points;
}

std::vector<Event> make_test_point(const ProcessedUserRecord& rec, int tau) {
  check_tau(tau);
  return window_events(rec, kHistoryLen - tau, tau, rec.label);
}

}  // namespace tbsm
