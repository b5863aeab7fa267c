#include "tbsm/dataset.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "tbsm/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "dataset files are written in the native little-endian layout");

namespace tbsm {

namespace {

constexpr char kMagic[8] = {'T', 'B', 'S', 'M', 'D', 'S', '0', '1'};
constexpr std::uint32_t kKindSynthetic = 1;
constexpr std::uint32_t kKindEvents = 2;

template <typename T>
void put(std::ostream& out, const T& v) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  static_assert(std::is_trivially_copyable_v<T>);
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("truncated dataset file: " + path);
  return v;
}

void put_doubles(std::ostream& out, const std::vector<double>& vals) {
  out.write(reinterpret_cast<const char*>(vals.data()),
            static_cast<std::streamsize>(vals.size() * sizeof(double)));
}

void get_doubles(std::istream& in, std::vector<double>& vals, const std::string& path) {
  in.read(reinterpret_cast<char*>(vals.data()),
          static_cast<std::streamsize>(vals.size() * sizeof(double)));
  if (!in) throw IoError("truncated dataset file: " + path);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path, std::uint32_t expect_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw IoError("not a dataset file (bad magic): " + path);
  }
  auto kind = get<std::uint32_t>(in, path);
  if (kind != expect_kind) {
    throw IoError("dataset file " + path + " holds kind " + std::to_string(kind) +
                  ", expected " + std::to_string(expect_kind));
  }
  return in;
}

}  // namespace

void write_synth_file(const std::string& path, const SynthDataset& ds) {
  auto out = open_out(path);
  out.write(kMagic, 8);
  put(out, kKindSynthetic);
  put<std::int32_t>(out, ds.cfg.n);
  put<std::int32_t>(out, ds.cfg.tau);
  put<std::int32_t>(out, ds.cfg.delta);
  put<std::int64_t>(out, static_cast<std::int64_t>(ds.points.size()));
  put<std::uint64_t>(out, ds.cfg.seed);
  put<double>(out, ds.cfg.test_fraction);
  put<std::int64_t>(out, ds.train_count);
  for (const auto& pt : ds.points) {
    put<std::uint8_t>(out, static_cast<std::uint8_t>(pt.label));
    put_doubles(out, pt.Z.values());
    put_doubles(out, pt.z_last.values());
    for (const auto& perm : pt.perms) {
      out.write(reinterpret_cast<const char*>(perm.data()),
                static_cast<std::streamsize>(perm.size() * sizeof(std::int32_t)));
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

SynthDataset read_synth_file(const std::string& path) {
  auto in = open_in(path, kKindSynthetic);
  SynthDataset ds;
  ds.cfg.n = get<std::int32_t>(in, path);
  ds.cfg.tau = get<std::int32_t>(in, path);
  ds.cfg.delta = get<std::int32_t>(in, path);
  ds.cfg.count = get<std::int64_t>(in, path);
  ds.cfg.seed = get<std::uint64_t>(in, path);
  ds.cfg.test_fraction = get<double>(in, path);
  ds.train_count = get<std::int64_t>(in, path);
  if (ds.cfg.n < 2 || ds.cfg.tau < 2 || ds.cfg.delta < 0 || ds.cfg.count < 0 ||
      ds.train_count < 0 || ds.train_count > ds.cfg.count) {
    throw IoError("corrupt synthetic dataset header: " + path);
  }
  const int L = ds.cfg.tau - 1;
  ds.points.reserve(ds.cfg.count);
  for (std::int64_t r = 0; r < ds.cfg.count; ++r) {
    SynthPoint pt;
    pt.label = get<std::uint8_t>(in, path);
    pt.Z = Tensor::zeros({ds.cfg.n, L});
    get_doubles(in, pt.Z.values(), path);
    pt.z_last = Tensor::zeros({ds.cfg.n});
    get_doubles(in, pt.z_last.values(), path);
    pt.perms.resize(ds.cfg.delta);
    for (auto& perm : pt.perms) {
      perm.resize(ds.cfg.n);
      in.read(reinterpret_cast<char*>(perm.data()),
              static_cast<std::streamsize>(perm.size() * sizeof(std::int32_t)));
      if (!in) throw IoError("truncated dataset file: " + path);
    }
    ds.points.push_back(std::move(pt));
  }
  return ds;
}

void write_event_file(const std::string& path, const EventDataset& ds) {
  auto out = open_out(path);
  out.write(kMagic, 8);
  put(out, kKindEvents);
  put<std::int32_t>(out, ds.tau);
  put<std::int64_t>(out, ds.num_users);
  put<std::int64_t>(out, ds.num_items);
  put<std::int64_t>(out, ds.num_cats);
  put<std::int64_t>(out, static_cast<std::int64_t>(ds.records.size()));
  for (const auto& rec : ds.records) {
    if (static_cast<int>(rec.size()) != ds.tau) {
      throw ContractError("event record length does not match tau");
    }
    for (const auto& ev : rec) {
      put<std::int64_t>(out, ev.user);
      put<std::int64_t>(out, ev.item);
      put<std::int64_t>(out, ev.category);
      put<double>(out, ev.time);
      put<std::uint8_t>(out, static_cast<std::uint8_t>(ev.label));
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

EventDataset read_event_file(const std::string& path) {
  auto in = open_in(path, kKindEvents);
  EventDataset ds;
  ds.tau = get<std::int32_t>(in, path);
  ds.num_users = get<std::int64_t>(in, path);
  ds.num_items = get<std::int64_t>(in, path);
  ds.num_cats = get<std::int64_t>(in, path);
  auto count = get<std::int64_t>(in, path);
  if (ds.tau < 2 || count < 0) throw IoError("corrupt event dataset header: " + path);
  ds.records.reserve(count);
  for (std::int64_t r = 0; r < count; ++r) {
    std::vector<Event> rec(ds.tau);
    for (auto& ev : rec) {
      ev.user = get<std::int64_t>(in, path);
      ev.item = get<std::int64_t>(in, path);
      ev.category = get<std::int64_t>(in, path);
      ev.time = get<double>(in, path);
      ev.label = get<std::uint8_t>(in, path);
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

DatasetKind peek_dataset_kind(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw IoError("not a dataset file (bad magic): " + path);
  }
  const auto kind = get<std::uint32_t>(in, path);
  if (kind != kKindSynthetic && kind != kKindEvents) {
    throw IoError("dataset file " + path + " holds unknown kind " + std::to_string(kind));
  }
  return static_cast<DatasetKind>(kind);
}

}  // namespace tbsm
