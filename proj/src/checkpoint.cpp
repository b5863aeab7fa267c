#include "tbsm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "tbsm/errors.hpp"
#include "tbsm/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoints are written in the native little-endian layout");

namespace tbsm {

namespace {

constexpr char kMagic[8] = {'T', 'B', 'S', 'M', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

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
  if (!in) throw IoError("truncated checkpoint: " + path);
  return v;
}

void put_config(std::ostream& out, const TbsmConfig& c) {
  put<std::int32_t>(out, c.tau);
  put<std::int32_t>(out, c.n);
  put<std::int32_t>(out, c.d);
  put<std::uint8_t>(out, c.use_embedding ? 1 : 0);
  put<std::int64_t>(out, c.num_users);
  put<std::int64_t>(out, c.num_items);
  put<std::int64_t>(out, c.num_cats);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.head_kind));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.similarity));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.arrangement));
  put<std::int32_t>(out, c.k);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.seq_lengths.size()));
  for (int len : c.seq_lengths) put<std::int32_t>(out, len);
  put<std::int32_t>(out, c.mha_heads);
  put<std::int32_t>(out, c.mha_dim);
  put<std::int32_t>(out, c.lstm_layers);
}

template <typename Enum>
Enum get_enum(std::istream& in, const std::string& path, std::uint32_t max_value,
              const char* what) {
  const auto raw = get<std::uint32_t>(in, path);
  if (raw > max_value) {
    throw IoError("checkpoint " + path + " holds an invalid " + what + " tag " +
                  std::to_string(raw));
  }
  return static_cast<Enum>(raw);
}

TbsmConfig get_config(std::istream& in, const std::string& path) {
  TbsmConfig c;
  c.tau = get<std::int32_t>(in, path);
  c.n = get<std::int32_t>(in, path);
  c.d = get<std::int32_t>(in, path);
  c.use_embedding = get<std::uint8_t>(in, path) != 0;
  c.num_users = get<std::int64_t>(in, path);
  c.num_items = get<std::int64_t>(in, path);
  c.num_cats = get<std::int64_t>(in, path);
  c.head_kind = get_enum<HeadKind>(in, path, 2, "head kind");
  c.similarity = get_enum<SimilarityVariant>(in, path, 3, "similarity");
  c.arrangement = get_enum<TslArrangement>(in, path, 1, "arrangement");
  c.k = get<std::int32_t>(in, path);
  const auto num_lengths = get<std::uint32_t>(in, path);
  c.seq_lengths.resize(num_lengths);
  for (auto& len : c.seq_lengths) len = get<std::int32_t>(in, path);
  c.mha_heads = get<std::int32_t>(in, path);
  c.mha_dim = get<std::int32_t>(in, path);
  c.lstm_layers = get<std::int32_t>(in, path);
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const TbsmParams& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kMagic, 8);
  put(out, kVersion);
  put_config(out, model.config);

  std::vector<Tensor> params;
  collect_params(model, params);
  put<std::uint64_t>(out, params.size());
  for (const Tensor& p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.rank()));
    for (int a = 0; a < p.rank(); ++a) put<std::int64_t>(out, p.shape()[static_cast<std::size_t>(a)]);
    const std::vector<double>& vals = p.values();
    out.write(reinterpret_cast<const char*>(vals.data()),
              static_cast<std::streamsize>(vals.size() * sizeof(double)));
  }
  if (!out) throw IoError("write failed: " + path);
}

TbsmParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw IoError("not a checkpoint (bad magic): " + path);
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw IoError("checkpoint " + path + " has version " + std::to_string(version) +
                  ", expected " + std::to_string(kVersion));
  }
  const TbsmConfig config = get_config(in, path);

  auto rng = make_engine(0);
  TbsmParams model = make_tbsm(config, rng);
  std::vector<Tensor> params;
  collect_params(model, params);

  const auto count = get<std::uint64_t>(in, path);
  if (count != params.size()) {
    throw IoError("checkpoint " + path + " holds " + std::to_string(count) +
                  " tensors, the configuration needs " + std::to_string(params.size()));
  }
  for (Tensor& p : params) {
    const auto rank = get<std::uint32_t>(in, path);
    if (static_cast<int>(rank) != p.rank()) {
      throw IoError("checkpoint " + path + ": tensor rank mismatch");
    }
    for (int a = 0; a < p.rank(); ++a) {
      const auto dim = get<std::int64_t>(in, path);
      if (dim != p.shape()[static_cast<std::size_t>(a)]) {
        throw IoError("checkpoint " + path + ": tensor shape mismatch");
      }
    }
    std::vector<double>& vals = p.values();
    in.read(reinterpret_cast<char*>(vals.data()),
            static_cast<std::streamsize>(vals.size() * sizeof(double)));
    if (!in) throw IoError("truncated checkpoint: " + path);
  }
  return model;
}

}  // namespace tbsm
