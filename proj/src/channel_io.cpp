#include "wbhp/channel_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "wbhp/errors.hpp"

namespace wbhp {

static_assert(std::endian::native == std::endian::little, "binary channel format assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'W', 'B', 'H', 'C'};

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("channel file: truncated input");
  return v;
}

void check_shape(const WidebandChannel& ch) {
  if (ch.per_subcarrier.empty()) throw InvalidArgument("channel record: no subcarriers");
  for (const auto& h : ch.per_subcarrier)
    if (h.rows() != ch.n_ms() || h.cols() != ch.n_bs()) throw InvalidArgument("channel record: ragged subcarriers");
}

}  // namespace

void write_channel_binary(std::ostream& out, const ChannelRecord& rec) {
  const auto& ch = rec.channel;
  check_shape(ch);
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kChannelFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ch.n_bs()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ch.n_ms()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ch.k_sub()));
  put<std::uint64_t>(out, rec.seed);
  for (const auto& h : ch.per_subcarrier)
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      for (Eigen::Index j = 0; j < h.cols(); ++j) {
        put<double>(out, h(i, j).real());
        put<double>(out, h(i, j).imag());
      }
  if (!out) throw FormatError("channel file: write failed");
}

ChannelRecord read_channel_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("channel file: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kChannelFormatVersion)
    throw FormatError("channel file: unsupported version " + std::to_string(version));
  const auto n_bs = get<std::uint32_t>(in);
  const auto n_ms = get<std::uint32_t>(in);
  const auto k = get<std::uint32_t>(in);
  ChannelRecord rec;
  rec.seed = get<std::uint64_t>(in);
  if (n_bs == 0 || n_ms == 0 || k == 0) throw FormatError("channel file: zero dimension");
  rec.channel.per_subcarrier.assign(k, CMat(n_ms, n_bs));
  for (auto& h : rec.channel.per_subcarrier)
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      for (Eigen::Index j = 0; j < h.cols(); ++j) {
        const double re = get<double>(in);
        const double im = get<double>(in);
        h(i, j) = cd(re, im);
      }
  return rec;
}

void write_channel_json(std::ostream& out, const ChannelRecord& rec) {
  const auto& ch = rec.channel;
  check_shape(ch);
  nlohmann::json j;
  j["version"] = kChannelFormatVersion;
  j["n_bs"] = ch.n_bs();
  j["n_ms"] = ch.n_ms();
  j["k_sub"] = ch.k_sub();
  j["seed"] = rec.seed;
  auto subs = nlohmann::json::array();
  for (const auto& h : ch.per_subcarrier) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(2 * h.size()));
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      for (Eigen::Index c = 0; c < h.cols(); ++c) {
        flat.push_back(h(i, c).real());
        flat.push_back(h(i, c).imag());
      }
    subs.push_back(std::move(flat));
  }
  j["subcarriers"] = std::move(subs);
  out << j.dump() << '\n';
}

ChannelRecord read_channel_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("version").get<std::uint32_t>() != kChannelFormatVersion)
      throw FormatError("channel json: unsupported version");
    const int n_bs = j.at("n_bs").get<int>();
    const int n_ms = j.at("n_ms").get<int>();
    const int k = j.at("k_sub").get<int>();
    ChannelRecord rec;
    rec.seed = j.at("seed").get<std::uint64_t>();
    const auto& subs = j.at("subcarriers");
    if (n_bs < 1 || n_ms < 1 || k < 1 || static_cast<int>(subs.size()) != k)
      throw FormatError("channel json: inconsistent dimensions");
    for (const auto& s : subs) {
      const auto flat = s.get<std::vector<double>>();
      if (flat.size() != static_cast<std::size_t>(2 * n_bs * n_ms)) throw FormatError("channel json: bad matrix size");
      CMat h(n_ms, n_bs);
      std::size_t p = 0;
      for (int i = 0; i < n_ms; ++i)
        for (int c = 0; c < n_bs; ++c, p += 2) h(i, c) = cd(flat[p], flat[p + 1]);
      rec.channel.per_subcarrier.push_back(std::move(h));
    }
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("channel json: ") + e.what());
  }
}

void save_channel(const std::filesystem::path& path, const ChannelRecord& rec) {
  const bool json = path.extension() == ".json";
  std::ofstream out(path, json ? std::ios::out : std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  if (json)
    write_channel_json(out, rec);
  else
    write_channel_binary(out, rec);
}

ChannelRecord load_channel(const std::filesystem::path& path) {
  const bool json = path.extension() == ".json";
  std::ifstream in(path, json ? std::ios::in : std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return json ? read_channel_json(in) : read_channel_binary(in);
}

}  // namespace wbhp
