#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "wbhp/channel.hpp"

namespace wbhp {

/// Serialized channel realization.
///
/// Binary layout (little-endian):
///   char[4] "WBHC", u32 version (=1), u32 n_bs, u32 n_ms, u32 K, u64 seed,
///   then K matrices, each n_ms x n_bs row-major with interleaved (re, im) f64.
/// The JSON mirror carries the same header fields and one flat
/// [re, im, re, im, ...] row-major array per subcarrier under "subcarriers".
struct ChannelRecord {
  std::uint64_t seed = 0;
  WidebandChannel channel;
};

inline constexpr std::uint32_t kChannelFormatVersion = 1;

void write_channel_binary(std::ostream& out, const ChannelRecord& rec);
ChannelRecord read_channel_binary(std::istream& in);

void write_channel_json(std::ostream& out, const ChannelRecord& rec);
ChannelRecord read_channel_json(std::istream& in);

void save_channel(const std::filesystem::path& path, const ChannelRecord& rec);  // .json => JSON, else binary
ChannelRecord load_channel(const std::filesystem::path& path);

}  // namespace wbhp
