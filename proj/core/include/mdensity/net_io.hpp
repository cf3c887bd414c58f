#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "mdensity/mlp.hpp"

namespace mdensity {

/// Text format "mdensity-net 1"; see docs/net_format.md.
inline constexpr int kNetFormatVersion = 1;

struct SavedNet {
  MlpScoreNet net;
  std::optional<AdamState> adam;
};

void write_net(std::ostream& out, const MlpScoreNet& net, const AdamState* adam = nullptr);
SavedNet read_net(std::istream& in);

void save_net(const std::filesystem::path& path, const MlpScoreNet& net, const AdamState* adam = nullptr);
SavedNet load_net(const std::filesystem::path& path);

}  // namespace mdensity
