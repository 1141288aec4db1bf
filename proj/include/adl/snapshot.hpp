#pragma once

#include <filesystem>

#include "adl/model.hpp"
#include "adl/width.hpp"
#include "json.hpp"

namespace adl {

/// Version tag written into every snapshot document.
inline constexpr int kSnapshotVersion = 1;

struct Snapshot {
  AdlNetwork network;
  WidthState width;
};

/// Versioned JSON document: dimensions, row-major weights, voting state,
/// input statistics and the width statistics needed to resume.
nlohmann::ordered_json snapshot_to_json(const AdlNetwork& net, const WidthState& width);

/// Throws std::invalid_argument on an unknown version or inconsistent shapes.
Snapshot snapshot_from_json(const nlohmann::json& doc);

void save_snapshot(const std::filesystem::path& path, const AdlNetwork& net,
                   const WidthState& width);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace adl
