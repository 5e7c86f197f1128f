#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "acs/errors.hpp"
#include "acs/models/architecture.hpp"

namespace acs::models {

inline constexpr int kCheckpointFormatVersion = 1;

class CheckpointError : public Error {
public:
    using Error::Error;
};

/// Minimal POSIX ustar archive of named byte blobs.
void write_archive(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& entries);
std::map<std::string, std::string> read_archive(const std::filesystem::path& path);

/// Writes `manifest.json` plus one little-endian f32 blob per tensor at `params/<name>.f32`.
/// `manifest` must list every tensor under "layers" as {name, shape}.
void save_tensors(const std::filesystem::path& path, const nlohmann::json& manifest, const NamedTensors& tensors);

/// Validates every shape against the manifest, then copies values into `tensors`.
/// Returns the stored manifest.
nlohmann::json load_tensors(const std::filesystem::path& path, NamedTensors& tensors);

/// Manifest "layers" entry list for a set of tensors.
nlohmann::json layer_list(const NamedTensors& tensors);

}  // namespace acs::models
