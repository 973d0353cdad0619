#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpr/tensor/tensor.hpp"

namespace gpr {

/// Keyed float64 archive: a JSON metadata record plus named row-major
/// matrices. On-disk layout (all integers little-endian u64):
///   "GPRARCH1" | meta_len | meta (UTF-8 JSON) | count |
///   count x { name_len | name | rank | dims... | float64 payload (LE) }
struct Archive {
  nlohmann::json metadata = nlohmann::json::object();
  std::map<std::string, Matrix> entries;

  void save(const std::filesystem::path& path) const;
  static Archive load(const std::filesystem::path& path);
};

/// Writes every parameter plus metadata (`config_hash`, `seed`, `step` and
/// anything the caller adds).
void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, nlohmann::json metadata);

/// Copies archived values into `params` by name; every parameter must be
/// present with a matching shape. Returns the archive metadata.
nlohmann::json load_checkpoint(const std::filesystem::path& path, ParamSet& params);

/// Short stable hex digest of a JSON config (for checkpoint metadata).
std::string config_hash(const nlohmann::json& config);

}  // namespace gpr
