#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace gpr {

/// Lowercase hex SHA-256 of a file's bytes / of a string.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view data);

/// Record of one CLI run: enough to reproduce it and to detect edited inputs.
class RunManifest {
 public:
  explicit RunManifest(std::string command = "");

  const std::string& command() const { return command_; }
  nlohmann::json& config() { return config_; }
  const nlohmann::json& config() const { return config_; }
  std::uint64_t seed = 0;

  /// Hashes the file now; a missing path is an error.
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  const std::map<std::string, std::string>& inputs() const { return inputs_; }
  const std::vector<std::string>& outputs() const { return outputs_; }

  /// Stamps the finish time and writes JSON via a temporary file + rename.
  void write(const std::filesystem::path& path);
  static RunManifest read(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Inputs whose current hash differs from the recorded one (or vanished).
  std::vector<std::string> changed_inputs() const;

 private:
  std::string command_;
  nlohmann::json config_ = nlohmann::json::object();
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
  std::string started_;
  std::string finished_;
  double seconds_ = 0.0;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace gpr
