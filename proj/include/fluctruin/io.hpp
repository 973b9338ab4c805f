#pragma once

// Output helpers: locale-independent CSV, atomic file writes, run manifests.

#include <json.hpp>

#include <string>
#include <vector>

namespace fluctruin::io {

/// Shortest round-trip decimal form ("inf", "-inf", "nan" for non-finite).
std::string format_double(double v);

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
void write_json(const std::string& path, const nlohmann::json& j);

struct RunManifest {
  std::string command;
  std::string config_path;
  nlohmann::json resolved;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};
nlohmann::json to_json(const RunManifest& m);
extern const char* const kVersion;

}  // namespace fluctruin::io
