#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fracheat {

inline constexpr const char* kToolVersion = "fracheat 0.1.0";

// Provenance record written next to every experiment's outputs.  The digest
// is recomputable from the canonical serialization of the config that
// produced the run.
struct RunManifest {
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string started_at;   // ISO 8601 UTC
  std::string finished_at;
  std::string tool_version = kToolVersion;
  std::vector<std::string> outputs;  // file names relative to the run dir
  long aborted_replicas = 0;
  std::vector<std::string> errors;

  std::string to_json() const;  // stable key order
  static RunManifest from_json(const std::string& text);
};

std::string utc_timestamp_now();

}  // namespace fracheat
