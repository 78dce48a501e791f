#include "fracheat/manifest.hpp"

#include <ctime>

#include "json.hpp"

namespace fracheat {

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["config_digest"] = config_digest;
  j["seed"] = seed;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["tool_version"] = tool_version;
  j["outputs"] = outputs;
  j["aborted_replicas"] = aborted_replicas;
  j["errors"] = errors;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RunManifest m;
  m.config_digest = j.at("config_digest").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.started_at = j.at("started_at").get<std::string>();
  m.finished_at = j.at("finished_at").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  m.aborted_replicas = j.at("aborted_replicas").get<long>();
  m.errors = j.value("errors", std::vector<std::string>{});
  return m;
}

std::string utc_timestamp_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace fracheat
