#pragma once

// Plain-text sectioned key = value experiment configuration: parsing with
// whole-document error reporting, canonical re-serialization (numbers
// rendered %.17g, fixed key order), and the content digest derived from the
// canonical form.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fracheat/sde.hpp"

namespace fracheat {

struct ExperimentConfig {
  ModelSpec model;
  GridSpec grid;
  long replicas = 100;
  std::uint64_t seed = 1;
  EvalPolicy eval;
  // one of: ml-eval, kernel, simulate, moment-scan, lambda-profile,
  // beta-sweep, continuity.  Empty until a subcommand (or the file) sets it.
  std::string experiment_kind;
  // kind-specific parameters in canonical string form
  std::map<std::string, std::string> experiment;
  std::string output_dir = ".";
};

// Parses and validates; throws std::invalid_argument listing every
// violation found (unknown sections/keys, malformed numbers, out-of-domain
// values, missing required keys).  mc.seed is required; experiment.kind may
// be omitted only when no kind-specific keys appear.
ExperimentConfig parse_config(const std::string& text);

// Canonical rendering; parse_config(serialize_config(c)) reproduces c
// field-for-field.  Kind-specific defaults are materialized, so the result
// is a fixed point of parse-then-serialize.
std::string serialize_config(const ExperimentConfig& config);

// SHA-256 of the canonical rendering.
std::string config_digest(const ExperimentConfig& config);

// Post-parse validation used when fields are edited programmatically
// (CLI overrides); throws with the full violation list.
void validate_config(const ExperimentConfig& config);

// Helpers shared with the runner.
std::vector<double> parse_double_list(const std::string& csv);
std::string render_double_list(const std::vector<double>& values);

}  // namespace fracheat
