#pragma once

#include "fracheat/config.hpp"
#include "fracheat/manifest.hpp"

namespace fracheat {

struct RunResult {
  RunManifest manifest;
  int exit_code = 0;  // nonzero iff any replica aborted or a stage failed
};

// Validates the config, dispatches the named experiment, writes its CSV
// outputs and manifest.json under config.output_dir.  Identical config and
// seed reproduce byte-identical CSVs.  An invalid config (including an
// unknown experiment kind) throws before anything is written; failures
// inside a stage are recorded in the manifest instead and surface through
// the exit code.
RunResult run_experiment(const ExperimentConfig& config);

}  // namespace fracheat
