#pragma once

#include "tauflow/config.hpp"

#include <functional>
#include <string>

namespace tauflow {

/// Initial datum selected by the config's preset keys.
std::function<double(const Point&)> initial_data(const ExperimentConfig& cfg);

struct RunOutcome {
    int exit_code = 0; // 0 pass, 1 assertion failed (3 = runtime error, set by the caller)
    std::string message;
};

/// Run one experiment end to end: resolves the output directory (prefixed by
/// $TAUFLOW_OUTPUT_ROOT when set and the path is relative), writes
/// metadata.json, monitors.csv, snapshots and summary.json, and evaluates the
/// config's declared assertions. Throws on runtime failures (cone exit,
/// non-finite data, I/O errors).
RunOutcome execute(const ExperimentConfig& cfg);

} // namespace tauflow
