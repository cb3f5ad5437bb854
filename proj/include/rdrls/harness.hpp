#pragma once

#include <iosfwd>
#include <string>

#include "rdrls/config.hpp"
#include "rdrls/engine.hpp"

namespace rdrls {

struct RunPaths {
  std::string learning_curve;  // iteration, one MSD-dB column per algorithm
  std::string nodewise;        // node id, one column per robust algorithm
  std::string manifest;        // resolved config + provenance metadata
};

/// Executes a resolved config end to end and writes the output files into
/// config.output_dir. Learning-curve columns are clipped at +60 dB for
/// plotting; an algorithm whose curve needed clipping (divergence) gets an
/// extra <label>_raw column carrying the unclipped values. Output bytes are
/// a pure function of the resolved config.
RunPaths run_experiment(const ExperimentConfig& config, Execution execution,
                        std::ostream* log = nullptr);

/// Learning-curve CSV text for a finished simulation (exposed for tests).
std::string learning_curve_csv(const ExperimentConfig& config,
                               const SimulationResult& result);

/// Node-wise steady-state CSV text (robust algorithms only).
std::string nodewise_csv(const ExperimentConfig& config,
                         const SimulationResult& result);

}  // namespace rdrls
