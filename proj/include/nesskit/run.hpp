#pragma once
// Experiment orchestration: build the configured model, run the selected
// task, and emit CSV artifacts, plot scripts, and a JSON manifest into the
// output directory.  Outputs are a pure function of the configuration, so
// identical configs byte-reproduce every CSV.

#include <string>
#include <vector>

#include "nesskit/config.hpp"

namespace nesskit {

struct RunArtifacts {
    std::vector<std::string> files;  // paths written, in emission order
    std::string summary;             // short result line for the terminal
};

// Throws with the failing module's diagnostic on any error.
RunArtifacts run(const RunConfig& config);

}  // namespace nesskit
