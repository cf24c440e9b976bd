#pragma once

#include <iosfwd>

namespace spinstat::cli {

enum ExitCode { kOk = 0, kValidationError = 1, kComputationError = 2 };

// Subcommands: gram, project, catalog, synth, fit, calibrate.
// `--print-config` writes the default configuration.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spinstat::cli
