#pragma once

#include "matprod/run_config.hpp"

#include <iosfwd>
#include <string>

namespace matprod {

/// Exit codes shared by the commands and the CLI wrapper.
inline constexpr int kExitOk = 0;
inline constexpr int kExitContradiction = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDegenerate = 3;

/// Doubles are serialized with 17 significant digits so csv and json-lines
/// round-trip bit-faithfully; non-finite values print as inf/-inf/nan
/// (quoted in JSON).
std::string format_double17(double value);

/// Classify the configured ensemble and write the regime report.
int cmd_classify(const RunConfig& config, std::ostream& out);

/// Run the configured trajectories and stream every record, ordered by
/// (trajectory, step). Returns kExitDegenerate if V tracking was requested
/// and the product hit the zero matrix.
int cmd_simulate(const RunConfig& config, std::ostream& out);

/// classify -> simulate -> estimate -> verdict. Returns kExitOk when every
/// decisive claim agrees, kExitContradiction otherwise.
int cmd_verify(const RunConfig& config, std::ostream& out);

}  // namespace matprod
