#pragma once

#include "matprod/analysis.hpp"
#include "matprod/ensemble.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace matprod {

/// Raised for malformed or invalid configuration; the CLI maps it to exit 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class OutputFormat { JsonLines, Csv };

const char* to_string(OutputFormat f);
OutputFormat output_format_from(const std::string& name);

/// A complete description of one experiment. Everything a command consumes
/// comes from here, so a saved config file reproduces a run exactly.
struct RunConfig {
    std::vector<Matrix2> matrices;
    std::vector<double> probs;
    std::optional<ColumnVector2> v;
    std::int64_t steps = 1000;
    int trajectories = 1;
    std::uint64_t seed = 1;
    std::int64_t record_every = 0;  ///< 0 = automatic (default_record_every)
    OutputFormat format = OutputFormat::JsonLines;
    int threads = 0;  ///< 0 = hardware concurrency
    AnalysisThresholds thresholds;

    MatrixEnsemble ensemble() const;
    std::int64_t effective_record_every() const;
};

/// Parse a JSON config. origin_name labels error messages (file name);
/// parse errors carry a 1-based line number.
RunConfig parse_run_config(const std::string& json_text, const std::string& origin_name);

/// The built-in example families: example-1 .. example-4.
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace matprod
