#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chernstat/chern.hpp"
#include "chernstat/correlation.hpp"

namespace chernstat {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One ensemble of a sweep: correlation spec, matrix size, sample count.
struct EnsembleConfig {
    CorrelationSpec spec;
    int dim = 2;
    std::size_t realizations = 1;

    friend bool operator==(const EnsembleConfig&, const EnsembleConfig&) = default;
};

struct SweepConfig {
    std::vector<EnsembleConfig> ensembles;
    RefinePolicy policy;
    std::uint64_t master_seed = 1;
    int workers = 1;
    std::size_t checkpoint_interval = 25;
    /// A sweep fails when more than this fraction of an ensemble's
    /// realizations are unresolved or discarded.
    double max_unresolved_fraction = 0.001;
    std::filesystem::path records = "records.jsonl";
    /// Defaults to the record path with ".manifest.json" appended.
    std::filesystem::path manifest;

    std::filesystem::path manifest_path() const;

    /// Throws ConfigError describing the first invalid field.
    void validate() const;
};

/// Parses the sectioned text format:
///
///     [sweep]    seed, workers, checkpoint_interval, max_unresolved_fraction
///     [refine]   initial_depth, theta_max, eta_min, max_depth, residual_tol,
///                check_bands, continuity_factor, gap_factor
///     [output]   records, manifest
///     [config]   family, scale, M, realizations, spectrum_tol, l_max_cap
///
/// `[config]` may repeat, once per ensemble. Lines starting with '#' or ';'
/// are comments. Unknown sections or keys raise ConfigError naming them.
/// Relative output paths are kept as written.
SweepConfig parse_sweep_config(std::string_view text);

/// Reads and parses a config file; relative output paths are resolved
/// against the file's directory.
SweepConfig load_sweep_config(const std::filesystem::path& path);

/// Canonical text form; parse_sweep_config(format_sweep_config(c)) == c.
std::string format_sweep_config(const SweepConfig& config);

/// Applies CHERN_WORKERS and CHERN_SEED from the environment.
void apply_environment(SweepConfig& config);

/// Documentation of every config key, one "section.key  description" per
/// line; used for CLI help.
std::string config_key_help();

}  // namespace chernstat
