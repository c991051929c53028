#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chernstat/config.hpp"
#include "chernstat/records.hpp"

namespace chernstat {

inline constexpr const char* kSoftwareVersion = "chernstat 1.0.0";

class SweepError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Seed of realization `index` of ensemble `config`: a splitmix64 chain
/// keyed by the master seed, so configs get disjoint pseudo-random seed
/// streams and the result never depends on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t config, std::uint64_t index);

/// Hash of everything that determines record content: master seed,
/// refinement policy and the (spec, M) of every ensemble. Realization
/// counts, worker count and paths are excluded, so a sweep may be extended
/// or rerun with more workers.
std::string config_hash(const SweepConfig& config);

/// Samples, solves and records a single realization. Realization-level
/// failures (eigensolver, rounding residual, spectrum) come back as a
/// record with `error` set.
EnsembleRecord run_realization(const EnsembleConfig& ensemble, const RefinePolicy& policy, std::uint64_t seed,
                               std::size_t config_index = 0, std::size_t index = 0);

struct EnsembleProgress {
    EnsembleConfig ensemble;
    std::size_t completed = 0;  // realizations 0..completed-1 are on disk
    std::size_t unresolved = 0;
    std::size_t errors = 0;
};

struct RunManifest {
    std::string config_hash;
    std::string software_version = kSoftwareVersion;
    std::uint64_t master_seed = 0;
    std::vector<EnsembleProgress> ensembles;
    std::uint64_t record_bytes = 0;  // committed length of the record file
    std::size_t last_config = 0;     // (config, index) of the last committed record
    std::size_t last_index = 0;
    bool complete = false;
    bool failed = false;
    std::string failure;
    // Telemetry; not part of any determinism guarantee.
    double wall_seconds = 0.0;
    std::size_t timed_realizations = 0;
    double realization_seconds_mean = 0.0;
    double realization_seconds_max = 0.0;
    std::size_t eigensolves = 0;

    std::size_t total_completed() const;
    std::size_t total_excluded() const;
};

RunManifest read_manifest(const std::filesystem::path& path);

/// Writes via a temporary file and rename, so a crash leaves either the
/// old or the new manifest.
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

struct SweepProgress {
    std::size_t done = 0;   // records committed in this call
    std::size_t total = 0;  // records this call will commit when finished
    const EnsembleRecord* last = nullptr;
};

struct RunOptions {
    std::function<void(const SweepProgress&)> on_record;
    /// Stop after committing this many new records (0: run to the end).
    /// The state left behind is the same as after an interruption.
    std::size_t stop_after = 0;
};

/// Runs or resumes a sweep. Records are appended in (config, index) order
/// regardless of worker count, so the record file is a pure function of
/// the config. On resume the manifest's committed prefix is kept, any
/// uncommitted tail is truncated, and the remaining realizations are run.
///
/// Throws SweepError on I/O failure or a manifest that does not belong to
/// the config. An ensemble whose excluded fraction exceeds
/// max_unresolved_fraction marks the returned manifest as failed.
RunManifest run_sweep(const SweepConfig& config, const RunOptions& options = {});

}  // namespace chernstat
