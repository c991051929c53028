#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chernstat/correlation.hpp"

namespace chernstat {

struct ChernResult;
struct BandDiagnostics;

/// Deterministic work counters of one realization. Wall-clock timing is
/// kept in the run manifest so that record files stay byte-reproducible.
struct WorkCounters {
    std::size_t eigensolves = 0;
    std::size_t vertices = 0;
    std::size_t triangles = 0;
    std::size_t refinement_rounds = 0;
    int max_depth = 0;
    std::vector<std::size_t> depth_histogram;

    bool operator==(const WorkCounters&) const = default;
};

/// Persisted outcome of one realization; (spec, dim, seed) regenerates it.
struct EnsembleRecord {
    CorrelationSpec spec;
    int dim = 0;
    std::uint64_t seed = 0;
    std::size_t config_index = 0;
    std::size_t index = 0;  // realization index within the config

    std::vector<int> band;  // N_1 .. N_M
    std::vector<int> gap;   // G_0 .. G_M
    std::vector<double> mean_energy;
    std::vector<double> density;
    double sigma2 = 0.0;             // sensitivity(spec)
    double velocity_variance = 0.0;  // level_velocity_variance(spec)

    bool unresolved = false;
    std::string error;  // non-empty when the realization was discarded
    double max_residual = 0.0;
    WorkCounters timings;

    bool usable() const { return !unresolved && error.empty(); }
    bool operator==(const EnsembleRecord&) const = default;
};

class RecordError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

EnsembleRecord make_record(const CorrelationSpec& spec, int dim, std::uint64_t seed, const ChernResult& chern,
                           const BandDiagnostics& diagnostics);

/// One JSON object, no trailing newline, with a "checksum" field covering
/// all other fields.
std::string to_json_line(const EnsembleRecord& record);

/// Parses and verifies one line; throws RecordError on malformed input or a
/// checksum mismatch.
EnsembleRecord parse_record(std::string_view line);

/// Reads every record of a JSON-lines file. Blank lines are skipped.
std::vector<EnsembleRecord> read_records(const std::filesystem::path& path);

/// 64-bit FNV-1a, used for record checksums and config hashes.
std::uint64_t fnv1a64(std::string_view text);

/// Identifies an ensemble: family, scale and matrix dimension.
struct EnsembleKey {
    Family family = Family::gaussian;
    double scale = 0.0;
    int dim = 0;

    auto operator<=>(const EnsembleKey&) const = default;
    std::string label() const;
};

EnsembleKey key_of(const EnsembleRecord& record);

struct Ensemble {
    EnsembleKey key;
    std::vector<EnsembleRecord> records;  // usable records only, sorted by seed
    std::size_t excluded = 0;             // unresolved or discarded
};

/// Groups records by ensemble key (sorted by key), dropping unusable ones
/// into the `excluded` count.
std::vector<Ensemble> group_records(const std::vector<EnsembleRecord>& records);

}  // namespace chernstat
