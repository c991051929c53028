#include "chernstat/harness.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <json.hpp>

#include "chernstat/chern.hpp"
#include "chernstat/detail/splitmix.hpp"
#include "chernstat/field.hpp"
#include "chernstat/spectral.hpp"

namespace chernstat {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Task {
    std::size_t config;
    std::size_t index;
};

struct Outcome {
    EnsembleRecord record;
    std::string line;
    double seconds = 0.0;
    std::exception_ptr failure;
};

Outcome execute(const SweepConfig& config, const Task& task)
{
    Outcome out;
    const auto t0 = Clock::now();
    try {
        const auto& e = config.ensembles[task.config];
        out.record = run_realization(e, config.policy, derive_seed(config.master_seed, task.config, task.index),
                                     task.config, task.index);
        out.line = to_json_line(out.record);
    } catch (...) {
        out.failure = std::current_exception();
    }
    out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

/// Append-only record file with an explicit commit point.
class RecordWriter {
public:
    RecordWriter(const std::filesystem::path& path, std::uint64_t bytes) : path_(path), bytes_(bytes)
    {
        file_ = std::fopen(path.c_str(), "ab");
        if (!file_)
            throw SweepError("cannot open record file " + path.string() + " for appending");
    }
    RecordWriter(const RecordWriter&) = delete;
    RecordWriter& operator=(const RecordWriter&) = delete;
    ~RecordWriter()
    {
        if (file_)
            std::fclose(file_);
    }

    void append(const std::string& line)
    {
        if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fputc('\n', file_) == EOF)
            throw SweepError("write to " + path_.string() + " failed");
        bytes_ += line.size() + 1;
    }

    /// Makes everything appended so far durable.
    void sync()
    {
        if (std::fflush(file_) != 0 || ::fsync(::fileno(file_)) != 0)
            throw SweepError("flush of " + path_.string() + " failed");
    }

    std::uint64_t bytes() const { return bytes_; }

private:
    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
    std::uint64_t bytes_ = 0;
};

std::string last_line_before(const std::filesystem::path& path, std::uint64_t end)
{
    std::ifstream in(path, std::ios::binary);
    const std::uint64_t window = std::min<std::uint64_t>(end, 1 << 20);
    in.seekg(static_cast<std::streamoff>(end - window));
    std::string buf(window, '\0');
    in.read(buf.data(), static_cast<std::streamsize>(window));
    if (!in)
        throw SweepError("cannot read record file " + path.string());
    if (buf.empty() || buf.back() != '\n')
        throw SweepError("record file does not end with a complete record at the committed offset");
    buf.pop_back();
    const auto nl = buf.rfind('\n');
    return nl == std::string::npos ? buf : buf.substr(nl + 1);
}

RunManifest fresh_manifest(const SweepConfig& config)
{
    RunManifest m;
    m.config_hash = config_hash(config);
    m.master_seed = config.master_seed;
    for (const auto& e : config.ensembles)
        m.ensembles.push_back({e, 0, 0, 0});
    return m;
}

/// Loads the manifest of an earlier run (if any) and brings the record
/// file back to its committed length.
RunManifest prepare_resume(const SweepConfig& config)
{
    const auto records = config.records;
    const auto manifest_path = config.manifest_path();
    std::error_code ec;
    const bool have_records = std::filesystem::exists(records, ec);
    const auto size = have_records ? std::filesystem::file_size(records, ec) : 0;

    if (!std::filesystem::exists(manifest_path, ec)) {
        if (size > 0)
            throw SweepError("record file " + records.string() + " exists without a manifest; refusing to append");
        return fresh_manifest(config);
    }

    auto m = read_manifest(manifest_path);
    if (m.config_hash != config_hash(config))
        throw SweepError("manifest " + manifest_path.string() +
                         " belongs to a different sweep configuration (seed, policy or ensembles changed)");
    if (m.ensembles.size() != config.ensembles.size())
        throw SweepError("manifest ensemble list does not match the config");
    for (std::size_t i = 0; i < config.ensembles.size(); ++i)
        m.ensembles[i].ensemble = config.ensembles[i];
    if (size < m.record_bytes)
        throw SweepError("record file " + records.string() + " is shorter than the manifest's committed length");
    if (size > m.record_bytes)
        std::filesystem::resize_file(records, m.record_bytes);
    if (m.record_bytes > 0) {
        EnsembleRecord last;
        try {
            last = parse_record(last_line_before(records, m.record_bytes));
        } catch (const RecordError& e) {
            throw SweepError(std::string("last committed record is corrupt: ") + e.what());
        }
        if (last.config_index != m.last_config || last.index != m.last_index)
            throw SweepError("record file and manifest disagree on the last committed realization");
    }
    m.master_seed = config.master_seed;
    m.complete = false;
    m.failed = false;
    m.failure.clear();
    return m;
}

void check_exclusions(RunManifest& m, double max_fraction)
{
    for (const auto& p : m.ensembles) {
        const auto excluded = p.unresolved + p.errors;
        if (p.completed > 0 && static_cast<double>(excluded) > max_fraction * static_cast<double>(p.completed)) {
            m.failed = true;
            char buf[256];
            std::snprintf(buf, sizeof buf, "%s/%.6g/M%d: %zu of %zu realizations excluded (limit %.3g%%)",
                          std::string(to_string(p.ensemble.spec.family)).c_str(), p.ensemble.spec.scale,
                          p.ensemble.dim, excluded, p.completed, 100.0 * max_fraction);
            if (!m.failure.empty())
                m.failure += "; ";
            m.failure += buf;
        }
    }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t config, std::uint64_t index)
{
    std::uint64_t h = detail::splitmix64(master ^ 0x243f6a8885a308d3ULL);
    h = detail::splitmix64(h ^ config);
    return detail::splitmix64(h ^ (index * 0x9e3779b97f4a7c15ULL));
}

std::string config_hash(const SweepConfig& config)
{
    std::ostringstream o;
    o.precision(17);
    const auto& p = config.policy;
    o << "v1|" << config.master_seed << "|" << p.initial_depth << "|" << p.theta_max << "|" << p.eta_min << "|"
      << p.max_depth << "|" << p.residual_tol << "|" << p.check_bands << "|" << p.continuity_factor << "|"
      << p.gap_factor;
    for (const auto& e : config.ensembles)
        o << "|" << to_string(e.spec.family) << ":" << e.spec.scale << ":" << e.spec.spectrum_tol << ":"
          << e.spec.l_max_cap << ":" << e.dim;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(o.str())));
    return buf;
}

EnsembleRecord run_realization(const EnsembleConfig& ensemble, const RefinePolicy& policy, std::uint64_t seed,
                               std::size_t config_index, std::size_t index)
{
    EnsembleRecord r;
    try {
        const auto field = sample_field(ensemble.spec, ensemble.dim, seed);
        const auto chern = fhs_chern(field, policy);
        r = make_record(ensemble.spec, ensemble.dim, seed, chern.result, band_diagnostics(chern.mesh, chern.energies));
    } catch (const ChernError& e) {
        r.error = std::string("chern: ") + e.what();
    } catch (const EigenSolverError& e) {
        r.error = std::string("eigensolver: ") + e.what();
    } catch (const SpectrumError& e) {
        r.error = std::string("spectrum: ") + e.what();
    }
    if (!r.error.empty()) {
        r.spec = ensemble.spec;
        r.dim = ensemble.dim;
        r.seed = seed;
        r.sigma2 = sensitivity(ensemble.spec);
        r.velocity_variance = level_velocity_variance(ensemble.spec);
    }
    r.config_index = config_index;
    r.index = index;
    return r;
}

std::size_t RunManifest::total_completed() const
{
    std::size_t n = 0;
    for (const auto& e : ensembles)
        n += e.completed;
    return n;
}

std::size_t RunManifest::total_excluded() const
{
    std::size_t n = 0;
    for (const auto& e : ensembles)
        n += e.unresolved + e.errors;
    return n;
}

RunManifest read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw SweepError("cannot open manifest " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw SweepError("manifest " + path.string() + " is not valid JSON");
    try {
        RunManifest m;
        m.config_hash = j.at("config_hash").get<std::string>();
        m.software_version = j.at("software_version").get<std::string>();
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        m.record_bytes = j.at("record_bytes").get<std::uint64_t>();
        m.last_config = j.at("last").at("config").get<std::size_t>();
        m.last_index = j.at("last").at("index").get<std::size_t>();
        m.complete = j.at("complete").get<bool>();
        m.failed = j.at("failed").get<bool>();
        m.failure = j.at("failure").get<std::string>();
        for (const auto& e : j.at("ensembles")) {
            EnsembleProgress p;
            p.ensemble.spec.family = parse_family(e.at("family").get<std::string>());
            p.ensemble.spec.scale = e.at("scale").get<double>();
            p.ensemble.spec.spectrum_tol = e.at("spectrum_tol").get<double>();
            p.ensemble.spec.l_max_cap = e.at("l_max_cap").get<int>();
            p.ensemble.dim = e.at("M").get<int>();
            p.ensemble.realizations = e.at("realizations").get<std::size_t>();
            const auto range = e.at("completed").get<std::vector<std::size_t>>();
            if (range.size() != 2 || range[0] != 0)
                throw SweepError("manifest completed ranges must be [0, n)");
            p.completed = range[1];
            p.unresolved = e.at("unresolved").get<std::size_t>();
            p.errors = e.at("errors").get<std::size_t>();
            m.ensembles.push_back(p);
        }
        const auto& t = j.at("telemetry");
        m.wall_seconds = t.at("wall_seconds").get<double>();
        m.timed_realizations = t.at("realizations").get<std::size_t>();
        m.realization_seconds_mean = t.at("realization_seconds_mean").get<double>();
        m.realization_seconds_max = t.at("realization_seconds_max").get<double>();
        m.eigensolves = t.at("eigensolves").get<std::size_t>();
        return m;
    } catch (const json::exception& e) {
        throw SweepError("manifest " + path.string() + " is missing fields: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw SweepError("manifest " + path.string() + ": " + e.what());
    }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m)
{
    json ensembles = json::array();
    for (const auto& p : m.ensembles) {
        ensembles.push_back({
            {"family", std::string(to_string(p.ensemble.spec.family))},
            {"scale", p.ensemble.spec.scale},
            {"spectrum_tol", p.ensemble.spec.spectrum_tol},
            {"l_max_cap", p.ensemble.spec.l_max_cap},
            {"M", p.ensemble.dim},
            {"realizations", p.ensemble.realizations},
            {"completed", {0, p.completed}},
            {"unresolved", p.unresolved},
            {"errors", p.errors},
        });
    }
    json j = {
        {"config_hash", m.config_hash},
        {"software_version", m.software_version},
        {"master_seed", m.master_seed},
        {"record_bytes", m.record_bytes},
        {"last", {{"config", m.last_config}, {"index", m.last_index}}},
        {"complete", m.complete},
        {"failed", m.failed},
        {"failure", m.failure},
        {"ensembles", ensembles},
        {"telemetry",
         {{"wall_seconds", m.wall_seconds},
          {"realizations", m.timed_realizations},
          {"realization_seconds_mean", m.realization_seconds_mean},
          {"realization_seconds_max", m.realization_seconds_max},
          {"eigensolves", m.eigensolves}}},
    };
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << j.dump(2) << "\n";
        out.flush();
        if (!out)
            throw SweepError("cannot write manifest " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw SweepError("cannot replace manifest " + path.string() + ": " + ec.message());
}

RunManifest run_sweep(const SweepConfig& config, const RunOptions& options)
{
    config.validate();
    const auto start = Clock::now();
    if (config.records.has_parent_path())
        std::filesystem::create_directories(config.records.parent_path());

    RunManifest manifest = prepare_resume(config);
    const double wall_before = manifest.wall_seconds;

    std::vector<Task> tasks;
    for (std::size_t c = 0; c < config.ensembles.size(); ++c)
        for (std::size_t i = manifest.ensembles[c].completed; i < config.ensembles[c].realizations; ++i)
            tasks.push_back({c, i});
    const std::size_t goal =
        options.stop_after > 0 ? std::min(options.stop_after, tasks.size()) : tasks.size();

    RecordWriter writer(config.records, manifest.record_bytes);
    std::size_t since_checkpoint = 0;

    auto checkpoint = [&] {
        writer.sync();
        manifest.record_bytes = writer.bytes();
        manifest.wall_seconds = wall_before + std::chrono::duration<double>(Clock::now() - start).count();
        write_manifest(config.manifest_path(), manifest);
        since_checkpoint = 0;
    };

    auto commit = [&](const Task& task, Outcome& outcome, std::size_t done) {
        if (outcome.failure)
            std::rethrow_exception(outcome.failure);
        writer.append(outcome.line);
        auto& p = manifest.ensembles[task.config];
        p.completed = task.index + 1;
        if (!outcome.record.error.empty())
            ++p.errors;
        else if (outcome.record.unresolved)
            ++p.unresolved;
        manifest.last_config = task.config;
        manifest.last_index = task.index;
        const auto n = static_cast<double>(++manifest.timed_realizations);
        manifest.realization_seconds_mean += (outcome.seconds - manifest.realization_seconds_mean) / n;
        manifest.realization_seconds_max = std::max(manifest.realization_seconds_max, outcome.seconds);
        manifest.eigensolves += outcome.record.timings.eigensolves;
        if (++since_checkpoint >= config.checkpoint_interval)
            checkpoint();
        if (options.on_record)
            options.on_record({done, goal, &outcome.record});
    };

    if (config.workers == 1 || goal <= 1) {
        for (std::size_t t = 0; t < goal; ++t) {
            auto outcome = execute(config, tasks[t]);
            commit(tasks[t], outcome, t + 1);
        }
    } else {
        std::mutex mutex;
        std::condition_variable ready, space;
        std::map<std::size_t, Outcome> finished;
        std::size_t next = 0, committed = 0;
        bool stop = false;
        const std::size_t window = 4 * static_cast<std::size_t>(config.workers);

        auto worker = [&] {
            for (;;) {
                std::size_t t;
                {
                    std::unique_lock lock(mutex);
                    space.wait(lock, [&] { return stop || next >= goal || next < committed + window; });
                    if (stop || next >= goal)
                        return;
                    t = next++;
                }
                auto outcome = execute(config, tasks[t]);
                {
                    std::lock_guard lock(mutex);
                    finished.emplace(t, std::move(outcome));
                }
                ready.notify_all();
            }
        };

        std::vector<std::jthread> pool;
        auto halt = [&] {
            {
                std::lock_guard lock(mutex);
                stop = true;
            }
            space.notify_all();
            pool.clear();
        };
        try {
            for (int w = 0; w < config.workers; ++w)
                pool.emplace_back(worker);
            for (std::size_t t = 0; t < goal; ++t) {
                Outcome outcome;
                {
                    std::unique_lock lock(mutex);
                    ready.wait(lock, [&] { return finished.count(t) > 0; });
                    outcome = std::move(finished.at(t));
                    finished.erase(t);
                }
                commit(tasks[t], outcome, t + 1);
                {
                    std::lock_guard lock(mutex);
                    committed = t + 1;
                }
                space.notify_all();
            }
        } catch (...) {
            halt();
            throw;
        }
        halt();
    }

    manifest.complete = true;
    for (std::size_t c = 0; c < config.ensembles.size(); ++c)
        if (manifest.ensembles[c].completed < config.ensembles[c].realizations)
            manifest.complete = false;
    if (manifest.complete)
        check_exclusions(manifest, config.max_unresolved_fraction);
    checkpoint();
    return manifest;
}

}  // namespace chernstat
