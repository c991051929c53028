#include "chernstat/records.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "chernstat/chern.hpp"
#include "chernstat/spectral.hpp"

namespace chernstat {

namespace {

using nlohmann::json;

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json to_json(const EnsembleRecord& r)
{
    json timings = {
        {"eigensolves", r.timings.eigensolves},
        {"vertices", r.timings.vertices},
        {"triangles", r.timings.triangles},
        {"refinement_rounds", r.timings.refinement_rounds},
        {"max_depth", r.timings.max_depth},
        {"depth_histogram", r.timings.depth_histogram},
    };
    json j = {
        {"family", std::string(to_string(r.spec.family))},
        {"scale", r.spec.scale},
        {"spectrum_tol", r.spec.spectrum_tol},
        {"l_max_cap", r.spec.l_max_cap},
        {"M", r.dim},
        {"seed", r.seed},
        {"config", r.config_index},
        {"index", r.index},
        {"N", r.band},
        {"G", r.gap},
        {"mean_E", r.mean_energy},
        {"rho", r.density},
        {"sigma2", r.sigma2},
        {"velocity_variance", r.velocity_variance},
        {"unresolved", r.unresolved},
        {"max_residual", r.max_residual},
        {"timings", timings},
    };
    if (!r.error.empty())
        j["error"] = r.error;
    return j;
}

template <class T>
T field(const json& j, const char* name)
{
    const auto it = j.find(name);
    if (it == j.end())
        throw RecordError(std::string("record is missing field '") + name + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw RecordError(std::string("record field '") + name + "' has the wrong type");
    }
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

EnsembleRecord make_record(const CorrelationSpec& spec, int dim, std::uint64_t seed, const ChernResult& chern,
                           const BandDiagnostics& diagnostics)
{
    EnsembleRecord r;
    r.spec = spec;
    r.dim = dim;
    r.seed = seed;
    r.band = chern.band;
    r.gap = chern.gap;
    r.mean_energy = diagnostics.mean_energy;
    r.density = diagnostics.density;
    r.sigma2 = sensitivity(spec);
    r.velocity_variance = level_velocity_variance(spec);
    r.unresolved = !chern.resolved;
    r.max_residual = chern.max_residual;
    r.timings.eigensolves = chern.eigensolves;
    r.timings.vertices = chern.vertices;
    r.timings.triangles = chern.triangles;
    r.timings.refinement_rounds = chern.refinement_rounds;
    r.timings.max_depth = chern.max_depth_used;
    r.timings.depth_histogram = chern.depth_histogram;
    return r;
}

std::string to_json_line(const EnsembleRecord& record)
{
    json j = to_json(record);
    const std::string body = j.dump();
    j["checksum"] = hex64(fnv1a64(body));
    return j.dump();
}

EnsembleRecord parse_record(std::string_view line)
{
    json j = json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw RecordError("record is not a JSON object");
    const auto sum = field<std::string>(j, "checksum");
    j.erase("checksum");
    if (hex64(fnv1a64(j.dump())) != sum)
        throw RecordError("record checksum mismatch");

    EnsembleRecord r;
    try {
        r.spec.family = parse_family(field<std::string>(j, "family"));
    } catch (const std::invalid_argument& e) {
        throw RecordError(e.what());
    }
    r.spec.scale = field<double>(j, "scale");
    r.spec.spectrum_tol = field<double>(j, "spectrum_tol");
    r.spec.l_max_cap = field<int>(j, "l_max_cap");
    r.dim = field<int>(j, "M");
    r.seed = field<std::uint64_t>(j, "seed");
    r.config_index = field<std::size_t>(j, "config");
    r.index = field<std::size_t>(j, "index");
    r.band = field<std::vector<int>>(j, "N");
    r.gap = field<std::vector<int>>(j, "G");
    r.mean_energy = field<std::vector<double>>(j, "mean_E");
    r.density = field<std::vector<double>>(j, "rho");
    r.sigma2 = field<double>(j, "sigma2");
    r.velocity_variance = field<double>(j, "velocity_variance");
    r.unresolved = field<bool>(j, "unresolved");
    r.max_residual = field<double>(j, "max_residual");
    if (j.contains("error"))
        r.error = field<std::string>(j, "error");
    const auto t = field<json>(j, "timings");
    r.timings.eigensolves = field<std::size_t>(t, "eigensolves");
    r.timings.vertices = field<std::size_t>(t, "vertices");
    r.timings.triangles = field<std::size_t>(t, "triangles");
    r.timings.refinement_rounds = field<std::size_t>(t, "refinement_rounds");
    r.timings.max_depth = field<int>(t, "max_depth");
    r.timings.depth_histogram = field<std::vector<std::size_t>>(t, "depth_histogram");

    if (r.dim < 2)
        throw RecordError("record has M < 2");
    const auto m = static_cast<std::size_t>(r.dim);
    if (r.error.empty() && (r.band.size() != m || r.gap.size() != m + 1 || r.mean_energy.size() != m ||
                            r.density.size() != m))
        throw RecordError("record vector lengths do not match M");
    return r;
}

std::vector<EnsembleRecord> read_records(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw RecordError("cannot open record file " + path.string());
    std::vector<EnsembleRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            out.push_back(parse_record(line));
        } catch (const RecordError& e) {
            throw RecordError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::string EnsembleKey::label() const
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s/%.6g/M%d", std::string(to_string(family)).c_str(), scale, dim);
    return buf;
}

EnsembleKey key_of(const EnsembleRecord& record) { return {record.spec.family, record.spec.scale, record.dim}; }

std::vector<Ensemble> group_records(const std::vector<EnsembleRecord>& records)
{
    std::map<EnsembleKey, Ensemble> groups;
    for (const auto& r : records) {
        auto& g = groups[key_of(r)];
        g.key = key_of(r);
        if (r.usable())
            g.records.push_back(r);
        else
            ++g.excluded;
    }
    std::vector<Ensemble> out;
    for (auto& [key, g] : groups) {
        std::sort(g.records.begin(), g.records.end(), [](const auto& a, const auto& b) {
            return a.seed != b.seed ? a.seed < b.seed : a.index < b.index;
        });
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace chernstat
