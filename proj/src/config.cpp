#include "chernstat/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace chernstat {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view section, std::string_view key, std::string_view value,
                            std::string_view what)
{
    throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(section) + "." +
                      std::string(key) + ": expected " + std::string(what));
}

template <class T>
T parse_number(std::string_view section, std::string_view key, std::string_view value, std::string_view what)
{
    T out{};
    int base = 10;
    std::string_view digits = value;
    if constexpr (std::is_integral_v<T>) {
        if (digits.starts_with("0x") || digits.starts_with("0X")) {
            digits.remove_prefix(2);
            base = 16;
        }
    }
    std::from_chars_result r;
    if constexpr (std::is_integral_v<T>)
        r = std::from_chars(digits.data(), digits.data() + digits.size(), out, base);
    else
        r = std::from_chars(digits.data(), digits.data() + digits.size(), out);
    if (digits.empty() || r.ec != std::errc() || r.ptr != digits.data() + digits.size())
        bad_value(section, key, value, what);
    return out;
}

bool parse_bool(std::string_view section, std::string_view key, std::string_view value)
{
    if (value == "true" || value == "yes" || value == "1")
        return true;
    if (value == "false" || value == "no" || value == "0")
        return false;
    bad_value(section, key, value, "true or false");
}

std::string fmt_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct KeyDoc {
    const char* section;
    const char* key;
    const char* doc;
};

constexpr KeyDoc kKeys[] = {
    {"sweep", "seed", "master seed (64-bit, decimal or 0x hex); CHERN_SEED overrides"},
    {"sweep", "workers", "worker threads (>= 1); CHERN_WORKERS overrides"},
    {"sweep", "checkpoint_interval", "records between manifest checkpoints (>= 1)"},
    {"sweep", "max_unresolved_fraction", "fail an ensemble above this excluded fraction (default 0.001)"},
    {"refine", "initial_depth", "icosphere subdivision depth of the starting mesh"},
    {"refine", "theta_max", "largest admissible plaquette or link phase, radians"},
    {"refine", "eta_min", "smallest admissible |det S| link magnitude"},
    {"refine", "max_depth", "deepest refinement level before a realization is unresolved"},
    {"refine", "residual_tol", "largest accepted distance of a gap sum from an integer"},
    {"refine", "check_bands", "also test single-band links (true/false)"},
    {"refine", "continuity_factor", "refine edges whose level jump exceeds factor*sigma*length; 0 disables"},
    {"refine", "gap_factor", "refine triangles whose vertex gaps fall below factor*sigma*edge; 0 disables"},
    {"output", "records", "record file (JSON lines)"},
    {"output", "manifest", "manifest file (default: <records>.manifest.json)"},
    {"config", "family", "gaussian | lorentzian | four_matrix"},
    {"config", "scale", "Gaussian width r, Lorentzian width l, or four-matrix angle alpha"},
    {"config", "M", "matrix dimension (>= 2)"},
    {"config", "realizations", "number of realizations (>= 1)"},
    {"config", "spectrum_tol", "angular-spectrum truncation tolerance"},
    {"config", "l_max_cap", "largest admissible harmonic degree"},
};

bool known_key(std::string_view section, std::string_view key)
{
    for (const auto& k : kKeys)
        if (section == k.section && key == k.key)
            return true;
    return false;
}

}  // namespace

std::filesystem::path SweepConfig::manifest_path() const
{
    if (!manifest.empty())
        return manifest;
    auto p = records;
    p += ".manifest.json";
    return p;
}

void SweepConfig::validate() const
{
    if (ensembles.empty())
        throw ConfigError("sweep has no [config] ensembles");
    for (std::size_t i = 0; i < ensembles.size(); ++i) {
        const auto& e = ensembles[i];
        const std::string where = "config #" + std::to_string(i + 1) + ": ";
        if (e.dim < 2)
            throw ConfigError(where + "M must be at least 2");
        if (e.realizations < 1)
            throw ConfigError(where + "realizations must be at least 1");
        try {
            e.spec.validate();
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(where + ex.what());
        }
    }
    try {
        policy.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("refine: ") + ex.what());
    }
    if (workers < 1)
        throw ConfigError("sweep.workers must be at least 1");
    if (checkpoint_interval < 1)
        throw ConfigError("sweep.checkpoint_interval must be at least 1");
    if (!(max_unresolved_fraction >= 0.0 && max_unresolved_fraction <= 1.0))
        throw ConfigError("sweep.max_unresolved_fraction must lie in [0, 1]");
    if (records.empty())
        throw ConfigError("output.records must not be empty");
}

SweepConfig parse_sweep_config(std::string_view text)
{
    SweepConfig c;
    std::string section;
    std::size_t lineno = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto raw = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++lineno;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';')
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section != "sweep" && section != "refine" && section != "output" && section != "config")
                throw ConfigError("unknown section [" + section + "]");
            if (section == "config")
                c.ensembles.emplace_back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("key '" + std::string(key) + "' appears before any section");
        if (!known_key(section, key))
            throw ConfigError("unknown config key '" + std::string(key) + "' in [" + section + "]");

        if (section == "sweep") {
            if (key == "seed")
                c.master_seed = parse_number<std::uint64_t>(section, key, value, "an unsigned 64-bit integer");
            else if (key == "workers")
                c.workers = parse_number<int>(section, key, value, "an integer");
            else if (key == "checkpoint_interval")
                c.checkpoint_interval = parse_number<std::size_t>(section, key, value, "an integer");
            else
                c.max_unresolved_fraction = parse_number<double>(section, key, value, "a number");
        } else if (section == "refine") {
            auto& p = c.policy;
            if (key == "initial_depth")
                p.initial_depth = parse_number<int>(section, key, value, "an integer");
            else if (key == "theta_max")
                p.theta_max = parse_number<double>(section, key, value, "a number");
            else if (key == "eta_min")
                p.eta_min = parse_number<double>(section, key, value, "a number");
            else if (key == "max_depth")
                p.max_depth = parse_number<int>(section, key, value, "an integer");
            else if (key == "residual_tol")
                p.residual_tol = parse_number<double>(section, key, value, "a number");
            else if (key == "check_bands")
                p.check_bands = parse_bool(section, key, value);
            else if (key == "continuity_factor")
                p.continuity_factor = parse_number<double>(section, key, value, "a number");
            else
                p.gap_factor = parse_number<double>(section, key, value, "a number");
        } else if (section == "output") {
            if (key == "records")
                c.records = std::string(value);
            else
                c.manifest = std::string(value);
        } else {
            auto& e = c.ensembles.back();
            if (key == "family") {
                try {
                    e.spec.family = parse_family(value);
                } catch (const std::invalid_argument&) {
                    bad_value(section, key, value, "gaussian, lorentzian or four_matrix");
                }
            } else if (key == "scale") {
                e.spec.scale = parse_number<double>(section, key, value, "a number");
            } else if (key == "M") {
                e.dim = parse_number<int>(section, key, value, "an integer");
            } else if (key == "realizations") {
                e.realizations = parse_number<std::size_t>(section, key, value, "an integer");
            } else if (key == "spectrum_tol") {
                e.spec.spectrum_tol = parse_number<double>(section, key, value, "a number");
            } else {
                e.spec.l_max_cap = parse_number<int>(section, key, value, "an integer");
            }
        }
    }
    c.validate();
    return c;
}

SweepConfig load_sweep_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto c = parse_sweep_config(buf.str());
    const auto base = path.parent_path();
    if (c.records.is_relative())
        c.records = base / c.records;
    if (!c.manifest.empty() && c.manifest.is_relative())
        c.manifest = base / c.manifest;
    return c;
}

std::string format_sweep_config(const SweepConfig& c)
{
    std::ostringstream o;
    const auto& p = c.policy;
    o << "[sweep]\n"
      << "seed = " << c.master_seed << "\n"
      << "workers = " << c.workers << "\n"
      << "checkpoint_interval = " << c.checkpoint_interval << "\n"
      << "max_unresolved_fraction = " << fmt_double(c.max_unresolved_fraction) << "\n\n"
      << "[refine]\n"
      << "initial_depth = " << p.initial_depth << "\n"
      << "theta_max = " << fmt_double(p.theta_max) << "\n"
      << "eta_min = " << fmt_double(p.eta_min) << "\n"
      << "max_depth = " << p.max_depth << "\n"
      << "residual_tol = " << fmt_double(p.residual_tol) << "\n"
      << "check_bands = " << (p.check_bands ? "true" : "false") << "\n"
      << "continuity_factor = " << fmt_double(p.continuity_factor) << "\n"
      << "gap_factor = " << fmt_double(p.gap_factor) << "\n\n"
      << "[output]\n"
      << "records = " << c.records.string() << "\n";
    if (!c.manifest.empty())
        o << "manifest = " << c.manifest.string() << "\n";
    for (const auto& e : c.ensembles) {
        o << "\n[config]\n"
          << "family = " << to_string(e.spec.family) << "\n"
          << "scale = " << fmt_double(e.spec.scale) << "\n"
          << "M = " << e.dim << "\n"
          << "realizations = " << e.realizations << "\n"
          << "spectrum_tol = " << fmt_double(e.spec.spectrum_tol) << "\n"
          << "l_max_cap = " << e.spec.l_max_cap << "\n";
    }
    return o.str();
}

void apply_environment(SweepConfig& config)
{
    if (const char* w = std::getenv("CHERN_WORKERS"); w && *w)
        config.workers = parse_number<int>("environment", "CHERN_WORKERS", w, "an integer");
    if (const char* s = std::getenv("CHERN_SEED"); s && *s)
        config.master_seed = parse_number<std::uint64_t>("environment", "CHERN_SEED", s, "an unsigned 64-bit integer");
    if (config.workers < 1)
        throw ConfigError("CHERN_WORKERS must be at least 1");
}

std::string config_key_help()
{
    std::string out;
    for (const auto& k : kKeys) {
        std::string name = std::string(k.section) + "." + k.key;
        name.resize(std::max<std::size_t>(name.size() + 2, 32), ' ');
        out += "  " + name + k.doc + "\n";
    }
    return out;
}

}  // namespace chernstat
