// Command-line front end: spectrum, run, analyze, predict, export-plot.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chernstat/config.hpp"
#include "chernstat/correlation.hpp"
#include "chernstat/figures.hpp"
#include "chernstat/harness.hpp"
#include "chernstat/records.hpp"
#include "chernstat/stats.hpp"

using namespace chernstat;

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;

/// Usage errors detected after CLI parsing (bad combinations, bad config).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config;
    std::vector<std::string> records;
    std::string out;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
};

struct StatsFlags {
    double bulk_fraction = 0.5;
    std::string sigma = "velocity";
    double universal = 1.67;
    std::size_t resamples = 1000;
    bool measured_variance = false;
    std::vector<double> eps_rho;

    StatsOptions options(const Globals& g) const
    {
        StatsOptions o;
        o.bulk_fraction = bulk_fraction;
        o.sigma = parse_sigma_convention(sigma);
        o.universal_constant = universal;
        o.bootstrap.resamples = resamples;
        o.bootstrap.workers = g.workers.value_or(1);
        return o;
    }

    void add_to(CLI::App* app)
    {
        app->add_option("--bulk-fraction", bulk_fraction, "Central fraction of bands treated as bulk")
            ->check(CLI::Range(0.0, 1.0));
        app->add_option("--sigma", sigma, "sigma^2 convention: velocity (-c''(0)) or sensitivity (-c''(0)/2)")
            ->check(CLI::IsMember({"velocity", "sensitivity"}));
        app->add_option("--I", universal, "Universal constant for predictions (1.67 or 1.69)");
        app->add_option("--bootstrap", resamples, "Bootstrap resamples (>= 1000 for reported intervals)")
            ->check(CLI::PositiveNumber);
        app->add_flag("--measured-variance", measured_variance,
                      "Use the measured bulk <N^2> instead of the universal-constant value in predictions");
        app->add_option("--eps-rho", eps_rho, "Window widths eps*rho for weighted-variance tables")->delimiter(',');
    }
};

/// Writes `text` to --out when given, otherwise to stdout.
void emit(const Globals& g, const std::string& text)
{
    if (g.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(g.out, std::ios::trunc);
    out << text;
    if (!out)
        throw std::runtime_error("cannot write " + g.out);
}

std::vector<EnsembleRecord> load_all(const Globals& g)
{
    if (g.records.empty())
        throw UsageError("no record files given (use --records)");
    std::vector<EnsembleRecord> all;
    for (const auto& path : g.records) {
        auto r = read_records(path);
        all.insert(all.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    return all;
}

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string band_list(const std::vector<int>& bands)
{
    std::string s;
    for (int b : bands)
        s += (s.empty() ? "" : ",") + std::to_string(b + 1);
    return s;
}

int cmd_spectrum(const std::string& family, double scale, double tol, int cap)
{
    CorrelationSpec spec{parse_family(family), scale, tol, cap};
    spec.validate();
    if (spec.family == Family::four_matrix) {
        std::cout << "four_matrix fields are exact finite-rank combinations of four GUE draws; "
                     "no angular spectrum is needed\n"
                  << "sigma2 (sensitivity) = " << fmt(sensitivity(spec))
                  << ", level velocity variance = " << fmt(level_velocity_variance(spec)) << "\n";
        return 0;
    }
    try {
        const auto s = legendre_spectrum(spec, tol);
        std::cout << "family " << family << " scale " << fmt(scale) << "\n"
                  << "l_max " << s.l_max << "\n"
                  << "truncation_residual " << fmt(s.truncation_residual) << " (tol " << fmt(tol) << ")\n"
                  << "clipped_mass " << fmt(s.clipped_mass) << "\n"
                  << "quadrature_nodes " << s.quadrature_nodes << "\n"
                  << "sigma2 (sensitivity) " << fmt(sensitivity(spec)) << ", level velocity variance "
                  << fmt(level_velocity_variance(spec)) << "\n"
                  << "leading coefficients:\n";
        for (int l = 0; l <= std::min(s.l_max, 9); ++l)
            std::cout << "  b_" << l << " = " << fmt(s.coefficients[l]) << "\n";
    } catch (const SpectrumError& e) {
        std::cerr << "spectrum failed: " << e.what() << "\n";
        return kRuntime;
    }
    return 0;
}

int cmd_run(const Globals& g, bool quiet)
{
    if (g.config.empty())
        throw UsageError("run needs --config");
    SweepConfig config;
    try {
        config = load_sweep_config(g.config);
        apply_environment(config);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    if (g.workers)
        config.workers = *g.workers;
    if (g.seed)
        config.master_seed = *g.seed;
    if (!g.out.empty())
        config.records = g.out;
    if (config.workers < 1)
        throw UsageError("--workers must be at least 1");

    RunOptions options;
    if (!quiet) {
        options.on_record = [](const SweepProgress& p) {
            const auto& r = *p.last;
            std::fprintf(stderr, "[%zu/%zu] %s/%g/M%d #%zu%s\n", p.done, p.total,
                         std::string(to_string(r.spec.family)).c_str(), r.spec.scale, r.dim, r.index,
                         !r.error.empty() ? " discarded" : r.unresolved ? " unresolved" : "");
        };
    }
    const auto m = run_sweep(config, options);
    std::cout << "records " << config.records.string() << "\n"
              << "manifest " << config.manifest_path().string() << "\n"
              << "config hash " << m.config_hash << "\n";
    for (const auto& p : m.ensembles)
        std::cout << "  " << to_string(p.ensemble.spec.family) << " scale " << fmt(p.ensemble.spec.scale) << " M "
                  << p.ensemble.dim << ": " << p.completed << "/" << p.ensemble.realizations << " done, "
                  << p.unresolved << " unresolved, " << p.errors << " discarded\n";
    std::cout << "wall " << fmt(m.wall_seconds) << " s, mean " << fmt(m.realization_seconds_mean)
              << " s per realization\n";
    if (m.failed) {
        std::cerr << "sweep failed: " << m.failure << "\n";
        return kRuntime;
    }
    return 0;
}

int cmd_analyze(const Globals& g, const StatsFlags& flags, bool per_band, bool pooled)
{
    const auto options = flags.options(g);
    auto all = load_all(g);
    std::vector<Ensemble> groups;
    if (pooled) {
        Ensemble e;
        for (auto& r : all) {
            if (r.usable())
                e.records.push_back(std::move(r));
            else
                ++e.excluded;
        }
        if (e.records.empty())
            throw std::runtime_error("no usable records");
        e.key = key_of(e.records.front());
        for (const auto& r : e.records)
            if (r.dim != e.key.dim)
                throw StatsError("pooled records mix different matrix dimensions (M " + std::to_string(e.key.dim) +
                                 " and " + std::to_string(r.dim) + ")");
        groups.push_back(std::move(e));
    } else {
        groups = group_records(all);
    }

    std::ostringstream o;
    o << "# analyze: sigma " << to_string(options.sigma) << ", bulk fraction " << fmt(options.bulk_fraction)
      << ", bootstrap " << options.bootstrap.resamples << " resamples, 95% intervals\n";
    for (const auto& e : groups) {
        o << "# ensemble " << (pooled ? std::string("pooled") : e.key.label()) << ": bulk bands "
          << band_list(bulk_bands(e.key.dim, options.bulk_fraction)) << ", " << e.records.size() << " records, "
          << e.excluded << " excluded\n";
    }
    o << "ensemble\trecords\texcluded\trho_sigma\tscaled_variance\tsv_lo\tsv_hi\tkurtosis\tk_lo\tk_hi\tg1\tg1_lo\tg1_"
         "hi\tg2\tg2_lo\tg2_hi\tg3\tg3_lo\tg3_hi\n";
    std::ostringstream bands, weighted;
    for (const auto& e : groups) {
        if (e.records.size() < 2) {
            o << "# " << e.key.label() << ": fewer than two usable records, skipped\n";
            continue;
        }
        const auto s = summarize(e, options, per_band);
        o << (pooled ? std::string("pooled") : e.key.label()) << "\t" << s.records << "\t" << s.excluded << "\t"
          << fmt(s.rho_sigma) << "\t" << fmt(s.scaled_variance.value) << "\t" << fmt(s.scaled_variance.ci.lo) << "\t"
          << fmt(s.scaled_variance.ci.hi);
        if (s.kurtosis)
            o << "\t" << fmt(s.kurtosis->value) << "\t" << fmt(s.kurtosis->ci.lo) << "\t" << fmt(s.kurtosis->ci.hi);
        else
            o << "\tnan\tnan\tnan";
        for (std::size_t k = 0; k < 3; ++k) {
            if (k < s.gap_correlation.size())
                o << "\t" << fmt(s.gap_correlation[k].value) << "\t" << fmt(s.gap_correlation[k].ci.lo) << "\t"
                  << fmt(s.gap_correlation[k].ci.hi);
            else
                o << "\tnan\tnan\tnan";
        }
        o << "\n";
        if (per_band) {
            for (int n = 0; n < e.key.dim; ++n) {
                const auto& v = s.band_scaled_variance[n];
                bands << e.key.label() << "\t" << n + 1 << "\t" << fmt(v.value) << "\t" << fmt(v.ci.lo) << "\t"
                      << fmt(v.ci.hi);
                if (const auto& k = s.band_kurtosis[n])
                    bands << "\t" << fmt(k->value) << "\t" << fmt(k->ci.lo) << "\t" << fmt(k->ci.hi) << "\n";
                else
                    bands << "\tnan\tnan\tnan\n";
            }
        }
        if (!flags.eps_rho.empty()) {
            const auto c =
                weighted_variance_curve(e.records, flags.eps_rho, 0.0, options, flags.measured_variance);
            for (const auto& p : c.points)
                weighted << e.key.label() << "\t" << fmt(p.eps_rho) << "\t" << fmt(p.eps) << "\t"
                         << fmt(p.measured.estimate.value) << "\t" << fmt(p.measured.estimate.ci.lo) << "\t"
                         << fmt(p.measured.estimate.ci.hi) << "\t" << fmt(p.predicted_exact) << "\t"
                         << fmt(p.predicted_asymptotic) << "\t" << fmt(p.ratio) << "\t"
                         << (p.measured.below_spacing ? "below_spacing" : "ok") << "\n";
        }
    }
    if (per_band)
        o << "\nensemble\tband\tscaled_variance\tsv_lo\tsv_hi\tkurtosis\tk_lo\tk_hi\n" << bands.str();
    if (!flags.eps_rho.empty())
        o << "\nensemble\teps_rho\teps\tweighted_variance\twv_lo\twv_hi\tpredicted_exact\tpredicted_"
             "asymptotic\tratio\twindow\n"
          << weighted.str();
    emit(g, o.str());
    return 0;
}

int cmd_predict(const Globals& g, std::vector<double> eps, const std::vector<double>& eps_rho, double rho,
                double sigma, double area, double universal, std::optional<double> chern_variance,
                const std::string& mode)
{
    if (eps.empty() == eps_rho.empty())
        throw UsageError("give exactly one of --eps or --eps-rho");
    if (!(rho > 0.0 && sigma > 0.0 && area > 0.0))
        throw UsageError("--rho, --sigma and --area must be positive");
    for (double er : eps_rho)
        eps.push_back(er / rho);
    for (double e : eps)
        if (!(e > 0.0))
            throw UsageError("window widths must be positive");
    const double nvar = chern_variance.value_or(universal_chern_variance(rho, sigma, area, universal));
    std::ostringstream o;
    o << "# predict: rho " << fmt(rho) << ", sigma " << fmt(sigma) << ", A " << fmt(area) << ", I " << fmt(universal)
      << ", <N^2> " << fmt(nvar) << (chern_variance ? " (given)" : " (universal)") << "\n";
    o << "eps\teps_rho\tX\tF";
    if (mode != "asymptotic")
        o << "\texact";
    if (mode != "exact")
        o << "\tasymptotic";
    if (mode == "both")
        o << "\texact_over_asymptotic";
    o << "\n";
    for (double e : eps) {
        const double x = 1.0 / (2.0 * e * e * rho * rho);
        const double ex = predict_weighted_variance(e, rho, sigma, area, nvar, universal, PredictionMode::exact);
        const double as = predict_weighted_variance(e, rho, sigma, area, nvar, universal, PredictionMode::asymptotic);
        o << fmt(e) << "\t" << fmt(e * rho) << "\t" << fmt(x) << "\t" << fmt(theory_F(x));
        if (mode != "asymptotic")
            o << "\t" << fmt(ex);
        if (mode != "exact")
            o << "\t" << fmt(as);
        if (mode == "both")
            o << "\t" << fmt(ex / as);
        o << "\n";
    }
    emit(g, o.str());
    return 0;
}

int cmd_export(const Globals& g, const std::string& figure, const StatsFlags& flags)
{
    FigureOptions fo;
    fo.stats = flags.options(g);
    fo.measured_chern_variance = flags.measured_variance;
    if (!flags.eps_rho.empty())
        fo.eps_rho = flags.eps_rho;
    const auto groups = group_records(load_all(g));
    emit(g, export_figure(figure, groups, fo).to_text());
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monte-Carlo Chern-number statistics of parametric random-matrix fields on the sphere"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    Globals g;
    app.add_option("--config", g.config, "Sweep config file");
    app.add_option("--records", g.records, "Record files (JSON lines); repeatable");
    app.add_option("--out", g.out, "Output path (records for run, table otherwise; default stdout)");
    app.add_option("--workers", g.workers, "Worker threads (overrides CHERN_WORKERS and the config)")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "Master seed (overrides CHERN_SEED and the config)");

    auto* spectrum = app.add_subcommand("spectrum", "Angular power spectrum of a correlation family");
    std::string family = "gaussian";
    double scale = 1.0, tol = 1e-8;
    int cap = 4096;
    spectrum->add_option("--family", family, "gaussian | lorentzian | four_matrix")
        ->check(CLI::IsMember({"gaussian", "lorentzian", "four_matrix"}));
    spectrum->add_option("--scale", scale, "r, l or alpha")->required();
    spectrum->add_option("--tol", tol, "Truncation tolerance");
    spectrum->add_option("--l-max-cap", cap, "Largest admissible degree");

    auto* run = app.add_subcommand("run", "Run or resume a Monte-Carlo sweep");
    bool quiet = false;
    run->add_flag("--quiet", quiet, "No per-realization progress on stderr");
    run->footer("Config keys:\n" + config_key_help() +
                "\nEnvironment: CHERN_WORKERS, CHERN_SEED (the --workers/--seed flags take precedence).");

    auto* analyze = app.add_subcommand("analyze", "Summary statistics of record files");
    StatsFlags analyze_flags;
    analyze_flags.add_to(analyze);
    bool per_band = false, pooled = false;
    analyze->add_flag("--per-band", per_band, "Also tabulate every band");
    analyze->add_flag("--pooled", pooled, "Treat all records as one ensemble (must share M)");

    auto* predict = app.add_subcommand("predict", "Independent-gap predictions for the weighted Chern variance");
    std::vector<double> eps, eps_rho;
    double rho = 1.0, sigma = 1.0, area = 4.0 * std::numbers::pi, universal = 1.67;
    std::optional<double> chern_variance;
    std::string mode = "both";
    predict->add_option("--eps", eps, "Window widths")->delimiter(',');
    predict->add_option("--eps-rho", eps_rho, "Window widths in units of the level spacing")->delimiter(',');
    predict->add_option("--rho", rho, "Density of states")->required();
    predict->add_option("--sigma", sigma, "Level-velocity scale sigma")->required();
    predict->add_option("--area", area, "Parameter-space area (4 pi for the sphere)");
    predict->add_option("--I", universal, "Universal constant");
    predict->add_option("--chern-variance", chern_variance, "Use this <N^2> instead of the universal value");
    predict->add_option("--mode", mode, "exact | asymptotic | both")
        ->check(CLI::IsMember({"exact", "asymptotic", "both"}));

    auto* exportp = app.add_subcommand("export-plot", "Plot-ready table for one figure");
    std::string figure;
    StatsFlags export_flags;
    export_flags.add_to(exportp);
    exportp->add_option("figure", figure, "fig1 | fig4 | fig5 | fig6 | fig8 | fig11")
        ->required()
        ->check(CLI::IsMember(figure_ids()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (*spectrum)
            return cmd_spectrum(family, scale, tol, cap);
        if (*run)
            return cmd_run(g, quiet);
        if (*analyze)
            return cmd_analyze(g, analyze_flags, per_band, pooled);
        if (*predict)
            return cmd_predict(g, eps, eps_rho, rho, sigma, area, universal, chern_variance, mode);
        if (*exportp)
            return cmd_export(g, figure, export_flags);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kUsage;
}
