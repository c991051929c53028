#include "chernstat/figures.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace chernstat {

namespace {

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string series_of(const Ensemble& e)
{
    return std::string(to_string(e.key.family)) + "/M" + std::to_string(e.key.dim) + "/" + fmt(e.key.scale);
}

void fig1(FigureTable& t, const std::vector<Ensemble>& ensembles, const FigureOptions& o)
{
    t.comments.push_back("bulk-band scaled variance 2 pi <N^2> / (rho^2 sigma^2 A) against rho sigma");
    t.columns = {"rho_sigma", "scaled_variance", "ci_half_width", "ci_lo", "ci_hi", "records"};
    for (const auto& e : ensembles) {
        const auto bands = bulk_bands(e.key.dim, o.stats.bulk_fraction);
        const auto v = scaled_variance(e.records, bands, o.stats);
        t.rows.push_back({{rho_sigma(e.records, bands, o.stats), v.value, v.ci.half_width(), v.ci.lo, v.ci.hi,
                           static_cast<double>(v.count)},
                          series_of(e)});
    }
}

void fig11(FigureTable& t, const std::vector<Ensemble>& ensembles, const FigureOptions& o)
{
    t.comments.push_back("bulk-band excess kurtosis of N / (rho sigma) against rho sigma");
    t.columns = {"rho_sigma", "kurtosis", "ci_half_width", "ci_lo", "ci_hi", "records"};
    for (const auto& e : ensembles) {
        const auto bands = bulk_bands(e.key.dim, o.stats.bulk_fraction);
        try {
            const auto k = kurtosis(e.records, bands, o.stats);
            t.rows.push_back({{rho_sigma(e.records, bands, o.stats), k.value, k.ci.half_width(), k.ci.lo, k.ci.hi,
                               static_cast<double>(k.count)},
                              series_of(e)});
        } catch (const StatsError&) {
            t.comments.push_back("skipped " + series_of(e) + ": zero variance");
        }
    }
}

void fig4(FigureTable& t, const std::vector<Ensemble>& ensembles, const FigureOptions&)
{
    t.comments.push_back("covariance of gap Chern numbers G_n, G_m over interior gaps");
    t.columns = {"n", "m", "covariance"};
    for (const auto& e : ensembles) {
        const auto p = gap_pearson(e.records);
        for (int n = 1; n < p.dim; ++n)
            for (int m = 1; m < p.dim; ++m)
                if (const auto& c = p.covariance[n][m])
                    t.rows.push_back({{static_cast<double>(n), static_cast<double>(m), *c}, series_of(e)});
    }
}

void fig5(FigureTable& t, const std::vector<Ensemble>& ensembles, const FigureOptions& o)
{
    t.comments.push_back("Pearson correlation g_{n,n-k}: mean and population standard deviation over bulk gaps n");
    t.columns = {"k", "g_mean", "g_std", "gaps"};
    for (const auto& e : ensembles) {
        const auto p = gap_pearson(e.records);
        const auto gaps = bulk_gaps(e.key.dim, o.stats.bulk_fraction);
        for (int k = 0; k < static_cast<int>(gaps.size()); ++k) {
            const auto s = gap_correlation_spread(p, gaps, k);
            if (s.gaps == 0)
                continue;
            t.rows.push_back({{static_cast<double>(k), s.mean, s.stddev, static_cast<double>(s.gaps)}, series_of(e)});
        }
    }
}

void fig6(FigureTable& t, const std::vector<Ensemble>& ensembles, const FigureOptions& o)
{
    t.comments.push_back("weighted Chern variance <N_eps^2> at E = " + fmt(o.energy) +
                         " against exact and asymptotic independent-gap predictions");
    t.columns = {"eps", "measured", "ci_half_width", "predicted_exact", "predicted_asymptotic", "eps_rho",
                 "below_spacing"};
    for (const auto& e : ensembles) {
        const auto c = weighted_variance_curve(e.records, o.eps_rho, o.energy, o.stats, o.measured_chern_variance);
        for (const auto& p : c.points)
            t.rows.push_back({{p.eps, p.measured.estimate.value, p.measured.estimate.ci.half_width(),
                               p.predicted_exact, p.predicted_asymptotic, p.eps_rho,
                               p.measured.below_spacing ? 1.0 : 0.0},
                              series_of(e)});
    }
}

void fig8(FigureTable& t, const std::vector<Ensemble>& ensembles, const FigureOptions& o)
{
    t.comments.push_back("ratio of measured weighted Chern variance to the exact independent-gap prediction");
    t.columns = {"ln_rho_eps", "ratio", "ci_half_width", "ci_lo", "ci_hi"};
    for (const auto& e : ensembles) {
        const auto c = weighted_variance_curve(e.records, o.eps_rho, o.energy, o.stats, o.measured_chern_variance);
        for (const auto& p : c.points)
            t.rows.push_back(
                {{std::log(p.eps_rho), p.ratio, p.ratio_ci.half_width(), p.ratio_ci.lo, p.ratio_ci.hi}, series_of(e)});
    }
}

}  // namespace

std::string FigureTable::to_text() const
{
    std::ostringstream o;
    o << "# figure " << id << " schema " << schema_version << "\n";
    for (const auto& c : comments)
        o << "# " << c << "\n";
    for (const auto& c : columns)
        o << c << "\t";
    o << "series\n";
    for (const auto& r : rows) {
        for (double v : r.values)
            o << fmt(v) << "\t";
        o << r.series << "\n";
    }
    return o.str();
}

const std::vector<std::string>& figure_ids()
{
    static const std::vector<std::string> ids = {"fig1", "fig4", "fig5", "fig6", "fig8", "fig11"};
    return ids;
}

FigureTable export_figure(std::string_view id, const std::vector<Ensemble>& ensembles, const FigureOptions& options)
{
    FigureTable t;
    t.id = std::string(id);
    if (id == "fig1")
        fig1(t, ensembles, options);
    else if (id == "fig11")
        fig11(t, ensembles, options);
    else if (id == "fig4")
        fig4(t, ensembles, options);
    else if (id == "fig5")
        fig5(t, ensembles, options);
    else if (id == "fig6")
        fig6(t, ensembles, options);
    else if (id == "fig8")
        fig8(t, ensembles, options);
    else
        throw std::invalid_argument("unknown figure id '" + std::string(id) + "'");
    t.comments.push_back("sigma convention: " + std::string(to_string(options.stats.sigma)) +
                         ", bulk fraction: " + fmt(options.stats.bulk_fraction));
    for (const auto& r : t.rows)
        for (double v : r.values)
            if (!std::isfinite(v))
                throw StatsError("figure " + t.id + " has a non-finite value");
    return t;
}

}  // namespace chernstat
