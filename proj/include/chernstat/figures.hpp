#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chernstat/records.hpp"
#include "chernstat/stats.hpp"

namespace chernstat {

/// Plot-ready data: a header comment block documenting the columns, then
/// tab-separated rows. The last column is always the series label.
struct FigureTable {
    std::string id;
    int schema_version = 1;
    std::vector<std::string> comments;
    std::vector<std::string> columns;  // numeric columns; "series" is appended
    struct Row {
        std::vector<double> values;
        std::string series;
    };
    std::vector<Row> rows;

    std::string to_text() const;
};

/// Figure ids accepted by export_figure.
const std::vector<std::string>& figure_ids();

struct FigureOptions {
    StatsOptions stats;
    std::vector<double> eps_rho = {2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.5, 10.0};
    double energy = 0.0;
    bool measured_chern_variance = false;
};

/// Builds the named table from grouped ensembles:
///   fig1   (rho_sigma, scaled variance, ci half-width) per ensemble
///   fig11  (rho_sigma, excess kurtosis, ci half-width) per ensemble
///   fig4   (n, m, cov(G_n, G_m)) per ensemble
///   fig5   (k, mean g_{n,n-k}, std over bulk gaps) per ensemble
///   fig6   (eps, measured <N_eps^2>, ci half-width, exact and asymptotic
///          predictions) per ensemble
///   fig8   (ln(rho eps), measured / predicted, ci half-width) per ensemble
/// Throws std::invalid_argument for an unknown id.
FigureTable export_figure(std::string_view id, const std::vector<Ensemble>& ensembles, const FigureOptions& options);

}  // namespace chernstat
