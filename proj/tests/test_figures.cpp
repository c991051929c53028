#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "chernstat/figures.hpp"

using namespace chernstat;

namespace {

Ensemble synthetic_ensemble(double scale, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> g(-2, 2);
    const int dim = 12;
    Ensemble e;
    for (std::uint64_t s = 0; s < 150; ++s) {
        EnsembleRecord r;
        r.spec = CorrelationSpec::gaussian(scale);
        r.dim = dim;
        r.seed = s;
        r.index = s;
        r.gap.assign(dim + 1, 0);
        for (int n = 1; n < dim; ++n)
            r.gap[n] = g(rng);
        for (int n = 0; n < dim; ++n) {
            r.band.push_back(r.gap[n + 1] - r.gap[n]);
            r.mean_energy.push_back(n - 0.5 * (dim - 1));
            r.density.push_back(1.0);
        }
        r.velocity_variance = 1.0 / (scale * scale);
        r.sigma2 = r.velocity_variance / 2;
        e.records.push_back(r);
    }
    e.key = key_of(e.records.front());
    return e;
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        out.push_back(line);
    return out;
}

}  // namespace

TEST_SUITE("figures")
{
    TEST_CASE("every figure exports a well-formed table")
    {
        const std::vector<Ensemble> ensembles = {synthetic_ensemble(1.0, 1), synthetic_ensemble(0.5, 2)};
        FigureOptions o;
        o.stats.bootstrap.resamples = 100;
        for (const auto& id : figure_ids()) {
            INFO(id);
            const auto t = export_figure(id, ensembles, o);
            CHECK(t.id == id);
            CHECK_FALSE(t.rows.empty());
            for (const auto& row : t.rows)
                CHECK(row.values.size() == t.columns.size());

            const auto lines = lines_of(t.to_text());
            REQUIRE_FALSE(lines.empty());
            CHECK(lines.front().rfind("# figure " + id + " schema 1", 0) == 0);
            std::size_t data = 0;
            for (const auto& line : lines) {
                if (line.empty() || line[0] == '#')
                    continue;
                ++data;
                CHECK(static_cast<std::size_t>(std::count(line.begin(), line.end(), '\t')) == t.columns.size());
            }
            CHECK(data == t.rows.size() + 1);  // column header plus rows
        }
    }

    TEST_CASE("fig1 has one row per ensemble with its rho sigma")
    {
        const std::vector<Ensemble> ensembles = {synthetic_ensemble(0.5, 3), synthetic_ensemble(1.0, 4)};
        FigureOptions o;
        o.stats.bootstrap.resamples = 100;
        const auto t = export_figure("fig1", ensembles, o);
        REQUIRE(t.rows.size() == 2);
        CHECK(t.rows[0].values[0] == doctest::Approx(2.0));
        CHECK(t.rows[1].values[0] == doctest::Approx(1.0));
        CHECK(t.rows[0].series != t.rows[1].series);
    }

    TEST_CASE("unknown figure ids are rejected")
    {
        CHECK_THROWS_AS(export_figure("fig99", {synthetic_ensemble(1.0, 1)}, FigureOptions{}), std::invalid_argument);
    }
}
