#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "chernstat/stats.hpp"

using namespace chernstat;

namespace {

/// Record with the given band Chern numbers, gap numbers as their partial
/// sums, evenly spaced mean energies and uniform density.
EnsembleRecord synthetic(std::vector<int> band, std::uint64_t seed, double rho = 1.0, double velocity = 0.5)
{
    EnsembleRecord r;
    r.spec = CorrelationSpec::gaussian(1.0);
    r.dim = static_cast<int>(band.size());
    r.seed = seed;
    r.index = seed;
    r.gap.assign(band.size() + 1, 0);
    for (std::size_t n = 0; n < band.size(); ++n)
        r.gap[n + 1] = r.gap[n] + band[n];
    for (std::size_t n = 0; n < band.size(); ++n) {
        r.mean_energy.push_back((static_cast<double>(n) - 0.5 * (band.size() - 1)) / rho);
        r.density.push_back(rho);
    }
    r.band = std::move(band);
    r.velocity_variance = velocity;
    r.sigma2 = velocity / 2;
    return r;
}

/// Records whose interior gap numbers are independent small integers.
std::vector<EnsembleRecord> independent_gaps(int dim, std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> g(-2, 2);
    std::vector<EnsembleRecord> out;
    for (std::size_t s = 0; s < count; ++s) {
        std::vector<int> gap(dim + 1, 0);
        for (int n = 1; n < dim; ++n)
            gap[n] = g(rng);
        std::vector<int> band(dim);
        for (int n = 0; n < dim; ++n)
            band[n] = gap[n + 1] - gap[n];
        out.push_back(synthetic(band, s));
    }
    return out;
}

StatsOptions quick_options()
{
    StatsOptions o;
    o.bootstrap.resamples = 400;
    return o;
}

long double brute_force_F(long double x)
{
    long double acc = 0.0L;
    for (long n = -10000; n <= 10000; ++n) {
        const long double m = n;
        acc += std::exp(-x * m * m) * (std::exp(-x * m * m) - 0.5L * std::exp(-x * (m + 1) * (m + 1)) -
                                       0.5L * std::exp(-x * (m - 1) * (m - 1)));
    }
    return acc;
}

}  // namespace

TEST_SUITE("stats")
{
    TEST_CASE("scaled variance of a +-1 fixture is exactly 1")
    {
        // rho = 1 and sigma^2 = 1/2 make rho^2 sigma^2 A / (2 pi) = 1.
        std::vector<EnsembleRecord> records = {synthetic({1, -1}, 1), synthetic({-1, 1}, 2),
                                               synthetic({1, -1}, 3), synthetic({-1, 1}, 4)};
        const auto o = quick_options();
        const auto e = scaled_variance(records, 0, o);
        CHECK(e.value == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(e.count == 4);
        const std::vector<int> both = {0, 1};
        CHECK(scaled_variance(records, both, o).value == doctest::Approx(1.0).epsilon(1e-14));

        auto sensitivity = o;
        sensitivity.sigma = SigmaConvention::sensitivity;
        CHECK(scaled_variance(records, 0, sensitivity).value == doctest::Approx(2.0).epsilon(1e-14));

        std::vector<EnsembleRecord> zeros = {synthetic({0, 0}, 1), synthetic({0, 0}, 2)};
        CHECK(scaled_variance(zeros, 0, o).value == 0.0);
    }

    TEST_CASE("excess kurtosis of a two-point law is -2")
    {
        std::vector<EnsembleRecord> records;
        for (std::uint64_t s = 0; s < 100; ++s)
            records.push_back(synthetic(s % 2 ? std::vector<int>{1, -1} : std::vector<int>{-1, 1}, s));
        const auto o = quick_options();
        CHECK(kurtosis(records, 0, o).value == doctest::Approx(-2.0).epsilon(1e-12));
        const std::vector<int> both = {0, 1};
        CHECK(kurtosis(records, both, o).value == doctest::Approx(-2.0).epsilon(1e-12));
        const std::vector<double> pm = {1, -1, 1, -1};
        CHECK(excess_kurtosis(pm) == doctest::Approx(-2.0));
    }

    TEST_CASE("finely discretized Gaussian has near-zero excess kurtosis")
    {
        std::mt19937_64 rng(12);
        std::normal_distribution<double> z;
        std::vector<EnsembleRecord> records;
        for (std::uint64_t s = 0; s < 20000; ++s) {
            const int n = static_cast<int>(std::lround(10 * z(rng)));
            records.push_back(synthetic({n, -n}, s));
        }
        const auto e = kurtosis(records, 0, quick_options());
        CHECK(e.ci.contains(0.0));
        CHECK(std::abs(e.value) < 0.1);
    }

    TEST_CASE("gap Pearson matrix: unit diagonal, missing fixed gaps")
    {
        const auto records = independent_gaps(6, 3000, 5);
        const auto p = gap_pearson(records);
        REQUIRE(p.dim == 6);
        CHECK(p.count == 3000);
        for (int n = 1; n < 6; ++n) {
            REQUIRE(p.correlation[n][n].has_value());
            CHECK(*p.correlation[n][n] == doctest::Approx(1.0));
        }
        CHECK_FALSE(p.correlation[0][1].has_value());
        CHECK_FALSE(p.correlation[6][6].has_value());
        REQUIRE(p.correlation[2][3].has_value());
        CHECK(*p.correlation[2][3] == doctest::Approx(*p.correlation[3][2]));
    }

    TEST_CASE("independent gaps give g_k consistent with zero")
    {
        const auto records = independent_gaps(8, 4000, 8);
        const std::vector<int> gaps = {2, 3, 4, 5, 6};
        BootstrapOptions b;
        b.resamples = 400;
        for (int k = 1; k <= 3; ++k) {
            INFO("k = " << k);
            const auto e = gap_correlation(records, gaps, k, b);
            CHECK(e.ci.contains(0.0));
        }
    }

    TEST_CASE("shuffling records independently per gap destroys correlations")
    {
        // Random-walk gaps are strongly correlated with their neighbours.
        std::mt19937_64 rng(33);
        std::uniform_int_distribution<int> step(-1, 1);
        const int dim = 8;
        std::vector<std::vector<int>> gaps;
        for (int s = 0; s < 3000; ++s) {
            std::vector<int> g(dim + 1, 0);
            for (int n = 1; n < dim; ++n)
                g[n] = g[n - 1] + step(rng);
            gaps.push_back(g);
        }
        auto to_records = [&](const std::vector<std::vector<int>>& table) {
            std::vector<EnsembleRecord> out;
            for (std::size_t s = 0; s < table.size(); ++s) {
                std::vector<int> band(dim);
                for (int n = 0; n < dim; ++n)
                    band[n] = table[s][n + 1] - table[s][n];
                out.push_back(synthetic(band, s));
            }
            return out;
        };
        const std::vector<int> bulk = {2, 3, 4, 5};
        BootstrapOptions b;
        b.resamples = 300;
        const auto correlated = gap_correlation(to_records(gaps), bulk, 1, b);
        CHECK(correlated.value > 0.5);

        for (int n = 1; n < dim; ++n) {
            std::vector<int> column;
            for (const auto& g : gaps)
                column.push_back(g[n]);
            std::shuffle(column.begin(), column.end(), rng);
            for (std::size_t s = 0; s < gaps.size(); ++s)
                gaps[s][n] = column[s];
        }
        const auto shuffled = gap_correlation(to_records(gaps), bulk, 1, b);
        CHECK(shuffled.ci.contains(0.0));
    }

    TEST_CASE("spread of g_{n,n-k} over gaps")
    {
        PearsonMatrix p;
        p.dim = 3;
        p.correlation.assign(4, std::vector<std::optional<double>>(4));
        p.correlation[2][1] = 0.2;
        p.correlation[3][2] = 0.4;
        const std::vector<int> gaps = {1, 2, 3};
        const auto s = gap_correlation_spread(p, gaps, 1);
        CHECK(s.gaps == 2);
        CHECK(s.mean == doctest::Approx(0.3));
        CHECK(s.stddev == doctest::Approx(0.1));
        CHECK(mean_gap_correlation(p, gaps, 1) == doctest::Approx(0.3));
    }

    TEST_CASE("weighted Chern number of a symmetric dipole vanishes at the centre")
    {
        EnsembleRecord r = synthetic({1, -1}, 0);
        const double eps = 0.7;
        r.mean_energy = {-eps, eps};
        CHECK(weighted_chern(r, eps, 0.0) == doctest::Approx(0.0).scale(1.0));
        CHECK(weighted_chern(r, eps, -eps) > 0.0);
        CHECK(gaussian_window(0.0, 1.0) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)));
    }

    TEST_CASE("weighted variance decreases with eps beyond the spacing")
    {
        const auto records = independent_gaps(24, 2000, 19);
        BootstrapOptions b;
        b.resamples = 200;
        double previous = std::numeric_limits<double>::infinity();
        for (double eps : {1.0, 2.0, 4.0}) {
            const auto w = weighted_chern_variance(records, eps, 0.0, b);
            CHECK_FALSE(w.below_spacing);
            CHECK(w.mean_spacing == doctest::Approx(1.0));
            CHECK(w.estimate.value < previous);
            previous = w.estimate.value;
        }
        CHECK(weighted_chern_variance(records, 0.3, 0.0, b).below_spacing);
        CHECK(density_at(records, 0.0) == doctest::Approx(1.0));
    }

    TEST_CASE("theory F matches a brute-force lattice sum")
    {
        for (int i = 0; i <= 25; ++i) {
            const double x = std::pow(10.0, -3.0 + 5.0 * i / 25.0);
            INFO("X = " << x);
            const auto f = theory_F_detail(x);
            const auto ref = static_cast<double>(brute_force_F(x));
            CHECK(std::abs(f.value - ref) < 1e-12);
            CHECK(f.tail_bound < 1e-12);
            CHECK(f.value > 0.0);
        }
        CHECK(theory_F(100.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(theory_F(20.0) - (1.0 - 2 * std::exp(-20.0))) < 1e-15);
        CHECK_THROWS_AS(theory_F(0.0), std::domain_error);
        CHECK_THROWS_AS(theory_F(-1.0), std::domain_error);
    }

    TEST_CASE("predictions: eps^-3 scaling and a worked fixture")
    {
        const double area = 4 * std::numbers::pi;
        const double a = predict_weighted_variance(1.0, 10.0, 1.0, area, 0.0, 1.67, PredictionMode::asymptotic);
        const double b = predict_weighted_variance(2.0, 10.0, 1.0, area, 0.0, 1.67, PredictionMode::asymptotic);
        CHECK(b / a == doctest::Approx(0.125).epsilon(1e-14));
        CHECK(a == doctest::Approx(3 * 1.67 / (128 * std::sqrt(std::numbers::pi)) * area * 10.0));

        const double n2 = universal_chern_variance(10.0, 1.0, area, 1.67);
        CHECK(n2 == doctest::Approx(1.67 * 100 * area / (2 * std::numbers::pi)));
        const double exact = predict_weighted_variance(1.0, 10.0, 1.0, area, n2, 1.67, PredictionMode::exact);
        CHECK(exact == doctest::Approx(n2 / (2 * std::numbers::pi) * static_cast<double>(brute_force_F(0.005))));
        CHECK(parse_prediction_mode("exact") == PredictionMode::exact);
        CHECK_THROWS(parse_prediction_mode("nope"));
    }

    TEST_CASE("power-law fit recovers an exact law")
    {
        std::vector<double> x, y;
        for (double v : {1.0, 2.0, 3.0, 5.0, 8.0}) {
            x.push_back(v);
            y.push_back(2.0 * std::pow(v, -3.0));
        }
        const auto f = fit_power_law(x, y);
        CHECK(f.amplitude == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(f.exponent == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(f.residual < 1e-20);
        CHECK(f.points == 5);

        const std::vector<double> two = {1.0, 2.0};
        CHECK_THROWS_AS(fit_power_law(two, two), StatsError);
        y[1] = -1.0;
        CHECK_THROWS_AS(fit_power_law(x, y), StatsError);
    }

    TEST_CASE("bootstrap intervals shrink like 1/sqrt(n)")
    {
        std::mt19937_64 rng(77);
        std::normal_distribution<double> z;
        auto width = [&](std::size_t n) {
            std::vector<double> v(n);
            for (auto& x : v)
                x = z(rng);
            BootstrapOptions o;
            o.resamples = 2000;
            const auto ci = bootstrap(
                n,
                [&](std::span<const std::size_t> idx) {
                    double acc = 0.0;
                    for (auto i : idx)
                        acc += v[i];
                    return acc / static_cast<double>(idx.size());
                },
                o);
            return ci.hi - ci.lo;
        };
        const double ratio = width(400) / width(1600);
        CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
    }

    TEST_CASE("bootstrap is independent of the worker count")
    {
        std::vector<double> v;
        for (int i = 0; i < 50; ++i)
            v.push_back(std::sin(i * 1.3));
        auto mean = [&](std::span<const std::size_t> idx) {
            double acc = 0.0;
            for (auto i : idx)
                acc += v[i];
            return acc / static_cast<double>(idx.size());
        };
        BootstrapOptions one, four;
        four.workers = 4;
        const auto a = bootstrap(v.size(), mean, one);
        const auto b = bootstrap(v.size(), mean, four);
        CHECK(a.lo == b.lo);
        CHECK(a.hi == b.hi);
    }

    TEST_CASE("estimators are invariant under record permutation")
    {
        auto records = independent_gaps(8, 300, 3);
        const auto o = quick_options();
        const std::vector<int> bulk = {2, 3, 4, 5};
        const std::vector<int> gaps = {2, 3, 4, 5, 6};
        const auto v = scaled_variance(records, bulk, o);
        const auto k = kurtosis(records, bulk, o);
        const auto g = gap_correlation(records, gaps, 1, o.bootstrap);
        const auto w = weighted_chern_variance(records, 2.0, 0.0, o.bootstrap);
        std::mt19937_64 rng(4);
        std::shuffle(records.begin(), records.end(), rng);
        const auto v2 = scaled_variance(records, bulk, o);
        const auto k2 = kurtosis(records, bulk, o);
        const auto g2 = gap_correlation(records, gaps, 1, o.bootstrap);
        const auto w2 = weighted_chern_variance(records, 2.0, 0.0, o.bootstrap);
        CHECK(v.value == doctest::Approx(v2.value).epsilon(1e-13));
        CHECK(v.ci.lo == doctest::Approx(v2.ci.lo).epsilon(1e-13));
        CHECK(k.value == doctest::Approx(k2.value).epsilon(1e-13));
        CHECK(k.ci.hi == doctest::Approx(k2.ci.hi).epsilon(1e-13));
        CHECK(g.value == doctest::Approx(g2.value).epsilon(1e-13));
        CHECK(g.ci.lo == doctest::Approx(g2.ci.lo).epsilon(1e-13));
        CHECK(w.estimate.value == doctest::Approx(w2.estimate.value).epsilon(1e-13));
        CHECK(w.estimate.ci.hi == doctest::Approx(w2.estimate.ci.hi).epsilon(1e-13));
    }

    TEST_CASE("ensemble density is the inverse mean spacing")
    {
        std::vector<EnsembleRecord> records = {synthetic({1, -1}, 1, 2.0), synthetic({-1, 1}, 2, 1.0)};
        const auto rho = ensemble_density(records);
        REQUIRE(rho.size() == 2);
        CHECK(rho[0] == doctest::Approx(1.0 / 0.75));
        const std::vector<int> both = {0, 1};
        auto o = quick_options();
        CHECK(rho_sigma(records, both, o) == doctest::Approx(std::sqrt(0.5) / 0.75));
        // Scaled variance uses the ensemble density: 2 pi / (rho^2 sigma^2 4 pi) = 0.5625.
        CHECK(scaled_variance(records, both, o).value == doctest::Approx(0.5625));
    }

    TEST_CASE("bulk band and gap selection")
    {
        CHECK(bulk_bands(16, 0.5) == std::vector<int>{4, 5, 6, 7, 8, 9, 10, 11});
        CHECK(bulk_gaps(16, 0.5) == std::vector<int>{4, 5, 6, 7, 8, 9, 10, 11, 12});
        CHECK(bulk_bands(2, 1.0) == std::vector<int>{0, 1});
        CHECK(bulk_gaps(2, 1.0) == std::vector<int>{1});
        CHECK_THROWS(bulk_bands(16, 0.0));
    }

    TEST_CASE("summary of a synthetic ensemble")
    {
        Ensemble e;
        e.records = independent_gaps(8, 200, 6);
        e.key = key_of(e.records.front());
        const auto s = summarize(e, quick_options(), true);
        CHECK(s.records == 200);
        CHECK(s.bulk == std::vector<int>{2, 3, 4, 5});
        CHECK(s.rho_sigma == doctest::Approx(std::sqrt(0.5)));
        CHECK(s.band_scaled_variance.size() == 8);
        CHECK(s.gap_correlation.size() == 3);
        CHECK(s.kurtosis.has_value());
    }

    TEST_CASE("empty input is an error")
    {
        std::vector<EnsembleRecord> none;
        CHECK_THROWS_AS(scaled_variance(none, 0, quick_options()), StatsError);
        CHECK_THROWS_AS(gap_pearson(none), StatsError);
    }
}
