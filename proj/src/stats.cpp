#include "chernstat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>
#include <tuple>

#include "chernstat/detail/splitmix.hpp"

namespace chernstat {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

/// Neumaier-compensated running sum.
class Accumulator {
public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

double percentile(const std::vector<double>& sorted, double q)
{
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void require_records(std::span<const EnsembleRecord> records)
{
    if (records.size() < 2)
        throw StatsError("need at least two records");
    for (const auto& r : records)
        if (r.dim != records.front().dim)
            throw StatsError("records mix different matrix dimensions");
}

void require_band(std::span<const EnsembleRecord> records, int band)
{
    if (band < 0 || band >= records.front().dim)
        throw StatsError("band index out of range");
}

/// Per-record mean over `bands` of 2 pi N_n^2 / (rho_n^2 sigma^2 A).
std::vector<double> scaled_squares(std::span<const EnsembleRecord> records, std::span<const int> bands,
                                   const StatsOptions& options)
{
    const auto density = ensemble_density(records);
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        const double s2 = sigma2_of(r, options.sigma);
        double acc = 0.0;
        for (int n : bands) {
            const double rho = density[n];
            const double chern = r.band[n];
            acc += two_pi * chern * chern / (rho * rho * s2 * options.area);
        }
        out.push_back(acc / static_cast<double>(bands.size()));
    }
    return out;
}

Estimate mean_estimate(const std::vector<double>& values, const BootstrapOptions& options)
{
    auto mean_of = [&](std::span<const std::size_t> idx) {
        Accumulator acc;
        for (auto i : idx)
            acc.add(values[i]);
        return acc.value() / static_cast<double>(idx.size());
    };
    std::vector<std::size_t> all(values.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    Estimate e;
    e.value = mean_of(all);
    e.count = values.size();
    e.ci = bootstrap(values.size(), mean_of, options);
    return e;
}

/// Gap Chern numbers as a records x (M+1) table.
std::vector<std::vector<double>> gap_table(std::span<const EnsembleRecord> records)
{
    std::vector<std::vector<double>> g;
    g.reserve(records.size());
    for (const auto& r : records)
        g.emplace_back(r.gap.begin(), r.gap.end());
    return g;
}

std::optional<double> pearson_of(const std::vector<std::vector<double>>& g, std::span<const std::size_t> idx, int a,
                                 int b)
{
    const double n = static_cast<double>(idx.size());
    double ma = 0.0, mb = 0.0;
    for (auto i : idx) {
        ma += g[i][a];
        mb += g[i][b];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (auto i : idx) {
        const double da = g[i][a] - ma;
        const double db = g[i][b] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa <= 0.0 || sbb <= 0.0)
        return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

double pooled_gap_correlation(const std::vector<std::vector<double>>& g, std::span<const std::size_t> idx,
                              std::span<const int> gaps, int k)
{
    double acc = 0.0;
    int used = 0;
    for (int n : gaps) {
        if (std::find(gaps.begin(), gaps.end(), n - k) == gaps.end())
            continue;
        if (const auto c = pearson_of(g, idx, n, n - k)) {
            acc += *c;
            ++used;
        }
    }
    if (used == 0)
        throw StatsError("no gap pairs with non-zero variance at this separation");
    return acc / used;
}

/// Records in a canonical order, so that bootstrap resamples (and hence
/// intervals) do not depend on the order records were supplied in.
std::vector<EnsembleRecord> canonical(std::span<const EnsembleRecord> records)
{
    std::vector<EnsembleRecord> out(records.begin(), records.end());
    std::sort(out.begin(), out.end(), [](const EnsembleRecord& a, const EnsembleRecord& b) {
        return std::tie(a.seed, a.config_index, a.index, a.spec.scale, a.dim) <
               std::tie(b.seed, b.config_index, b.index, b.spec.scale, b.dim);
    });
    return out;
}

std::vector<std::size_t> identity_indices(std::size_t n)
{
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
        idx[i] = i;
    return idx;
}

}  // namespace

Interval bootstrap(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                   const BootstrapOptions& options)
{
    if (n == 0)
        throw StatsError("bootstrap over an empty sample");
    if (options.resamples == 0 || !(options.level > 0.0 && options.level < 1.0))
        throw StatsError("invalid bootstrap options");

    std::vector<double> values(options.resamples, std::numeric_limits<double>::quiet_NaN());
    auto work = [&](std::size_t first, std::size_t stride) {
        std::vector<std::size_t> idx(n);
        for (std::size_t b = first; b < options.resamples; b += stride) {
            std::mt19937_64 rng(detail::splitmix64(options.seed ^ detail::splitmix64(b)));
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (auto& i : idx)
                i = pick(rng);
            try {
                values[b] = statistic(idx);
            } catch (const StatsError&) {
            }
        }
    };
    const auto workers = static_cast<std::size_t>(std::max(1, options.workers));
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(work, w, workers);
    }

    std::vector<double> ok;
    ok.reserve(values.size());
    for (double v : values)
        if (std::isfinite(v))
            ok.push_back(v);
    if (ok.size() * 2 < values.size())
        throw StatsError("statistic undefined on most bootstrap resamples");
    std::sort(ok.begin(), ok.end());
    const double tail = 0.5 * (1.0 - options.level);
    return {percentile(ok, tail), percentile(ok, 1.0 - tail)};
}

std::string_view to_string(SigmaConvention convention)
{
    return convention == SigmaConvention::velocity ? "velocity" : "sensitivity";
}

SigmaConvention parse_sigma_convention(std::string_view name)
{
    if (name == "velocity")
        return SigmaConvention::velocity;
    if (name == "sensitivity")
        return SigmaConvention::sensitivity;
    throw std::invalid_argument("unknown sigma convention '" + std::string(name) + "'");
}

double sigma2_of(const EnsembleRecord& record, SigmaConvention convention)
{
    return convention == SigmaConvention::velocity ? record.velocity_variance : record.sigma2;
}

std::vector<int> bulk_bands(int dim, double fraction)
{
    if (dim < 1 || !(fraction > 0.0 && fraction <= 1.0))
        throw StatsError("bulk selection needs dim >= 1 and fraction in (0, 1]");
    const int count = std::clamp(static_cast<int>(std::lround(fraction * dim)), 1, dim);
    const int start = (dim - count) / 2;
    std::vector<int> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = start + i;
    return out;
}

std::vector<int> bulk_gaps(int dim, double fraction)
{
    const auto bands = bulk_bands(dim, fraction);
    std::vector<int> out;
    for (int g = bands.front(); g <= bands.back() + 1; ++g)
        if (g >= 1 && g <= dim - 1)
            out.push_back(g);
    return out;
}

std::vector<double> ensemble_density(std::span<const EnsembleRecord> records)
{
    if (records.empty())
        throw StatsError("ensemble_density needs records");
    const int dim = records.front().dim;
    std::vector<double> spacing(static_cast<std::size_t>(dim), 0.0);
    for (const auto& r : records) {
        if (r.dim != dim)
            throw StatsError("records mix different matrix dimensions");
        for (int n = 0; n < dim; ++n)
            spacing[n] += 1.0 / r.density[n];
    }
    std::vector<double> out(spacing.size());
    for (std::size_t n = 0; n < out.size(); ++n)
        out[n] = static_cast<double>(records.size()) / spacing[n];
    return out;
}

double rho_sigma(std::span<const EnsembleRecord> records, std::span<const int> bands, const StatsOptions& options)
{
    if (records.empty() || bands.empty())
        throw StatsError("rho_sigma needs records and bands");
    const auto density = ensemble_density(records);
    double sigma = 0.0;
    for (const auto& r : records)
        sigma += std::sqrt(sigma2_of(r, options.sigma));
    sigma /= static_cast<double>(records.size());
    double rho = 0.0;
    for (int n : bands)
        rho += density[n];
    return rho / static_cast<double>(bands.size()) * sigma;
}

Estimate scaled_variance(std::span<const EnsembleRecord> records, int band, const StatsOptions& options)
{
    const int bands[] = {band};
    return scaled_variance(records, bands, options);
}

Estimate scaled_variance(std::span<const EnsembleRecord> records, std::span<const int> bands,
                         const StatsOptions& options)
{
    require_records(records);
    if (bands.empty())
        throw StatsError("empty band range");
    for (int n : bands)
        require_band(records, n);
    const auto sorted = canonical(records);
    return mean_estimate(scaled_squares(sorted, bands, options), options.bootstrap);
}

double excess_kurtosis(std::span<const double> values)
{
    Accumulator m2, m4;
    for (double x : values) {
        const double x2 = x * x;
        m2.add(x2);
        m4.add(x2 * x2);
    }
    const double n = static_cast<double>(values.size());
    const double s2 = m2.value() / n;
    if (!(s2 > 0.0))
        throw StatsError("kurtosis of a zero-variance sample");
    return (m4.value() / n) / (s2 * s2) - 3.0;
}

Estimate kurtosis(std::span<const EnsembleRecord> records, int band, const StatsOptions& options)
{
    require_records(records);
    require_band(records, band);
    std::vector<double> x;
    x.reserve(records.size());
    for (const auto& r : canonical(records))
        x.push_back(r.band[band]);
    auto stat = [&](std::span<const std::size_t> idx) {
        std::vector<double> s;
        s.reserve(idx.size());
        for (auto i : idx)
            s.push_back(x[i]);
        return excess_kurtosis(s);
    };
    Estimate e;
    e.value = excess_kurtosis(x);
    e.count = records.size();
    e.ci = bootstrap(records.size(), stat, options.bootstrap);
    return e;
}

Estimate kurtosis(std::span<const EnsembleRecord> records, std::span<const int> bands, const StatsOptions& options)
{
    require_records(records);
    if (bands.empty())
        throw StatsError("empty band range");
    for (int n : bands)
        require_band(records, n);
    const std::size_t nb = bands.size();
    std::vector<double> x;
    x.reserve(records.size() * nb);
    const auto density = ensemble_density(records);
    for (const auto& r : canonical(records)) {
        const double sigma = std::sqrt(sigma2_of(r, options.sigma));
        for (int n : bands)
            x.push_back(r.band[n] / (density[n] * sigma));
    }
    auto stat = [&](std::span<const std::size_t> idx) {
        std::vector<double> s;
        s.reserve(idx.size() * nb);
        for (auto i : idx)
            s.insert(s.end(), x.begin() + static_cast<std::ptrdiff_t>(i * nb),
                     x.begin() + static_cast<std::ptrdiff_t>((i + 1) * nb));
        return excess_kurtosis(s);
    };
    Estimate e;
    e.value = excess_kurtosis(x);
    e.count = records.size();
    e.ci = bootstrap(records.size(), stat, options.bootstrap);
    return e;
}

PearsonMatrix gap_pearson(std::span<const EnsembleRecord> records)
{
    require_records(records);
    const int dim = records.front().dim;
    const auto g = gap_table(records);
    const auto idx = identity_indices(records.size());
    const double n = static_cast<double>(records.size());

    std::vector<double> mean(dim + 1, 0.0);
    for (const auto& row : g)
        for (int a = 0; a <= dim; ++a)
            mean[a] += row[a] / n;

    PearsonMatrix out;
    out.dim = dim;
    out.count = records.size();
    out.covariance.assign(dim + 1, std::vector<std::optional<double>>(dim + 1));
    out.correlation = out.covariance;
    std::vector<double> var(dim + 1, 0.0);
    for (int a = 0; a <= dim; ++a)
        for (const auto& row : g)
            var[a] += (row[a] - mean[a]) * (row[a] - mean[a]) / n;
    for (int a = 0; a <= dim; ++a) {
        for (int b = 0; b <= dim; ++b) {
            if (var[a] <= 0.0 || var[b] <= 0.0)
                continue;
            double c = 0.0;
            for (const auto& row : g)
                c += (row[a] - mean[a]) * (row[b] - mean[b]) / n;
            out.covariance[a][b] = c;
            out.correlation[a][b] = a == b ? 1.0 : c / std::sqrt(var[a] * var[b]);
        }
    }
    return out;
}

double mean_gap_correlation(const PearsonMatrix& matrix, std::span<const int> gaps, int k)
{
    const auto s = gap_correlation_spread(matrix, gaps, k);
    if (s.gaps == 0)
        throw StatsError("no gap pairs with non-zero variance at this separation");
    return s.mean;
}

GapCorrelationSpread gap_correlation_spread(const PearsonMatrix& matrix, std::span<const int> gaps, int k)
{
    GapCorrelationSpread out;
    out.k = k;
    std::vector<double> v;
    for (int n : gaps) {
        if (std::find(gaps.begin(), gaps.end(), n - k) == gaps.end())
            continue;
        if (n < 0 || n > matrix.dim || n - k < 0)
            continue;
        if (const auto& c = matrix.correlation[n][n - k])
            v.push_back(*c);
    }
    out.gaps = v.size();
    if (v.empty())
        return out;
    double m = 0.0;
    for (double x : v)
        m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    out.mean = m;
    out.stddev = std::sqrt(s / static_cast<double>(v.size()));
    return out;
}

Estimate gap_correlation(std::span<const EnsembleRecord> records, std::span<const int> gaps, int k,
                         const BootstrapOptions& options)
{
    require_records(records);
    const auto g = gap_table(canonical(records));
    auto stat = [&](std::span<const std::size_t> idx) { return pooled_gap_correlation(g, idx, gaps, k); };
    Estimate e;
    e.value = stat(identity_indices(records.size()));
    e.count = records.size();
    e.ci = bootstrap(records.size(), stat, options);
    return e;
}

double gaussian_window(double energy, double eps)
{
    return std::exp(-energy * energy / (2.0 * eps * eps)) / (std::sqrt(two_pi) * eps);
}

double weighted_chern(const EnsembleRecord& record, double eps, double energy)
{
    double acc = 0.0;
    for (std::size_t n = 0; n < record.band.size(); ++n)
        acc += record.band[n] * gaussian_window(energy - record.mean_energy[n], eps);
    return acc;
}

double density_at(std::span<const EnsembleRecord> records, double energy)
{
    if (records.empty())
        throw StatsError("density_at needs records");
    const auto rho = ensemble_density(records);
    std::vector<double> e(rho.size(), 0.0);
    for (const auto& r : records)
        for (std::size_t n = 0; n < e.size(); ++n)
            e[n] += r.mean_energy[n];
    for (auto& x : e)
        x /= static_cast<double>(records.size());
    if (energy <= e.front())
        return rho.front();
    if (energy >= e.back())
        return rho.back();
    const auto it = std::upper_bound(e.begin(), e.end(), energy);
    const auto hi = static_cast<std::size_t>(it - e.begin());
    const double t = (energy - e[hi - 1]) / (e[hi] - e[hi - 1]);
    return rho[hi - 1] + t * (rho[hi] - rho[hi - 1]);
}

WeightedVariance weighted_chern_variance(std::span<const EnsembleRecord> records, double eps, double energy,
                                         const BootstrapOptions& options)
{
    require_records(records);
    if (!(eps > 0.0))
        throw StatsError("window width must be positive");
    std::vector<double> sq;
    sq.reserve(records.size());
    for (const auto& r : canonical(records)) {
        const double w = weighted_chern(r, eps, energy);
        sq.push_back(w * w);
    }
    WeightedVariance out;
    out.estimate = mean_estimate(sq, options);
    out.mean_spacing = 1.0 / density_at(records, energy);
    out.below_spacing = eps < out.mean_spacing;
    return out;
}

TheoryF theory_F_detail(double x)
{
    if (!(x > 0.0))
        throw std::domain_error("theory_F needs X > 0");
    // Term n of the series equals e^{-2Xn^2} (1 - e^{-X} cosh 2Xn); the
    // bracket is rewritten with expm1/sinh to avoid cancellation at small X.
    const double base = -std::expm1(-x);
    const double decay = std::exp(-x);
    auto term = [&](long n) {
        const double dn = static_cast<double>(n);
        const double s = std::sinh(x * dn);
        return std::exp(-2.0 * x * dn * dn) * (base - 2.0 * decay * s * s);
    };
    // |term(n)| <= e^{-2X n (n-1)}; the tail beyond N is bounded by a
    // geometric series with ratio e^{-4X(N+1)}.
    auto tail = [&](long n_last) {
        const double m = static_cast<double>(n_last);
        return 2.0 * std::exp(-2.0 * x * (m + 1.0) * m) / -std::expm1(-4.0 * x * (m + 1.0));
    };
    Accumulator acc;
    acc.add(term(0));
    long n = 0;
    while (tail(n) >= 1e-16) {
        ++n;
        acc.add(2.0 * term(n));
    }
    return {acc.value(), tail(n), n};
}

double theory_F(double x) { return theory_F_detail(x).value; }

std::string_view to_string(PredictionMode mode) { return mode == PredictionMode::exact ? "exact" : "asymptotic"; }

PredictionMode parse_prediction_mode(std::string_view name)
{
    if (name == "exact")
        return PredictionMode::exact;
    if (name == "asymptotic")
        return PredictionMode::asymptotic;
    throw std::invalid_argument("unknown prediction mode '" + std::string(name) + "'");
}

double universal_chern_variance(double rho, double sigma, double area, double universal_constant)
{
    return universal_constant * rho * rho * sigma * sigma * area / two_pi;
}

double predict_weighted_variance(double eps, double rho, double sigma, double area, double chern_variance,
                                 double universal_constant, PredictionMode mode)
{
    if (!(eps > 0.0 && rho > 0.0 && sigma > 0.0 && area > 0.0))
        throw std::invalid_argument("predict_weighted_variance needs positive eps, rho, sigma and area");
    if (mode == PredictionMode::exact) {
        const double x = 1.0 / (2.0 * eps * eps * rho * rho);
        return chern_variance / (two_pi * eps * eps) * theory_F(x);
    }
    return 3.0 * universal_constant / (128.0 * std::sqrt(std::numbers::pi)) * area * rho * sigma * sigma /
           (eps * eps * eps);
}

WeightedVarianceCurve weighted_variance_curve(std::span<const EnsembleRecord> records, std::span<const double> eps_rho,
                                              double energy, const StatsOptions& options, bool measured_chern_variance)
{
    require_records(records);
    WeightedVarianceCurve curve;
    curve.rho = density_at(records, energy);
    double s2 = 0.0;
    for (const auto& r : records)
        s2 += sigma2_of(r, options.sigma);
    curve.sigma = std::sqrt(s2 / static_cast<double>(records.size()));
    if (measured_chern_variance) {
        const auto bands = bulk_bands(records.front().dim, options.bulk_fraction);
        double acc = 0.0;
        for (const auto& r : records)
            for (int n : bands)
                acc += static_cast<double>(r.band[n]) * r.band[n];
        curve.chern_variance = acc / static_cast<double>(records.size() * bands.size());
    } else {
        curve.chern_variance =
            universal_chern_variance(curve.rho, curve.sigma, options.area, options.universal_constant);
    }
    for (double er : eps_rho) {
        WeightedVariancePoint p;
        p.eps_rho = er;
        p.eps = er / curve.rho;
        p.measured = weighted_chern_variance(records, p.eps, energy, options.bootstrap);
        p.predicted_exact = predict_weighted_variance(p.eps, curve.rho, curve.sigma, options.area, curve.chern_variance,
                                                      options.universal_constant, PredictionMode::exact);
        p.predicted_asymptotic =
            predict_weighted_variance(p.eps, curve.rho, curve.sigma, options.area, curve.chern_variance,
                                      options.universal_constant, PredictionMode::asymptotic);
        p.ratio = p.measured.estimate.value / p.predicted_exact;
        p.ratio_ci = {p.measured.estimate.ci.lo / p.predicted_exact, p.measured.estimate.ci.hi / p.predicted_exact};
        curve.points.push_back(p);
    }
    return curve;
}

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y, std::span<const double> weights)
{
    if (x.size() != y.size() || (!weights.empty() && weights.size() != x.size()))
        throw StatsError("fit_power_law: mismatched input lengths");
    if (x.size() < 3)
        throw StatsError("fit_power_law needs at least 3 points");
    const std::size_t n = x.size();
    std::vector<double> u(n), v(n), w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw StatsError("fit_power_law: non-positive value");
        if (!weights.empty()) {
            if (!(weights[i] > 0.0))
                throw StatsError("fit_power_law: non-positive weight");
            w[i] = weights[i];
        }
        u[i] = std::log(x[i]);
        v[i] = std::log(y[i]);
    }
    double sw = 0.0, su = 0.0, sv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        su += w[i] * u[i];
        sv += w[i] * v[i];
    }
    const double ubar = su / sw, vbar = sv / sw;
    double suu = 0.0, suv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        suu += w[i] * (u[i] - ubar) * (u[i] - ubar);
        suv += w[i] * (u[i] - ubar) * (v[i] - vbar);
    }
    if (!(suu > 0.0))
        throw StatsError("fit_power_law: all x values coincide");
    const double slope = suv / suu;
    const double intercept = vbar - slope * ubar;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = v[i] - intercept - slope * u[i];
        rss += w[i] * r * r;
    }
    const double s2 = rss / static_cast<double>(n - 2);
    PowerLawFit fit;
    fit.amplitude = std::exp(intercept);
    fit.exponent = -slope;
    fit.exponent_error = std::sqrt(s2 / suu);
    fit.amplitude_error = fit.amplitude * std::sqrt(s2 * (1.0 / sw + ubar * ubar / suu));
    fit.residual = rss;
    fit.points = n;
    return fit;
}

SummaryStats summarize(const Ensemble& ensemble, const StatsOptions& options, bool per_band)
{
    const std::span<const EnsembleRecord> records = ensemble.records;
    require_records(records);
    const int dim = ensemble.key.dim;

    SummaryStats s;
    s.key = ensemble.key;
    s.records = records.size();
    s.excluded = ensemble.excluded;
    s.bulk = bulk_bands(dim, options.bulk_fraction);
    s.rho_sigma = rho_sigma(records, s.bulk, options);
    s.scaled_variance = scaled_variance(records, s.bulk, options);
    try {
        s.kurtosis = kurtosis(records, s.bulk, options);
    } catch (const StatsError&) {
    }
    if (per_band) {
        for (int n = 0; n < dim; ++n) {
            s.band_scaled_variance.push_back(scaled_variance(records, n, options));
            try {
                s.band_kurtosis.push_back(kurtosis(records, n, options));
            } catch (const StatsError&) {
                s.band_kurtosis.push_back(std::nullopt);
            }
        }
    }
    s.pearson = gap_pearson(records);
    const auto gaps = bulk_gaps(dim, options.bulk_fraction);
    for (int k = 1; k <= 3; ++k) {
        try {
            s.gap_correlation.push_back(gap_correlation(records, gaps, k, options.bootstrap));
        } catch (const StatsError&) {
            break;
        }
    }
    return s;
}

}  // namespace chernstat
