#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chernstat/records.hpp"

namespace chernstat {

class StatsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return lo <= x && x <= hi; }
    double half_width() const { return 0.5 * (hi - lo); }
};

/// Point estimate with a bootstrap confidence interval.
struct Estimate {
    double value = 0.0;
    Interval ci;
    std::size_t count = 0;  // records entering the estimate
};

struct BootstrapOptions {
    std::size_t resamples = 1000;
    double level = 0.95;
    std::uint64_t seed = 0x6a09e667f3bcc908ULL;
    int workers = 1;
};

/// Percentile bootstrap over `n` records: `statistic` receives resampled
/// record indices. Resample b draws from its own generator seeded from
/// (options.seed, b), so the interval does not depend on `workers`.
/// Resamples where the statistic throws StatsError are skipped; if more
/// than half fail, the error propagates.
Interval bootstrap(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                   const BootstrapOptions& options = {});

/// Which sigma^2 scales the Chern statistics. `velocity` uses the variance
/// of level derivatives of the sampled ensemble, -c''(0); `sensitivity`
/// uses -c''(0) / 2.
enum class SigmaConvention { velocity, sensitivity };

std::string_view to_string(SigmaConvention convention);
SigmaConvention parse_sigma_convention(std::string_view name);

struct StatsOptions {
    double bulk_fraction = 0.5;  // central fraction of bands treated as bulk
    SigmaConvention sigma = SigmaConvention::velocity;
    double universal_constant = 1.67;
    double area = 4.0 * 3.14159265358979323846;
    BootstrapOptions bootstrap;
};

double sigma2_of(const EnsembleRecord& record, SigmaConvention convention);

/// Zero-based indices of the central `fraction` of bands 0..dim-1.
std::vector<int> bulk_bands(int dim, double fraction);

/// Zero-based interior gap indices (1..dim-1) between bulk bands.
std::vector<int> bulk_gaps(int dim, double fraction);

/// Ensemble density of states per band: the inverse of the ensemble-mean
/// local level spacing, i.e. the harmonic mean of the records' rho_n.
/// Averaging rho_n itself would be biased upward at long correlation
/// lengths, where each record's spacing is a single random draw.
std::vector<double> ensemble_density(std::span<const EnsembleRecord> records);

/// Mean over `bands` of the ensemble rho_n times sigma.
double rho_sigma(std::span<const EnsembleRecord> records, std::span<const int> bands, const StatsOptions& options);

/// 2 pi <N_n^2> / (rho_n^2 sigma^2 A) for a single band (zero-based), with
/// rho_n the ensemble density.
Estimate scaled_variance(std::span<const EnsembleRecord> records, int band, const StatsOptions& options);

/// Same, pooled over `bands`: each record contributes the mean of its
/// scaled N_n^2 over the bands.
Estimate scaled_variance(std::span<const EnsembleRecord> records, std::span<const int> bands,
                         const StatsOptions& options);

/// Excess kurtosis <x^4> / <x^2>^2 - 3 of a sample (raw moments).
double excess_kurtosis(std::span<const double> values);

/// Excess kurtosis of N_n for one band.
Estimate kurtosis(std::span<const EnsembleRecord> records, int band, const StatsOptions& options);

/// Excess kurtosis of the scaled Chern numbers N_n / (rho_n sigma) pooled
/// over `bands`.
Estimate kurtosis(std::span<const EnsembleRecord> records, std::span<const int> bands, const StatsOptions& options);

/// Covariance and Pearson matrices of the gap Chern numbers G_0..G_M.
/// Entries involving a zero-variance gap are empty.
struct PearsonMatrix {
    int dim = 0;
    std::vector<std::vector<std::optional<double>>> covariance;
    std::vector<std::vector<std::optional<double>>> correlation;
    std::size_t count = 0;
};

PearsonMatrix gap_pearson(std::span<const EnsembleRecord> records);

/// g_k: mean over `gaps` of g_{n, n-k} (missing entries skipped).
double mean_gap_correlation(const PearsonMatrix& matrix, std::span<const int> gaps, int k);

/// Population mean and standard deviation of g_{n, n-k} over `gaps`.
struct GapCorrelationSpread {
    int k = 0;
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t gaps = 0;
};

GapCorrelationSpread gap_correlation_spread(const PearsonMatrix& matrix, std::span<const int> gaps, int k);

/// g_k with a bootstrap interval over records.
Estimate gap_correlation(std::span<const EnsembleRecord> records, std::span<const int> gaps, int k,
                         const BootstrapOptions& options);

/// Gaussian window (1 / (sqrt(2 pi) eps)) exp(-E^2 / (2 eps^2)).
double gaussian_window(double energy, double eps);

/// N_eps(E) = sum_n N_n delta_eps(E - <E_n>) with the record's own <E_n>.
double weighted_chern(const EnsembleRecord& record, double eps, double energy);

struct WeightedVariance {
    Estimate estimate;
    double mean_spacing = 0.0;   // 1 / rho near `energy`
    bool below_spacing = false;  // eps < mean level spacing
};

WeightedVariance weighted_chern_variance(std::span<const EnsembleRecord> records, double eps, double energy,
                                         const BootstrapOptions& options);

/// Ensemble density of states at `energy`, interpolated between the
/// ensemble-mean band energies.
double density_at(std::span<const EnsembleRecord> records, double energy);

/// Truncated lattice sum with its analytic tail bound.
struct TheoryF {
    double value = 0.0;
    double tail_bound = 0.0;
    long terms = 0;
};

/// F(X) = sum_n e^{-X n^2} [e^{-X n^2} - e^{-X (n+1)^2}/2 - e^{-X (n-1)^2}/2]
/// over all integers n. Throws std::domain_error for X <= 0.
TheoryF theory_F_detail(double x);
double theory_F(double x);

enum class PredictionMode { exact, asymptotic };

std::string_view to_string(PredictionMode mode);
PredictionMode parse_prediction_mode(std::string_view name);

/// <N^2> expected from the universal constant: I rho^2 sigma^2 A / (2 pi).
double universal_chern_variance(double rho, double sigma, double area, double universal_constant);

/// Weighted-variance prediction. Exact: (<N^2> / (2 pi eps^2)) F(X) with
/// X = 1 / (2 eps^2 rho^2). Asymptotic: (3 I / (128 sqrt(pi))) A rho sigma^2
/// / eps^3.
double predict_weighted_variance(double eps, double rho, double sigma, double area, double chern_variance,
                                 double universal_constant, PredictionMode mode);

/// Measured weighted variance against the prediction over a grid of
/// eps * rho values, at centre energy `energy`.
struct WeightedVariancePoint {
    double eps = 0.0;
    double eps_rho = 0.0;
    WeightedVariance measured;
    double predicted_exact = 0.0;
    double predicted_asymptotic = 0.0;
    double ratio = 0.0;  // measured / exact prediction
    Interval ratio_ci;
};

struct WeightedVarianceCurve {
    double rho = 0.0;    // density of states at the centre energy
    double sigma = 0.0;
    double chern_variance = 0.0;  // <N^2> entering the exact prediction
    std::vector<WeightedVariancePoint> points;
};

/// `measured_chern_variance` selects the bulk mean of N_n^2 instead of
/// the universal-constant value for <N^2>.
WeightedVarianceCurve weighted_variance_curve(std::span<const EnsembleRecord> records, std::span<const double> eps_rho,
                                              double energy, const StatsOptions& options,
                                              bool measured_chern_variance = false);

/// y = amplitude * x^(-exponent), fitted by weighted least squares on
/// (log x, log y).
struct PowerLawFit {
    double amplitude = 0.0;
    double exponent = 0.0;
    double amplitude_error = 0.0;
    double exponent_error = 0.0;
    double residual = 0.0;  // weighted sum of squared log residuals
    std::size_t points = 0;
};

/// Throws StatsError for fewer than 3 points, mismatched lengths, or
/// non-positive x, y or weights. Empty `weights` means unit weights.
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y, std::span<const double> weights = {});

/// Aggregated statistics of one ensemble.
struct SummaryStats {
    EnsembleKey key;
    std::size_t records = 0;
    std::size_t excluded = 0;
    std::vector<int> bulk;
    double rho_sigma = 0.0;
    Estimate scaled_variance;  // bulk-pooled
    std::optional<Estimate> kurtosis;
    std::vector<Estimate> band_scaled_variance;
    std::vector<std::optional<Estimate>> band_kurtosis;
    PearsonMatrix pearson;
    std::vector<Estimate> gap_correlation;  // g_1, g_2, g_3 over bulk gaps
};

SummaryStats summarize(const Ensemble& ensemble, const StatsOptions& options, bool per_band = false);

}  // namespace chernstat
