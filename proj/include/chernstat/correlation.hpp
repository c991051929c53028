#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chernstat {

enum class Family { gaussian, lorentzian, four_matrix };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

/// Matrix-element correlation family and its scale.
///
/// `scale` is the Gaussian width r, the Lorentzian width l, or the
/// four-matrix mixing angle alpha, depending on `family`. Distances are
/// chordal distances between points of the unit sphere.
struct CorrelationSpec {
    Family family = Family::gaussian;
    double scale = 1.0;
    double spectrum_tol = 1e-8;
    int l_max_cap = 4096;

    static CorrelationSpec gaussian(double r) { return {Family::gaussian, r}; }
    static CorrelationSpec lorentzian(double l) { return {Family::lorentzian, l}; }
    static CorrelationSpec four_matrix(double alpha) { return {Family::four_matrix, alpha}; }

    /// Throws std::invalid_argument when the scale is out of range.
    void validate() const;

    friend bool operator==(const CorrelationSpec&, const CorrelationSpec&) = default;
};

/// c(d) for chordal distance d in [0, 2]; throws std::domain_error otherwise.
double correlation_at(const CorrelationSpec& spec, double d);

/// Parametric sensitivity sigma^2 = -c''(0) / 2.
double sensitivity(const CorrelationSpec& spec);

/// Variance of a level derivative along the sphere for unit-variance
/// matrix elements, -c''(0) = 2 * sensitivity(spec).
double level_velocity_variance(const CorrelationSpec& spec);

/// Legendre coefficients of c on the sphere: c(d) = sum_l b_l P_l(1 - d^2/2).
struct AngularSpectrum {
    std::vector<double> coefficients;  // b_0 .. b_{l_max}
    int l_max = 0;
    double truncation_residual = 0.0;  // 1 - sum b_l
    double clipped_mass = 0.0;         // magnitude of negative b_l set to zero
    std::size_t quadrature_nodes = 0;

    /// sum_l b_l P_l(x).
    double reconstruct(double x) const;
};

class SpectrumError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Computes the angular spectrum for the Gaussian or Lorentzian families.
///
/// Throws SpectrumError when more than spec.l_max_cap degrees would be
/// needed to push the truncation residual below tol, or when the negative
/// coefficient mass exceeds tol. Throws std::invalid_argument for the
/// four-matrix family, which needs no spectrum.
AngularSpectrum legendre_spectrum(const CorrelationSpec& spec, double tol);

}  // namespace chernstat
