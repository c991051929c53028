#include "chernstat/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chernstat/quadrature.hpp"

namespace chernstat {

namespace {

constexpr double kQuadratureTol = 1e-10;
constexpr double kClipThreshold = 1e-10;

}  // namespace

std::string_view to_string(Family family)
{
    switch (family) {
    case Family::gaussian:
        return "gaussian";
    case Family::lorentzian:
        return "lorentzian";
    case Family::four_matrix:
        return "four_matrix";
    }
    return "unknown";
}

Family parse_family(std::string_view name)
{
    if (name == "gaussian")
        return Family::gaussian;
    if (name == "lorentzian")
        return Family::lorentzian;
    if (name == "four_matrix")
        return Family::four_matrix;
    throw std::invalid_argument("unknown correlation family '" + std::string(name) + "'");
}

void CorrelationSpec::validate() const
{
    if (!std::isfinite(scale))
        throw std::invalid_argument("correlation scale must be finite");
    if (family == Family::four_matrix) {
        if (scale < 0.0 || scale > std::numbers::pi / 2)
            throw std::invalid_argument("four_matrix mixing angle must lie in [0, pi/2]");
    } else if (scale <= 0.0) {
        throw std::invalid_argument("correlation scale must be positive");
    }
    if (!(spectrum_tol > 0.0))
        throw std::invalid_argument("spectrum_tol must be positive");
    if (l_max_cap < 0)
        throw std::invalid_argument("l_max_cap must be non-negative");
}

double correlation_at(const CorrelationSpec& spec, double d)
{
    if (!(d >= 0.0 && d <= 2.0))
        throw std::domain_error("correlation_at: chordal distance outside [0, 2]");
    const double d2 = d * d;
    switch (spec.family) {
    case Family::gaussian:
        return std::exp(-d2 / (2.0 * spec.scale * spec.scale));
    case Family::lorentzian:
        return 1.0 / (1.0 + d2 / (spec.scale * spec.scale));
    case Family::four_matrix: {
        const double c = std::cos(spec.scale);
        const double s = std::sin(spec.scale);
        return c * c + s * s * (2.0 - d2) / 2.0;
    }
    }
    return 0.0;
}

double level_velocity_variance(const CorrelationSpec& spec)
{
    switch (spec.family) {
    case Family::gaussian:
        return 1.0 / (spec.scale * spec.scale);
    case Family::lorentzian:
        return 2.0 / (spec.scale * spec.scale);
    case Family::four_matrix: {
        const double s = std::sin(spec.scale);
        return s * s;
    }
    }
    return 0.0;
}

double sensitivity(const CorrelationSpec& spec) { return 0.5 * level_velocity_variance(spec); }

double AngularSpectrum::reconstruct(double x) const
{
    double sum = 0.0;
    double p0 = 1.0;
    double p1 = x;
    for (int l = 0; l <= l_max; ++l) {
        double p = 0.0;
        if (l == 0) {
            p = 1.0;
        } else if (l == 1) {
            p = x;
        } else {
            p = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
            p0 = p1;
            p1 = p;
        }
        sum += coefficients[l] * p;
    }
    return sum;
}

AngularSpectrum legendre_spectrum(const CorrelationSpec& spec, double tol)
{
    spec.validate();
    if (spec.family == Family::four_matrix)
        throw std::invalid_argument("four_matrix fields are finite-rank and need no angular spectrum");
    if (!(tol > 0.0))
        throw std::invalid_argument("legendre_spectrum: tol must be positive");

    const int cap = spec.l_max_cap;
    std::vector<double> previous;
    std::size_t n = 64;
    while (true) {
        const auto rule = gauss_legendre(n);
        const int degrees = static_cast<int>(n / 2);

        std::vector<double> weighted(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = rule.nodes[i];
            const double d = std::sqrt(std::max(0.0, 2.0 - 2.0 * x));
            weighted[i] = rule.weights[i] * correlation_at(spec, std::min(d, 2.0));
        }

        std::vector<double> b(degrees + 1, 0.0);
        std::vector<double> p0(n, 1.0);
        std::vector<double> p1(rule.nodes);
        for (int l = 0; l <= degrees; ++l) {
            double acc = 0.0;
            if (l == 0) {
                for (std::size_t i = 0; i < n; ++i)
                    acc += weighted[i];
            } else if (l == 1) {
                for (std::size_t i = 0; i < n; ++i)
                    acc += weighted[i] * p1[i];
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    const double p = ((2.0 * l - 1.0) * rule.nodes[i] * p1[i] - (l - 1.0) * p0[i]) / l;
                    p0[i] = p1[i];
                    p1[i] = p;
                    acc += weighted[i] * p;
                }
            }
            b[l] = 0.5 * (2.0 * l + 1.0) * acc;
        }

        bool converged = !previous.empty();
        for (std::size_t l = 0; l < previous.size() && converged; ++l)
            converged = std::abs(previous[l] - b[l]) <= kQuadratureTol;

        if (converged) {
            double clipped = 0.0;
            double sum = 0.0;
            int found = -1;
            for (int l = 0; l <= std::min(degrees, cap); ++l) {
                if (b[l] < 0.0) {
                    if (-b[l] >= kClipThreshold)
                        clipped += -b[l];
                    b[l] = 0.0;
                }
                sum += b[l];
                if (1.0 - sum <= tol) {
                    found = l;
                    break;
                }
            }
            if (clipped > tol)
                throw SpectrumError("covariance is not positive definite at the requested accuracy "
                                    "(negative Legendre mass " + std::to_string(clipped) + ")");
            if (found >= 0) {
                AngularSpectrum out;
                out.coefficients.assign(b.begin(), b.begin() + found + 1);
                out.l_max = found;
                out.truncation_residual = 1.0 - sum;
                out.clipped_mass = clipped;
                out.quadrature_nodes = n;
                return out;
            }
            if (degrees >= cap)
                throw SpectrumError("cap exceeded: truncation residual " + std::to_string(1.0 - sum) +
                                    " above tolerance at l_max_cap = " + std::to_string(cap));
        } else if (degrees >= 2 * cap + 64) {
            throw SpectrumError("cap exceeded: Legendre quadrature did not converge below l_max_cap = " +
                                std::to_string(cap));
        }
        previous = std::move(b);
        n *= 2;
    }
}

}  // namespace chernstat
