#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "chernstat/correlation.hpp"
#include "chernstat/quadrature.hpp"

using namespace chernstat;

namespace {

/// Modified spherical Bessel function i_l(x) via the cylindrical one.
double sph_bessel_i(int l, double x) { return std::sqrt(std::numbers::pi / (2 * x)) * std::cyl_bessel_i(l + 0.5, x); }

double second_derivative_at_zero(const CorrelationSpec& spec)
{
    const double h = 1e-4;
    return (correlation_at(spec, 2 * h) - 2 * correlation_at(spec, h) + correlation_at(spec, 0.0)) / (h * h);
}

}  // namespace

TEST_SUITE("correlation")
{
    TEST_CASE("correlation functions take their defining values")
    {
        const auto g = CorrelationSpec::gaussian(0.7);
        CHECK(correlation_at(g, 0.0) == doctest::Approx(1.0));
        CHECK(correlation_at(g, 0.5) == doctest::Approx(std::exp(-0.25 / (2 * 0.49))));
        const auto l = CorrelationSpec::lorentzian(0.3);
        CHECK(correlation_at(l, 0.6) == doctest::Approx(1.0 / (1.0 + 4.0)));
        const auto f = CorrelationSpec::four_matrix(0.4);
        const double c2 = std::cos(0.4) * std::cos(0.4), s2 = std::sin(0.4) * std::sin(0.4);
        CHECK(correlation_at(f, 2.0) == doctest::Approx(c2 - s2));  // antipodal: r . r' = -1
        CHECK(correlation_at(f, 0.0) == doctest::Approx(1.0));
        CHECK_THROWS_AS(correlation_at(g, 2.5), std::domain_error);
        CHECK_THROWS_AS(correlation_at(g, -0.1), std::domain_error);
    }

    TEST_CASE("Gaussian correlation decays monotonically and stays positive")
    {
        const auto g = CorrelationSpec::gaussian(0.5);
        double prev = 2.0;
        for (double d = 0.0; d <= 2.0; d += 0.05) {
            const double c = correlation_at(g, d);
            CHECK(c > 0.0);
            CHECK(c < prev);
            prev = c;
        }
    }

    TEST_CASE("sensitivity examples")
    {
        CHECK(sensitivity(CorrelationSpec::gaussian(1.0)) == doctest::Approx(0.5));
        CHECK(sensitivity(CorrelationSpec::lorentzian(1.0)) == doctest::Approx(1.0));
        CHECK(sensitivity(CorrelationSpec::four_matrix(std::numbers::pi / 2)) == doctest::Approx(0.5));
    }

    TEST_CASE("sensitivity is -c''(0)/2 by finite differences")
    {
        for (const auto& spec : {CorrelationSpec::gaussian(0.3), CorrelationSpec::gaussian(2.0),
                                 CorrelationSpec::lorentzian(0.5), CorrelationSpec::four_matrix(0.9)}) {
            const double c2 = second_derivative_at_zero(spec);
            CHECK(sensitivity(spec) == doctest::Approx(-c2 / 2).epsilon(1e-3));
            CHECK(level_velocity_variance(spec) == doctest::Approx(-c2).epsilon(1e-3));
        }
    }

    TEST_CASE("Gaussian spectrum matches the modified-Bessel closed form")
    {
        // exp(-d^2/2r^2) = e^{-k} e^{k t}, t = 1 - d^2/2, k = 1/r^2, and
        // int_{-1}^{1} e^{k t} P_l(t) dt = 2 i_l(k).
        for (double r : {0.4, 1.0, 2.5}) {
            const auto spec = CorrelationSpec::gaussian(r);
            const auto s = legendre_spectrum(spec, 1e-10);
            const double k = 1.0 / (r * r);
            for (int l = 0; l <= std::min(s.l_max, 40); ++l) {
                const double expect = (2 * l + 1) * std::exp(-k) * sph_bessel_i(l, k);
                CHECK(std::abs(s.coefficients[l] - expect) <= 1e-9 * expect + 1e-12);
            }
            CHECK(s.truncation_residual <= 1e-10);
            CHECK(s.truncation_residual >= 0.0);
        }
    }

    TEST_CASE("spectrum reconstructs the correlation function")
    {
        for (const auto& spec : {CorrelationSpec::gaussian(0.35), CorrelationSpec::lorentzian(0.4)}) {
            const auto s = legendre_spectrum(spec, 1e-9);
            for (double d = 0.0; d <= 2.0; d += 0.1) {
                const double x = 1.0 - d * d / 2;
                CHECK(s.reconstruct(x) == doctest::Approx(correlation_at(spec, d)).epsilon(1e-7).scale(1.0));
            }
            for (double b : s.coefficients)
                CHECK(b >= 0.0);
        }
    }

    TEST_CASE("spectrum failures")
    {
        auto narrow = CorrelationSpec::lorentzian(0.05);
        narrow.l_max_cap = 50;
        try {
            (void)legendre_spectrum(narrow, 1e-8);
            FAIL("expected SpectrumError");
        } catch (const SpectrumError& e) {
            CHECK(std::string(e.what()).find("cap exceeded") != std::string::npos);
        }
        CHECK_THROWS_AS((void)legendre_spectrum(CorrelationSpec::four_matrix(1.0), 1e-8), std::invalid_argument);
    }

    TEST_CASE("family names and validation")
    {
        CHECK(parse_family("gaussian") == Family::gaussian);
        CHECK(parse_family("four_matrix") == Family::four_matrix);
        CHECK(to_string(Family::lorentzian) == "lorentzian");
        CHECK_THROWS_AS(parse_family("cauchy"), std::invalid_argument);
        CHECK_THROWS_AS(CorrelationSpec::gaussian(0.0).validate(), std::invalid_argument);
        CHECK_THROWS_AS(CorrelationSpec::lorentzian(-1.0).validate(), std::invalid_argument);
        CHECK_NOTHROW(CorrelationSpec::four_matrix(std::numbers::pi / 2).validate());
    }
}
