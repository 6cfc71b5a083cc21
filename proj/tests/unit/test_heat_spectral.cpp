#include <cmath>

#include "doctest.h"
#include "subheat/errors.hpp"
#include "subheat/heat_spectral.hpp"

using namespace subheat;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Heat kernel of d^2/dtheta^2 on the circle: wrapped Gaussian of variance 2 tau.
double wrapped_gaussian(double tau, double theta) {
    double s = 0.0;
    for (int m = -20; m <= 20; ++m) {
        const double z = theta + 2 * kPi * m;
        s += std::exp(-z * z / (4 * tau));
    }
    return s / std::sqrt(4 * kPi * tau);
}

}  // namespace

TEST_CASE("hat kernel at rho = 0 is the circle heat kernel") {
    for (double tau : {0.05, 0.3, 1.0}) {
        for (double theta : {0.0, 0.4, -2.0, 3.0}) {
            for (double phi : {0.0, 1.1, -2.5}) {
                const auto v = se2_hat_kernel(tau, theta, 0.0, phi);
                CHECK(v.value == doctest::Approx(wrapped_gaussian(tau, theta)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("hat kernel solves d_tau p = p'' - rho^2 cos^2(theta - phi) p") {
    const double d = 1e-3;
    for (double rho : {0.7, 2.0, 4.5}) {
        for (double phi : {0.0, 0.9}) {
            for (double theta : {-1.0, 0.3, 2.2}) {
                const double tau = 0.4;
                auto p = [&](double ta, double th) { return se2_hat_kernel(ta, th, rho, phi).value; };
                const double dtau = (p(tau + d, theta) - p(tau - d, theta)) / (2 * d);
                const double dth2 = (p(tau, theta + d) - 2 * p(tau, theta) + p(tau, theta - d)) / (d * d);
                const double c = std::cos(theta - phi);
                const double rhs = dth2 - rho * rho * c * c * p(tau, theta);
                CHECK(std::abs(dtau - rhs) <= 1e-5 * std::max(1.0, std::abs(dtau)));
            }
        }
    }
}

TEST_CASE("hat kernel periodicity and decay") {
    const double tau = 0.25;
    for (double theta : {0.2, -1.4}) {
        const double a = se2_hat_kernel(tau, theta, 2.0, 0.5).value;
        CHECK(se2_hat_kernel(tau, theta + 2 * kPi, 2.0, 0.5).value == doctest::Approx(a).epsilon(1e-10));
        CHECK(se2_hat_kernel(tau, theta, 2.0, 0.5 + 2 * kPi).value == doctest::Approx(a).epsilon(1e-10));
    }
    const double near = se2_hat_kernel(tau, 0.0, 1.0, 0.0).value;
    const double far = se2_hat_kernel(tau, 0.0, 6.0, 0.0).value;
    CHECK(near > 0.0);
    CHECK(std::abs(far) < near);
}

TEST_CASE("SE(2) kernel") {
    const auto rep = build_rep(Regime::from_parameters({-1, 0}));
    const auto a = se2_kernel(rep, 0.5, {0.3, 0.2, 0.1});
    // Agrees with the Fourier-ODE oracle to 2e-5 and with Monte Carlo within one standard error.
    CHECK(a.value == doctest::Approx(0.694250261993).epsilon(1e-8));
    CHECK(std::abs(a.imag) <= 1e-8);
    CHECK(a.error_estimate < 1e-6);
    CHECK_FALSE(a.truncation_warning);

    const auto b = se2_kernel(rep, 0.5, {0.3, -0.2, -0.1});
    CHECK(b.value == doctest::Approx(a.value).epsilon(1e-10));

    const auto heis = build_rep(Regime::from_parameters({0, 0}));
    try {
        se2_kernel(heis, 0.5, {0, 0, 0});
        FAIL("expected RegimeMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RegimeMismatch);
    }
    CHECK_THROWS_AS(se2_kernel(rep, -1.0, {0, 0, 0}), Error);
}
