#pragma once

#include <cmath>

// Closed-form Heisenberg kernel for the coordinates (theta, x, y) =
// (B1, int B1 dB2, B2): x - theta y / 2 is the Levy area, whose conditional
// characteristic function given the endpoint is
//   (l t/2) / sinh(l t/2) * exp(-|b|^2/(2t) * ((l t/2) coth(l t/2) - 1)).
inline double heisenberg_exact(double t, double theta, double x, double y) {
    const double pi = 3.14159265358979323846;
    const double b2 = theta * theta + y * y;
    const double area = x - 0.5 * theta * y;
    const double lmax = 120.0 / t, dl = 0.002 / t;
    double sum = 0.0;
    for (double l = dl; l <= lmax; l += dl) {
        const double s = 0.5 * l * t;
        const double phi = s / std::sinh(s) * std::exp(-b2 / (2 * t) * (s / std::tanh(s) - 1.0));
        sum += 2.0 * phi * std::cos(l * area);
    }
    sum = (sum + 1.0) * dl;  // l = 0 term has phi = 1
    return std::exp(-b2 / (2 * t)) / (2 * pi * t) * sum / (2 * pi);
}
