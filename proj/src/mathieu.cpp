#include "subheat/mathieu.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <lapacke.h>

#include "subheat/errors.hpp"

namespace subheat {

namespace {

constexpr const char* kModule = "heat_spectral";

void check_q(double q) {
    if (!(q >= 0.0) || !std::isfinite(q)) throw Error(ErrorKind::InvalidInput, kModule, "Mathieu q must be >= 0");
}

}  // namespace

MathieuClass mathieu_class(MathieuKind kind, int order) {
    if (kind == MathieuKind::Ce) return order % 2 == 0 ? MathieuClass::CeEven : MathieuClass::CeOdd;
    return order % 2 == 1 ? MathieuClass::SeOdd : MathieuClass::SeEven;
}

int class_harmonic(MathieuClass cls, int j) {
    switch (cls) {
        case MathieuClass::CeEven: return 2 * j;
        case MathieuClass::CeOdd:
        case MathieuClass::SeOdd: return 2 * j + 1;
        case MathieuClass::SeEven: return 2 * j + 2;
    }
    return 0;
}

int class_index(int order, MathieuKind kind) {
    if (kind == MathieuKind::Se && order % 2 == 0) return order / 2 - 1;
    return order / 2;
}

int default_truncation(double q, int k) {
    // Coefficients of the low modes spread over about 4 (2q)^(1/4) harmonics.
    const int spread = static_cast<int>(std::ceil(6.0 * std::pow(2.0 * q, 0.25)));
    return std::max(32, k / 2 + 20 + spread);
}

MathieuClassSolution solve_mathieu_class(MathieuClass cls, double q, int M, int n_modes) {
    check_q(q);
    if (M < 2 || n_modes < 1 || n_modes > M)
        throw Error(ErrorKind::InvalidInput, kModule, "Mathieu truncation must satisfy 1 <= modes <= M");
    std::vector<double> d(static_cast<std::size_t>(M)), e(static_cast<std::size_t>(M), q);
    for (int j = 0; j < M; ++j) {
        const double n = class_harmonic(cls, j);
        d[j] = n * n;
    }
    if (cls == MathieuClass::CeEven) e[0] = std::sqrt(2.0) * q;
    if (cls == MathieuClass::CeOdd) d[0] += q;
    if (cls == MathieuClass::SeOdd) d[0] -= q;

    lapack_int found = 0;
    std::vector<double> w(static_cast<std::size_t>(M));
    Eigen::MatrixXd z(M, n_modes);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(M));
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', M, d.data(), e.data(), 0.0, 0.0, 1, n_modes,
                                           0.0, &found, w.data(), z.data(), M, isuppz.data());
    if (info != 0 || found != n_modes)
        throw Error(ErrorKind::NoConvergence, kModule, "tridiagonal eigensolver failed (info " + std::to_string(info) + ")");

    MathieuClassSolution sol;
    sol.cls = cls;
    sol.q = q;
    sol.M = M;
    sol.values = Eigen::Map<Eigen::VectorXd>(w.data(), n_modes);
    sol.coeffs = z;
    for (int i = 0; i < n_modes; ++i) {
        if (sol.coeffs(i, i) < 0.0) sol.coeffs.col(i) *= -1.0;
        if (cls == MathieuClass::CeEven) sol.coeffs(0, i) /= std::sqrt(2.0);
    }
    return sol;
}

int MathieuFunction::harmonic(int j) const { return class_harmonic(mathieu_class(kind, order), j); }

double MathieuFunction::operator()(double theta) const {
    double s = 0.0;
    for (Eigen::Index j = 0; j < fourier_coeffs.size(); ++j) {
        const double n = harmonic(static_cast<int>(j));
        s += fourier_coeffs(j) * (kind == MathieuKind::Ce ? std::cos(n * theta) : std::sin(n * theta));
    }
    return s;
}

double MathieuFunction::derivative2(double theta) const {
    double s = 0.0;
    for (Eigen::Index j = 0; j < fourier_coeffs.size(); ++j) {
        const double n = harmonic(static_cast<int>(j));
        s -= n * n * fourier_coeffs(j) * (kind == MathieuKind::Ce ? std::cos(n * theta) : std::sin(n * theta));
    }
    return s;
}

double MathieuFunction::ode_residual(double theta) const {
    return derivative2(theta) + (char_value - 2.0 * q * std::cos(2.0 * theta)) * (*this)(theta);
}

MathieuFunction mathieu_function(double q, int k, MathieuKind kind, int M, double tol) {
    check_q(q);
    if (k < 0 || (kind == MathieuKind::Se && k < 1))
        throw Error(ErrorKind::InvalidInput, kModule, "invalid Mathieu order");
    const MathieuClass cls = mathieu_class(kind, k);
    const int idx = class_index(k, kind);

    auto build = [&](const MathieuClassSolution& s) {
        MathieuFunction f;
        f.kind = kind;
        f.order = k;
        f.q = q;
        f.char_value = s.values(idx);
        f.fourier_coeffs = s.coeffs.col(idx);
        f.truncation = s.M;
        return f;
    };

    if (M > 0) return build(solve_mathieu_class(cls, q, M, idx + 1));

    int m = default_truncation(q, k);
    MathieuClassSolution cur = solve_mathieu_class(cls, q, m, idx + 1);
    for (int doubling = 0; doubling < 2; ++doubling) {
        MathieuClassSolution next = solve_mathieu_class(cls, q, 2 * m, idx + 1);
        const double diff = std::abs(next.values(idx) - cur.values(idx));
        if (diff < tol * std::max(1.0, std::abs(next.values(idx)))) return build(next);
        m *= 2;
        cur = std::move(next);
    }
    throw Error(ErrorKind::NoConvergence, kModule,
                "characteristic value did not settle after two doublings of the truncation");
}

double mathieu_char(double q, int k, MathieuKind kind, int M) { return mathieu_function(q, k, kind, M).char_value; }

double mathieu_eval(double q, int k, MathieuKind kind, double theta) { return mathieu_function(q, k, kind)(theta); }

}  // namespace subheat
