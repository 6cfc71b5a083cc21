#pragma once

#include <vector>

#include <Eigen/Dense>

namespace subheat {

enum class MathieuKind { Ce, Se };

/// The four parity classes of the Fourier recurrence: harmonics 2j (ce even
/// order), 2j+1 (ce odd), 2j+1 (se odd), 2j+2 (se even).
enum class MathieuClass { CeEven, CeOdd, SeOdd, SeEven };

MathieuClass mathieu_class(MathieuKind kind, int order);
/// Harmonic of coefficient j in a class.
int class_harmonic(MathieuClass cls, int j);
/// Position of an order inside its class.
int class_index(int order, MathieuKind kind);

/// Lowest n_modes eigenpairs of a class truncated to M Fourier coefficients.
/// Columns of coeffs are the true cosine/sine coefficients, normalized so that
/// the function has L2 norm pi on [0, 2 pi], with the coefficient of the mode's
/// own harmonic positive.
struct MathieuClassSolution {
    MathieuClass cls = MathieuClass::CeEven;
    double q = 0.0;
    int M = 0;
    Eigen::VectorXd values;
    Eigen::MatrixXd coeffs;
};

MathieuClassSolution solve_mathieu_class(MathieuClass cls, double q, int M, int n_modes);

/// Truncation large enough for order k at parameter q (before the doubling test).
int default_truncation(double q, int k);

class MathieuFunction {
public:
    MathieuKind kind = MathieuKind::Ce;
    int order = 0;
    double q = 0.0;
    double char_value = 0.0;
    /// Coefficients of cos(n theta) (ce) or sin(n theta) (se), n = harmonic(j).
    Eigen::VectorXd fourier_coeffs;
    int truncation = 0;

    int harmonic(int j) const;
    double operator()(double theta) const;
    double derivative2(double theta) const;
    /// Residual f'' + (a - 2 q cos 2 theta) f.
    double ode_residual(double theta) const;
};

/// Converged when the characteristic value at M and 2M differs by < tol; the
/// truncation is doubled at most twice. Pass M > 0 to force a truncation
/// (no convergence test). Throws Error{NoConvergence}.
MathieuFunction mathieu_function(double q, int k, MathieuKind kind, int M = 0, double tol = 1e-10);
double mathieu_char(double q, int k, MathieuKind kind, int M = 0);
double mathieu_eval(double q, int k, MathieuKind kind, double theta);

}  // namespace subheat
