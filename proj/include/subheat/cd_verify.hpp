#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subheat/heat_mc.hpp"
#include "subheat/symbolic.hpp"

namespace subheat {

// ---------------------------------------------------------------------------
// Carre du champ forms
// ---------------------------------------------------------------------------

/// Gamma(f) = (Xf)^2 + (Yf)^2, Gamma^R(f) = (Rf)^2,
/// Gamma_2 = L Gamma(f)/2 - Gamma(f, Lf), Gamma_2^R likewise, and Lf.
struct CarreForms {
    Expr gamma, gammaR, gamma2, gamma2R, lf;
};

struct CarreResult {
    double gamma = 0.0, gammaR = 0.0, gamma2 = 0.0, gamma2R = 0.0, lf = 0.0;
};

CarreForms carre_forms(const FieldCalculus& fc, const Expr& f);
CarreResult evaluate(const CarreForms& forms, const GroupPoint& p);
CarreResult carre(const FieldCalculus& fc, const Expr& f, const GroupPoint& p);

/// Gamma(f, g) = (Xf)(Xg) + (Yf)(Yg) at p.
double gamma_bilinear(const FieldCalculus& fc, const Expr& f, const Expr& g, const GroupPoint& p);

/// Gamma_2 + nu Gamma_2^R - (Lf)^2/2 - (1 - nu^2 alpha^2) Gamma^R / 2 - (-alpha^+ - beta^2 - 1/nu) Gamma.
double cd_residual(const CarreResult& c, double nu, Parameters p);
double cd_residual(const FieldCalculus& fc, const Expr& f, const GroupPoint& p, double nu);
/// The alpha = 0 form: Gamma_2 + nu Gamma_2^R - (Lf)^2/2 - Gamma^R/2 - (-beta^2 - 1/nu) Gamma.
double cd_residual_alpha0(const CarreResult& c, double nu, double beta);

/// Sum-of-squares expansion of Gamma_2; Symmetrized uses (XY + YX)f, AsPrinted
/// uses (XY + XY)f.
enum class Gamma2Variant { Symmetrized, AsPrinted };
double gamma2_expanded(const FieldCalculus& fc, const Expr& f, const GroupPoint& p,
                       Gamma2Variant variant = Gamma2Variant::Symmetrized);
/// (XRf)^2 + (YRf)^2 + alpha (Rf)((XY + YX)f - beta Yf).
double gamma2R_expanded(const FieldCalculus& fc, const Expr& f, const GroupPoint& p);

struct NamedFunction {
    std::string name;
    Expr f;
};

/// Twelve test functions mixing polynomials in (x, y) with exponential,
/// trigonometric and polynomial factors in theta.
std::vector<NamedFunction> test_function_suite();

struct CdSweepConfig {
    int n_points = 1000;
    std::vector<double> nus{0.1, 1.0, 10.0};
    std::vector<Parameters> params{{1, 0}, {-1, 0}, {1, 1}, {-2, 1}, {0, 1}};
    /// Points uniform in [-box, box]^3.
    double box = 1.5;
    std::uint64_t seed = kDefaultSeed;
    unsigned workers = 0;
};

struct CdRecord {
    std::string function;
    Parameters params;
    double nu = 0.0;
    GroupPoint point;
    double residual = 0.0;
};

struct CDReport {
    std::vector<CdRecord> residuals;
    double min_residual = 0.0;
    CdRecord worst;
    CdSweepConfig settings;
};

CDReport cd_sweep(const CdSweepConfig& config = {});

// ---------------------------------------------------------------------------
// Semigroup bounds
// ---------------------------------------------------------------------------

/// (1 - s)^(order + 1) with s = |p - center|^2 / radius^2 in coordinates; C^order.
struct Bump {
    GroupPoint center;
    double radius = 1.0;
    int order = 3;
};

struct BumpJet {
    double f = 0.0, xf = 0.0, yf = 0.0, rf = 0.0;
};

BumpJet bump_jet(const AffineRep& rep, const Bump& bump, const GroupPoint& p);

double kappa_cd(Parameters p);
/// (1 / 2 kappa) ln((kappa + |alpha|) / |alpha|), with the kappa -> 0 limit 1 / (2 |alpha|).
double t_window_max(Parameters p);
/// kappa e^{2 kappa T} / (kappa + |alpha| (1 - e^{2 kappa T})), written as
/// e^{2 kappa T} / (1 - 2 |alpha| T expm1(2 kappa T) / (2 kappa T)) so kappa = 0 is exact.
double gradient_bound_coefficient(Parameters p, double T);

struct BoundSpec {
    SdeSpec sde{100000, 128, kDefaultSeed, Generator::SubLaplacian, 0};
    /// Central-difference step for the fields applied to P_T f.
    double fd_step = 1e-3;
    GroupPoint base;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct BoundReport {
    Estimate lhs, rhs;
    /// Delta-method standard error of lhs - rhs on the shared paths.
    double diff_std_error = 0.0;
    double T = 0.0;
    double kappa_cd = 0.0;
    double t_window_max = 0.0;
    /// (t, a(t) / a(0)) on [0, T].
    std::vector<std::pair<double, double>> a_curve;
    bool pass = false;
    BoundSpec settings;
};

/// Gamma(P_T f) + Gamma^R(P_T f)/|alpha| <= coefficient P_T Gamma(f) + P_T Gamma^R(f)/|alpha|,
/// pass when lhs <= rhs + 3 diff_std_error. Throws Error{WindowExceeded} when
/// T >= t_window_max and Error{InvalidInput} when alpha = 0 or T < 0.
BoundReport gradient_bound_check(const AffineRep& rep, const Bump& f, double T, const BoundSpec& spec = {});

/// Gamma(P_T f) + Gamma^R(P_T f)/|alpha| - e^{2(kappa+|alpha|)T} P_T Gamma(f) - P_T Gamma^R(f)/|alpha|
///   <= |alpha| e^{2(kappa+|alpha|)T} (e^{2(kappa+|alpha|)T} - 1) (P_T f^2 - (P_T f)^2).
BoundReport reverse_poincare_check(const AffineRep& rep, const Bump& f, double T, const BoundSpec& spec = {});

}  // namespace subheat
