#pragma once

#include <vector>

#include "subheat/mathieu.hpp"
#include "subheat/representation.hpp"

namespace subheat {

// ---------------------------------------------------------------------------
// SE(2) spectral kernel
// ---------------------------------------------------------------------------

struct SpectralKernelConfig {
    /// Maximum Mathieu modes per parity class; 0 keeps every mode whose
    /// exponential factor is above exp(-mode_cutoff) relative to the ground mode.
    int K = 0;
    double mode_cutoff = 40.0;
    /// Fourier truncation per class; 0 chooses it from q.
    int M = 0;
    /// Radial cutoff; 0 means 8 / sqrt(t), doubled while the integrand at the
    /// cutoff is above rho_tail_tol.
    double rho_max = 0.0;
    double rho_tail_tol = 1e-10;
    int max_rho_doublings = 6;
    /// Gauss-Legendre nodes per radial panel (16 or 8 supported, plus 8 for the
    /// half-resolution estimate).
    int n_rho = 16;
    /// Trapezoid nodes in phi; 0 chooses them from the harmonics in play.
    int n_phi = 0;
    /// Semigroup time of L = X^2 + Y^2 per unit of process time. The Monte
    /// Carlo and Fourier engines run the diffusion with generator L/2, so the
    /// default evaluates the series at L-time t/2.
    double time_scale = 0.5;
};

/// (1/pi) sum_k ce_k(phi) e^{alpha_k tau} ce_k(theta - phi) - se_k(phi) e^{beta_k tau} se_k(theta - phi),
/// q = rho^2 / 4, alpha_k = -rho^2/2 - a_k(q), beta_k = -rho^2/2 - b_k(q); tau is L-time.
struct HatKernelValue {
    double value = 0.0;
    /// Relative size of the last retained mode.
    double tail_bound = 0.0;
    int modes = 0;
};

HatKernelValue se2_hat_kernel(double tau, double theta, double rho, double phi, const SpectralKernelConfig& config = {});

struct SpectralKernelResult {
    double value = 0.0;
    double imag = 0.0;
    /// |full - half resolution| in rho plus the same in phi.
    double error_estimate = 0.0;
    double rho_max = 0.0;
    /// Integrand still above rho_tail_tol at the final cutoff.
    bool truncation_warning = false;
};

/// Kernel at process time t of the se(2) triple (alpha, beta) = (-1, 0).
/// Throws Error{RegimeMismatch} for any other parameters.
SpectralKernelResult se2_kernel(const AffineRep& rep, double t, const GroupPoint& point,
                                const SpectralKernelConfig& config = {});

// ---------------------------------------------------------------------------
// Fourier-in-(x, y) oracle, any regime
// ---------------------------------------------------------------------------

/// Solves d_t u = u''/2 + beta u' - (xi . exp(theta A) ybar)^2 u / 2 for the
/// (x, y)-Fourier transform of the endpoint density.
struct OracleConfig {
    /// Theta spacing h = sqrt(t) * h_factor unless h > 0 is given.
    double h_factor = 1.0 / 16.0;
    double h = 0.0;
    /// Half-width of the theta window in units of sqrt(t) beyond the drift and targets.
    double window_sigmas = 8.0;
    /// TR-BDF2 steps on the graded mesh t (j/n)^2: n = 2 sqrt(t) / (dt_factor h).
    double dt_factor = 1.0;
    /// Relative cut-off on u_hat used to stop exploring the xi lattice.
    double xi_threshold = 1e-7;
    /// Relative tolerance between the lattice sum and its even sublattice.
    double xi_refine_tol = 1e-6;
    int max_xi_refinements = 3;
    /// Upper bound on solved lattice nodes (half plane) before giving up.
    long max_xi_nodes = 400000;
    /// Combine h and h/2 solutions by Richardson extrapolation.
    bool richardson = true;
    double boundary_tol = 1e-10;
    unsigned workers = 0;
};

struct FourierSlice {
    std::vector<double> theta_grid;
    std::vector<double> values;
    Vec2 xi = Vec2::Zero();
    double h = 0.0;
    int time_steps = 0;
    /// Richardson value minus the h/2 value at each node (empty without Richardson).
    std::vector<double> richardson_delta;
};

/// One theta-slice solve at a fixed xi. With config.richardson the values are
/// (4 u_{h/2} - u_h) / 3 on the h grid. Throws Error{BoundaryMassLeak} when
/// |u| at the window edges exceeds boundary_tol times its maximum.
FourierSlice fourier_ode_oracle(const AffineRep& rep, double t, const Vec2& xi, double theta_lo, double theta_hi,
                                double h, const OracleConfig& config = {});

struct OracleResult {
    double value = 0.0;
    /// |Richardson value - fine value| plus the xi-sublattice difference.
    double error_estimate = 0.0;
    double xi_spacing = 0.0;
    long xi_nodes = 0;
};

std::vector<OracleResult> oracle_kernel(const AffineRep& rep, double t, const std::vector<GroupPoint>& points,
                                        const OracleConfig& config = {});
OracleResult oracle_kernel(const AffineRep& rep, double t, const GroupPoint& point, const OracleConfig& config = {});

}  // namespace subheat
