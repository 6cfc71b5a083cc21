#pragma once

namespace subheat {

/// Thresholds used by classification and by the structural checks on the
/// representation. One record so callers can tighten or relax them together.
struct ToleranceProfile {
    double antisymmetry = 1e-12;
    /// Jacobi residual bound, scaled by max(1, |c|_max^2).
    double jacobi = 1e-12;
    /// Singular values below rank_relative * sigma_max count as zero.
    double rank_relative = 1e-10;
    double metric_eigen = 1e-12;
    double hormander = 1e-10;
    /// Bracket residuals of the canonical basis, in coordinates.
    double canonical_residual = 1e-9;
    /// Discriminant / beta treated as zero below this (relative) size.
    double regime_zero = 1e-9;
    double root_identity = 1e-12;
};

}  // namespace subheat
