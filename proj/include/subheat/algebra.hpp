#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "subheat/tolerance.hpp"

namespace subheat {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// The pair (alpha, beta) labelling a triple up to isomorphism.
struct Parameters {
    double alpha = 0.0;
    double beta = 0.0;
};

/// Structure constants of a 3-dimensional real Lie algebra:
/// [e_i, e_j] = sum_k c(k, i, j) e_k.
class LieAlgebra3 {
public:
    LieAlgebra3() { c_.fill(0.0); }

    double& operator()(int k, int i, int j) { return c_[static_cast<std::size_t>(9 * k + 3 * i + j)]; }
    double operator()(int k, int i, int j) const { return c_[static_cast<std::size_t>(9 * k + 3 * i + j)]; }

    /// Sets [e_i, e_j] = v and [e_j, e_i] = -v.
    void set_bracket(int i, int j, const Vec3& v);

    Vec3 bracket(const Vec3& u, const Vec3& v) const;
    /// Matrix of ad_u in the coordinate basis.
    Mat3 ad(const Vec3& u) const;
    double max_abs() const;

    /// Structure constants after the change of basis e'_a = sum_i P(i, a) e_i.
    LieAlgebra3 change_basis(const Mat3& P) const;

    /// The algebra with [X,Y]=Z, [X,Z]=alpha Y + beta Z, [Y,Z]=0 on (e1,e2,e3).
    static LieAlgebra3 canonical(Parameters p);

private:
    std::array<double, 27> c_{};
};

struct SubRiemannianTriple {
    LieAlgebra3 algebra;
    /// Two coordinate vectors spanning the horizontal plane H.
    std::array<Vec3, 2> h_basis{Vec3::UnitX(), Vec3::UnitY()};
    /// Gram matrix of the inner product on H in the h_basis.
    Mat2 metric = Mat2::Identity();

    /// Same abstract triple in the basis e'_a = sum_i P(i, a) e_i.
    SubRiemannianTriple change_basis(const Mat3& P) const;
    /// Same triple with H spanned by (h_basis * Q); the metric is transported.
    SubRiemannianTriple change_h_frame(const Mat2& Q) const;
    SubRiemannianTriple scale_metric(double s) const;
};

/// Triple in canonical form for the given parameters, with H = span(e1, e2)
/// and the identity metric.
SubRiemannianTriple canonical_triple(Parameters p);

enum class Violation {
    NotAntisymmetric,
    JacobiFails,
    Commutative,
    NotSolvable,
    HBasisDegenerate,
    MetricNotSymmetric,
    MetricNotPositive,
    NotHormander,
};

std::string_view to_string(Violation v);

struct ValidationReport {
    std::vector<Violation> violations;
    double antisymmetry_residual = 0.0;
    double jacobi_residual = 0.0;
    int derived_rank = 0;

    bool ok() const { return violations.empty(); }
    bool has(Violation v) const;
};

ValidationReport validate(const SubRiemannianTriple& triple, const ToleranceProfile& tol = {});

enum class RegimeTag { Rank1Heisenberg, Rank1BetaPos, DeltaPos, DeltaNeg, DeltaZero };

std::string_view to_string(RegimeTag tag);
std::optional<RegimeTag> regime_tag_from_string(std::string_view name);

/// Regime of (alpha, beta) together with the constants each regime's
/// representation is written in. Unused extras are zero.
struct Regime {
    RegimeTag tag = RegimeTag::Rank1Heisenberg;
    double alpha = 0.0;
    double beta = 0.0;
    double delta = 0.0;
    double lambda1 = 0.0, lambda2 = 0.0;          // DeltaPos
    double rho = 0.0, omega = 0.0, theta0 = 0.0;  // DeltaNeg
    double lambda = 0.0;                          // DeltaZero

    Parameters parameters() const { return {alpha, beta}; }

    /// alpha == 0 exactly selects the rank-1 tags; otherwise the sign of
    /// delta = beta^2 + 4 alpha, with |delta| <= regime_zero * (beta^2 + 4|alpha|)
    /// treated as zero. In the DeltaZero case alpha is snapped to -lambda^2.
    static Regime from_parameters(Parameters p, const ToleranceProfile& tol = {});
};

/// Connection and curvature constants of the canonical CR structure.
struct GeometricData {
    /// Reeb field R = -beta Y + Z in the triple's coordinates.
    Vec3 reeb;
    double torsion_coeff = 0.0;
    double ricci_constant = 0.0;
    double chi = 0.0;
    double kappa_ab = 0.0;
    /// christoffel[a][b] = coefficients of nabla_{e_a} e_b in the frame
    /// (X, Y, R), frame order X, Y, R.
    std::array<std::array<Vec3, 3>, 3> christoffel{};
};

GeometricData geometric_data(Parameters p);

struct CanonicalForm {
    Vec3 X, Y, Z;
    double alpha = 0.0;
    double beta = 0.0;
    int derived_rank = 0;
};

struct Classification {
    CanonicalForm form;
    Regime regime;
    GeometricData geometry;
};

/// Canonical basis and parameters for a triple (constructive proof of the
/// normal form). Throws Error{NotSolvable | NotHormander | InvalidInput} when
/// validation fails, Error{DegenerateInput} when g' and H cannot be
/// intersected cleanly.
Classification canonicalize(const SubRiemannianTriple& triple, const ToleranceProfile& tol = {});

/// Largest bracket residual of the canonical relations for a form.
double canonical_residual(const LieAlgebra3& algebra, const CanonicalForm& form);

/// Coefficients in ascending powers of lambda.
struct CharacteristicPolynomials {
    std::array<double, 3> ad_x_derived;  // lambda^2 - beta lambda - alpha
    std::array<double, 4> pi_x;          // -lambda^3 + beta lambda^2 + alpha lambda
};

CharacteristicPolynomials characteristic_poly(const CanonicalForm& form);

/// det(ad_v - lambda I) of an algebra element, ascending powers.
std::array<double, 4> adjoint_charpoly(const LieAlgebra3& algebra, const Vec3& v);

/// Positive C with C beta_hat = beta and C^2 alpha_hat = alpha, when one
/// exists. C = 1 when all four parameters vanish.
std::optional<double> almost_isomorphic(Parameters p, Parameters p_hat, double rel_tol = 1e-12);

}  // namespace subheat
