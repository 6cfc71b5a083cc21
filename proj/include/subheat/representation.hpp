#pragma once

#include <functional>
#include <vector>

#include "subheat/algebra.hpp"

namespace subheat {

/// Group coordinates: g = [[exp(theta A), (x, y)], [0, 1]].
struct GroupPoint {
    double theta = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// Affine 3x3 representation X = [[A,0],[0,0]], Y = [[0,ybar],[0,0]],
/// R = [[0,rbar],[0,0]] with [X,Y] = beta Y + R, [X,R] = alpha Y, [Y,R] = 0.
struct AffineRep {
    Regime regime;
    Mat2 A;
    Vec2 ybar, rbar;
    Mat3 matX, matY, matR;
};

/// Coefficients of Y and R on d/dx, d/dy at angle theta.
struct FieldCoefficients {
    Vec2 yY;
    Vec2 yR;
};

AffineRep build_rep(const Regime& regime);
/// Throws Error{RegimeMismatch} when the regime does not describe the form's
/// parameters.
AffineRep build_rep(const CanonicalForm& form, const Regime& regime);

/// exp(theta A) in closed form for the regime's A.
Mat2 exp2x2(const Regime& regime, double theta);
/// Scaling-and-squaring exponential; cross-check only.
Mat2 exp2x2_generic(const Mat2& A, double theta);

GroupPoint group_mul(const AffineRep& rep, const GroupPoint& p, const GroupPoint& q);
GroupPoint group_inv(const AffineRep& rep, const GroupPoint& p);
Mat3 to_matrix(const AffineRep& rep, const GroupPoint& p);

FieldCoefficients field_coeffs(const AffineRep& rep, double theta);

/// Left Haar density relative to d theta dx dy is exp(-beta theta); this is
/// the factor turning a coordinate-volume density into a Haar density.
double haar_conversion_factor(const AffineRep& rep, double theta);

enum class Field { X, Y, R };

struct FiniteDifference {
    int order = 4;  // 2 or 4
    double h = 1e-4;
};

using GroupFunction = std::function<double(const GroupPoint&)>;

/// (W_1 W_2 ... W_k f)(p) by nested central differences. The flows are
/// straight lines in (theta, x, y), so each level differentiates exactly
/// along the field.
double apply_operator(const AffineRep& rep, const std::vector<Field>& word, const GroupFunction& f,
                      const GroupPoint& p, const FiniteDifference& fd = {});

}  // namespace subheat
