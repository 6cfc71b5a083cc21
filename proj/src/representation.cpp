#include "subheat/representation.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "subheat/errors.hpp"

namespace subheat {

namespace {

constexpr const char* kModule = "representation";

Mat3 block(const Mat2& a) {
    Mat3 m = Mat3::Zero();
    m.topLeftCorner<2, 2>() = a;
    return m;
}

Mat3 column(const Vec2& v) {
    Mat3 m = Mat3::Zero();
    m.block<2, 1>(0, 2) = v;
    return m;
}

Vec2 coefficients(const AffineRep& rep, Field f, double theta) {
    switch (f) {
        case Field::X: return Vec2::Zero();
        case Field::Y: return exp2x2(rep.regime, theta) * rep.ybar;
        case Field::R: return exp2x2(rep.regime, theta) * rep.rbar;
    }
    return Vec2::Zero();
}

GroupPoint flow(const AffineRep& rep, Field f, const GroupPoint& p, double eps) {
    if (f == Field::X) return {p.theta + eps, p.x, p.y};
    const Vec2 c = coefficients(rep, f, p.theta);
    return {p.theta, p.x + eps * c(0), p.y + eps * c(1)};
}

double nested(const AffineRep& rep, const std::vector<Field>& word, std::size_t level,
              const GroupFunction& f, const GroupPoint& p, const FiniteDifference& fd) {
    if (level == word.size()) {
        const double v = f(p);
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, kModule, "test function is not finite");
        return v;
    }
    const Field w = word[level];
    auto g = [&](double eps) { return nested(rep, word, level + 1, f, flow(rep, w, p, eps), fd); };
    const double h = fd.h;
    if (fd.order == 2) return (g(h) - g(-h)) / (2.0 * h);
    return (-g(2 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2 * h)) / (12.0 * h);
}

}  // namespace

AffineRep build_rep(const Regime& r) {
    AffineRep rep;
    rep.regime = r;
    switch (r.tag) {
        case RegimeTag::Rank1Heisenberg:
            rep.A << 0, 1, 0, 0;
            rep.ybar << 0, 1;
            rep.rbar << 1, 0;
            break;
        case RegimeTag::Rank1BetaPos:
            rep.A << r.beta, 0, 0, 0;
            rep.ybar << 1, 1;
            rep.rbar << 0, -r.beta;
            break;
        case RegimeTag::DeltaPos:
            rep.A << r.lambda1, 0, 0, r.lambda2;
            rep.ybar << -r.lambda1, r.lambda2;
            rep.rbar << -r.alpha, r.alpha;
            break;
        case RegimeTag::DeltaNeg:
            rep.A << r.rho, -r.omega, r.omega, r.rho;
            rep.ybar << -r.omega, r.rho;
            rep.rbar << 0, -(r.rho * r.rho + r.omega * r.omega);
            break;
        case RegimeTag::DeltaZero:
            rep.A << r.lambda, 1, 0, r.lambda;
            rep.ybar << r.lambda - 1, -r.lambda;
            rep.rbar << -r.lambda * r.lambda, r.lambda * r.lambda;
            break;
    }
    rep.matX = block(rep.A);
    rep.matY = column(rep.ybar);
    rep.matR = column(rep.rbar);
    return rep;
}

AffineRep build_rep(const CanonicalForm& form, const Regime& regime) {
    const double scale = std::max({1.0, std::abs(regime.alpha), regime.beta * regime.beta});
    const Regime expect = Regime::from_parameters({form.alpha, form.beta});
    if (expect.tag != regime.tag || std::abs(form.alpha - regime.alpha) > 1e-9 * scale ||
        std::abs(form.beta - regime.beta) > 1e-9 * std::max(1.0, regime.beta))
        throw Error(ErrorKind::RegimeMismatch, kModule,
                    "regime " + std::string(to_string(regime.tag)) + " does not match the form");
    return build_rep(regime);
}

Mat2 exp2x2(const Regime& r, double t) {
    Mat2 m;
    switch (r.tag) {
        case RegimeTag::Rank1Heisenberg:
            m << 1, t, 0, 1;
            break;
        case RegimeTag::Rank1BetaPos:
            m << std::exp(r.beta * t), 0, 0, 1;
            break;
        case RegimeTag::DeltaPos:
            m << std::exp(r.lambda1 * t), 0, 0, std::exp(r.lambda2 * t);
            break;
        case RegimeTag::DeltaNeg: {
            const double e = std::exp(r.rho * t), c = std::cos(r.omega * t), s = std::sin(r.omega * t);
            m << e * c, -e * s, e * s, e * c;
            break;
        }
        case RegimeTag::DeltaZero: {
            const double e = std::exp(r.lambda * t);
            m << e, t * e, 0, e;
            break;
        }
    }
    return m;
}

Mat2 exp2x2_generic(const Mat2& A, double theta) {
    const Mat2 m = theta * A;
    return m.exp();
}

GroupPoint group_mul(const AffineRep& rep, const GroupPoint& p, const GroupPoint& q) {
    const Vec2 v = Vec2(p.x, p.y) + exp2x2(rep.regime, p.theta) * Vec2(q.x, q.y);
    return {p.theta + q.theta, v(0), v(1)};
}

GroupPoint group_inv(const AffineRep& rep, const GroupPoint& p) {
    const Vec2 v = -(exp2x2(rep.regime, -p.theta) * Vec2(p.x, p.y));
    return {-p.theta, v(0), v(1)};
}

Mat3 to_matrix(const AffineRep& rep, const GroupPoint& p) {
    Mat3 m = Mat3::Identity();
    m.topLeftCorner<2, 2>() = exp2x2(rep.regime, p.theta);
    m(0, 2) = p.x;
    m(1, 2) = p.y;
    return m;
}

FieldCoefficients field_coeffs(const AffineRep& rep, double theta) {
    const Mat2 e = exp2x2(rep.regime, theta);
    return {e * rep.ybar, e * rep.rbar};
}

double haar_conversion_factor(const AffineRep& rep, double theta) {
    return std::exp(rep.regime.beta * theta);
}

double apply_operator(const AffineRep& rep, const std::vector<Field>& word, const GroupFunction& f,
                      const GroupPoint& p, const FiniteDifference& fd) {
    if (fd.order != 2 && fd.order != 4)
        throw Error(ErrorKind::InvalidInput, kModule, "finite-difference order must be 2 or 4");
    if (!(fd.h > 0.0)) throw Error(ErrorKind::InvalidInput, kModule, "finite-difference step must be positive");
    return nested(rep, word, 0, f, p, fd);
}

}  // namespace subheat
