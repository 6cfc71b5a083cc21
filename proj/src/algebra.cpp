#include "subheat/algebra.hpp"

#include <algorithm>
#include <cmath>

#include "subheat/errors.hpp"

namespace subheat {

namespace {

constexpr const char* kModule = "algebra_core";

int numerical_rank(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd, double rel_tol) {
    const auto& s = svd.singularValues();
    if (s.size() == 0 || !(s(0) > 0.0)) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

// Sign convention shared by both branches: the largest entry of the
// coefficient vector is positive.
Vec2 fix_sign(Vec2 a) {
    const Eigen::Index i = std::abs(a(0)) >= std::abs(a(1)) ? 0 : 1;
    return a(i) < 0.0 ? Vec2(-a) : a;
}

Eigen::MatrixXd derived_matrix(const LieAlgebra3& g) {
    Eigen::MatrixXd d(3, 3);
    d.col(0) = g.bracket(Vec3::UnitX(), Vec3::UnitY());
    d.col(1) = g.bracket(Vec3::UnitX(), Vec3::UnitZ());
    d.col(2) = g.bracket(Vec3::UnitY(), Vec3::UnitZ());
    return d;
}

}  // namespace

void LieAlgebra3::set_bracket(int i, int j, const Vec3& v) {
    for (int k = 0; k < 3; ++k) {
        (*this)(k, i, j) = v(k);
        (*this)(k, j, i) = -v(k);
    }
}

Vec3 LieAlgebra3::bracket(const Vec3& u, const Vec3& v) const {
    Vec3 out = Vec3::Zero();
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) out(k) += (*this)(k, i, j) * u(i) * v(j);
    return out;
}

Mat3 LieAlgebra3::ad(const Vec3& u) const {
    Mat3 m = Mat3::Zero();
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) m(k, j) += (*this)(k, i, j) * u(i);
    return m;
}

double LieAlgebra3::max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
}

LieAlgebra3 LieAlgebra3::change_basis(const Mat3& P) const {
    const Mat3 Pinv = P.inverse();
    LieAlgebra3 out;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const Vec3 w = Pinv * bracket(P.col(a), P.col(b));
            for (int k = 0; k < 3; ++k) out(k, a, b) = w(k);
        }
    return out;
}

LieAlgebra3 LieAlgebra3::canonical(Parameters p) {
    LieAlgebra3 g;
    g.set_bracket(0, 1, Vec3::UnitZ());
    g.set_bracket(0, 2, Vec3(0.0, p.alpha, p.beta));
    return g;
}

SubRiemannianTriple SubRiemannianTriple::change_basis(const Mat3& P) const {
    SubRiemannianTriple out;
    out.algebra = algebra.change_basis(P);
    const Mat3 Pinv = P.inverse();
    out.h_basis = {Pinv * h_basis[0], Pinv * h_basis[1]};
    out.metric = metric;
    return out;
}

SubRiemannianTriple SubRiemannianTriple::change_h_frame(const Mat2& Q) const {
    SubRiemannianTriple out = *this;
    out.h_basis[0] = Q(0, 0) * h_basis[0] + Q(1, 0) * h_basis[1];
    out.h_basis[1] = Q(0, 1) * h_basis[0] + Q(1, 1) * h_basis[1];
    out.metric = Q.transpose() * metric * Q;
    return out;
}

SubRiemannianTriple SubRiemannianTriple::scale_metric(double s) const {
    SubRiemannianTriple out = *this;
    out.metric *= s;
    return out;
}

SubRiemannianTriple canonical_triple(Parameters p) {
    SubRiemannianTriple t;
    t.algebra = LieAlgebra3::canonical(p);
    return t;
}

std::string_view to_string(Violation v) {
    switch (v) {
        case Violation::NotAntisymmetric: return "NotAntisymmetric";
        case Violation::JacobiFails: return "JacobiFails";
        case Violation::Commutative: return "Commutative";
        case Violation::NotSolvable: return "NotSolvable";
        case Violation::HBasisDegenerate: return "HBasisDegenerate";
        case Violation::MetricNotSymmetric: return "MetricNotSymmetric";
        case Violation::MetricNotPositive: return "MetricNotPositive";
        case Violation::NotHormander: return "NotHormander";
    }
    return "Unknown";
}

bool ValidationReport::has(Violation v) const {
    return std::find(violations.begin(), violations.end(), v) != violations.end();
}

ValidationReport validate(const SubRiemannianTriple& triple, const ToleranceProfile& tol) {
    ValidationReport rep;
    const LieAlgebra3& g = triple.algebra;
    const double scale = std::max(1.0, g.max_abs());

    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                rep.antisymmetry_residual =
                    std::max(rep.antisymmetry_residual, std::abs(g(k, i, j) + g(k, j, i)));
    if (rep.antisymmetry_residual > tol.antisymmetry * scale)
        rep.violations.push_back(Violation::NotAntisymmetric);

    const Mat3 I = Mat3::Identity();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int l = 0; l < 3; ++l) {
                const Vec3 u = I.col(i), v = I.col(j), w = I.col(l);
                const Vec3 r = g.bracket(u, g.bracket(v, w)) + g.bracket(v, g.bracket(w, u)) +
                               g.bracket(w, g.bracket(u, v));
                rep.jacobi_residual = std::max(rep.jacobi_residual, r.cwiseAbs().maxCoeff());
            }
    if (rep.jacobi_residual > tol.jacobi * scale * scale)
        rep.violations.push_back(Violation::JacobiFails);

    const Eigen::MatrixXd d = derived_matrix(g);
    Eigen::JacobiSVD<Eigen::MatrixXd> dsvd(d, Eigen::ComputeFullU);
    rep.derived_rank = numerical_rank(dsvd, tol.rank_relative);
    if (rep.derived_rank == 0) {
        rep.violations.push_back(Violation::Commutative);
    } else if (rep.derived_rank == 3) {
        rep.violations.push_back(Violation::NotSolvable);
    } else if (rep.derived_rank == 2) {
        const Vec3 b = g.bracket(dsvd.matrixU().col(0), dsvd.matrixU().col(1));
        if (b.norm() > tol.rank_relative * dsvd.singularValues()(0) * scale)
            rep.violations.push_back(Violation::NotSolvable);
    }

    Eigen::MatrixXd h(3, 2);
    h.col(0) = triple.h_basis[0];
    h.col(1) = triple.h_basis[1];
    Eigen::JacobiSVD<Eigen::MatrixXd> hsvd(h);
    const bool h_ok = numerical_rank(hsvd, tol.rank_relative) == 2;
    if (!h_ok) rep.violations.push_back(Violation::HBasisDegenerate);

    const Mat2& G = triple.metric;
    if (std::abs(G(0, 1) - G(1, 0)) > 1e-12 * std::max(1.0, G.cwiseAbs().maxCoeff()))
        rep.violations.push_back(Violation::MetricNotSymmetric);
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (G + G.transpose()));
    if (!(es.eigenvalues().minCoeff() > tol.metric_eigen))
        rep.violations.push_back(Violation::MetricNotPositive);

    if (h_ok) {
        const Vec3 h0 = triple.h_basis[0].normalized();
        const Vec3 h1 = triple.h_basis[1].normalized();
        const Vec3 b = g.bracket(h0, h1);
        bool hormander = b.norm() > tol.hormander * scale;
        if (hormander) {
            Mat3 m;
            m << h0, h1, b.normalized();
            Eigen::JacobiSVD<Eigen::MatrixXd> msvd{Eigen::MatrixXd(m)};
            hormander = msvd.singularValues()(2) > tol.hormander * msvd.singularValues()(0);
        }
        if (!hormander) rep.violations.push_back(Violation::NotHormander);
    }
    return rep;
}

std::string_view to_string(RegimeTag tag) {
    switch (tag) {
        case RegimeTag::Rank1Heisenberg: return "Rank1Heisenberg";
        case RegimeTag::Rank1BetaPos: return "Rank1BetaPos";
        case RegimeTag::DeltaPos: return "DeltaPos";
        case RegimeTag::DeltaNeg: return "DeltaNeg";
        case RegimeTag::DeltaZero: return "DeltaZero";
    }
    return "Unknown";
}

std::optional<RegimeTag> regime_tag_from_string(std::string_view name) {
    for (auto t : {RegimeTag::Rank1Heisenberg, RegimeTag::Rank1BetaPos, RegimeTag::DeltaPos,
                   RegimeTag::DeltaNeg, RegimeTag::DeltaZero})
        if (to_string(t) == name) return t;
    return std::nullopt;
}

Regime Regime::from_parameters(Parameters p, const ToleranceProfile& tol) {
    if (!std::isfinite(p.alpha) || !std::isfinite(p.beta))
        throw Error(ErrorKind::InvalidInput, kModule, "non-finite parameters");
    if (p.beta < 0.0) throw Error(ErrorKind::InvalidInput, kModule, "beta must be >= 0");

    Regime r;
    r.alpha = p.alpha;
    r.beta = p.beta;
    r.delta = p.beta * p.beta + 4.0 * p.alpha;
    if (p.alpha == 0.0) {
        r.tag = p.beta == 0.0 ? RegimeTag::Rank1Heisenberg : RegimeTag::Rank1BetaPos;
        return r;
    }
    const double size = p.beta * p.beta + 4.0 * std::abs(p.alpha);
    if (std::abs(r.delta) <= tol.regime_zero * size) {
        r.tag = RegimeTag::DeltaZero;
        r.lambda = 0.5 * p.beta;
        r.alpha = -r.lambda * r.lambda;
        r.delta = 0.0;
    } else if (r.delta > 0.0) {
        r.tag = RegimeTag::DeltaPos;
        const double sq = std::sqrt(r.delta);
        r.lambda1 = 0.5 * (p.beta + sq);
        r.lambda2 = -p.alpha / r.lambda1;
    } else {
        r.tag = RegimeTag::DeltaNeg;
        r.rho = 0.5 * p.beta;
        r.omega = 0.5 * std::sqrt(-r.delta);
        r.theta0 = std::atan2(r.rho, r.omega);
    }
    return r;
}

GeometricData geometric_data(Parameters p) {
    GeometricData g;
    const double a = p.alpha, b = p.beta;
    g.reeb = Vec3(0.0, -b, 1.0);
    g.torsion_coeff = 0.5 * a;
    g.ricci_constant = -(b * b + 0.5 * a);
    g.chi = 0.5 * std::abs(a);
    g.kappa_ab = -b * b - 0.5 * a;
    for (auto& row : g.christoffel)
        for (auto& v : row) v.setZero();
    g.christoffel[0][1] = Vec3(0.0, 0.5 * b, 0.0);
    g.christoffel[1][0] = Vec3(0.0, -b, 0.0);
    g.christoffel[2][0] = Vec3(0.0, -0.5 * a, 0.0);
    g.christoffel[2][1] = Vec3(0.5 * a, 0.0, 0.0);
    return g;
}

double canonical_residual(const LieAlgebra3& algebra, const CanonicalForm& f) {
    const double r1 = (algebra.bracket(f.X, f.Y) - f.Z).cwiseAbs().maxCoeff();
    const double r2 = (algebra.bracket(f.X, f.Z) - f.alpha * f.Y - f.beta * f.Z).cwiseAbs().maxCoeff();
    const double r3 = algebra.bracket(f.Y, f.Z).cwiseAbs().maxCoeff();
    return std::max({r1, r2, r3});
}

Classification canonicalize(const SubRiemannianTriple& triple, const ToleranceProfile& tol) {
    const ValidationReport rep = validate(triple, tol);
    if (!rep.ok()) {
        std::string msg = "triple fails validation:";
        for (auto v : rep.violations) msg += " " + std::string(to_string(v));
        ErrorKind kind = ErrorKind::InvalidInput;
        if (rep.has(Violation::NotSolvable)) kind = ErrorKind::NotSolvable;
        else if (rep.has(Violation::NotHormander) || rep.has(Violation::Commutative))
            kind = ErrorKind::NotHormander;
        throw Error(kind, kModule, msg);
    }

    const LieAlgebra3& g = triple.algebra;
    const double scale = std::max(1.0, g.max_abs());

    // Orthonormal frame of H: H-coefficients a map to U * a with <Ua, Ub> = a.b.
    Eigen::Matrix<double, 3, 2> hmat;
    hmat << triple.h_basis[0], triple.h_basis[1];
    const Mat2 Lc = Eigen::LLT<Mat2>(triple.metric).matrixL();
    const Eigen::Matrix<double, 3, 2> U = hmat * Lc.transpose().inverse();

    Eigen::JacobiSVD<Eigen::MatrixXd> dsvd(derived_matrix(g), Eigen::ComputeFullU);

    CanonicalForm f;
    f.derived_rank = rep.derived_rank;
    Vec2 a;
    if (rep.derived_rank == 1) {
        const Vec3 z0 = dsvd.matrixU().col(0);
        // Y in H with [Y, Z0] = 0.
        Eigen::Matrix<double, 3, 2> m;
        m << g.bracket(U.col(0), z0), g.bracket(U.col(1), z0);
        Eigen::JacobiSVD<Eigen::MatrixXd> msvd(m, Eigen::ComputeFullV);
        const double ref = scale * U.colwise().norm().maxCoeff();
        const bool central = msvd.singularValues()(0) <= tol.rank_relative * ref;
        if (central) {
            // Every Y works; take the direction of the first spanning vector.
            a = Lc.transpose().col(0).normalized();
        } else {
            a = msvd.matrixV().col(1).normalized();
        }
        a = fix_sign(a);
        f.Y = U * a;
        const Vec3 x0 = U * Vec2(-a(1), a(0));
        const Vec3 z1 = g.bracket(x0, f.Y);
        double beta = central ? 0.0 : g.bracket(x0, z1).dot(z1) / z1.squaredNorm();
        f.X = x0;
        f.Z = z1;
        if (beta < 0.0) {
            f.X = -x0;
            f.Z = -z1;
            beta = -beta;
        }
        f.alpha = 0.0;
        f.beta = beta;
    } else {
        Eigen::Matrix<double, 3, 4> sys;
        sys << U, -dsvd.matrixU().leftCols(2);
        Eigen::JacobiSVD<Eigen::MatrixXd> ssvd(sys, Eigen::ComputeFullV);
        const auto& s = ssvd.singularValues();
        if (s(2) <= tol.rank_relative * s(0))
            throw Error(ErrorKind::DegenerateInput, kModule, "g' and H do not meet in a single line");
        const Eigen::Vector4d n = ssvd.matrixV().col(3);
        a = fix_sign(Vec2(n(0), n(1)).normalized());
        f.Y = U * a;
        const Vec3 x0 = U * Vec2(-a(1), a(0));
        const Vec3 z0 = g.bracket(x0, f.Y);
        const Vec3 w = g.bracket(x0, z0);
        Eigen::Matrix<double, 3, 2> basis;
        basis << f.Y, z0;
        const Vec2 ab = basis.colPivHouseholderQr().solve(w);
        f.alpha = ab(0);
        f.beta = ab(1);
        f.X = x0;
        f.Z = z0;
        if (f.beta < 0.0) {
            f.X = -x0;
            f.Z = -z0;
            f.beta = -f.beta;
        }
    }

    const double res = canonical_residual(g, f);
    const double ref = std::max({1.0, f.Z.norm(), std::abs(f.alpha) * f.Y.norm(), f.beta * f.Z.norm()});
    if (!(res <= tol.canonical_residual * ref))
        throw Error(ErrorKind::DegenerateInput, kModule,
                    "canonical relations not satisfied (residual " + std::to_string(res) + ")");

    Classification out;
    out.form = f;
    out.regime = Regime::from_parameters({f.alpha, f.beta}, tol);
    out.geometry = geometric_data({out.regime.alpha, out.regime.beta});
    out.geometry.reeb = -f.beta * f.Y + f.Z;
    return out;
}

CharacteristicPolynomials characteristic_poly(const CanonicalForm& f) {
    return {{-f.alpha, -f.beta, 1.0}, {0.0, f.alpha, f.beta, -1.0}};
}

std::array<double, 4> adjoint_charpoly(const LieAlgebra3& algebra, const Vec3& v) {
    const Mat3 m = algebra.ad(v);
    const double tr = m.trace();
    const double c2 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0) +
                      m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    return {m.determinant(), -c2, tr, -1.0};
}

std::optional<double> almost_isomorphic(Parameters p, Parameters q, double rel_tol) {
    if (p.beta < 0.0 || q.beta < 0.0) return std::nullopt;
    auto close = [rel_tol](double x, double y) {
        return std::abs(x - y) <= rel_tol * std::max({1.0, std::abs(x), std::abs(y)});
    };
    const bool p_rank1 = p.alpha == 0.0, q_rank1 = q.alpha == 0.0;
    if (p_rank1 != q_rank1) return std::nullopt;
    if (p_rank1) {
        if (p.beta == 0.0 && q.beta == 0.0) return 1.0;
        if (p.beta == 0.0 || q.beta == 0.0) return std::nullopt;
        return p.beta / q.beta;
    }
    const double c2 = p.alpha / q.alpha;
    if (!(c2 > 0.0)) return std::nullopt;
    const double c = std::sqrt(c2);
    if (!close(c * q.beta, p.beta)) return std::nullopt;
    return c;
}

}  // namespace subheat
