#include <cmath>
#include <random>

#include "doctest.h"
#include "subheat/algebra.hpp"
#include "subheat/errors.hpp"

using namespace subheat;

namespace {

Mat3 random_basis(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (;;) {
        Mat3 P;
        for (int i = 0; i < 9; ++i) P(i / 3, i % 3) = n(rng);
        Eigen::JacobiSVD<Mat3> svd(P);
        if (svd.singularValues()(2) > 0.2 * svd.singularValues()(0)) return P;
    }
}

Mat3 random_rotation(std::mt19937_64& rng) {
    Eigen::HouseholderQR<Mat3> qr(random_basis(rng));
    return qr.householderQ();
}

}  // namespace

TEST_CASE("heisenberg triple validates and canonicalizes to (0, 0)") {
    const auto t = canonical_triple({0, 0});
    CHECK(validate(t).ok());
    const auto c = canonicalize(t);
    CHECK(c.form.alpha == 0.0);
    CHECK(c.form.beta == 0.0);
    CHECK(c.regime.tag == RegimeTag::Rank1Heisenberg);
    CHECK(c.form.derived_rank == 1);
}

TEST_CASE("validation flags each violated assumption") {
    SUBCASE("Jacobi") {
        LieAlgebra3 g;
        g.set_bracket(0, 1, Vec3::UnitZ());
        g.set_bracket(0, 2, Vec3::UnitY());
        g.set_bracket(1, 2, Vec3::UnitY());
        SubRiemannianTriple t;
        t.algebra = g;
        CHECK(validate(t).has(Violation::JacobiFails));
    }
    SUBCASE("antisymmetry") {
        auto t = canonical_triple({1, 1});
        t.algebra(2, 0, 1) = 1.5;
        CHECK(validate(t).has(Violation::NotAntisymmetric));
    }
    SUBCASE("commutative") {
        SubRiemannianTriple t;
        const auto r = validate(t);
        CHECK(r.has(Violation::Commutative));
        CHECK(r.derived_rank == 0);
    }
    SUBCASE("so(3) is not solvable") {
        SubRiemannianTriple t;
        t.algebra.set_bracket(0, 1, Vec3::UnitZ());
        t.algebra.set_bracket(1, 2, Vec3::UnitX());
        t.algebra.set_bracket(2, 0, Vec3::UnitY());
        CHECK(validate(t).has(Violation::NotSolvable));
        CHECK_THROWS_AS(canonicalize(t), Error);
    }
    SUBCASE("H equal to g' breaks the bracket-generating condition") {
        auto t = canonical_triple({1, 0});
        t.h_basis = {Vec3::UnitY(), Vec3::UnitZ()};
        CHECK(validate(t).has(Violation::NotHormander));
        try {
            canonicalize(t);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NotHormander);
        }
    }
    SUBCASE("degenerate H basis") {
        auto t = canonical_triple({1, 0});
        t.h_basis = {Vec3::UnitX(), 2.0 * Vec3::UnitX()};
        CHECK(validate(t).has(Violation::HBasisDegenerate));
    }
    SUBCASE("metric") {
        auto t = canonical_triple({1, 0});
        t.metric << 1, 0.5, 0.4, 1;
        CHECK(validate(t).has(Violation::MetricNotSymmetric));
        t.metric << 1, 2, 2, 1;
        CHECK(validate(t).has(Violation::MetricNotPositive));
    }
}

TEST_CASE("rotated se(2) and sol relations") {
    std::mt19937_64 rng(7);
    const Mat3 P = random_rotation(rng);
    const auto se2 = canonicalize(canonical_triple({-1, 0}).change_basis(P));
    CHECK(se2.form.alpha == doctest::Approx(-1).epsilon(1e-12));
    CHECK(std::abs(se2.form.beta) < 1e-12);
    CHECK(se2.regime.tag == RegimeTag::DeltaNeg);
    CHECK(se2.regime.omega == doctest::Approx(1).epsilon(1e-12));

    const auto sol = canonicalize(canonical_triple({1, 0}).change_basis(P));
    CHECK(sol.regime.tag == RegimeTag::DeltaPos);
    CHECK(sol.regime.lambda1 == doctest::Approx(1).epsilon(1e-12));
    CHECK(sol.regime.lambda2 == doctest::Approx(-1).epsilon(1e-12));
}

TEST_CASE("basis-change, frame-change and metric-scaling laws") {
    std::mt19937_64 rng(11);
    const std::vector<Parameters> params{{0, 0}, {0, 1.3}, {1, 0}, {-1, 0}, {-2, 1}, {1, 1}, {-1, 2}, {3, 0.5}};
    for (auto p : params) {
        const auto base = canonical_triple(p);
        for (int rep = 0; rep < 20; ++rep) {
            const Mat3 P = random_basis(rng);
            Mat2 Q;
            Q << 1.0 + 0.3 * rep, 0.2, -0.4, 0.9;
            const auto t = base.change_basis(P).change_h_frame(Q);
            const auto c = canonicalize(t);
            CHECK(c.form.alpha == doctest::Approx(p.alpha).epsilon(1e-9).scale(1));
            CHECK(c.form.beta == doctest::Approx(p.beta).epsilon(1e-9).scale(1));
            CHECK(canonical_residual(t.algebra, c.form) <= 1e-9);
            // X, Y orthonormal under the metric.
            Eigen::Matrix<double, 3, 2> H;
            H << t.h_basis[0], t.h_basis[1];
            const Vec2 ax = H.colPivHouseholderQr().solve(c.form.X);
            const Vec2 ay = H.colPivHouseholderQr().solve(c.form.Y);
            CHECK(ax.dot(t.metric * ax) == doctest::Approx(1).epsilon(1e-9));
            CHECK(ay.dot(t.metric * ay) == doctest::Approx(1).epsilon(1e-9));
            CHECK(std::abs(ax.dot(t.metric * ay)) < 1e-9);
            // Characteristic polynomial of ad_X is a basis invariant.
            const auto cp = adjoint_charpoly(t.algebra, c.form.X);
            const auto expect = characteristic_poly(c.form).pi_x;
            for (int k = 0; k < 4; ++k) CHECK(cp[k] == doctest::Approx(expect[k]).scale(1).epsilon(1e-9));
        }
        for (double s : {0.25, 4.0}) {
            const auto c = canonicalize(base.scale_metric(s));
            CHECK(c.form.alpha == doctest::Approx(p.alpha / s).scale(1).epsilon(1e-12));
            CHECK(c.form.beta == doctest::Approx(p.beta / std::sqrt(s)).scale(1).epsilon(1e-12));
        }
    }
}

TEST_CASE("regime extras") {
    const auto pos = Regime::from_parameters({2, 1});
    CHECK(pos.tag == RegimeTag::DeltaPos);
    CHECK(pos.lambda1 * pos.lambda2 == doctest::Approx(-2).epsilon(1e-12));
    CHECK(pos.lambda1 + pos.lambda2 == doctest::Approx(1).epsilon(1e-12));

    const auto neg = Regime::from_parameters({-2, 1});
    CHECK(neg.tag == RegimeTag::DeltaNeg);
    CHECK(neg.rho * neg.rho + neg.omega * neg.omega == doctest::Approx(2).epsilon(1e-12));
    CHECK(neg.theta0 == doctest::Approx(std::atan(neg.rho / neg.omega)));
    CHECK(neg.theta0 >= 0.0);

    const auto zero = Regime::from_parameters({-0.25, 1.0});
    CHECK(zero.tag == RegimeTag::DeltaZero);
    CHECK(zero.lambda == 0.5);
    CHECK(zero.alpha == -0.25);

    CHECK(Regime::from_parameters({0, 0.5}).tag == RegimeTag::Rank1BetaPos);
    CHECK_THROWS_AS(Regime::from_parameters({1, -1}), Error);
    CHECK(regime_tag_from_string("DeltaZero") == RegimeTag::DeltaZero);
    CHECK_FALSE(regime_tag_from_string("nope").has_value());
}

TEST_CASE("geometric constants and reeb frame relations") {
    const Parameters p{-2, 1};
    const auto g = geometric_data(p);
    CHECK(g.torsion_coeff == -1.0);
    CHECK(g.ricci_constant == -(1.0 - 1.0));
    CHECK(g.chi == 1.0);
    CHECK(g.kappa_ab == -1.0 + 1.0);
    CHECK(g.christoffel[0][1](1) == 0.5);
    CHECK(g.christoffel[2][1](0) == -1.0);

    std::mt19937_64 rng(3);
    const auto t = canonical_triple(p).change_basis(random_basis(rng));
    const auto c = canonicalize(t);
    const Vec3 R = c.geometry.reeb;
    const auto& a = t.algebra;
    CHECK((a.bracket(c.form.X, c.form.Y) - (p.beta * c.form.Y + R)).norm() < 1e-9);
    CHECK((a.bracket(c.form.X, R) - p.alpha * c.form.Y).norm() < 1e-9);
    CHECK(a.bracket(c.form.Y, R).norm() < 1e-9);
}

TEST_CASE("characteristic polynomials") {
    CanonicalForm f;
    f.alpha = 1;
    f.beta = 0;
    auto cp = characteristic_poly(f);
    CHECK(cp.ad_x_derived == std::array<double, 3>{-1, 0, 1});
    f.alpha = 0;
    cp = characteristic_poly(f);
    CHECK(cp.ad_x_derived == std::array<double, 3>{0, 0, 1});
    CHECK(cp.pi_x == std::array<double, 4>{0, 0, 0, -1});
    f.alpha = -1;
    cp = characteristic_poly(f);
    CHECK(cp.ad_x_derived == std::array<double, 3>{1, 0, 1});
}

TEST_CASE("almost isomorphism") {
    CHECK(almost_isomorphic({4, 2}, {1, 1}).value() == doctest::Approx(2));
    CHECK(almost_isomorphic({0, 0}, {0, 0}).value() == 1.0);
    CHECK_FALSE(almost_isomorphic({1, 0}, {-1, 0}).has_value());
    CHECK_FALSE(almost_isomorphic({4, 1}, {1, 1}).has_value());
    CHECK(almost_isomorphic({0, 3}, {0, 1.5}).value() == doctest::Approx(2));
    CHECK_FALSE(almost_isomorphic({0, 1}, {0, 0}).has_value());
    CHECK_FALSE(almost_isomorphic({0, 1}, {1, 1}).has_value());
    CHECK(almost_isomorphic({1, 1}, {1, 1}).value() == 1.0);
}
