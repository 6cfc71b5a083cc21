#include <cmath>
#include <random>

#include "doctest.h"
#include "subheat/cd_verify.hpp"
#include "subheat/errors.hpp"

using namespace subheat;

namespace {

const std::vector<Parameters> kParams{{1, 0}, {-1, 0}, {1, 1}, {-2, 1}, {0, 1}, {0, 0}};

GroupPoint random_point(std::mt19937_64& rng, double box = 1.5) {
    std::uniform_real_distribution<double> u(-box, box);
    GroupPoint p;
    p.theta = u(rng);
    p.x = u(rng);
    p.y = u(rng);
    return p;
}

Bump default_bump() {
    Bump b;
    b.center = {0.2, 0.1, -0.1};
    return b;
}

BoundSpec small_spec(int paths) {
    BoundSpec s;
    s.sde.n_paths = paths;
    s.sde.n_steps = 64;
    return s;
}

}  // namespace

TEST_CASE("carre forms of theta and of constants") {
    std::mt19937_64 rng(1);
    for (const auto& par : kParams) {
        const FieldCalculus fc(build_rep(Regime::from_parameters(par)));
        for (int i = 0; i < 10; ++i) {
            const GroupPoint p = random_point(rng);
            const CarreResult t = carre(fc, Expr::theta(), p);
            CHECK(t.gamma == 1.0);
            CHECK(t.gammaR == 0.0);
            CHECK(t.gamma2 == 0.0);
            CHECK(t.gamma2R == 0.0);
            CHECK(t.lf == doctest::Approx(-par.beta));
            for (double nu : {0.1, 1.0, 10.0})
                CHECK(cd_residual(t, nu, par) ==
                      doctest::Approx(std::max(par.alpha, 0.0) + 0.5 * par.beta * par.beta + 1.0 / nu).epsilon(1e-14));
            const CarreResult c = carre(fc, Expr::constant(2.5), p);
            CHECK(c.gamma == 0.0);
            CHECK(c.gamma2 == 0.0);
            CHECK(c.gamma2R == 0.0);
            CHECK(cd_residual(c, 1.0, par) == 0.0);
        }
    }
}

TEST_CASE("gamma is bilinear and the forms are non-negative") {
    std::mt19937_64 rng(2);
    const auto suite = test_function_suite();
    for (const auto& par : kParams) {
        const FieldCalculus fc(build_rep(Regime::from_parameters(par)));
        for (std::size_t k = 0; k + 1 < suite.size(); ++k) {
            const Expr& f = suite[k].f;
            const Expr& g = suite[k + 1].f;
            const GroupPoint p = random_point(rng);
            const double lhs = carre(fc, f + g, p).gamma;
            const double rhs = carre(fc, f, p).gamma + 2.0 * gamma_bilinear(fc, f, g, p) + carre(fc, g, p).gamma;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
            const CarreResult c = carre(fc, f, p);
            CHECK(c.gamma >= 0.0);
            CHECK(c.gammaR >= 0.0);
        }
    }
}

TEST_CASE("expanded gamma_2 needs the symmetrized mixed derivative") {
    std::mt19937_64 rng(3);
    double sym = 0.0, printed = 0.0, gr = 0.0;
    for (const auto& par : kParams) {
        const FieldCalculus fc(build_rep(Regime::from_parameters(par)));
        for (const auto& nf : test_function_suite()) {
            const CarreForms forms = carre_forms(fc, nf.f);
            for (int i = 0; i < 20; ++i) {
                const GroupPoint p = random_point(rng, 1.0);
                const CarreResult c = evaluate(forms, p);
                const double scale = std::max(1.0, std::abs(c.gamma2));
                sym = std::max(sym, std::abs(gamma2_expanded(fc, nf.f, p) - c.gamma2) / scale);
                printed = std::max(printed,
                                   std::abs(gamma2_expanded(fc, nf.f, p, Gamma2Variant::AsPrinted) - c.gamma2) / scale);
                gr = std::max(gr, std::abs(gamma2R_expanded(fc, nf.f, p) - c.gamma2R) / std::max(1.0, std::abs(c.gamma2R)));
            }
        }
    }
    CHECK(sym <= 1e-9);
    CHECK(gr <= 1e-9);
    CHECK(printed > 1e-2);
}

TEST_CASE("alpha = 0 residual coincides with the reduced form") {
    std::mt19937_64 rng(4);
    for (double beta : {0.0, 0.7, 1.0, 2.0}) {
        const Parameters par{0.0, beta};
        const FieldCalculus fc(build_rep(Regime::from_parameters(par)));
        for (const auto& nf : test_function_suite()) {
            const GroupPoint p = random_point(rng);
            const CarreResult c = carre(fc, nf.f, p);
            for (double nu : {0.1, 1.0, 10.0})
                CHECK(cd_residual(c, nu, par) == doctest::Approx(cd_residual_alpha0(c, nu, beta)).epsilon(1e-13));
        }
    }
}

TEST_CASE("residual sweep") {
    CdSweepConfig cfg;
    cfg.n_points = 200;
    const CDReport all = cd_sweep(cfg);
    CHECK(all.residuals.size() == 200u * 12u * 3u * 5u);

    SUBCASE("non-negative whenever alpha beta = 0") {
        double worst = 0.0;
        for (const auto& r : all.residuals)
            if (r.params.alpha * r.params.beta == 0.0) worst = std::min(worst, r.residual);
        CHECK(worst >= -1e-8);
    }

    SUBCASE("negative values are exactly the dropped cross term") {
        // Completing the square in the mixed-derivative line leaves
        // -2 nu alpha beta (Rf)(Yf); adding it back restores non-negativity.
        const auto suite = test_function_suite();
        int negative = 0;
        double corrected = 0.0;
        for (const auto& r : all.residuals) {
            if (r.residual < -1e-8) ++negative;
            const FieldCalculus fc(build_rep(Regime::from_parameters(r.params)));
            for (const auto& nf : suite) {
                if (nf.name != r.function) continue;
                const double cross = 2.0 * r.nu * r.params.alpha * r.params.beta * fc.R(nf.f)(r.point) * fc.Y(nf.f)(r.point);
                corrected = std::min(corrected, r.residual + cross);
            }
        }
        CHECK(negative > 0);
        CHECK(corrected >= -1e-8);
        CHECK(all.min_residual < -1e-8);
        CHECK(all.worst.params.alpha * all.worst.params.beta != 0.0);
    }

    SUBCASE("reproducible for any worker count") {
        CdSweepConfig one = cfg;
        one.workers = 1;
        one.params = {{1, 1}};
        CdSweepConfig three = one;
        three.workers = 3;
        const auto a = cd_sweep(one), b = cd_sweep(three);
        REQUIRE(a.residuals.size() == b.residuals.size());
        for (std::size_t i = 0; i < a.residuals.size(); ++i) CHECK(a.residuals[i].residual == b.residuals[i].residual);
    }

    CdSweepConfig bad = cfg;
    bad.nus = {1.0, 0.0};
    CHECK_THROWS_AS(cd_sweep(bad), Error);
}

TEST_CASE("bump jets match finite differences") {
    std::mt19937_64 rng(5);
    const Bump b = default_bump();
    for (const auto& par : kParams) {
        const auto rep = build_rep(Regime::from_parameters(par));
        const GroupFunction f = [&](const GroupPoint& p) { return bump_jet(rep, b, p).f; };
        for (int i = 0; i < 20; ++i) {
            const GroupPoint p = random_point(rng, 0.6);
            const BumpJet j = bump_jet(rep, b, p);
            CHECK(j.xf == doctest::Approx(apply_operator(rep, {Field::X}, f, p)).epsilon(1e-7));
            CHECK(j.yf == doctest::Approx(apply_operator(rep, {Field::Y}, f, p)).epsilon(1e-7));
            CHECK(j.rf == doctest::Approx(apply_operator(rep, {Field::R}, f, p)).epsilon(1e-7));
        }
        const BumpJet out = bump_jet(rep, b, GroupPoint{3, 0, 0});
        CHECK(out.f == 0.0);
        CHECK(out.xf == 0.0);
    }
}

TEST_CASE("gradient bound coefficient") {
    CHECK(kappa_cd({1, 1}) == 2.0);
    CHECK(kappa_cd({-1, 0}) == 0.0);
    CHECK(t_window_max({1, 1}) == doctest::Approx(std::log(3.0) / 4.0).epsilon(1e-15));
    CHECK(t_window_max({-1, 0}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(t_window_max({0, 1}), Error);

    for (Parameters p : std::vector<Parameters>{{1, 1}, {-1, 0}, {1, 0}, {-2, 1}, {0.5, 2}}) {
        const double tw = t_window_max(p);
        CHECK(gradient_bound_coefficient(p, 0.0) == 1.0);
        double prev = 1.0;
        for (int i = 1; i < 100; ++i) {
            const double c = gradient_bound_coefficient(p, tw * i / 100.0);
            CHECK(c >= 1.0);
            CHECK(c > prev);
            prev = c;
        }
        // Closed form away from kappa = 0.
        const double k = kappa_cd(p), a = std::abs(p.alpha), T = 0.4 * tw;
        if (k > 0) {
            const double e = std::exp(2 * k * T);
            CHECK(gradient_bound_coefficient(p, T) == doctest::Approx(k * e / (k + a * (1 - e))).epsilon(1e-12));
        }
    }

    // kappa -> 0: the limit is 1 / (1 - 2 |alpha| T), continuous at kappa = 1e-6.
    for (double T : {0.1, 0.25, 0.4}) {
        CHECK(gradient_bound_coefficient({-1, 0}, T) == doctest::Approx(1.0 / (1.0 - 2.0 * T)).epsilon(1e-15));
        const Parameters near{-1.0, std::sqrt(1e-6)};
        const double k = kappa_cd(near), e = std::exp(2 * k * T);
        const double direct = k * e / (k + 1.0 * (1 - e));
        CHECK(gradient_bound_coefficient(near, T) == doctest::Approx(gradient_bound_coefficient({-1, 0}, T)).epsilon(1e-5));
        CHECK(gradient_bound_coefficient(near, T) == doctest::Approx(direct).epsilon(1e-8));
    }
}

TEST_CASE("gradient bound checks") {
    const Bump b = default_bump();
    for (Parameters p : std::vector<Parameters>{{1, 1}, {-1, 0}}) {
        const auto rep = build_rep(Regime::from_parameters(p));
        const BoundReport zero = gradient_bound_check(rep, b, 0.0, small_spec(10));
        CHECK(zero.lhs.value == zero.rhs.value);
        CHECK(zero.pass);
        const BumpJet j = bump_jet(rep, b, GroupPoint{});
        CHECK(zero.lhs.value == j.xf * j.xf + j.yf * j.yf + j.rf * j.rf / std::abs(p.alpha));

        const double tw = t_window_max(p);
        const BoundReport half = gradient_bound_check(rep, b, 0.5 * tw, small_spec(20000));
        CHECK(half.pass);
        CHECK(half.lhs.std_error > 0.0);
        CHECK(half.a_curve.size() == 11u);
        CHECK(half.a_curve.front().second == 1.0);
        CHECK(half.a_curve.back().second == doctest::Approx(gradient_bound_coefficient(p, 0.5 * tw)));

        try {
            (void)gradient_bound_check(rep, b, tw, small_spec(10));
            FAIL("expected WindowExceeded");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::WindowExceeded);
        }
    }
    const auto heis = build_rep(Regime::from_parameters({0, 1}));
    CHECK_THROWS_AS(gradient_bound_check(heis, b, 0.1, small_spec(10)), Error);
}

TEST_CASE("reverse Poincare checks") {
    const Bump b = default_bump();
    const auto rep = build_rep(Regime::from_parameters({1, 0}));
    CHECK(reverse_poincare_check(rep, b, 0.3, small_spec(20000)).pass);
    CHECK(reverse_poincare_check(build_rep(Regime::from_parameters({-1, 0})), b, 0.1, small_spec(20000)).pass);
    CHECK_THROWS_AS(reverse_poincare_check(rep, b, 0.0, small_spec(10)), Error);

    SUBCASE("nearly constant function") {
        Bump wide = b;
        wide.radius = 1e3;
        const BoundReport r = reverse_poincare_check(rep, wide, 0.3, small_spec(2000));
        CHECK(std::abs(r.lhs.value) < 1e-6);
        CHECK(std::abs(r.rhs.value) < 1e-6);
        CHECK(r.pass);
    }

    SUBCASE("both sides vanish linearly as T -> 0") {
        // d/dT lhs at 0 = -2 Gamma_2(f) - 2 Gamma_2^R(f)/|alpha| - 2 c (Gamma(f) + Gamma^R(f)/|alpha|),
        // c = kappa + |alpha|; computed here by finite differences.
        const GroupFunction f = [&](const GroupPoint& p) { return bump_jet(rep, b, p).f; };
        const FiniteDifference fd{4, 1e-3};
        const GroupFunction lf = [&](const GroupPoint& p) {
            return apply_operator(rep, {Field::X, Field::X}, f, p, fd) + apply_operator(rep, {Field::Y, Field::Y}, f, p, fd);
        };
        const auto lap = [&](const GroupFunction& g) {
            return apply_operator(rep, {Field::X, Field::X}, g, {}, fd) + apply_operator(rep, {Field::Y, Field::Y}, g, {}, fd);
        };
        const GroupFunction gam = [&](const GroupPoint& p) {
            const BumpJet j = bump_jet(rep, b, p);
            return j.xf * j.xf + j.yf * j.yf;
        };
        const GroupFunction gamr = [&](const GroupPoint& p) { return std::pow(bump_jet(rep, b, p).rf, 2); };
        const BumpJet j = bump_jet(rep, b, {});
        const double g2 = 0.5 * lap(gam) - j.xf * apply_operator(rep, {Field::X}, lf, {}, fd) -
                          j.yf * apply_operator(rep, {Field::Y}, lf, {}, fd);
        const double g2r = 0.5 * lap(gamr) - j.rf * apply_operator(rep, {Field::R}, lf, {}, fd);
        const double slope = -2.0 * g2 - 2.0 * g2r - 2.0 * 1.0 * (j.xf * j.xf + j.yf * j.yf + j.rf * j.rf);

        const BoundReport r3 = reverse_poincare_check(rep, b, 1e-3, small_spec(20000));
        const BoundReport r4 = reverse_poincare_check(rep, b, 1e-4, small_spec(20000));
        CHECK(r3.pass);
        CHECK(r4.rhs.value < r3.rhs.value);
        CHECK(std::abs(r4.lhs.value) < std::abs(r3.lhs.value));
        CHECK(r4.lhs.value / 1e-4 == doctest::Approx(slope).epsilon(0.05));
    }
}
