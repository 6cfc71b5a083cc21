#include <cmath>

#include "doctest.h"
#include "subheat/errors.hpp"
#include "subheat/mathieu.hpp"

using namespace subheat;

namespace {

constexpr double kPi = 3.14159265358979323846;

double inner(const MathieuFunction& f, const MathieuFunction& g, int n = 512) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * kPi * i / n;
        s += f(th) * g(th);
    }
    return s * 2.0 * kPi / n;
}

}  // namespace

TEST_CASE("characteristic values at q = 0") {
    for (int k = 0; k <= 8; ++k) {
        CHECK(std::abs(mathieu_char(0.0, k, MathieuKind::Ce, 32) - k * k) <= 1e-10);
        if (k >= 1) CHECK(std::abs(mathieu_char(0.0, k, MathieuKind::Se, 32) - k * k) <= 1e-10);
    }
    CHECK(mathieu_char(0.0, 3, MathieuKind::Ce) == doctest::Approx(9.0));
    CHECK(mathieu_char(0.0, 1, MathieuKind::Se) == doctest::Approx(1.0));
    const auto ce2 = mathieu_function(0.0, 2, MathieuKind::Ce);
    for (double th : {0.0, 0.4, 1.7, 3.0}) CHECK(std::abs(ce2(th) - std::cos(2 * th)) <= 1e-12);
    const auto ce0 = mathieu_function(0.0, 0, MathieuKind::Ce);
    CHECK(ce0(1.0) == doctest::Approx(1 / std::sqrt(2.0)));
}

TEST_CASE("truncation doubling baseline at q = 0.25") {
    const double a32 = mathieu_char(0.25, 0, MathieuKind::Ce, 32);
    const double a64 = mathieu_char(0.25, 0, MathieuKind::Ce, 64);
    CHECK(std::abs(a32 - a64) <= 1e-10);
    // Regression baseline (matches the power series -q^2/2 + 7q^4/128 - 29q^6/2304).
    CHECK(a32 == doctest::Approx(-0.03103939547561732).epsilon(1e-12));
}

TEST_CASE("characteristic values against an independent implementation") {
    struct Row {
        double q;
        double a[4];
        double b[3];
    };
    // scipy.special.mathieu_a / mathieu_b
    const Row rows[] = {
        {1.0, {-0.45513860410741364, 1.8591080725143634, 4.371300982735086, 9.078368847203102},
         {-0.11024881699209521, 3.917024772998471, 9.047739259809374}},
        {4.0, {-4.2805188183025225, 2.3180081701065243, 6.82907483456639, 10.67102710352055},
         {-4.259182900560943, 2.746881027192658, 9.261446132106343}},
        {25.0, {-40.25677954656679, -21.314899690665726, -3.5221647271582954, 12.964079444326467},
         {-40.25677898468416, -21.314860622249853, -3.520941526621369}},
    };
    for (const auto& r : rows) {
        for (int k = 0; k < 4; ++k) CHECK(mathieu_char(r.q, k, MathieuKind::Ce) == doctest::Approx(r.a[k]).epsilon(1e-9));
        for (int k = 1; k < 4; ++k)
            CHECK(mathieu_char(r.q, k, MathieuKind::Se) == doctest::Approx(r.b[k - 1]).epsilon(1e-9));
    }
    // Function values (angles 30 and 50 degrees).
    CHECK(mathieu_eval(1.0, 0, MathieuKind::Ce, kPi / 6) == doctest::Approx(0.5110227773974206).epsilon(1e-9));
    CHECK(mathieu_eval(4.0, 2, MathieuKind::Se, 50 * kPi / 180) == doctest::Approx(1.0085025452396823).epsilon(1e-9));
}

TEST_CASE("normalization, orthogonality, parity and ODE residual") {
    for (double q : {0.0, 0.25, 1.0, 4.0}) {
        std::vector<MathieuFunction> fs;
        for (int k = 0; k <= 6; ++k) fs.push_back(mathieu_function(q, k, MathieuKind::Ce, 32));
        for (int k = 1; k <= 6; ++k) fs.push_back(mathieu_function(q, k, MathieuKind::Se, 32));
        for (std::size_t i = 0; i < fs.size(); ++i) {
            for (std::size_t j = i; j < fs.size(); ++j) {
                const double expect = i == j ? kPi : 0.0;
                CHECK(std::abs(inner(fs[i], fs[j]) - expect) <= 1e-8);
            }
            double res = 0.0;
            for (int n = 0; n < 512; ++n) res = std::max(res, std::abs(fs[i].ode_residual(2 * kPi * n / 512)));
            CHECK(res <= 1e-8);
            for (double th : {0.3, 1.1, 2.5}) {
                if (fs[i].kind == MathieuKind::Ce) CHECK(fs[i](-th) == doctest::Approx(fs[i](th)));
                else CHECK(fs[i](-th) == doctest::Approx(-fs[i](th)));
            }
        }
    }
    const auto ce0 = mathieu_function(1.0, 0, MathieuKind::Ce);
    CHECK(std::abs(inner(ce0, ce0) - kPi) <= 1e-8);
}

TEST_CASE("ordering, continuity and shifted orthogonality") {
    for (double q : {0.25, 1.0, 4.0}) {
        double prev = mathieu_char(q, 0, MathieuKind::Ce);
        for (int k = 1; k <= 5; ++k) {
            const double b = mathieu_char(q, k, MathieuKind::Se), a = mathieu_char(q, k, MathieuKind::Ce);
            CHECK(prev < b);
            CHECK(b <= a);
            prev = a;
        }
        for (int k = 0; k <= 4; ++k) {
            const double d = std::abs(mathieu_char(q + 1e-4, k, MathieuKind::Ce) - mathieu_char(q, k, MathieuKind::Ce));
            CHECK(d <= 2.0 * 1e-4 * 2.0);
        }
    }
    // ce_j(. - phi) and se_k(. - phi) keep the unshifted inner products.
    const double phi = 0.7;
    const auto a = mathieu_function(2.0, 1, MathieuKind::Ce), b = mathieu_function(2.0, 3, MathieuKind::Se);
    double aa = 0, ab = 0;
    for (int i = 0; i < 512; ++i) {
        const double th = 2 * kPi * i / 512;
        aa += a(th - phi) * a(th - phi);
        ab += a(th - phi) * b(th - phi);
    }
    CHECK(aa * 2 * kPi / 512 == doctest::Approx(kPi).epsilon(1e-10));
    CHECK(std::abs(ab * 2 * kPi / 512) <= 1e-10);
}

TEST_CASE("input checks") {
    CHECK_THROWS_AS(mathieu_char(-1.0, 0, MathieuKind::Ce), Error);
    CHECK_THROWS_AS(mathieu_char(1.0, 0, MathieuKind::Se), Error);
}
