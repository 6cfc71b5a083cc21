#include "subheat/symbolic.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "subheat/errors.hpp"

namespace subheat {

namespace {

constexpr const char* kModule = "cd_verify";

// Rates are snapped to a binary grid so that sums computed in different
// orders land on the same key.
double snap(double v) { return std::ldexp(std::nearbyint(std::ldexp(v, 46)), -46); }

TermKey normalized(TermKey k, double& c) {
    k.mu = snap(k.mu);
    k.omega = snap(k.omega);
    if (k.omega < 0.0) {
        k.omega = -k.omega;
        if (k.sine) c = -c;
    }
    if (k.omega == 0.0 && k.sine) c = 0.0;
    return k;
}

}  // namespace

void Expr::add(const TermKey& key, double c) {
    const TermKey k = normalized(key, c);
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(k, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0.0) terms_.erase(it);
    }
}

Expr Expr::constant(double c) {
    Expr e;
    e.add(TermKey{}, c);
    return e;
}

Expr Expr::x() { return term(TermKey{1, 0, 0, 0.0, 0.0, false}, 1.0); }
Expr Expr::y() { return term(TermKey{0, 1, 0, 0.0, 0.0, false}, 1.0); }
Expr Expr::theta() { return term(TermKey{0, 0, 1, 0.0, 0.0, false}, 1.0); }
Expr Expr::exp(double mu) { return term(TermKey{0, 0, 0, mu, 0.0, false}, 1.0); }
Expr Expr::cos(double omega) { return term(TermKey{0, 0, 0, 0.0, omega, false}, 1.0); }
Expr Expr::sin(double omega) { return term(TermKey{0, 0, 0, 0.0, omega, true}, 1.0); }

Expr Expr::term(const TermKey& key, double coeff) {
    Expr e;
    e.add(key, coeff);
    return e;
}

Expr& Expr::operator+=(const Expr& o) {
    for (const auto& [k, c] : o.terms_) add(k, c);
    return *this;
}

Expr& Expr::operator-=(const Expr& o) {
    for (const auto& [k, c] : o.terms_) add(k, -c);
    return *this;
}

Expr& Expr::operator*=(double s) {
    if (s == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& [k, c] : terms_) c *= s;
    return *this;
}

Expr operator*(const Expr& a, const Expr& b) {
    Expr r;
    for (const auto& [ka, ca] : a.terms_) {
        for (const auto& [kb, cb] : b.terms_) {
            TermKey k{ka.a + kb.a, ka.b + kb.b, ka.k + kb.k, ka.mu + kb.mu, 0.0, false};
            const double c = ca * cb;
            const double sum = ka.omega + kb.omega, diff = ka.omega - kb.omega;
            // Product-to-sum identities.
            auto put = [&](double w, bool sine, double f) {
                TermKey t = k;
                t.omega = w;
                t.sine = sine;
                r.add(t, c * f);
            };
            if (!ka.sine && !kb.sine) {
                put(diff, false, 0.5);
                put(sum, false, 0.5);
            } else if (ka.sine && kb.sine) {
                put(diff, false, 0.5);
                put(sum, false, -0.5);
            } else if (ka.sine) {
                put(sum, true, 0.5);
                put(diff, true, 0.5);
            } else {
                put(sum, true, 0.5);
                put(diff, true, -0.5);
            }
        }
    }
    return r;
}

double Expr::operator()(const GroupPoint& p) const {
    double s = 0.0;
    for (const auto& [k, c] : terms_) {
        double v = c;
        if (k.a) v *= std::pow(p.x, k.a);
        if (k.b) v *= std::pow(p.y, k.b);
        if (k.k) v *= std::pow(p.theta, k.k);
        if (k.mu != 0.0) v *= std::exp(k.mu * p.theta);
        if (k.omega != 0.0) v *= k.sine ? std::sin(k.omega * p.theta) : std::cos(k.omega * p.theta);
        s += v;
    }
    return s;
}

std::string Expr::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& [k, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << c;
        if (k.a) os << "*x^" << k.a;
        if (k.b) os << "*y^" << k.b;
        if (k.k) os << "*theta^" << k.k;
        if (k.mu != 0.0) os << "*exp(" << k.mu << "*theta)";
        if (k.omega != 0.0) os << (k.sine ? "*sin(" : "*cos(") << k.omega << "*theta)";
    }
    return os.str();
}

Expr d_theta(const Expr& f) {
    Expr r;
    for (const auto& [k, c] : f.terms()) {
        if (k.k > 0) {
            TermKey t = k;
            t.k -= 1;
            r += Expr::term(t, c * k.k);
        }
        if (k.mu != 0.0) r += Expr::term(k, c * k.mu);
        if (k.omega != 0.0) {
            TermKey t = k;
            t.sine = !k.sine;
            r += Expr::term(t, k.sine ? c * k.omega : -c * k.omega);
        }
    }
    return r;
}

Expr d_x(const Expr& f) {
    Expr r;
    for (const auto& [k, c] : f.terms()) {
        if (k.a == 0) continue;
        TermKey t = k;
        t.a -= 1;
        r += Expr::term(t, c * k.a);
    }
    return r;
}

Expr d_y(const Expr& f) {
    Expr r;
    for (const auto& [k, c] : f.terms()) {
        if (k.b == 0) continue;
        TermKey t = k;
        t.b -= 1;
        r += Expr::term(t, c * k.b);
    }
    return r;
}

namespace {

// Symbolic e^{theta A} for each regime, matching exp2x2.
std::array<Expr, 4> exp_theta_a(const Regime& r) {
    const Expr one = Expr::constant(1.0), zero, th = Expr::theta();
    switch (r.tag) {
        case RegimeTag::Rank1Heisenberg:
            return {one, th, zero, one};
        case RegimeTag::Rank1BetaPos:
            return {Expr::exp(r.beta), zero, zero, one};
        case RegimeTag::DeltaPos:
            return {Expr::exp(r.lambda1), zero, zero, Expr::exp(r.lambda2)};
        case RegimeTag::DeltaNeg: {
            const Expr e = Expr::exp(r.rho), c = Expr::cos(r.omega), s = Expr::sin(r.omega);
            return {e * c, -(e * s), e * s, e * c};
        }
        case RegimeTag::DeltaZero: {
            const Expr e = Expr::exp(r.lambda);
            return {e, th * e, zero, e};
        }
    }
    throw Error(ErrorKind::InvalidInput, kModule, "unknown regime");
}

}  // namespace

FieldCalculus::FieldCalculus(const AffineRep& rep, std::size_t term_cap) : rep_(rep), cap_(term_cap) {
    const auto e = exp_theta_a(rep.regime);
    for (int i = 0; i < 2; ++i) {
        yc_[i] = e[2 * i] * rep.ybar(0) + e[2 * i + 1] * rep.ybar(1);
        rc_[i] = e[2 * i] * rep.rbar(0) + e[2 * i + 1] * rep.rbar(1);
    }
}

Expr FieldCalculus::checked(Expr e) const {
    if (e.size() > cap_)
        throw Error(ErrorKind::ClassOverflow, kModule,
                    "expression has " + std::to_string(e.size()) + " terms, cap is " + std::to_string(cap_));
    return e;
}

Expr FieldCalculus::X(const Expr& f) const { return checked(d_theta(f)); }

Expr FieldCalculus::Y(const Expr& f) const { return checked(yc_[0] * d_x(f) + yc_[1] * d_y(f)); }

Expr FieldCalculus::R(const Expr& f) const { return checked(rc_[0] * d_x(f) + rc_[1] * d_y(f)); }

Expr FieldCalculus::L(const Expr& f) const {
    const Expr xf = X(f);
    return checked(X(xf) + Y(Y(f)) - rep_.regime.beta * xf);
}

Expr FieldCalculus::apply(const std::vector<Field>& word, const Expr& f) const {
    Expr r = f;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        switch (*it) {
            case Field::X: r = X(r); break;
            case Field::Y: r = Y(r); break;
            case Field::R: r = R(r); break;
        }
    }
    return r;
}

}  // namespace subheat
