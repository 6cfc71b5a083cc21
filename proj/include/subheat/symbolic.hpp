#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "subheat/representation.hpp"

namespace subheat {

/// x^a y^b theta^k e^{mu theta} trig(omega theta), trig = cos or sin, omega >= 0.
struct TermKey {
    int a = 0, b = 0, k = 0;
    double mu = 0.0;
    double omega = 0.0;
    bool sine = false;

    auto tie() const { return std::tie(a, b, k, mu, omega, sine); }
    bool operator<(const TermKey& o) const { return tie() < o.tie(); }
    bool operator==(const TermKey& o) const { return tie() == o.tie(); }
};

/// Finite sum of terms; closed under +, *, d/dtheta, d/dx, d/dy.
class Expr {
public:
    Expr() = default;
    static Expr constant(double c);
    static Expr x();
    static Expr y();
    static Expr theta();
    static Expr exp(double mu);
    static Expr cos(double omega);
    static Expr sin(double omega);
    static Expr term(const TermKey& key, double coeff);

    Expr& operator+=(const Expr& o);
    Expr& operator-=(const Expr& o);
    Expr& operator*=(double s);
    friend Expr operator+(Expr a, const Expr& b) { return a += b; }
    friend Expr operator-(Expr a, const Expr& b) { return a -= b; }
    friend Expr operator*(Expr a, double s) { return a *= s; }
    friend Expr operator*(double s, Expr a) { return a *= s; }
    friend Expr operator-(Expr a) { return a *= -1.0; }
    friend Expr operator*(const Expr& a, const Expr& b);

    double operator()(const GroupPoint& p) const;
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }
    const std::map<TermKey, double>& terms() const { return terms_; }
    std::string to_string() const;

private:
    void add(const TermKey& key, double c);
    std::map<TermKey, double> terms_;
};

Expr d_theta(const Expr& f);
Expr d_x(const Expr& f);
Expr d_y(const Expr& f);

/// X = d/dtheta, Y = (e^{theta A} ybar) . grad_v, R = (e^{theta A} rbar) . grad_v
/// and L = X^2 + Y^2 - beta X, applied exactly. Throws Error{ClassOverflow}
/// when a result has more than term_cap terms.
class FieldCalculus {
public:
    explicit FieldCalculus(const AffineRep& rep, std::size_t term_cap = 200000);

    Expr X(const Expr& f) const;
    Expr Y(const Expr& f) const;
    Expr R(const Expr& f) const;
    Expr L(const Expr& f) const;
    /// W_1 W_2 ... W_k f (rightmost field applied first).
    Expr apply(const std::vector<Field>& word, const Expr& f) const;

    const AffineRep& rep() const { return rep_; }
    /// Symbolic e^{theta A} ybar and e^{theta A} rbar.
    const Expr& y_coeff(int i) const { return yc_[i]; }
    const Expr& r_coeff(int i) const { return rc_[i]; }

private:
    Expr checked(Expr e) const;
    AffineRep rep_;
    std::size_t cap_;
    Expr yc_[2], rc_[2];
};

}  // namespace subheat
