#include "subheat/cd_verify.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "subheat/errors.hpp"
#include "subheat/parallel.hpp"

namespace subheat {

namespace {

constexpr const char* kModule = "cd_verify";

double alpha_plus(Parameters p) { return std::max(p.alpha, 0.0); }

}  // namespace

CarreForms carre_forms(const FieldCalculus& fc, const Expr& f) {
    CarreForms c;
    const Expr xf = fc.X(f), yf = fc.Y(f), rf = fc.R(f);
    c.lf = fc.L(f);
    c.gamma = xf * xf + yf * yf;
    c.gammaR = rf * rf;
    c.gamma2 = 0.5 * fc.L(c.gamma) - (xf * fc.X(c.lf) + yf * fc.Y(c.lf));
    c.gamma2R = 0.5 * fc.L(c.gammaR) - rf * fc.R(c.lf);
    return c;
}

CarreResult evaluate(const CarreForms& forms, const GroupPoint& p) {
    return {forms.gamma(p), forms.gammaR(p), forms.gamma2(p), forms.gamma2R(p), forms.lf(p)};
}

CarreResult carre(const FieldCalculus& fc, const Expr& f, const GroupPoint& p) {
    return evaluate(carre_forms(fc, f), p);
}

double gamma_bilinear(const FieldCalculus& fc, const Expr& f, const Expr& g, const GroupPoint& p) {
    return fc.X(f)(p) * fc.X(g)(p) + fc.Y(f)(p) * fc.Y(g)(p);
}

double cd_residual(const CarreResult& c, double nu, Parameters p) {
    if (!(nu > 0.0)) throw Error(ErrorKind::InvalidInput, kModule, "nu must be positive");
    return c.gamma2 + nu * c.gamma2R - 0.5 * c.lf * c.lf - 0.5 * (1.0 - nu * nu * p.alpha * p.alpha) * c.gammaR -
           (-alpha_plus(p) - p.beta * p.beta - 1.0 / nu) * c.gamma;
}

double cd_residual(const FieldCalculus& fc, const Expr& f, const GroupPoint& p, double nu) {
    return cd_residual(carre(fc, f, p), nu, fc.rep().regime.parameters());
}

double cd_residual_alpha0(const CarreResult& c, double nu, double beta) {
    if (!(nu > 0.0)) throw Error(ErrorKind::InvalidInput, kModule, "nu must be positive");
    return c.gamma2 + nu * c.gamma2R - 0.5 * c.lf * c.lf - 0.5 * c.gammaR - (-beta * beta - 1.0 / nu) * c.gamma;
}

double gamma2_expanded(const FieldCalculus& fc, const Expr& f, const GroupPoint& p, Gamma2Variant variant) {
    const auto par = fc.rep().regime.parameters();
    const double a = par.alpha, b = par.beta;
    const Expr xf = fc.X(f), yf = fc.Y(f);
    const double Xf = xf(p), Yf = yf(p), Rf = fc.R(f)(p);
    const double XXf = fc.X(xf)(p), YYf = fc.Y(yf)(p);
    const double XYf = fc.X(yf)(p), YXf = fc.Y(xf)(p);
    const double XRf = fc.X(fc.R(f))(p), YRf = fc.Y(fc.R(f))(p);
    const double s = variant == Gamma2Variant::Symmetrized ? XYf + YXf : XYf + XYf;
    return XXf * XXf + (YYf - b * Xf) * (YYf - b * Xf) + 0.5 * (s + b * Yf) * (s + b * Yf) + 0.5 * Rf * Rf -
           b * b * Xf * Xf - (a + b * b) * Yf * Yf + 2.0 * Yf * XRf - 2.0 * Xf * YRf;
}

double gamma2R_expanded(const FieldCalculus& fc, const Expr& f, const GroupPoint& p) {
    const auto par = fc.rep().regime.parameters();
    const Expr rf = fc.R(f);
    const double XRf = fc.X(rf)(p), YRf = fc.Y(rf)(p), Rf = rf(p), Yf = fc.Y(f)(p);
    const double s = fc.X(fc.Y(f))(p) + fc.Y(fc.X(f))(p);
    return XRf * XRf + YRf * YRf + par.alpha * Rf * (s - par.beta * Yf);
}

std::vector<NamedFunction> test_function_suite() {
    const Expr x = Expr::x(), y = Expr::y(), th = Expr::theta(), one = Expr::constant(1.0);
    return {
        {"theta", th},
        {"x", x},
        {"y", y},
        {"x2_plus_y2", x * x + y * y},
        {"theta_x", th * x},
        {"sin_theta_y", Expr::sin(1.0) * y},
        {"cos_2theta_xy", Expr::cos(2.0) * x * y},
        {"exp_half_theta_x", Expr::exp(0.5) * x},
        {"x3_minus_theta_y", x * x * x - th * y},
        {"theta2_y_plus_x", th * th * y + x},
        {"damped_cos_xy2", Expr::exp(-0.3) * Expr::cos(1.0) * (x + y) * (x + y)},
        {"trig_quadratic", Expr::sin(1.0) * x * x + Expr::cos(1.0) * y * y + 0.5 * one},
    };
}

CDReport cd_sweep(const CdSweepConfig& config) {
    if (config.n_points <= 0 || config.nus.empty() || config.params.empty())
        throw Error(ErrorKind::InvalidInput, kModule, "sweep needs points, nu values and parameters");
    for (double nu : config.nus)
        if (!(nu > 0.0)) throw Error(ErrorKind::InvalidInput, kModule, "nu must be positive");

    const auto suite = test_function_suite();
    const std::size_t nf = suite.size(), np = config.params.size(), nn = config.nus.size();
    const std::size_t npts = static_cast<std::size_t>(config.n_points);

    std::vector<std::vector<GroupPoint>> points(np);
    for (std::size_t k = 0; k < np; ++k) {
        auto rng = make_stream({config.seed, 0xcd, k});
        std::uniform_real_distribution<double> u(-config.box, config.box);
        for (std::size_t i = 0; i < npts; ++i) {
            GroupPoint g;
            g.theta = u(rng);
            g.x = u(rng);
            g.y = u(rng);
            points[k].push_back(g);
        }
    }

    CDReport report;
    report.settings = config;
    report.residuals.resize(np * nf * npts * nn);
    parallel_for(np * nf, config.workers, [&](std::size_t job) {
        const std::size_t k = job / nf, j = job % nf;
        const auto rep = build_rep(Regime::from_parameters(config.params[k]));
        const FieldCalculus fc(rep);
        const CarreForms forms = carre_forms(fc, suite[j].f);
        for (std::size_t i = 0; i < npts; ++i) {
            const CarreResult c = evaluate(forms, points[k][i]);
            for (std::size_t m = 0; m < nn; ++m) {
                CdRecord& r = report.residuals[((job * npts) + i) * nn + m];
                r.function = suite[j].name;
                r.params = config.params[k];
                r.nu = config.nus[m];
                r.point = points[k][i];
                r.residual = cd_residual(c, config.nus[m], rep.regime.parameters());
            }
        }
    }, 1);

    report.min_residual = std::numeric_limits<double>::infinity();
    for (const auto& r : report.residuals) {
        if (!std::isfinite(r.residual)) throw Error(ErrorKind::NonFinite, kModule, "non-finite residual");
        if (r.residual < report.min_residual) {
            report.min_residual = r.residual;
            report.worst = r;
        }
    }
    return report;
}

BumpJet bump_jet(const AffineRep& rep, const Bump& bump, const GroupPoint& p) {
    const double dt = p.theta - bump.center.theta, dx = p.x - bump.center.x, dy = p.y - bump.center.y;
    const double r2 = bump.radius * bump.radius;
    const double s = (dt * dt + dx * dx + dy * dy) / r2;
    if (s >= 1.0) return {};
    const double base = 1.0 - s;
    const double pm = std::pow(base, bump.order);
    const double g = -(bump.order + 1) * pm * 2.0 / r2;
    const Vec2 grad_v(g * dx, g * dy);
    const FieldCoefficients c = field_coeffs(rep, p.theta);
    return {pm * base, g * dt, c.yY.dot(grad_v), c.yR.dot(grad_v)};
}

double kappa_cd(Parameters p) { return p.beta * p.beta + alpha_plus(p); }

double t_window_max(Parameters p) {
    if (p.alpha == 0.0) throw Error(ErrorKind::InvalidInput, kModule, "the gradient bound needs alpha != 0");
    const double a = std::abs(p.alpha), u = kappa_cd(p) / a;
    const double h = u == 0.0 ? 1.0 : std::log1p(u) / u;
    return h / (2.0 * a);
}

double gradient_bound_coefficient(Parameters p, double T) {
    const double a = std::abs(p.alpha), x = 2.0 * kappa_cd(p) * T;
    const double g = x == 0.0 ? 1.0 : std::expm1(x) / x;
    return std::exp(x) / (1.0 - 2.0 * a * T * g);
}

namespace {

// Per-path columns shared by both bound checks.
enum Col { kDX, kDY, kDR, kGamma, kGammaR, kF, kF2, kCols };

struct Columns {
    std::vector<double> col[kCols];
    double mean[kCols] = {};
};

Columns sample_columns(const AffineRep& rep, const Bump& bump, double T, const BoundSpec& spec) {
    if (!(spec.fd_step > 0.0)) throw Error(ErrorKind::InvalidInput, kModule, "fd_step must be positive");
    const auto ends = sample_endpoints(rep, T, spec.sde);
    const std::size_t n = ends.size();
    Columns c;
    for (auto& v : c.col) v.resize(n);
    const double h = spec.fd_step;
    const Vec2 hy = h * rep.ybar, hr = h * rep.rbar;
    const GroupPoint shifts[3][2] = {{{h, 0, 0}, {-h, 0, 0}},
                                     {{0, hy(0), hy(1)}, {0, -hy(0), -hy(1)}},
                                     {{0, hr(0), hr(1)}, {0, -hr(0), -hr(1)}}};
    GroupPoint bases[3][2];
    for (int w = 0; w < 3; ++w)
        for (int s = 0; s < 2; ++s) bases[w][s] = group_mul(rep, spec.base, shifts[w][s]);

    parallel_for(n, spec.sde.workers, [&](std::size_t i) {
        for (int w = 0; w < 3; ++w) {
            const double fp = bump_jet(rep, bump, group_mul(rep, bases[w][0], ends[i])).f;
            const double fm = bump_jet(rep, bump, group_mul(rep, bases[w][1], ends[i])).f;
            c.col[w][i] = (fp - fm) / (2.0 * h);
        }
        const BumpJet j = bump_jet(rep, bump, group_mul(rep, spec.base, ends[i]));
        c.col[kGamma][i] = j.xf * j.xf + j.yf * j.yf;
        c.col[kGammaR][i] = j.rf * j.rf;
        c.col[kF][i] = j.f;
        c.col[kF2][i] = j.f * j.f;
    });
    for (int k = 0; k < kCols; ++k) c.mean[k] = pairwise_sum(c.col[k]) / static_cast<double>(n);
    return c;
}

// Standard error of a smooth function of the column means, from its gradient.
double delta_se(const Columns& c, const double (&grad)[kCols]) {
    const std::size_t n = c.col[0].size();
    std::vector<double> l(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < kCols; ++k)
            if (grad[k] != 0.0) l[i] += grad[k] * c.col[k][i];
    return mean_and_error(l).std_error;
}

void check_alpha(Parameters p) {
    if (p.alpha == 0.0) throw Error(ErrorKind::InvalidInput, kModule, "the semigroup bounds need alpha != 0");
}

}  // namespace

BoundReport gradient_bound_check(const AffineRep& rep, const Bump& bump, double T, const BoundSpec& spec) {
    const Parameters p = rep.regime.parameters();
    check_alpha(p);
    if (!(T >= 0.0)) throw Error(ErrorKind::InvalidInput, kModule, "T must be non-negative");
    BoundReport r;
    r.T = T;
    r.kappa_cd = kappa_cd(p);
    r.t_window_max = t_window_max(p);
    r.settings = spec;
    if (T >= r.t_window_max)
        throw Error(ErrorKind::WindowExceeded, kModule,
                    "T = " + std::to_string(T) + " is not below the window " + std::to_string(r.t_window_max));
    for (int i = 0; i <= 10; ++i) r.a_curve.emplace_back(T * i / 10.0, gradient_bound_coefficient(p, T * i / 10.0));
    const double ia = 1.0 / std::abs(p.alpha), coef = gradient_bound_coefficient(p, T);

    if (T == 0.0) {
        const BumpJet j = bump_jet(rep, bump, spec.base);
        const double g = j.xf * j.xf + j.yf * j.yf, gr = j.rf * j.rf;
        r.lhs = {g + ia * gr, 0.0};
        r.rhs = {coef * g + ia * gr, 0.0};
        r.pass = r.lhs.value <= r.rhs.value;
        return r;
    }

    const Columns c = sample_columns(rep, bump, T, spec);
    const double *m = c.mean;
    r.lhs.value = m[kDX] * m[kDX] + m[kDY] * m[kDY] + ia * m[kDR] * m[kDR];
    r.rhs.value = coef * m[kGamma] + ia * m[kGammaR];
    const double gl[kCols] = {2 * m[kDX], 2 * m[kDY], 2 * ia * m[kDR], 0, 0, 0, 0};
    const double gr[kCols] = {0, 0, 0, coef, ia, 0, 0};
    const double gd[kCols] = {2 * m[kDX], 2 * m[kDY], 2 * ia * m[kDR], -coef, -ia, 0, 0};
    r.lhs.std_error = delta_se(c, gl);
    r.rhs.std_error = delta_se(c, gr);
    r.diff_std_error = delta_se(c, gd);
    r.pass = r.lhs.value <= r.rhs.value + 3.0 * r.diff_std_error;
    return r;
}

BoundReport reverse_poincare_check(const AffineRep& rep, const Bump& bump, double T, const BoundSpec& spec) {
    const Parameters p = rep.regime.parameters();
    check_alpha(p);
    if (!(T > 0.0)) throw Error(ErrorKind::InvalidInput, kModule, "T must be positive");
    BoundReport r;
    r.T = T;
    r.kappa_cd = kappa_cd(p);
    r.t_window_max = t_window_max(p);
    r.settings = spec;
    const double a = std::abs(p.alpha), ia = 1.0 / a, c2 = 2.0 * (r.kappa_cd + a);
    for (int i = 0; i <= 10; ++i) r.a_curve.emplace_back(T * i / 10.0, std::exp(c2 * T * i / 10.0));
    const double e = std::exp(c2 * T), k = a * e * std::expm1(c2 * T);

    const Columns c = sample_columns(rep, bump, T, spec);
    const double *m = c.mean;
    r.lhs.value = m[kDX] * m[kDX] + m[kDY] * m[kDY] + ia * m[kDR] * m[kDR] - e * m[kGamma] - ia * m[kGammaR];
    r.rhs.value = k * (m[kF2] - m[kF] * m[kF]);
    const double gl[kCols] = {2 * m[kDX], 2 * m[kDY], 2 * ia * m[kDR], -e, -ia, 0, 0};
    const double gr[kCols] = {0, 0, 0, 0, 0, -2 * k * m[kF], k};
    double gd[kCols];
    for (int i = 0; i < kCols; ++i) gd[i] = gl[i] - gr[i];
    r.lhs.std_error = delta_se(c, gl);
    r.rhs.std_error = delta_se(c, gr);
    r.diff_std_error = delta_se(c, gd);
    r.pass = r.lhs.value <= r.rhs.value + 3.0 * r.diff_std_error;
    return r;
}

}  // namespace subheat
