#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "subheat/errors.hpp"
#include "subheat/heat_mc.hpp"
#include "subheat/heat_spectral.hpp"
#include "subheat/parallel.hpp"

namespace subheat {

namespace {

constexpr const char* kModule = "heat_spectral";
constexpr double kPi = 3.14159265358979323846264338327950288;

// Graded time mesh tau_j = t (j / n)^2 for j = j0..n. The start j0 keeps the
// initial Gaussian at least 1.5 cells wide, so the sampled start carries no
// grid-aliased mass; doubling n with h halved gives a nested, self-similar mesh.
struct Schedule {
    double tau0 = 0.0;
    std::vector<double> dt;
};

long graded_steps(double t, double h, const OracleConfig& cfg) {
    return static_cast<long>(std::ceil(2.0 * std::sqrt(t) / (cfg.dt_factor * h)));
}

Schedule make_schedule(double t, double h, long n) {
    const long j0 = std::max(1L, static_cast<long>(std::ceil(1.5 * static_cast<double>(n) * h / std::sqrt(t))));
    if (j0 >= n) throw Error(ErrorKind::InvalidInput, kModule, "theta spacing too coarse for the time horizon");
    auto tau = [&](long j) { return t * std::pow(static_cast<double>(j) / static_cast<double>(n), 2); };
    Schedule s;
    s.tau0 = tau(j0);
    for (long j = j0; j < n; ++j) s.dt.push_back(tau(j + 1) - tau(j));
    return s;
}

void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper,
                       std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

double interpolate(const FourierSlice& s, double theta) {
    const double lo = s.theta_grid.front();
    const auto n = static_cast<long>(s.values.size());
    long i = static_cast<long>(std::floor((theta - lo) / s.h));
    i = std::clamp(i - 1, 0L, n - 4);
    double r = 0.0;
    for (long a = i; a < i + 4; ++a) {
        double w = 1.0;
        for (long b = i; b < i + 4; ++b)
            if (b != a) w *= (theta - s.theta_grid[b]) / (s.theta_grid[a] - s.theta_grid[b]);
        r += w * s.values[a];
    }
    return r;
}

std::string format_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

struct Window {
    double lo, hi;
};

// u_hat at the target thetas for one xi: extrapolated and h/2 values.
struct NodeValues {
    std::vector<double> value, fine;
};

// Theta grid with the covariance directions cached; shared by every xi.
// start[i] = int_0^1 c(s theta_i) c(s theta_i)^T ds, the straight-bridge
// average used by the short-time start.
struct Grid {
    double lo = 0.0, h = 0.0;
    long n = 0;
    std::vector<Vec2> c;
    std::vector<Mat2> start;
};

Grid make_grid(const AffineRep& rep, double lo, double hi, double h) {
    Grid g;
    g.lo = lo;
    g.h = h;
    g.n = static_cast<long>(std::llround((hi - lo) / h)) + 1;
    if (g.n < 8) throw Error(ErrorKind::InvalidInput, kModule, "theta window too small for the spacing");
    g.c.resize(static_cast<std::size_t>(g.n));
    g.start.resize(static_cast<std::size_t>(g.n));
    using G = boost::math::quadrature::gauss<double, 10>;
    for (long i = 0; i < g.n; ++i) {
        const double th = lo + h * static_cast<double>(i);
        g.c[i] = covariance_direction(rep, th);
        Mat2 m = Mat2::Zero();
        for (std::size_t k = 0; k < G::abscissa().size(); ++k) {
            for (double sgn : {-1.0, 1.0}) {
                if (G::abscissa()[k] == 0.0 && sgn < 0) continue;
                const Vec2 c = covariance_direction(rep, 0.5 * th * (1.0 + sgn * G::abscissa()[k]));
                m += 0.5 * G::weights()[k] * c * c.transpose();
            }
        }
        g.start[i] = m;
    }
    return g;
}

// Second-order march of one xi on one grid.
std::vector<double> march(const Grid& grid, const AffineRep& rep, double t, const Vec2& xi, long n_steps) {
    const double beta = rep.regime.beta, h = grid.h;
    const long n = grid.n;
    std::vector<double> V(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const double c = xi.dot(grid.c[i]);
        V[i] = 0.5 * c * c;
    }

    // Narrow Gaussian start, damped by the potential averaged along the
    // straight bridge from 0 to theta.
    const Schedule sch = make_schedule(t, h, n_steps);
    const double tau0 = sch.tau0;
    std::vector<double> u(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const double z = grid.lo + h * static_cast<double>(i) + beta * tau0;
        const double vbar = 0.5 * xi.dot(grid.start[i] * xi);
        u[i] = std::exp(-z * z / (2 * tau0) - vbar * tau0) / std::sqrt(2 * kPi * tau0);
    }

    const double a = 0.5 / (h * h) - 0.5 * beta / h;  // coefficient of u_{i-1}
    const double c = 0.5 / (h * h) + 0.5 * beta / h;  // coefficient of u_{i+1}
    std::vector<double> lower(n), diag(n), upper(n), rhs(n), prev;
    // (I - w L) u_new = rhs
    auto implicit_solve = [&](double w) {
        for (long i = 0; i < n; ++i) {
            lower[i] = -w * a;
            upper[i] = -w * c;
            diag[i] = 1.0 + w * (1.0 / (h * h) + V[i]);
        }
        solve_tridiagonal(lower, diag, upper, rhs);
    };
    auto apply_l = [&](const std::vector<double>& v, long i) {
        const double vm = i > 0 ? v[i - 1] : 0.0, vp = i + 1 < n ? v[i + 1] : 0.0;
        return a * vm - (1.0 / (h * h) + V[i]) * v[i] + c * vp;
    };
    // TR-BDF2 (L-stable, so large potentials are damped rather than reflected).
    const double g = 2.0 - std::sqrt(2.0);
    for (const double dt : sch.dt) {
        prev = u;
        for (long i = 0; i < n; ++i) rhs[i] = u[i] + 0.5 * g * dt * apply_l(u, i);
        implicit_solve(0.5 * g * dt);
        const double d = g * (2.0 - g);
        for (long i = 0; i < n; ++i) rhs[i] = (rhs[i] - (1.0 - g) * (1.0 - g) * prev[i]) / d;
        implicit_solve((1.0 - g) / (2.0 - g) * dt);
        u.swap(rhs);
    }
    return u;
}

FourierSlice solve_slice(const Grid& coarse, const Grid* fine, const AffineRep& rep, double t, const Vec2& xi,
                         const OracleConfig& cfg) {
    FourierSlice s;
    s.xi = xi;
    s.h = coarse.h;
    s.theta_grid.resize(static_cast<std::size_t>(coarse.n));
    for (long i = 0; i < coarse.n; ++i) s.theta_grid[i] = coarse.lo + coarse.h * static_cast<double>(i);
    const long n_steps = graded_steps(t, coarse.h, cfg);
    s.values = march(coarse, rep, t, xi, n_steps);
    s.time_steps = static_cast<int>(make_schedule(t, coarse.h, n_steps).dt.size());
    if (fine) {
        const std::vector<double> uf = march(*fine, rep, t, xi, 2 * n_steps);
        s.richardson_delta.resize(s.values.size());
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            const double r = (4.0 * uf[2 * i] - s.values[i]) / 3.0;
            s.richardson_delta[i] = r - uf[2 * i];
            s.values[i] = r;
        }
        s.time_steps += static_cast<int>(make_schedule(t, fine->h, 2 * n_steps).dt.size());
    }
    for (double v : s.values)
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, kModule, "non-finite value in a Fourier slice");
    return s;
}

void check_edges(const FourierSlice& s, const OracleConfig& cfg) {
    double peak = 0.0;
    for (double v : s.values) peak = std::max(peak, std::abs(v));
    const double edge = std::max(std::abs(s.values.front()), std::abs(s.values.back()));
    if (edge > cfg.boundary_tol * peak)
        throw Error(ErrorKind::BoundaryMassLeak, kModule,
                    "solution at the theta window edge is " + format_sci(edge / peak) + " of its peak");
}

double interpolate_delta(const FourierSlice& s, double theta) {
    if (s.richardson_delta.empty()) return 0.0;
    FourierSlice d;
    d.theta_grid = s.theta_grid;
    d.h = s.h;
    d.values = s.richardson_delta;
    return interpolate(d, theta);
}

}  // namespace

FourierSlice fourier_ode_oracle(const AffineRep& rep, double t, const Vec2& xi, double theta_lo, double theta_hi,
                                double h, const OracleConfig& cfg) {
    if (!(t > 0.0) || !(h > 0.0) || !(theta_hi > theta_lo) || !xi.allFinite())
        throw Error(ErrorKind::InvalidInput, kModule, "oracle needs t > 0, h > 0, finite xi and a non-empty window");
    const Grid coarse = make_grid(rep, theta_lo, theta_hi, h);
    const double hi = theta_lo + h * static_cast<double>(coarse.n - 1);
    if (cfg.richardson) {
        const Grid fine = make_grid(rep, theta_lo, hi, 0.5 * h);
        FourierSlice s = solve_slice(coarse, &fine, rep, t, xi, cfg);
        check_edges(s, cfg);
        return s;
    }
    FourierSlice s = solve_slice(coarse, nullptr, rep, t, xi, cfg);
    check_edges(s, cfg);
    return s;
}

std::vector<OracleResult> oracle_kernel(const AffineRep& rep, double t, const std::vector<GroupPoint>& points,
                                        const OracleConfig& cfg) {
    if (points.empty()) return {};
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidInput, kModule, "t must be positive");
    const double beta = rep.regime.beta, st = std::sqrt(t);
    const double h = cfg.h > 0.0 ? cfg.h : cfg.h_factor * st;

    double tmin = std::min(0.0, -beta * t), tmax = std::max(0.0, -beta * t);
    for (const auto& p : points) {
        tmin = std::min(tmin, p.theta);
        tmax = std::max(tmax, p.theta);
    }

    // Window: enlarge until the xi = 0 solution is negligible at the edges.
    double sig = cfg.window_sigmas;
    Window win{};
    for (int attempt = 0;; ++attempt) {
        win.lo = std::floor((tmin - sig * st) / h) * h;
        win.hi = std::ceil((tmax + sig * st) / h) * h;
        try {
            fourier_ode_oracle(rep, t, Vec2::Zero(), win.lo, win.hi, h, cfg);
            break;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::BoundaryMassLeak || attempt >= 3) throw;
            sig *= 1.5;
        }
    }

    const std::size_t np = points.size();
    const Grid coarse = make_grid(rep, win.lo, win.hi, h);
    const Grid fine = cfg.richardson ? make_grid(rep, win.lo, win.lo + h * double(coarse.n - 1), 0.5 * h) : Grid{};
    auto solve_node = [&](const Vec2& xi) {
        // |u_hat(xi)| <= u_hat(0) pointwise, so the window was already checked at xi = 0.
        const FourierSlice s = solve_slice(coarse, cfg.richardson ? &fine : nullptr, rep, t, xi, cfg);
        NodeValues nv;
        nv.value.resize(np);
        nv.fine.resize(np);
        for (std::size_t k = 0; k < np; ++k) {
            nv.value[k] = interpolate(s, points[k].theta);
            nv.fine[k] = nv.value[k] - interpolate_delta(s, points[k].theta);
        }
        return nv;
    };

    const NodeValues origin = solve_node(Vec2::Zero());
    for (std::size_t k = 0; k < np; ++k)
        if (!(origin.value[k] > 0.0))
            throw Error(ErrorKind::NonFinite, kModule, "theta marginal vanished at a target point");

    // Lattice spacing: the period 2 pi / dxi must cover the (x, y) spread at the
    // targets. The spread comes from u_hat(xi) ~ u_hat(0) exp(-sigma^2 |xi|^2 / 2).
    double spread = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
        double eps = 0.1;
        for (int it = 0; it < 20; ++it) {
            const NodeValues nv = solve_node(eps * (axis == 0 ? Vec2::UnitX() : Vec2::UnitY()));
            double worst = 1.0;
            for (std::size_t k = 0; k < np; ++k) worst = std::min(worst, nv.value[k] / origin.value[k]);
            if (worst > 0.5 || it == 19) {
                const double s2 = -2.0 * std::log(std::max(worst, 1e-300)) / (eps * eps);
                spread = std::max(spread, std::sqrt(std::max(s2, 0.0)));
                break;
            }
            eps *= 0.5;
        }
    }
    double vmax = 0.0;
    for (const auto& p : points) vmax = std::max({vmax, std::abs(p.x), std::abs(p.y)});
    double dxi = 2.0 * kPi / (2.0 * (vmax + 12.0 * std::max(spread, 1e-3)));

    std::vector<OracleResult> out(np);
    for (int refine = 0;; ++refine) {
        // Breadth-first exploration of the half lattice {j > 0} u {j = 0, i >= 0}.
        std::map<std::pair<long, long>, NodeValues> done;
        done.emplace(std::make_pair(0L, 0L), origin);
        std::vector<std::pair<long, long>> frontier{{0, 0}};
        auto in_half = [](long i, long j) { return j > 0 || (j == 0 && i >= 0); };
        auto significant = [&](const NodeValues& nv) {
            for (std::size_t k = 0; k < np; ++k)
                if (std::abs(nv.value[k]) > cfg.xi_threshold * origin.value[k]) return true;
            return false;
        };
        while (!frontier.empty()) {
            std::set<std::pair<long, long>> next;
            for (const auto& [i, j] : frontier) {
                if (!significant(done.at({i, j}))) continue;
                for (auto [di, dj] : {std::pair{1L, 0L}, {-1L, 0L}, {0L, 1L}, {0L, -1L}}) {
                    const long a = i + di, b = j + dj;
                    if (in_half(a, b) && !done.count({a, b})) next.insert({a, b});
                }
            }
            frontier.assign(next.begin(), next.end());
            std::vector<NodeValues> vals(frontier.size());
            parallel_for(frontier.size(), cfg.workers, [&](std::size_t k) {
                vals[k] = solve_node(dxi * Vec2(double(frontier[k].first), double(frontier[k].second)));
            }, 1);
            for (std::size_t k = 0; k < frontier.size(); ++k) done.emplace(frontier[k], std::move(vals[k]));
            if (static_cast<long>(done.size()) > cfg.max_xi_nodes)
                throw Error(ErrorKind::NoConvergence, kModule, "xi lattice exceeded max_xi_nodes");
        }

        bool converged = true;
        for (std::size_t k = 0; k < np; ++k) {
            std::vector<double> full, fine, sub;
            for (const auto& [ij, nv] : done) {
                const double w = (ij.first == 0 && ij.second == 0) ? 1.0 : 2.0;
                const double c = std::cos(dxi * (ij.first * points[k].x + ij.second * points[k].y));
                full.push_back(w * c * nv.value[k]);
                fine.push_back(w * c * nv.fine[k]);
                if (ij.first % 2 == 0 && ij.second % 2 == 0) sub.push_back(4.0 * w * c * nv.value[k]);
            }
            const double scale = dxi * dxi / (4.0 * kPi * kPi);
            const double v = scale * pairwise_sum(full), vf = scale * pairwise_sum(fine), vs = scale * pairwise_sum(sub);
            out[k].value = v;
            out[k].error_estimate = std::abs(v - vf) + std::abs(v - vs);
            out[k].xi_spacing = dxi;
            out[k].xi_nodes = static_cast<long>(done.size());
            if (std::abs(v - vs) > cfg.xi_refine_tol * std::abs(v)) converged = false;
        }
        if (converged || refine >= cfg.max_xi_refinements) break;
        dxi *= 0.5;
    }
    return out;
}

OracleResult oracle_kernel(const AffineRep& rep, double t, const GroupPoint& point, const OracleConfig& cfg) {
    return oracle_kernel(rep, t, std::vector<GroupPoint>{point}, cfg).front();
}

}  // namespace subheat
