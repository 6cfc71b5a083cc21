#include "subheat/heat_mc.hpp"

#include <cmath>
#include <map>

#include "subheat/errors.hpp"

namespace subheat {

namespace {

constexpr const char* kModule = "heat_mc";
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Per-path data needed to evaluate the conditional Gaussian at any (x, y).
struct PathGaussian {
    double i00 = 0, i01 = 0, i11 = 0;  // Sigma^{-1}
    double norm = 0;                   // (2 pi)^{-1} det^{-1/2}; 0 when rejected
    bool rejected = false;
};

double reject_floor(const AffineRep& rep, double t) {
    const double s = t * rep.ybar.squaredNorm();
    return 1e-13 * s * s;
}

std::vector<PathGaussian> sample_pool(const AffineRep& rep, double t, double target, const McSpec& spec,
                                      std::uint64_t stream_id) {
    std::vector<PathGaussian> pool(static_cast<std::size_t>(spec.n_paths));
    const double floor = reject_floor(rep, t);
    const double beta = rep.regime.beta;
    parallel_for(pool.size(), spec.workers, [&](std::size_t i) {
        auto rng = make_stream({spec.seed, stream_id, i, spec.replicate});
        const PathGrid path = sample_bridge(t, target, spec.n_steps, rng);
        const CovarianceAccumulator acc = covariance_along_path(rep, beta, path, spec.quadrature, spec.covariance);
        PathGaussian& g = pool[i];
        if (!(acc.det >= floor)) {
            g.rejected = true;
            return;
        }
        const Mat2& s = acc.sigma;
        g.i00 = s(1, 1) / acc.det;
        g.i11 = s(0, 0) / acc.det;
        g.i01 = -s(0, 1) / acc.det;
        g.norm = 1.0 / (kTwoPi * std::sqrt(acc.det));
    });
    return pool;
}

KernelEstimate evaluate(const std::vector<PathGaussian>& pool, long rejects, const GroupPoint& p, double t,
                        double beta, const McSpec& spec) {
    std::vector<double> g(pool.size());
    const double x = p.x, y = p.y;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const PathGaussian& pg = pool[i];
        if (pg.rejected) {
            g[i] = 0.0;
            continue;
        }
        const double q = pg.i00 * x * x + 2.0 * pg.i01 * x * y + pg.i11 * y * y;
        g[i] = pg.norm * std::exp(-0.5 * q);
    }
    const MeanAndError me = mean_and_error(g);
    const double pref = gaussian_prefactor(p.theta, beta, t, spec.drift);
    KernelEstimate est;
    est.value = pref * me.mean;
    est.std_error = pref * me.std_error;
    est.n_paths = spec.n_paths;
    est.n_steps = spec.n_steps;
    est.seed = spec.seed;
    est.drift = spec.drift;
    est.rejects = rejects;
    return est;
}

long count_rejects(const std::vector<PathGaussian>& pool, const McSpec& spec) {
    long r = 0;
    for (const auto& g : pool) r += g.rejected ? 1 : 0;
    if (static_cast<double>(r) > spec.max_reject_fraction * static_cast<double>(pool.size()))
        throw Error(ErrorKind::TooManyRejections, kModule,
                    std::to_string(r) + " of " + std::to_string(pool.size()) +
                        " paths fell below the covariance determinant floor");
    return r;
}

void check_spec(double t, const McSpec& spec) {
    if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorKind::InvalidInput, kModule, "t must be positive");
    if (spec.n_paths < 2) throw Error(ErrorKind::InvalidInput, kModule, "n_paths must be >= 2");
    if (spec.n_steps < 2) throw Error(ErrorKind::InvalidInput, kModule, "n_steps must be >= 2");
}

}  // namespace

std::string_view to_string(DriftConvention c) {
    return c == DriftConvention::UndriftedPrefactor ? "UndriftedPrefactor" : "DriftedPrefactor";
}

std::optional<DriftConvention> drift_convention_from_string(std::string_view s) {
    if (s == "UndriftedPrefactor" || s == "undrifted") return DriftConvention::UndriftedPrefactor;
    if (s == "DriftedPrefactor" || s == "drifted") return DriftConvention::DriftedPrefactor;
    return std::nullopt;
}

PathGrid sample_bridge(double t, double target, int n, std::mt19937_64& rng) {
    if (!(t > 0.0) || n < 2) throw Error(ErrorKind::InvalidInput, kModule, "bridge needs t > 0 and n >= 2");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(t / n);
    PathGrid p;
    p.t = t;
    p.values.resize(static_cast<std::size_t>(n) + 1);
    p.values[0] = 0.0;
    for (int i = 1; i <= n; ++i) p.values[i] = p.values[i - 1] + sd * normal(rng);
    const double wt = p.values[n];
    for (int i = 1; i <= n; ++i) {
        const double r = static_cast<double>(i) / n;
        p.values[i] = p.values[i] - r * wt + r * target;
    }
    return p;
}

Vec2 covariance_direction(const AffineRep& rep, double u, CovariancePath path) {
    if (path == CovariancePath::Generic) return exp2x2_generic(rep.A, u) * rep.ybar;
    const Regime& r = rep.regime;
    switch (r.tag) {
        case RegimeTag::Rank1Heisenberg: return {u, 1.0};
        case RegimeTag::Rank1BetaPos: return {std::exp(r.beta * u), 1.0};
        case RegimeTag::DeltaPos: return {-r.lambda1 * std::exp(r.lambda1 * u), r.lambda2 * std::exp(r.lambda2 * u)};
        case RegimeTag::DeltaNeg: {
            const double e = std::exp(r.rho * u), c = std::cos(r.omega * u), s = std::sin(r.omega * u);
            return {e * (-r.omega * c - r.rho * s), e * (-r.omega * s + r.rho * c)};
        }
        case RegimeTag::DeltaZero: {
            const double e = std::exp(r.lambda * u);
            return {e * (r.lambda - 1.0 - r.lambda * u), -e * r.lambda};
        }
    }
    return Vec2::Zero();
}

CovarianceAccumulator covariance_along_path(const AffineRep& rep, double beta, const PathGrid& path, Quadrature q,
                                            CovariancePath cp) {
    const int n = path.n();
    if (n < 1) throw Error(ErrorKind::InvalidInput, kModule, "empty path");
    const double dt = path.t / n;
    double s00 = 0, s01 = 0, s11 = 0;
    double max_u = 0.0;
    auto add = [&](double u, double w) {
        const Vec2 c = covariance_direction(rep, u, cp);
        max_u = std::max(max_u, std::abs(u));
        s00 += w * c(0) * c(0);
        s01 += w * c(0) * c(1);
        s11 += w * c(1) * c(1);
    };
    if (q == Quadrature::Trapezoid) {
        for (int i = 0; i <= n; ++i) add(path.values[i] - beta * i * dt, (i == 0 || i == n) ? 0.5 * dt : dt);
    } else {
        for (int i = 0; i < n; ++i)
            add(0.5 * (path.values[i] + path.values[i + 1]) - beta * (i + 0.5) * dt, dt);
    }
    CovarianceAccumulator acc;
    acc.sigma << s00, s01, s01, s11;
    acc.det = s00 * s11 - s01 * s01;
    if (!std::isfinite(acc.det))
        throw Error(ErrorKind::NonFinite, kModule,
                    "covariance overflowed (max |u| along the path = " + std::to_string(max_u) + ")");
    return acc;
}

double bridge_target(double theta, double beta, double t, DriftConvention c) {
    return c == DriftConvention::DriftedPrefactor ? theta + beta * t : theta;
}

double gaussian_prefactor(double theta, double beta, double t, DriftConvention c) {
    const double m = bridge_target(theta, beta, t, c);
    return std::exp(-m * m / (2.0 * t)) / std::sqrt(kTwoPi * t);
}

KernelEstimate kernel_point_estimate(const AffineRep& rep, double t, const GroupPoint& point, const McSpec& spec,
                                     std::uint64_t point_index) {
    check_spec(t, spec);
    const double target = bridge_target(point.theta, rep.regime.beta, t, spec.drift);
    const auto pool = sample_pool(rep, t, target, spec, point_index);
    const long rejects = count_rejects(pool, spec);
    return evaluate(pool, rejects, point, t, rep.regime.beta, spec);
}

std::vector<KernelEstimate> kernel_grid_estimate(const AffineRep& rep, double t,
                                                 const std::vector<GroupPoint>& points, const McSpec& spec) {
    check_spec(t, spec);
    // Slices in order of first appearance.
    std::map<double, std::vector<std::size_t>> by_theta;
    std::vector<double> order;
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto [it, inserted] = by_theta.try_emplace(points[i].theta);
        if (inserted) order.push_back(points[i].theta);
        it->second.push_back(i);
    }
    std::vector<KernelEstimate> out(points.size());
    for (std::size_t s = 0; s < order.size(); ++s) {
        const double theta = order[s];
        const auto pool = sample_pool(rep, t, bridge_target(theta, rep.regime.beta, t, spec.drift), spec, s);
        const long rejects = count_rejects(pool, spec);
        const auto& idx = by_theta[theta];
        parallel_for(idx.size(), spec.workers, [&](std::size_t j) {
            out[idx[j]] = evaluate(pool, rejects, points[idx[j]], t, rep.regime.beta, spec);
        }, 1);
    }
    return out;
}

GroupPoint sde_endpoint_sample(const AffineRep& rep, double t, int n_steps, std::mt19937_64& rng, Generator gen) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double dt = t / n_steps;
    const double amp = (gen == Generator::SubLaplacian ? std::sqrt(2.0) : 1.0) * std::sqrt(dt);
    const double beta = rep.regime.beta;
    double b = 0.0;
    Vec2 v = Vec2::Zero();
    for (int i = 0; i < n_steps; ++i) {
        const double theta = b - beta * i * dt;
        const Vec2 c = covariance_direction(rep, theta);
        const double db = amp * normal(rng);
        const double dw = amp * normal(rng);
        v += c * dw;
        b += db;
    }
    const GroupPoint p{b - beta * t, v(0), v(1)};
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw Error(ErrorKind::NonFinite, kModule, "endpoint overflowed");
    return p;
}

std::vector<GroupPoint> sample_endpoints(const AffineRep& rep, double t, const SdeSpec& spec) {
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidInput, kModule, "t must be positive");
    if (spec.n_paths < 1 || spec.n_steps < 1) throw Error(ErrorKind::InvalidInput, kModule, "empty sampling spec");
    std::vector<GroupPoint> out(static_cast<std::size_t>(spec.n_paths));
    parallel_for(out.size(), spec.workers, [&](std::size_t i) {
        auto rng = make_stream({spec.seed, 0x5de, i});
        out[i] = sde_endpoint_sample(rep, t, spec.n_steps, rng, spec.generator);
    });
    return out;
}

MeanAndError semigroup_estimate(const AffineRep& rep, const std::function<double(const GroupPoint&)>& f,
                                const std::vector<GroupPoint>& endpoints, const GroupPoint& base) {
    std::vector<double> v(endpoints.size());
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
        v[i] = f(group_mul(rep, base, endpoints[i]));
        if (!std::isfinite(v[i])) throw Error(ErrorKind::NonFinite, kModule, "test function is not finite");
    }
    return mean_and_error(v);
}

MeanAndError semigroup_estimate(const AffineRep& rep, const std::function<double(const GroupPoint&)>& f, double t,
                                const SdeSpec& spec, const GroupPoint& base) {
    return semigroup_estimate(rep, f, sample_endpoints(rep, t, spec), base);
}

MassGrid scaled_mass_grid(double t, double t_ref, int n) {
    const double l = std::sqrt(t / t_ref);
    MassGrid g;
    g.theta_lo = -4 * l;
    g.theta_hi = 4 * l;
    g.y_lo = -4 * l;
    g.y_hi = 4 * l;
    g.x_lo = -4 * l * l;
    g.x_hi = 4 * l * l;
    g.n_theta = g.n_x = g.n_y = n;
    return g;
}

MassResult kernel_mass_check(const AffineRep& rep, double t, const MassGrid& grid, const McSpec& spec) {
    if (grid.n_theta < 2 || grid.n_x < 2 || grid.n_y < 2)
        throw Error(ErrorKind::InvalidInput, kModule, "mass grid needs at least 2 points per axis");
    auto axis = [](double lo, double hi, int n) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
        return v;
    };
    auto weight = [](int i, int n, double lo, double hi) {
        const double h = (hi - lo) / (n - 1);
        return (i == 0 || i == n - 1) ? 0.5 * h : h;
    };
    const auto th = axis(grid.theta_lo, grid.theta_hi, grid.n_theta);
    const auto xs = axis(grid.x_lo, grid.x_hi, grid.n_x);
    const auto ys = axis(grid.y_lo, grid.y_hi, grid.n_y);
    std::vector<GroupPoint> pts;
    std::vector<double> w;
    pts.reserve(th.size() * xs.size() * ys.size());
    for (int a = 0; a < grid.n_theta; ++a)
        for (int b = 0; b < grid.n_x; ++b)
            for (int c = 0; c < grid.n_y; ++c) {
                pts.push_back({th[a], xs[b], ys[c]});
                w.push_back(weight(a, grid.n_theta, grid.theta_lo, grid.theta_hi) *
                            weight(b, grid.n_x, grid.x_lo, grid.x_hi) * weight(c, grid.n_y, grid.y_lo, grid.y_hi));
            }
    const auto est = kernel_grid_estimate(rep, t, pts, spec);
    std::vector<double> terms(pts.size());
    MassResult r;
    for (std::size_t i = 0; i < pts.size(); ++i) terms[i] = w[i] * est[i].value;
    for (std::size_t a = 0; a < th.size(); ++a) r.rejects += est[a * xs.size() * ys.size()].rejects;
    r.mass = pairwise_sum(terms);
    return r;
}

}  // namespace subheat
