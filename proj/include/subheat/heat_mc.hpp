#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "subheat/parallel.hpp"
#include "subheat/representation.hpp"

namespace subheat {

/// Default seed for every stochastic routine (overridable from the CLI).
inline constexpr std::uint64_t kDefaultSeed = 20240611;

/// Values of a path on the uniform grid s_i = i t / n, i = 0..n.
struct PathGrid {
    double t = 0.0;
    std::vector<double> values;

    int n() const { return static_cast<int>(values.size()) - 1; }
};

struct CovarianceAccumulator {
    Mat2 sigma = Mat2::Zero();
    double det = 0.0;
};

/// How the kernel's theta-conditioning is tied to the drift.
///  DriftedPrefactor:   condition B_t - beta t = theta, prefactor N(theta + beta t; 0, t).
///  UndriftedPrefactor: condition B_t = theta,          prefactor N(theta; 0, t).
/// Both coincide when beta = 0.
enum class DriftConvention { UndriftedPrefactor, DriftedPrefactor };

enum class Quadrature { Trapezoid, Midpoint };

/// ClosedForm uses the per-regime integrands written out by hand; Generic
/// goes through the matrix exponential.
enum class CovariancePath { ClosedForm, Generic };

/// Which diffusion the endpoint sampler simulates.
///  StandardBrownian: theta = B_t - beta t, v = int exp(theta A) ybar dW
///                    (generator (X^2 + Y^2)/2 - beta X).
///  SubLaplacian:     theta = sqrt2 B_t - beta t, v = sqrt2 int exp(theta A) ybar dW
///                    (generator X^2 + Y^2 - beta X).
enum class Generator { StandardBrownian, SubLaplacian };

std::string_view to_string(DriftConvention c);
std::optional<DriftConvention> drift_convention_from_string(std::string_view s);

struct McSpec {
    int n_paths = 100000;
    int n_steps = 512;
    std::uint64_t seed = kDefaultSeed;
    DriftConvention drift = DriftConvention::DriftedPrefactor;
    Quadrature quadrature = Quadrature::Trapezoid;
    CovariancePath covariance = CovariancePath::ClosedForm;
    unsigned workers = 0;
    /// Replicate index mixed into the stream ids (independent re-runs).
    std::uint64_t replicate = 0;
    double max_reject_fraction = 0.01;
};

struct KernelEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int n_paths = 0;
    int n_steps = 0;
    std::uint64_t seed = 0;
    DriftConvention drift = DriftConvention::DriftedPrefactor;
    long rejects = 0;
};

/// B(s_i) = W(s_i) - (s_i/t) W(t) + (s_i/t) target; the endpoint is exact.
PathGrid sample_bridge(double t, double target, int n, std::mt19937_64& rng);

/// Integrand exp(uA) ybar of the covariance at u.
Vec2 covariance_direction(const AffineRep& rep, double u, CovariancePath path = CovariancePath::ClosedForm);

/// Sigma = int_0^t c(u(s)) c(u(s))^T ds with u(s) = B(s) - beta s.
CovarianceAccumulator covariance_along_path(const AffineRep& rep, double beta, const PathGrid& path,
                                            Quadrature q = Quadrature::Trapezoid,
                                            CovariancePath cp = CovariancePath::ClosedForm);

/// Bridge target and Gaussian prefactor for a theta value under a convention.
double bridge_target(double theta, double beta, double t, DriftConvention c);
double gaussian_prefactor(double theta, double beta, double t, DriftConvention c);

/// Endpoint density of the process at a point (coordinate volume d theta dx dy).
KernelEstimate kernel_point_estimate(const AffineRep& rep, double t, const GroupPoint& point,
                                     const McSpec& spec, std::uint64_t point_index = 0);

/// Estimates on many points. Points sharing a theta value reuse one pool of
/// bridges (errors across such points are correlated, not biased).
std::vector<KernelEstimate> kernel_grid_estimate(const AffineRep& rep, double t,
                                                 const std::vector<GroupPoint>& points,
                                                 const McSpec& spec);

/// Euler-Maruyama endpoint of the process started at the identity.
GroupPoint sde_endpoint_sample(const AffineRep& rep, double t, int n_steps, std::mt19937_64& rng,
                               Generator gen = Generator::StandardBrownian);

struct SdeSpec {
    int n_paths = 100000;
    int n_steps = 256;
    std::uint64_t seed = kDefaultSeed;
    Generator generator = Generator::StandardBrownian;
    unsigned workers = 0;
};

/// n_paths endpoints; path i uses stream (seed, i), so the set is the same
/// for any worker count.
std::vector<GroupPoint> sample_endpoints(const AffineRep& rep, double t, const SdeSpec& spec);

/// E f(g Z_t) with Z_t the endpoint; the base point g defaults to the identity.
MeanAndError semigroup_estimate(const AffineRep& rep, const std::function<double(const GroupPoint&)>& f,
                                double t, const SdeSpec& spec, const GroupPoint& base = {});

/// Same, on pre-sampled endpoints.
MeanAndError semigroup_estimate(const AffineRep& rep, const std::function<double(const GroupPoint&)>& f,
                                const std::vector<GroupPoint>& endpoints, const GroupPoint& base = {});

struct MassGrid {
    double theta_lo = -4, theta_hi = 4;
    double x_lo = -4, x_hi = 4;
    double y_lo = -4, y_hi = 4;
    int n_theta = 33, n_x = 33, n_y = 33;
};

/// Box grid with the Heisenberg dilation of [-4,4]^3 at time t relative to
/// t_ref: theta and y scale by sqrt(t/t_ref), x by t/t_ref.
MassGrid scaled_mass_grid(double t, double t_ref = 0.5, int n = 33);

struct MassResult {
    double mass = 0.0;
    long rejects = 0;
};

/// Trapezoid integral of the estimated kernel over the grid.
MassResult kernel_mass_check(const AffineRep& rep, double t, const MassGrid& grid, const McSpec& spec);

}  // namespace subheat
