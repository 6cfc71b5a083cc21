#include "subheat/heat_spectral.hpp"

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <boost/math/quadrature/gauss.hpp>

#include "subheat/errors.hpp"
#include "subheat/parallel.hpp"

namespace subheat {

namespace {

constexpr const char* kModule = "heat_spectral";
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr std::array<MathieuClass, 4> kClasses{MathieuClass::CeEven, MathieuClass::CeOdd, MathieuClass::SeOdd,
                                               MathieuClass::SeEven};

bool is_se(MathieuClass c) { return c == MathieuClass::SeOdd || c == MathieuClass::SeEven; }

// Retained Mathieu modes of all four classes at one q.
struct ModeSet {
    std::array<MathieuClassSolution, 4> cls;
    std::array<int, 4> keep{};
    double a_min = 0.0;
    double tail = 0.0;
};

int modes_per_class(double tau, const SpectralKernelConfig& cfg, int M) {
    int n = M;
    if (tau > 0.0) n = static_cast<int>(std::ceil(std::sqrt(cfg.mode_cutoff / tau) / 2.0)) + 3;
    if (cfg.K > 0) n = std::min(n, cfg.K);
    return std::max(1, std::min(n, M));
}

int truncation_for(double q, double tau, const SpectralKernelConfig& cfg) {
    if (cfg.M > 0) return cfg.M;
    SpectralKernelConfig probe = cfg;
    const int n = modes_per_class(tau, probe, 1 << 20);
    return std::max(default_truncation(q, 0), 2 * n + 20);
}

ModeSet mode_set(double q, double tau, int M, const SpectralKernelConfig& cfg) {
    ModeSet s;
    const int n = modes_per_class(tau, cfg, M);
    for (std::size_t c = 0; c < 4; ++c) s.cls[c] = solve_mathieu_class(kClasses[c], q, M, n);
    s.a_min = s.cls[0].values(0);
    for (std::size_t c = 0; c < 4; ++c) {
        const auto& v = s.cls[c].values;
        int keep = 0;
        while (keep < v.size() && (v(keep) - s.a_min) * tau <= cfg.mode_cutoff) ++keep;
        s.keep[c] = keep;
        if (keep > 0) s.tail = std::max(s.tail, std::exp(-(v(keep - 1) - s.a_min) * tau));
    }
    return s;
}

double mode_value(const MathieuClassSolution& s, int mode, double theta) {
    double r = 0.0;
    const bool se = is_se(s.cls);
    for (int j = 0; j < s.M; ++j) {
        const double n = class_harmonic(s.cls, j);
        r += s.coeffs(j, mode) * (se ? std::sin(n * theta) : std::cos(n * theta));
    }
    return r;
}

// Trapezoid tables cos(n_j phi_i), sin(n_j phi_i) for one class.
struct Tables {
    Eigen::MatrixXd c, s;
};

class Se2Integrand {
public:
    Se2Integrand(double tau, double theta, double x, double y, int M, const SpectralKernelConfig& cfg)
        : tau_(tau), theta_(theta), x_(x), y_(y), M_(M), cfg_(cfg) {}

    struct Value {
        double re = 0, im = 0, re_half = 0, im_half = 0, max_abs = 0;
    };

    // int_0^{2 pi} e^{i rho (x cos phi + y sin phi)} phat(theta, rho, phi) d phi
    Value operator()(double rho) const {
        const double q = 0.25 * rho * rho;
        const ModeSet ms = mode_set(q, tau_, M_, cfg_);
        int h_sig = 0;
        for (std::size_t c = 0; c < 4; ++c)
            for (int k = 0; k < ms.keep[c]; ++k)
                for (int j = M_ - 1; j >= 0; --j)
                    if (std::abs(ms.cls[c].coeffs(j, k)) > 1e-16) {
                        h_sig = std::max(h_sig, class_harmonic(kClasses[c], j));
                        break;
                    }
        const double r = std::hypot(x_, y_);
        int n_phi = cfg_.n_phi;
        if (n_phi <= 0) {
            const double need = 2.0 * (2.0 * h_sig + rho * r) + 32.0;
            n_phi = 64;
            while (n_phi < need) n_phi *= 2;
        }

        Eigen::VectorXd phat = Eigen::VectorXd::Zero(n_phi);
        for (std::size_t c = 0; c < 4; ++c) {
            const int m = ms.keep[c];
            if (m == 0) continue;
            const auto tab = tables(kClasses[c], n_phi);
            const Eigen::MatrixXd C = ms.cls[c].coeffs.leftCols(m);
            Eigen::VectorXd dc(M_), ds(M_);
            for (int j = 0; j < M_; ++j) {
                const double n = class_harmonic(kClasses[c], j);
                dc(j) = std::cos(n * theta_);
                ds(j) = std::sin(n * theta_);
            }
            const Eigen::MatrixXd Cc = dc.asDiagonal() * C, Cs = ds.asDiagonal() * C;
            Eigen::MatrixXd at_phi, at_shift;
            if (is_se(kClasses[c])) {
                at_phi = tab->s * C;
                at_shift = tab->c * Cs - tab->s * Cc;
            } else {
                at_phi = tab->c * C;
                at_shift = tab->c * Cc + tab->s * Cs;
            }
            const double sign = is_se(kClasses[c]) ? -1.0 : 1.0;
            for (int k = 0; k < m; ++k) {
                const double w = sign * std::exp((-2.0 * q - ms.cls[c].values(k)) * tau_) / kPi;
                phat += w * at_phi.col(k).cwiseProduct(at_shift.col(k));
            }
        }

        Value v;
        const double dphi = 2.0 * kPi / n_phi;
        for (int i = 0; i < n_phi; ++i) {
            const double phi = dphi * i;
            const double arg = rho * (x_ * std::cos(phi) + y_ * std::sin(phi));
            const double re = std::cos(arg) * phat(i), im = std::sin(arg) * phat(i);
            v.re += re;
            v.im += im;
            if (i % 2 == 0) {
                v.re_half += re;
                v.im_half += im;
            }
            v.max_abs = std::max(v.max_abs, std::abs(phat(i)));
        }
        v.re *= dphi;
        v.im *= dphi;
        v.re_half *= 2.0 * dphi;
        v.im_half *= 2.0 * dphi;
        return v;
    }

private:
    std::shared_ptr<const Tables> tables(MathieuClass cls, int n_phi) const {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(static_cast<int>(cls), n_phi);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        auto t = std::make_shared<Tables>();
        t->c.resize(n_phi, M_);
        t->s.resize(n_phi, M_);
        for (int i = 0; i < n_phi; ++i) {
            const double phi = 2.0 * kPi * i / n_phi;
            for (int j = 0; j < M_; ++j) {
                const double n = class_harmonic(cls, j);
                t->c(i, j) = std::cos(n * phi);
                t->s(i, j) = std::sin(n * phi);
            }
        }
        cache_.emplace(key, t);
        return t;
    }

    double tau_, theta_, x_, y_;
    int M_;
    SpectralKernelConfig cfg_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<int, int>, std::shared_ptr<const Tables>> cache_;
};

template <int N>
void gauss_nodes(std::vector<double>& x, std::vector<double>& w) {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    x.clear();
    w.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) {
            x.push_back(0.0);
            w.push_back(wt[i]);
        } else {
            x.push_back(a[i]);
            w.push_back(wt[i]);
            x.push_back(-a[i]);
            w.push_back(wt[i]);
        }
    }
}

}  // namespace

HatKernelValue se2_hat_kernel(double tau, double theta, double rho, double phi, const SpectralKernelConfig& cfg) {
    if (!(tau >= 0.0)) throw Error(ErrorKind::InvalidInput, kModule, "time must be >= 0");
    const double q = 0.25 * rho * rho;
    const int M = truncation_for(q, tau, cfg);
    const ModeSet ms = mode_set(q, tau, M, cfg);
    HatKernelValue out;
    for (std::size_t c = 0; c < 4; ++c) {
        const double sign = is_se(kClasses[c]) ? -1.0 : 1.0;
        for (int k = 0; k < ms.keep[c]; ++k) {
            const double e = std::exp((-2.0 * q - ms.cls[c].values(k)) * tau);
            out.value += sign * mode_value(ms.cls[c], k, phi) * e * mode_value(ms.cls[c], k, theta - phi);
        }
        out.modes += ms.keep[c];
    }
    out.value /= kPi;
    out.tail_bound = ms.tail;
    return out;
}

SpectralKernelResult se2_kernel(const AffineRep& rep, double t, const GroupPoint& p, const SpectralKernelConfig& cfg) {
    const Regime& r = rep.regime;
    if (r.tag != RegimeTag::DeltaNeg || std::abs(r.alpha + 1.0) > 1e-12 || r.beta != 0.0)
        throw Error(ErrorKind::RegimeMismatch, kModule, "the Mathieu series is specific to (alpha, beta) = (-1, 0)");
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidInput, kModule, "t must be positive");
    if (cfg.n_rho != 16 && cfg.n_rho != 8) throw Error(ErrorKind::InvalidInput, kModule, "n_rho must be 8 or 16");
    const double tau = cfg.time_scale * t;

    SpectralKernelResult res;
    double rho_max = cfg.rho_max > 0.0 ? cfg.rho_max : 8.0 / std::sqrt(t);
    for (int d = 0;; ++d) {
        const int M = truncation_for(0.25 * rho_max * rho_max, tau, cfg);
        const Se2Integrand f(tau, p.theta, p.x, p.y, M, cfg);
        const double tail = rho_max * f(rho_max).max_abs / (4.0 * kPi * kPi);
        if (tail <= cfg.rho_tail_tol) break;
        if (d >= cfg.max_rho_doublings) {
            res.truncation_warning = true;
            break;
        }
        rho_max *= 2.0;
    }
    res.rho_max = rho_max;

    const int M = truncation_for(0.25 * rho_max * rho_max, tau, cfg);
    const Se2Integrand f(tau, p.theta, p.x, p.y, M, cfg);
    // Panels widen with rho (the integrand only decays there) but stay short
    // against the oscillation e^{i rho |v| cos}.
    const double rv = std::hypot(p.x, p.y);
    const double w0 = std::min(2.0, 4.0 / (rv + 0.5)), w_cap = std::max(w0, 6.0 / (rv + 0.25));
    std::vector<double> edges{0.0};
    while (edges.back() < rho_max) {
        const double w = std::min(std::max(w0, 0.2 * edges.back()), w_cap);
        edges.push_back(std::min(rho_max, edges.back() + w));
    }

    std::vector<double> xf, wf, xh, wh;
    if (cfg.n_rho == 16) gauss_nodes<16>(xf, wf);
    else gauss_nodes<8>(xf, wf);
    gauss_nodes<8>(xh, wh);
    if (cfg.n_rho == 8) gauss_nodes<4>(xh, wh);

    struct Node {
        double rho, w;
        bool full;
    };
    std::vector<Node> nodes;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const double mid = 0.5 * (edges[k] + edges[k + 1]), pw = edges[k + 1] - edges[k];
        for (std::size_t i = 0; i < xf.size(); ++i) nodes.push_back({mid + 0.5 * pw * xf[i], 0.5 * pw * wf[i], true});
        for (std::size_t i = 0; i < xh.size(); ++i) nodes.push_back({mid + 0.5 * pw * xh[i], 0.5 * pw * wh[i], false});
    }
    std::vector<Se2Integrand::Value> vals(nodes.size());
    parallel_for(nodes.size(), 0, [&](std::size_t i) { vals[i] = f(nodes[i].rho); }, 4);

    std::vector<double> re, im, re_phi_half, re_rho_half;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double w = nodes[i].w * nodes[i].rho / (4.0 * kPi * kPi);
        if (nodes[i].full) {
            re.push_back(w * vals[i].re);
            im.push_back(w * vals[i].im);
            re_phi_half.push_back(w * vals[i].re_half);
        } else {
            re_rho_half.push_back(w * vals[i].re);
        }
    }
    res.value = pairwise_sum(re);
    res.imag = pairwise_sum(im);
    res.error_estimate = std::abs(res.value - pairwise_sum(re_rho_half)) + std::abs(res.value - pairwise_sum(re_phi_half));
    return res;
}

}  // namespace subheat
