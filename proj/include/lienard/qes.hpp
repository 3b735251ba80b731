#pragma once

#include "lienard/quantum.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace lienard::qes {

using quantum::Ordering;

enum class Variant { K1D, K_ISO, K3D, DELTA_ISO };

inline const char* variant_name(Variant v)
{
    switch (v) {
    case Variant::K1D: return "K1D";
    case Variant::K_ISO: return "K_ISO";
    case Variant::K3D: return "K3D";
    case Variant::DELTA_ISO: return "DELTA_ISO";
    }
    return "?";
}

inline Variant parse_variant(const std::string& s)
{
    for (Variant v : {Variant::K1D, Variant::K_ISO, Variant::K3D, Variant::DELTA_ISO})
        if (s == variant_name(v))
            return v;
    fail(Errc::DomainError, "unknown QES variant " + s);
}

/// Physical parameters. K variants use omega0, k; K_ISO adds g; DELTA_ISO uses g, lambda.
struct System {
    double omega0 = 1;
    double k = 0.1;
    double g = 0;
    double lambda = 0;
    double hbar = 1;
    Ordering ordering;
};

inline double mu_of(Variant v, const System& s)
{
    return v == Variant::DELTA_ISO ? 2 * std::sqrt(s.g) / s.hbar : s.omega0 / (s.hbar * s.k);
}

/// Index fixed by the isotonic coupling, 2l(2l - 1) = g/hbar^2 (larger root).
inline double isotonic_l(double g, double hbar = 1) { return (1 + std::sqrt(1 + 4 * g / (hbar * hbar))) / 4; }

/// l hbar = sqrt(lambda/2).
inline double delta_l(double lambda, double hbar = 1) { return std::sqrt(lambda / 2) / hbar; }

namespace detail {

// Phi'' + 4k a1 (x/u) Phi' + [4kA/u + 4k(B0 + E/(2k hbar^2))/u^2 - mu^2 k^2 x^2/u^4 - L/x^2] Phi = 0,
// solved by exp(-mu z/2) u^{n-e} (k x^2)^p prod(z - z_i), z = kx^2/u, a1 = 1 + e, L = 2p(2p-1).
struct ZForm {
    double e = 0, p = 0, L = 0;
};

inline ZForm zform(Variant v, double l, const Ordering& o)
{
    switch (v) {
    case Variant::K1D: return {o.alpha - o.gamma, l, 0.0};
    case Variant::K_ISO: return {0.0, l, 2 * l * (2 * l - 1)};
    case Variant::K3D: return {o.alpha - o.gamma, (l + 1) / 2, l * (l + 1)};
    default: fail(Errc::DomainError, "not a z-variable system");
    }
}

inline double single_kappa(const Ordering& o)
{
    auto s = quantum::detail::single_of(o);
    return s.alpha1 - s.gamma1 + 1;
}

// Root equations: z-variants  sum 2/(z_i - z_j) + q(z_i)/(z_i(1 - z_i)),
// q = mu z^2 + (2n - mu) z + 2p + 1/2; DELTA_ISO  sum 2/(y_i - y_j) + (1 + 2l - kappa y + mu y^2)/y_i
// plus mu sum y + (n + 2l)(g1 - a1 + 1).
struct Equations {
    Variant v;
    int n;
    double l, mu, p, kappa;

    int rows() const { return v == Variant::DELTA_ISO ? n + 1 : n; }

    void eval(const Eigen::VectorXd& z, Eigen::VectorXd& F, Eigen::MatrixXd& J) const
    {
        F.setZero(rows());
        J.setZero(rows(), n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (j == i)
                    continue;
                double d = z(i) - z(j);
                F(i) += 2 / d;
                J(i, i) -= 2 / (d * d);
                J(i, j) += 2 / (d * d);
            }
            double x = z(i);
            if (v == Variant::DELTA_ISO) {
                double q = 1 + 2 * l - kappa * x + mu * x * x;
                F(i) += q / x;
                J(i, i) += (-kappa + 2 * mu * x) / x - q / (x * x);
            } else {
                double q = mu * x * x + (2 * n - mu) * x + 2 * p + 0.5;
                double dq = 2 * mu * x + 2 * n - mu;
                double w = x * (1 - x), dw = 1 - 2 * x;
                F(i) += q / w;
                J(i, i) += (dq * w - q * dw) / (w * w);
            }
        }
        if (v == Variant::DELTA_ISO) {
            F(n) = mu * z.sum() + (n + 2 * l) * (2 - kappa);
            for (int j = 0; j < n; ++j)
                J(n, j) = mu;
        }
    }
};

inline Equations equations(Variant v, int n, double l, double mu, const Ordering& o)
{
    Equations eq{v, n, l, mu, 0.0, 0.0};
    if (v == Variant::DELTA_ISO)
        eq.kappa = single_kappa(o);
    else
        eq.p = zform(v, l, o).p;
    return eq;
}

inline bool admissible(Variant v, const std::vector<double>& r)
{
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!std::isfinite(r[i]))
            return false;
        if (v != Variant::DELTA_ISO && !(r[i] > 0 && r[i] < 1))
            return false;
        if (v == Variant::DELTA_ISO && r[i] == 0)
            return false;
    }
    return true;
}

inline double min_gap(std::vector<double> r)
{
    std::sort(r.begin(), r.end());
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < r.size(); ++i)
        g = std::min(g, r[i] - r[i - 1]);
    return g;
}

}

inline constexpr int kStarts = 32;
inline constexpr double kRootTol = 1e-12;

struct RootSet {
    std::vector<double> roots;  // increasing
    double residual = 0;
    bool converged = false;
};

struct RootSearch {
    std::vector<RootSet> solutions;  // distinct converged root sets
    RootSet best;                    // smallest residual over all starts
    int starts = kStarts;
    int converged = 0;
    double converged_fraction() const { return double(converged) / starts; }
};

inline double bethe_residual(Variant v, int n, double l, double mu, const Ordering& o, const std::vector<double>& roots)
{
    if (int(roots.size()) != n)
        fail(Errc::DomainError, "root count differs from n");
    if (n == 0 && v != Variant::DELTA_ISO)
        return 0;
    auto eq = detail::equations(v, n, l, mu, o);
    Eigen::VectorXd z(n), F;
    Eigen::MatrixXd J;
    for (int i = 0; i < n; ++i)
        z(i) = roots[i];
    eq.eval(z, F, J);
    return F.size() ? F.cwiseAbs().maxCoeff() : 0.0;
}

/// Multi-start damped Newton (Gauss-Newton for the overdetermined DELTA_ISO system)
/// from 32 deterministic starts built on Chebyshev points of (0, 1).
inline RootSearch bethe_search(Variant v, int n, double l, double mu, const Ordering& o)
{
    if (n < 0)
        fail(Errc::DomainError, "n must be non-negative");
    if (!(mu > 0))
        fail(Errc::DomainError, "mu must be positive");
    RootSearch out;
    if (n == 0) {
        RootSet empty{{}, bethe_residual(v, 0, l, mu, o, {}), true};
        empty.converged = empty.residual < 1e-10;
        out.best = empty;
        if (empty.converged) {
            out.solutions.push_back(empty);
            out.converged = out.starts;
        }
        return out;
    }
    auto eq = detail::equations(v, n, l, mu, o);
    const double span = 2 * (1 + 2 * l + n) / mu;
    out.best.residual = std::numeric_limits<double>::infinity();
    for (int s = 0; s < kStarts; ++s) {
        double a = std::pow(4.0, (s - 15.5) / 15.5);
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) {
            double t = std::pow(0.5 * (1 - std::cos(M_PI * (2 * i + 1) / (2.0 * n))), a);
            z(i) = v == Variant::DELTA_ISO ? span * (2 * t - 1) + 1e-3 * (i + 1) : t;
        }
        Eigen::VectorXd F, Ft;
        Eigen::MatrixXd J, Jt;
        eq.eval(z, F, J);
        double r = F.cwiseAbs().maxCoeff();
        for (int it = 0; it < 200 && r > 0.1 * kRootTol; ++it) {
            Eigen::VectorXd dz = v == Variant::DELTA_ISO ? Eigen::VectorXd(J.colPivHouseholderQr().solve(-F))
                                                         : Eigen::VectorXd(J.partialPivLu().solve(-F));
            if (!dz.allFinite())
                break;
            // z-variants: largest step keeping the roots in (0, 1); DELTA_ISO: monotone
            // decrease of the least-squares norm.
            double t = 1;
            bool moved = false;
            while (t > 1e-8) {
                Eigen::VectorXd zt = z + t * dz;
                std::vector<double> rv(zt.data(), zt.data() + n);
                if (detail::admissible(v, rv)) {
                    eq.eval(zt, Ft, Jt);
                    bool accept = Ft.allFinite() && (v != Variant::DELTA_ISO || Ft.norm() < F.norm());
                    if (accept) {
                        z = zt;
                        F = Ft;
                        J = Jt;
                        moved = true;
                        break;
                    }
                }
                t /= 2;
            }
            r = F.cwiseAbs().maxCoeff();
            if (!moved)
                break;
        }
        std::vector<double> roots(z.data(), z.data() + n);
        std::sort(roots.begin(), roots.end());
        bool ok = detail::admissible(v, roots) && detail::min_gap(roots) > 1e-10;
        RootSet rs{roots, r, ok && r < kRootTol};
        if (ok && r < out.best.residual)
            out.best = rs;
        if (!rs.converged)
            continue;
        ++out.converged;
        bool seen = false;
        for (const auto& e : out.solutions) {
            double d = 0;
            for (int i = 0; i < n; ++i)
                d = std::max(d, std::abs(e.roots[i] - roots[i]));
            seen = seen || d < 1e-8;
        }
        if (!seen)
            out.solutions.push_back(rs);
    }
    return out;
}

/// A converged root set (the one with the largest root sum, i.e. the lowest K-variant energy).
inline RootSet bethe_roots(Variant v, int n, double l, double mu, const Ordering& o)
{
    auto s = bethe_search(v, n, l, mu, o);
    if (s.solutions.empty()) {
        if (s.best.residual < INFINITY && !s.best.roots.empty() && detail::min_gap(s.best.roots) <= 1e-10)
            fail(Errc::DegenerateRoots, "roots collide");
        fail(Errc::NoConvergence, "no start converged (best residual " + std::to_string(s.best.residual) + ")");
    }
    auto sum = [](const RootSet& r) {
        double t = 0;
        for (double z : r.roots)
            t += z;
        return t;
    };
    return *std::max_element(s.solutions.begin(), s.solutions.end(), [&](const RootSet& a, const RootSet& b) { return sum(a) < sum(b); });
}

// ---------------------------------------------------------------- energies

struct EnergyResult {
    double energy = 0;
    double sigma = 0;         // from the root consistency relation
    double sigma_energy = 0;  // from inverting the energy expression
    double sigma_printed = 0; // the consistency relation as printed
    double energy_printed = 0;
    Ordering ordering;        // ordering implied by sigma
};

/// Energy and the ordering constraint it implies. sigma is sigma1 for K1D/K3D, eta1
/// for K_ISO, and (g1 - a1 + 1) for DELTA_ISO.
inline EnergyResult qes_energy(Variant v, int n, double l, const std::vector<double>& roots, const System& sys, bool strict = true)
{
    const double hb = sys.hbar, h2 = hb * hb;
    const double mu = mu_of(v, sys);
    double S1 = 0, S2 = 0;
    for (double z : roots) {
        S1 += z;
        S2 += z * z;
    }
    EnergyResult r;
    r.ordering = sys.ordering;
    const Ordering& o = sys.ordering;
    if (v == Variant::DELTA_ISO) {
        auto st = quantum::detail::single_of(o);
        double kap = st.gamma1 - st.alpha1 + 1;
        r.sigma_energy = kap;
        r.sigma = n + 2 * l > 0 ? -mu * S1 / (n + 2 * l) : kap;
        r.sigma_printed = r.sigma;
        r.energy = (n + 2) * hb * std::sqrt(sys.g) / 2 + std::sqrt(sys.g * sys.lambda / 2) + (st.alpha1 * st.gamma1 + st.gamma1 / 2) * h2;
        r.energy_printed = r.energy;
    } else {
        auto z = detail::zform(v, l, o);
        const double k = sys.k, e = z.e, p = z.p, ep = -e;
        const double w0 = sys.omega0;
        // Regular solution requires A = mu S2 + (2 - mu) S1 - 2n - 2p + e(e + 3/2), B = mu(n + p + 1/4) - mu S1 - e - e^2.
        double A = mu * S2 + (2 - mu) * S1 - 2 * n - 2 * p + e * (e + 1.5);
        double B = mu * (n + p + 0.25) - mu * S1 - e - e * e;
        switch (v) {
        case Variant::K1D: {
            r.sigma = A;
            r.energy = 2 * k * h2 * (B + r.sigma + o.gamma);
            r.sigma_energy = (r.energy - (2 * n + 2 * l + 0.5) * hb * w0) / (2 * h2 * k) - o.gamma + ep * (ep - 1) + mu * S1;
            r.sigma_printed = mu * S2 + (2 - mu) * S1 - n * n - 2 * l + ep * (ep - 1.5);
            r.energy_printed = (2 * n + 2 * l + 0.5) * hb * w0 + (r.sigma_printed + o.gamma - ep * (ep - 1) - mu * S1) * 2 * h2 * k;
            r.ordering.alphagamma = -(r.sigma + 3 * o.gamma) / 4;
            break;
        }
        case Variant::K3D: {
            // sqrt(m) l(l+1)/r^2 = l(l+1)[1/r^2 - k/u] puts +l(l+1)k/u into the 1/u coefficient.
            double ll = l * (l + 1);
            r.sigma = A - ll / 4;
            r.energy = 2 * k * h2 * (B + r.sigma + o.gamma);
            double s = (l + 1) / 2;
            r.sigma_energy = (r.energy - (2 * n + 2 * s + 0.5) * hb * w0) / (2 * h2 * k) + mu * S1 - o.gamma + ep * (ep - 1);
            r.sigma_printed = mu * S2 + (2 - mu) * S1 - 2.0 * n * n - 2 * s - ll / 4 + ep * (ep - 1.5);
            r.energy_printed = (2 * n + 2 * s + 0.5) * hb * w0 + (-mu * S1 + o.gamma - ep * (ep - 1) + r.sigma_printed) * 2 * h2 * k;
            r.ordering.alphagamma = -(r.sigma + 3 * o.gamma) / 4;
            break;
        }
        case Variant::K_ISO: {
            // Hermitian operator with g/(2x^2) = (g/2)[1/x^2 - k/u - k/u^2]:
            // A = eta1/2 + g/(4 hbar^2), B0 = eta2 + g/(4 hbar^2), eta2 = -(abar + gbar + eta1)/2.
            double s = o.alpha + o.gamma, gq = sys.g / (4 * h2);
            r.sigma = 2 * (A - gq);
            double eta2 = -(s + r.sigma) / 2;
            r.energy = 2 * k * h2 * (B - eta2 - gq);
            double eta2_e = -(r.energy - (2 * n + 2 * p + 0.5) * hb * w0) / (2 * h2 * k) - mu * S1 - gq;
            r.sigma_energy = -2 * eta2_e - s;
            // Printed: mu S2 + (2 - mu) S1 - n(n - 2l + 3/2) + eta_bar = 0, eta_bar = eta1/2 + d(d + 3/2) + 2l(d + 1), d = n.
            double eta_bar = -(mu * S2 + (2 - mu) * S1 - n * (n - 2 * l + 1.5));
            r.sigma_printed = 2 * (eta_bar - n * (n + 1.5) - 2 * l * (n + 1));
            double eta2_p = -(s + r.sigma_printed) / 2;
            r.energy_printed = (2 * n + 2 * l + 0.5) * hb * w0 + (-mu * S1 - 2 * eta2_p + sys.g * k / 2) * 2 * h2 * k;
            double c = (-3 * s - r.sigma) / 8;
            r.ordering.alphagamma = c - 0.25 * (o.gamma - o.alpha) * (o.gamma - o.alpha);
            break;
        }
        default: break;
        }
    }
    if (strict && std::abs(r.sigma - r.sigma_energy) > 1e-10)
        fail(Errc::InconsistentSigma, "sigma from roots " + std::to_string(r.sigma) + " vs energy " + std::to_string(r.sigma_energy));
    return r;
}

// ---------------------------------------------------------------- eigenfunctions

/// Unnormalized eigenfunction in the form printed for each variant: K1D in the
/// non-Hermitian ordering, K_ISO in the Hermitian ordering, K3D as chi = r R(r),
/// DELTA_ISO with y = 1/(sqrt(2) x) and the product raised to the power n.
inline double qes_wavefunction(Variant v, int n, double l, const std::vector<double>& roots, double x, const System& sys)
{
    const Ordering& o = sys.ordering;
    if (v == Variant::DELTA_ISO) {
        if (!(x > 0))
            fail(Errc::DomainError, "DELTA_ISO lives on x > 0");
        double mu = mu_of(v, sys);
        double y = 1 / (std::sqrt(2.0) * x);
        double prod = 1;
        for (double yi : roots)
            prod *= std::pow(y - yi, n);
        return std::exp(-mu / (4 * x * x)) * std::pow(y, l) * prod;
    }
    const double k = sys.k;
    const double u = 1 + k * x * x;
    if (!(u > 0))
        fail(Errc::DomainError, "outside 1 + k x^2 > 0");
    const double z = k * x * x / u;
    double prod = 1;
    for (double zi : roots)
        prod *= z - zi;
    double env = std::exp(-sys.omega0 * x * x / (2 * sys.hbar * u));
    double ep = o.gamma - o.alpha;
    switch (v) {
    case Variant::K1D: return env * std::pow(u, n + ep) * std::pow(std::abs(k) * x * x, l) * prod;
    case Variant::K_ISO:
        if (!(x > 0))
            fail(Errc::DomainError, "K_ISO lives on x > 0");
        return env * std::pow(x, 2 * l) * std::pow(u, n) * prod;
    case Variant::K3D:
        if (!(x > 0))
            fail(Errc::DomainError, "radial coordinate must be positive");
        return x * env * std::pow(std::abs(k) * x * x, l / 2) * std::pow(u, n + ep) * prod;
    default: return 0;
    }
}

/// Eigen-operator of each variant: L psi = E psi.
inline quantum::OdeSpec qes_ode(Variant v, double l, const System& sys, const EnergyResult& en)
{
    using quantum::cplx;
    const double h2 = sys.hbar * sys.hbar;
    if (v == Variant::DELTA_ISO) {
        // x^2 times: psi'' + (1 - g1 + a1)(2/x) psi' + [-4 lam/h^2 + (4E/h^2 - 2 g1 - 4 a1 g1)/x^2 - 2g/(h^2 x^4)] psi = 0.
        auto st = quantum::detail::single_of(sys.ordering);
        double lam = sys.lambda, g = sys.g;
        return {[h2](double x) { return cplx(-h2 * x * x / 4); },
            [h2, st](double x) { return cplx(-h2 * x * x / 4 * (1 - st.gamma1 + st.alpha1) * 2 / x); },
            [h2, st, lam, g](double x) {
                double c = -4 * lam / h2 + (-2 * st.gamma1 - 4 * st.alpha1 * st.gamma1) / (x * x) - 2 * g / (h2 * x * x * x * x);
                return cplx(-h2 * x * x / 4 * c);
            }};
    }
    const Ordering& o = en.ordering;
    auto z = detail::zform(v, l, o);
    const double k = sys.k, mu = mu_of(v, sys);
    double A = 0, B0 = 0;
    switch (v) {
    case Variant::K1D: A = en.sigma, B0 = -en.sigma - o.gamma; break;
    case Variant::K3D: A = en.sigma + l * (l + 1) / 4, B0 = -en.sigma - o.gamma; break;
    case Variant::K_ISO: A = en.sigma / 2 + sys.g / (4 * h2), B0 = sys.g / (4 * h2) - (o.alpha + o.gamma + en.sigma) / 2; break;
    default: break;
    }
    // K_ISO takes the 1/x^2 strength from g itself, so an index l inconsistent with g shows up in the residual.
    const double a1 = 1 + z.e, L = v == Variant::K_ISO ? sys.g / h2 : z.L;
    auto pre = [h2, k](double x) {
        double u = 1 + k * x * x;
        return -h2 * u * u / 2;
    };
    return {[pre](double x) { return cplx(pre(x)); },
        [pre, k, a1](double x) { return cplx(pre(x) * 4 * k * a1 * x / (1 + k * x * x)); },
        [pre, k, A, B0, mu, L](double x) {
            double u = 1 + k * x * x;
            double c = 4 * k * A / u + 4 * k * B0 / (u * u) - mu * mu * k * k * x * x / (u * u * u * u);
            if (L != 0)
                c -= L / (x * x);
            return cplx(pre(x) * c);
        }};
}

// ---------------------------------------------------------------- solutions

struct BetheSolution {
    Variant variant = Variant::K1D;
    int n = 0;
    double l = 0;
    double mu = 0;
    std::vector<double> roots;
    double sigma = 0;
    double sigma_energy = 0;
    double sigma_printed = 0;
    double energy = 0;
    double energy_printed = 0;
    double root_residual = 0;
    double ode_residual = 0;
    double converged_fraction = 0;
    bool converged = false;
    int nodes = 0;
    Ordering ordering;
};

struct Validation {
    double root_residual = 0;
    double ode_residual = 0;
    int nodes = 0;
};

/// Sampling window in x: z in [1e-3, 0.9] for the k-systems, the bulk of
/// exp(-mu y^2/2) for DELTA_ISO.
inline std::pair<double, double> residual_window(Variant v, const System& sys)
{
    if (v == Variant::DELTA_ISO) {
        double mu = mu_of(v, sys);
        double ymax = std::sqrt(2 * 30 / mu);
        return {1 / (std::sqrt(2.0) * ymax), 1 / (std::sqrt(2.0) * 0.05)};
    }
    const double k = sys.k;
    if (k < 0) {
        double R = 1 / std::sqrt(-k);
        return {1e-3 * R, (1 - 1e-3) * R};
    }
    auto xz = [k](double z) { return std::sqrt(z / (k * (1 - z))); };
    return {xz(1e-3), xz(0.9)};
}

inline int count_nodes_positive(Variant v, int n, double l, const std::vector<double>& roots, const System& sys)
{
    // Sample uniformly in z (or y) so nodes near the ends are resolved.
    const int M = 20000;
    std::vector<double> psi;
    psi.reserve(M);
    for (int i = 1; i < M; ++i) {
        double t = double(i) / M, x;
        if (v == Variant::DELTA_ISO)
            x = 1 / (std::sqrt(2.0) * (t * 20 / std::sqrt(mu_of(v, sys))));
        else if (sys.k > 0)
            x = std::sqrt(t / (sys.k * (1 - t)));
        else
            x = t / std::sqrt(-sys.k);
        psi.push_back(qes_wavefunction(v, n, l, roots, x, sys));
    }
    // The envelope is positive but may grow without bound as z -> 1, so a threshold
    // relative to the peak would hide interior nodes; count raw sign changes instead.
    int nodes = 0, last = 0;
    for (double f : psi) {
        if (f == 0 || !std::isfinite(f))
            continue;
        int sg = f > 0 ? 1 : -1;
        nodes += last != 0 && sg != last;
        last = sg;
    }
    return nodes;
}

inline Validation qes_validate(Variant v, const BetheSolution& s, const System& sys, int samples = 4001)
{
    Validation out;
    out.root_residual = bethe_residual(v, s.n, s.l, s.mu, sys.ordering, s.roots);
    EnergyResult en;
    en.sigma = s.sigma;
    en.ordering = s.ordering;
    auto ode = qes_ode(v, s.l, sys, en);
    auto [lo, hi] = residual_window(v, sys);
    auto psi = quantum::sample([&](double x) { return qes_wavefunction(v, s.n, s.l, s.roots, x, sys); }, lo, hi, samples);
    out.ode_residual = quantum::eigenfunction_residual(ode, lo, hi, psi, s.energy);
    out.nodes = count_nodes_positive(v, s.n, s.l, s.roots, sys);
    return out;
}

/// Roots, energy, sigma and residuals for one (variant, n, l). Among several
/// converged root sets the lowest energy is kept; DELTA_ISO keeps its best
/// least-squares candidate even when it does not converge.
inline BetheSolution solve(Variant v, int n, double l, const System& sys)
{
    BetheSolution s;
    s.variant = v;
    s.n = n;
    s.l = l;
    s.mu = mu_of(v, sys);
    auto search = bethe_search(v, n, l, s.mu, sys.ordering);
    s.converged_fraction = search.converged_fraction();
    if (search.solutions.empty()) {
        if (v != Variant::DELTA_ISO || search.best.roots.size() != std::size_t(n))
            fail(Errc::NoConvergence, std::string(variant_name(v)) + " n = " + std::to_string(n));
        s.roots = search.best.roots;
        s.converged = false;
    } else {
        double bestE = INFINITY;
        for (const auto& rs : search.solutions) {
            double E = qes_energy(v, n, l, rs.roots, sys, false).energy;
            if (E < bestE) {
                bestE = E;
                s.roots = rs.roots;
            }
        }
        s.converged = true;
    }
    auto en = qes_energy(v, n, l, s.roots, sys, false);
    s.sigma = en.sigma;
    s.sigma_energy = en.sigma_energy;
    s.sigma_printed = en.sigma_printed;
    s.energy = en.energy;
    s.energy_printed = en.energy_printed;
    s.ordering = en.ordering;
    auto val = qes_validate(v, s, sys);
    s.root_residual = val.root_residual;
    s.ode_residual = val.ode_residual;
    s.nodes = val.nodes;
    return s;
}

inline nlohmann::json to_json(const BetheSolution& s)
{
    return {{"variant", variant_name(s.variant)}, {"n", s.n}, {"l", s.l}, {"mu", s.mu}, {"roots", s.roots}, {"sigma", s.sigma},
        {"sigma_energy", s.sigma_energy}, {"sigma_printed", s.sigma_printed}, {"energy", s.energy},
        {"energy_printed", s.energy_printed}, {"root_residual", s.root_residual}, {"ode_residual", s.ode_residual},
        {"converged_fraction", s.converged_fraction}, {"converged", s.converged}, {"nodes", s.nodes},
        {"ordering", {{"alpha", s.ordering.alpha}, {"gamma", s.ordering.gamma}, {"alphagamma", s.ordering.alphagamma}}}};
}

// ---------------------------------------------------------------- k < 0

struct Boundedness {
    double peak = 0;      // max |phi| inside (-1/sqrt|k|, 1/sqrt|k|)
    double boundary = 0;  // |phi| at 0.999 of the boundary
    bool finite = true;
};

/// Ground state of the non-Hermitian ordered isotonic form with k < 0:
/// exp(-w0 x^2/(2 hbar u)) x^{2l} u^{N + gbar - abar}, checked on the open interval.
inline Boundedness kneg_boundedness(const System& sys, double l, int N)
{
    if (!(sys.k < 0))
        fail(Errc::DomainError, "needs k < 0");
    const double R = 1 / std::sqrt(-sys.k);
    const double ex = N + sys.ordering.gamma - sys.ordering.alpha;
    auto phi = [&](double x) {
        double u = 1 + sys.k * x * x;
        return std::exp(-sys.omega0 * x * x / (2 * sys.hbar * u)) * std::pow(std::abs(x), 2 * l) * std::pow(u, ex);
    };
    Boundedness b;
    for (int i = 1; i < 4000; ++i) {
        double v = phi(R * i / 4000.0);
        if (!std::isfinite(v))
            b.finite = false;
        else
            b.peak = std::max(b.peak, std::abs(v));
    }
    b.boundary = std::abs(phi(0.999 * R));
    return b;
}

}
