#pragma once

#include "lienard/catalog.hpp"
#include "lienard/ode.hpp"
#include "lienard/specfun.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lienard::quantum {

using cplx = std::complex<double>;

// ---------------------------------------------------------------- ordering

struct SingleTerm {
    double alpha1, beta1, gamma1;
};

/// Weighted means of the ordering exponents; beta follows from -beta = 1 + alpha + gamma.
struct Ordering {
    double alpha = 0;
    double gamma = 0;
    double alphagamma = 0;
    std::optional<SingleTerm> single;
};

inline void validate(const Ordering& o)
{
    if (!std::isfinite(o.alpha) || !std::isfinite(o.gamma) || !std::isfinite(o.alphagamma))
        fail(Errc::DomainError, "ordering parameters must be finite");
    if (o.single) {
        const auto& s = *o.single;
        if (std::abs(s.alpha1 + s.beta1 + s.gamma1 + 1) > 1e-12)
            fail(Errc::DomainError, "single-term ordering needs alpha1 + beta1 + gamma1 = -1");
    }
}

/// m^a1 p m^b1 p m^g1 with b1 = -1 - a1 - g1.
inline Ordering single_term(double a1, double g1)
{
    Ordering o{a1, g1, a1 * g1, SingleTerm{a1, -1 - a1 - g1, g1}};
    validate(o);
    return o;
}

inline double beta_bar(const Ordering& o) { return -1 - o.alpha - o.gamma; }

/// alpha-gamma + (gamma - alpha)^2/4, the coefficient of (1/m)'^2 m.
inline double ordering_c(const Ordering& o) { return o.alphagamma + 0.25 * (o.gamma - o.alpha) * (o.gamma - o.alpha); }

inline double eta1(const Ordering& o)
{
    double s = o.alpha + o.gamma;
    return 5 * s - 8 * (ordering_c(o) + s);
}

inline double eta2(const Ordering& o)
{
    double s = o.alpha + o.gamma;
    return -3 * s + 4 * (ordering_c(o) + s);
}

// ---------------------------------------------------------------- operator

/// f = 1/m with derivatives from the analytic mass derivatives.
inline D2 inverse_mass(const Model& m, double x)
{
    D2 M = m.mass(x);
    double m2 = M.v * M.v;
    return {1 / M.v, -M.d1 / m2, -M.d2 / m2 + 2 * M.d1 * M.d1 / (m2 * M.v)};
}

inline void require_position_space(const Model& m)
{
    if (m.lienard_type == 2)
        fail(Errc::DomainError, "the MEE quantum problem lives in momentum space; use the MEE solvers");
}

/// V + (hbar^2/2)[((a+g)/2)(1/m)'' + c ((1/m)')^2 m], plus hbar^2 l(l+1)/(2h(r)) for radial problems.
inline double effective_potential(const Model& m, const Ordering& o, double x, double hbar = 1, int l = 0)
{
    require_position_space(m);
    D2 f = inverse_mass(m, x);
    double W = m.potential(x).v
        + hbar * hbar / 2 * ((o.alpha + o.gamma) / 2 * f.d2 + ordering_c(o) * f.d1 * f.d1 * m.mass(x).v);
    if (l != 0) {
        if (!m.ang_metric)
            fail(Errc::DomainError, "angular momentum needs a 3D model");
        W += hbar * hbar * l * (l + 1) / (2 * m.ang_metric(x).v);
    }
    if (!std::isfinite(W))
        fail(Errc::NonFinite, "effective potential at x = " + std::to_string(x));
    return W;
}

/// -(hbar^2/2) (f psi')' + W psi.
struct Operator {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> W;
    double hbar = 1;
};

inline Operator hermitian_operator(const Model& m, const Ordering& o, double hbar = 1, int l = 0)
{
    require_position_space(m);
    validate(o);
    if (l < 0)
        fail(Errc::DomainError, "l must be non-negative");
    if (l > 0 && !is_3d(m.name))
        fail(Errc::DomainError, "angular momentum needs a 3D model");
    Operator op;
    op.hbar = hbar;
    op.f = [m](double x) { return 1 / m.mass(x).v; };
    op.df = [m](double x) { return inverse_mass(m, x).d1; };
    op.W = [m, o, hbar, l](double x) { return effective_potential(m, o, x, hbar, l); };
    return op;
}

// ---------------------------------------------------------------- residuals

/// a2 psi'' + a1 psi' + a0 psi, coefficients possibly complex.
struct OdeSpec {
    std::function<cplx(double)> a2, a1, a0;
};

inline OdeSpec hermitian_ode(const Operator& op)
{
    double h2 = op.hbar * op.hbar;
    return {[op, h2](double x) { return cplx(-h2 / 2 * op.f(x)); }, [op, h2](double x) { return cplx(-h2 / 2 * op.df(x)); },
        [op](double x) { return cplx(op.W(x)); }};
}

struct Residual {
    double value = 0;
    double real_part = 0;
    double imag_part = 0;
};

inline std::vector<double> uniform_grid(double lo, double hi, int n)
{
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i)
        x[i] = lo + (hi - lo) * i / (n - 1);
    return x;
}

/// sup |L psi - E psi| / max |E psi| on a uniform grid over [lo, hi] (psi[0] at lo,
/// psi[n-1] at hi). Derivatives use 9-point central stencils; 1% of the points at
/// each end are skipped.
inline Residual eigenfunction_residual(const OdeSpec& ode, double lo, double hi, const std::vector<cplx>& psi, cplx E)
{
    const int n = int(psi.size());
    if (n < 2000)
        fail(Errc::GridTooCoarse, "need at least 2000 samples, got " + std::to_string(n));
    static constexpr double c1[5] = {0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
    static constexpr double c2[5] = {-205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
    const double h = (hi - lo) / (n - 1);
    const int skip = std::max(4, n / 100);
    double scale = 0;
    for (int i = skip; i < n - skip; ++i)
        scale = std::max(scale, std::abs(E * psi[i]));
    if (scale == 0)
        for (int i = skip; i < n - skip; ++i)
            scale = std::max(scale, std::abs(psi[i]));
    Residual r;
    for (int i = skip; i < n - skip; ++i) {
        cplx d1 = 0, d2 = c2[0] * psi[i];
        for (int k = 1; k <= 4; ++k) {
            d1 += c1[k] * (psi[i + k] - psi[i - k]);
            d2 += c2[k] * (psi[i + k] + psi[i - k]);
        }
        d1 /= h;
        d2 /= h * h;
        double x = lo + h * i;
        cplx res = ode.a2(x) * d2 + ode.a1(x) * d1 + ode.a0(x) * psi[i] - E * psi[i];
        r.value = std::max(r.value, std::abs(res) / scale);
        r.real_part = std::max(r.real_part, std::abs(res.real()) / scale);
        r.imag_part = std::max(r.imag_part, std::abs(res.imag()) / scale);
    }
    return r;
}

inline double eigenfunction_residual(const OdeSpec& ode, double lo, double hi, const std::vector<double>& psi, double E)
{
    std::vector<cplx> c(psi.begin(), psi.end());
    return eigenfunction_residual(ode, lo, hi, c, cplx(E)).value;
}

template <class F>
auto sample(const F& fn, double lo, double hi, int n)
{
    using T = decltype(fn(lo));
    std::vector<T> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = fn(lo + (hi - lo) * i / (n - 1));
    return out;
}

// ---------------------------------------------------------------- windows

struct Window {
    double lo, hi;
};

namespace detail {

/// Y such that exp(-beta Y^2/2) (1 + 2 sqrt(beta) Y)^n < tol.
inline double gauss_extent(double beta, int n, double tol = 1e-12)
{
    double t = 0;
    while (-t * t / 2 + n * std::log1p(2 * t) > std::log(tol))
        t += 0.01;
    return t / std::sqrt(beta);
}

/// Interval carrying the spectrum: the one with positive points when the domain splits.
inline const Interval& spectral_interval(const Model& m)
{
    if (m.domain.empty())
        fail(Errc::DomainError, "model without domain");
    return m.domain.back();
}

inline double safe_W(const Operator& op, double x)
{
    try {
        double w = op.W(x);
        return std::isfinite(w) ? w : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
}

// Walks outward from c until the WKB action above E* reaches `target` (decay ~ e^-target).
inline double march(const Operator& op, double c, double dir, double sigma, double Estar, double target = 36)
{
    double x = c, S = 0;
    const double cap = 1e4 * sigma;
    for (;;) {
        double h = std::max(sigma / 20, 0.01 * std::abs(x - c));
        double xn = x + dir * h;
        if (std::abs(xn - c) > cap)
            return xn;
        double xm = 0.5 * (x + xn);
        double w = safe_W(op, xm);
        double f = op.f(xm);
        if (!std::isfinite(w) || !std::isfinite(f) || f <= 0)
            return x;
        if (w > Estar)
            S += std::sqrt(2 * (w - Estar) / f) / op.hbar * h;
        x = xn;
        if (S >= target)
            return x;
    }
}

inline Window wkb_window(const Model& m, const Operator& op, const Interval& iv, int count)
{
    std::vector<double> probes;
    if (iv.contains(0))
        probes.push_back(0);
    for (int j = -100; j <= 60; ++j)
        for (double s : {-1.0, 1.0}) {
            double x = s * std::pow(10.0, j / 20.0);
            if (iv.contains(x))
                probes.push_back(x);
        }
    if (std::isfinite(iv.lo) && std::isfinite(iv.hi))
        for (int j = 1; j < 200; ++j)
            probes.push_back(iv.lo + (iv.hi - iv.lo) * j / 200);
    double c = NAN, wc = std::numeric_limits<double>::infinity();
    for (double x : probes) {
        double w = safe_W(op, x);
        if (w < wc) {
            wc = w;
            c = x;
        }
    }
    if (!std::isfinite(wc))
        fail(Errc::DomainError, std::string("no finite effective potential for ") + model_name(m.name));
    double hc = 1e-3 * std::max(1.0, std::abs(c));
    double wpp = (safe_W(op, c + hc) - 2 * wc + safe_W(op, c - hc)) / (hc * hc);
    double f = op.f(c);
    double omega = (std::isfinite(wpp) && wpp > 0) ? std::sqrt(f * wpp) : 1.0;
    double sigma = std::sqrt(op.hbar * f / omega);
    double Estar = wc + (2.0 * count + 2) * op.hbar * omega;
    Window w{iv.lo, iv.hi};
    if (!std::isfinite(iv.lo))
        w.lo = march(op, c, -1, sigma, Estar);
    if (!std::isfinite(iv.hi))
        w.hi = march(op, c, 1, sigma, Estar);
    return w;
}

}

/// Truncation window: finite ends are kept (Dirichlet there); infinite ends are cut
/// where the envelope of the highest requested state falls below ~1e-12.
inline Window default_window(const Model& m, const Ordering& o, int count, double hbar = 1, int l = 0)
{
    using detail::gauss_extent;
    const Interval& iv = detail::spectral_interval(m);
    auto P = [&](const char* k) { return m.params.at(k); };
    switch (m.name) {
    case ModelName::EXPONENTIAL: {
        // Gaussian in y = e^{lambda x} - 1 with exponent omega0 y^2/(2 hbar).
        double w0 = P("omega0"), lam = P("lambda");
        double Y = gauss_extent(w0 / hbar, count + 1);
        double a = std::log1p(std::max(-Y, -0.99)) / lam, b = std::log1p(Y) / lam;
        return {std::min(a, b), std::max(a, b)};
    }
    case ModelName::INVERSE: {
        // Gaussian in y = x/(1 + lambda x); x = y/(1 - lambda y).
        double w0 = P("omega0"), lam = P("lambda");
        double Y = gauss_extent(w0 / hbar, count + 1);
        double ylo = -Y, yhi = Y;
        if (lam > 0)
            yhi = std::min(Y, (1 - 1e-3) / lam);
        else if (lam < 0)
            ylo = std::max(-Y, (1 - 1e-3) / lam);
        return {ylo / (1 - lam * ylo), yhi / (1 - lam * yhi)};
    }
    case ModelName::MLO:
    case ModelName::MLO_ISOTONIC:
    case ModelName::MLO_3D: {
        double lam = P("lambda");
        if (lam > 0) {
            // Bound states decay as a power x^-(mu - N) with N the effective n + 1/2.
            double mu = P("omega0") / (hbar * lam);
            double N = m.name == ModelName::MLO ? count - 0.5
                : m.name == ModelName::MLO_3D   ? 2.0 * count + l - 0.5
                                                : 2.0 * count + std::sqrt(0.25 + P("g") / (hbar * hbar)) - 1;
            double a = std::max(mu - N, 0.5);
            double L = std::min(std::pow(10.0, 12 / a), 100.0) / std::sqrt(lam);
            return {m.name == ModelName::MLO ? -L : 0.0, L};
        }
        break;
    }
    default: break;
    }
    Operator op = hermitian_operator(m, o, hbar, l);
    return detail::wkb_window(m, op, iv, count);
}

// ---------------------------------------------------------------- finite differences

enum class Backend { FD, Shooting };

inline const char* backend_name(Backend b) { return b == Backend::FD ? "FD" : "SHOOTING"; }

struct SpectrumResult {
    std::vector<double> eigenvalues;
    std::vector<double> richardson_error;
    std::vector<std::vector<double>> eigenfunctions;  // N + 2 samples including the zero endpoints
    double x_lo = 0, x_hi = 0;
    int N = 0;
    Backend backend = Backend::FD;

    std::vector<double> grid() const { return uniform_grid(x_lo, x_hi, N + 2); }
    double spacing() const { return (x_hi - x_lo) / (N + 1); }
};

struct FdOptions {
    int N = 2000;
    int count = 6;
    double hbar = 1;
    std::optional<double> lo, hi;
    int l = 0;
    bool richardson = true;
    double tolerance = 1e-3;
};

namespace detail {

struct Tridiag {
    std::vector<double> values;
    std::vector<double> vectors;  // column-major n x count
    int n = 0;
};

// Lowest `count` eigenpairs of the symmetric FD matrix with M intervals on [lo, hi].
inline Tridiag fd_solve(const Operator& op, double lo, double hi, int M, int count, bool vectors)
{
    const int n = M - 1;
    const double h = (hi - lo) / M;
    const double k = op.hbar * op.hbar / (2 * h * h);
    std::vector<double> d(n), e(n, 0.0), apl(n + 1);
    for (int i = 0; i <= n; ++i) {
        double xh = lo + (i + 0.5) * h;
        apl[i] = k * op.f(xh);
        if (!std::isfinite(apl[i]))
            fail(Errc::NonFinite, "1/m at x = " + std::to_string(xh));
    }
    for (int i = 0; i < n; ++i) {
        double x = lo + (i + 1) * h;
        d[i] = apl[i] + apl[i + 1] + op.W(x);
        if (!std::isfinite(d[i]))
            fail(Errc::NonFinite, "effective potential at x = " + std::to_string(x));
        if (i + 1 < n)
            e[i] = -apl[i + 1];
    }
    Tridiag t;
    t.n = n;
    t.values.assign(n, 0.0);
    if (vectors)
        t.vectors.assign(std::size_t(n) * count, 0.0);
    std::vector<lapack_int> isuppz(2 * std::size_t(count));
    lapack_int found = 0;
    double dummy = 0;
    lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'I', n, d.data(), e.data(), 0, 0, 1, count, 0.0,
        &found, t.values.data(), vectors ? t.vectors.data() : &dummy, vectors ? n : 1, isuppz.data());
    if (info != 0 || found < count)
        fail(Errc::ConvergenceFailure, "tridiagonal eigensolver failed (info " + std::to_string(info) + ")");
    t.values.resize(count);
    return t;
}

}

/// Lowest `count` levels of the Hermitian ordered operator on a truncated interval.
/// Eigenvalues come from Richardson extrapolation over M, 2M, 4M intervals (M = N + 1);
/// the error estimate compares the (M, 2M) and (2M, 4M) extrapolants.
inline SpectrumResult solve_spectrum_fd(const Model& m, const Ordering& o, const FdOptions& opt = {})
{
    require_position_space(m);
    if (opt.N < 1000)
        fail(Errc::DomainError, "N must be at least 1000");
    if (opt.count < 1 || opt.count > 20)
        fail(Errc::DomainError, "count must lie in [1, 20]");
    if (opt.l > 0 && !is_3d(m.name))
        fail(Errc::DomainError, "angular momentum needs a 3D model");
    const Interval& iv = detail::spectral_interval(m);
    Window w = default_window(m, o, opt.count, opt.hbar, opt.l);
    if (opt.lo)
        w.lo = *opt.lo;
    if (opt.hi)
        w.hi = *opt.hi;
    if (!(w.lo < w.hi) || w.lo < iv.lo || w.hi > iv.hi)
        fail(Errc::DomainError, "window outside the model domain");
    Operator op = hermitian_operator(m, o, opt.hbar, opt.l);

    const int M = opt.N + 1;
    auto base = detail::fd_solve(op, w.lo, w.hi, M, opt.count, true);
    SpectrumResult r;
    r.x_lo = w.lo;
    r.x_hi = w.hi;
    r.N = opt.N;
    r.eigenvalues = base.values;
    r.richardson_error.assign(opt.count, 0.0);
    if (opt.richardson) {
        auto e2 = detail::fd_solve(op, w.lo, w.hi, 2 * M, opt.count, false).values;
        auto e4 = detail::fd_solve(op, w.lo, w.hi, 4 * M, opt.count, false).values;
        for (int k = 0; k < opt.count; ++k) {
            double r12 = (4 * e2[k] - base.values[k]) / 3;
            double r24 = (4 * e4[k] - e2[k]) / 3;
            r.eigenvalues[k] = r24;
            r.richardson_error[k] = std::abs(r24 - r12);
        }
    }
    for (int k = 0; k < opt.count; ++k)
        if (r.richardson_error[k] > opt.tolerance * std::max(1.0, std::abs(r.eigenvalues[k])))
            fail(Errc::ConvergenceFailure, "level " + std::to_string(k) + " extrapolation error "
                    + std::to_string(r.richardson_error[k]));

    const double h = (w.hi - w.lo) / M;
    for (int k = 0; k < opt.count; ++k) {
        std::vector<double> psi(M + 1, 0.0);
        double norm = 0, peak = 0;
        for (int i = 0; i < base.n; ++i) {
            psi[i + 1] = base.vectors[std::size_t(k) * base.n + i];
            norm += psi[i + 1] * psi[i + 1];
            peak = std::max(peak, std::abs(psi[i + 1]));
        }
        double s = 1 / std::sqrt(norm * h);
        for (double v : psi)
            if (std::abs(v) > 1e-6 * peak) {
                if (v < 0)
                    s = -s;
                break;
            }
        for (double& v : psi)
            v *= s;
        r.eigenfunctions.push_back(std::move(psi));
    }
    return r;
}

inline SpectrumResult radial_spectrum_3d(const Model& m, int l, const Ordering& o, FdOptions opt = {})
{
    if (!is_3d(m.name))
        fail(Errc::DomainError, std::string(model_name(m.name)) + " is not a 3D model");
    if (l < 0)
        fail(Errc::DomainError, "l must be non-negative");
    opt.l = l;
    return solve_spectrum_fd(m, o, opt);
}

/// Interior sign changes, ignoring samples below 1e-8 of the peak.
inline int count_nodes(const std::vector<double>& psi)
{
    double peak = 0;
    for (double v : psi)
        peak = std::max(peak, std::abs(v));
    int nodes = 0, last = 0;
    for (double v : psi) {
        if (std::abs(v) < 1e-8 * peak)
            continue;
        int s = v > 0 ? 1 : -1;
        if (last != 0 && s != last)
            ++nodes;
        last = s;
    }
    return nodes;
}

// ---------------------------------------------------------------- analytic spectra

struct Level {
    double value = 0;
    bool bound = true;
    int bound_count = -1;  // number of bound levels for finite spectra, -1 if infinite
};

namespace detail {

// Largest n with dE/dn > 0 for E(n) = a (n + c) - b (n + c)^2 style spectra; dE(n) supplied.
template <class F>
int last_rising(const F& dE)
{
    int n = 0;
    while (n < 100000 && dE(n + 1) > 0)
        ++n;
    return dE(0) > 0 ? n + 1 : 0;
}

inline Level finite(double value, int n, int count)
{
    return {value, n < count, count};
}

inline double gtilde_half(double g, double hbar) { return std::sqrt(0.25 + g / (hbar * hbar)); }

inline SingleTerm single_of(const Ordering& o)
{
    return o.single ? *o.single : SingleTerm{o.alpha, -1 - o.alpha - o.gamma, o.gamma};
}

}

/// The printed closed-form level, with its bound-state flag. Isotonic MLO uses the
/// convention 1 - lambda x^2 of its own section, i.e. lambda_printed = -lambda_registry.
inline Level analytic_level(const Model& m, const Ordering& o, int n, double hbar = 1, int l = 0, bool broken = false)
{
    using detail::finite;
    validate(o);
    if (n < 0)
        fail(Errc::DomainError, "negative quantum number");
    auto P = [&](const char* k) { return m.params.at(k); };
    const double ab = o.alpha, gb = o.gamma, e1 = eta1(o), e2 = eta2(o);
    const double h2 = hbar * hbar;
    switch (m.name) {
    case ModelName::EXPONENTIAL: {
        double A = 4 * o.alphagamma + (gb - ab) * (gb - ab) + 2 * (gb + ab);
        if (std::abs(A + 0.75) > 1e-9)
            fail(Errc::NoFormula, "EXPONENTIAL spectrum needs 4ag + (g-a)^2 + 2(g+a) = -3/4");
        return {(n + 0.5) * hbar * P("omega0")};
    }
    case ModelName::INVERSE: {
        double B = 8 * o.alphagamma + 2 * (gb - ab) * (gb - ab) + 3 * (gb + ab);
        if (std::abs(B + 1) > 1e-9)
            fail(Errc::NoFormula, "INVERSE spectrum needs 8ag + 2(g-a)^2 + 3(g+a) = -1");
        return {(n + 0.5) * hbar * P("omega0")};
    }
    case ModelName::MLO: {
        double w = P("omega0"), lam = P("lambda");
        double S = hbar * std::sqrt(w * w + h2 * lam * lam * (4 * o.alphagamma + (gb - ab) * (gb - ab)));
        auto E = [&](double k) { return (k + 0.5) * S - (k * k + k - ab - gb) * h2 * lam / 2; };
        if (lam <= 0)
            return {E(n)};
        int count = detail::last_rising([&](int k) { return S - (2 * k + 1) * h2 * lam / 2; });
        return finite(E(n), n, count);
    }
    case ModelName::HIGGS: {
        double w = P("omega0"), k = P("k");
        double c = n * n + n + 2 * ab + 2 * gb + 1.5;
        if (k >= 0) {
            double rad = w * w + h2 * k * k * (2 * e1 - 9.0 / 4);
            if (rad < 0)
                fail(Errc::NoFormula, "negative radicand in the k > 0 Higgs spectrum");
            return {(n + 0.5) * hbar * std::sqrt(rad) + c * h2 * k / 2};
        }
        double ak = -k;
        double S = hbar * w * std::sqrt(1 + ak * ak * h2 * (9.0 / 4 - 2 * e1) / (w * w));
        int count = detail::last_rising([&](int j) { return S - (2 * j + 1) * h2 * ak / 2; });
        return finite((n + 0.5) * S - c * h2 * ak / 2, n, count);
    }
    case ModelName::MLO_ISOTONIC: {
        double w = P("omega0"), lam = -P("lambda"), g = P("g");
        if (!(lam > 0))
            fail(Errc::NoFormula, "isotonic MLO spectrum is printed for the confined sign only");
        double gt = detail::gtilde_half(g, hbar);
        double N = 2 * n + gt + 1;
        double S = hbar * std::sqrt(w * w + g * lam * lam + h2 * lam * lam * (4 * o.alphagamma + (gb - ab) * (gb - ab)));
        return {N * S + (N * N - 0.25 - (ab + gb)) * 2 * h2 * lam};
    }
    case ModelName::HIGGS_ISOTONIC: {
        double w = P("omega0"), k = P("k"), g = P("g");
        if (!(k > 0))
            fail(Errc::NoFormula, "isotonic Higgs spectrum is printed for k > 0 only");
        double mu = w / (hbar * k);
        double rad = 4 * mu * mu - 9 - 8 * e1;
        if (rad < 0)
            fail(Errc::NoFormula, "negative radicand in the isotonic Higgs spectrum");
        double gt = std::sqrt(1 + 4 * g / h2);
        return {(n + 0.5) * (std::sqrt(rad) + gt) + (n * n + n + e2 - (e1 - 1) / 2) * 2 * h2 * k};
    }
    case ModelName::DELTA_ISOTONIC: {
        double lam = P("lambda"), g = P("g");
        auto s = detail::single_of(o);
        return {(n + 2) * hbar * std::sqrt(g) / 2 + std::sqrt(g * lam / 2) + (s.alpha1 * s.gamma1 + s.gamma1 / 2) * h2};
    }
    case ModelName::MLO_3D: {
        double w = P("omega0"), lam = P("lambda");
        if (lam == 0)
            return {(2 * n + l + 1.5) * hbar * w};
        double mu = w / (hbar * std::abs(lam));
        double S = hbar * w * std::sqrt(1 + (9.0 / 4 - 2 * e1) / (mu * mu));
        auto E = [&](int nr) {
            double N = 2 * nr + l + 1.5;
            return N * S - (N * N - ab - gb - 9.0 / 4) * h2 * lam / 2;
        };
        if (lam < 0)
            return {E(n)};
        int count = detail::last_rising([&](int nr) { return 2 * S - 4 * (2 * nr + l + 1.5) * h2 * lam / 2; });
        return finite(E(n), n, count);
    }
    case ModelName::HIGGS_3D: {
        double w = P("omega0"), k = P("k");
        if (k == 0)
            return {(2 * n + l + 1.5) * hbar * w};
        double mu = w / (hbar * std::abs(k));
        double S = hbar * w * std::sqrt(1 + (9.0 / 4 - 2 * e1) / (mu * mu));
        auto E = [&](int nr) {
            double N = 2 * nr + l + 1.5;
            return N * S + (N * N + 2 * ab + 2 * gb - 0.25) * h2 * k / 2;
        };
        if (k > 0)
            return {E(n)};
        int count = detail::last_rising([&](int nr) { return 2 * S + 4 * (2 * nr + l + 1.5) * h2 * k / 2; });
        return finite(E(n), n, count);
    }
    case ModelName::MEE: {
        double E = (n + 0.5) * hbar * P("omega");
        return {broken ? -E : E};
    }
    default: fail(Errc::NoFormula, std::string("no closed-form spectrum for ") + model_name(m.name));
    }
}

inline double analytic_spectrum(const Model& m, const Ordering& o, int n, double hbar = 1, int l = 0, bool broken = false)
{
    Level lv = analytic_level(m, o, n, hbar, l, broken);
    if (!lv.bound)
        fail(Errc::IndexAboveBoundStates, "n = " + std::to_string(n) + " with " + std::to_string(lv.bound_count) + " bound states");
    return lv.value;
}

/// Closed forms consistent with the Hermitian operator, used where the printed
/// formulas disagree with it: Higgs (sign of 9/4 - 2 eta1), isotonic MLO/Higgs and
/// both 3D systems. Everything else falls through to analytic_level.
inline Level derived_level(const Model& m, const Ordering& o, int n, double hbar = 1, int l = 0)
{
    using detail::finite;
    validate(o);
    if (n < 0)
        fail(Errc::DomainError, "negative quantum number");
    auto P = [&](const char* k) { return m.params.at(k); };
    const double ab = o.alpha, gb = o.gamma, e1 = eta1(o);
    const double h2 = hbar * hbar;
    // Higgs family: N S + (N^2 + 5/4 + 2a + 2g) hbar^2 k / 2 - shift, N = effective n + 1/2.
    auto higgs = [&](double k, double w, auto Nof, double shift) {
        double S = hbar * std::sqrt(w * w + h2 * k * k * (9.0 / 4 - 2 * e1));
        auto E = [&](int j) {
            double N = Nof(j);
            return N * S + (N * N + 1.25 + 2 * ab + 2 * gb) * h2 * k / 2 - shift;
        };
        if (k >= 0)
            return Level{E(n)};
        int count = detail::last_rising([&](int j) { return E(j) - E(j - 1) > 0 ? 1.0 : -1.0; });
        return finite(E(n), n, count);
    };
    // MLO family: N S - (N^2 - 1/4 - a - g) hbar^2 lambda / 2 in the registry sign.
    auto mlo = [&](double lam, double w, auto Nof) {
        double S = hbar * std::sqrt(w * w + h2 * lam * lam * (4 * o.alphagamma + (gb - ab) * (gb - ab)));
        auto E = [&](int j) {
            double N = Nof(j);
            return N * S - (N * N - 0.25 - ab - gb) * h2 * lam / 2;
        };
        if (lam <= 0)
            return Level{E(n)};
        int count = detail::last_rising([&](int j) { return E(j) - E(j - 1) > 0 ? 1.0 : -1.0; });
        return finite(E(n), n, count);
    };
    switch (m.name) {
    case ModelName::HIGGS: return higgs(P("k"), P("omega0"), [](int j) { return j + 0.5; }, 0.0);
    case ModelName::HIGGS_ISOTONIC: {
        double g = P("g"), gt = detail::gtilde_half(g, hbar);
        return higgs(P("k"), P("omega0"), [gt](int j) { return 2 * j + gt + 1; }, g * P("k") / 2);
    }
    case ModelName::HIGGS_3D: return higgs(P("k"), P("omega0"), [l](int j) { return 2 * j + l + 1.5; }, 0.0);
    case ModelName::MLO: return mlo(P("lambda"), P("omega0"), [](int j) { return j + 0.5; });
    case ModelName::MLO_ISOTONIC: {
        double gt = detail::gtilde_half(P("g"), hbar);
        return mlo(P("lambda"), P("omega0"), [gt](int j) { return 2 * j + gt + 1; });
    }
    case ModelName::MLO_3D: return mlo(P("lambda"), P("omega0"), [l](int j) { return 2 * j + l + 1.5; });
    default: return analytic_level(m, o, n, hbar, l);
    }
}

inline double derived_spectrum(const Model& m, const Ordering& o, int n, double hbar = 1, int l = 0)
{
    Level lv = derived_level(m, o, n, hbar, l);
    if (!lv.bound)
        fail(Errc::IndexAboveBoundStates, "n = " + std::to_string(n) + " with " + std::to_string(lv.bound_count) + " bound states");
    return lv.value;
}

// ---------------------------------------------------------------- analytic eigenfunctions

/// Unnormalized printed eigenfunctions: EXPONENTIAL, INVERSE and MLO with lambda < 0.
inline double analytic_eigenfunction(const Model& m, const Ordering& o, int n, double x, double hbar = 1)
{
    auto P = [&](const char* k) { return m.params.at(k); };
    switch (m.name) {
    case ModelName::EXPONENTIAL: {
        double w = P("omega0"), lam = P("lambda");
        double y = std::exp(lam * x);
        double a = w / hbar;
        // exp(-a y^2/2 + a y) written as exp(-a (y-1)^2/2) up to the constant e^{a/2}.
        return std::exp(-a * (y - 1) * (y - 1) / 2) * std::exp(lam * x / 2) * sf::hermite(n, std::sqrt(a) * (y - 1));
    }
    case ModelName::INVERSE: {
        double w = P("omega0"), lam = P("lambda");
        double u = 1 + lam * x;
        if (!(u > 0))
            return 0;
        double y = x / u;
        return std::exp(-w * y * y / (2 * hbar)) * sf::hermite(n, std::sqrt(w / hbar) * y) / u;
    }
    case ModelName::MLO: {
        double w = P("omega0"), lam = P("lambda");
        if (!(lam < 0))
            fail(Errc::NoFormula, "printed MLO eigenfunctions cover lambda < 0");
        double al = -lam, r = std::sqrt(al) * x;
        if (!(std::abs(r) < 1))
            return 0;
        double mu = w / (al * hbar);
        return std::pow(1 - al * x * x, (o.gamma - o.alpha) / 2) * sf::assoc_legendre(n + mu, -mu, r);
    }
    default: fail(Errc::NoFormula, std::string("no printed eigenfunction for ") + model_name(m.name));
    }
}

// ---------------------------------------------------------------- shooting

/// psi'' + P psi' + (Q0 + E Q1) psi = 0.
struct LinearOde {
    std::function<double(double)> P, Q0, Q1;
};

struct ShootOptions {
    double rtol = 1e-12;
    double atol = 1e-300;
    double tolerance = 1e-10;
};

namespace detail {

inline std::array<double, 2> propagate(const LinearOde& ode, double from, double to, double slope, double E, const ShootOptions& opt)
{
    Dopri5<2> rk;
    rk.rtol = opt.rtol;
    rk.atol = opt.atol;
    rk.rhs = [&](double x, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        double p = ode.P ? ode.P(x) : 0.0;
        dy[0] = y[1];
        dy[1] = -p * y[1] - (ode.Q0(x) + E * ode.Q1(x)) * y[0];
    };
    try {
        auto res = rk.run(from, {0.0, slope}, to, {to});
        return res.states.back();
    } catch (const Error& e) {
        if (e.code == Errc::StepFailure)
            fail(Errc::StiffFailure, e.what());
        throw;
    }
}

}

/// Normalized Wronskian of the left and right Dirichlet solutions at the matching point.
inline double shooting_mismatch(const LinearOde& ode, double lo, double hi, double x_match, double E, const ShootOptions& opt = {})
{
    auto L = detail::propagate(ode, lo, x_match, 1.0, E, opt);
    auto R = detail::propagate(ode, hi, x_match, -1.0, E, opt);
    double nl = std::hypot(L[0], L[1]), nr = std::hypot(R[0], R[1]);
    return (L[0] * R[1] - L[1] * R[0]) / (nl * nr);
}

inline double shoot_eigenvalue(const LinearOde& ode, double lo, double hi, double E_lo, double E_hi, double x_match,
    const ShootOptions& opt = {})
{
    if (!(lo < x_match && x_match < hi))
        fail(Errc::DomainError, "matching point must lie inside the interval");
    auto D = [&](double E) { return shooting_mismatch(ode, lo, hi, x_match, E, opt); };
    double fa = D(E_lo), fb = D(E_hi);
    if (fa == 0)
        return E_lo;
    if (fb == 0)
        return E_hi;
    if ((fa > 0) == (fb > 0))
        fail(Errc::NoSignChange, "mismatch has the same sign at both bracket ends");
    std::uintmax_t iters = 200;
    double tol = opt.tolerance;
    auto r = boost::math::tools::toms748_solve(D, E_lo, E_hi, fa, fb,
        [tol](double a, double b) { return std::abs(b - a) <= tol / 4; }, iters);
    return 0.5 * (r.first + r.second);
}

/// First `count` eigenvalues in [E_min, E_max], bracketed by scanning with step dE.
inline std::vector<double> shoot_spectrum(const LinearOde& ode, double lo, double hi, double x_match, double E_min, double E_max,
    double dE, int count, const ShootOptions& opt = {})
{
    std::vector<double> out;
    double a = E_min, fa = shooting_mismatch(ode, lo, hi, x_match, a, opt);
    while (a < E_max && int(out.size()) < count) {
        double b = std::min(a + dE, E_max);
        double fb = shooting_mismatch(ode, lo, hi, x_match, b, opt);
        if ((fa > 0) != (fb > 0))
            out.push_back(shoot_eigenvalue(ode, lo, hi, a, b, x_match, opt));
        a = b;
        fa = fb;
    }
    return out;
}

// ---------------------------------------------------------------- MEE

/// How the q = sqrt(s) equation is closed at q = 0 (p = 3 omega^2 / 2k):
/// Continued treats q on the whole line (the printed eigenfunctions are analytic
/// there), Dirichlet imposes psi(q = 0) = 0.
enum class MeeBoundary { Continued, Dirichlet };

struct MeeQProblem {
    LinearOde ode;
    double lo, hi, x_match;
    double omega, hbar;
};

/// With Phi(p) = s^{1/4} psi(q), q = sqrt(1 - 2kp/3w^2), the momentum-space equation
/// becomes a harmonic oscillator in q: mass 9w^2/k^2, frequency w, centre q = 1.
inline MeeQProblem mee_q_problem(const Model& m, int count, double hbar = 1, MeeBoundary bc = MeeBoundary::Continued)
{
    if (m.name != ModelName::MEE)
        fail(Errc::DomainError, "MEE only");
    double w = m.par("omega"), k = m.par("k");
    double M = 9 * w * w / (k * k);
    double K = M * w * w / 2;
    double q1 = 2 * M / (hbar * hbar);
    MeeQProblem p;
    p.ode.P = nullptr;
    p.ode.Q1 = [q1](double) { return q1; };
    p.ode.Q0 = [q1, K](double q) { return -q1 * K * (q - 1) * (q - 1); };
    double Y = detail::gauss_extent(M * w / hbar, count + 1);
    double sig = std::sqrt(hbar / (M * w));
    p.lo = bc == MeeBoundary::Dirichlet ? 0.0 : 1 - Y;
    p.hi = 1 + Y;
    p.x_match = 1 + 0.137 * sig;
    p.omega = w;
    p.hbar = hbar;
    return p;
}

inline std::vector<double> mee_spectrum_shoot(const Model& m, int count, double hbar = 1, MeeBoundary bc = MeeBoundary::Continued,
    const ShootOptions& opt = {})
{
    auto p = mee_q_problem(m, count, hbar, bc);
    double hw = hbar * p.omega;
    return shoot_spectrum(p.ode, p.lo, p.hi, p.x_match, 0.0, (count + 2) * hw * 1.5, hw / 8, count, opt);
}

/// Printed MEE eigenfunctions in momentum space (up to a constant). Regular branch
/// for s > 0; the broken branch lives at p beyond 3w^2/2k, where the square roots of
/// the printed form are read as r = sqrt(2kp/3w^2 - 1).
inline cplx mee_eigenfunction(const Model& m, int n, double p, double hbar = 1, bool broken = false)
{
    double w = m.par("omega"), k = m.par("k");
    double s = 1 - 2 * k * p / (3 * w * w);
    double c = 9 * w * w * w / (2 * hbar * k * k);
    double a = 3 * std::pow(w, 1.5) / (std::sqrt(hbar) * std::abs(k));
    if (!broken) {
        if (!(s > 0))
            return 0;
        double q = std::sqrt(s);
        // exp(-c (s - 2q)) = e^{c} exp(-c (q - 1)^2); the constant is dropped.
        return std::pow(s, 0.25) * std::exp(-c * (q - 1) * (q - 1)) * sf::hermite(n, a * (q - 1));
    }
    if (!(s < 0))
        return 0;
    double r = std::sqrt(-s);
    cplx ph = std::exp(cplx(-c * r * r, -2 * c * r));
    return std::pow(-s, 0.25) * ph * sf::hermite<cplx>(n, cplx(a * r, a));
}

/// The momentum-space operator -(h^2 w^2/2) s d^2 - h^2 k^2/(24 w^2 s) + U(p), U with
/// the principal complex square root so that it also covers s < 0.
inline OdeSpec mee_ode(const Model& m, double hbar = 1)
{
    double w = m.par("omega"), k = m.par("k");
    double c = 2 * k / (3 * w * w), K = 9 * w * w * w * w / (2 * k * k);
    double h2 = hbar * hbar;
    return {[=](double p) { return cplx(-h2 * w * w / 2 * (1 - c * p)); }, [](double) { return cplx(0); },
        [=](double p) {
            double s = 1 - c * p;
            cplx q = std::sqrt(cplx(s));
            return cplx(-h2 * k * k / (24 * w * w * s)) + K * (q - 1.0) * (q - 1.0);
        }};
}

// ---------------------------------------------------------------- delta-type

/// Coupling values for which x^{-a} J_n(2 sqrt(E)/(hbar x)) solves the single-term equation.
inline double delta_lambda(int n, const Ordering& o, double hbar = 1)
{
    auto s = detail::single_of(o);
    double c = 2 * s.alpha1 + 2 * s.gamma1 + 1.5;
    return (n * n - c * c) * hbar * hbar / 4;
}

/// Bessel eigenfunction on x > 0. `printed` drops the x^{-a} prefactor,
/// a = 3/2 + 2 alpha1 - 2 gamma1, which the single-term equation requires.
inline double delta_eigenfunction(int n, double E, const Ordering& o, double x, double hbar = 1, bool printed = false)
{
    auto s = detail::single_of(o);
    double J = sf::bessel_j(n, 2 * std::sqrt(E) / (hbar * x));
    if (printed)
        return J;
    return std::pow(x, -(1.5 + 2 * s.alpha1 - 2 * s.gamma1)) * J;
}

/// Single-term ordered operator, -(hbar^2/2m)[d^2 + (g1-a1-1)(m'/m) d + g1 m''/m - (a1 g1 + 2 g1) m'^2/m^2] + V.
inline OdeSpec single_term_ode(const Model& m, const Ordering& o, double hbar = 1)
{
    require_position_space(m);
    auto s = detail::single_of(o);
    double h2 = hbar * hbar;
    auto coef = [m, h2](double x) { return -h2 / (2 * m.mass(x).v); };
    return {[coef](double x) { return cplx(coef(x)); },
        [m, s, coef](double x) {
            D2 M = m.mass(x);
            return cplx(coef(x) * (s.gamma1 - s.alpha1 - 1) * M.d1 / M.v);
        },
        [m, s, coef](double x) {
            D2 M = m.mass(x);
            double r1 = M.d1 / M.v, r2 = M.d2 / M.v;
            return cplx(coef(x) * (s.gamma1 * r2 - (s.alpha1 * s.gamma1 + 2 * s.gamma1) * r1 * r1) + m.potential(x).v);
        }};
}

// ---------------------------------------------------------------- curvature

struct CurvatureFit {
    double constant = 0;
    double linear_coeff = 0;
    double quadratic_coeff = 0;
    double fit_residual = 0;
    bool linear = false;
};

/// Least-squares E_n ~ a + b n + c n^2.
inline CurvatureFit spectrum_curvature(const std::vector<double>& E)
{
    const int n = int(E.size());
    if (n < 5)
        fail(Errc::TooFewLevels, "need at least 5 levels, got " + std::to_string(n));
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        A(i, 0) = 1;
        A(i, 1) = i;
        A(i, 2) = double(i) * i;
        b(i) = E[i];
    }
    Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
    CurvatureFit f{c(0), c(1), c(2), (A * c - b).cwiseAbs().maxCoeff(), false};
    f.linear = std::abs(f.quadratic_coeff) < 1e-6 * std::abs(f.linear_coeff);
    return f;
}

inline CurvatureFit spectrum_curvature(const SpectrumResult& s) { return spectrum_curvature(s.eigenvalues); }

}
