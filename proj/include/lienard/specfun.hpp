#pragma once

#include "lienard/error.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <string>

namespace lienard::sf {

inline bool is_nonpos_int(double a) { return a <= 0 && a == std::floor(a); }

/// Physicists' Hermite polynomial by the three-term recurrence; T may be complex.
template <class T>
T hermite(int n, T x)
{
    if (n < 0 || n > 60)
        fail(Errc::DegreeTooLarge, "hermite degree " + std::to_string(n));
    T h0 = T(1);
    if (n == 0)
        return h0;
    T h1 = T(2) * x;
    for (int k = 1; k < n; ++k) {
        T h2 = T(2) * x * h1 - T(2.0 * k) * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

inline double hermite(int n, double x) { return hermite<double>(n, x); }

inline double log_gamma(double x)
{
    if (is_nonpos_int(x))
        fail(Errc::PoleOfGamma, "log_gamma at " + std::to_string(x));
    return std::lgamma(x);
}

inline double erf(double x) { return std::erf(x); }

/// Terminating 2F1(-n, b; c; z) summed exactly.
inline double gauss_2f1_terminating(int n, double b, double c, double z)
{
    if (n < 0)
        fail(Errc::NonTerminating, "first parameter must be a non-positive integer");
    if (is_nonpos_int(c) && -c < n)
        fail(Errc::PoleInC, "c = " + std::to_string(c));
    double term = 1, sum = 1;
    for (int k = 0; k < n; ++k) {
        term *= (k - n) * (b + k) / ((c + k) * (k + 1)) * z;
        sum += term;
    }
    return sum;
}

/// 2F1(a, b; c; z): terminating sums where a or b is a non-positive integer, the
/// Euler transform when c-a or c-b is, otherwise the power series for |z| < 1.
inline double hyp2f1(double a, double b, double c, double z)
{
    auto series = [&](double a_, double b_, int terms_hint) {
        if (is_nonpos_int(c) && (terms_hint < 0 || -c < terms_hint))
            fail(Errc::PoleInC, "c = " + std::to_string(c));
        double term = 1, sum = 1;
        int kmax = terms_hint >= 0 ? terms_hint : 200000;
        for (int k = 0; k < kmax; ++k) {
            term *= (a_ + k) * (b_ + k) / ((c + k) * (k + 1)) * z;
            sum += term;
            if (terms_hint < 0 && k > 2 && std::abs(term) < 1e-17 * std::abs(sum))
                return sum;
        }
        if (terms_hint < 0)
            fail(Errc::NonTerminating, "series did not converge");
        return sum;
    };
    if (is_nonpos_int(a))
        return series(a, b, int(-a));
    if (is_nonpos_int(b))
        return series(b, a, int(-b));
    if (is_nonpos_int(c - a))
        return std::pow(1 - z, c - a - b) * series(c - a, c - b, int(a - c));
    if (is_nonpos_int(c - b))
        return std::pow(1 - z, c - a - b) * series(c - b, c - a, int(b - c));
    if (std::abs(z) >= 1)
        fail(Errc::NonTerminating, "|z| >= 1 without a terminating branch");
    return series(a, b, -1);
}

/// Ferrers function P^mu_nu(x) on the cut (-1, 1), Condon-Shortley phase.
/// Integer degree and order use the stable recurrence; other cases go through
/// the hypergeometric representation.
inline double assoc_legendre(double nu, double mu, double x)
{
    if (!(std::abs(x) < 1))
        fail(Errc::OutOfBranch, "|x| >= 1");
    bool int_nu = nu == std::floor(nu) && nu >= 0;
    bool int_mu = mu == std::floor(mu);
    if (int_nu && int_mu && std::abs(mu) <= 60 && nu <= 200) {
        int l = int(nu), m = int(std::abs(mu));
        if (m > l)
            return 0;
        double s = std::sqrt((1 - x) * (1 + x));
        double pmm = 1;
        for (int i = 1; i <= m; ++i)
            pmm *= -(2 * i - 1) * s;
        double p = pmm;
        if (l > m) {
            double pm1 = x * (2 * m + 1) * pmm;
            double pm0 = pmm;
            p = pm1;
            for (int ll = m + 2; ll <= l; ++ll) {
                double pn = ((2 * ll - 1) * x * pm1 - (ll + m - 1) * pm0) / (ll - m);
                pm0 = pm1;
                pm1 = pn;
                p = pn;
            }
        }
        if (mu < 0) {
            // P^{-m}_l = (-1)^m (l-m)!/(l+m)! P^m_l
            double r = std::exp(std::lgamma(l - m + 1.0) - std::lgamma(l + m + 1.0));
            p *= (m % 2 ? -1 : 1) * r;
        }
        return p;
    }
    double z = (1 - x) / 2;
    if (int_mu && mu > 0) {
        int m = int(mu);
        if (is_nonpos_int(nu - m + 1))
            return 0;
        // lgamma drops the sign of Gamma, which is negative on alternate unit intervals below 0.
        double sign = (m % 2 ? -1.0 : 1.0) * (std::tgamma(nu + m + 1) < 0 ? -1 : 1) * (std::tgamma(nu - m + 1) < 0 ? -1 : 1);
        double pref = sign * std::exp(std::lgamma(nu + m + 1) - std::lgamma(nu - m + 1) - std::lgamma(m + 1.0))
            / std::pow(2.0, m) * std::pow(1 - x * x, m / 2.0);
        return pref * hyp2f1(m - nu, m + nu + 1, m + 1, z);
    }
    if (is_nonpos_int(1 - mu))
        fail(Errc::PoleOfGamma, "1 - mu is a non-positive integer");
    double g = std::tgamma(1 - mu);
    return std::pow((1 + x) / (1 - x), mu / 2) / g * hyp2f1(-nu, nu + 1, 1 - mu, z);
}

/// Jacobi polynomial P_n^{(a,b)}(x) by the standard recurrence.
inline double jacobi_poly(int n, double a, double b, double x)
{
    if (a <= -1 || b <= -1)
        fail(Errc::BadWeight, "a, b must exceed -1");
    if (n < 0)
        fail(Errc::DegreeTooLarge, "negative degree");
    double p0 = 1;
    if (n == 0)
        return p0;
    double p1 = (a + 1) + (a + b + 2) * (x - 1) / 2;
    for (int k = 2; k <= n; ++k) {
        double c = 2.0 * k + a + b;
        double a1 = 2 * k * (k + a + b) * (c - 2);
        double a2 = (c - 1) * (a * a - b * b);
        double a3 = (c - 2) * (c - 1) * c;
        double a4 = 2 * (k + a - 1) * (k + b - 1) * c;
        double p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

/// Complete elliptic integral K(m), parameter convention (m = modulus^2).
inline double ellipk(double m)
{
    if (!(m < 1))
        fail(Errc::ParameterOutOfRange, "m >= 1");
    double a = 1, b = std::sqrt(1 - m);
    for (int i = 0; i < 60 && std::abs(a - b) > 1e-16 * a; ++i) {
        double an = (a + b) / 2;
        b = std::sqrt(a * b);
        a = an;
    }
    return M_PI / (2 * a);
}

struct Jacobi {
    double sn, cn, dn;
};

/// sn, cn, dn by the descending Landen / AGM scheme; m in [0, 1).
inline Jacobi jacobi_elliptic(double u, double m)
{
    if (!(m >= 0 && m < 1))
        fail(Errc::ParameterOutOfRange, "m must lie in [0, 1)");
    if (m == 0)
        return {std::sin(u), std::cos(u), 1};
    constexpr int N = 40;
    double a[N + 1], c[N + 1];
    a[0] = 1;
    double b = std::sqrt(1 - m);
    c[0] = std::sqrt(m);
    int n = 0;
    while (n < N && std::abs(c[n]) > 1e-16) {
        a[n + 1] = (a[n] + b) / 2;
        c[n + 1] = (a[n] - b) / 2;
        b = std::sqrt(a[n] * b);
        ++n;
    }
    double phi = std::ldexp(a[n] * u, n);
    double phi_prev = phi;
    for (int j = n; j > 0; --j) {
        phi_prev = phi;
        phi = (phi + std::asin(c[j] / a[j] * std::sin(phi))) / 2;
    }
    double sn = std::sin(phi), cn = std::cos(phi);
    double dn = n > 0 ? cn / std::cos(phi_prev - phi) : 1;
    return {sn, cn, dn};
}

inline double jacobi_sn(double u, double m) { return jacobi_elliptic(u, m).sn; }

enum class KTrig { S, C, T };

/// Curvature-dependent trigonometric functions: sin/cos/tan for k > 0,
/// hyperbolic for k < 0, the flat limits at k = 0.
inline double k_trig(KTrig which, double k, double x)
{
    double s, c;
    if (k > 0) {
        double r = std::sqrt(k);
        s = std::sin(r * x) / r;
        c = std::cos(r * x);
    } else if (k < 0) {
        double r = std::sqrt(-k);
        s = std::sinh(r * x) / r;
        c = std::cosh(r * x);
    } else {
        s = x;
        c = 1;
    }
    switch (which) {
    case KTrig::S: return s;
    case KTrig::C: return c;
    case KTrig::T: return s / c;
    }
    return 0;
}

inline double bessel_j(double n, double x) { return std::cyl_bessel_j(n, x); }

}
