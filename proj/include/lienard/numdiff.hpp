#pragma once

#include <algorithm>
#include <cmath>

namespace lienard {

struct Derivative {
    double value;
    double error;
};

// Five-point central stencils.
template <class F>
double central5(const F& f, double x, int order, double h)
{
    double fm2 = f(x - 2 * h), fm1 = f(x - h), fp1 = f(x + h), fp2 = f(x + 2 * h);
    if (order == 1)
        return (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h);
    double f0 = f(x);
    return (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h);
}

/// Central difference at h and h/2 combined by one Richardson step (h^4 -> h^6).
/// First derivatives use h = max(1e-5, 1e-5|x|). Second derivatives use
/// h = max(2e-3, 1e-4|x|): at 1e-5 the eps/h^2 rounding floor would be ~1e-6.
template <class F>
Derivative richardson_derivative(const F& f, double x, int order)
{
    double h = order == 1 ? std::max(1e-5, 1e-5 * std::abs(x)) : std::max(2e-3, 1e-4 * std::abs(x));
    double d1 = central5(f, x, order, h);
    double d2 = central5(f, x, order, h / 2);
    double r = d2 + (d2 - d1) / 15.0;
    return {r, std::abs(r - d2)};
}

template <class F>
double d1(const F& f, double x) { return richardson_derivative(f, x, 1).value; }

template <class F>
double d2(const F& f, double x) { return richardson_derivative(f, x, 2).value; }

}
