#pragma once

#include "lienard/catalog.hpp"
#include "lienard/exprdsl.hpp"
#include "lienard/numdiff.hpp"
#include "lienard/ode.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lienard::classical {

/// Phase-space point: (x, xdot) in 1D, (r, rdot, theta, thetadot, phidot) in 3D.
using State = std::array<double, 5>;

struct TrajectoryMeta {
    std::string integrator = "dopri5";
    double tol = 0;
    long accepted_steps = 0;
    long rejected_steps = 0;
    long evaluations = 0;
    bool terminated_early = false;
    std::string stop_reason;
    double t_stop = 0;
    double energy_drift = 0;
    bool accepted = false;
};

struct Trajectory {
    int width = 2;
    std::vector<double> times;
    std::vector<State> states;
    std::vector<double> energy;
    TrajectoryMeta meta;
};

struct IntegrateOptions {
    double dt = 0;                 // output spacing; 0 picks >= 200 samples per nominal period
    double samples_per_period = 400;
};

/// Energy of a phase-space state (3D includes the angular kinetic term).
inline double state_energy(const Model& m, const State& s)
{
    if (m.dimension == 3) {
        double r = s[0], st = std::sin(s[2]);
        double h = m.ang_metric(r).v;
        return 0.5 * m.mass(r).v * s[1] * s[1] + 0.5 * h * (s[3] * s[3] + st * st * s[4] * s[4]) + m.potential(r).v;
    }
    if (m.lienard_type == 2)
        return hamiltonian(m, s[0], mee_momentum(m, s[0], s[1]));
    return 0.5 * m.mass(s[0]).v * s[1] * s[1] + m.potential(s[0]).v;
}

inline double state_momentum(const Model& m, const State& s)
{
    if (m.dimension == 3)
        return m.mass(s[0]).v * s[1];
    return momentum(m, s[0], s[1]);
}

namespace detail {

inline bool singular_origin(ModelName n) { return n == ModelName::DELTA || n == ModelName::DELTA_ISOTONIC; }

// Frequency scale for the output grid: the model's omega, or the local curvature
// of the (effective) potential when that is larger. Radial motion in 3D runs at
// twice the phase rate.
inline double nominal_omega(const Model& m, const State& s0)
{
    double x0 = s0[0];
    double w = 0;
    for (const char* key : {"omega0", "omega"})
        if (m.params.count(key))
            w = std::max(w, std::abs(m.par(key)));
    if (m.dimension == 3) {
        double st = std::sin(s0[2]);
        double h0 = m.ang_metric(x0).v;
        double c2sq = h0 * h0 * (s0[3] * s0[3] + st * st * s0[4] * s0[4]);
        auto veff = [&](double r) { return m.potential(r).v + c2sq / (2 * m.ang_metric(r).v); };
        double q = d2(veff, x0) / m.mass(x0).v;
        return std::max(2 * w, std::isfinite(q) ? std::sqrt(std::abs(q)) : 0.0);
    }
    if (m.dimension == 1 && m.lienard_type == 1) {
        double q = d1([&](double x) { return m.g(x); }, x0) + m.f(x0) * m.g(x0);
        if (std::isfinite(q))
            w = std::max(w, std::sqrt(std::abs(q)));
    }
    return w;
}

}

/// Adaptive RK5(4) trajectory sampled on a uniform grid. Runs stop early (with a
/// flag) within 1e-9 of a finite domain boundary, and for delta-type models when
/// |x| < 1e-6 or |x| > 1e6. Negative t_end integrates backwards.
inline Trajectory integrate(const Model& m, const State& initial, double t_end, double tol, IntegrateOptions opt = {})
{
    if (!(tol >= 1e-12 && tol <= 1e-6))
        fail(Errc::DomainError, "tol must lie in [1e-12, 1e-6]");
    const Interval* iv = m.lienard_type == 2 ? nullptr : m.interval_of(initial[0]);
    if (m.lienard_type == 1 && !iv)
        fail(Errc::DomainExit, "initial state outside the domain: t = 0, x = " + std::to_string(initial[0]));
    if (m.dimension == 3 && !(std::sin(initial[2]) != 0))
        fail(Errc::DomainError, "theta must avoid the poles");

    Trajectory tr;
    tr.width = m.dimension == 3 ? 5 : 2;
    tr.meta.tol = tol;

    double dt = opt.dt;
    if (dt <= 0) {
        double w = detail::nominal_omega(m, initial);
        double T = w > 0 ? 2 * M_PI / w : std::abs(t_end);
        dt = std::min(std::abs(t_end) / 4000, T / opt.samples_per_period);
    }
    std::size_t n = std::size_t(std::floor(std::abs(t_end) / dt + 1e-9));
    double dir = t_end >= 0 ? 1 : -1;
    std::vector<double> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        out[i] = dir * dt * double(i);
    if (std::abs(out.back() - t_end) > 1e-12 * std::abs(t_end))
        out.push_back(t_end);

    bool sing = detail::singular_origin(m.name);
    auto stop = [&](double, const auto& y) {
        double x = y[0];
        if (sing && (std::abs(x) < 1e-6 || std::abs(x) > 1e6)) {
            tr.meta.stop_reason = "singular";
            return true;
        }
        if (iv) {
            if (!iv->contains(x)) {
                tr.meta.stop_reason = "domain_exit";
                return true;
            }
            if ((std::isfinite(iv->lo) && x - iv->lo < 1e-9) || (std::isfinite(iv->hi) && iv->hi - x < 1e-9)) {
                tr.meta.stop_reason = "domain_boundary";
                return true;
            }
        }
        return false;
    };

    auto collect = [&](auto&& res) {
        for (std::size_t i = 0; i < res.times.size(); ++i) {
            State s{};
            for (std::size_t j = 0; j < res.states[i].size(); ++j)
                s[j] = res.states[i][j];
            tr.times.push_back(res.times[i]);
            tr.states.push_back(s);
        }
        tr.meta.accepted_steps = res.stats.accepted;
        tr.meta.rejected_steps = res.stats.rejected;
        tr.meta.evaluations = res.stats.evaluations;
        tr.meta.terminated_early = res.stopped_early;
        tr.meta.t_stop = res.t_stop;
        if (!res.stopped_early)
            tr.meta.stop_reason.clear();
    };

    if (m.dimension == 3) {
        Dopri5<5> ode;
        ode.rtol = ode.atol = tol;
        ode.rhs = [&m](double, const Dopri5<5>::State& y, Dopri5<5>::State& dy) {
            double r = y[0], rd = y[1], th = y[2], thd = y[3], phd = y[4];
            D2 M = m.mass(r), h = m.ang_metric(r), V = m.potential(r);
            double s = std::sin(th), c = std::cos(th);
            double ang = thd * thd + s * s * phd * phd;
            dy[0] = rd;
            dy[1] = (0.5 * h.d1 * ang - 0.5 * M.d1 * rd * rd - V.d1) / M.v;
            dy[2] = thd;
            dy[3] = -h.d1 / h.v * rd * thd + s * c * phd * phd;
            dy[4] = -phd * (h.d1 * rd / h.v + 2 * c / s * thd);
        };
        Dopri5<5>::State y0{initial[0], initial[1], initial[2], initial[3], initial[4]};
        collect(ode.run(0, y0, t_end, out, stop));
    } else if (m.name == ModelName::POWER_LAW) {
        // x = 0 is a singular point of the x-equation (f = nu/x) that every orbit
        // crosses; integrate in y = sgn(x)|x|^(nu+1), where the kinetic term is
        // a^2 y'^2/2 and the equation is regular, then map back.
        double nu = m.par("nu"), a = m.par("a");
        auto to_x = [nu](double y) { return std::copysign(std::pow(std::abs(y), 1 / (nu + 1)), y); };
        Dopri5<2> ode;
        ode.rtol = ode.atol = tol;
        ode.rhs = [&m, nu, a, to_x](double, const Dopri5<2>::State& y, Dopri5<2>::State& dy) {
            double x = to_x(y[0]);
            dy[0] = y[1];
            dy[1] = x == 0 ? 0 : -m.potential(x).d1 / (a * a * (nu + 1) * std::pow(std::abs(x), nu));
        };
        double x0 = initial[0];
        Dopri5<2>::State y0{std::copysign(std::pow(std::abs(x0), nu + 1), x0), (nu + 1) * std::pow(std::abs(x0), nu) * initial[1]};
        auto res = ode.run(0, y0, t_end, out, {});
        for (auto& s : res.states) {
            double x = to_x(s[0]);
            s = {x, x == 0 ? (nu < 0 ? 0.0 : INFINITY) : s[1] / ((nu + 1) * std::pow(std::abs(x), nu))};
        }
        collect(res);
    } else {
        Dopri5<2> ode;
        ode.rtol = ode.atol = tol;
        ode.rhs = [&m](double, const Dopri5<2>::State& y, Dopri5<2>::State& dy) {
            dy[0] = y[1];
            dy[1] = m.accel(y[0], y[1]);
        };
        Dopri5<2>::State y0{initial[0], initial[1]};
        collect(ode.run(0, y0, t_end, out, stop));
    }

    double H0 = tr.states.empty() ? 0 : state_energy(m, tr.states.front());
    double drift = 0;
    for (const auto& s : tr.states) {
        double H = state_energy(m, s);
        tr.energy.push_back(H);
        drift = std::max(drift, std::abs(H - H0));
    }
    tr.meta.energy_drift = drift / std::max(std::abs(H0), 1e-12);
    tr.meta.accepted = tr.meta.energy_drift < 1e-9;
    return tr;
}

struct PeriodEstimate {
    double period;
    double uncertainty;
    int crossings_used;
};

/// Period from upward crossings of the time-averaged level. Each crossing is
/// bracketed on the sample grid and refined on the cubic Hermite interpolant
/// built from (x, xdot), which is exact to O(dt^4) rather than O(dt^2).
inline PeriodEstimate measure_period(const Trajectory& tr)
{
    const auto& t = tr.times;
    std::size_t n = t.size();
    if (n < 3)
        fail(Errc::NonOscillatory, "trajectory too short");
    double area = 0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        area += 0.5 * (tr.states[i][0] + tr.states[i + 1][0]) * (t[i + 1] - t[i]);
    double level = area / (t.back() - t.front());

    std::vector<double> cross;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double a = tr.states[i][0] - level, b = tr.states[i + 1][0] - level;
        if (a < 0 && b >= 0) {
            double h = t[i + 1] - t[i];
            double da = tr.states[i][1] * h, db = tr.states[i + 1][1] * h;
            auto hermite = [&](double s) {
                double s2 = s * s, s3 = s2 * s;
                return (2 * s3 - 3 * s2 + 1) * a + (s3 - 2 * s2 + s) * da + (-2 * s3 + 3 * s2) * b + (s3 - s2) * db;
            };
            double lo = 0, hi = 1;
            for (int it = 0; it < 60; ++it) {
                double mid = 0.5 * (lo + hi);
                (hermite(mid) < 0 ? lo : hi) = mid;
            }
            double s = 0.5 * (lo + hi);
            cross.push_back(t[i] + s * h);
        }
    }
    if (cross.size() < 2)
        fail(Errc::NonOscillatory, "signal does not cross its mean");
    if (cross.size() < 5)
        fail(Errc::TooFewCycles, "fewer than 4 full cycles");
    std::vector<double> d;
    for (std::size_t i = 0; i + 1 < cross.size(); ++i)
        d.push_back(cross[i + 1] - cross[i]);
    double mean = std::accumulate(d.begin(), d.end(), 0.0) / double(d.size());
    double var = 0;
    for (double v : d)
        var += (v - mean) * (v - mean);
    var /= double(d.size() - 1);
    return {mean, std::sqrt(var / double(d.size())), int(cross.size())};
}

struct IsochronyResult {
    bool isochronous;
    std::optional<double> omega0_sq;
    double max_deviation;
};

/// Evaluates g'(x) + f(x) g(x) on a uniform grid; constant means isochronous.
inline IsochronyResult check_isochronicity(const expr::Expr& f, const expr::Expr& g, const expr::Bindings& env, double lo,
    double hi, int n)
{
    if (n < 100)
        fail(Errc::DomainError, "grid needs n >= 100");
    std::vector<double> q(n);
    for (int i = 0; i < n; ++i) {
        double x = lo + (hi - lo) * i / (n - 1);
        expr::Bindings b = env;
        b["x"] = x;
        double gp = expr::numeric_derivative(g, "x", x, 1, env).value;
        q[i] = gp + expr::eval(f, b) * expr::eval(g, b);
        if (!std::isfinite(q[i]))
            fail(Errc::NonFinite, "g' + f g at x = " + std::to_string(x));
    }
    auto [mn, mx] = std::minmax_element(q.begin(), q.end());
    double mean = std::accumulate(q.begin(), q.end(), 0.0) / n;
    double dev = 0;
    for (double v : q)
        dev = std::max(dev, std::abs(v - mean));
    bool iso = (*mx - *mn) < 1e-6 * std::max(std::abs(mean), 1.0);
    return {iso, iso ? std::optional<double>(mean) : std::nullopt, dev};
}

/// X(x) = (g1/w0^2) [ int_0^x exp(int_0^s f) ds + g2/g1 ], nested adaptive Gauss-Kronrod.
inline double linearizing_transform(const expr::Expr& f, const expr::Bindings& env, double g1, double g2, double x,
    double omega0_sq = 0)
{
    if (!(g1 > 0))
        fail(Errc::DomainError, "g1 must be positive");
    if (omega0_sq <= 0)
        omega0_sq = g1;
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    auto check = [](double v, double err) {
        if (!std::isfinite(v) || err > 1e-8 * std::max(1.0, std::abs(v)))
            fail(Errc::QuadratureFailure, "adaptive Gauss-Kronrod did not reach 1e-10");
    };
    auto fx = [&](double s) {
        expr::Bindings b = env;
        b["x"] = s;
        return expr::eval(f, b);
    };
    auto outer = [&](double s) {
        double err = 0;
        double F = s == 0 ? 0 : GK::integrate(fx, 0.0, s, 15, 1e-10, &err);
        check(F, err);
        return std::exp(F);
    };
    double err = 0;
    double I = x == 0 ? 0 : GK::integrate(outer, 0.0, x, 15, 1e-10, &err);
    check(I, err);
    return g1 / omega0_sq * (I + g2 / g1);
}

struct NamedResidual {
    std::string name;
    double value;
};

/// Conservation check for the first integrals other than H.
inline std::vector<NamedResidual> first_integral_residual(const Model& m, const Trajectory& tr)
{
    auto residual = [&](auto&& I) {
        double I0 = I(tr.states.front());
        double r = 0;
        for (const auto& s : tr.states)
            r = std::max(r, std::abs(I(s) - I0));
        return r / std::max(std::abs(I0), 1e-12);
    };
    if (tr.states.empty())
        fail(Errc::NoFirstIntegral, "empty trajectory");
    if (m.name == ModelName::K_NONPOLY_ISOTONIC) {
        double w = m.par("omega0"), k = m.par("k"), g = m.par("g");
        auto base = [=](const State& s, bool printed) {
            double x = s[0], u = 1 + k * x * x;
            double pot = printed ? w * w * x : w * w * x * x;
            return s[1] * s[1] / (u * u) + pot / (u * u) + g / (x * x);
        };
        return {{"epsilon_printed", residual([&](const State& s) { return base(s, true); })},
            {"epsilon_corrected", residual([&](const State& s) { return base(s, false); })}};
    }
    if (m.dimension == 3) {
        auto C1 = [&](const State& s) {
            double st = std::sin(s[2]);
            return m.ang_metric(s[0]).v * st * st * s[4];
        };
        auto C2sq = [&](const State& s) {
            double st = std::sin(s[2]);
            double h = m.ang_metric(s[0]).v;
            return h * h * (s[3] * s[3] + st * st * s[4] * s[4]);
        };
        return {{"C1", residual(C1)}, {"C2sq", residual(C2sq)}};
    }
    fail(Errc::NoFirstIntegral, model_name(m.name));
}

struct Orbit {
    double energy;
    std::vector<double> x;
    std::vector<double> p;
};

namespace detail {

// Radial effective potential for 3D models carries C2^2/(2 h(r)).
inline double effective_potential(const Model& m, double x)
{
    double v = m.potential(x).v;
    if (m.dimension == 3 && m.params.count("C2")) {
        double c2 = m.par("C2");
        v += c2 * c2 / (2 * m.ang_metric(x).v);
    }
    return v;
}

}

/// Closed level sets H = E sampled uniformly in the angle of x = xc - R cos(theta).
inline std::vector<Orbit> phase_portrait(const Model& m, const std::vector<double>& energies, int samples)
{
    std::vector<Orbit> out;
    if (m.lienard_type == 2) {
        double w = m.par("omega"), k = m.par("k");
        double a = k * k / (9 * w * w);
        for (double E : energies) {
            double Hs = 2 * k * k * E / (9 * w * w * w * w);
            if (!(Hs > 0 && Hs < 1))
                fail(Errc::NoBoundedOrbit, "E = " + std::to_string(E));
            double X = std::sqrt(Hs / (a * (1 - Hs)));
            Orbit o{E, {}, {}};
            for (int j = 0; j < samples; ++j) {
                double th = 2 * M_PI * j / samples;
                double x = -X * std::cos(th);
                double b = 1 + a * x * x;
                double D = std::max(0.0, 1 - b * (1 - Hs));
                double q = (1 + (std::sin(th) >= 0 ? -1 : 1) * std::sqrt(D)) / b;
                o.x.push_back(x);
                o.p.push_back(3 * w * w / (2 * k) * (1 - q * q));
            }
            out.push_back(std::move(o));
        }
        return out;
    }

    const Interval& iv = m.domain.back();
    auto V = [&](double x) { return detail::effective_potential(m, x); };
    double lo = std::isfinite(iv.lo) ? iv.lo : -1e3, hi = std::isfinite(iv.hi) ? iv.hi : 1e3;
    double pad = 1e-9 * std::max(1.0, hi - lo);
    double best = 0, vbest = INFINITY;
    const int grid = 4001;
    for (int i = 1; i < grid; ++i) {
        double x = lo + pad + (hi - lo - 2 * pad) * i / grid;
        double v = V(x);
        if (std::isfinite(v) && v < vbest) {
            vbest = v;
            best = x;
        }
    }
    double step = (hi - lo) / grid;
    auto mn = boost::math::tools::brent_find_minima(V, std::max(lo + pad, best - step), std::min(hi - pad, best + step), 52);
    double xc = mn.first, vmin = mn.second;

    auto turning = [&](double E, double dir) {
        double bound = dir > 0 ? iv.hi : iv.lo;
        double a = xc, d = 1e-3 * std::max(1.0, std::abs(xc));
        for (int it = 0; it < 200; ++it) {
            double b = xc + dir * d;
            if (std::isfinite(bound) && dir * (b - bound) >= 0)
                b = 0.5 * (a + bound);
            if (std::abs(b) > 1e8 || (std::isfinite(bound) && std::abs(b - bound) < 1e-13 * std::max(1.0, std::abs(bound))))
                break;
            if (V(b) > E) {
                boost::math::tools::eps_tolerance<double> tol(50);
                std::uintmax_t iters = 200;
                auto r = boost::math::tools::toms748_solve([&](double x) { return V(x) - E; }, std::min(a, b),
                    std::max(a, b), tol, iters);
                return 0.5 * (r.first + r.second);
            }
            a = b;
            d *= 2;
        }
        fail(Errc::NoBoundedOrbit, "E = " + std::to_string(E));
    };

    for (double E : energies) {
        if (!(E > vmin))
            fail(Errc::NoBoundedOrbit, "E below the potential minimum");
        double xl = turning(E, -1), xr = turning(E, +1);
        double mid = 0.5 * (xl + xr), R = 0.5 * (xr - xl);
        Orbit o{E, {}, {}};
        for (int j = 0; j < samples; ++j) {
            double th = 2 * M_PI * j / samples;
            double x = mid - R * std::cos(th);
            double ke = std::max(0.0, E - V(x));
            double p = std::sqrt(2 * m.mass(x).v * ke);
            o.x.push_back(x);
            o.p.push_back(std::sin(th) >= 0 ? p : -p);
        }
        out.push_back(std::move(o));
    }
    return out;
}

}
