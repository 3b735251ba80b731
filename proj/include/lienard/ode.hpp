#pragma once

#include "lienard/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace lienard {

/// Dormand-Prince RK5(4) with PI step control and the standard 4th-order dense output.
template <std::size_t N>
struct Dopri5 {
    using State = std::array<double, N>;
    using Rhs = std::function<void(double, const State&, State&)>;
    /// Returns true to stop after the current accepted step.
    using StopFn = std::function<bool(double, const State&)>;

    struct Stats {
        long accepted = 0;
        long rejected = 0;
        long evaluations = 0;
    };

    struct Result {
        std::vector<double> times;
        std::vector<State> states;
        bool stopped_early = false;
        double t_stop = 0;
        State y_stop{};
        Stats stats;
    };

    Rhs rhs;
    double rtol = 1e-10;
    double atol = 1e-10;
    double h_max = 0;

    /// Integrates from t0 towards t_end (either direction) and returns the solution
    /// at every entry of `out` (monotone in the direction of integration).
    Result run(double t0, State y0, double t_end, const std::vector<double>& out, const StopFn& stop = {}) const
    {
        Result res;
        const double dir = t_end >= t0 ? 1.0 : -1.0;
        const double span = std::abs(t_end - t0);
        std::size_t next = 0;
        auto emit_before = [&](double t_hi, auto&& dense) {
            while (next < out.size() && dir * (out[next] - t_hi) <= 0) {
                res.times.push_back(out[next]);
                res.states.push_back(dense(out[next]));
                ++next;
            }
        };
        while (next < out.size() && dir * (out[next] - t0) <= 0) {
            if (out[next] == t0) {
                res.times.push_back(t0);
                res.states.push_back(y0);
            }
            ++next;
        }
        if (span == 0)
            return res;

        State k1, k2, k3, k4, k5, k6, k7, y1, ytmp;
        double t = t0;
        State y = y0;
        rhs(t, y, k1);
        ++res.stats.evaluations;
        double h = dir * initial_step(t, y, k1, span);
        double hmax = h_max > 0 ? h_max : span;
        double facold = 1e-4;
        bool last_rejected = false;
        int consecutive_bad = 0;

        while (dir * (t_end - t) > 0) {
            if (std::abs(h) > hmax)
                h = dir * hmax;
            if (dir * (t + h - t_end) > 0)
                h = t_end - t;
            if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
                fail(Errc::StepFailure, "step size underflow at t = " + std::to_string(t));

            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a21 * k1[i]);
            rhs(t + c2 * h, ytmp, k2);
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            rhs(t + c3 * h, ytmp, k3);
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            rhs(t + c4 * h, ytmp, k4);
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            rhs(t + c5 * h, ytmp, k5);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            rhs(t + h, ytmp, k6);
            for (std::size_t i = 0; i < N; ++i)
                y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            rhs(t + h, y1, k7);
            res.stats.evaluations += 6;

            double err = 0;
            bool finite = true;
            for (std::size_t i = 0; i < N; ++i) {
                double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
                err += (e / sc) * (e / sc);
                if (!std::isfinite(y1[i]) || !std::isfinite(k7[i]))
                    finite = false;
            }
            err = std::sqrt(err / N);
            if (!finite || !std::isfinite(err)) {
                h *= 0.25;
                ++res.stats.rejected;
                last_rejected = true;
                if (++consecutive_bad > 60)
                    fail(Errc::StepFailure, "non-finite state near t = " + std::to_string(t));
                continue;
            }

            double fac11 = std::pow(err, 0.2 - 0.04 * 0.75);
            double fac = fac11 / std::pow(facold, 0.04) / 0.9;
            fac = std::clamp(fac, 0.1, 5.0);
            double hnew = h / fac;

            if (err <= 1) {
                consecutive_bad = 0;
                facold = std::max(err, 1e-4);
                ++res.stats.accepted;
                // Dense output coefficients.
                State r1 = y, r2, r3, r4, r5;
                for (std::size_t i = 0; i < N; ++i) {
                    double ydiff = y1[i] - y[i];
                    double bspl = h * k1[i] - ydiff;
                    r2[i] = ydiff;
                    r3[i] = bspl;
                    r4[i] = ydiff - h * k7[i] - bspl;
                    r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
                }
                double told = t;
                t = (t + h == t_end) ? t_end : t + h;
                auto dense = [&](double tt) {
                    double th = (tt - told) / h, th1 = 1 - th;
                    State s;
                    for (std::size_t i = 0; i < N; ++i)
                        s[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
                    return s;
                };
                emit_before(t, dense);
                y = y1;
                k1 = k7;
                if (stop && stop(t, y)) {
                    res.stopped_early = dir * (t_end - t) > 0;
                    res.t_stop = t;
                    res.y_stop = y;
                    if (res.stopped_early)
                        return res;
                }
                if (last_rejected && std::abs(hnew) > std::abs(h))
                    hnew = h;
                last_rejected = false;
                h = hnew;
            } else {
                h /= std::min(5.0, fac11 / 0.9);
                ++res.stats.rejected;
                last_rejected = true;
            }
        }
        res.t_stop = t;
        res.y_stop = y;
        return res;
    }

private:
    double initial_step(double t, const State& y, const State& f0, double span) const
    {
        double dnf = 0, dny = 0;
        for (std::size_t i = 0; i < N; ++i) {
            double sk = atol + rtol * std::abs(y[i]);
            dnf += (f0[i] / sk) * (f0[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
        h = std::min(h, span);
        State y1, f1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h * f0[i];
        rhs(t + h, y1, f1);
        double der2 = 0;
        for (std::size_t i = 0; i < N; ++i) {
            double sk = atol + rtol * std::abs(y[i]);
            der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
        }
        der2 = std::sqrt(der2) / h;
        double der12 = std::max(std::abs(der2), std::sqrt(dnf));
        double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
        double r = std::min(100 * h, h1);
        return std::isfinite(r) && r > 0 ? std::min(r, span) : 1e-6;
    }

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                            d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                            d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

}
