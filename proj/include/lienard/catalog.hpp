#pragma once

#include "lienard/error.hpp"
#include "lienard/specfun.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lienard {

enum class ModelName {
    EXPONENTIAL,
    INVERSE,
    INVERSE_SQUARE_PLUS,
    INVERSE_SQUARE_MINUS,
    SINGULAR_DEFORM,
    POWER_LAW,
    MLO,
    HIGGS,
    K_NONPOLY,
    DELTA,
    MLO_ISOTONIC,
    HIGGS_ISOTONIC,
    K_NONPOLY_ISOTONIC,
    DELTA_ISOTONIC,
    MLO_3D,
    HIGGS_3D,
    K_NONPOLY_3D,
    MEE,
};

inline constexpr std::array<ModelName, 18> all_models = {
    ModelName::EXPONENTIAL, ModelName::INVERSE, ModelName::INVERSE_SQUARE_PLUS, ModelName::INVERSE_SQUARE_MINUS,
    ModelName::SINGULAR_DEFORM, ModelName::POWER_LAW, ModelName::MLO, ModelName::HIGGS, ModelName::K_NONPOLY,
    ModelName::DELTA, ModelName::MLO_ISOTONIC, ModelName::HIGGS_ISOTONIC, ModelName::K_NONPOLY_ISOTONIC,
    ModelName::DELTA_ISOTONIC, ModelName::MLO_3D, ModelName::HIGGS_3D, ModelName::K_NONPOLY_3D, ModelName::MEE};

inline const char* model_name(ModelName n)
{
    switch (n) {
    case ModelName::EXPONENTIAL: return "EXPONENTIAL";
    case ModelName::INVERSE: return "INVERSE";
    case ModelName::INVERSE_SQUARE_PLUS: return "INVERSE_SQUARE_PLUS";
    case ModelName::INVERSE_SQUARE_MINUS: return "INVERSE_SQUARE_MINUS";
    case ModelName::SINGULAR_DEFORM: return "SINGULAR_DEFORM";
    case ModelName::POWER_LAW: return "POWER_LAW";
    case ModelName::MLO: return "MLO";
    case ModelName::HIGGS: return "HIGGS";
    case ModelName::K_NONPOLY: return "K_NONPOLY";
    case ModelName::DELTA: return "DELTA";
    case ModelName::MLO_ISOTONIC: return "MLO_ISOTONIC";
    case ModelName::HIGGS_ISOTONIC: return "HIGGS_ISOTONIC";
    case ModelName::K_NONPOLY_ISOTONIC: return "K_NONPOLY_ISOTONIC";
    case ModelName::DELTA_ISOTONIC: return "DELTA_ISOTONIC";
    case ModelName::MLO_3D: return "MLO_3D";
    case ModelName::HIGGS_3D: return "HIGGS_3D";
    case ModelName::K_NONPOLY_3D: return "K_NONPOLY_3D";
    case ModelName::MEE: return "MEE";
    }
    return "?";
}

inline ModelName parse_model_name(const std::string& s)
{
    for (ModelName n : all_models)
        if (s == model_name(n))
            return n;
    fail(Errc::UnknownModel, s);
}

using Params = std::map<std::string, double>;

enum class EndKind { Regular, Singular, Infinite };

inline const char* end_kind_name(EndKind k)
{
    return k == EndKind::Regular ? "regular" : k == EndKind::Singular ? "singular" : "infinite";
}

struct Interval {
    double lo, hi;
    EndKind lo_kind, hi_kind;
    bool contains(double x) const { return x > lo && x < hi; }
};

/// Value and first two derivatives of a function of one variable.
struct D2 {
    double v, d1, d2;
};

/// An oscillator system: mass and potential (with derivatives) over its domain.
/// For MEE the coordinate of mass/potential is the momentum p (H = x^2/2m(p) + U(p)).
/// For 3D models mass/potential are radial and `ang_metric` is h(r) in the kinetic
/// term h(r)(theta'^2 + sin^2 theta phi'^2)/2.
struct Model {
    ModelName name;
    Params params;
    int dimension = 1;
    int lienard_type = 1;
    std::vector<Interval> domain;
    std::function<D2(double)> mass;
    std::function<D2(double)> potential;
    std::function<D2(double)> ang_metric;

    double par(const std::string& key) const { return params.at(key); }
    bool in_domain(double x) const
    {
        for (const auto& iv : domain)
            if (iv.contains(x))
                return true;
        return false;
    }
    const Interval* interval_of(double x) const
    {
        for (const auto& iv : domain)
            if (iv.contains(x))
                return &iv;
        return nullptr;
    }
    /// Liénard data for type I: x'' + f x'^2 + g = 0 with f = m'/2m, g = V'/m.
    double f(double x) const
    {
        if (lienard_type == 2)
            return par("k") * x;
        D2 m = mass(x);
        return m.d1 / (2 * m.v);
    }
    double g(double x) const
    {
        if (lienard_type == 2) {
            double k = par("k"), w = par("omega");
            return k * k * x * x * x / 9 + w * w * x;
        }
        return potential(x).d1 / mass(x).v;
    }
    /// x'' from the equation of motion: -f x'^2 - g (type I), -f x' - g (type II).
    double accel(double x, double v) const
    {
        return lienard_type == 2 ? -f(x) * v - g(x) : -f(x) * v * v - g(x);
    }
};

struct SolutionConstants {
    double A = 0;
    double delta = 0;
    double C1 = 0;
    double C2 = 0;
    double C3 = 0;
};

inline bool is_isotonic(ModelName n)
{
    return n == ModelName::MLO_ISOTONIC || n == ModelName::HIGGS_ISOTONIC || n == ModelName::K_NONPOLY_ISOTONIC
        || n == ModelName::DELTA_ISOTONIC;
}

inline bool is_3d(ModelName n) { return n == ModelName::MLO_3D || n == ModelName::HIGGS_3D || n == ModelName::K_NONPOLY_3D; }

inline std::vector<std::string> required_params(ModelName n)
{
    switch (n) {
    case ModelName::POWER_LAW: return {"omega0", "a", "nu"};
    case ModelName::HIGGS:
    case ModelName::K_NONPOLY:
    case ModelName::HIGGS_3D:
    case ModelName::K_NONPOLY_3D: return {"omega0", "k"};
    case ModelName::DELTA: return {"lambda"};
    case ModelName::MLO_ISOTONIC: return {"omega0", "lambda", "g"};
    case ModelName::HIGGS_ISOTONIC:
    case ModelName::K_NONPOLY_ISOTONIC: return {"omega0", "k", "g"};
    case ModelName::DELTA_ISOTONIC: return {"lambda", "g"};
    case ModelName::MEE: return {"omega", "k"};
    default: return {"omega0", "lambda"};
    }
}

namespace detail {

constexpr double inf = std::numeric_limits<double>::infinity();

inline Interval whole_line() { return {-inf, inf, EndKind::Infinite, EndKind::Infinite}; }

// Symmetric interval for deformations 1 + c x^2 with c < 0, whole line otherwise.
inline Interval curvature_interval(double c)
{
    if (c >= 0)
        return whole_line();
    double b = 1 / std::sqrt(-c);
    return {-b, b, EndKind::Singular, EndKind::Singular};
}

inline std::vector<Interval> half_lines(double c)
{
    double b = c >= 0 ? inf : 1 / std::sqrt(-c);
    EndKind hk = c >= 0 ? EndKind::Infinite : EndKind::Singular;
    return {{-b, 0, hk, EndKind::Singular}, {0, b, EndKind::Singular, hk}};
}

inline std::vector<Interval> radial(double c)
{
    double b = c >= 0 ? inf : 1 / std::sqrt(-c);
    return {{0, b, EndKind::Singular, c >= 0 ? EndKind::Infinite : EndKind::Singular}};
}

// m = 1/(1 + c x^2)
inline D2 mass_mlo(double c, double x)
{
    double u = 1 + c * x * x;
    return {1 / u, -2 * c * x / (u * u), -2 * c / (u * u) + 8 * c * c * x * x / (u * u * u)};
}

// m = (1 + c x^2)^-2
inline D2 mass_higgs(double c, double x)
{
    double u = 1 + c * x * x;
    return {1 / (u * u), -4 * c * x / (u * u * u), -4 * c / (u * u * u) + 24 * c * c * x * x / (u * u * u * u)};
}

inline D2 add_isotonic(D2 v, double g, double x)
{
    double x2 = x * x;
    return {v.v + g / (2 * x2), v.d1 - g / (x2 * x), v.d2 + 3 * g / (x2 * x2)};
}

}

inline Model get_model(ModelName name, const Params& params)
{
    using namespace detail;
    for (const auto& key : required_params(name))
        if (!params.count(key))
            fail(Errc::MissingParam, key);
    Model m;
    m.name = name;
    m.params = params;
    auto P = [&](const char* k) { return params.at(k); };
    auto require_g = [&] {
        if (!(P("g") > 0))
            fail(Errc::DomainViolation, "isotonic coupling requires g > 0");
    };

    switch (name) {
    case ModelName::EXPONENTIAL: {
        double w = P("omega0"), l = P("lambda");
        if (l == 0)
            fail(Errc::DomainViolation, "lambda must be nonzero");
        m.domain = {whole_line()};
        m.mass = [l](double x) {
            double v = l * l * std::exp(2 * l * x);
            return D2{v, 2 * l * v, 4 * l * l * v};
        };
        m.potential = [w, l](double x) {
            double e = std::exp(l * x);
            return D2{w * w / 2 * (1 - e) * (1 - e), -w * w * l * e * (1 - e), -w * w * l * l * e * (1 - 2 * e)};
        };
        break;
    }
    case ModelName::INVERSE: {
        double w = P("omega0"), l = P("lambda");
        if (l > 0)
            m.domain = {{-1 / l, inf, EndKind::Singular, EndKind::Infinite}};
        else if (l < 0)
            m.domain = {{-inf, -1 / l, EndKind::Infinite, EndKind::Singular}};
        else
            m.domain = {whole_line()};
        m.mass = [l](double x) {
            double q = 1 / (1 + l * x);
            double q4 = q * q * q * q;
            return D2{q4, -4 * l * q4 * q, 20 * l * l * q4 * q * q};
        };
        m.potential = [w, l](double x) {
            double q = 1 / (1 + l * x);
            return D2{w * w * x * x * q * q / 2, w * w * x * q * q * q, w * w * q * q * q * q * (1 - 2 * l * x)};
        };
        break;
    }
    case ModelName::INVERSE_SQUARE_PLUS:
    case ModelName::INVERSE_SQUARE_MINUS: {
        double w = P("omega0"), l = P("lambda");
        double s = name == ModelName::INVERSE_SQUARE_PLUS ? 1 : -1;
        double c = s * l * l;
        m.domain = {curvature_interval(c)};
        m.mass = [c](double x) {
            double u = 1 + c * x * x;
            double u4 = u * u * u * u;
            return D2{1 / (u * u * u), -6 * c * x / u4, -6 * c / u4 + 48 * c * c * x * x / (u4 * u)};
        };
        m.potential = [w, c](double x) {
            double u = 1 + c * x * x;
            return D2{w * w * x * x / (2 * u), w * w * x / (u * u), w * w * (1 - 3 * c * x * x) / (u * u * u)};
        };
        break;
    }
    case ModelName::SINGULAR_DEFORM: {
        double w = P("omega0"), l = P("lambda");
        if (l > 0)
            m.domain = {{-inf, 1 / l, EndKind::Infinite, EndKind::Singular}};
        else if (l < 0)
            m.domain = {{1 / l, inf, EndKind::Singular, EndKind::Infinite}};
        else
            m.domain = {whole_line()};
        // m = (lx - 2)^2 / (4 (1 - lx)^3), written in q = 1 - lx.
        m.mass = [l](double x) {
            double q = 1 - l * x;
            double q4 = q * q * q * q;
            return D2{(1 + q) * (1 + q) / (4 * q * q * q), l * (1 + q) * (q + 3) / (4 * q4),
                l * l * (q * q + 6 * q + 6) / (2 * q4 * q)};
        };
        m.potential = [w, l](double x) {
            double q = 1 - l * x;
            return D2{w * w * x * x / (2 * q), w * w * x * (2 - l * x) / (2 * q * q), w * w / (q * q * q)};
        };
        break;
    }
    case ModelName::POWER_LAW: {
        double w = P("omega0"), a = P("a"), nu = P("nu");
        if (!(nu > -1) || a == 0)
            fail(Errc::DomainViolation, "power law needs nu > -1 and a != 0");
        m.domain = {whole_line()};
        double c = a * a * (nu + 1) * (nu + 1);
        m.mass = [c, nu](double x) {
            double v = c * std::pow(std::abs(x), 2 * nu);
            return D2{v, 2 * nu * v / x, 2 * nu * (2 * nu - 1) * v / (x * x)};
        };
        m.potential = [w, a, nu](double x) {
            double ax = std::abs(x);
            double k = w * w * a * a;
            return D2{k * std::pow(ax, 2 * nu + 2) / 2, (nu + 1) * k * std::pow(ax, 2 * nu) * x,
                (nu + 1) * (2 * nu + 1) * k * std::pow(ax, 2 * nu)};
        };
        break;
    }
    case ModelName::MLO:
    case ModelName::MLO_ISOTONIC:
    case ModelName::MLO_3D: {
        // One sign convention, 1 + lambda x^2, for all MLO variants; the isotonic
        // system written with 1 - lambda x^2 is this model with lambda -> -lambda.
        double w = P("omega0"), l = P("lambda");
        double g = 0;
        if (name == ModelName::MLO_ISOTONIC) {
            require_g();
            g = P("g");
        }
        m.domain = name == ModelName::MLO ? std::vector<Interval>{curvature_interval(l)}
            : name == ModelName::MLO_3D   ? radial(l)
                                          : half_lines(l);
        m.mass = [l](double x) { return mass_mlo(l, x); };
        m.potential = [w, l, g](double x) {
            double u = 1 + l * x * x;
            D2 v{w * w * x * x / (2 * u), w * w * x / (u * u), w * w * (1 - 3 * l * x * x) / (u * u * u)};
            return g > 0 ? add_isotonic(v, g, x) : v;
        };
        if (name == ModelName::MLO_3D)
            m.ang_metric = [](double r) { return D2{r * r, 2 * r, 2}; };
        break;
    }
    case ModelName::HIGGS:
    case ModelName::HIGGS_ISOTONIC:
    case ModelName::HIGGS_3D:
    case ModelName::K_NONPOLY:
    case ModelName::K_NONPOLY_ISOTONIC:
    case ModelName::K_NONPOLY_3D: {
        double w = P("omega0"), k = P("k");
        double g = 0;
        bool iso = is_isotonic(name), three = is_3d(name);
        bool nonpoly = name == ModelName::K_NONPOLY || name == ModelName::K_NONPOLY_ISOTONIC || name == ModelName::K_NONPOLY_3D;
        if (iso) {
            require_g();
            g = P("g");
        }
        m.domain = three ? radial(k) : iso ? half_lines(k) : std::vector<Interval>{curvature_interval(k)};
        m.mass = [k](double x) { return mass_higgs(k, x); };
        if (nonpoly)
            m.potential = [w, k, g](double x) {
                double u = 1 + k * x * x;
                double u3 = u * u * u;
                D2 v{w * w * x * x / (2 * u * u), w * w * x * (1 - k * x * x) / u3,
                    w * w * (1 - 8 * k * x * x + 3 * k * k * x * x * x * x) / (u3 * u)};
                return g > 0 ? add_isotonic(v, g, x) : v;
            };
        else
            m.potential = [w, g](double x) {
                D2 v{w * w * x * x / 2, w * w * x, w * w};
                return g > 0 ? add_isotonic(v, g, x) : v;
            };
        if (three)
            m.ang_metric = [k](double r) {
                double u = 1 + k * r * r;
                return D2{r * r / u, 2 * r / (u * u), (2 - 6 * k * r * r) / (u * u * u)};
            };
        break;
    }
    case ModelName::DELTA:
    case ModelName::DELTA_ISOTONIC: {
        double l = P("lambda");
        double g = 0;
        if (name == ModelName::DELTA_ISOTONIC) {
            require_g();
            g = P("g");
        }
        m.domain = half_lines(0);
        m.mass = [](double x) {
            double x2 = x * x, x4 = x2 * x2;
            return D2{2 / x4, -8 / (x4 * x), 40 / (x4 * x2)};
        };
        m.potential = [l, g](double x) {
            D2 v{l * x * x, 2 * l * x, 2 * l};
            return g > 0 ? add_isotonic(v, g, x) : v;
        };
        break;
    }
    case ModelName::MEE: {
        double w = P("omega"), k = P("k");
        if (!(w > 0) || k == 0)
            fail(Errc::DomainViolation, "MEE needs omega > 0 and k != 0");
        double pmax = 3 * w * w / (2 * k);
        m.lienard_type = 2;
        m.domain = k > 0 ? std::vector<Interval>{{-inf, pmax, EndKind::Infinite, EndKind::Singular}}
                         : std::vector<Interval>{{pmax, inf, EndKind::Singular, EndKind::Infinite}};
        // s(p) = 1 - 2kp/(3 w^2); m(p) = 1/(w^2 s), U(p) = (9w^4/2k^2)(sqrt(s) - 1)^2.
        double c = 2 * k / (3 * w * w);
        m.mass = [w, c](double p) {
            double s = 1 - c * p;
            double m0 = 1 / (w * w * s);
            return D2{m0, m0 * c / s, 2 * m0 * c * c / (s * s)};
        };
        m.potential = [w, k, c](double p) {
            double s = 1 - c * p, q = std::sqrt(s);
            double K = 9 * w * w * w * w / (2 * k * k);
            // dU/dp = K (q - 1)/q * (-c)
            return D2{K * (q - 1) * (q - 1), -K * c * (q - 1) / q, K * c * c / (2 * s * q)};
        };
        break;
    }
    }
    m.dimension = is_3d(name) ? 3 : 1;
    return m;
}

inline Model get_model(const std::string& name, const Params& params) { return get_model(parse_model_name(name), params); }

/// Classical Hamiltonian. Type I: p^2/2m + V (3D: radial part without the
/// angular kinetic term). MEE: the nonstandard H(x, p).
inline double hamiltonian(const Model& m, double x, double p)
{
    if (m.lienard_type == 2) {
        double w = m.par("omega"), k = m.par("k");
        double s = 1 - 2 * k * p / (3 * w * w);
        return 9 * w * w * w * w / (2 * k * k) * (2 - 2 * k * p / (3 * w * w) - 2 * std::sqrt(s) + k * k * x * x / (9 * w * w) * s);
    }
    return p * p / (2 * m.mass(x).v) + m.potential(x).v;
}

/// Conjugate momentum of the MEE Lagrangian; bounded above by 3w^2/2k.
inline double mee_momentum(const Model& m, double x, double xdot)
{
    double w = m.par("omega"), k = m.par("k");
    double leg = k * xdot + k * k * x * x / 3 + 3 * w * w;
    if (leg == 0)
        fail(Errc::SingularLeg, "k xdot + k^2 x^2/3 + 3 w^2 = 0");
    return -27 * std::pow(w, 6) / (2 * k * leg * leg) + 3 * w * w / (2 * k);
}

inline double momentum(const Model& m, double x, double xdot)
{
    if (m.lienard_type == 2)
        return mee_momentum(m, x, xdot);
    return m.mass(x).v * xdot;
}

namespace detail {

[[noreturn]] inline void amplitude_error(const char* why) { fail(Errc::AmplitudeOutOfRange, why); }

inline double mlo_iso_omega2(double w, double l, double g, double A) { return w * w / (1 + l * A * A) - l * g / (A * A); }

struct HiggsIso {
    double omega_y, mean, R;
};

// Isotonic Higgs in y^2 = x^2/(1 + k x^2): y^2 oscillates harmonically at 2 omega_y.
inline HiggsIso higgs_iso(double w, double k, double g, double A)
{
    double E = w * w * A * A / 2 + g / (2 * A * A);
    double oy2 = w * w + 2 * k * E + g * k * k;
    double Ep = E + g * k;
    double R2 = Ep * Ep / (oy2 * oy2) - g / oy2;
    return {std::sqrt(oy2), Ep / oy2, std::sqrt(std::max(R2, 0.0))};
}

struct Higgs3D {
    double Omega, Lambda, eta;
};

inline Higgs3D higgs_3d(double w, double k, double C2, double C3)
{
    double disc = C3 * C3 - 4 * w * w * C2 * C2;
    if (!(disc > 0))
        amplitude_error("need C3^2 - 4 w0^2 C2^2 > 0");
    double D = k * k * C2 * C2 + k * C3 + w * w;
    if (!(D > 0))
        amplitude_error("need k^2 C2^2 + k C3 + w0^2 > 0");
    double sd = std::sqrt(disc);
    return {2 * std::sqrt(D), sd / (2 * D), (C3 + 2 * k * C2 * C2) / sd};
}

inline double mlo_3d_omega2(double w, double l, double C2, double A) { return w * w / (1 + l * A * A) - l * C2 * C2 / (A * A); }

}

/// Closed-form x(t) (r(t) for 3D radial models).
inline double closed_form_position(const Model& m, const SolutionConstants& c, double t)
{
    using detail::amplitude_error;
    double A = c.A;
    auto P = [&](const char* k) { return m.params.at(k); };
    switch (m.name) {
    case ModelName::EXPONENTIAL: {
        double w = P("omega0"), l = P("lambda");
        if (!(A > 0 && A * std::abs(l) < 1))
            amplitude_error("need 0 < A < 1/|lambda|");
        return std::log(1 - l * A * std::sin(w * t + c.delta)) / l;
    }
    case ModelName::INVERSE: {
        double w = P("omega0"), l = P("lambda");
        if (!(A > 0 && A * std::abs(l) < 1))
            amplitude_error("need 0 < A < 1/|lambda|");
        double s = std::sin(w * t + c.delta);
        return A * s / (1 - l * A * s);
    }
    case ModelName::INVERSE_SQUARE_PLUS:
    case ModelName::INVERSE_SQUARE_MINUS: {
        double w = P("omega0"), l = P("lambda");
        double sg = m.name == ModelName::INVERSE_SQUARE_PLUS ? 1 : -1;
        if (!(A > 0) || (sg > 0 && !(A * std::abs(l) < 1)))
            amplitude_error("need 0 < A (< 1/|lambda| for the plus branch)");
        double s = std::sin(w * t + c.delta);
        return A * s / std::sqrt(1 - sg * l * l * A * A * s * s);
    }
    case ModelName::SINGULAR_DEFORM: {
        double w = P("omega0"), l = P("lambda");
        if (!(A > 0 && A * std::abs(l) < 1))
            amplitude_error("need 0 < A < 1/|lambda|");
        double s = std::sin(w * t + c.delta);
        return A / 2 * s * (-l * A * s + std::sqrt(l * l * A * A * s * s + 4));
    }
    case ModelName::POWER_LAW: {
        double w = P("omega0"), a = P("a"), nu = P("nu");
        if (!(A > 0))
            amplitude_error("need A > 0");
        double S = A / a * std::sin(w * t + c.delta);
        return std::copysign(std::pow(std::abs(S), 1 / (nu + 1)), S);
    }
    case ModelName::MLO: {
        double w = P("omega0"), l = P("lambda");
        if (l < 0 && !(std::abs(A) < 1 / std::sqrt(-l)))
            amplitude_error("need |A| < |lambda|^-1/2");
        double W = w / std::sqrt(1 + l * A * A);
        return A * std::sin(W * t + c.delta);
    }
    case ModelName::HIGGS: {
        double w = P("omega0"), k = P("k");
        if (k > 0 && !(std::abs(A) < 1 / std::sqrt(k)))
            amplitude_error("need |A| < 1/sqrt(k)");
        double W = w / std::sqrt(1 - k * A * A);
        double s = std::sin(W * t + c.delta);
        return A * s / std::sqrt(1 - k * A * A * s * s);
    }
    case ModelName::K_NONPOLY: {
        double w = P("omega0"), k = P("k");
        double q = k * A * A;
        if (!(std::abs(q) < 1))
            amplitude_error("need |k| A^2 < 1");
        return A * sf::jacobi_sn(w * t / (1 + q) + c.delta, q * q);
    }
    case ModelName::DELTA: {
        double l = P("lambda");
        if (!(c.C1 > 0))
            amplitude_error("need C1 > 0");
        double s = c.C2 + std::sqrt(c.C1) * t;
        double d = l / c.C1 + s * s;
        if (!(d > 0))
            fail(Errc::DomainExit, "singular time reached");
        return 1 / std::sqrt(d);
    }
    case ModelName::MLO_ISOTONIC: {
        double w = P("omega0"), l = P("lambda"), g = P("g");
        if (!(A > 0 && m.in_domain(A)))
            amplitude_error("turning point outside the domain");
        double W2 = detail::mlo_iso_omega2(w, l, g, A);
        if (!(W2 > 0))
            amplitude_error("no bounded orbit through A");
        double inner = g / (W2 * A * A);
        double s = std::sin(std::sqrt(W2) * t + c.delta);
        return std::sqrt(inner + (A * A - inner) * s * s);
    }
    case ModelName::HIGGS_ISOTONIC: {
        double w = P("omega0"), k = P("k"), g = P("g");
        if (!(A > 0 && m.in_domain(A)))
            amplitude_error("turning point outside the domain");
        auto h = detail::higgs_iso(w, k, g, A);
        double y2 = h.mean - h.R * std::cos(2 * h.omega_y * t + c.delta);
        return std::sqrt(y2 / (1 - k * y2));
    }
    case ModelName::DELTA_ISOTONIC: {
        double l = P("lambda"), g = P("g");
        if (!(l > 0))
            amplitude_error("bounded motion needs lambda > 0");
        double W = std::sqrt(g / 2);
        return std::sqrt(g) / std::sqrt(std::sqrt(A * A + 2 * l * g) + A * std::cos(2 * W * t + c.delta));
    }
    case ModelName::MLO_3D: {
        double w = P("omega0"), l = P("lambda");
        if (!(A > 0 && m.in_domain(A)))
            amplitude_error("turning radius outside the domain");
        double W2 = detail::mlo_3d_omega2(w, l, c.C2, A);
        if (!(W2 > 0))
            amplitude_error("no bounded orbit through A");
        double beta = 1 - c.C2 * c.C2 / (W2 * A * A * A * A);
        double s = std::sin(std::sqrt(W2) * t + c.delta);
        return A * std::sqrt(1 - beta * s * s);
    }
    case ModelName::HIGGS_3D: {
        double w = P("omega0"), k = P("k");
        auto h = detail::higgs_3d(w, k, c.C2, c.C3);
        double s = std::sin(h.Omega * t + c.delta);
        return std::sqrt(h.Lambda * (h.eta + s) / (1 - k * h.eta * h.Lambda - k * h.Lambda * s));
    }
    case ModelName::MEE: {
        double w = P("omega"), k = P("k");
        if (!(A >= 0 && A < 3 * w / std::abs(k)))
            amplitude_error("need 0 <= A < 3 omega/k");
        double ph = w * t + c.delta;
        return A * std::sin(ph) / (1 - k * A / (3 * w) * std::cos(ph));
    }
    case ModelName::K_NONPOLY_ISOTONIC:
    case ModelName::K_NONPOLY_3D: fail(Errc::NoClosedForm, model_name(m.name));
    }
    fail(Errc::NoClosedForm, model_name(m.name));
}

inline bool has_closed_form(ModelName n) { return n != ModelName::K_NONPOLY_ISOTONIC && n != ModelName::K_NONPOLY_3D; }

/// Angular frequency of the motion x(t) (r(t) in 3D); none where the period is
/// elliptic or the motion is aperiodic. Isotonic and 3D radial motions depend on
/// sin^2 of the phase, so their frequency is twice the phase rate.
inline std::optional<double> analytic_frequency(const Model& m, const SolutionConstants& c)
{
    auto P = [&](const char* k) { return m.params.at(k); };
    double A = c.A;
    switch (m.name) {
    case ModelName::EXPONENTIAL:
    case ModelName::INVERSE:
    case ModelName::INVERSE_SQUARE_PLUS:
    case ModelName::INVERSE_SQUARE_MINUS:
    case ModelName::SINGULAR_DEFORM:
    case ModelName::POWER_LAW: return P("omega0");
    case ModelName::MEE: return P("omega");
    case ModelName::MLO: {
        double l = P("lambda");
        if (l < 0 && !(std::abs(A) < 1 / std::sqrt(-l)))
            detail::amplitude_error("need |A| < |lambda|^-1/2");
        return P("omega0") / std::sqrt(1 + l * A * A);
    }
    case ModelName::HIGGS: {
        double k = P("k");
        if (!(1 - k * A * A > 0))
            detail::amplitude_error("need |A| < 1/sqrt(k)");
        return P("omega0") / std::sqrt(1 - k * A * A);
    }
    case ModelName::MLO_ISOTONIC: {
        double W2 = detail::mlo_iso_omega2(P("omega0"), P("lambda"), P("g"), A);
        if (!(W2 > 0))
            detail::amplitude_error("no bounded orbit through A");
        return 2 * std::sqrt(W2);
    }
    case ModelName::HIGGS_ISOTONIC: return 2 * detail::higgs_iso(P("omega0"), P("k"), P("g"), A).omega_y;
    case ModelName::DELTA_ISOTONIC: return std::sqrt(2 * P("g"));
    case ModelName::MLO_3D: {
        double W2 = detail::mlo_3d_omega2(P("omega0"), P("lambda"), c.C2, A);
        if (!(W2 > 0))
            detail::amplitude_error("no bounded orbit through A");
        return 2 * std::sqrt(W2);
    }
    case ModelName::HIGGS_3D: return detail::higgs_3d(P("omega0"), P("k"), c.C2, c.C3).Omega;
    default: return std::nullopt;
    }
}

/// Energy of the closed-form orbit, equal to H at the turning point x = A
/// (respectively x_max = A/sqrt(1 - kA^2) for HIGGS).
inline double analytic_energy(const Model& m, const SolutionConstants& c)
{
    double A = c.A;
    switch (m.name) {
    case ModelName::MLO: {
        double w = m.par("omega0"), l = m.par("lambda");
        return w * w * A * A / (2 * (1 + l * A * A));
    }
    case ModelName::HIGGS: {
        double w = m.par("omega0"), k = m.par("k");
        if (!(1 - k * A * A > 0))
            detail::amplitude_error("need |A| < 1/sqrt(k)");
        return w * w * A * A / (2 * (1 - k * A * A));
    }
    case ModelName::K_NONPOLY: {
        double w = m.par("omega0"), k = m.par("k");
        double u = 1 + k * A * A;
        return w * w * A * A / (2 * u * u);
    }
    default: fail(Errc::NoEnergyLaw, model_name(m.name));
    }
}

}
