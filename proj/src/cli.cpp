#include "lienard/cli.hpp"

#include "lienard/classical.hpp"
#include "lienard/exprdsl.hpp"
#include "lienard/qes.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace lienard::cli {

namespace fs = std::filesystem;

const std::set<std::string>& job_kinds()
{
    static const std::set<std::string> k = {"integrate", "portrait", "period_scan", "spectrum_fd", "spectrum_shoot",
        "spectrum_compare", "qes", "residual", "isochrony_check", "linearize"};
    return k;
}

// ---------------------------------------------------------------- files

std::string sha256_hex(const std::string& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::string hex;
    char buf[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        fail(Errc::ConfigError, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string num(double v) { return expr::detail::fmt17(v); }

/// Comma-separated table with a header row; doubles at 17 significant digits.
class Csv {
public:
    explicit Csv(std::vector<std::string> header) : cols_(header.size())
    {
        row_strings(header);
    }
    void row(const std::vector<double>& v)
    {
        if (v.size() != cols_)
            fail(Errc::JobFailure, "csv row width mismatch");
        std::vector<std::string> s;
        for (double x : v)
            s.push_back(num(x));
        row_strings(s);
    }
    const std::string& str() const { return text_; }

private:
    void row_strings(const std::vector<std::string>& v)
    {
        for (std::size_t i = 0; i < v.size(); ++i)
            text_ += (i ? "," : "") + v[i];
        text_ += "\n";
    }
    std::size_t cols_;
    std::string text_;
};

void Sink::write(const std::string& suffix, const std::string& content)
{
    std::string name = job + suffix;
    std::ofstream out(dir / name, std::ios::binary);
    out << content;
    if (!out)
        fail(Errc::JobFailure, "cannot write " + (dir / name).string());
    files->push_back({name, sha256_hex(content), content.size()});
}


// ---------------------------------------------------------------- config

long line_of(const std::string& text, std::size_t byte)
{
    return 1 + long(std::count(text.begin(), text.begin() + long(std::min(byte, text.size())), '\n'));
}

[[noreturn]] inline void config_error(long line, const std::string& what)
{
    Error e(Errc::ConfigError, (line > 0 ? "line " + std::to_string(line) + ": " : "") + what);
    e.line = line;
    throw e;
}

Params read_params(const json& j)
{
    Params p;
    if (j.contains("params"))
        for (auto& [k, v] : j.at("params").items())
            p[k] = v.get<double>();
    return p;
}

quantum::Ordering read_ordering(const json& j)
{
    if (!j.contains("ordering"))
        return {};
    const json& o = j.at("ordering");
    if (o.contains("single"))
        return quantum::single_term(o.at("single").at(0).get<double>(), o.at("single").at(1).get<double>());
    quantum::Ordering r;
    r.alpha = o.value("alpha", 0.0);
    r.gamma = o.value("gamma", 0.0);
    r.alphagamma = o.value("alphagamma", 0.0);
    quantum::validate(r);
    return r;
}

bool uses_model(const std::string& kind) { return kind != "isochrony_check" && kind != "linearize" && kind != "qes"; }

Scenario parse_scenario(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        config_error(line_of(text, e.byte), e.what());
    }
    auto job_line = [&](const std::string& id) {
        auto pos = text.find("\"" + id + "\"");
        return pos == std::string::npos ? -1 : line_of(text, pos);
    };
    if (!doc.is_object() || !doc.contains("jobs") || !doc.at("jobs").is_array())
        config_error(1, "scenario needs a \"jobs\" array");
    Scenario s;
    s.id = doc.value("id", "scenario");
    s.output_dir = doc.value("output_dir", "");
    std::set<std::string> seen;
    for (const json& j : doc.at("jobs")) {
        if (!j.is_object() || !j.contains("id") || !j.at("id").is_string())
            config_error(-1, "every job needs a string id");
        Job job{j.at("id").get<std::string>(), j.value("kind", ""), j, -1};
        job.line = job_line(job.id);
        if (job.id.empty() || job.id.find_first_not_of("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_.-")
                != std::string::npos)
            config_error(job.line, "job id must use [A-Za-z0-9_.-]: " + job.id);
        if (!seen.insert(job.id).second)
            config_error(job.line, "duplicate job id " + job.id);
        if (!job_kinds().count(job.kind))
            config_error(job.line, "unknown job kind '" + job.kind + "' in " + job.id);
        if (uses_model(job.kind)) {
            if (!j.contains("model"))
                config_error(job.line, job.id + ": missing model");
            try {
                get_model(j.at("model").get<std::string>(), read_params(j));
            } catch (const std::exception& e) {
                config_error(job.line, job.id + ": " + e.what());
            }
        }
        s.jobs.push_back(std::move(job));
    }
    return s;
}

Scenario load_scenario(const fs::path& p) { return parse_scenario(read_file(p)); }

fs::path resolve_output_dir(const RunOptions& opt, const Scenario& s)
{
    if (!opt.out.empty())
        return opt.out;
    if (!s.output_dir.empty())
        return s.output_dir;
    if (const char* env = std::getenv("LIENARD_OUT"); env && *env)
        return env;
    return "lienard_out";
}

// ---------------------------------------------------------------- jobs

namespace {

std::vector<double> doubles(const json& j, const char* key, std::vector<double> def = {})
{
    return j.contains(key) ? j.at(key).get<std::vector<double>>() : def;
}

SolutionConstants constants(const json& c, double A)
{
    SolutionConstants k;
    k.A = A;
    k.delta = c.value("delta", M_PI / 2);
    k.C1 = c.value("C1", 0.0);
    k.C2 = c.value("C2", 0.0);
    k.C3 = c.value("C3", 0.0);
    return k;
}

/// Phase-space state at t = 0 of the closed-form orbit.
classical::State closed_form_state(const Model& m, const SolutionConstants& c)
{
    auto X = [&](double t) { return closed_form_position(m, c, t); };
    double x0 = X(0);
    classical::State s{x0, d1(X, 0.0), 0, 0, 0};
    if (m.dimension == 3) {
        s[2] = M_PI / 2;
        s[4] = c.C2 / m.ang_metric(x0).v;
    }
    return s;
}

/// Period law: 2 pi / frequency where one exists, the elliptic law for K_NONPOLY.
double analytic_period(const Model& m, const SolutionConstants& c)
{
    if (m.name == ModelName::K_NONPOLY) {
        double q = m.par("k") * c.A * c.A;
        return 4 * sf::ellipk(q * q) * (1 + q) / m.par("omega0");
    }
    auto w = analytic_frequency(m, c);
    if (!w)
        fail(Errc::NoFormula, std::string("no period law for ") + model_name(m.name));
    return 2 * M_PI / *w;
}

void job_integrate(const Job& job, Sink& out, JobResult& r)
{
    const json& j = job.spec;
    Model m = get_model(j.at("model").get<std::string>(), read_params(j));
    const json o = j.value("options", json::object());
    double tol = o.value("tol", 1e-10);
    double t_end = o.value("t_end", 20.0);
    classical::State s0{};
    std::optional<SolutionConstants> c;
    if (o.contains("constants")) {
        c = constants(o.at("constants"), o.at("constants").value("A", 0.0));
        s0 = closed_form_state(m, *c);
    } else {
        auto v = doubles(o, "initial");
        if (v.empty() || v.size() > 5)
            fail(Errc::ConfigError, "integrate needs options.initial or options.constants");
        std::copy(v.begin(), v.end(), s0.begin());
    }
    auto tr = classical::integrate(m, s0, t_end, tol);
    std::vector<std::string> head = {"t", "x", "xdot"};
    if (m.dimension == 3)
        head = {"t", "r", "rdot", "theta", "thetadot", "phidot"};
    head.push_back("p");
    head.push_back("H");
    if (c)
        head.push_back("x_closed_form");
    Csv csv(head);
    double sq = 0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        std::vector<double> row{tr.times[i]};
        for (int k = 0; k < (m.dimension == 3 ? 5 : 2); ++k)
            row.push_back(tr.states[i][k]);
        row.push_back(classical::state_momentum(m, tr.states[i]));
        row.push_back(tr.energy[i]);
        if (c) {
            double xc = closed_form_position(m, *c, tr.times[i]);
            row.push_back(xc);
            sq += (tr.states[i][0] - xc) * (tr.states[i][0] - xc);
        }
        csv.row(row);
    }
    out.write(".csv", csv.str());
    r.metrics["samples"] = tr.times.size();
    r.metrics["energy_drift"] = tr.meta.energy_drift;
    r.metrics["terminated_early"] = tr.meta.terminated_early;
    if (c)
        r.metrics["rms_error"] = std::sqrt(sq / double(tr.times.size()));
}

void job_portrait(const Job& job, Sink& out, JobResult& r)
{
    const json& j = job.spec;
    Model m = get_model(j.at("model").get<std::string>(), read_params(j));
    const json o = j.value("options", json::object());
    auto energies = doubles(o, "energies");
    if (energies.empty())
        fail(Errc::ConfigError, "portrait needs options.energies");
    auto orbits = classical::phase_portrait(m, energies, o.value("samples", 400));
    for (std::size_t i = 0; i < orbits.size(); ++i) {
        Csv csv({"x", "p"});
        for (std::size_t k = 0; k < orbits[i].x.size(); ++k)
            csv.row({orbits[i].x[k], orbits[i].p[k]});
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "_orbit%02zu.csv", i);
        out.write(suffix, csv.str());
    }
    Csv idx({"orbit", "energy"});
    for (std::size_t i = 0; i < orbits.size(); ++i)
        idx.row({double(i), orbits[i].energy});
    out.write("_energies.csv", idx.str());
    r.metrics["orbits"] = orbits.size();
}

void job_period_scan(const Job& job, Sink& out, JobResult& r)
{
    const json& j = job.spec;
    Model m = get_model(j.at("model").get<std::string>(), read_params(j));
    const json o = j.value("options", json::object());
    auto amps = doubles(o, "amplitudes");
    if (amps.empty())
        fail(Errc::ConfigError, "period_scan needs options.amplitudes");
    const json cj = o.value("constants", json::object());
    double periods = o.value("periods", 12.0);
    double tol = o.value("tol", 1e-12);
    Csv csv({"A", "T_measured", "T_analytic", "rel_err"});
    double worst = 0;
    for (double A : amps) {
        auto c = constants(cj, A);
        double Ta = analytic_period(m, c);
        auto tr = classical::integrate(m, closed_form_state(m, c), periods * Ta, tol);
        double T = classical::measure_period(tr).period;
        double rel = std::abs(T - Ta) / Ta;
        worst = std::max(worst, rel);
        csv.row({A, T, Ta, rel});
    }
    out.write(".csv", csv.str());
    r.metrics["max_rel_err"] = worst;
}

quantum::FdOptions fd_options(const json& o)
{
    quantum::FdOptions f;
    f.N = o.value("N", 2000);
    f.count = o.value("count", 6);
    f.hbar = o.value("hbar", 1.0);
    f.l = o.value("l", 0);
    f.richardson = o.value("richardson", true);
    f.tolerance = o.value("tolerance", 1e-3);
    if (o.contains("lo"))
        f.lo = o.at("lo").get<double>();
    if (o.contains("hi"))
        f.hi = o.at("hi").get<double>();
    return f;
}

void job_spectrum_fd(const Job& job, Sink& out, JobResult& r)
{
    const json& j = job.spec;
    Model m = get_model(j.at("model").get<std::string>(), read_params(j));
    const json o = j.value("options", json::object());
    auto f = fd_options(o);
    auto res = quantum::solve_spectrum_fd(m, read_ordering(j), f);
    Csv csv({"n", "E", "richardson_error"});
    for (std::size_t n = 0; n < res.eigenvalues.size(); ++n)
        csv.row({double(n), res.eigenvalues[n], res.richardson_error[n]});
    out.write(".csv", csv.str());
    if (o.value("eigenfunctions", false)) {
        std::vector<std::string> head{"x"};
        for (std::size_t n = 0; n < res.eigenfunctions.size(); ++n)
            head.push_back("psi" + std::to_string(n));
        Csv wf(head);
        auto grid = res.grid();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            std::vector<double> row{grid[i]};
            for (const auto& psi : res.eigenfunctions)
                row.push_back(psi[i]);
            wf.row(row);
        }
        out.write("_eigenfunctions.csv", wf.str());
    }
    double err = 0;
    for (double e : res.richardson_error)
        err = std::max(err, e);
    r.metrics["max_richardson_error"] = err;
    r.metrics["E0"] = res.eigenvalues.at(0);
    if (res.eigenvalues.size() >= 5)
        r.metrics["quadratic_coeff"] = quantum::spectrum_curvature(res).quadratic_coeff;
}

/// MEE by q-space shooting; other models shoot the Hermitian operator on its FD window.
std::vector<double> shoot(const Model& m, const quantum::Ordering& o, const json& opt)
{
    int count = opt.value("count", 5);
    double hbar = opt.value("hbar", 1.0);
    if (m.name == ModelName::MEE) {
        auto bc = opt.value("boundary", std::string("continued")) == "dirichlet" ? quantum::MeeBoundary::Dirichlet
                                                                                 : quantum::MeeBoundary::Continued;
        return quantum::mee_spectrum_shoot(m, count, hbar, bc);
    }
    int l = opt.value("l", 0);
    auto op = quantum::hermitian_operator(m, o, hbar, l);
    auto w = quantum::default_window(m, o, count, hbar, l);
    double h2 = hbar * hbar;
    quantum::LinearOde ode;
    ode.P = [op](double x) { return op.df(x) / op.f(x); };
    ode.Q0 = [op, h2](double x) { return -2 * op.W(x) / (h2 * op.f(x)); };
    ode.Q1 = [op, h2](double x) { return 2 / (h2 * op.f(x)); };
    double lo = w.lo, hi = w.hi;
    // Finite domain ends are singular points of W; start just inside them.
    auto inward = [&](double x, double dir) {
        for (double d = 1e-9; !std::isfinite(quantum::detail::safe_W(op, x)) && d < 1e-2; d *= 10)
            x = (dir > 0 ? w.lo : w.hi) + dir * d * (w.hi - w.lo);
        return x;
    };
    lo = inward(lo, 1);
    hi = inward(hi, -1);
    double xm = lo + (hi - lo) * opt.value("match", 0.5137);
    double Emin = opt.value("E_min", 0.0), Emax = opt.value("E_max", 20.0);
    return quantum::shoot_spectrum(ode, lo, hi, xm, Emin, Emax, opt.value("dE", 0.05), count);
}

void job_spectrum_shoot(const Job& job, Sink& out, JobResult& r)
{
    const json& j = job.spec;
    Model m = get_model(j.at("model").get<std::string>(), read_params(j));
    auto E = shoot(m, read_ordering(j), j.value("options", json::object()));
    Csv csv({"n", "E"});
    for (std::size_t n = 0; n < E.size(); ++n)
        csv.row({double(n), E[n]});
    out.write(".csv", csv.str());
    r.metrics["levels"] = E.size();
    if (!E.empty())
        r.metrics["E0"] = E[0];
}

void job_spectrum_compare(const Job& job, Sink& out, JobResult& r)
{
    const json& j = job.spec;
    Model m = get_model(j.at("model").get<std::string>(), read_params(j));
    const json o = j.value("options", json::object());
    auto ord = read_ordering(j);
    std::vector<double> E;
    if (o.value("backend", std::string("fd")) == "shooting")
        E = shoot(m, ord, o);
    else
        E = quantum::solve_spectrum_fd(m, ord, fd_options(o)).eigenvalues;
    bool derived = o.value("formula", std::string("printed")) == "derived";
    double hbar = o.value("hbar", 1.0);
    int l = o.value("l", 0);
    Csv csv({"n", "E_computed", "E_analytic", "rel_error"});
    double worst = 0;
    for (std::size_t n = 0; n < E.size(); ++n) {
        double Ea = derived ? quantum::derived_spectrum(m, ord, int(n), hbar, l)
                            : quantum::analytic_spectrum(m, ord, int(n), hbar, l);
        double rel = std::abs(E[n] - Ea) / std::max(std::abs(Ea), 1e-300);
        worst = std::max(worst, rel);
        csv.row({double(n), E[n], Ea, rel});
    }
    out.write(".csv", csv.str());
    r.metrics["max_rel_error"] = worst;
}

void job_qes(const Job& job, Sink& out, JobResult& r)
{
    const json& j = job.spec;
    const json o = j.value("options", json::object());
    auto v = qes::parse_variant(j.at("variant").get<std::string>());
    qes::System sys;
    Params p = read_params(j);
    auto get = [&](const char* k, double d) { return p.count(k) ? p.at(k) : d; };
    sys.omega0 = get("omega0", sys.omega0);
    sys.k = get("k", sys.k);
    sys.g = get("g", sys.g);
    sys.lambda = get("lambda", sys.lambda);
    sys.hbar = get("hbar", sys.hbar);
    sys.ordering = read_ordering(j);
    double l = o.value("l", 0.0);
    if (v == qes::Variant::K_ISO && !o.contains("l"))
        l = qes::isotonic_l(sys.g, sys.hbar);
    if (v == qes::Variant::DELTA_ISO && !o.contains("l"))
        l = qes::delta_l(sys.lambda, sys.hbar);
    auto levels = o.contains("n") ? std::vector<int>{o.at("n").get<int>()} : o.value("levels", std::vector<int>{0, 1, 2});
    json sols = json::array();
    Csv csv({"n", "energy", "sigma", "root_residual", "ode_residual", "nodes"});
    double worst_root = 0, worst_ode = 0, worst_sigma = 0;
    int node_mismatch = 0;
    for (int n : levels) {
        auto s = qes::solve(v, n, l, sys);
        sols.push_back(qes::to_json(s));
        csv.row({double(n), s.energy, s.sigma, s.root_residual, s.ode_residual, double(s.nodes)});
        worst_root = std::max(worst_root, s.root_residual);
        worst_ode = std::max(worst_ode, s.ode_residual);
        worst_sigma = std::max(worst_sigma, std::abs(s.sigma - s.sigma_energy));
        node_mismatch += s.nodes != n;
    }
    out.write(".csv", csv.str());
    out.write(".json", json{{"variant", qes::variant_name(v)}, {"l", l}, {"solutions", sols}}.dump(2) + "\n");
    r.metrics["max_root_residual"] = worst_root;
    r.metrics["max_ode_residual"] = worst_ode;
    r.metrics["max_sigma_disagreement"] = worst_sigma;
    r.metrics["node_mismatches"] = node_mismatch;
}

/// Eigenfunction residuals: "analytic" (position-space closed forms), "mee",
/// "mee_broken", "delta" (Bessel, single-term ordering).
void job_residual(const Job& job, Sink& out, JobResult& r)
{
    const json& j = job.spec;
    Model m = get_model(j.at("model").get<std::string>(), read_params(j));
    const json o = j.value("options", json::object());
    auto ord = read_ordering(j);
    std::string source = o.value("source", std::string("analytic"));
    double hbar = o.value("hbar", 1.0);
    int samples = o.value("samples", 8001);
    auto levels = o.value("levels", std::vector<int>{0, 1, 2});
    Csv csv({"n", "E", "residual"});
    double worst = 0;
    for (int n : levels) {
        double res = 0, E = 0;
        if (source == "mee" || source == "mee_broken") {
            bool broken = source == "mee_broken";
            E = quantum::analytic_spectrum(m, ord, n, hbar, 0, broken);
            double w = m.par("omega"), k = m.par("k");
            double ps = 3 * w * w / (2 * k);
            double lo = broken ? ps * 1.02 : ps - o.value("span", 8.0), hi = broken ? ps + o.value("span", 8.0) : ps * 0.98;
            if (!broken && o.contains("lo"))
                lo = o.at("lo").get<double>();
            auto psi = quantum::sample([&](double p) { return quantum::mee_eigenfunction(m, n, p, hbar, broken); }, lo, hi, samples);
            res = quantum::eigenfunction_residual(quantum::mee_ode(m, hbar), lo, hi, psi, quantum::cplx(E)).value;
        } else if (source == "delta") {
            // Each Bessel order needs its own coupling unless one is given.
            Model md = m;
            if (!o.value("fixed_lambda", false))
                md = get_model(ModelName::DELTA, {{"lambda", quantum::delta_lambda(n, ord, hbar)}});
            E = o.value("energy", 1.0);
            double zlo = o.value("z_lo", 0.3), zhi = o.value("z_hi", 15.0);
            double lo = 2 * std::sqrt(E) / (hbar * zhi), hi = 2 * std::sqrt(E) / (hbar * zlo);
            auto psi = quantum::sample([&](double x) { return quantum::delta_eigenfunction(n, E, ord, x, hbar); }, lo, hi, samples);
            res = quantum::eigenfunction_residual(quantum::single_term_ode(md, ord, hbar), lo, hi, psi, E);
        } else if (source == "analytic") {
            E = quantum::analytic_spectrum(m, ord, n, hbar);
            auto w = quantum::default_window(m, ord, n + 1, hbar);
            double lo = o.value("lo", w.lo), hi = o.value("hi", w.hi);
            auto psi = quantum::sample([&](double x) { return quantum::analytic_eigenfunction(m, ord, n, x, hbar); }, lo, hi, samples);
            res = quantum::eigenfunction_residual(quantum::hermitian_ode(quantum::hermitian_operator(m, ord, hbar)), lo, hi, psi, E);
        } else {
            fail(Errc::ConfigError, "unknown residual source " + source);
        }
        worst = std::max(worst, res);
        csv.row({double(n), E, res});
    }
    out.write(".csv", csv.str());
    r.metrics["max_residual"] = worst;
}

expr::Bindings bindings(const json& o)
{
    expr::Bindings b;
    if (o.contains("bindings"))
        for (auto& [k, v] : o.at("bindings").items())
            b[k] = v.get<double>();
    return b;
}

void job_isochrony(const Job& job, Sink& out, JobResult& r)
{
    const json& j = job.spec;
    auto f = expr::parse(j.at("f").get<std::string>());
    auto g = expr::parse(j.at("g").get<std::string>());
    const json o = j.value("options", json::object());
    auto res = classical::check_isochronicity(f, g, bindings(j), o.value("lo", -1.0), o.value("hi", 1.0), o.value("n", 201));
    json doc{{"isochronous", res.isochronous}, {"max_deviation", res.max_deviation}};
    doc["omega0_sq"] = res.omega0_sq ? json(*res.omega0_sq) : json(nullptr);
    out.write(".json", doc.dump(2) + "\n");
    r.metrics["isochronous"] = res.isochronous;
    r.metrics["max_deviation"] = res.max_deviation;
    if (res.omega0_sq)
        r.metrics["omega0_sq"] = *res.omega0_sq;
}

void job_linearize(const Job& job, Sink& out, JobResult& r)
{
    const json& j = job.spec;
    auto f = expr::parse(j.at("f").get<std::string>());
    const json o = j.value("options", json::object());
    auto env = bindings(j);
    double g1 = o.value("g1", 1.0), g2 = o.value("g2", 0.0), w2 = o.value("omega0_sq", 0.0);
    double lo = o.value("lo", -1.0), hi = o.value("hi", 1.0);
    int n = o.value("n", 101);
    Csv csv({"x", "X"});
    for (int i = 0; i < n; ++i) {
        double x = n > 1 ? lo + (hi - lo) * i / (n - 1) : lo;
        csv.row({x, classical::linearizing_transform(f, env, g1, g2, x, w2)});
    }
    out.write(".csv", csv.str());
    r.metrics["points"] = n;
}

}

/// Compares declared bounds and expectations with the job's metrics.
void apply_checks(const Job& job, JobResult& r, double tol_scale)
{
    const json& j = job.spec;
    if (j.contains("tolerances"))
        for (auto& [k, v] : j.at("tolerances").items()) {
            Check c{k, NAN, v.get<double>() * tol_scale, false};
            if (r.metrics.contains(k) && r.metrics.at(k).is_number()) {
                c.value = r.metrics.at(k).get<double>();
                c.pass = c.value <= c.bound;
            }
            r.checks.push_back(c);
        }
    if (j.contains("expect"))
        for (auto& [k, v] : j.at("expect").items()) {
            Check c{k, NAN, NAN, false, true};
            if (v.is_number())
                c.bound = v.get<double>();
            else if (v.is_boolean())
                c.bound = v.get<bool>();
            if (r.metrics.contains(k)) {
                const json& mv = r.metrics.at(k);
                c.value = mv.is_boolean() ? double(mv.get<bool>()) : mv.is_number() ? mv.get<double>() : NAN;
                c.pass = c.value == c.bound;
            }
            r.checks.push_back(c);
        }
    if (r.status == "ok")
        for (const auto& c : r.checks)
            if (!c.pass)
                r.status = "tolerance_failed";
}

JobResult run_job(const Job& job, const fs::path& dir, double tol_scale)
{
    JobResult r;
    r.id = job.id;
    r.kind = job.kind;
    Sink sink{dir, job.id, &r.files};
    auto t0 = std::chrono::steady_clock::now();
    try {
        if (job.kind == "integrate")
            job_integrate(job, sink, r);
        else if (job.kind == "portrait")
            job_portrait(job, sink, r);
        else if (job.kind == "period_scan")
            job_period_scan(job, sink, r);
        else if (job.kind == "spectrum_fd")
            job_spectrum_fd(job, sink, r);
        else if (job.kind == "spectrum_shoot")
            job_spectrum_shoot(job, sink, r);
        else if (job.kind == "spectrum_compare")
            job_spectrum_compare(job, sink, r);
        else if (job.kind == "qes")
            job_qes(job, sink, r);
        else if (job.kind == "residual")
            job_residual(job, sink, r);
        else if (job.kind == "isochrony_check")
            job_isochrony(job, sink, r);
        else
            job_linearize(job, sink, r);
    } catch (const std::exception& e) {
        r.status = "failed";
        r.error = "JobFailure(" + job.id + "): " + e.what();
    }
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    apply_checks(job, r, tol_scale);
    return r;
}

json to_json(const JobResult& r)
{
    json files = json::array(), checks = json::array();
    for (const auto& f : r.files)
        files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    for (const auto& c : r.checks)
        checks.push_back({{"metric", c.metric}, {"value", std::isfinite(c.value) ? json(c.value) : json(nullptr)},
            {"bound", std::isfinite(c.bound) ? json(c.bound) : json(nullptr)}, {"relation", c.equality ? "==" : "<="},
            {"pass", c.pass}});
    json j{{"id", r.id}, {"kind", r.kind}, {"status", r.status}, {"wall_time", r.wall_time}, {"metrics", r.metrics},
        {"checks", checks}, {"files", files}};
    if (!r.error.empty())
        j["error"] = r.error;
    return j;
}


RunSummary run_scenario(const Scenario& s, const RunOptions& opt)
{
    RunSummary sum;
    sum.output_dir = resolve_output_dir(opt, s);
    fs::create_directories(sum.output_dir);
    sum.results.resize(s.jobs.size());
    auto t0 = std::chrono::steady_clock::now();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < s.jobs.size();)
            sum.results[i] = run_job(s.jobs[i], sum.output_dir, opt.tol_scale);
    };
    int threads = std::max(1, std::min<int>(opt.jobs, int(s.jobs.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    json jobs = json::array(), files = json::array();
    for (const auto& r : sum.results) {
        jobs.push_back(to_json(r));
        for (const auto& f : r.files)
            files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}, {"job", r.id}});
        sum.ok = sum.ok && r.status == "ok";
    }
    json manifest{{"scenario", s.id}, {"tol_scale", opt.tol_scale}, {"status", sum.ok ? "ok" : "failed"}, {"jobs", jobs},
        {"files", files}, {"wall_time", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    sum.manifest = sum.output_dir / "manifest.json";
    std::ofstream(sum.manifest, std::ios::binary) << manifest.dump(2) << "\n";
    return sum;
}

// ---------------------------------------------------------------- list / report


std::vector<ModelInfo> list_models(std::optional<int> lienard_type, std::optional<int> dimension)
{
    std::vector<ModelInfo> out;
    for (ModelName n : all_models) {
        Params p;
        for (const auto& k : required_params(n))
            p[k] = 0.1;
        Model m = get_model(n, p);
        if ((lienard_type && m.lienard_type != *lienard_type) || (dimension && m.dimension != *dimension))
            continue;
        bool freq = n != ModelName::K_NONPOLY && n != ModelName::DELTA && has_closed_form(n);
        bool spec = n == ModelName::EXPONENTIAL || n == ModelName::INVERSE || n == ModelName::MLO || n == ModelName::HIGGS
            || n == ModelName::MLO_ISOTONIC || n == ModelName::HIGGS_ISOTONIC || n == ModelName::DELTA_ISOTONIC
            || n == ModelName::MLO_3D || n == ModelName::HIGGS_3D || n == ModelName::MEE;
        bool q = n == ModelName::K_NONPOLY || n == ModelName::K_NONPOLY_ISOTONIC || n == ModelName::K_NONPOLY_3D
            || n == ModelName::DELTA_ISOTONIC;
        out.push_back({model_name(n), m.dimension, m.lienard_type, required_params(n), has_closed_form(n), freq, spec, q});
    }
    return out;
}

std::string format_models(const std::vector<ModelInfo>& ms)
{
    std::string s;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-22s %-4s %-5s %-24s %-7s %-7s %-7s %s\n", "model", "dim", "type", "params", "closed",
        "freq", "spectr", "qes");
    s += buf;
    auto yn = [](bool b) { return b ? "yes" : "no"; };
    for (const auto& m : ms) {
        std::string p;
        for (const auto& k : m.params)
            p += (p.empty() ? "" : ",") + k;
        std::snprintf(buf, sizeof buf, "%-22s %-4d %-5s %-24s %-7s %-7s %-7s %s\n", m.name.c_str(), m.dimension,
            m.lienard_type == 2 ? "II" : "I", p.c_str(), yn(m.closed_form), yn(m.frequency_law), yn(m.spectrum_formula),
            yn(m.qes));
        s += buf;
    }
    return s;
}

Report emit_report(const json& manifest)
{
    Report rep;
    rep.summary = {{"jobs", json::array()}, {"passed", 0}, {"failed", 0}};
    std::vector<json> jobs;
    if (manifest.contains("jobs"))
        for (const auto& j : manifest.at("jobs"))
            jobs.push_back(j);
    std::sort(jobs.begin(), jobs.end(), [](const json& a, const json& b) { return a.at("id") < b.at("id"); });
    std::vector<std::string> failed;
    char buf[512];
    for (const auto& j : jobs) {
        std::string id = j.at("id"), status = j.value("status", "failed");
        bool pass = status == "ok";
        std::vector<json> checks;
        if (j.contains("checks"))
            for (const auto& c : j.at("checks"))
                checks.push_back(c);
        std::sort(checks.begin(), checks.end(), [](const json& a, const json& b) { return a.at("metric") < b.at("metric"); });
        std::snprintf(buf, sizeof buf, "%-28s %-16s %-4s\n", id.c_str(), j.value("kind", "").c_str(), pass ? "PASS" : "FAIL");
        rep.text += buf;
        if (j.contains("error")) {
            rep.text += "    " + j.at("error").get<std::string>() + "\n";
        }
        for (const auto& c : checks) {
            auto show = [](const json& v) {
                char b[32];
                std::snprintf(b, sizeof b, "%.6g", v.is_number() ? v.get<double>() : NAN);
                return std::string(v.is_number() ? b : "n/a");
            };
            std::snprintf(buf, sizeof buf, "    %-24s %-12s %-2s %-12s %s\n", c.at("metric").get<std::string>().c_str(),
                show(c.at("value")).c_str(), c.value("relation", "<=").c_str(), show(c.at("bound")).c_str(),
                c.at("pass").get<bool>() ? "ok" : "FAIL");
            rep.text += buf;
        }
        rep.summary["jobs"].push_back({{"id", id}, {"status", status}, {"pass", pass}, {"checks", checks}});
        if (pass)
            rep.summary["passed"] = rep.summary["passed"].get<int>() + 1;
        else {
            rep.summary["failed"] = rep.summary["failed"].get<int>() + 1;
            failed.push_back(id);
        }
    }
    rep.ok = failed.empty();
    for (const auto& id : failed)
        rep.text += "hint: job '" + id + "' failed; rerun its scenario or inspect its metrics\n";
    rep.summary["failed_jobs"] = failed;
    return rep;
}

}
