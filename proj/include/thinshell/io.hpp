#pragma once

#include "thinshell/checks.hpp"
#include "thinshell/clifford.hpp"
#include "thinshell/core.hpp"
#include "thinshell/effective.hpp"
#include "thinshell/geometry.hpp"
#include "thinshell/sweep.hpp"
#include "thinshell/transverse.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace thinshell {

using Json = nlohmann::json;

/// Fixed-format number for reproducible CSV output.
inline std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

namespace detail {

template <class T>
T json_get(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

} // namespace detail

/// {"kind": "circle", "radius": R} | {"kind": "ellipse", "a": a, "b": b}
/// | {"kind": "fourier", "modes": [{"k": k, "re": x, "im": y}, ...]} | {"kind": "strip", "length": L}
inline CurveDefinition curve_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind")) throw ConfigError("curve: expected an object with a 'kind' field");
    CurveDefinition d;
    const std::string kind = detail::json_get<std::string>(j, "kind", "");
    d.table_size = detail::json_get<int>(j, "table_size", d.table_size);
    if (kind == "circle") {
        d.kind = CurveKind::circle;
        d.radius = detail::json_get<double>(j, "radius", 1.0);
        if (!(d.radius > 0.0)) throw ConfigError("curve: radius must be positive");
    } else if (kind == "ellipse") {
        d.kind = CurveKind::ellipse;
        d.a = detail::json_get<double>(j, "a", 2.0);
        d.b = detail::json_get<double>(j, "b", 1.0);
        if (!(d.a > 0.0 && d.b > 0.0)) throw ConfigError("curve: semi-axes must be positive");
    } else if (kind == "fourier") {
        d.kind = CurveKind::fourier;
        if (!j.contains("modes") || !j.at("modes").is_array()) throw ConfigError("curve: fourier needs a 'modes' array");
        for (const Json& m : j.at("modes")) {
            if (!m.is_object() || !m.contains("k")) throw ConfigError("curve: each mode needs 'k'");
            d.modes.push_back({detail::json_get<int>(m, "k", 0),
                               Complex(detail::json_get<double>(m, "re", 0.0), detail::json_get<double>(m, "im", 0.0))});
        }
    } else if (kind == "strip") {
        d.kind = CurveKind::strip;
        d.length = detail::json_get<double>(j, "length", 2.0 * pi);
        if (!(d.length > 0.0)) throw ConfigError("curve: strip length must be positive");
    } else {
        throw ConfigError("curve: unknown kind '" + kind + "'");
    }
    return d;
}

inline Json curve_to_json(const CurveDefinition& d) {
    switch (d.kind) {
    case CurveKind::circle: return {{"kind", "circle"}, {"radius", d.radius}};
    case CurveKind::ellipse: return {{"kind", "ellipse"}, {"a", d.a}, {"b", d.b}};
    case CurveKind::strip: return {{"kind", "strip"}, {"length", d.length}};
    case CurveKind::fourier: {
        Json modes = Json::array();
        for (const auto& m : d.modes) modes.push_back({{"k", m.k}, {"re", m.c.real()}, {"im", m.c.imag()}});
        return {{"kind", "fourier"}, {"modes", modes}};
    }
    }
    return {};
}

/// Job config {"curve": ..., "eps": [...], "m": .., "ns": .., "nt": .., "count": .., ...}.
inline SweepConfig sweep_config_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("job: expected a JSON object");
    SweepConfig c;
    if (j.contains("curve")) c.curve = curve_from_json(j.at("curve"));
    c.m = detail::json_get<double>(j, "m", c.m);
    c.eps = detail::json_get<std::vector<double>>(j, "eps", c.eps);
    c.n_s = detail::json_get<int>(j, "ns", c.n_s);
    c.n_t = detail::json_get<int>(j, "nt", c.n_t);
    c.count = detail::json_get<int>(j, "count", c.count);
    c.richardson = detail::json_get<bool>(j, "richardson", c.richardson);
    c.richardson_levels = detail::json_get<int>(j, "richardson_levels", c.richardson_levels);
    c.effective_ns = detail::json_get<int>(j, "effective_ns", c.effective_ns);
    c.threads = detail::json_get<int>(j, "threads", c.threads);
    c.seed = detail::json_get<std::uint64_t>(j, "seed", c.seed);
    c.coupling = detail::json_get<double>(j, "coupling", c.coupling);
    c.quadratic_fit = detail::json_get<bool>(j, "quadratic_fit", c.quadratic_fit);
    validate(c);
    return c;
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
}

/// {"n": n, "N": N, "alphas": [[[re, im], ...], ...]}, each matrix flattened row-major.
inline Json clifford_to_json(const CliffordFamily& family) {
    Json alphas = Json::array();
    for (const CMatrix& a : family.alphas()) {
        Json entries = Json::array();
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            for (Eigen::Index c = 0; c < a.cols(); ++c) entries.push_back({a(r, c).real(), a(r, c).imag()});
        alphas.push_back(entries);
    }
    return {{"n", family.n()}, {"N", family.size()}, {"alphas", alphas}};
}

inline void write_curve_csv(std::ostream& out, const Curve& curve, int samples) {
    out << "s,x,y,kappa\n";
    for (const CurvePoint& p : curve.sample(samples))
        out << format_number(p.s) << ',' << format_number(p.position.x()) << ',' << format_number(p.position.y()) << ','
            << format_number(p.curvature) << '\n';
}

inline void write_transverse_table(std::ostream& out, const std::vector<double>& masses, int bands) {
    out << "m,p,k,E,N\n";
    for (double m : masses)
        for (int p = 1; p <= bands; ++p)
            out << format_number(m) << ',' << p << ',' << format_number(solve_k(m, p)) << ','
                << format_number(energy(m, p)) << ',' << format_number(normalization(m, p)) << '\n';
}

inline void write_gauge_csv(std::ostream& out, const GaugeCheck& g) {
    out << "index,mu_eff,mu_mag_pair,abs_diff\n";
    for (std::size_t j = 0; j < g.mu_effective.size(); ++j)
        out << j + 1 << ',' << format_number(g.mu_effective[j]) << ',' << format_number(g.mu_magnetic_pair[j]) << ','
            << format_number(std::abs(g.mu_effective[j] - g.mu_magnetic_pair[j])) << '\n';
}

inline void write_sweep_csv(std::ostream& out, const AsymptoticsReport& rep) {
    out << "eps,j,mu_shell,residual,mu_eff_ref\n";
    for (const auto& pt : rep.points)
        for (std::size_t j = 0; j < pt.mu.size(); ++j)
            out << format_number(pt.eps) << ',' << j + 1 << ',' << format_number(pt.mu[j]) << ','
                << format_number(pt.residual[j]) << ',' << format_number(rep.mu_effective[j]) << '\n';
}

inline void write_corollary_csv(std::ostream& out, const CorollaryReport& rep) {
    out << "eps,p,lambda,linear_coeff_partial\n";
    for (const auto& pt : rep.points)
        out << format_number(pt.eps) << ',' << pt.p << ',' << format_number(pt.lambda) << ','
            << format_number(pt.linear_coeff_partial) << '\n';
}

/// Upper triangle (row <= col) of a Hermitian matrix as "row,col,re,im" lines, 0-based.
inline void write_triplets(std::ostream& out, const SparseMatrix& m) {
    out << "row,col,re,im\n";
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            if (it.row() <= it.col())
                out << it.row() << ',' << it.col() << ',' << format_number(it.value().real()) << ','
                    << format_number(it.value().imag()) << '\n';
}

inline Json fit_to_json(const AffineFit& f) {
    return {{"intercept", f.intercept}, {"slope", f.slope},       {"curvature", f.curvature},
            {"intercept_se", f.intercept_se}, {"slope_se", f.slope_se}, {"points", f.points}};
}

inline Json sweep_summary(const AsymptoticsReport& rep) {
    Json levels = Json::array();
    for (std::size_t j = 0; j < rep.fits.size(); ++j) {
        const double target = rep.mu_effective[j];
        levels.push_back({{"j", j + 1},
                          {"mu_effective", target},
                          {"fit", fit_to_json(rep.fits[j])},
                          {"intercept_error", std::abs(rep.fits[j].intercept - target)},
                          {"intercept_relative_error", std::abs(rep.fits[j].intercept - target) / std::abs(target)},
                          {"monotone", residual_monotone(rep, static_cast<int>(j))}});
    }
    Json eps = Json::array();
    for (const auto& pt : rep.points) eps.push_back(pt.eps);
    return {{"curve", rep.curve},
            {"m", rep.m},
            {"eps", eps},
            {"richardson", rep.richardson},
            {"richardson_levels", rep.richardson_levels},
            {"partial", rep.partial},
            {"constants", {{"leading", rep.leading_constant()}, {"mass_linear", rep.m}, {"mass_square", rep.mass_square_constant()}}},
            {"levels", levels},
            {"note", "O(eps) remainder is unquantified; tolerances are empirical"}};
}

inline Json corollary_summary(const CorollaryReport& rep) {
    Json levels = Json::array();
    for (std::size_t p = 0; p < rep.fits.size(); ++p)
        levels.push_back({{"p", p + 1},
                          {"reference_linear", rep.reference_linear[p]},
                          {"fit", fit_to_json(rep.fits[p])},
                          {"relative_error", std::abs(rep.fits[p].intercept - rep.reference_linear[p]) /
                                                 std::abs(rep.reference_linear[p])}});
    return {{"curve", rep.curve}, {"m", rep.m}, {"partial", rep.partial}, {"levels", levels}};
}

inline Json checks_summary(const std::vector<SuiteResult>& results) {
    Json suites = Json::array();
    bool all = true;
    for (const SuiteResult& r : results) {
        Json metrics = Json::object();
        for (const auto& [name, value] : r.metrics) metrics[name] = value;
        suites.push_back({{"name", r.name}, {"passed", r.passed}, {"seconds", r.seconds}, {"message", r.message},
                          {"metrics", metrics}});
        all = all && r.passed;
    }
    return {{"passed", all}, {"suites", suites}};
}

} // namespace thinshell
