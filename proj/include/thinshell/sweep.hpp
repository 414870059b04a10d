#pragma once

#include "thinshell/clifford.hpp"
#include "thinshell/core.hpp"
#include "thinshell/effective.hpp"
#include "thinshell/geometry.hpp"
#include "thinshell/shell.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <string>
#include <vector>

namespace thinshell {

struct SweepConfig {
    CurveDefinition curve;
    double m = 0.0;
    std::vector<double> eps{0.1, 0.07, 0.05, 0.035};
    int n_s = 192;
    int n_t = 0;                 // 0: default_transverse_cells(eps) per eps
    int count = 2;
    bool richardson = true;      // Romberg over (2^k n_s, 2^k n_t), k < richardson_levels
    int richardson_levels = 3;
    int effective_ns = 1024;
    int threads = 1;
    std::uint64_t seed = 20240917;
    double coupling = effective_coupling;
    bool quadratic_fit = false;
};

inline void validate(const SweepConfig& cfg) {
    if (cfg.eps.size() < 3) throw ConfigError("sweep: need at least three eps values");
    for (std::size_t i = 0; i < cfg.eps.size(); ++i) {
        if (!(cfg.eps[i] > 0.0)) throw ConfigError("sweep: eps values must be positive");
        if (i > 0 && !(cfg.eps[i] < cfg.eps[i - 1])) throw ConfigError("sweep: eps list must be strictly decreasing");
    }
    if (cfg.m < 0.0) throw ConfigError("sweep: m must be non-negative");
    if (cfg.count < 1 || cfg.count > 12) throw ConfigError("sweep: count must lie in 1..12");
    if (cfg.n_s < 32) throw ConfigError("sweep: ns must be >= 32");
    if (cfg.n_t != 0 && cfg.n_t < 8) throw ConfigError("sweep: nt must be >= 8");
    if (cfg.effective_ns < 16 || cfg.effective_ns % 2 != 0) throw ConfigError("sweep: effective ns must be even, >= 16");
    if (cfg.richardson_levels < 2 || cfg.richardson_levels > 4) throw ConfigError("sweep: richardson levels must lie in 2..4");
    if (cfg.threads < 1) throw ConfigError("sweep: threads must be >= 1");
}

/// Least-squares fit y = intercept + slope x (+ curvature x^2 when quadratic) with standard errors.
struct AffineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double curvature = 0.0;
    double intercept_se = 0.0;
    double slope_se = 0.0;
    int points = 0;
};

inline AffineFit fit_polynomial(const std::vector<double>& x, const std::vector<double>& y, bool quadratic = false) {
    const int n = static_cast<int>(x.size()), p = quadratic ? 3 : 2;
    require(n == static_cast<int>(y.size()) && n >= p + 1, "fit: need at least degree + 2 points");
    RMatrix design(n, p);
    RVector rhs(n);
    for (int i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = x[i];
        if (quadratic) design(i, 2) = x[i] * x[i];
        rhs[i] = y[i];
    }
    const RMatrix normal = design.transpose() * design;
    const RVector coef = normal.ldlt().solve(design.transpose() * rhs);
    const double sse = (design * coef - rhs).squaredNorm();
    const RMatrix cov = normal.inverse() * (sse / (n - p));
    AffineFit fit;
    fit.intercept = coef[0];
    fit.slope = coef[1];
    if (quadratic) fit.curvature = coef[2];
    fit.intercept_se = std::sqrt(std::max(0.0, cov(0, 0)));
    fit.slope_se = std::sqrt(std::max(0.0, cov(1, 1)));
    fit.points = n;
    return fit;
}

/// Observed order log2(|a - b| / |b - c|) from values on grids h, h/2, h/4.
inline double three_grid_order(double a, double b, double c) { return std::log2(std::abs(a - b) / std::abs(b - c)); }

/// r = mu - pi^2/(16 eps^2) - m/eps - m^2 + (4/pi^2) m^2.
inline double leading_residual(double mu, double eps, double m) {
    return mu - pi * pi / (16.0 * eps * eps) - m / eps - m * m + 4.0 * m * m / (pi * pi);
}

struct SweepPoint {
    double eps = 0.0;
    int n_s = 0;
    int n_t = 0;
    std::vector<double> mu;           // shell eigenvalues (extrapolated when richardson)
    std::vector<double> mu_coarse;
    std::vector<double> mu_fine;
    std::vector<double> residual;     // leading_residual per j
    bool converged = true;
};

struct AsymptoticsReport {
    std::string curve;
    double m = 0.0;
    bool richardson = true;
    int richardson_levels = 0;
    std::vector<SweepPoint> points;   // eps strictly decreasing
    std::vector<double> mu_effective; // mu_j(Upsilon), j <= count
    std::vector<AffineFit> fits;      // residual fit per j
    bool partial = false;

    double leading_constant() const { return pi * pi / 16.0; }
    double mass_square_constant() const { return m * m * (1.0 - 4.0 / (pi * pi)); }
};

inline SweepPoint solve_sweep_point(const CliffordFamily& family, const Curve& curve, const SweepConfig& cfg,
                                    double eps) {
    const ShellMetric2D metric(curve, eps);
    SweepPoint pt;
    pt.eps = eps;
    pt.n_s = cfg.n_s;
    pt.n_t = cfg.n_t > 0 ? cfg.n_t : default_transverse_cells(eps);
    LobpcgOptions opts;
    opts.seed = cfg.seed;
    if (cfg.richardson) {
        const RichardsonSpectrum r = richardson_shell_eigenvalues(family, metric, cfg.m, pt.n_s, pt.n_t, cfg.count, opts,
                                                                     cfg.richardson_levels);
        pt.mu = r.extrapolated;
        pt.mu_coarse = r.coarse;
        pt.mu_fine = r.fine;
        pt.converged = r.converged;
    } else {
        const SpectrumResult s = lowest_eigenvalues(assemble_shell(family, metric, cfg.m, pt.n_s, pt.n_t), cfg.count, opts);
        pt.mu.assign(s.eigenvalues.data(), s.eigenvalues.data() + s.eigenvalues.size());
        pt.mu_coarse = pt.mu;
        pt.converged = s.converged;
    }
    for (double mu : pt.mu) pt.residual.push_back(leading_residual(mu, eps, cfg.m));
    return pt;
}

/// Shell spectra over the eps list, residuals against the leading terms and affine fits per level.
inline AsymptoticsReport run_sweep(const SweepConfig& cfg) {
    validate(cfg);
    const Curve curve(cfg.curve);
    if (!curve.is_closed()) throw ConfigError("sweep: needs a closed curve");
    for (double e : cfg.eps)
        if (!(e < curve.injectivity_limit())) throw ConfigError("sweep: eps exceeds the injectivity guard");
    const CliffordFamily family(2);

    AsymptoticsReport rep;
    rep.curve = curve.name();
    rep.m = cfg.m;
    rep.richardson = cfg.richardson;
    rep.richardson_levels = cfg.richardson ? cfg.richardson_levels : 1;
    const RVector eff = effective_eigenvalues(
        assemble_effective(family, curve, cfg.effective_ns, EffectiveScheme::spectral, cfg.coupling), cfg.count);
    rep.mu_effective.assign(eff.data(), eff.data() + eff.size());

    rep.points.resize(cfg.eps.size());
    if (cfg.threads > 1) {
        std::vector<std::future<SweepPoint>> jobs;
        std::size_t next = 0;
        while (next < cfg.eps.size() || !jobs.empty()) {
            while (next < cfg.eps.size() && jobs.size() < static_cast<std::size_t>(cfg.threads)) {
                const double e = cfg.eps[next++];
                jobs.push_back(std::async(std::launch::async, [&, e] { return solve_sweep_point(family, curve, cfg, e); }));
            }
            SweepPoint pt = jobs.front().get();
            jobs.erase(jobs.begin());
            const auto pos = std::find(cfg.eps.begin(), cfg.eps.end(), pt.eps) - cfg.eps.begin();
            rep.points[pos] = std::move(pt);
        }
    } else {
        for (std::size_t i = 0; i < cfg.eps.size(); ++i) rep.points[i] = solve_sweep_point(family, curve, cfg, cfg.eps[i]);
    }

    for (const auto& pt : rep.points) rep.partial = rep.partial || !pt.converged;
    for (int j = 0; j < cfg.count; ++j) {
        std::vector<double> x, y;
        for (const auto& pt : rep.points) x.push_back(pt.eps), y.push_back(pt.residual[j]);
        rep.fits.push_back(fit_polynomial(x, y, cfg.quadratic_fit && x.size() >= 4));
    }
    return rep;
}

/// |r_j(eps) - mu_j(Upsilon)| decreases as eps decreases and keeps one sign.
inline bool residual_monotone(const AsymptoticsReport& rep, int j) {
    double prev = 0.0;
    int sign = 0;
    for (std::size_t i = 0; i < rep.points.size(); ++i) {
        const double gap = rep.points[i].residual[j] - rep.mu_effective[j];
        const int sg = gap > 0.0 ? 1 : (gap < 0.0 ? -1 : 0);
        if (i == 0) sign = sg;
        else if (sg != sign || !(std::abs(gap) < prev)) return false;
        prev = std::abs(gap);
    }
    return true;
}

struct CorollaryPoint {
    double eps = 0.0;
    int p = 0;
    double lambda = 0.0;                 // sqrt(mu_{2p})
    double linear_coeff_partial = 0.0;   // (lambda - pi/(4 eps) - 2m/pi) / eps
};

struct CorollaryReport {
    std::string curve;
    double m = 0.0;
    std::vector<CorollaryPoint> points;
    std::vector<double> reference_linear;   // (2/pi) mu_{2p}(Upsilon) + (2/pi) m^2 - (16/pi^3) m^2
    std::vector<AffineFit> fits;            // linear_coeff_partial vs eps, per p
    bool partial = false;
};

inline CorollaryReport corollary_from_sweep(const AsymptoticsReport& rep) {
    CorollaryReport out;
    out.curve = rep.curve;
    out.m = rep.m;
    out.partial = rep.partial;
    const double m = rep.m;
    const int levels = static_cast<int>(rep.mu_effective.size()) / 2;
    require(levels >= 1, "corollary: needs count >= 2");
    for (int p = 1; p <= levels; ++p) {
        out.reference_linear.push_back((2.0 / pi) * rep.mu_effective[2 * p - 1] + (2.0 / pi) * m * m -
                                       16.0 / (pi * pi * pi) * m * m);
        std::vector<double> x, y;
        for (const auto& pt : rep.points) {
            CorollaryPoint c;
            c.eps = pt.eps;
            c.p = p;
            c.lambda = std::sqrt(pt.mu[2 * p - 1]);
            c.linear_coeff_partial = (c.lambda - pi / (4.0 * pt.eps) - 2.0 * m / pi) / pt.eps;
            x.push_back(c.eps);
            y.push_back(c.linear_coeff_partial);
            out.points.push_back(c);
        }
        out.fits.push_back(fit_polynomial(x, y));
    }
    return out;
}

inline CorollaryReport run_corollary(SweepConfig cfg) {
    cfg.count = std::max(cfg.count, 2);
    if (cfg.count % 2 == 1) ++cfg.count;
    return corollary_from_sweep(run_sweep(cfg));
}

} // namespace thinshell
