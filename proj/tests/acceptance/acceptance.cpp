// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "thinshell/thinshell.hpp"

#include "oracles/reference.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace thinshell;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

RVector random_unit(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    RVector x(n);
    for (int i = 0; i < n; ++i) x[i] = g(rng);
    return x / x.norm();
}

SpinorFunction random_spinor(std::mt19937_64& rng, int size) {
    std::normal_distribution<double> g;
    CMatrix c(size, 6);
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = Complex(g(rng), g(rng));
    auto value = [c](double t) {
        CVector v = c.col(0) + c.col(1) * t + c.col(2) * t * t;
        for (int k = 1; k <= 3; ++k) v += c.col(2 + k) * std::sin(k * t);
        return v;
    };
    auto derivative = [c](double t) {
        CVector v = c.col(1) + 2.0 * t * c.col(2);
        for (int k = 1; k <= 3; ++k) v += double(k) * c.col(2 + k) * std::cos(k * t);
        return v;
    };
    return {value, derivative};
}

std::vector<double> pencil_spectrum(const DensePencil& p, int count) {
    const auto all = oracle::generalized_eigenvalues(p.A, p.B);
    return {all.begin(), all.begin() + count};
}

double mu1_upsilon_circle() { return std::pow((pi - 2.0) / (2.0 * pi), 2) - 1.0 / (pi * pi); }

// Criterion 11's m = 0 sweep feeds criterion 13.
AsymptoticsReport circle_sweep_m0;
bool circle_sweep_m0_ready = false;

Outcome clifford_relations() {
    double worst = 0.0;
    for (int n = 1; n <= 8; ++n) {
        const CliffordFamily fam(n);
        for (int j = 1; j <= n + 1; ++j)
            for (int k = 1; k <= n + 1; ++k) {
                CMatrix ac = fam.alpha(j) * fam.alpha(k) + fam.alpha(k) * fam.alpha(j);
                if (j == k) ac -= 2.0 * CMatrix::Identity(fam.size(), fam.size());
                worst = std::max(worst, ac.cwiseAbs().maxCoeff());
            }
    }
    return {worst == 0.0, fmt("max anticommutator entry %.3g", worst)};
}

Outcome secular_series() {
    const double ms[] = {0.01, 0.02, 0.04, 0.08};
    double err[4];
    for (int i = 0; i < 4; ++i) err[i] = std::abs(solve_k(ms[i], 1) - (pi / 4 + 2 * ms[i] / pi - 16 * ms[i] * ms[i] / (pi * pi * pi)));
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 3; ++i) lo = std::min(lo, err[i + 1] / err[i]), hi = std::max(hi, err[i + 1] / err[i]);
    double c = 0.0;
    for (int i = 0; i < 4; ++i) c = std::max(c, err[i] / std::pow(ms[i], 3));
    return {lo >= 6.5 && hi <= 9.5, fmt("doubling ratios in [%.3f, %.3f], C = %.3g", lo, hi, c)};
}

Outcome transverse_form_identity() {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 2;
        const CliffordFamily fam(n);
        const RVector x = random_unit(rng, n);
        const double m = 0.15 * (trial % 7);
        const SpinorFunction f = make_admissible(fam, x, random_spinor(rng, fam.size()));
        const FormIdentity id = quadratic_form_identity_check(fam, x, m, f);
        worst = std::max(worst, std::abs(id.lhs - id.rhs) / std::abs(id.rhs));
    }
    return {worst <= 1e-8, fmt("max relative gap %.3g over 20 spinors", worst)};
}

Outcome intertwining() {
    std::mt19937_64 rng(103);
    double unit = 0.0, gap = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 2;
        const CliffordFamily fam(n);
        const RVector x = random_unit(rng, n), y = random_unit(rng, n);
        const CMatrix u = intertwiner(fam, x, y);
        unit = std::max(unit, (u.adjoint() * u - CMatrix::Identity(fam.size(), fam.size())).cwiseAbs().maxCoeff());
        const double m = 0.1 * trial;
        const auto ex = pencil_spectrum(discretize_transverse_square(fam, x, m, 32), 6);
        const auto ey = pencil_spectrum(discretize_transverse_square(fam, y, m, 32), 6);
        for (int i = 0; i < 6; ++i) gap = std::max(gap, std::abs(ex[i] - ey[i]));
    }
    return {unit <= 1e-12 && gap <= 1e-10, fmt("unitarity %.3g, energy gap %.3g", unit, gap)};
}

Outcome mode_perturbation() {
    const CliffordFamily fam(2);
    const PerturbationTable t = mode_perturbation_check(fam, RVector::Unit(2, 0), {0.01, 0.02, 0.04});
    return {t.order >= 0.95 && t.order <= 1.2,
            fmt("log-log slope %.4f (distances %.3g, %.3g, %.3g)", t.order, t.distances[0], t.distances[1], t.distances[2])};
}

Outcome total_curvature() {
    double worst = 0.0;
    for (const Curve& c : {Curve::circle(), Curve::ellipse(2.0, 1.0),
                           Curve::fourier({{-1, Complex(1.0, 0.0)}, {2, Complex(0.1, 0.05)}, {-3, Complex(0.03, 0.0)}})})
        worst = std::max(worst, std::abs(c.total_curvature() + 2.0 * pi));
    return {worst <= 1e-8, fmt("max |int kappa + 2 pi| = %.3g", worst)};
}

Outcome metric_identity() {
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<Curve> curves{Curve::circle(), Curve::ellipse(2.0, 1.0),
                                    Curve::fourier({{-1, Complex(1.0, 0.0)}, {2, Complex(0.1, 0.05)}})};
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Curve& c = curves[trial % 3];
        const ShellMetric2D metric(c, 0.85 * c.injectivity_limit() * u(rng) + 1e-3);
        const double s = c.length() * u(rng), t = 2.0 * u(rng) - 1.0, h = 1e-3;
        auto d = [&](auto f, double x) { return Vec2((-f(x + 2 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2 * h)) / (12.0 * h)); };
        const Vec2 ds = d([&](double x) { return metric.tubular_map(x, t); }, s);
        const Vec2 dt = d([&](double x) { return metric.tubular_map(s, x); }, t);
        const double jac = ds.x() * dt.y() - ds.y() * dt.x();
        worst = std::max(worst, std::abs(jac * jac - metric.det_metric(s, t)) / metric.det_metric(s, t));
    }
    return {worst <= 1e-9, fmt("max relative error %.3g over 50 samples", worst)};
}

Outcome gauge_equivalence() {
    const CliffordFamily fam(2);
    const Curve e = Curve::ellipse(2.0, 1.0);
    const GaugeCheck g = gauge_transform_check(fam, e, 512, 8);
    const double sim = discrete_gauge_similarity(fam, e, 512);
    return {g.spectral_distance <= 1e-5 && sim <= 1e-12, fmt("spectral distance %.3g, lattice similarity %.3g", g.spectral_distance, sim)};
}

Outcome circle_magnetic() {
    const RVector mu = magnetic_eigenvalues(assemble_magnetic(Curve::circle(), 512), 5);
    const auto ref = oracle::circle_plane_wave_spectrum({1.0}, (pi - 2.0) / (2.0 * pi), -1.0 / (pi * pi), 5);
    double worst = 0.0;
    for (int j = 0; j < 5; ++j) worst = std::max(worst, std::abs(mu[j] - ref[j]));
    return {worst <= 1e-6, fmt("max error %.3g over 5 levels", worst)};
}

Outcome flat_strip() {
    const CliffordFamily fam(2);
    const Curve strip = Curve::strip(2.0 * pi);
    const double eps = 0.1, m = 0.5;
    const ShellMetric2D metric(strip, eps);
    // transverse (x) Fourier: E_1(m eps)^2 / eps^2 + j^2 on a strip of length 2 pi
    const double e1 = std::sqrt(m * m * eps * eps + std::pow(oracle::secular_root_bisection(m * eps, 1), 2)) / eps;
    const double exact = e1 * e1 + 1.0;
    double err[3];
    for (int level = 0; level < 3; ++level) {
        const SpectrumResult r = lowest_eigenvalues(assemble_shell(fam, metric, m, 32 << level, 8 << level), 4);
        err[level] = std::abs(r.eigenvalues[2] - exact);
    }
    const double p1 = std::log2(err[0] / err[1]), p2 = std::log2(err[1] / err[2]);
    return {std::min(p1, p2) >= 1.9, fmt("orders %.3f, %.3f (errors %.3g -> %.3g)", p1, p2, err[0], err[2])};
}

Outcome circle_sweeps() {
    const double target = mu1_upsilon_circle();
    bool ok = true;
    std::string detail;
    for (double m : {0.0, 0.5}) {
        SweepConfig cfg;
        cfg.m = m;
        const AsymptoticsReport rep = run_sweep(cfg);
        const double rel = std::abs(rep.fits[0].intercept - target) / std::abs(target);
        const bool mono = residual_monotone(rep, 0);
        ok = ok && rel <= 0.10 && mono && !rep.partial;
        detail += fmt("m=%.1f: a1=%.5f (rel %.3f) b1=%.3f", m, rep.fits[0].intercept, rel, rep.fits[0].slope);
        detail += mono ? " monotone; " : " NOT monotone; ";
        if (m == 0.0) circle_sweep_m0 = rep, circle_sweep_m0_ready = true;
    }
    return {ok, detail + fmt("mu1 = %.6f", target)};
}

Outcome sandwich() {
    const CliffordFamily fam(2);
    const Curve c = Curve::circle();
    const double k = 3.0 * (1.0 + c.max_abs_curvature());
    bool ok = true;
    std::string detail;
    for (double eps : {0.1, 0.05}) {
        const ShellMetric2D metric(c, eps);
        const int ns = 128, nt = default_transverse_cells(eps);
        const ShellFormAssembly shell = assemble_shell(fam, metric, 0.0, ns, nt);
        const SandwichFormAssembly sw = assemble_sandwich(fam, metric, 0.0, k, ns, nt);
        LobpcgOptions lo;
        lo.shift = shell_shift_hint(metric, 0.0) - 2.0 * k;
        const double mu = lowest_eigenvalues(shell, 1).eigenvalues[0];
        const double ml = lowest_eigenvalues(sw.lower, 1, lo).eigenvalues[0];
        const double mh = lowest_eigenvalues(sw.upper, 1, lo).eigenvalues[0];
        const double tol = 10.0 * std::pow(shell.mesh_size(), 2) * mu;
        ok = ok && ml - tol <= mu && mu <= mh + tol;
        detail += fmt("eps=%.2f: %.4f <= %.4f <= %.4f; ", eps, ml, mu, mh);
    }
    return {ok, detail + fmt("c = %.1f", k)};
}

Outcome corollary_leading() {
    if (!circle_sweep_m0_ready) return {false, "needs the circle m = 0 sweep"};
    const SweepPoint& last = circle_sweep_m0.points.back();
    const double value = std::sqrt(last.mu[1]) * last.eps;
    const double rel = std::abs(value - pi / 4.0) / (pi / 4.0);
    return {last.eps == 0.035 && rel <= 0.02, fmt("sqrt(mu_2) eps = %.6f at eps = %.3f (rel %.4f)", value, last.eps, rel)};
}

Outcome eigensolver_cross() {
    const CliffordFamily fam(2);
    const ShellFormAssembly a = assemble_shell(fam, ShellMetric2D(Curve::circle(), 0.1), 0.5, 32, 8);
    LobpcgOptions it;
    it.force_iterative = true;
    const SpectrumResult ri = lowest_eigenvalues(a, 6, it);
    const auto ref = oracle::generalized_eigenvalues(CMatrix(a.pencil.A), CMatrix(a.pencil.B));
    double worst = 0.0;
    for (int j = 0; j < 6; ++j) worst = std::max(worst, std::abs(ri.eigenvalues[j] - ref[j]));
    return {ri.converged && !ri.used_dense && worst <= 1e-8,
            fmt("max |iterative - dense| = %.3g, %.0f iterations", worst, ri.iterations)};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Clifford relations exact for n = 1..8", 1.0, clifford_relations},
        {2, "secular root series is third order", 1.0, secular_series},
        {3, "transverse quadratic form identity", 5.0, transverse_form_identity},
        {4, "intertwiner unitary and direction-free energies", 30.0, intertwining},
        {5, "mode perturbation linear in mass", 5.0, mode_perturbation},
        {6, "total curvature -2 pi", 5.0, total_curvature},
        {7, "metric determinant vs Jacobian", 5.0, metric_identity},
        {8, "gauge equivalence on ellipse(2,1)", 30.0, gauge_equivalence},
        {9, "circle magnetic spectrum", 10.0, circle_magnetic},
        {10, "flat strip second-order convergence", 120.0, flat_strip},
        {11, "circle eps sweeps, residual constant and monotonicity", 600.0, circle_sweeps},
        {12, "sandwich bounds on circle(1)", 180.0, sandwich},
        {13, "leading term of sqrt(mu_2) at eps = 0.035", 600.0, corollary_leading},
        {14, "iterative vs dense eigensolver", 30.0, eigensolver_cross},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = sec <= c.budget;
        const bool pass = o.passed && in_time;
        failures += pass ? 0 : 1;
        std::printf("%s  [%2d] %s: %s (%.2fs, budget %.0fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), sec,
                    c.budget, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
