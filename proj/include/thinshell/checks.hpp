#pragma once

#include "thinshell/thinshell.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace thinshell {

struct CheckOptions {
    double coupling = effective_coupling;
    std::uint64_t seed = 20240917;
};

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::vector<std::pair<std::string, double>> metrics;
    std::string message;
    double seconds = 0.0;
};

namespace detail {

class SuiteRecorder {
public:
    explicit SuiteRecorder(std::string name) { result_.name = std::move(name); }

    /// Records value and fails the suite unless ok.
    void expect(const std::string& metric, double value, bool ok) {
        result_.metrics.emplace_back(metric, value);
        if (!ok) {
            passed_ = false;
            if (!result_.message.empty()) result_.message += "; ";
            result_.message += metric + " out of range";
        }
    }

    SuiteResult finish(double seconds) {
        result_.passed = passed_;
        result_.seconds = seconds;
        return result_;
    }

private:
    SuiteResult result_;
    bool passed_ = true;
};

inline RVector random_unit(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> normal;
    RVector x(n);
    for (int i = 0; i < n; ++i) x[i] = normal(rng);
    return x / x.norm();
}

/// Random trigonometric spinor on [-1, 1] with a few modes per component.
inline SpinorFunction random_spinor(std::mt19937_64& rng, int size, int modes = 4) {
    std::normal_distribution<double> normal;
    CMatrix coef(size, 2 * modes + 1);
    for (Eigen::Index i = 0; i < coef.rows(); ++i)
        for (Eigen::Index j = 0; j < coef.cols(); ++j) coef(i, j) = Complex(normal(rng), normal(rng));
    auto value = [coef, modes](double t) {
        CVector v = coef.col(0);
        for (int k = 1; k <= modes; ++k)
            v += coef.col(2 * k - 1) * std::cos(k * pi * t / 2.0) + coef.col(2 * k) * std::sin(k * pi * t / 2.0);
        return v;
    };
    auto derivative = [coef, modes](double t) {
        CVector v = CVector::Zero(coef.rows());
        for (int k = 1; k <= modes; ++k) {
            const double w = k * pi / 2.0;
            v += w * (-coef.col(2 * k - 1) * std::sin(w * t) + coef.col(2 * k) * std::cos(w * t));
        }
        return v;
    };
    return {value, derivative};
}

} // namespace detail

inline SuiteResult check_clifford(const CheckOptions& opts) {
    detail::SuiteRecorder rec("clifford");
    std::mt19937_64 rng(opts.seed);
    double exact = 0.0, anticomm = 0.0, unitarity = 0.0, intertwining = 0.0;
    for (int n = 1; n <= 8; ++n) {
        const CliffordFamily fam(n);
        exact = std::max(exact, fam.relation_defect());
        for (int trial = 0; trial < 20; ++trial) {
            const RVector x = detail::random_unit(rng, n), y = detail::random_unit(rng, n);
            const CMatrix gx = fam.symbol(x), gy = fam.symbol(y);
            anticomm = std::max(anticomm, max_abs(CMatrix(gx * gy + gy * gx - 2.0 * x.dot(y) *
                                                           CMatrix::Identity(fam.size(), fam.size()))));
            const CMatrix u = intertwiner(fam, x, y);
            unitarity = std::max(unitarity, max_abs(CMatrix(u.adjoint() * u - CMatrix::Identity(fam.size(), fam.size()))));
            const CMatrix& a = fam.mass_matrix();
            intertwining = std::max(intertwining, max_abs(CMatrix(u * a * gx * u.adjoint() - a * gy)));
        }
    }
    rec.expect("relation_defect", exact, exact == 0.0);
    rec.expect("anticommutator_defect", anticomm, anticomm <= 1e-12);
    rec.expect("theta_unitarity", unitarity, unitarity <= 1e-12);
    rec.expect("theta_intertwining", intertwining, intertwining <= 1e-12);
    return rec.finish(0.0);
}

inline SuiteResult check_secular(const CheckOptions&) {
    detail::SuiteRecorder rec("secular");
    double worst = 0.0;
    bool brackets = true, gap = true;
    for (int i = 0; i <= 40; ++i) {
        const double m = 0.05 * i;
        for (int p = 1; p <= 6; ++p) {
            const double k = solve_k(m, p);
            worst = std::max(worst, std::abs(secular_function(m, k)));
            const double lo = (2 * p - 1) * pi / 4.0, hi = p * pi / 2.0;
            brackets = brackets && k >= lo && k <= hi;
            if (m > 0.0) brackets = brackets && secular_function(m, lo) * secular_function(m, hi) < 0.0;
            gap = gap && energy(m, p) > m;
        }
    }
    rec.expect("max_secular_residual", worst, worst <= 1e-13);
    rec.expect("bracket_ok", brackets, brackets);
    rec.expect("energy_above_mass", gap, gap);
    const double k0 = solve_k(0.0, 1);
    rec.expect("k1_at_zero", k0, k0 == pi / 4.0);
    std::vector<double> err;
    for (double m : {0.01, 0.02, 0.04, 0.08}) err.push_back(std::abs(k1_series(m) - solve_k(m, 1)));
    double ratio_min = 1e300, ratio_max = 0.0;
    for (int i = 0; i + 1 < 4; ++i) {
        const double r = err[i + 1] / err[i];
        ratio_min = std::min(ratio_min, r);
        ratio_max = std::max(ratio_max, r);
    }
    rec.expect("series_ratio_min", ratio_min, ratio_min >= 6.5);
    rec.expect("series_ratio_max", ratio_max, ratio_max <= 9.5);
    return rec.finish(0.0);
}

inline SuiteResult check_transverse(const CheckOptions& opts) {
    detail::SuiteRecorder rec("transverse");
    std::mt19937_64 rng(opts.seed + 1);
    double form = 0.0, norm = 0.0, bc = 0.0, gram = 0.0;
    for (int n : {2, 3}) {
        const CliffordFamily fam(n);
        for (int trial = 0; trial < 5; ++trial) {
            const RVector x = detail::random_unit(rng, n);
            const double m = 0.25 * trial;
            const SpinorFunction f = make_admissible(fam, x, detail::random_spinor(rng, fam.size()));
            const FormIdentity id = quadratic_form_identity_check(fam, x, m, f);
            form = std::max(form, std::abs(id.lhs - id.rhs) / (1.0 + id.lhs));
            std::vector<SpinorFunction> modes;
            for (int sign : {1, -1})
                for (int j = 1; j <= fam.half(); ++j) {
                    const TransverseMode md(fam, x, m, 1 + trial % 2, j, sign);
                    modes.push_back(as_spinor_function(md));
                    bc = std::max(bc, boundary_residual(fam, x, modes.back()));
                }
            for (std::size_t a = 0; a < modes.size(); ++a)
                for (std::size_t b = 0; b < modes.size(); ++b) {
                    const Complex ip = inner_product(modes[a], modes[b]);
                    if (a == b) norm = std::max(norm, std::abs(ip - 1.0));
                    else gram = std::max(gram, std::abs(ip));
                }
        }
    }
    rec.expect("form_identity_relative", form, form <= 1e-8);
    rec.expect("normalization_defect", norm, norm <= 1e-10);
    rec.expect("boundary_residual", bc, bc <= 1e-10);
    rec.expect("orthogonality_defect", gram, gram <= 1e-10);
    const CliffordFamily fam2(2);
    const PerturbationTable tab = mode_perturbation_check(fam2, detail::random_unit(rng, 2), {0.01, 0.02, 0.04});
    rec.expect("perturbation_order", tab.order, tab.order >= 0.95 && tab.order <= 1.2);
    return rec.finish(0.0);
}

inline SuiteResult check_geometry(const CheckOptions& opts) {
    detail::SuiteRecorder rec("geometry");
    const std::vector<Curve> curves{Curve::circle(1.0), Curve::ellipse(2.0, 1.0),
                                    Curve::fourier({{1, Complex(0.0, 0.0)}, {-1, Complex(1.0, 0.0)}, {2, Complex(0.1, 0.05)}})};
    double total = 0.0, speed = 0.0;
    for (const Curve& c : curves) {
        total = std::max(total, std::abs(c.total_curvature() + 2.0 * pi));
        const double h = 1e-4;
        for (int i = 0; i < 64; ++i) {
            const double s = c.length() * (i + 0.3) / 64;
            const Vec2 d = (c.at(s + h).position - c.at(s - h).position) / (2.0 * h);
            speed = std::max(speed, std::abs(d.norm() - 1.0));
        }
    }
    rec.expect("total_curvature_defect", total, total <= 1e-8);
    rec.expect("finite_difference_speed_defect", speed, speed <= 1e-6);
    std::mt19937_64 rng(opts.seed + 2);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double jac = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Curve& c = curves[trial % curves.size()];
        const double eps = 0.8 * c.injectivity_limit() * uni(rng) + 1e-3;
        const ShellMetric2D metric(c, std::min(eps, 0.85 * c.injectivity_limit()));
        const double s = c.length() * uni(rng), t = 2.0 * uni(rng) - 1.0, h = 1e-3;
        auto map = [&](double ss, double tt) { return metric.tubular_map(ss, tt); };
        const Vec2 ds = (-map(s + 2 * h, t) + 8.0 * map(s + h, t) - 8.0 * map(s - h, t) + map(s - 2 * h, t)) / (12.0 * h);
        const Vec2 dt = (-map(s, t + 2 * h) + 8.0 * map(s, t + h) - 8.0 * map(s, t - h) + map(s, t - 2 * h)) / (12.0 * h);
        const double det = std::abs(ds.x() * dt.y() - ds.y() * dt.x());
        jac = std::max(jac, std::abs(det * det - metric.det_metric(s, t)) / metric.det_metric(s, t));
    }
    rec.expect("det_metric_vs_jacobian", jac, jac <= 1e-9);
    return rec.finish(0.0);
}

inline SuiteResult check_gauge(const CheckOptions& opts) {
    detail::SuiteRecorder rec("gauge");
    const CliffordFamily fam(2);
    const Curve ellipse = Curve::ellipse(2.0, 1.0);
    const GaugeCheck g = gauge_transform_check(fam, ellipse, 256, 8, opts.coupling);
    rec.expect("ellipse_spectral_distance", g.spectral_distance, g.spectral_distance <= 1e-5);
    rec.expect("phase_periodicity", g.phase_periodicity, g.phase_periodicity <= 1e-8);
    const double sim = discrete_gauge_similarity(fam, ellipse, 256, opts.coupling);
    rec.expect("discrete_similarity", sim, sim <= 1e-12);
    const RVector mag = magnetic_eigenvalues(assemble_magnetic(Curve::circle(), 256), 5);
    const std::vector<double> ref = circle_magnetic_spectrum(5);
    double circle = 0.0;
    for (int j = 0; j < 5; ++j) circle = std::max(circle, std::abs(mag[j] - ref[j]));
    rec.expect("circle_magnetic_error", circle, circle <= 1e-6);
    return rec.finish(0.0);
}

inline SuiteResult check_sandwich(const CheckOptions&) {
    detail::SuiteRecorder rec("sandwich");
    const CliffordFamily fam(2);
    const Curve circle = Curve::circle();
    const double eps = 0.1, c = 3.0 * (1.0 + circle.max_abs_curvature());
    const ShellMetric2D metric(circle, eps);
    const int ns = 64, nt = 16;
    const ShellFormAssembly shell = assemble_shell(fam, metric, 0.0, ns, nt);
    const SandwichFormAssembly sw = assemble_sandwich(fam, metric, 0.0, c, ns, nt);
    LobpcgOptions lo;
    lo.shift = shell_shift_hint(metric, 0.0) - 3.0 * c;
    const double mu = lowest_eigenvalues(shell, 1).eigenvalues[0];
    const double mu_lo = lowest_eigenvalues(sw.lower, 1, lo).eigenvalues[0];
    const double mu_hi = lowest_eigenvalues(sw.upper, 1, lo).eigenvalues[0];
    const double tol = 10.0 * std::pow(shell.mesh_size(), 2) * mu;
    rec.expect("lower_gap", mu - mu_lo, mu_lo - tol <= mu);
    rec.expect("upper_gap", mu_hi - mu, mu <= mu_hi + tol);
    return rec.finish(0.0);
}

inline SuiteResult check_convergence(const CheckOptions&) {
    detail::SuiteRecorder rec("convergence");
    const CliffordFamily fam(2);
    const Curve strip = Curve::strip(2.0 * pi);
    const double eps = 0.1, m = 0.5;
    const ShellMetric2D metric(strip, eps);
    const double exact = flat_strip_spectrum(m, eps, strip.length(), 3)[2];
    std::vector<double> err;
    for (int level = 0; level < 3; ++level) {
        const int ns = 32 << level, nt = 8 << level;
        const SpectrumResult r = lowest_eigenvalues(assemble_shell(fam, metric, m, ns, nt), 3);
        err.push_back(std::abs(r.eigenvalues[2] - exact));
    }
    const double strip_order = std::min(std::log2(err[0] / err[1]), std::log2(err[1] / err[2]));
    rec.expect("flat_strip_order", strip_order, strip_order >= 1.9);

    const Curve ellipse = Curve::ellipse(2.0, 1.0);
    const RVector ref = effective_eigenvalues(assemble_effective(fam, ellipse, 256), 5);
    double worst = 1e300;
    std::vector<RVector> mu;
    for (int ns : {64, 128, 256}) mu.push_back(effective_eigenvalues(assemble_effective(fam, ellipse, ns, EffectiveScheme::link_phase), 5));
    for (int j = 0; j < 5; ++j)
        worst = std::min(worst, std::min(std::log2(std::abs(mu[0][j] - ref[j]) / std::abs(mu[1][j] - ref[j])),
                                         std::log2(std::abs(mu[1][j] - ref[j]) / std::abs(mu[2][j] - ref[j]))));
    rec.expect("link_phase_order", worst, worst >= 1.9);
    return rec.finish(0.0);
}

inline SuiteResult check_eigensolver(const CheckOptions& opts) {
    detail::SuiteRecorder rec("eigensolver");
    const CliffordFamily fam(2);
    const ShellMetric2D metric(Curve::circle(), 0.1);
    const ShellFormAssembly shell = assemble_shell(fam, metric, 0.5, 32, 8);
    LobpcgOptions iterative;
    iterative.force_iterative = true;
    iterative.seed = opts.seed;
    iterative.preconditioner = PreconditionerKind::jacobi;
    const SpectrumResult it = lowest_eigenvalues(shell, 6, iterative);
    const CMatrix a(shell.pencil.A), b(shell.pencil.B);
    const SpectrumResult dense = dense_hermitian_eig(a, &b, 6);
    const double diff = (it.eigenvalues - dense.eigenvalues).cwiseAbs().maxCoeff();
    rec.expect("dense_vs_iterative", diff, diff <= 1e-8 && it.converged);
    const CMatrix bx = shell.pencil.B * it.eigenvectors;
    const double ortho = max_abs(CMatrix(it.eigenvectors.adjoint() * bx - CMatrix::Identity(6, 6)));
    rec.expect("b_orthonormality", ortho, ortho <= 1e-10);
    return rec.finish(0.0);
}

/// Runs every property suite; negative controls pass a modified coupling through opts.
inline std::vector<SuiteResult> run_checks(const CheckOptions& opts = {}) {
    const std::vector<std::function<SuiteResult(const CheckOptions&)>> suites{
        check_clifford, check_secular, check_transverse, check_geometry,
        check_gauge,    check_sandwich, check_convergence, check_eigensolver};
    std::vector<SuiteResult> out;
    for (const auto& suite : suites) {
        const auto t0 = std::chrono::steady_clock::now();
        SuiteResult r;
        try {
            r = suite(opts);
        } catch (const std::exception& e) {
            r.passed = false;
            r.message = e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace thinshell
