#pragma once

#include "thinshell/clifford.hpp"
#include "thinshell/core.hpp"
#include "thinshell/eigsolve.hpp"
#include "thinshell/geometry.hpp"
#include "thinshell/transverse.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace thinshell {

/// n_t = max(8, ceil(4 / sqrt(eps))).
inline int default_transverse_cells(double eps) {
    require(eps > 0.0, "default_transverse_cells: eps must be positive");
    return std::max(8, static_cast<int>(std::ceil(4.0 / std::sqrt(eps))));
}

/// Coefficients of a form on Sigma x (-1, 1) in tubular coordinates:
///   int (tangential |d_s v|^2 + transverse |d_t v|^2 + potential |v|^2) ds dt
///   + sum_pm int boundary(pm) |v(s, pm 1)|^2 ds,   inner product int measure |v|^2 ds dt.
struct FormCoefficients {
    std::function<double(double kappa, double t)> tangential;
    std::function<double(double kappa, double t)> transverse;
    std::function<double(double kappa, double t)> potential;
    std::function<double(double kappa, double t)> measure;
    std::function<double(double kappa, int side)> boundary;
};

/// Transformed shell form b_eps of the squared Dirac operator (exact metric weights).
inline FormCoefficients shell_coefficients(double eps, double m) {
    FormCoefficients c;
    c.tangential = [eps](double k, double t) {
        const double q = 1.0 + eps * t * k;
        return eps * q / (q * q);
    };
    c.transverse = [eps](double k, double t) { return (1.0 + eps * t * k) / eps; };
    c.potential = [eps, m](double k, double t) { return m * m * eps * (1.0 + eps * t * k); };
    c.measure = [eps](double k, double t) { return eps * (1.0 + eps * t * k); };
    c.boundary = [eps, m](double k, int side) {
        return (m + 0.5 * boundary_mean_curvature(k, eps, side)) * (1.0 + side * eps * k);
    };
    return c;
}

/// Flat-metric sandwich form c_eps^{sign}, sign = +1 (upper) or -1 (lower).
inline FormCoefficients sandwich_coefficients(double eps, double m, double c, int sign) {
    FormCoefficients f;
    f.tangential = [=](double, double) { return 1.0 + sign * c * eps; };
    f.transverse = [=](double, double) { return 1.0 / (eps * eps); };
    f.potential = [=](double k, double) { return -0.25 * k * k + m * m + sign * c * eps; };
    f.measure = [](double, double) { return 1.0; };
    f.boundary = [=](double, int) { return (m * eps + sign * c * eps * eps * eps) / (eps * eps); };
    return f;
}

/// exp(-i theta alpha_3 / 2): conjugates Gamma(e_1) to Gamma(cos theta, sin theta) and commutes with alpha_3.
inline CMatrix spin_frame(double theta) {
    CMatrix r = CMatrix::Zero(2, 2);
    r(0, 0) = std::polar(1.0, -0.5 * theta);
    r(1, 1) = std::polar(1.0, 0.5 * theta);
    return r;
}

/// Node (i, l) of the n_s x (n_t + 1) tensor mesh, periodic in s.
/// Unknowns are w = R(s)^* v with R = spin_frame(theta(s)), theta the angle of the tubular normal,
/// so the boundary constraint becomes the fixed subspace ran P_pm(e_1) and interpolation stays admissible.
/// When the normal winds an odd number of times, w is antiperiodic (twist = -1).
struct DofMap {
    int n_s = 0;
    int n_t = 0;
    int components = 0;
    std::vector<CMatrix> frames;          // per node: N x d, in the rotated frame
    std::vector<Eigen::Index> offset;     // per node, plus the total at the end
    std::vector<RVector> normals;         // tubular normal n(s_i) per column
    std::vector<double> angles;           // continuous angle theta(s_i) of n(s_i)
    double twist = 1.0;

    int node(int i, int l) const { return ((i % n_s + n_s) % n_s) * (n_t + 1) + l; }
    Eigen::Index dim() const { return offset.back(); }
};

inline DofMap make_dof_map(const CliffordFamily& family, const Curve& curve, int n_s, int n_t) {
    require(family.n() == 2, "shell: planar shells need n = 2");
    DofMap d{n_s, n_t, family.size(), {}, {0}, {}, {}, 1.0};
    const int nc = family.size();
    const RVector e1 = RVector::Unit(2, 0);
    auto lift = [](double prev, double raw) { return prev + std::remainder(raw - prev, 2.0 * pi); };
    for (int i = 0; i < n_s; ++i) {
        const RVector n = -curve.at(curve.length() * i / n_s).normal;
        const double raw = std::atan2(n[1], n[0]);
        d.angles.push_back(i == 0 ? raw : lift(d.angles.back(), raw));
        d.normals.push_back(n);
        for (int l = 0; l <= n_t; ++l) {
            CMatrix frame = l == 0      ? boundary_basis(family, e1, -1)
                            : l == n_t ? boundary_basis(family, e1, 1)
                                       : CMatrix::Identity(nc, nc);
            d.offset.push_back(d.offset.back() + frame.cols());
            d.frames.push_back(std::move(frame));
        }
    }
    const double winding = (lift(d.angles.back(), d.angles.front()) - d.angles.front()) / (2.0 * pi);
    d.twist = std::lround(winding) % 2 == 0 ? 1.0 : -1.0;
    return d;
}

namespace detail {

/// Real scalar forms on the Q1 space. The tangential derivative in the rotated frame is
/// d_s w - i (kappa/2) sigma w with sigma = +1, -1 per component; its kappa^2/4 part is in stiffness
/// and connection holds int c_s (kappa/2)(phi_p d_s phi_q - d_s phi_p phi_q).
struct ScalarForms {
    Eigen::SparseMatrix<double> stiffness;
    Eigen::SparseMatrix<double> connection;
    Eigen::SparseMatrix<double> mass;
};

/// Q1 elements, 2 x 2 Gauss points per cell and 2 per boundary edge.
inline ScalarForms assemble_scalar_forms(const Curve& curve, int n_s, int n_t, const FormCoefficients& f,
                                         double twist = 1.0) {
    const double hs = curve.length() / n_s, ht = 2.0 / n_t;
    const double g[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    const int nodes = n_s * (n_t + 1);
    auto node = [&](int i, int l) { return (i % n_s) * (n_t + 1) + l; };
    std::vector<Eigen::Triplet<double>> kt, gt, mt;
    kt.reserve(static_cast<std::size_t>(n_s) * n_t * 16 + 8 * n_s);
    gt.reserve(static_cast<std::size_t>(n_s) * n_t * 16);
    mt.reserve(static_cast<std::size_t>(n_s) * n_t * 16);
    for (int i = 0; i < n_s; ++i) {
        const double kap[2] = {curve.curvature((i + g[0]) * hs), curve.curvature((i + g[1]) * hs)};
        // the last column wraps onto node column 0 with the sign of the twist
        const double wrap = i == n_s - 1 ? twist : 1.0;
        const double sg[4] = {1.0, wrap, 1.0, wrap};
        for (int l = 0; l < n_t; ++l) {
            double ke[4][4] = {}, ge[4][4] = {}, me[4][4] = {};
            for (int qs = 0; qs < 2; ++qs)
                for (int qt = 0; qt < 2; ++qt) {
                    const double xs = g[qs], xt = g[qt];
                    const double t = -1.0 + (l + xt) * ht, k = kap[qs];
                    const double w = 0.25 * hs * ht;
                    const double cs = f.tangential(k, t), ct = f.transverse(k, t);
                    const double cp = f.potential(k, t), cm = f.measure(k, t);
                    const double a = 0.5 * k;
                    const double n[4] = {(1 - xs) * (1 - xt), xs * (1 - xt), (1 - xs) * xt, xs * xt};
                    const double ds[4] = {-(1 - xt) / hs, (1 - xt) / hs, -xt / hs, xt / hs};
                    const double dt[4] = {-(1 - xs) / ht, -xs / ht, (1 - xs) / ht, xs / ht};
                    for (int p = 0; p < 4; ++p)
                        for (int q = 0; q < 4; ++q) {
                            ke[p][q] += w * (cs * (ds[p] * ds[q] + a * a * n[p] * n[q]) + ct * dt[p] * dt[q] + cp * n[p] * n[q]);
                            ge[p][q] += w * cs * a * (n[p] * ds[q] - ds[p] * n[q]);
                            me[p][q] += w * cm * n[p] * n[q];
                        }
                }
            const int ids[4] = {node(i, l), node(i + 1, l), node(i, l + 1), node(i + 1, l + 1)};
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q) {
                    const double sign = sg[p] * sg[q];
                    kt.emplace_back(ids[p], ids[q], sign * ke[p][q]);
                    gt.emplace_back(ids[p], ids[q], sign * ge[p][q]);
                    mt.emplace_back(ids[p], ids[q], sign * me[p][q]);
                }
        }
        for (int side : {-1, 1}) {
            const int l = side == 1 ? n_t : 0;
            double be[2][2] = {};
            for (int qs = 0; qs < 2; ++qs) {
                const double xs = g[qs];
                const double coef = f.boundary(kap[qs], side);
                const double n[2] = {1 - xs, xs};
                for (int p = 0; p < 2; ++p)
                    for (int q = 0; q < 2; ++q) be[p][q] += 0.5 * hs * coef * n[p] * n[q];
            }
            const int ids[2] = {node(i, l), node(i + 1, l)};
            const double sb[2] = {1.0, wrap};
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q) kt.emplace_back(ids[p], ids[q], sb[p] * sb[q] * be[p][q]);
        }
    }
    ScalarForms out;
    out.stiffness.resize(nodes, nodes);
    out.connection.resize(nodes, nodes);
    out.mass.resize(nodes, nodes);
    out.stiffness.setFromTriplets(kt.begin(), kt.end());
    out.connection.setFromTriplets(gt.begin(), gt.end());
    out.mass.setFromTriplets(mt.begin(), mt.end());
    return out;
}

/// Block (p, q) = sum_c conj(T_p(c, :))^T T_q(c, :) (K_pq + i sigma_c G_pq), sigma = (+1, -1).
inline SparseMatrix reduce_to_dofs(const Eigen::SparseMatrix<double>& k, const Eigen::SparseMatrix<double>* g,
                                   const DofMap& dofs) {
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(k.nonZeros()) * 4);
    const int nc = dofs.components;
    auto add = [&](int p, int q, int c, Complex v) {
        const CMatrix& tp = dofs.frames[p];
        const CMatrix& tq = dofs.frames[q];
        for (Eigen::Index a = 0; a < tp.cols(); ++a)
            for (Eigen::Index b = 0; b < tq.cols(); ++b) {
                const Complex e = std::conj(tp(c, a)) * tq(c, b);
                if (e != 0.0) trips.emplace_back(dofs.offset[p] + a, dofs.offset[q] + b, v * e);
            }
    };
    for (int col = 0; col < k.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it)
            for (int c = 0; c < nc; ++c) add(static_cast<int>(it.row()), static_cast<int>(it.col()), c, it.value());
    if (g)
        for (int col = 0; col < g->outerSize(); ++col)
            for (Eigen::SparseMatrix<double>::InnerIterator it(*g, col); it; ++it)
                for (int c = 0; c < nc; ++c)
                    add(static_cast<int>(it.row()), static_cast<int>(it.col()), c,
                        Complex(0.0, c == 0 ? it.value() : -it.value()));
    SparseMatrix out(dofs.dim(), dofs.dim());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

inline void check_shell_grid(int n_s, int n_t) {
    require(n_s >= 32, "shell: n_s must be >= 32");
    require(n_t >= 8, "shell: n_t must be >= 8");
}

} // namespace detail

/// Pencil of a tensor form over C^N-valued functions with the boundary constraint built in.
inline SparsePencil assemble_tensor_form(const DofMap& dofs, const Curve& curve, const FormCoefficients& f) {
    const detail::ScalarForms s = detail::assemble_scalar_forms(curve, dofs.n_s, dofs.n_t, f, dofs.twist);
    return SparsePencil{detail::reduce_to_dofs(s.stiffness, &s.connection, dofs), detail::reduce_to_dofs(s.mass, nullptr, dofs),
                        false};
}

struct ShellFormAssembly {
    ShellMetric2D metric;
    double m = 0.0;
    int n_s = 0;
    int n_t = 0;
    DofMap dofs;
    SparsePencil pencil;

    /// max(h_s, h_t) with h_s = L / n_s, h_t = 2 / n_t.
    double mesh_size() const { return std::max(metric.curve().length() / n_s, 2.0 / n_t); }
};

struct SandwichFormAssembly {
    ShellMetric2D metric;
    double m = 0.0;
    double c = 0.0;
    int n_s = 0;
    int n_t = 0;
    DofMap dofs;
    SparsePencil lower;    // c_eps^-
    SparsePencil upper;    // c_eps^+ (same mass matrix)
};

inline ShellFormAssembly assemble_shell(const CliffordFamily& family, const ShellMetric2D& metric, double m, int n_s,
                                        int n_t) {
    detail::check_shell_grid(n_s, n_t);
    require(m >= 0.0, "assemble_shell: m must be non-negative");
    DofMap dofs = make_dof_map(family, metric.curve(), n_s, n_t);
    SparsePencil pencil = assemble_tensor_form(dofs, metric.curve(), shell_coefficients(metric.eps(), m));
    return ShellFormAssembly{metric, m, n_s, n_t, std::move(dofs), std::move(pencil)};
}

inline SandwichFormAssembly assemble_sandwich(const CliffordFamily& family, const ShellMetric2D& metric, double m,
                                              double c, int n_s, int n_t) {
    detail::check_shell_grid(n_s, n_t);
    require(c >= 0.0, "assemble_sandwich: c must be non-negative");
    DofMap dofs = make_dof_map(family, metric.curve(), n_s, n_t);
    SparsePencil lower = assemble_tensor_form(dofs, metric.curve(), sandwich_coefficients(metric.eps(), m, c, -1));
    SparsePencil upper = assemble_tensor_form(dofs, metric.curve(), sandwich_coefficients(metric.eps(), m, c, 1));
    upper.B = lower.B;
    return SandwichFormAssembly{metric, m, c, n_s, n_t, std::move(dofs), std::move(lower), std::move(upper)};
}

/// Expands reduced coordinates to C^N values v = R(s_i) T_p w at every node.
inline std::vector<CVector> expand_to_nodes(const DofMap& dofs, const CVector& reduced) {
    require(reduced.size() == dofs.dim(), "expand_to_nodes: vector has the wrong length");
    std::vector<CVector> out;
    out.reserve(dofs.frames.size());
    for (std::size_t p = 0; p < dofs.frames.size(); ++p) {
        const CMatrix r = spin_frame(dofs.angles[p / (dofs.n_t + 1)]);
        out.push_back(r * dofs.frames[p] * reduced.segment(dofs.offset[p], dofs.frames[p].cols()));
    }
    return out;
}

/// max over boundary nodes of |-i alpha_3 Gamma(n(s_i)) w - (pm) w|.
inline double shell_boundary_residual(const CliffordFamily& family, const DofMap& dofs, const CVector& reduced) {
    const std::vector<CVector> w = expand_to_nodes(dofs, reduced);
    double r = 0.0;
    for (int i = 0; i < dofs.n_s; ++i) {
        const CMatrix inv = boundary_involution(family, dofs.normals[i]);
        for (int side : {-1, 1}) {
            const CVector& v = w[dofs.node(i, side == 1 ? dofs.n_t : 0)];
            r = std::max(r, (inv * v - side * v).norm());
        }
    }
    return r;
}

/// Shift below mu_1 of the shell pencil: E_1(m eps)^2 / eps^2 - (1 + max kappa^2).
inline double shell_shift_hint(const ShellMetric2D& metric, double m) {
    const double eps = metric.eps(), e1 = energy(m * eps, 1), k = metric.curve().max_abs_curvature();
    return e1 * e1 / (eps * eps) - (1.0 + k * k);
}

/// The count smallest eigenpairs (mu_j, residual) of a shell-type pencil.
inline SpectrumResult lowest_eigenvalues(const SparsePencil& pencil, int count, LobpcgOptions opts = {}) {
    require(count >= 1 && count <= 12, "lowest_eigenvalues: count must lie in 1..12");
    opts.count = count;
    return lobpcg_smallest(pencil, opts);
}

inline SpectrumResult lowest_eigenvalues(const ShellFormAssembly& asmb, int count, LobpcgOptions opts = {}) {
    if (!opts.shift) opts.shift = shell_shift_hint(asmb.metric, asmb.m);
    return lowest_eigenvalues(asmb.pencil, count, opts);
}

/// Exact low spectrum of the flat periodic strip of length L:
/// E_1(m eps)^2 / eps^2 + (2 pi j / L)^2, j in Z, each with multiplicity 2.
inline std::vector<double> flat_strip_spectrum(double m, double eps, double length, int count) {
    const double e1 = energy(m * eps, 1), base = e1 * e1 / (eps * eps);
    std::vector<double> mu;
    for (int j = -count; j <= count; ++j) {
        const double q = 2.0 * pi * j / length;
        mu.push_back(base + q * q);
        mu.push_back(base + q * q);
    }
    std::sort(mu.begin(), mu.end());
    mu.resize(count);
    return mu;
}

/// Romberg table over grids (2^k n_s, 2^k n_t), k < levels, for an expansion in h^2, h^4, ...
/// With two levels this is (4 mu(2 n_s, 2 n_t) - mu(n_s, n_t)) / 3.
struct RichardsonSpectrum {
    std::vector<double> extrapolated;
    std::vector<double> coarse;                 // level 0
    std::vector<double> fine;                   // finest level
    std::vector<std::vector<double>> levels;    // levels[k][j]
    bool converged = true;
};

inline std::vector<double> romberg(std::vector<double> column) {
    std::vector<double> out{column.back()};
    double factor = 4.0;
    while (column.size() > 1) {
        for (std::size_t k = 0; k + 1 < column.size(); ++k)
            column[k] = (factor * column[k + 1] - column[k]) / (factor - 1.0);
        column.pop_back();
        factor *= 4.0;
    }
    out.push_back(column.front());
    return out;
}

inline RichardsonSpectrum richardson_shell_eigenvalues(const CliffordFamily& family, const ShellMetric2D& metric,
                                                       double m, int n_s, int n_t, int count,
                                                       LobpcgOptions opts = {}, int levels = 2) {
    require(levels >= 2 && levels <= 4, "richardson: levels must lie in 2..4");
    RichardsonSpectrum out;
    for (int k = 0; k < levels; ++k) {
        const SpectrumResult r =
            lowest_eigenvalues(assemble_shell(family, metric, m, n_s << k, n_t << k), count, opts);
        out.converged = out.converged && r.converged;
        out.levels.emplace_back(r.eigenvalues.data(), r.eigenvalues.data() + count);
    }
    out.coarse = out.levels.front();
    out.fine = out.levels.back();
    for (int j = 0; j < count; ++j) {
        std::vector<double> column;
        for (const auto& level : out.levels) column.push_back(level[j]);
        out.extrapolated.push_back(romberg(column).back());
    }
    return out;
}

} // namespace thinshell
