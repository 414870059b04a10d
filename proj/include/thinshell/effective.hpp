#pragma once

#include "thinshell/clifford.hpp"
#include "thinshell/core.hpp"
#include "thinshell/eigsolve.hpp"
#include "thinshell/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace thinshell {

/// Coupling of the connection term, 1/2 - 1/pi.
inline constexpr double effective_coupling = 0.5 - 1.0 / pi;

/// Fourier-Galerkin (spectral, default) or Peierls link-phase lattice (second order, exactly gauge covariant).
enum class EffectiveScheme { spectral, link_phase };

inline EffectiveScheme parse_effective_scheme(const std::string& name) {
    if (name == "spectral") return EffectiveScheme::spectral;
    if (name == "link_phase") return EffectiveScheme::link_phase;
    throw ConfigError("unknown effective scheme '" + name + "'");
}

/// -i Gamma(nu'(s)) Gamma(nu(s)); nu' = -kappa T for the clockwise unit-speed curve.
inline CMatrix omega_oneform(const CliffordFamily& family, const Curve& curve, double s) {
    require(family.n() == 2, "omega_oneform: the curve path needs n = 2");
    const CurvePoint p = curve.at(s);
    const RVector nu = p.normal;
    const RVector dnu = -p.curvature * p.tangent;
    return -imag_unit * family.symbol(dnu) * family.symbol(nu);
}

/// (1/2 + 2/pi^2) H_2 - H_1^2 / pi^2.
inline double effective_potential(double h1, double h2) { return (0.5 + 2.0 / (pi * pi)) * h2 - h1 * h1 / (pi * pi); }

/// mu_j(Upsilon_mag) on a circle of radius R: ((2 pi n + pi - 2)/(2 pi R))^2 - 1/(pi R)^2, ascending.
inline std::vector<double> circle_magnetic_spectrum(int count, double radius = 1.0) {
    std::vector<double> mu;
    const int range = count + 2;
    for (int n = -range; n <= range; ++n) {
        const double q = (2.0 * pi * n + pi - 2.0) / (2.0 * pi * radius);
        mu.push_back(q * q - 1.0 / (pi * pi * radius * radius));
    }
    std::sort(mu.begin(), mu.end());
    mu.resize(count);
    return mu;
}

struct EffectiveFormAssembly {
    Curve curve;
    int n_s = 0;
    EffectiveScheme scheme = EffectiveScheme::spectral;
    double coupling = effective_coupling;
    int components = 0;                // N
    std::vector<CMatrix> omega;        // Omega^1(s_i), s_i = i L / n_s
    std::vector<double> potential;     // V(s_i)
    bool diagonal_omega = false;
    DensePencil pencil;                // B = scale * I
    double mass_scale = 1.0;
};

struct MagneticFormAssembly {
    Curve curve;
    int n_s = 0;
    EffectiveScheme scheme = EffectiveScheme::spectral;
    double flux = 0.0;                 // (pi - 2) / L by default
    std::vector<double> potential;
    DensePencil pencil;
    double mass_scale = 1.0;
};

namespace detail {

/// hat_d = h sum_i a(s_i) exp(2 pi i d i / n) for d = -(n-1)..n-1, stored at index d + n - 1.
inline std::vector<Complex> periodic_moments(const std::vector<Complex>& a, double length) {
    const int n = static_cast<int>(a.size());
    const double h = length / n;
    std::vector<Complex> out(2 * n - 1);
    std::vector<Complex> roots(n);
    for (int i = 0; i < n; ++i) roots[i] = std::polar(1.0, 2.0 * pi * i / n);
    for (int d = -(n - 1); d <= n - 1; ++d) {
        Complex sum = 0.0;
        const int dm = ((d % n) + n) % n;
        for (int i = 0; i < n; ++i) sum += a[i] * roots[(static_cast<long long>(dm) * i) % n];
        out[d + n - 1] = h * sum;
    }
    return out;
}

inline void check_grid(int n_s) {
    require(n_s >= 16, "effective assembly: n_s must be >= 16");
    require(n_s % 2 == 0, "effective assembly: n_s must be even");
}

/// exp(i phase_scale Omega) for Hermitian Omega.
inline CMatrix link_unitary(const CMatrix& omega_mid, double phase_scale) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (omega_mid + omega_mid.adjoint()));
    const RVector& w = es.eigenvalues();
    CVector ph(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) ph[i] = std::polar(1.0, phase_scale * w[i]);
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace detail

/// Hermitian pencil of u[f] = int |f' - i c Omega f|^2 + V |f|^2 over periodic C^N-valued f.
/// Spectral: Fourier modes |k| <= n_s/2 - 1 per component (B = L I).
/// Link phase: lattice s_i with U_i = exp(i c h Omega(s_{i+1/2})) (B = h I).
/// DOF index = component * modes + mode.
inline EffectiveFormAssembly assemble_effective(const CliffordFamily& family, const Curve& curve, int n_s,
                                                EffectiveScheme scheme = EffectiveScheme::spectral,
                                                double coupling = effective_coupling) {
    detail::check_grid(n_s);
    require(family.n() == 2, "assemble_effective: the curve path needs n = 2");
    EffectiveFormAssembly out{curve, n_s, scheme, coupling, family.size(), {}, {}, false, {}, 1.0};
    const int nc = family.size();
    const double len = curve.length(), h = len / n_s;
    bool diagonal = true;
    for (int i = 0; i < n_s; ++i) {
        const double s = i * h;
        out.omega.push_back(omega_oneform(family, curve, s));
        const double kappa = curve.curvature(s);
        out.potential.push_back(effective_potential(kappa, 0.0));
        const CMatrix& w = out.omega.back();
        diagonal = diagonal && max_abs(CMatrix(w - CMatrix(w.diagonal().asDiagonal()))) <= 1e-14 * (1.0 + max_abs(w));
    }
    out.diagonal_omega = diagonal;

    if (scheme == EffectiveScheme::spectral) {
        const int kmax = n_s / 2 - 1, modes = 2 * kmax + 1;
        const Eigen::Index dim = static_cast<Eigen::Index>(nc) * modes;
        out.mass_scale = len;
        out.pencil = DensePencil{CMatrix::Zero(dim, dim), len * CMatrix::Identity(dim, dim), true};
        std::vector<Complex> vs(out.potential.begin(), out.potential.end());
        const auto v_hat = detail::periodic_moments(vs, len);
        for (int a = 0; a < nc; ++a)
            for (int b = 0; b < nc; ++b) {
                std::vector<Complex> w(n_s), w2(n_s);
                for (int i = 0; i < n_s; ++i) {
                    w[i] = out.omega[i](a, b);
                    w2[i] = (out.omega[i] * out.omega[i])(a, b);
                }
                if (a != b && max_abs(Eigen::Map<const CVector>(w.data(), n_s)) == 0.0 &&
                    max_abs(Eigen::Map<const CVector>(w2.data(), n_s)) == 0.0)
                    continue;
                const auto w_hat = detail::periodic_moments(w, len);
                const auto w2_hat = detail::periodic_moments(w2, len);
                for (int l = 0; l < modes; ++l)
                    for (int k = 0; k < modes; ++k) {
                        const double ql = 2.0 * pi * (l - kmax) / len, qk = 2.0 * pi * (k - kmax) / len;
                        const int d = (k - l) + n_s - 1;
                        Complex v = -coupling * (ql + qk) * w_hat[d] + coupling * coupling * w2_hat[d];
                        if (a == b) v += v_hat[d] + (l == k ? ql * qk * len : 0.0);
                        out.pencil.A(a * modes + l, b * modes + k) += v;
                    }
            }
    } else {
        const Eigen::Index dim = static_cast<Eigen::Index>(nc) * n_s;
        out.mass_scale = h;
        out.pencil = DensePencil{CMatrix::Zero(dim, dim), h * CMatrix::Identity(dim, dim), true};
        auto at = [&](int node, int comp) { return static_cast<Eigen::Index>(comp) * n_s + node; };
        for (int i = 0; i < n_s; ++i) {
            const int j = (i + 1) % n_s;
            const CMatrix u = detail::link_unitary(omega_oneform(family, curve, (i + 0.5) * h), coupling * h);
            for (int a = 0; a < nc; ++a) {
                out.pencil.A(at(i, a), at(i, a)) += 1.0 / h + h * out.potential[i];
                out.pencil.A(at(j, a), at(j, a)) += 1.0 / h;
                for (int b = 0; b < nc; ++b) {
                    out.pencil.A(at(j, a), at(i, b)) -= u(a, b) / h;
                    out.pencil.A(at(i, b), at(j, a)) -= std::conj(u(a, b)) / h;
                }
            }
        }
    }
    return out;
}

/// Pencil of u_mag[g] = int |g' - i a g|^2 - kappa^2/pi^2 |g|^2, a = flux (default (pi - 2)/L).
inline MagneticFormAssembly assemble_magnetic(const Curve& curve, int n_s,
                                              EffectiveScheme scheme = EffectiveScheme::spectral,
                                              std::optional<double> flux = std::nullopt) {
    detail::check_grid(n_s);
    const double len = curve.length(), h = len / n_s;
    MagneticFormAssembly out{curve, n_s, scheme, flux.value_or((pi - 2.0) / len), {}, {}, 1.0};
    for (int i = 0; i < n_s; ++i) out.potential.push_back(effective_potential(curve.curvature(i * h), 0.0));
    const double a = out.flux;
    if (scheme == EffectiveScheme::spectral) {
        const int kmax = n_s / 2 - 1, modes = 2 * kmax + 1;
        out.mass_scale = len;
        out.pencil = DensePencil{CMatrix::Zero(modes, modes), len * CMatrix::Identity(modes, modes), true};
        std::vector<Complex> vs(out.potential.begin(), out.potential.end());
        const auto v_hat = detail::periodic_moments(vs, len);
        for (int l = 0; l < modes; ++l)
            for (int k = 0; k < modes; ++k) {
                const double ql = 2.0 * pi * (l - kmax) / len, qk = 2.0 * pi * (k - kmax) / len;
                Complex v = v_hat[(k - l) + n_s - 1];
                if (l == k) v += (ql - a) * (qk - a) * len;
                out.pencil.A(l, k) = v;
            }
    } else {
        out.mass_scale = h;
        out.pencil = DensePencil{CMatrix::Zero(n_s, n_s), h * CMatrix::Identity(n_s, n_s), true};
        const Complex u = std::polar(1.0, a * h);
        for (int i = 0; i < n_s; ++i) {
            const int j = (i + 1) % n_s;
            out.pencil.A(i, i) += 1.0 / h + h * out.potential[i];
            out.pencil.A(j, j) += 1.0 / h;
            out.pencil.A(j, i) -= u / h;
            out.pencil.A(i, j) -= std::conj(u) / h;
        }
    }
    return out;
}

namespace detail {

inline RVector lowest_scaled(const CMatrix& a, double scale, int count) {
    const SpectrumResult r = dense_hermitian_eig(CMatrix(a / scale), nullptr, count);
    return r.eigenvalues;
}

} // namespace detail

/// Lowest eigenvalues of the effective pencil. Diagonal connections decouple the spin components.
inline RVector effective_eigenvalues(const EffectiveFormAssembly& asmb, int count) {
    const Eigen::Index dim = asmb.pencil.dim();
    require(count >= 1 && count <= dim, "effective_eigenvalues: count out of range");
    if (!asmb.diagonal_omega) {
        if (dim <= 4096) return detail::lowest_scaled(asmb.pencil.A, asmb.mass_scale, count);
        LobpcgOptions opts;
        opts.count = count;
        opts.preconditioner = PreconditionerKind::jacobi;
        return lobpcg_smallest(asmb.pencil, opts).eigenvalues;
    }
    const Eigen::Index block = dim / asmb.components;
    std::vector<double> all;
    for (int c = 0; c < asmb.components; ++c) {
        const RVector mu = detail::lowest_scaled(asmb.pencil.A.block(c * block, c * block, block, block),
                                                 asmb.mass_scale, std::min<Eigen::Index>(count, block));
        all.insert(all.end(), mu.data(), mu.data() + mu.size());
    }
    std::sort(all.begin(), all.end());
    RVector out(count);
    for (int i = 0; i < count; ++i) out[i] = all[i];
    return out;
}

inline RVector magnetic_eigenvalues(const MagneticFormAssembly& asmb, int count) {
    require(count >= 1 && count <= asmb.pencil.dim(), "magnetic_eigenvalues: count out of range");
    return detail::lowest_scaled(asmb.pencil.A, asmb.mass_scale, count);
}

/// V(s) = c (int_0^s kappa + 2 pi s / L), trapezoid on the uniform grid; returns V at s_0..s_n (s_n = L).
inline std::vector<double> gauge_phase(const Curve& curve, int n_s, double coupling = effective_coupling) {
    const double len = curve.length(), h = len / n_s;
    std::vector<double> v(n_s + 1, 0.0);
    double integral = 0.0, prev = curve.curvature(0.0);
    for (int i = 1; i <= n_s; ++i) {
        const double cur = curve.curvature(i * h);
        integral += 0.5 * h * (prev + cur);
        prev = cur;
        v[i] = coupling * (integral + 2.0 * pi * i * h / len);
    }
    return v;
}

struct GaugeCheck {
    double spectral_distance = 0.0;    // max_j |mu_j(Upsilon) - mu_j(Upsilon_mag + Upsilon_mag)|, j <= count
    double phase_periodicity = 0.0;    // |V(L)|
    std::vector<double> mu_effective;
    std::vector<double> mu_magnetic_pair;
};

inline GaugeCheck gauge_transform_check(const CliffordFamily& family, const Curve& curve, int n_s, int count = 8,
                                        double coupling = effective_coupling,
                                        EffectiveScheme scheme = EffectiveScheme::spectral) {
    require(curve.is_closed(), "gauge_transform_check: needs a closed curve");
    GaugeCheck out;
    const RVector eff = effective_eigenvalues(assemble_effective(family, curve, n_s, scheme, coupling), count);
    const RVector mag = magnetic_eigenvalues(assemble_magnetic(curve, n_s, scheme), (count + 1) / 2);
    for (int j = 0; j < count; ++j) {
        out.mu_effective.push_back(eff[j]);
        out.mu_magnetic_pair.push_back(mag[j / 2]);
        out.spectral_distance = std::max(out.spectral_distance, std::abs(eff[j] - mag[j / 2]));
    }
    out.phase_periodicity = std::abs(coupling * (curve.total_curvature() + 2.0 * pi));
    return out;
}

/// Relative defect max|G^* A_eff G - (A_mag(a) + A_mag(-a))| / max|A_eff| of the link-phase pencils
/// under the lattice gauge G; a = (pi - 2)/L. Requires a diagonal connection (n = 2).
inline double discrete_gauge_similarity(const CliffordFamily& family, const Curve& curve, int n_s,
                                        double coupling = effective_coupling) {
    require(curve.is_closed(), "discrete_gauge_similarity: needs a closed curve");
    const EffectiveFormAssembly eff = assemble_effective(family, curve, n_s, EffectiveScheme::link_phase, coupling);
    require(eff.diagonal_omega, "discrete_gauge_similarity: connection is not diagonal");
    const double len = curve.length(), h = len / n_s;
    const double a = (pi - 2.0) / len;
    const int nc = eff.components;
    const Eigen::Index dim = eff.pencil.dim();
    CVector gauge(dim);
    CMatrix target = CMatrix::Zero(dim, dim);
    for (int c = 0; c < nc; ++c) {
        double winding = 0.0;
        std::vector<double> w(n_s);
        for (int i = 0; i < n_s; ++i) {
            w[i] = std::real(omega_oneform(family, curve, (i + 0.5) * h)(c, c));
            winding += h * w[i];
        }
        const double flux = winding > 0.0 ? a : -a;
        double theta = 0.0;
        for (int i = 0; i < n_s; ++i) {
            gauge[c * n_s + i] = std::polar(1.0, theta);
            theta += coupling * h * w[i] - flux * h;
        }
        const MagneticFormAssembly mag = assemble_magnetic(curve, n_s, EffectiveScheme::link_phase, flux);
        target.block(c * n_s, c * n_s, n_s, n_s) = mag.pencil.A;
    }
    const CMatrix transformed = (gauge.conjugate() * gauge.transpose()).cwiseProduct(eff.pencil.A);
    return max_abs(CMatrix(transformed - target)) / max_abs(eff.pencil.A);
}

} // namespace thinshell
