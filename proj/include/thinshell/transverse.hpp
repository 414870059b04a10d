#pragma once

#include "thinshell/clifford.hpp"
#include "thinshell/core.hpp"
#include "thinshell/eigsolve.hpp"
#include "thinshell/quadrature.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace thinshell {

/// g(k) = m sin 2k + k cos 2k.
inline double secular_function(double m, double k) { return m * std::sin(2.0 * k) + k * std::cos(2.0 * k); }

/// Unique root of the secular equation in [(2p-1) pi/4, p pi/2]: Newton from the midpoint,
/// bisection whenever an iterate leaves the current bracket.
inline double solve_k(double m, int p) {
    require(m >= 0.0, "solve_k: m must be non-negative");
    require(p >= 1, "solve_k: p must be >= 1");
    double lo = (2.0 * p - 1.0) * pi / 4.0, hi = p * pi / 2.0;
    if (m == 0.0) return lo;
    double glo = secular_function(m, lo);
    double k = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double g = secular_function(m, k);
        if (g == 0.0) return k;
        if ((g > 0.0) == (glo > 0.0)) lo = k, glo = g;
        else hi = k;
        const double dg = 2.0 * m * std::cos(2.0 * k) + std::cos(2.0 * k) - 2.0 * k * std::sin(2.0 * k);
        double next = k - g / dg;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - k) <= 1e-16 * k || hi - lo <= 4e-16 * hi) return next;
        k = next;
    }
    return k;
}

/// pi/4 + 2m/pi - 16 m^2/pi^3.
inline double k1_series(double m) { return pi / 4.0 + 2.0 * m / pi - 16.0 * m * m / (pi * pi * pi); }

/// E_p(m) = sqrt(m^2 + k_p(m)^2).
inline double energy(double m, int p) {
    const double k = solve_k(m, p);
    return std::sqrt(m * m + k * k);
}

/// N_{m,p} > 0 from 1 = 2 N^2 (2E^2 - m^2 sin(4k)/(2k) + m sin^2(2k)).
inline double normalization(double m, int p) {
    const double k = solve_k(m, p);
    const double e2 = m * m + k * k;
    const double s2 = std::sin(2.0 * k);
    return 1.0 / std::sqrt(2.0 * (2.0 * e2 - m * m * std::sin(4.0 * k) / (2.0 * k) + m * s2 * s2));
}

/// Eigenfunction phi_{j,p}^{m,sign} of T_x(m) for the eigenvalue sign * E_p(m).
class TransverseMode {
public:
    TransverseMode(const CliffordFamily& family, const RVector& x, double m, int p, int j, int sign)
        : m_(m), p_(p), j_(j), sign_(sign) {
        require(std::abs(x.norm() - 1.0) < 1e-12, "TransverseMode: x must be a unit vector");
        require(j >= 1 && j <= family.half(), "TransverseMode: spinor index out of range");
        require(sign == 1 || sign == -1, "TransverseMode: sign must be +1 or -1");
        k_ = solve_k(m, p);
        e_ = std::sqrt(m * m + k_ * k_);
        norm_ = normalization(m, p);
        const int h = family.half();
        const CMatrix beta = family.beta(x);
        CVector ej = CVector::Zero(h);
        ej[j - 1] = 1.0;
        cos_part_.resize(2 * h);
        sin_part_.resize(2 * h);
        if (sign == 1) {
            cos_part_ << ej, -imag_unit * (beta * ej);
            sin_part_ << (e_ + m) * ej, imag_unit * (e_ - m) * (beta * ej);
        } else {
            const CVector bj = beta.adjoint() * ej;
            cos_part_ << imag_unit * bj, ej;
            sin_part_ << imag_unit * (m - e_) * bj, (e_ + m) * ej;
        }
    }

    double m() const { return m_; }
    int p() const { return p_; }
    int j() const { return j_; }
    int sign() const { return sign_; }
    double k() const { return k_; }
    double energy() const { return e_; }
    double norm_constant() const { return norm_; }

    CVector operator()(double t) const {
        const double a = k_ * (t + 1.0);
        return norm_ * (k_ * std::cos(a) * cos_part_ + std::sin(a) * sin_part_);
    }

    CVector derivative(double t) const {
        const double a = k_ * (t + 1.0);
        return norm_ * k_ * (-k_ * std::sin(a) * cos_part_ + std::cos(a) * sin_part_);
    }

private:
    double m_;
    int p_, j_, sign_;
    double k_ = 0.0, e_ = 0.0, norm_ = 0.0;
    CVector cos_part_, sin_part_;
};

/// A C^N-valued function on [-1, 1] with its derivative.
struct SpinorFunction {
    std::function<CVector(double)> value;
    std::function<CVector(double)> derivative;
};

inline SpinorFunction as_spinor_function(const TransverseMode& mode) {
    return {[mode](double t) { return mode(t); }, [mode](double t) { return mode.derivative(t); }};
}

/// f = g - (1-t)/2 P_+ g(-1) - (1+t)/2 P_- g(1): satisfies the boundary condition of T_x.
inline SpinorFunction make_admissible(const CliffordFamily& family, const RVector& x, const SpinorFunction& g) {
    const CMatrix inv = boundary_involution(family, x);
    const CMatrix id = CMatrix::Identity(family.size(), family.size());
    const CVector a = 0.5 * (id + inv) * g.value(-1.0);
    const CVector b = 0.5 * (id - inv) * g.value(1.0);
    return {[g, a, b](double t) { return CVector(g.value(t) - 0.5 * (1.0 - t) * a - 0.5 * (1.0 + t) * b); },
            [g, a, b](double t) { return CVector(g.derivative(t) + 0.5 * a - 0.5 * b); }};
}

/// Largest relative violation of -i alpha_{n+1} Gamma(x) f(pm 1) = pm f(pm 1).
inline double boundary_residual(const CliffordFamily& family, const RVector& x, const SpinorFunction& f) {
    const CMatrix inv = boundary_involution(family, x);
    double r = 0.0;
    for (int side : {-1, 1}) {
        const CVector v = f.value(side);
        r = std::max(r, (inv * v - side * v).norm() / (1.0 + v.norm()));
    }
    return r;
}

struct FormIdentity {
    double lhs = 0.0;   // ||T_x f||^2
    double rhs = 0.0;   // ||f'||^2 + m^2 ||f||^2 + m (|f(1)|^2 + |f(-1)|^2)
};

inline FormIdentity quadratic_form_identity_check(const CliffordFamily& family, const RVector& x, double m,
                                                  const SpinorFunction& f, int nodes = 64) {
    if (boundary_residual(family, x, f) > 1e-8)
        throw InvalidInput("quadratic_form_identity_check: f violates the boundary condition");
    const CMatrix g = family.symbol(x);
    const CMatrix& a = family.mass_matrix();
    FormIdentity out;
    out.lhs = integrate_gauss([&](double t) { return (-imag_unit * (g * f.derivative(t)) + m * (a * f.value(t))).squaredNorm(); },
                              -1.0, 1.0, nodes);
    const double d2 = integrate_gauss([&](double t) { return f.derivative(t).squaredNorm(); }, -1.0, 1.0, nodes);
    const double f2 = integrate_gauss([&](double t) { return f.value(t).squaredNorm(); }, -1.0, 1.0, nodes);
    out.rhs = d2 + m * m * f2 + m * (f.value(1.0).squaredNorm() + f.value(-1.0).squaredNorm());
    return out;
}

/// <f, g> in L^2((-1,1), C^N) by Gauss-Legendre quadrature.
inline Complex inner_product(const SpinorFunction& f, const SpinorFunction& g, int nodes = 64) {
    return integrate_gauss([&](double t) { return f.value(t).dot(g.value(t)); }, -1.0, 1.0, nodes);
}

struct PerturbationTable {
    std::vector<double> deltas;
    std::vector<double> distances;   // max_t |phi^delta(t) - phi^0(t)| over both signs, j = 1, p = 1
    double order = 0.0;              // least-squares log-log slope (positive deltas only)
};

inline PerturbationTable mode_perturbation_check(const CliffordFamily& family, const RVector& x,
                                                 const std::vector<double>& deltas, int samples = 1001) {
    require(samples >= 2, "mode_perturbation_check: need at least two samples");
    PerturbationTable out;
    out.deltas = deltas;
    for (double d : deltas) {
        require(d >= 0.0 && d <= 0.3, "mode_perturbation_check: delta must lie in [0, 0.3]");
        double dist = 0.0;
        for (int sign : {1, -1}) {
            const TransverseMode ref(family, x, 0.0, 1, 1, sign), pert(family, x, d, 1, 1, sign);
            for (int i = 0; i < samples; ++i) {
                const double t = -1.0 + 2.0 * i / (samples - 1);
                dist = std::max(dist, (pert(t) - ref(t)).norm());
            }
        }
        out.distances.push_back(dist);
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < deltas.size(); ++i)
        if (deltas[i] > 0.0 && out.distances[i] > 0.0) {
            lx.push_back(std::log(deltas[i]));
            ly.push_back(std::log(out.distances[i]));
        }
    if (lx.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
        mx /= lx.size();
        my /= ly.size();
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
        out.order = sxy / sxx;
    }
    return out;
}

/// P1 finite-element pencil of the form ||f'||^2 + m^2 ||f||^2 + m(|f(1)|^2 + |f(-1)|^2)
/// on [-1, 1] with the boundary condition of T_x built into the end-node DOFs.
/// Its eigenvalues approximate the spectrum of T_x^2.
inline DensePencil discretize_transverse_square(const CliffordFamily& family, const RVector& x, double m,
                                                int elements) {
    require(elements >= 2, "discretize_transverse_square: need at least two elements");
    const int n = family.size(), h = family.half();
    std::vector<CMatrix> frames(elements + 1, CMatrix::Identity(n, n));
    frames.front() = boundary_basis(family, x, -1);
    frames.back() = boundary_basis(family, x, 1);
    std::vector<Eigen::Index> offset(elements + 2, 0);
    for (int i = 0; i <= elements; ++i) offset[i + 1] = offset[i] + frames[i].cols();
    const Eigen::Index dim = offset.back();
    DensePencil pencil{CMatrix::Zero(dim, dim), CMatrix::Zero(dim, dim), false};
    const double len = 2.0 / elements;
    const double stiff[2][2] = {{1.0 / len, -1.0 / len}, {-1.0 / len, 1.0 / len}};
    const double mass[2][2] = {{len / 3.0, len / 6.0}, {len / 6.0, len / 3.0}};
    for (int e = 0; e < elements; ++e) {
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const int na = e + a, nb = e + b;
                const CMatrix coupling = frames[na].adjoint() * frames[nb];
                pencil.A.block(offset[na], offset[nb], frames[na].cols(), frames[nb].cols()) +=
                    (stiff[a][b] + m * m * mass[a][b]) * coupling;
                pencil.B.block(offset[na], offset[nb], frames[na].cols(), frames[nb].cols()) += mass[a][b] * coupling;
            }
    }
    pencil.A.topLeftCorner(h, h) += m * CMatrix::Identity(h, h);
    pencil.A.bottomRightCorner(h, h) += m * CMatrix::Identity(h, h);
    return pencil;
}

} // namespace thinshell
