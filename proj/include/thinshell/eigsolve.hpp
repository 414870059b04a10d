#pragma once

#include "thinshell/core.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace thinshell {

/// Hermitian pencil (A, B) with B positive definite. unit_mass marks B = I.
template <class Matrix>
struct Pencil {
    Matrix A;
    Matrix B;
    bool unit_mass = false;

    Eigen::Index dim() const { return A.rows(); }
};

using DensePencil = Pencil<CMatrix>;
using SparsePencil = Pencil<SparseMatrix>;

struct SpectrumResult {
    RVector eigenvalues;     // ascending
    CMatrix eigenvectors;    // B-orthonormal columns
    RVector residuals;       // ||A x - mu B x|| / ||B x||
    int iterations = 0;
    bool converged = false;
    bool used_dense = false;
};

enum class PreconditionerKind { none, jacobi, shift_invert };

inline PreconditionerKind parse_preconditioner(const std::string& name) {
    if (name == "none") return PreconditionerKind::none;
    if (name == "jacobi") return PreconditionerKind::jacobi;
    if (name == "shift_invert") return PreconditionerKind::shift_invert;
    throw ConfigError("unknown preconditioner '" + name + "'");
}

struct LobpcgOptions {
    int count = 1;
    double tol = 1e-8;
    int max_iter = 1000;
    PreconditionerKind preconditioner = PreconditionerKind::shift_invert;
    std::optional<double> shift;        // shift-invert target, must lie below mu_1
    std::uint64_t seed = 20240917;
    bool force_iterative = false;
    Eigen::Index dense_threshold = 512;
    int guard = 0;                      // extra block columns; 0 picks a default
};

namespace detail {

template <class Matrix>
CMatrix to_dense(const Matrix& m) {
    if constexpr (std::is_same_v<Matrix, SparseMatrix>) return CMatrix(m);
    else return m;
}

template <class Matrix>
void validate_pencil(const Pencil<Matrix>& p) {
    require(p.A.rows() == p.A.cols(), "pencil: A is not square");
    require(p.B.rows() == p.A.rows() && p.B.cols() == p.A.cols(), "pencil: A and B differ in shape");
    const double scale_a = std::max(1.0, max_abs(p.A));
    const double scale_b = std::max(1.0, max_abs(p.B));
    if (hermiticity_defect(p.A) > 1e-12 * scale_a) throw InvalidInput("pencil: A is not Hermitian");
    if (hermiticity_defect(p.B) > 1e-12 * scale_b) throw InvalidInput("pencil: B is not Hermitian");
}

inline RVector column_residuals(const CMatrix& ax, const CMatrix& bx, const RVector& mu) {
    RVector r(mu.size());
    for (Eigen::Index j = 0; j < mu.size(); ++j) {
        const double nb = bx.col(j).norm();
        r[j] = (ax.col(j) - mu[j] * bx.col(j)).norm() / (nb > 0.0 ? nb : 1.0);
    }
    return r;
}

/// B-orthonormal basis of span(V) via eigen-decomposition of the Gram matrix;
/// drops directions whose Gram eigenvalue falls below drop_tol * max.
inline Eigen::Index svqb(CMatrix& v, CMatrix& bv, double drop_tol) {
    if (v.cols() == 0) return 0;
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        double nrm = std::sqrt(std::max(0.0, std::real(v.col(j).dot(bv.col(j)))));
        if (nrm > 0.0) {
            v.col(j) /= nrm;
            bv.col(j) /= nrm;
        }
    }
    CMatrix gram = v.adjoint() * bv;
    gram = 0.5 * (gram + gram.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
    const RVector& d = es.eigenvalues();
    const double dmax = d.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (d[i] > drop_tol * dmax) keep.push_back(i);
    CMatrix z(v.cols(), static_cast<Eigen::Index>(keep.size()));
    for (size_t c = 0; c < keep.size(); ++c) z.col(c) = es.eigenvectors().col(keep[c]) / std::sqrt(d[keep[c]]);
    v = (v * z).eval();
    bv = (bv * z).eval();
    return z.cols();
}

} // namespace detail

/// Dense generalized Hermitian eigen-decomposition (Cholesky reduction).
/// Returns all eigenpairs when count < 0.
inline SpectrumResult dense_hermitian_eig(const CMatrix& a, const CMatrix* b = nullptr, Eigen::Index count = -1) {
    require(a.rows() == a.cols(), "dense_hermitian_eig: A is not square");
    require(a.rows() <= 8192, "dense_hermitian_eig: dimension exceeds 8192");
    const Eigen::Index n = a.rows();
    if (count < 0 || count > n) count = n;
    SpectrumResult out;
    out.used_dense = true;
    out.converged = true;
    if (b == nullptr) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
        if (es.info() != Eigen::Success) throw Error("dense_hermitian_eig: eigensolver failed");
        out.eigenvalues = es.eigenvalues().head(count);
        out.eigenvectors = es.eigenvectors().leftCols(count);
        out.residuals = detail::column_residuals(a * out.eigenvectors, out.eigenvectors, out.eigenvalues);
        return out;
    }
    Eigen::LLT<CMatrix> llt(*b);
    if (llt.info() != Eigen::Success) throw InvalidInput("dense_hermitian_eig: B is not positive definite");
    CMatrix l = llt.matrixL();
    CMatrix c = llt.matrixL().solve(a);
    c = llt.matrixL().solve(c.adjoint()).adjoint().eval();
    c = 0.5 * (c + c.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(c);
    if (es.info() != Eigen::Success) throw Error("dense_hermitian_eig: eigensolver failed");
    out.eigenvalues = es.eigenvalues().head(count);
    out.eigenvectors = l.adjoint().triangularView<Eigen::Upper>().solve(es.eigenvectors().leftCols(count));
    out.residuals = detail::column_residuals(a * out.eigenvectors, *b * out.eigenvectors, out.eigenvalues);
    return out;
}

inline SpectrumResult dense_hermitian_eig(const DensePencil& p, Eigen::Index count = -1) {
    detail::validate_pencil(p);
    return dense_hermitian_eig(p.A, p.unit_mass ? nullptr : &p.B, count);
}

/// Applies an approximate inverse to a block of residuals.
using Preconditioner = std::function<CMatrix(const CMatrix&)>;

template <class Matrix>
Preconditioner make_jacobi_preconditioner(const Pencil<Matrix>& p) {
    RVector inv(p.dim());
    for (Eigen::Index i = 0; i < p.dim(); ++i) {
        const double d = std::abs(std::real(p.A.coeff(i, i)));
        inv[i] = d > 0.0 ? 1.0 / d : 1.0;
    }
    return [inv](const CMatrix& r) { return CMatrix(inv.asDiagonal() * r); };
}

/// Number of eigenvalues of the pencil strictly below sigma (Sylvester inertia of A - sigma B).
inline Eigen::Index count_below(const SparsePencil& p, double sigma) {
    SparseMatrix shifted = p.A - sigma * p.B;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) throw Error("count_below: factorization failed");
    const auto d = ldlt.vectorD();
    Eigen::Index neg = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (std::real(d[i]) < 0.0) ++neg;
    return neg;
}

/// (A - sigma B)^{-1} with sigma below the spectrum. If the inertia shows
/// eigenvalues below sigma, sigma is lowered until A - sigma B is positive definite.
/// The shift actually used is written to *used_shift.
inline Preconditioner make_shift_invert_preconditioner(const SparsePencil& p, double sigma,
                                                       double* used_shift = nullptr) {
    auto ldlt = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
    double step = std::max(1.0, 1e-3 * std::abs(sigma));
    for (int attempt = 0; attempt < 60; ++attempt) {
        SparseMatrix shifted = p.A - sigma * p.B;
        ldlt->compute(shifted);
        if (ldlt->info() == Eigen::Success) {
            const auto d = ldlt->vectorD();
            bool positive = true;
            for (Eigen::Index i = 0; i < d.size() && positive; ++i) positive = std::real(d[i]) > 0.0;
            if (positive) {
                if (used_shift) *used_shift = sigma;
                return [ldlt](const CMatrix& r) { return CMatrix(ldlt->solve(r)); };
            }
        }
        sigma -= step;
        step *= 2.0;
    }
    throw Error("shift-invert preconditioner: no admissible shift found");
}

/// Lowest eigenpairs of a Hermitian pencil by block LOBPCG with soft locking.
/// Small problems (dim <= dense_threshold) are solved densely unless force_iterative.
template <class Matrix>
SpectrumResult lobpcg_smallest(const Pencil<Matrix>& p, const LobpcgOptions& opts,
                               Preconditioner precond = nullptr) {
    detail::validate_pencil(p);
    const Eigen::Index n = p.dim();
    const Eigen::Index k = opts.count;
    require(k >= 1, "lobpcg: count must be positive");
    require(n >= 4 * k, "lobpcg: dimension must be at least 4 * count");

    if (!opts.force_iterative && n <= opts.dense_threshold) {
        CMatrix a = detail::to_dense(p.A);
        CMatrix b = detail::to_dense(p.B);
        return dense_hermitian_eig(a, p.unit_mass ? nullptr : &b, k);
    }

    if (!precond) {
        if (opts.preconditioner == PreconditionerKind::jacobi) {
            precond = make_jacobi_preconditioner(p);
        } else if (opts.preconditioner == PreconditionerKind::shift_invert) {
            if constexpr (std::is_same_v<Matrix, SparseMatrix>) {
                precond = make_shift_invert_preconditioner(p, opts.shift.value_or(0.0));
            } else {
                SparsePencil sp{p.A.sparseView(), p.B.sparseView(), p.unit_mass};
                precond = make_shift_invert_preconditioner(sp, opts.shift.value_or(0.0));
            }
        }
    }

    const Eigen::Index guard = opts.guard > 0 ? opts.guard : std::max<Eigen::Index>(4, k / 2);
    const Eigen::Index bs = std::min(k + guard, n / 2);

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal;
    CMatrix x(n, bs);
    for (Eigen::Index j = 0; j < bs; ++j)
        for (Eigen::Index i = 0; i < n; ++i) x(i, j) = Complex(normal(rng), normal(rng));

    auto apply_b = [&](const CMatrix& v) -> CMatrix { return p.unit_mass ? v : CMatrix(p.B * v); };

    CMatrix bx = apply_b(x);
    detail::svqb(x, bx, 1e-14);
    CMatrix ax = p.A * x;
    {
        CMatrix h = x.adjoint() * ax;
        Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
        x = (x * es.eigenvectors()).eval();
        ax = (ax * es.eigenvectors()).eval();
        bx = (bx * es.eigenvectors()).eval();
    }
    RVector mu = (x.adjoint() * ax).diagonal().real();

    CMatrix pdir;
    SpectrumResult out;
    for (int it = 1; it <= opts.max_iter; ++it) {
        out.iterations = it;
        CMatrix r = ax - bx * mu.asDiagonal();
        RVector res = detail::column_residuals(ax, bx, mu);
        std::vector<Eigen::Index> active;
        bool done = true;
        for (Eigen::Index j = 0; j < bs; ++j) {
            if (res[j] > opts.tol) {
                active.push_back(j);
                if (j < k) done = false;
            }
        }
        if (done) {
            out.converged = true;
            break;
        }

        CMatrix w(n, static_cast<Eigen::Index>(active.size()));
        for (size_t c = 0; c < active.size(); ++c) w.col(c) = r.col(active[c]);
        if (precond) w = precond(w);

        // Two passes of B-orthogonalization against X keep the basis well conditioned.
        for (int pass = 0; pass < 2; ++pass) w -= x * (bx.adjoint() * w);
        CMatrix bw = apply_b(w);
        detail::svqb(w, bw, 1e-12);

        CMatrix q = w, bq = bw;
        if (pdir.cols() > 0) {
            CMatrix pp = pdir;
            for (int pass = 0; pass < 2; ++pass) pp -= x * (bx.adjoint() * pp) + w * (bw.adjoint() * pp);
            CMatrix bpp = apply_b(pp);
            detail::svqb(pp, bpp, 1e-12);
            q.conservativeResize(n, w.cols() + pp.cols());
            bq.conservativeResize(n, w.cols() + pp.cols());
            q.rightCols(pp.cols()) = pp;
            bq.rightCols(pp.cols()) = bpp;
            detail::svqb(q, bq, 1e-12);
        }

        CMatrix aq = p.A * q;
        const Eigen::Index m = bs + q.cols();
        CMatrix s(n, m), as(n, m), bsm(n, m);
        s << x, q;
        as << ax, aq;
        bsm << bx, bq;

        CMatrix gram_b = s.adjoint() * bsm;
        gram_b = 0.5 * (gram_b + gram_b.adjoint()).eval();
        CMatrix gram_a = s.adjoint() * as;
        gram_a = 0.5 * (gram_a + gram_a.adjoint()).eval();

        Eigen::SelfAdjointEigenSolver<CMatrix> gb(gram_b);
        const RVector& d = gb.eigenvalues();
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < d.size(); ++i)
            if (d[i] > 1e-12 * d.maxCoeff()) keep.push_back(i);
        CMatrix z(m, static_cast<Eigen::Index>(keep.size()));
        for (size_t c = 0; c < keep.size(); ++c) z.col(c) = gb.eigenvectors().col(keep[c]) / std::sqrt(d[keep[c]]);
        CMatrix h = z.adjoint() * gram_a * z;
        Eigen::SelfAdjointEigenSolver<CMatrix> rr(0.5 * (h + h.adjoint()));
        CMatrix c = z * rr.eigenvectors().leftCols(bs);

        CMatrix cq = c.bottomRows(q.cols());
        pdir = q * cq;
        x = s * c;
        ax = as * c;
        bx = bsm * c;
        mu = rr.eigenvalues().head(bs);

        // Re-orthonormalize when accumulated drift shows up in the Gram matrix.
        if (max_abs(CMatrix(x.adjoint() * bx) - CMatrix::Identity(bs, bs)) > 1e-10) {
            bx = apply_b(x);
            detail::svqb(x, bx, 1e-14);
            ax = p.A * x;
            CMatrix hx = x.adjoint() * ax;
            Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (hx + hx.adjoint()));
            x = (x * es.eigenvectors()).eval();
            ax = (ax * es.eigenvectors()).eval();
            bx = (bx * es.eigenvectors()).eval();
            mu = es.eigenvalues();
            pdir.resize(0, 0);
        }
    }

    ax = p.A * x.leftCols(k);
    bx = apply_b(x.leftCols(k));
    out.eigenvalues = mu.head(k);
    out.eigenvectors = x.leftCols(k);
    out.residuals = detail::column_residuals(ax, bx, out.eigenvalues);
    return out;
}

/// Groups ascending eigenvalues whose gaps are below 1e-8 (1 + |mu|).
inline std::vector<std::vector<Eigen::Index>> degeneracy_clusters(const RVector& mu, double rel = 1e-8) {
    std::vector<std::vector<Eigen::Index>> clusters;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        if (clusters.empty() || mu[i] - mu[clusters.back().back()] > rel * (1.0 + std::abs(mu[i])))
            clusters.emplace_back();
        clusters.back().push_back(i);
    }
    return clusters;
}

} // namespace thinshell
