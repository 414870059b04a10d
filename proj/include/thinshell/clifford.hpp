#pragma once

#include "thinshell/core.hpp"

#include <string>
#include <vector>

namespace thinshell {

inline constexpr int default_max_clifford_dimension = 12;

namespace detail {

/// Hermitian generators gamma_1..gamma_n(n) for the recursive construction.
inline std::vector<CMatrix> gamma_generators(int n) {
    if (n == 1) return {CMatrix::Ones(1, 1)};
    if (n == 2) {
        CMatrix sx(2, 2), sy(2, 2);
        sx << 0, 1, 1, 0;
        sy << 0, -imag_unit, imag_unit, 0;
        return {sx, sy};
    }
    if (n % 2 == 0) {
        std::vector<CMatrix> prev = gamma_generators(n - 1);
        const Eigen::Index h = prev.front().rows();
        std::vector<CMatrix> out;
        for (const CMatrix& g : prev) {
            CMatrix b = CMatrix::Zero(2 * h, 2 * h);
            b.topRightCorner(h, h) = g;
            b.bottomLeftCorner(h, h) = g;
            out.push_back(std::move(b));
        }
        CMatrix last = CMatrix::Zero(2 * h, 2 * h);
        last.topRightCorner(h, h) = -imag_unit * CMatrix::Identity(h, h);
        last.bottomLeftCorner(h, h) = imag_unit * CMatrix::Identity(h, h);
        out.push_back(std::move(last));
        return out;
    }
    std::vector<CMatrix> out = gamma_generators(n - 1);
    const Eigen::Index size = out.front().rows();
    CMatrix last = CMatrix::Identity(size, size);
    last.bottomRightCorner(size / 2, size / 2) *= -1.0;
    out.push_back(std::move(last));
    return out;
}

} // namespace detail

/// alpha_1..alpha_{n+1}: N x N Hermitian, pairwise anticommuting, squares = I.
/// alpha_{n+1} is the mass matrix diag(I, -I).
class CliffordFamily {
public:
    explicit CliffordFamily(int n, int max_n = default_max_clifford_dimension) : n_(n) {
        require(n >= 1, "CliffordFamily: n must be >= 1");
        require(n <= max_n, "CliffordFamily: n = " + std::to_string(n) + " exceeds the cap " + std::to_string(max_n));
        alphas_ = detail::gamma_generators(n + 1);
        if (n % 2 == 1) {
            const Eigen::Index size = alphas_.front().rows();
            CMatrix mass = CMatrix::Identity(size, size);
            mass.bottomRightCorner(size / 2, size / 2) *= -1.0;
            alphas_.back() = mass;
        }
    }

    int n() const { return n_; }
    int size() const { return static_cast<int>(alphas_.front().rows()); }
    int half() const { return size() / 2; }

    /// 1-based, j = 1..n+1.
    const CMatrix& alpha(int j) const {
        require(j >= 1 && j <= n_ + 1, "CliffordFamily::alpha: index out of range");
        return alphas_[j - 1];
    }
    const CMatrix& mass_matrix() const { return alphas_.back(); }
    const std::vector<CMatrix>& alphas() const { return alphas_; }

    /// Gamma(x) = sum_j x_j alpha_j over j = 1..n.
    CMatrix symbol(const RVector& x) const {
        require(x.size() == n_, "CliffordFamily::symbol: x has the wrong dimension");
        CMatrix g = CMatrix::Zero(size(), size());
        for (int j = 0; j < n_; ++j) g += x[j] * alphas_[j];
        return g;
    }

    /// Lower-left block beta(x) of Gamma(x) = offdiag(beta^*, beta).
    CMatrix beta(const RVector& x) const { return symbol(x).bottomLeftCorner(half(), half()); }

    /// Largest deviation from {alpha_j, alpha_k} = 2 delta_jk I and alpha_j = alpha_j^*.
    double relation_defect() const {
        double defect = 0.0;
        const CMatrix id = CMatrix::Identity(size(), size());
        for (int j = 0; j <= n_; ++j) {
            defect = std::max(defect, hermiticity_defect(alphas_[j]));
            for (int k = j; k <= n_; ++k) {
                CMatrix ac = alphas_[j] * alphas_[k] + alphas_[k] * alphas_[j];
                if (j == k) ac -= 2.0 * id;
                defect = std::max(defect, max_abs(ac));
            }
        }
        return defect;
    }

private:
    int n_;
    std::vector<CMatrix> alphas_;
};

/// Theta_{x,y} = (I + i Gamma(y))(I - i Gamma(x)) / 2 for unit x, y.
/// Unitary, and Theta alpha_{n+1} Gamma(x) Theta^* = alpha_{n+1} Gamma(y).
inline CMatrix intertwiner(const CliffordFamily& family, const RVector& x, const RVector& y) {
    require(std::abs(x.norm() - 1.0) < 1e-12 && std::abs(y.norm() - 1.0) < 1e-12,
            "intertwiner: x and y must be unit vectors");
    const CMatrix id = CMatrix::Identity(family.size(), family.size());
    return 0.5 * (id + imag_unit * family.symbol(y)) * (id - imag_unit * family.symbol(x));
}

/// -i alpha_{n+1} Gamma(x): Hermitian involution for unit x, defines the boundary projectors.
inline CMatrix boundary_involution(const CliffordFamily& family, const RVector& x) {
    return -imag_unit * family.mass_matrix() * family.symbol(x);
}

/// Orthonormal basis (N x N/2) of ran P_side(x), side = +1 or -1, where
/// P_pm(x) = (I pm (-i alpha_{n+1} Gamma(x))) / 2.
inline CMatrix boundary_basis(const CliffordFamily& family, const RVector& x, int side) {
    require(side == 1 || side == -1, "boundary_basis: side must be +1 or -1");
    const int h = family.half();
    const CMatrix b = family.beta(x);
    CMatrix basis(family.size(), h);
    basis.topRows(h) = CMatrix::Identity(h, h);
    basis.bottomRows(h) = (double(side) * imag_unit) * b;
    return basis / std::sqrt(2.0);
}

} // namespace thinshell
