#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace thinshell {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using Triplet = Eigen::Triplet<Complex>;
using Vec2 = Eigen::Vector2d;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex imag_unit{0.0, 1.0};

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated precondition on an argument (bad dimension, eps out of range...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or job description.
class ConfigError : public Error {
public:
    using Error::Error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw InvalidInput(message);
}

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double max_abs(const SparseMatrix& m) {
    double r = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
    return r;
}

/// Largest entry of A - A^H.
inline double hermiticity_defect(const CMatrix& a) { return max_abs(a - a.adjoint()); }

inline double hermiticity_defect(const SparseMatrix& a) {
    SparseMatrix d = a - SparseMatrix(a.adjoint());
    return max_abs(d);
}

} // namespace thinshell
