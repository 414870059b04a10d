#include "thinshell/eigsolve.hpp"
#include "thinshell/shell.hpp"

#include "oracles/reference.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace thinshell;

namespace {

SparsePencil dirichlet_laplacian(int n) {
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, i, 2.0);
        if (i + 1 < n) t.emplace_back(i, i + 1, -1.0), t.emplace_back(i + 1, i, -1.0);
    }
    SparseMatrix a(n, n), b(n, n);
    a.setFromTriplets(t.begin(), t.end());
    b.setIdentity();
    return {a, b, true};
}

/// Random Hermitian banded A and Hermitian positive definite banded B.
SparsePencil random_banded_pencil(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<Triplet> ta, tb;
    for (int i = 0; i < n; ++i) {
        ta.emplace_back(i, i, 4.0 + g(rng));
        tb.emplace_back(i, i, 3.0);
        for (int d = 1; d <= 3 && i + d < n; ++d) {
            const Complex za(g(rng), g(rng)), zb(0.3 * g(rng), 0.3 * g(rng));
            ta.emplace_back(i, i + d, za), ta.emplace_back(i + d, i, std::conj(za));
            tb.emplace_back(i, i + d, zb), tb.emplace_back(i + d, i, std::conj(zb));
        }
    }
    SparseMatrix a(n, n), b(n, n);
    a.setFromTriplets(ta.begin(), ta.end());
    b.setFromTriplets(tb.begin(), tb.end());
    return {a, b, false};
}

} // namespace

TEST(Lobpcg, LaplacianMatchesClosedForm) {
    const int n = 300;
    const SparsePencil p = dirichlet_laplacian(n);
    const auto ref = oracle::dirichlet_lattice_eigenvalues(n);
    for (PreconditionerKind kind : {PreconditionerKind::none, PreconditionerKind::jacobi, PreconditionerKind::shift_invert}) {
        LobpcgOptions o;
        o.count = 5;
        o.force_iterative = true;
        o.preconditioner = kind;
        o.shift = -0.01;
        o.tol = 1e-10;
        o.max_iter = 5000;
        const SpectrumResult r = lobpcg_smallest(p, o);
        ASSERT_TRUE(r.converged) << static_cast<int>(kind);
        for (int j = 0; j < 5; ++j) EXPECT_NEAR(r.eigenvalues[j], ref[j], 1e-10) << static_cast<int>(kind);
    }
}

TEST(Lobpcg, GeneralizedPencilMatchesCholeskyOracle) {
    const SparsePencil p = random_banded_pencil(400, 41);
    const auto ref = oracle::generalized_eigenvalues(CMatrix(p.A), CMatrix(p.B));
    LobpcgOptions o;
    o.count = 6;
    o.force_iterative = true;
    o.shift = ref[0] - 1.0;
    const SpectrumResult r = lobpcg_smallest(p, o);
    ASSERT_TRUE(r.converged);
    const CMatrix bx = p.B * r.eigenvectors, ax = p.A * r.eigenvectors;
    EXPECT_LE(max_abs(CMatrix(r.eigenvectors.adjoint() * bx - CMatrix::Identity(6, 6))), 1e-10);
    for (int j = 0; j < 6; ++j) {
        EXPECT_NEAR(r.eigenvalues[j], ref[j], 1e-9 * (1.0 + std::abs(ref[j])));
        const double rayleigh = std::real(r.eigenvectors.col(j).dot(ax.col(j)) / r.eigenvectors.col(j).dot(bx.col(j)));
        EXPECT_NEAR(rayleigh, r.eigenvalues[j], 1e-10 * (1.0 + std::abs(ref[j])));
    }
}

TEST(Lobpcg, DenseAndIterativeAgreeOnShellPencil) {
    const CliffordFamily fam(2);
    const ShellFormAssembly a = assemble_shell(fam, ShellMetric2D(Curve::circle(), 0.1), 0.5, 32, 8);
    LobpcgOptions it;
    it.force_iterative = true;
    const SpectrumResult ri = lowest_eigenvalues(a, 6, it);
    const SpectrumResult rd = lowest_eigenvalues(a, 6);
    ASSERT_TRUE(rd.used_dense);
    ASSERT_FALSE(ri.used_dense);
    ASSERT_TRUE(ri.converged);
    EXPECT_LE((ri.eigenvalues - rd.eigenvalues).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Lobpcg, FixedSeedIsBitReproducible) {
    const SparsePencil p = random_banded_pencil(300, 43);
    LobpcgOptions o;
    o.count = 4;
    o.force_iterative = true;
    o.preconditioner = PreconditionerKind::jacobi;
    const SpectrumResult a = lobpcg_smallest(p, o), b = lobpcg_smallest(p, o);
    for (int j = 0; j < 4; ++j) EXPECT_EQ(a.eigenvalues[j], b.eigenvalues[j]);
    EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Lobpcg, InertiaCountAndShiftCorrection) {
    const SparsePencil p = random_banded_pencil(200, 47);
    const auto ref = oracle::generalized_eigenvalues(CMatrix(p.A), CMatrix(p.B));
    const double sigma = 0.5 * (ref[9] + ref[10]);
    EXPECT_EQ(count_below(p, sigma), 10);
    double used = 0.0;
    make_shift_invert_preconditioner(p, sigma, &used);
    EXPECT_LT(used, ref[0]);
}

TEST(Lobpcg, DegeneracyClusters) {
    RVector mu(5);
    mu << 1.0, 1.0 + 1e-12, 2.0, 3.0, 3.0;
    const auto c = degeneracy_clusters(mu);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c[0].size(), 2u);
    EXPECT_EQ(c[1].size(), 1u);
    EXPECT_EQ(c[2].size(), 2u);
}

TEST(Lobpcg, RejectsInvalidPencils) {
    SparsePencil p = dirichlet_laplacian(40);
    LobpcgOptions o;
    o.count = 11;
    EXPECT_THROW(lobpcg_smallest(p, o), InvalidInput);
    o.count = 2;
    p.A.coeffRef(0, 1) = Complex(0.0, 1.0);
    EXPECT_THROW(lobpcg_smallest(p, o), InvalidInput);
    DensePencil d{CMatrix::Identity(4, 4), -CMatrix::Identity(4, 4), false};
    EXPECT_THROW(dense_hermitian_eig(d), InvalidInput);
    EXPECT_THROW(parse_preconditioner("ilu"), ConfigError);
    EXPECT_EQ(parse_preconditioner("jacobi"), PreconditionerKind::jacobi);
}
