#include "thinshell/shell.hpp"

#include "oracles/annulus.hpp"
#include "oracles/reference.hpp"

#include <gtest/gtest.h>

using namespace thinshell;

TEST(Shell, TransverseCellRule) {
    EXPECT_EQ(default_transverse_cells(0.1), 13);
    EXPECT_EQ(default_transverse_cells(0.035), 22);
    EXPECT_EQ(default_transverse_cells(1.0), 8);
}

TEST(Shell, DofCountAndPencilStructure) {
    const CliffordFamily fam(2);
    const ShellFormAssembly a = assemble_shell(fam, ShellMetric2D(Curve::ellipse(2.0, 1.0), 0.1), 0.5, 40, 10);
    // interior nodes carry N = 2 values, boundary nodes N/2 = 1
    EXPECT_EQ(a.dofs.dim(), 40 * (9 * 2 + 2));
    EXPECT_EQ(a.pencil.dim(), a.dofs.dim());
    EXPECT_LE(hermiticity_defect(a.pencil.A), 1e-12 * max_abs(a.pencil.A));
    EXPECT_LE(hermiticity_defect(a.pencil.B), 1e-15);
    const Eigen::SimplicialLDLT<SparseMatrix> ldlt(a.pencil.B);
    EXPECT_EQ(ldlt.info(), Eigen::Success);
    EXPECT_GT(ldlt.vectorD().real().minCoeff(), 0.0);
}

TEST(Shell, AnnulusSpectrumMatchesBesselOracle) {
    const CliffordFamily fam(2);
    for (double m : {0.0, 0.5}) {
        const double eps = 0.1;
        const ShellMetric2D metric(Curve::circle(), eps);
        const RichardsonSpectrum r = richardson_shell_eigenvalues(fam, metric, m, 96, 13, 4);
        const std::vector<double> ref = oracle::annulus_squared_spectrum(m, eps, 4);
        ASSERT_TRUE(r.converged);
        for (int j = 0; j < 4; ++j) {
            EXPECT_NEAR(r.extrapolated[j], ref[j], 1e-5 * ref[j]) << "m=" << m << " j=" << j;
            // Richardson improves on both grids
            EXPECT_LT(std::abs(r.extrapolated[j] - ref[j]), std::abs(r.fine[j] - ref[j]));
        }
    }
}

TEST(Shell, ConformingEigenvaluesDecreaseToTheOracle) {
    const CliffordFamily fam(2);
    const double eps = 0.1, m = 0.5;
    const ShellMetric2D metric(Curve::circle(), eps);
    const std::vector<double> ref = oracle::annulus_squared_spectrum(m, eps, 2);
    const RichardsonSpectrum r = richardson_shell_eigenvalues(fam, metric, m, 32, 13, 2, {}, 3);
    ASSERT_TRUE(r.converged);
    for (int j = 0; j < 2; ++j) {
        EXPECT_GT(r.levels[0][j], r.levels[1][j]);
        EXPECT_GT(r.levels[1][j], r.levels[2][j]);
        EXPECT_GT(r.levels[2][j], ref[j]);
        const double order = std::log2((r.levels[0][j] - r.levels[1][j]) / (r.levels[1][j] - r.levels[2][j]));
        EXPECT_GE(order, 1.9) << "j=" << j;
        // the third level removes the h^4 term
        const double two_level = (4.0 * r.levels[2][j] - r.levels[1][j]) / 3.0;
        EXPECT_LT(std::abs(r.extrapolated[j] - ref[j]), std::abs(two_level - ref[j])) << "j=" << j;
    }
}

TEST(Shell, RombergTableMatchesClosedForm) {
    // a + b h^2 + c h^4 on h, h/2, h/4
    auto f = [](double h) { return 3.0 + 2.0 * h * h - 5.0 * h * h * h * h; };
    const std::vector<double> r = romberg({f(1.0), f(0.5), f(0.25)});
    EXPECT_DOUBLE_EQ(r[0], f(0.25));
    EXPECT_NEAR(r[1], 3.0, 1e-13);
    EXPECT_NEAR(romberg({f(0.5), f(0.25)})[1], (4.0 * f(0.25) - f(0.5)) / 3.0, 1e-15);
}

TEST(Shell, EigenvectorsSatisfyBoundaryConditions) {
    const CliffordFamily fam(2);
    const ShellFormAssembly a = assemble_shell(fam, ShellMetric2D(Curve::ellipse(2.0, 1.0), 0.1), 0.0, 48, 10);
    const SpectrumResult r = lowest_eigenvalues(a, 2);
    ASSERT_TRUE(r.converged);
    for (int j = 0; j < 2; ++j) {
        EXPECT_LE(shell_boundary_residual(fam, a.dofs, r.eigenvectors.col(j)), 1e-12);
        EXPECT_LE(r.residuals[j], 1e-8 * std::abs(r.eigenvalues[j]));
    }
    // the shift hint lies below the spectrum
    EXPECT_LT(shell_shift_hint(a.metric, 0.0), r.eigenvalues[0]);
}

TEST(Shell, FlatStripConvergesAtSecondOrder) {
    const CliffordFamily fam(2);
    const Curve strip = Curve::strip(2.0 * pi);
    const double eps = 0.1, m = 0.5;
    const ShellMetric2D metric(strip, eps);
    const std::vector<double> exact = flat_strip_spectrum(m, eps, strip.length(), 4);
    // transverse (x) Fourier reference: E_1(m eps)^2/eps^2, then + 1 twice
    EXPECT_NEAR(exact[2] - exact[0], 1.0, 1e-12);
    std::vector<double> err;
    for (int level = 0; level < 3; ++level) {
        const SpectrumResult r = lowest_eigenvalues(assemble_shell(fam, metric, m, 32 << level, 8 << level), 4);
        err.push_back(std::abs(r.eigenvalues[2] - exact[2]));
    }
    EXPECT_GE(std::log2(err[0] / err[1]), 1.9);
    EXPECT_GE(std::log2(err[1] / err[2]), 1.9);
}

TEST(Sandwich, UpperMinusLowerIsPositiveSemidefinite) {
    const CliffordFamily fam(2);
    const ShellMetric2D metric(Curve::ellipse(2.0, 1.0), 0.05);
    const SandwichFormAssembly s = assemble_sandwich(fam, metric, 0.5, 9.0, 32, 8);
    const CMatrix diff = CMatrix(s.upper.A) - CMatrix(s.lower.A);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(diff);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().cwiseAbs().maxCoeff());
    EXPECT_EQ(max_abs(SparseMatrix(s.upper.B - s.lower.B)), 0.0);
}

TEST(Sandwich, BracketsTheShellEigenvalue) {
    const CliffordFamily fam(2);
    const Curve c = Curve::circle();
    const double k = 3.0 * (1.0 + c.max_abs_curvature());
    for (double eps : {0.1, 0.05}) {
        const ShellMetric2D metric(c, eps);
        const int nt = default_transverse_cells(eps);
        const ShellFormAssembly shell = assemble_shell(fam, metric, 0.0, 64, nt);
        const SandwichFormAssembly sw = assemble_sandwich(fam, metric, 0.0, k, 64, nt);
        const double mu = lowest_eigenvalues(shell, 1).eigenvalues[0];
        LobpcgOptions o;
        o.shift = shell_shift_hint(metric, 0.0) - 2.0 * k;
        const double lo = lowest_eigenvalues(sw.lower, 1, o).eigenvalues[0];
        const double hi = lowest_eigenvalues(sw.upper, 1, o).eigenvalues[0];
        const double tol = 10.0 * shell.mesh_size() * shell.mesh_size() * mu;
        EXPECT_LE(lo - tol, mu) << "eps = " << eps;
        EXPECT_LE(mu, hi + tol) << "eps = " << eps;
        EXPECT_LT(lo, hi);
    }
}

TEST(Shell, RejectsBadInput) {
    const CliffordFamily fam(2);
    const ShellMetric2D metric(Curve::circle(), 0.1);
    EXPECT_THROW(assemble_shell(fam, metric, 0.0, 16, 8), InvalidInput);
    EXPECT_THROW(assemble_shell(fam, metric, 0.0, 32, 4), InvalidInput);
    EXPECT_THROW(assemble_shell(fam, metric, -1.0, 32, 8), InvalidInput);
    EXPECT_THROW(assemble_shell(CliffordFamily(3), metric, 0.0, 32, 8), InvalidInput);
    EXPECT_THROW(assemble_sandwich(fam, metric, 0.0, -1.0, 32, 8), InvalidInput);
    EXPECT_THROW(lowest_eigenvalues(assemble_shell(fam, metric, 0.0, 32, 8), 13), InvalidInput);
}
