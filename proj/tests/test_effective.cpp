#include "thinshell/effective.hpp"

#include "oracles/reference.hpp"

#include <gtest/gtest.h>

using namespace thinshell;

TEST(Effective, CouplingConstant) { EXPECT_NEAR(effective_coupling, (pi - 2.0) / (2.0 * pi), 1e-16); }

TEST(Effective, PotentialOfCurves) {
    EXPECT_NEAR(effective_potential(-1.0, 0.0), -1.0 / (pi * pi), 1e-16);
    EXPECT_NEAR(effective_potential(0.0, 1.0), 0.5 + 2.0 / (pi * pi), 1e-16);
}

TEST(Effective, ConnectionIsDiagonalUnitOnTheUnitCircle) {
    const CliffordFamily fam(2);
    const Curve c = Curve::circle();
    for (double s : {0.0, 1.0, 4.0}) {
        const CMatrix w = omega_oneform(fam, c, s);
        EXPECT_LE(hermiticity_defect(w), 1e-15);
        EXPECT_NEAR(std::abs(w(0, 1)), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(w(0, 0)), 1.0, 1e-14);
        EXPECT_NEAR(std::abs(w(0, 0) + w(1, 1)), 0.0, 1e-14);
    }
}

TEST(Effective, CircleSpectrumMatchesPlaneWaves) {
    const CliffordFamily fam(2);
    for (EffectiveScheme scheme : {EffectiveScheme::spectral}) {
        const RVector mu = effective_eigenvalues(assemble_effective(fam, Curve::circle(), 128, scheme), 10);
        const auto ref = oracle::circle_plane_wave_spectrum({1.0, -1.0}, effective_coupling, -1.0 / (pi * pi), 10);
        for (int j = 0; j < 10; ++j) EXPECT_NEAR(mu[j], ref[j], 1e-10);
    }
}

TEST(Magnetic, CircleSpectrumMatchesFourierOracle) {
    const RVector mu = magnetic_eigenvalues(assemble_magnetic(Curve::circle(), 512), 5);
    const auto ref = oracle::circle_plane_wave_spectrum({1.0}, (pi - 2.0) / (2.0 * pi), -1.0 / (pi * pi), 5);
    const auto formula = circle_magnetic_spectrum(5);
    for (int j = 0; j < 5; ++j) {
        EXPECT_NEAR(mu[j], ref[j], 1e-6);
        EXPECT_NEAR(formula[j], ref[j], 1e-13);
    }
    EXPECT_NEAR(formula[0], std::pow((pi - 2.0) / (2.0 * pi), 2) - 1.0 / (pi * pi), 1e-15);
}

TEST(Magnetic, CircleRadiusScaling) {
    const RVector mu = magnetic_eigenvalues(assemble_magnetic(Curve::circle(2.0), 256), 4);
    const auto ref = circle_magnetic_spectrum(4, 2.0);
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(mu[j], ref[j], 1e-9);
}

TEST(Gauge, EllipseEffectiveSpectrumPairsWithMagnetic) {
    const CliffordFamily fam(2);
    const Curve e = Curve::ellipse(2.0, 1.0);
    const GaugeCheck g = gauge_transform_check(fam, e, 512, 8);
    EXPECT_LE(g.spectral_distance, 1e-5);
    EXPECT_LE(g.phase_periodicity, 1e-8);
    ASSERT_EQ(g.mu_effective.size(), 8u);
    for (int j = 0; j < 8; j += 2) EXPECT_NEAR(g.mu_effective[j], g.mu_effective[j + 1], 1e-8);
}

TEST(Gauge, LinkPhaseSimilarityIsExact) {
    const CliffordFamily fam(2);
    EXPECT_LE(discrete_gauge_similarity(fam, Curve::ellipse(2.0, 1.0), 256), 1e-12);
    EXPECT_LE(discrete_gauge_similarity(fam, Curve::fourier({{-1, Complex(1.0, 0.0)}, {2, Complex(0.08, 0.0)}}), 128), 1e-12);
}

TEST(Gauge, WrongCouplingIsDetected) {
    const CliffordFamily fam(2);
    const Curve e = Curve::ellipse(2.0, 1.0);
    const double wrong = 0.3;
    EXPECT_GT(gauge_transform_check(fam, e, 256, 8, wrong).spectral_distance, 1e-3);
    EXPECT_GT(discrete_gauge_similarity(fam, e, 128, wrong), 1e-4);
}

TEST(Gauge, PhaseIsPeriodic) {
    const std::vector<double> v = gauge_phase(Curve::ellipse(2.0, 1.0), 400);
    EXPECT_EQ(v.front(), 0.0);
    EXPECT_NEAR(v.back(), 0.0, 1e-6);
}

TEST(Effective, SpectralSchemeIsConverged) {
    const CliffordFamily fam(2);
    const Curve e = Curve::ellipse(2.0, 1.0);
    const RVector a = effective_eigenvalues(assemble_effective(fam, e, 256), 6);
    const RVector b = effective_eigenvalues(assemble_effective(fam, e, 512), 6);
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Effective, LinkPhaseSchemeIsSecondOrder) {
    const CliffordFamily fam(2);
    const Curve e = Curve::ellipse(2.0, 1.0);
    const RVector ref = effective_eigenvalues(assemble_effective(fam, e, 512), 5);
    std::vector<RVector> mu;
    for (int n : {64, 128, 256}) mu.push_back(effective_eigenvalues(assemble_effective(fam, e, n, EffectiveScheme::link_phase), 5));
    for (int j = 0; j < 5; ++j) {
        const double e0 = std::abs(mu[0][j] - ref[j]), e1 = std::abs(mu[1][j] - ref[j]), e2 = std::abs(mu[2][j] - ref[j]);
        EXPECT_GE(std::log2(e0 / e1), 1.9) << "level " << j;
        EXPECT_GE(std::log2(e1 / e2), 1.9) << "level " << j;
    }
}

TEST(Effective, PencilsAreHermitian) {
    const CliffordFamily fam(2);
    const Curve c = Curve::fourier({{-1, Complex(1.0, 0.0)}, {3, Complex(0.05, 0.02)}});
    for (EffectiveScheme s : {EffectiveScheme::spectral, EffectiveScheme::link_phase}) {
        const EffectiveFormAssembly a = assemble_effective(fam, c, 64, s);
        EXPECT_LE(hermiticity_defect(a.pencil.A), 1e-12 * max_abs(a.pencil.A));
        EXPECT_TRUE(a.diagonal_omega);
        EXPECT_LE(hermiticity_defect(assemble_magnetic(c, 64, s).pencil.A), 1e-12);
    }
}

TEST(Effective, RejectsBadInput) {
    const CliffordFamily fam(2);
    EXPECT_THROW(assemble_effective(fam, Curve::circle(), 15), InvalidInput);
    EXPECT_THROW(assemble_effective(fam, Curve::circle(), 8), InvalidInput);
    EXPECT_THROW(assemble_effective(CliffordFamily(3), Curve::circle(), 32), InvalidInput);
    EXPECT_THROW(parse_effective_scheme("fd"), ConfigError);
    EXPECT_EQ(parse_effective_scheme("link_phase"), EffectiveScheme::link_phase);
}
