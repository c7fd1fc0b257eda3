#include "mvh/error.hpp"
#include "mvh/oracle.hpp"
#include "mvh/psychophys.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace mvh;

TEST(Kelly, ZeroSpatialFrequencyGivesZero) {
    for (double v : {0.5, 1.0, 3.0, 20.0}) EXPECT_EQ(kelly_csf(0.0, v), 0.0);
}

TEST(Kelly, ScaleLaws) {
    EXPECT_DOUBLE_EQ(kelly_scale_k(3.0), 6.1);
    EXPECT_DOUBLE_EQ(kelly_s_max(1.0), 15.3);
    EXPECT_NEAR(kelly_scale_k(30.0), 6.1 + 7.3, 1e-12);
}

TEST(Kelly, NonPositiveVelocityIsParameterError) {
    EXPECT_THROW(kelly_csf(1.0, 0.0), Error);
    EXPECT_THROW(kelly_csf(1.0, -2.0), Error);
}

TEST(Kelly, SubstitutionIdentity) {
    EXPECT_EQ(*kelly_csf_ft(4.0, 12.0), kelly_csf(4.0, 3.0));
    EXPECT_FALSE(kelly_csf_ft(0.0, 5.0).has_value());
    EXPECT_EQ(*kelly_csf_ft(2.0, 0.0), 0.0);
}

// tests/oracles/psychophys_reference.py
TEST(Kelly, MatchesScriptedFormula) {
    struct Case {
        double fs, v, expected;
    };
    const Case cases[] = {{0.5, 1.0, 45.118100496704},      {1.0, 3.0, 183.78553457294294},
                          {2.0, 10.0, 15.802945753614136},  {4.0, 0.5, 194.977008917627},
                          {8.0, 30.0, 3.7016157455181266e-25}, {3.3, 7.7, 3.415776798409136}};
    for (const auto& c : cases) {
        EXPECT_NEAR(kelly_csf(c.fs, c.v), c.expected, 1e-12 * std::max(1.0, c.expected))
            << c.fs << " " << c.v;
    }
}

TEST(Kelly, CyclesPerDegreeUnitSkipsTwoPi) {
    KellyParams p{SpatialUnit::CyclesPerDegree};
    EXPECT_NEAR(kelly_csf(2.0 * std::numbers::pi, 4.0, p), kelly_csf(1.0, 4.0), 1e-9);
}

TEST(Kelly, UnimodalInSpatialFrequency) {
    for (double v : {0.5, 2.0, 8.0}) {
        int sign_changes = 0;
        double prev = kelly_csf(0.01, v);
        double prev_d = 0.0;
        for (int i = 2; i <= 4000; ++i) {
            const double f = 0.01 * i;
            const double val = kelly_csf(f, v);
            const double d = val - prev;
            if (i > 2 && ((d < 0) != (prev_d < 0)) && std::abs(d) > 1e-300) ++sign_changes;
            prev = val;
            prev_d = d;
        }
        EXPECT_EQ(sign_changes, 1) << "v=" << v;
    }
}

TEST(Boxcar, NonNegative) {
    for (double f : {0.1, 1.0, 5.0, 30.0, 80.0}) EXPECT_GE(boxcar_csf(f, 0.2), 0.0);
}

TEST(Boxcar, SelfConvergence) {
    BoxcarOptions tight;
    tight.panel_tolerance = 1e-13;
    tight.tail_tolerance = 1e-9;
    for (double f : {0.5, 2.0, 10.0}) {
        const double a = boxcar_csf(f, 0.2);
        const double b = boxcar_csf(f, 0.2, tight);
        EXPECT_LT(std::abs(a - b) / b, 1e-6) << f;
    }
}

// Trapezoid over [0, 4000] Hz with 2e6 intervals, tests/oracles/psychophys_reference.py.
TEST(Boxcar, MatchesIndependentTrapezoid) {
    const double ref = boxcar_csf(2.0, 0.2);
    const std::pair<double, double> cases[] = {{0.5, 0.4596886081854219}, {1.0, 0.7122544075652609},
                                               {4.0, 0.9755891768330647}, {8.0, 0.34812308878497056},
                                               {16.0, 0.013988217483246202}};
    for (const auto& [f, expected] : cases) {
        EXPECT_LT(std::abs(boxcar_csf(f, 0.2) / ref - expected) / expected, 1e-4) << f;
    }
}

TEST(Boxcar, PeakMovesDownAsTimeShrinks) {
    const auto grid = log_grid();
    auto peak = [&](double T) {
        double best = 0.0, at = 0.0;
        for (std::size_t i = 0; i < grid.size(); i += 4) {
            const double v = boxcar_csf(grid[i], T);
            if (v > best) {
                best = v;
                at = grid[i];
            }
        }
        return at;
    };
    const double p005 = peak(0.05), p02 = peak(0.2), p1 = peak(1.0);
    EXPECT_LE(p005, p02);
    EXPECT_LE(p02, p1);
}

TEST(Boxcar, InvalidInputs) {
    EXPECT_THROW(boxcar_csf(0.0, 0.2), Error);
    EXPECT_THROW(boxcar_csf(1.0, 0.0), Error);
}

TEST(Williams, DiffractionClosedForms) {
    EXPECT_DOUBLE_EQ(diffraction_mtf(0.0, 87.2), 1.0);
    EXPECT_EQ(diffraction_mtf(87.2, 87.2), 0.0);
    EXPECT_EQ(diffraction_mtf(100.0, 87.2), 0.0);
    const double expected = (2.0 / std::numbers::pi) *
                            (std::numbers::pi / 3.0 - 0.5 * std::sqrt(3.0) / 2.0);
    EXPECT_NEAR(diffraction_mtf(43.6, 87.2), expected, 1e-15);
    EXPECT_NEAR(expected, 0.3910, 5e-5);
}

TEST(Williams, InUnitIntervalAndMonotone) {
    double prev = 2.0;
    for (int i = 0; i <= 1000; ++i) {
        const double f = 87.2 * i / 1000.0;
        const double m = williams_mtf(f);
        EXPECT_GE(m, 0.0);
        EXPECT_LE(m, 1.0 + 1e-15);
        EXPECT_LE(m, prev);
        prev = m;
    }
    EXPECT_NEAR(williams_mtf(0.0), 1.0, 1e-15);
    EXPECT_THROW(williams_mtf(-1.0), Error);
}

TEST(GaussianSpectrum, BasicProperties) {
    EXPECT_EQ(gaussian_spectrum(0.0, 2.5), 1.0);
    double prev = 1.0;
    for (double f = 0.5; f < 60.0; f += 0.5) {
        const double g = gaussian_spectrum(f, 2.5);
        EXPECT_LT(g, prev);
        prev = g;
    }
    EXPECT_THROW(gaussian_spectrum(1.0, 0.0), Error);
}

TEST(GaussianSpectrum, MatchesDiscreteTransformOfSampledKernel) {
    const double sigma = 2.5;
    const int radius = 40;
    std::vector<double> taps;
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        taps.push_back(std::exp(-0.5 * i * i / (sigma * sigma)));
        sum += taps.back();
    }
    for (double f : {1.0, 5.0, 12.0, 30.0}) {
        const double f_cpp = f * kDegreesPerPixel;
        double dft = 0.0;
        for (int i = -radius; i <= radius; ++i) {
            dft += taps[i + radius] / sum * std::cos(2.0 * std::numbers::pi * f_cpp * i);
        }
        EXPECT_NEAR(gaussian_spectrum(f, sigma), dft, 1e-3) << f;
    }
}

TEST(Wrmse, IdentityAndConstants) {
    const Curve a = [](double f) { return std::exp(-f / 10.0); };
    EXPECT_EQ(wrmse(a, a), 0.0);
    EXPECT_NEAR(wrmse([](double) { return 1.0; }, [](double) { return 0.0; }), 1.0, 1e-15);
    EXPECT_THROW(wrmse(a, a, 2.0, {0.0, 10.0}), Error);
}

TEST(Wrmse, Symmetric) {
    const Curve a = [](double f) { return std::exp(-f / 10.0); };
    const Curve b = [](double f) { return 1.0 / (1.0 + f); };
    for (double beta : {1.0, 2.0, 3.0}) EXPECT_DOUBLE_EQ(wrmse(a, b, beta), wrmse(b, a, beta));
}

TEST(Wrmse, MatchesSimpsonOnSmoothCurves) {
    const Curve a = [](double f) { return std::exp(-f / 10.0); };
    const Curve b = [](double f) { return gaussian_spectrum(f, 2.0); };
    const double beta = 2.0;
    const double lo = std::log(1.0 / 3.0), hi = std::log(42.58);
    auto w = [&](double u) { return std::exp((1.0 - beta) * u); };
    const double num = oracle::simpson(
        [&](double u) {
            const double d = a(std::exp(u)) - b(std::exp(u));
            return w(u) * d * d;
        },
        lo, hi, 4096);
    const double den = oracle::simpson(w, lo, hi, 4096);
    EXPECT_NEAR(wrmse(a, b, beta), std::sqrt(num / den), 1e-6);
}

// scipy.integrate.quad reference, tests/oracles/psychophys_reference.py
TEST(Wrmse, CsfAgainstGaussianMatchesQuadrature) {
    const auto grid = log_grid();
    const auto target = normalize_max(sample([](double f) { return boxcar_csf(f, 0.2); }, grid));
    const auto gauss = sample([](double f) { return gaussian_spectrum(f, 2.5); }, grid);
    const double value = wrmse_sampled(grid, target, gauss, 2.0);
    EXPECT_LT(std::abs(value - 0.45885551341288955) / 0.45885551341288955, 1e-4);
}

TEST(FitSigma, SelfFit) {
    const auto r = fit_sigma([](double f) { return gaussian_spectrum(f, 2.5); }, 2.0);
    // Peak normalization scales the target by 1/0.998, which shifts the optimum a little.
    EXPECT_NEAR(r.sigma_px, 2.5, 0.01);
    const auto grid = log_grid();
    const auto target = normalize_max(sample([](double f) { return gaussian_spectrum(f, 2.5); }, grid));
    for (double s = 2.45; s <= 2.55; s += 1e-4) {
        const auto model = sample([s](double f) { return gaussian_spectrum(f, s); }, grid);
        EXPECT_LE(r.wrmse, wrmse_sampled(grid, target, model, 2.0) + 1e-12) << s;
    }
}

TEST(FitSigma, BoxcarAtPointTwoSecondsNearTwoAndAHalf) {
    const auto r = fit_sigma([](double f) { return boxcar_csf(f, 0.2); }, 2.0);
    EXPECT_GE(r.sigma_px, 2.0);
    EXPECT_LE(r.sigma_px, 3.0);
    EXPECT_EQ(r.range.f_min, 1.0 / 3.0);
    EXPECT_EQ(r.range.f_max, 42.58);
}

TEST(FitSigma, NotWorseThanAnyGridCandidate) {
    const auto grid = log_grid();
    const auto raw = sample([](double f) { return williams_mtf(f); }, grid);
    const auto target = normalize_max(raw);
    const auto r = fit_sigma(raw, 2.0);
    for (int i = 0; i <= 198; ++i) {
        const double s = 0.1 + 0.05 * i;
        const auto g = sample([&](double f) { return gaussian_spectrum(f, s); }, grid);
        EXPECT_LE(r.wrmse, wrmse_sampled(grid, target, g, 2.0) + 1e-15) << s;
    }
    EXPECT_EQ(fit_sigma(raw, 2.0).sigma_px, r.sigma_px);
}

TEST(FitSigma, MtfFitsAcrossBeta) {
    // scipy bounded minimization, tests/oracles/psychophys_reference.py
    const Curve mtf = [](double f) { return williams_mtf(f); };
    EXPECT_NEAR(fit_sigma(mtf, 1.5).sigma_px, 1.8168974730266154, 2e-3);
    EXPECT_NEAR(fit_sigma(mtf, 2.0).sigma_px, 2.1103932418008093, 2e-3);
    EXPECT_NEAR(fit_sigma(mtf, 2.5).sigma_px, 2.4667698178310262, 2e-3);
}

TEST(TabulatedCurve, ReproducesSmoothCurve) {
    const Curve c = [](double f) { return boxcar_csf(f, 0.2); };
    const auto t = tabulated_curve(c, 0.3, 60.0);
    for (double f : {0.31, 0.77, 2.9, 11.0, 41.0, 59.0}) {
        EXPECT_NEAR(t(f), c(f), 1e-5 * c(2.9)) << f;
    }
}
