// Copyright 2026 The eprtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "eprtomo/tomography.hpp"
#include "oracles.hpp"

using namespace eprtomo;

namespace {

/// Trapezoid rule on `points` nodes spanning [lo, hi].
template <typename F>
double trapezoid(F &&f, double lo, double hi, std::size_t points) {
    const double h = (hi - lo) / static_cast<double>(points - 1);
    double s = 0.5 * (f(lo) + f(hi));
    for (std::size_t i = 1; i + 1 < points; ++i) s += f(lo + static_cast<double>(i) * h);
    return s * h;
}

SampledDensity fine_density(const std::function<double(double)> &pdf) {
    return SampledDensity::from_function(pdf, -12.0, 12.0, 2001);
}

}  // namespace

TEST(WavefunctionTest, GroundStateAtOrigin) {
    EXPECT_NEAR(fock_wavefunction(0, 0.0), std::pow(2 * std::numbers::pi, -0.25), 1e-15);
    EXPECT_NEAR(fock_wavefunction(0, 0.0), 0.63162, 5e-6);
}

TEST(WavefunctionTest, SinglePhotonSecondMomentIsThree) {
    EXPECT_NEAR(trapezoid([](double q) { return q * q * fock_pdf(1, q); }, -15, 15, 30001), 3.0, 1e-10);
}

TEST(WavefunctionTest, MatchesIndependentRecursion) {
    for (double q : {-4.0, -0.3, 0.0, 1.7, 6.0})
        for (int n = 0; n <= 30; ++n)
            EXPECT_NEAR(fock_wavefunction(n, q), oracle::hermite_functions(q, n)[n], 1e-12) << n << " " << q;
}

TEST(WavefunctionTest, OrthonormalUpToTwenty) {
    const std::size_t points = 30001;
    const double h = 30.0 / (points - 1);
    std::vector<std::vector<double>> psi(points);
    for (std::size_t i = 0; i < points; ++i) psi[i] = fock_wavefunctions(20, -15.0 + i * h);
    for (int m = 0; m <= 20; ++m)
        for (int n = 0; n <= m; ++n) {
            double s = 0;
            for (std::size_t i = 0; i < points; ++i) s += psi[i][m] * psi[i][n];
            EXPECT_NEAR(s * h, m == n ? 1.0 : 0.0, 1e-8) << m << "," << n;
        }
}

TEST(WavefunctionTest, NormalizedUpToSixty) {
    for (int n : {30, 45, 60})
        EXPECT_NEAR(trapezoid([n](double q) { return fock_pdf(n, q); }, -25, 25, 50001), 1.0, 1e-10) << n;
}

TEST(WavefunctionTest, RejectsOrdersAboveSixty) {
    EXPECT_THROW(fock_wavefunction(61, 0.0), DomainError);
    EXPECT_THROW(fock_wavefunction(-1, 0.0), DomainError);
}

TEST(PatternFunctionTest, OrthonormalAgainstNumberStates) {
    for (int n = 0; n <= 10; ++n)
        for (int m = 0; m <= 10; ++m) {
            const double s = trapezoid([&](double q) { return pattern_diag(n, q) * fock_pdf(m, q); }, -12, 12, 2001);
            EXPECT_NEAR(s, n == m ? 1.0 : 0.0, 1e-6) << n << "," << m;
        }
}

TEST(PatternFunctionTest, VacuumKernelIntegratesToOne) {
    EXPECT_NEAR(trapezoid([](double q) { return pattern_diag(0, q) * oracle::vacuum_pdf(q); }, -12, 12, 2001), 1.0,
                1e-6);
}

TEST(PatternFunctionTest, HighOrdersStayOrthonormal) {
    for (int n : {20, 30, 40})
        for (int m : {n - 1, n, n + 1}) {
            const double s = trapezoid([&](double q) { return pattern_diag(n, q) * fock_pdf(m, q); }, -17, 17, 34001);
            EXPECT_NEAR(s, n == m ? 1.0 : 0.0, 1e-6) << n << "," << m;
        }
}

TEST(PatternFunctionTest, EvenInQ) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int k = 0; k < 200; ++k) {
        const double q = u(rng);
        const int n = static_cast<int>(rng() % 41);
        EXPECT_EQ(pattern_diag(n, q), pattern_diag(n, -q));
    }
}

TEST(PatternFunctionTest, RejectsUnsupportedOrders) {
    EXPECT_THROW(pattern_diag(41, 0.0), DomainError);
    EXPECT_THROW(PatternFunctions(41), DomainError);
    EXPECT_THROW(pattern_diag(0, 20.0), DomainError);
}

TEST(FockDiagonalTest, VacuumDensity) {
    const auto d = fock_diagonal(fine_density(oracle::vacuum_pdf), 10);
    for (int n = 0; n <= 10; ++n) EXPECT_NEAR(d[n], n == 0 ? 1.0 : 0.0, 1e-6) << n;
}

TEST(FockDiagonalTest, SinglePhotonDensity) {
    const auto d = fock_diagonal(fine_density(oracle::single_photon_pdf), 10);
    for (int n = 0; n <= 10; ++n) EXPECT_NEAR(d[n], n == 1 ? 1.0 : 0.0, 1e-6) << n;
}

TEST(FockDiagonalTest, ConditionedTmssDensity) {
    const auto g = oracle::ConditionedGaussian::tmss(0.1, 1.0, 0.0);
    const auto d = fock_diagonal(fine_density([&](double q) { return g.density(q); }), 10);
    const double l2 = std::tanh(0.1) * std::tanh(0.1);
    EXPECT_NEAR(d[0], 0.0, 1e-6);
    EXPECT_NEAR(d[1], (1 - l2) * (1 - l2), 1e-6);
    EXPECT_NEAR(d[2], 2 * l2 * (1 - l2) * (1 - l2), 1e-6);
    EXPECT_NEAR(d[1], 0.98023, 5e-6);
    EXPECT_NEAR(d[2], 0.01948, 1e-5);
}

TEST(FockDiagonalTest, RecoversRandomMixtureWeights) {
    std::mt19937_64 rng(11);
    std::gamma_distribution<double> gamma(1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> w(6);
        double total = 0;
        for (double &x : w) total += (x = gamma(rng));
        for (double &x : w) x /= total;
        const auto density = fine_density([&](double q) {
            double s = 0;
            for (int n = 0; n <= 5; ++n) s += w[n] * oracle::number_state_pdf(n, q);
            return s;
        });
        const auto d = fock_diagonal(density, 10);
        for (int n = 0; n <= 10; ++n) EXPECT_NEAR(d[n], n <= 5 ? w[n] : 0.0, 1e-4) << trial << " " << n;
        EXPECT_NEAR(d.sum(), 1.0, 1e-4);
    }
}

TEST(FockDiagonalTest, RejectsUnnormalizedDensity) {
    auto d = fine_density(oracle::vacuum_pdf);
    for (double &v : d.values) v *= 1.1;
    EXPECT_THROW(fock_diagonal(d, 5), DomainError);
}

TEST(LossCorrectTest, UnitEfficiencyIsIdentity) {
    const FockDiagonal d{{0.1, 0.6, 0.2, 0.1}, {}};
    const auto c = loss_correct(d, 1.0);
    EXPECT_EQ(c.corrected.probabilities, d.probabilities);
    EXPECT_TRUE(c.warnings.empty());
}

TEST(LossCorrectTest, HalfLostSinglePhoton) {
    const auto c = loss_correct({{0.5, 0.5, 0.0, 0.0}, {}}, 0.5);
    EXPECT_NEAR(c.corrected[0], 0.0, 1e-15);
    EXPECT_NEAR(c.corrected[1], 1.0, 1e-15);
    EXPECT_NEAR(c.corrected[2], 0.0, 1e-15);
}

TEST(LossCorrectTest, RoundTripIsIdentity) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0), e(0.3, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> p(11);
        double total = 0;
        for (double &x : p) total += (x = u(rng));
        for (double &x : p) x /= total;
        const double eta = e(rng);
        const auto back = loss_correct(apply_binomial_loss({p, {}}, eta), eta).corrected;
        for (std::size_t n = 0; n < p.size(); ++n) EXPECT_NEAR(back[n], p[n], 1e-9) << trial << " " << n;
    }
}

TEST(LossCorrectTest, WarnsOnNoiseDominatedEntries) {
    const auto c = loss_correct({{0.5, 0.5, 0.0, 0.02}, {}}, 0.5);
    EXPECT_FALSE(c.warnings.empty());
    EXPECT_LT(c.corrected[2], -0.05);
}

TEST(LossCorrectTest, RejectsNonPositiveEfficiency) {
    EXPECT_THROW(loss_correct({{1.0}, {}}, 0.0), DomainError);
    EXPECT_THROW(loss_correct({{1.0}, {}}, 1.5), DomainError);
}

TEST(LossCorrectTest, UndoesHeraldedModeLoss) {
    for (double eta : {0.95, 0.8, 0.6}) {
        const auto raw = oracle_conditioned_state(0.1, eta, eta, 0.0, 10);
        const auto lossless = oracle_conditioned_state(0.1, 1.0, eta, 0.0, 10);
        const auto c = loss_correct(raw, eta).corrected;
        for (int n = 0; n <= 10; ++n) EXPECT_NEAR(c[n], lossless[n], 1e-9);
        EXPECT_GT(raw[1], 0.5);
        EXPECT_GT(c[1], raw[1]);
    }
}

TEST(TruncationTest, TmssAmplitudes) {
    for (double r : {0.05, 0.1, 0.2, 0.3}) {
        const auto s = tmss_fock_state(r, 20);
        EXPECT_LT(s.truncation_defect(), 1e-8) << r;
        EXPECT_GE(s.truncation_defect(), -1e-15);
        for (int n = 0; n <= 20; ++n)
            EXPECT_NEAR(s.amplitudes[n], std::pow(-std::tanh(r), n) / std::cosh(r), 1e-15);
    }
    EXPECT_GT(tmss_fock_state(1.5, 20).truncation_defect(), 1e-8);
}

TEST(TruncationTest, OracleDensityTraceIsComplete) {
    EXPECT_NEAR(oracle::TwoModeDensity::tmss(0.3, 25).trace(), 1.0, 1e-12);
}

TEST(OracleStateTest, PairProbabilityPeaksAtOneQuarter) {
    const double r = std::acosh(std::sqrt(2.0));
    EXPECT_NEAR(tmss_pair_probability(r, 1), 0.25, 1e-15);
    EXPECT_NEAR(std::sinh(r) * std::sinh(r), 1.0, 1e-15);
    for (double d : {-0.05, 0.05}) EXPECT_LT(tmss_pair_probability(r + d, 1), 0.25);
}

TEST(OracleStateTest, LosslessSmallSqueezing) {
    const auto d = oracle_conditioned_state(0.1, 1.0, 1.0, 0.0, 10);
    EXPECT_NEAR(d[0], 0.0, 1e-15);
    EXPECT_NEAR(d[1], 0.98023, 5e-6);
    EXPECT_NEAR(d[2], 0.01948, 1e-5);
    EXPECT_NEAR(d.sum(), 1.0, 1e-12);
}

TEST(OracleStateTest, WeakSqueezingLimitIsSinglePhoton) {
    const auto d = oracle_conditioned_state(1e-4, 1.0, 1.0, 0.0, 5);
    EXPECT_NEAR(d[1], 1.0, 1e-7);
    EXPECT_NEAR(d[0], 0.0, 1e-7);
}

TEST(OracleStateTest, MatchesKrausBruteForce) {
    for (double r : {0.05, 0.2, 0.4})
        for (auto [ea, eb] : {std::pair{1.0, 1.0}, {0.9, 0.7}, {0.6, 0.95}}) {
            const auto rho = oracle::TwoModeDensity::tmss(r, 40).lose(0, ea).lose(1, eb);
            const auto want = rho.heralded_diagonal(0.0);
            const auto got = oracle_conditioned_state(r, ea, eb, 0.0, 12);
            for (int n = 0; n <= 12; ++n) EXPECT_NEAR(got[n], want[n], 1e-10) << r << " " << ea << " " << eb << " " << n;
        }
}

TEST(OracleStateTest, DarkNoiseMatchesGaussianConditioning) {
    for (double vd : {0.01, 0.05})
        for (double eta : {1.0, 0.85}) {
            const auto g = oracle::ConditionedGaussian::tmss(0.2, eta, vd);
            const auto want = fock_diagonal(fine_density([&](double q) { return g.density(q); }), 10);
            const auto got = oracle_conditioned_state(0.2, eta, eta, vd, 10);
            for (int n = 0; n <= 10; ++n) EXPECT_NEAR(got[n], want[n], 1e-6) << vd << " " << eta << " " << n;
        }
}

TEST(OracleStateTest, CalibratedDarkNoiseRemovesOffsetWeight) {
    const double vd = 0.01;
    const auto rho = oracle::TwoModeDensity::tmss(0.1, 30).lose(1, 0.9);
    const auto calibrated = oracle_conditioned_state(0.1, 1.0, 0.9, 0.0, 8, 1.0);
    const auto with_offset = oracle_conditioned_state(0.1, 1.0, 0.9, 0.0, 8, 1.0 - vd);
    const auto want = rho.heralded_diagonal(vd);
    for (int n = 0; n <= 8; ++n) {
        EXPECT_NEAR(with_offset[n], want[n], 1e-10);
        EXPECT_NEAR(calibrated[n], rho.heralded_diagonal(0.0)[n], 1e-10);
    }
    EXPECT_LT(with_offset[1], calibrated[1]);
}

TEST(OracleStateTest, RejectsVanishingWeight) {
    EXPECT_THROW(oracle_conditioned_state(0.0, 1.0, 1.0, 0.0, 5), DegenerateConditioningError);
}

TEST(FockFileTest, RoundTrip) {
    const FockDiagonal d{{0.1, 0.7, 0.2}, {0.01, 0.02, 0.03}};
    const auto c = loss_correct(d, 0.9);
    std::stringstream ss;
    write_fock_diagonal(ss, d, c, 0.9);
    const auto back = read_fock_diagonal(ss);
    EXPECT_EQ(back.probabilities, d.probabilities);
    EXPECT_EQ(back.standard_errors, d.standard_errors);
}
