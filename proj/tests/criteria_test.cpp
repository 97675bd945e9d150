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
#include <numbers>
#include <sstream>

#include "eprtomo/acquisition.hpp"
#include "eprtomo/criteria.hpp"
#include "oracles.hpp"

using namespace eprtomo;

namespace {

constexpr double kPi = std::numbers::pi;
const DetectorModel kExperiment{0.95, 20.0, 0.0};

oracle::Mat4 experiment_oracle(double v_dark) {
    return oracle::detect(oracle::entangled_pair(db_to_ratio(-6.0), db_to_ratio(8.5)), 0.95, v_dark);
}

/// Conditional variance of X_a given X_b from raw matrix entries.
double oracle_conditional_x(const oracle::Mat4 &v) { return v[0][0] - v[0][2] * v[0][2] / v[2][2]; }
double oracle_conditional_p(const oracle::Mat4 &v) { return v[1][1] - v[1][3] * v[1][3] / v[3][3]; }

CriteriaReport sampled(const GaussianTwoModeState &s, const DetectorModel &det, std::size_t per_setting,
                       std::uint64_t seed) {
    CriteriaEstimator est;
    simulate_run(s, criteria_schedule(per_setting), det, seed,
                 [&](std::span<const QuadratureRecord> r) { est.add(r); });
    return est.report();
}

}  // namespace

TEST(DuanTest, VacuumScoresTwoAndOne) {
    const auto d = duan(Eigen::Matrix4d::Identity().eval());
    EXPECT_DOUBLE_EQ(d.value, 2.0);
    EXPECT_DOUBLE_EQ(d.normalized, 1.0);
}

TEST(DuanTest, TmssHalf) { EXPECT_NEAR(duan(tmss_covariance(0.5)).normalized, std::exp(-1.0), 1e-12); }

TEST(DuanTest, ExperimentDefaultMatchesCovarianceOracle) {
    const auto v = experiment_oracle(0.01);
    const double minus_pair = 0.5 * (oracle::combined_variance(v, 0, 0, 1.0) +
                                     oracle::combined_variance(v, kPi / 2, kPi / 2, -1.0));
    const auto d = duan(detected_state(entangled_pair({6.0, 8.5}), {0.95, 20.0, 0.0}));
    EXPECT_NEAR(d.value, minus_pair, 1e-12);
    EXPECT_NEAR(d.normalized, 0.2986, 5e-5);
    EXPECT_EQ(d.signs(), "X_a+X_b,P_a-P_b");
}

TEST(DuanTest, SignSelectionFollowsCorrelationSign) {
    // Rotating the other input squeezer flips which pairing is entangled.
    const auto s1 = single_mode_squeezed({6.0, 8.5});
    const auto d = duan(beamsplit_5050(rotate(s1, kPi / 2), s1));
    EXPECT_EQ(d.signs(), "X_a-X_b,P_a+P_b");
    EXPECT_NEAR(d.normalized, db_to_ratio(-6.0), 1e-12);
}

TEST(DuanTest, RejectsUnphysicalCovariance) {
    EXPECT_THROW(duan((0.5 * Eigen::Matrix4d::Identity()).eval()), PhysicalityError);
}

TEST(ConditionalVarianceTest, VacuumIsOne) {
    EXPECT_DOUBLE_EQ(conditional_variance(GaussianTwoModeState{}, Quadrature::x, Mode::a), 1.0);
}

TEST(ConditionalVarianceTest, TmssHalf) {
    const auto s = tmss_covariance(0.5);
    EXPECT_NEAR(conditional_variance(s, Quadrature::x, Mode::a), 1.0 / std::cosh(1.0), 1e-12);
    EXPECT_NEAR(conditional_variance(s, Quadrature::p, Mode::b), 1.0 / std::cosh(1.0), 1e-12);
}

TEST(ConditionalVarianceTest, ExperimentHarmonicMeanWithoutDarkNoise) {
    const double vs = 0.95 * db_to_ratio(-6.0) + 0.05, va = 0.95 * db_to_ratio(8.5) + 0.05;
    EXPECT_NEAR(vs, 0.28863, 1e-5);
    EXPECT_NEAR(va, 6.77549, 1e-5);
    const auto s = detected_state(entangled_pair({6.0, 8.5}), {0.95});
    EXPECT_NEAR(conditional_variance(s, Quadrature::x, Mode::a), 2 * vs * va / (vs + va), 1e-12);
    EXPECT_NEAR(conditional_variance(s, Quadrature::x, Mode::a), 0.5539, 5e-4);
    EXPECT_NEAR(conditional_variance(s, Quadrature::p, Mode::a), 0.5539, 5e-4);
}

TEST(ConditionalVarianceTest, ExperimentWithDarkNoiseMatchesOracle) {
    const auto v = experiment_oracle(0.01);
    const auto s = detected_state(entangled_pair({6.0, 8.5}), kExperiment);
    EXPECT_NEAR(conditional_variance(s, Quadrature::x, Mode::a), oracle_conditional_x(v), 1e-12);
    EXPECT_NEAR(conditional_variance(s, Quadrature::p, Mode::a), oracle_conditional_p(v), 1e-12);
    EXPECT_NEAR(oracle_conditional_x(v), 0.57208, 5e-6);
}

TEST(ConditionalVarianceTest, ZeroConditioningVarianceIsDegenerate) {
    ProjectedMoments m;
    m.var_b = 0.0;
    EXPECT_THROW(conditional_variance(m, Mode::a), DegenerateInputError);
}

TEST(ReidTest, VacuumIsOne) { EXPECT_DOUBLE_EQ(reid_epr(GaussianTwoModeState{}), 1.0); }

TEST(ReidTest, TmssHalf) {
    EXPECT_NEAR(reid_epr(tmss_covariance(0.5)), 1.0 / (std::cosh(1.0) * std::cosh(1.0)), 1e-12);
    EXPECT_NEAR(reid_epr(tmss_covariance(0.5)), 0.41997, 5e-6);
}

TEST(ReidTest, ExperimentDefault) {
    const auto v = experiment_oracle(0.01);
    const auto s = entangled_pair({6.0, 8.5});
    EXPECT_NEAR(reid_epr(detected_state(s, kExperiment)), oracle_conditional_x(v) * oracle_conditional_p(v), 1e-12);
    EXPECT_NEAR(reid_epr(detected_state(s, {0.95})), 0.3068, 5e-4);
}

TEST(ReidTest, JitterRaisesProduct) {
    const auto s = entangled_pair({6.0, 8.5});
    double last = analytic_report(s, kExperiment).reid_product;
    for (double j : {0.01, 0.02, 0.04, 0.08}) {
        const double e = analytic_report(s, {0.95, 20.0, j}).reid_product;
        EXPECT_GT(e, last);
        last = e;
    }
}

TEST(CriteriaRotationTest, CounterRotationLeavesTmssInvariant) {
    const auto s = tmss_covariance(0.6);
    const double base = duan(s).normalized;
    for (double phi : {0.1, 0.7, 1.3, 2.9}) {
        const auto r = rotate(rotate(s, Mode::a, phi), Mode::b, -phi);
        EXPECT_NEAR(duan(r).normalized, base, 1e-12) << phi;
    }
}

TEST(CriteriaRotationTest, QuarterTurnsOnBothModesLeaveTmssInvariant) {
    const auto s = tmss_covariance(0.6);
    const double base = duan(s).normalized;
    for (int k = 1; k < 4; ++k) {
        const double phi = k * kPi / 2;
        EXPECT_NEAR(duan(rotate(rotate(s, Mode::a, phi), Mode::b, phi)).normalized, base, 1e-12) << k;
    }
}

TEST(EstimatorTest, VacuumNormalizedDuanIsOne) {
    const auto r = sampled({}, {}, 500000, 1);
    EXPECT_NEAR(r.duan_normalized, 1.0, 0.01);
    EXPECT_NEAR(r.reid_product, 1.0, 0.01);
    EXPECT_EQ(r.sample_count, 1000000u);
    EXPECT_EQ(r.count_x, 500000u);
    EXPECT_EQ(r.count_p, 500000u);
}

TEST(EstimatorTest, TmssReidProduct) {
    const auto r = sampled(tmss_covariance(0.5), {}, 500000, 2);
    EXPECT_NEAR(r.reid_product, 0.420, 0.01);
}

TEST(EstimatorTest, ExperimentDuan) {
    const auto r = sampled(entangled_pair({6.0, 8.5}), kExperiment, 500000, 3);
    EXPECT_NEAR(r.duan_normalized, 0.299, 0.005);
}

TEST(EstimatorTest, ConsistentWithAnalyticAcrossRepetitions) {
    const auto s = entangled_pair({6.0, 8.5});
    const auto want = analytic_report(s, kExperiment);
    int outside = 0;
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        const auto r = sampled(s, kExperiment, 20000, seed);
        outside += std::abs(r.duan_normalized - want.duan_normalized) > 5 * r.se_duan_normalized;
        outside += std::abs(r.reid_product - want.reid_product) > 5 * r.se_reid_product;
    }
    EXPECT_EQ(outside, 0);
}

TEST(EstimatorTest, StandardErrorsScaleAsInverseRootN) {
    const auto s = entangled_pair({6.0, 8.5});
    double prev = 0;
    for (std::size_t n : {10000u, 100000u, 1000000u}) {
        const auto r = sampled(s, kExperiment, n, 55);
        if (prev > 0) {
            const double ratio = prev / r.se_duan_normalized;
            EXPECT_GT(ratio, std::sqrt(10.0) / 1.5);
            EXPECT_LT(ratio, std::sqrt(10.0) * 1.5);
        }
        prev = r.se_duan_normalized;
    }
}

TEST(EstimatorTest, MissingSettingIsIncompleteData) {
    CriteriaEstimator est;
    simulate_run(GaussianTwoModeState{}, SettingsSchedule({{0.0, 0.0}}, 20000), {}, 1,
                 [&](std::span<const QuadratureRecord> r) { est.add(r); });
    EXPECT_THROW(est.report(), IncompleteDataError);
}

TEST(EstimatorTest, TooFewSamplesIsSignificanceError) {
    const auto r = [] { return sampled({}, {}, 5000, 1); };
    EXPECT_THROW(r(), SignificanceError);
}

TEST(EstimatorTest, OtherSettingsAreCountedAndIgnored) {
    CriteriaEstimator est;
    simulate_run(GaussianTwoModeState{}, SettingsSchedule({{0.0, 0.0}, {0.3, 0.3}, {kPi / 2, kPi / 2}}, 10000), {}, 1,
                 [&](std::span<const QuadratureRecord> r) { est.add(r); });
    EXPECT_EQ(est.report().count_other, 10000u);
}

TEST(EstimatorTest, RejectsTooFewBatches) { EXPECT_THROW(CriteriaEstimator(10), DomainError); }

TEST(ReportDocumentTest, RoundTrips) {
    const auto r = sampled(tmss_covariance(0.3), {}, 20000, 8);
    std::stringstream ss;
    write_report(ss, r);
    const auto back = report_from_document(text::KeyValueDocument::read(ss));
    EXPECT_EQ(back.duan_value, r.duan_value);
    EXPECT_EQ(back.se_reid_product, r.se_reid_product);
    EXPECT_EQ(back.duan_signs, r.duan_signs);
    EXPECT_EQ(back.count_p, r.count_p);
    EXPECT_EQ(back.source, "records");
}
