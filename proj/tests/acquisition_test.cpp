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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "eprtomo/acquisition.hpp"
#include "eprtomo/text.hpp"

using namespace eprtomo;

namespace {

constexpr double kPi = std::numbers::pi;

std::string temp_path(const std::string &name) {
    return (std::filesystem::temp_directory_path() / ("eprtomo_acq_" + name)).string();
}

std::string slurp(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<QuadratureRecord> random_records(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 3.0);
    std::uniform_real_distribution<double> u(0.0, 2 * kPi);
    std::vector<QuadratureRecord> out(n);
    std::uint64_t index = 0;
    for (auto &r : out) {
        index += 1 + rng() % 3;
        r = {index, u(rng), u(rng), g(rng), g(rng)};
    }
    return out;
}

}  // namespace

TEST(ScanTest, SingleSegmentSweepsThetaBUniformly) {
    ScanPlan plan;
    plan.histogram_count = 1;
    plan.samples_per_histogram = 1000;
    plan.theta_b_scan_periods_per_histogram = 1;
    const auto s = generate_scan(plan);
    ASSERT_EQ(s.size(), 1000u);
    for (std::size_t k = 0; k < s.size(); ++k) {
        EXPECT_DOUBLE_EQ(s[k].theta_b, 2 * kPi * k / 1000.0);
        EXPECT_EQ(s[k].theta_a, 0.0);
    }
}

TEST(ScanTest, ThetaAStepsLinearly) {
    ScanPlan plan;
    plan.samples_per_histogram = 100;
    plan.theta_b_scan_periods_per_histogram = 4;
    const auto s = generate_scan(plan);
    std::vector<double> values;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (values.empty() || values.back() != s[i].theta_a) values.push_back(s[i].theta_a);
    ASSERT_EQ(values.size(), 36u);
    for (std::size_t k = 1; k < values.size(); ++k)
        EXPECT_NEAR(values[k] - values[k - 1], plan.theta_a_range / 36.0, 1e-12);
    EXPECT_NEAR(values.back() - values.front(), plan.theta_a_range * 35.0 / 36.0, 1e-12);
    EXPECT_GT(plan.theta_a_range, 2 * kPi);
}

TEST(ScanTest, RejectsNonIntegerPeriodMultiple) {
    ScanPlan plan;
    plan.samples_per_histogram = 1001;
    plan.theta_b_scan_periods_per_histogram = 10;
    EXPECT_THROW(plan.validate(), DomainError);
    plan.samples_per_histogram = 1000;
    EXPECT_NO_THROW(plan.validate());
    plan.theta_b_range = kPi;
    EXPECT_THROW(plan.validate(), DomainError);
}

TEST(ScanTest, ThetaBIsUniformWithinEverySegment) {
    ScanPlan plan;
    plan.histogram_count = 5;
    plan.samples_per_histogram = 20000;
    plan.theta_b_scan_periods_per_histogram = 8;
    const auto s = generate_scan(plan);
    const double n = static_cast<double>(plan.samples_per_histogram);
    const double ks_critical = 1.628 / std::sqrt(n);
    for (std::size_t seg = 0; seg < plan.histogram_count; ++seg) {
        std::vector<double> tb;
        for (std::size_t j = 0; j < plan.samples_per_histogram; ++j)
            tb.push_back(s[seg * plan.samples_per_histogram + j].theta_b);
        std::sort(tb.begin(), tb.end());
        double ks = 0;
        for (std::size_t j = 0; j < tb.size(); ++j) {
            const double cdf = tb[j] / (2 * kPi);
            ks = std::max({ks, std::abs(cdf - j / n), std::abs(cdf - (j + 1) / n)});
        }
        EXPECT_LT(ks, ks_critical);

        std::vector<double> bins(50, 0.0);
        for (double t : tb) bins[std::min<std::size_t>(49, static_cast<std::size_t>(t / (2 * kPi) * 50 + 1e-9))] += 1;
        for (double c : bins) EXPECT_LT(std::abs(c / (n / 50) - 1.0), 0.01);
    }
}

TEST(SimulateTest, VacuumSegmentsHaveUnitVariance) {
    ScanPlan plan;
    plan.histogram_count = 6;
    plan.samples_per_histogram = 50000;
    const auto recs = simulate_records(GaussianTwoModeState{}, generate_scan(plan), {}, 17);
    for (std::size_t seg = 0; seg < plan.histogram_count; ++seg) {
        double s2 = 0;
        for (std::size_t j = 0; j < plan.samples_per_histogram; ++j) {
            const double q = recs[seg * plan.samples_per_histogram + j].q_a;
            s2 += q * q;
        }
        EXPECT_NEAR(s2 / plan.samples_per_histogram, 1.0, 5 * std::sqrt(2.0 / plan.samples_per_histogram));
    }
}

TEST(SimulateTest, WeakSqueezingSegmentsArePhaseIndependent) {
    ScanPlan plan;
    plan.samples_per_histogram = 50000;
    const auto state = entangled_pair({0.8, 0.8});
    const DetectorModel det{0.95, 20.0, 0.0};
    const auto recs = simulate_records(state, generate_scan(plan), det, 23, 2);
    const double want = detected_projection(state, 0.0, 0.0, det).var_a;
    for (std::size_t seg = 0; seg < plan.histogram_count; ++seg) {
        double s2 = 0;
        for (std::size_t j = 0; j < plan.samples_per_histogram; ++j) {
            const double q = recs[seg * plan.samples_per_histogram + j].q_a;
            s2 += q * q;
        }
        const double var = s2 / plan.samples_per_histogram;
        EXPECT_NEAR(var, want, 5 * want * std::sqrt(2.0 / plan.samples_per_histogram)) << "segment " << seg;
    }
}

TEST(SimulateTest, EqualSeedsGiveIdenticalFiles) {
    ScanPlan plan;
    plan.histogram_count = 3;
    plan.samples_per_histogram = 70000;
    const auto state = entangled_pair({6.0, 8.5});
    for (auto format : {RecordFormat::text, RecordFormat::binary}) {
        std::vector<std::string> files;
        for (unsigned threads : {1u, 3u}) {
            const std::string path = temp_path("det_" + std::to_string(threads));
            RecordWriter w(path, format);
            simulate_run(state, generate_scan(plan), {0.95, 20.0, 0.02}, 5,
                         [&](std::span<const QuadratureRecord> r) { w.write(r); }, threads);
            w.flush();
            files.push_back(slurp(path));
            std::remove(path.c_str());
        }
        EXPECT_EQ(files[0], files[1]);
    }
}

TEST(SimulateTest, StreamsInBoundedChunks) {
    std::size_t largest = 0, total = 0;
    simulate_run(tmss_covariance(0.1), criteria_schedule(300000), {}, 3,
                 [&](std::span<const QuadratureRecord> r) {
                     largest = std::max(largest, r.size());
                     total += r.size();
                 },
                 4);
    EXPECT_EQ(total, 600000u);
    EXPECT_LE(largest, kSampleChunk);
}

TEST(RecordFileTest, EmptyStreamIsHeaderOnly) {
    std::stringstream ss;
    RecordWriter w(ss, RecordFormat::text);
    w.flush();
    EXPECT_EQ(ss.str(), "index,theta_a,theta_b,q_a,q_b\n");
    RecordReader r(ss);
    QuadratureRecord rec;
    EXPECT_FALSE(r.next(rec));
}

TEST(RecordFileTest, BinaryRoundTripIsBitExact) {
    const auto recs = random_records(100000, 1);
    const std::string path = temp_path("rt.bin");
    write_records(recs, path, RecordFormat::binary);
    const auto back = read_records(path);
    std::remove(path.c_str());
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        ASSERT_EQ(back[i].index, recs[i].index);
        ASSERT_EQ(std::bit_cast<std::uint64_t>(back[i].q_a), std::bit_cast<std::uint64_t>(recs[i].q_a));
        ASSERT_EQ(std::bit_cast<std::uint64_t>(back[i].theta_b), std::bit_cast<std::uint64_t>(recs[i].theta_b));
    }
}

TEST(RecordFileTest, BinaryLayout) {
    std::stringstream ss;
    RecordWriter w(ss, RecordFormat::binary);
    w.write({7, 0.5, 1.0, -2.0, 3.0});
    w.flush();
    const std::string bytes = ss.str();
    ASSERT_EQ(bytes.size(), 5u + 5 * 8);
    EXPECT_EQ(bytes.substr(0, 4), "EPRT");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1u);
    double index = 0;
    std::memcpy(&index, bytes.data() + 5, 8);
    EXPECT_EQ(index, 7.0);
    double qa = 0;
    std::memcpy(&qa, bytes.data() + 5 + 3 * 8, 8);
    EXPECT_EQ(qa, -2.0);
}

TEST(RecordFileTest, TextRoundTripIsValueExactAtNineDigits) {
    const auto recs = random_records(100000, 2);
    const std::string path = temp_path("rt.csv");
    write_records(recs, path, RecordFormat::text);
    const auto back = read_records(path);
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        ASSERT_EQ(back[i].index, recs[i].index);
        ASSERT_EQ(back[i].q_a, *text::to_double(text::format(recs[i].q_a, 9)));
        ASSERT_EQ(back[i].theta_a, *text::to_double(text::format(recs[i].theta_a, 9)));
    }
    // Values already at 9 digits survive a second round trip unchanged.
    write_records(back, path, RecordFormat::text);
    const auto again = read_records(path);
    std::remove(path.c_str());
    for (std::size_t i = 0; i < back.size(); ++i) ASSERT_EQ(again[i].q_b, back[i].q_b);
}

TEST(RecordFileTest, CorruptedRowNamesItsLine) {
    std::stringstream ss("index,theta_a,theta_b,q_a,q_b\n0,0,0,1,2\n1,0,0,x,2\n");
    RecordReader r(ss);
    QuadratureRecord rec;
    ASSERT_TRUE(r.next(rec));
    try {
        r.next(rec);
        FAIL() << "expected a parse error";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(RecordFileTest, NonMonotoneIndexIsRejected) {
    std::stringstream ss("index,theta_a,theta_b,q_a,q_b\n4,0,0,1,2\n4,0,0,1,2\n");
    RecordReader r(ss);
    QuadratureRecord rec;
    ASSERT_TRUE(r.next(rec));
    EXPECT_THROW(r.next(rec), ParseError);

    std::stringstream out;
    RecordWriter w(out, RecordFormat::text);
    w.write({5, 0, 0, 0, 0});
    EXPECT_THROW(w.write({5, 0, 0, 0, 0}), DomainError);
}

TEST(RecordFileTest, NonFiniteValuesAreRejected) {
    std::stringstream ss("index,theta_a,theta_b,q_a,q_b\n0,0,0,nan,2\n");
    RecordReader r(ss);
    QuadratureRecord rec;
    EXPECT_THROW(r.next(rec), ParseError);

    std::stringstream out;
    RecordWriter w(out, RecordFormat::binary);
    EXPECT_THROW(w.write({0, 0, 0, std::numeric_limits<double>::infinity(), 0}), DomainError);
}

TEST(RecordFileTest, MalformedHeaderIsRejected) {
    std::stringstream ss("idx,theta_a,theta_b,q_a,q_b\n");
    EXPECT_THROW(RecordReader{ss}, ParseError);
}

TEST(RecordFileTest, TruncatedBinaryRecordIsRejected) {
    std::stringstream ss;
    RecordWriter w(ss, RecordFormat::binary);
    w.write({0, 1, 2, 3, 4});
    w.flush();
    std::string bytes = ss.str();
    bytes.resize(bytes.size() - 3);
    std::stringstream cut(bytes);
    RecordReader r(cut);
    QuadratureRecord rec;
    EXPECT_THROW(r.next(rec), ParseError);
}
