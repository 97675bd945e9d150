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

// Heralding without a photon counter.
//
// Each record adds the increment q_b^2 - c to the histogram bin of q_a. With
// theta_b uniform over a full period, <q_b^2> - 1 = 2 <n_b> + (detector
// terms), so the accumulated histogram is the q_a distribution weighted by the
// photon number of mode b. For weak two-mode squeezing that selects the
// |1>|1> component and the normalized histogram approaches the quadrature
// distribution of a heralded single photon.

#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "eprtomo/errors.hpp"
#include "eprtomo/gaussian.hpp"
#include "eprtomo/record.hpp"
#include "eprtomo/text.hpp"

namespace eprtomo {

/// Uniform bins over [q_min, q_max).
struct Binning {
    std::size_t bins = 201;
    double q_min = -6.0;
    double q_max = 6.0;

    double width() const { return (q_max - q_min) / static_cast<double>(bins); }
    double center(std::size_t i) const { return q_min + (static_cast<double>(i) + 0.5) * width(); }

    /// Bin index, or -1 below the range and `bins` above it.
    std::ptrdiff_t locate(double q) const {
        if (q < q_min) return -1;
        if (q >= q_max) return static_cast<std::ptrdiff_t>(bins);
        const auto i = static_cast<std::ptrdiff_t>(std::floor((q - q_min) / width()));
        return std::min<std::ptrdiff_t>(i, static_cast<std::ptrdiff_t>(bins) - 1);
    }

    void validate() const {
        if (bins == 0 || !(q_max > q_min) || !std::isfinite(q_min) || !std::isfinite(q_max))
            throw DomainError("binning needs at least one bin over a finite nonempty range");
    }

    bool operator==(const Binning &) const = default;
};

/// Density sampled at the midpoints of uniform cells starting at q_min.
struct SampledDensity {
    double q_min = 0.0;
    double width = 1.0;
    std::vector<double> values;

    double center(std::size_t i) const { return q_min + (static_cast<double>(i) + 0.5) * width; }
    double integral() const {
        double s = 0;
        for (double v : values) s += v;
        return s * width;
    }

    /// Midpoint samples of `pdf` on `points` cells spanning [lo, hi].
    template <typename F>
    static SampledDensity from_function(F &&pdf, double lo, double hi, std::size_t points) {
        SampledDensity d{lo, (hi - lo) / static_cast<double>(points), std::vector<double>(points)};
        for (std::size_t i = 0; i < points; ++i) d.values[i] = pdf(d.center(i));
        return d;
    }
};

inline constexpr double kDefaultCalibration = kVacuumVariance;

/// Increment contributed by one conditioning-mode outcome.
inline double weight(double q_b, double calibration = kDefaultCalibration) { return q_b * q_b - calibration; }

/// Binned accumulation of q_a with q_b-dependent increments. A histogram is
/// labelled either by its fixed theta_a or as pooled over all phases.
class WeightedHistogram {
   public:
    explicit WeightedHistogram(const Binning &binning = {}, std::optional<double> theta_a = std::nullopt)
        : binning_(binning),
          theta_a_(theta_a),
          weight_sums_(binning.bins, 0.0),
          weight_sq_sums_(binning.bins, 0.0),
          raw_counts_(binning.bins, 0) {
        binning_.validate();
    }

    const Binning &binning() const { return binning_; }
    std::optional<double> theta_a() const { return theta_a_; }
    bool pooled() const { return !theta_a_.has_value(); }

    const std::vector<double> &weight_sums() const { return weight_sums_; }
    const std::vector<double> &weight_sq_sums() const { return weight_sq_sums_; }
    const std::vector<std::uint64_t> &raw_counts() const { return raw_counts_; }

    /// Sums over in-range bins.
    double total_weight() const { return total_weight_; }
    std::uint64_t total_count() const { return total_count_; }
    std::uint64_t underflow_count() const { return underflow_; }
    std::uint64_t overflow_count() const { return overflow_; }
    std::uint64_t record_count() const { return total_count_ + underflow_ + overflow_; }

    double out_of_range_fraction() const {
        const auto n = record_count();
        return n == 0 ? 0.0 : static_cast<double>(underflow_ + overflow_) / static_cast<double>(n);
    }

    /// Standard error of total_weight from the spread of the increments.
    double total_weight_standard_error() const {
        if (total_count_ < 2) return std::numeric_limits<double>::infinity();
        double s2 = 0;
        for (double v : weight_sq_sums_) s2 += v;
        const double n = static_cast<double>(total_count_);
        return std::sqrt(std::max(0.0, s2 - total_weight_ * total_weight_ / n) * n / (n - 1.0));
    }

    void add(double q_a, double w) {
        const auto i = binning_.locate(q_a);
        if (i < 0) {
            ++underflow_;
        } else if (i >= static_cast<std::ptrdiff_t>(binning_.bins)) {
            ++overflow_;
        } else {
            weight_sums_[i] += w;
            weight_sq_sums_[i] += w * w;
            raw_counts_[i] += 1;
            total_weight_ += w;
            total_count_ += 1;
        }
    }

    /// Entrywise sum. Labels survive only when they agree.
    void merge(const WeightedHistogram &o) {
        if (!(binning_ == o.binning_)) throw BinningMismatchError("cannot merge histograms with different binning");
        for (std::size_t i = 0; i < binning_.bins; ++i) {
            weight_sums_[i] += o.weight_sums_[i];
            weight_sq_sums_[i] += o.weight_sq_sums_[i];
            raw_counts_[i] += o.raw_counts_[i];
        }
        total_weight_ += o.total_weight_;
        total_count_ += o.total_count_;
        underflow_ += o.underflow_;
        overflow_ += o.overflow_;
        if (theta_a_ != o.theta_a_) theta_a_.reset();
    }

    /// Rebuilds a histogram from persisted per-bin data.
    static WeightedHistogram from_bins(const Binning &binning, std::optional<double> theta_a,
                                       std::vector<double> weight_sums, std::vector<double> weight_sq_sums,
                                       std::vector<std::uint64_t> raw_counts, std::uint64_t underflow,
                                       std::uint64_t overflow) {
        WeightedHistogram h(binning, theta_a);
        if (weight_sums.size() != binning.bins || weight_sq_sums.size() != binning.bins ||
            raw_counts.size() != binning.bins)
            throw BinningMismatchError("bin data does not match the binning");
        h.weight_sums_ = std::move(weight_sums);
        h.weight_sq_sums_ = std::move(weight_sq_sums);
        h.raw_counts_ = std::move(raw_counts);
        for (std::size_t i = 0; i < binning.bins; ++i) {
            h.total_weight_ += h.weight_sums_[i];
            h.total_count_ += h.raw_counts_[i];
        }
        h.underflow_ = underflow;
        h.overflow_ = overflow;
        return h;
    }

   private:
    Binning binning_;
    std::optional<double> theta_a_;
    std::vector<double> weight_sums_;
    std::vector<double> weight_sq_sums_;
    std::vector<std::uint64_t> raw_counts_;
    double total_weight_ = 0.0;
    std::uint64_t total_count_ = 0;
    std::uint64_t underflow_ = 0;
    std::uint64_t overflow_ = 0;
};

inline bool same_label(double t1, double t2) { return std::abs(t1 - t2) <= 1e-9 * std::max(1.0, std::abs(t1)); }

/// Adds every record to `h`. A labelled histogram only accepts records taken
/// at its theta_a.
inline void accumulate(WeightedHistogram &h, std::span<const QuadratureRecord> records,
                       double calibration = kDefaultCalibration) {
    const auto label = h.theta_a();
    for (const auto &r : records) {
        if (label && !same_label(*label, r.theta_a))
            throw DomainError("record " + std::to_string(r.index) + " has theta_a " + text::format(r.theta_a) +
                              ", histogram is labelled " + text::format(*label));
        h.add(r.q_a, weight(r.q_b, calibration));
    }
}

/// One histogram per distinct theta_a, in order of first appearance.
class SegmentedAccumulator {
   public:
    explicit SegmentedAccumulator(const Binning &binning, double calibration = kDefaultCalibration)
        : binning_(binning), calibration_(calibration) {}

    void add(std::span<const QuadratureRecord> records) {
        for (const auto &r : records) {
            if (current_ == npos || !same_label(*segments_[current_].theta_a(), r.theta_a)) current_ = find(r.theta_a);
            segments_[current_].add(r.q_a, weight(r.q_b, calibration_));
        }
    }

    const std::vector<WeightedHistogram> &segments() const { return segments_; }

    WeightedHistogram pooled() const {
        WeightedHistogram p(binning_);
        for (const auto &s : segments_) p.merge(s);
        return p;
    }

   private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t find(double theta) {
        for (std::size_t k = 0; k < segments_.size(); ++k)
            if (same_label(*segments_[k].theta_a(), theta)) return k;
        segments_.emplace_back(binning_, theta);
        return segments_.size() - 1;
    }

    Binning binning_;
    double calibration_;
    std::vector<WeightedHistogram> segments_;
    std::size_t current_ = npos;
};

/// Conditioned probability density: weight_sums / (bin width * total
/// weight). Bins with negative weight are kept as they are.
inline SampledDensity normalize(const WeightedHistogram &h, double significance = 5.0) {
    const double total = h.total_weight();
    const double se = h.total_weight_standard_error();
    if (!(total > 0.0) || !(total > significance * se))
        throw DegenerateConditioningError("total conditioning weight " + text::format(total, 6) +
                                          " is not significant (standard error " + text::format(se, 6) + ")");
    const Binning &b = h.binning();
    SampledDensity d{b.q_min, b.width(), std::vector<double>(b.bins)};
    for (std::size_t i = 0; i < b.bins; ++i) d.values[i] = h.weight_sums()[i] / (b.width() * total);
    return d;
}

/// Mean increment of q_b^2 - c over a vacuum input seen through `det`. Using
/// it as the calibration constant removes the dark-noise offset.
inline double measure_vacuum_calibration(const DetectorModel &det, std::uint64_t seed, std::size_t count,
                                         unsigned threads = 1) {
    const auto pairs = sample_joint_quadratures(GaussianTwoModeState::vacuum(), 0.0, 0.0, det, seed, count, threads);
    double s = 0;
    for (const auto &p : pairs) s += p.q_b * p.q_b;
    return s / static_cast<double>(pairs.size());
}

enum class UniformityChannel { weighted, raw };

struct UniformityReport {
    std::size_t segments = 0;
    std::size_t bins_used = 0;
    double max_pairwise_distance = 0.0;
    double chi_square = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
    UniformityChannel channel = UniformityChannel::weighted;

    bool passed(double alpha = 0.01) const { return p_value >= alpha; }
};

/// Tests whether per-theta_a histograms are statistically the same
/// distribution. The homogeneity statistic compares each segment's bin sum
/// with the pooled bin sum scaled by the segment's record count, using the
/// pooled per-record variance of the bin increment.
inline UniformityReport uniformity_test(std::span<const WeightedHistogram> segments,
                                        UniformityChannel channel = UniformityChannel::weighted,
                                        std::uint64_t min_bin_count = 5) {
    if (segments.size() < 2) throw DomainError("uniformity test needs at least two segments");
    const Binning &binning = segments.front().binning();
    for (const auto &s : segments)
        if (!(s.binning() == binning)) throw BinningMismatchError("segments use different binning");

    UniformityReport rep;
    rep.segments = segments.size();
    rep.channel = channel;
    const bool weighted = channel == UniformityChannel::weighted;
    auto bin_sum = [&](const WeightedHistogram &h, std::size_t i) {
        return weighted ? h.weight_sums()[i] : static_cast<double>(h.raw_counts()[i]);
    };
    auto bin_sq = [&](const WeightedHistogram &h, std::size_t i) {
        return weighted ? h.weight_sq_sums()[i] : static_cast<double>(h.raw_counts()[i]);
    };

    double n_total = 0;
    for (const auto &s : segments) n_total += static_cast<double>(s.record_count());

    const double s_count = static_cast<double>(segments.size());
    for (std::size_t i = 0; i < binning.bins; ++i) {
        double w = 0, w2 = 0;
        std::uint64_t c = 0;
        for (const auto &s : segments) {
            w += bin_sum(s, i);
            w2 += bin_sq(s, i);
            c += s.raw_counts()[i];
        }
        if (c < min_bin_count * segments.size()) continue;
        const double per_record_var = (w2 - w * w / n_total) / n_total;
        if (!(per_record_var > 0.0)) continue;
        ++rep.bins_used;
        for (const auto &s : segments) {
            const double ns = static_cast<double>(s.record_count());
            const double diff = bin_sum(s, i) - w * ns / n_total;
            rep.chi_square += diff * diff / (per_record_var * ns);
        }
    }
    rep.degrees_of_freedom = (s_count - 1.0) * static_cast<double>(rep.bins_used);
    rep.p_value = rep.degrees_of_freedom > 0 && rep.chi_square > 0
                      ? boost::math::gamma_q(0.5 * rep.degrees_of_freedom, 0.5 * rep.chi_square)
                      : 1.0;

    std::vector<std::vector<double>> dens;
    for (const auto &s : segments) {
        const double total = weighted ? s.total_weight() : static_cast<double>(s.total_count());
        if (!(total > 0.0)) continue;
        std::vector<double> d(binning.bins);
        for (std::size_t i = 0; i < binning.bins; ++i) d[i] = bin_sum(s, i) / (binning.width() * total);
        dens.push_back(std::move(d));
    }
    for (std::size_t j = 0; j < dens.size(); ++j)
        for (std::size_t k = j + 1; k < dens.size(); ++k)
            for (std::size_t i = 0; i < binning.bins; ++i)
                rep.max_pairwise_distance = std::max(rep.max_pairwise_distance, std::abs(dens[j][i] - dens[k][i]));
    return rep;
}

inline constexpr const char *kHistogramMarker = "# eprtomo weighted histogram";
inline constexpr const char *kHistogramColumns = "center,weight_sum,raw_count,weight_sq_sum";

inline void write_histogram(std::ostream &os, const WeightedHistogram &h, double calibration = kDefaultCalibration) {
    const Binning &b = h.binning();
    os << kHistogramMarker << '\n';
    text::KeyValueDocument meta;
    meta.set_count("bins", b.bins);
    meta.set("q_min", b.q_min);
    meta.set("q_max", b.q_max);
    meta.set("theta_a", h.theta_a() ? text::format(*h.theta_a()) : std::string("pooled"));
    meta.set("calibration", calibration);
    meta.set("total_weight", h.total_weight());
    meta.set_count("total_count", h.total_count());
    meta.set_count("underflow_count", h.underflow_count());
    meta.set_count("overflow_count", h.overflow_count());
    meta.write(os);
    os << kHistogramColumns << '\n';
    for (std::size_t i = 0; i < b.bins; ++i) {
        os << text::format(b.center(i)) << ',' << text::format(h.weight_sums()[i]) << ',' << h.raw_counts()[i] << ','
           << text::format(h.weight_sq_sums()[i]) << '\n';
    }
}

/// Reads every histogram block in a stream.
inline std::vector<WeightedHistogram> read_histograms(std::istream &is) {
    std::vector<WeightedHistogram> out;
    std::string line;
    std::size_t lineno = 0;
    bool have_line = static_cast<bool>(std::getline(is, line));
    if (have_line) ++lineno;
    while (have_line) {
        if (text::trim(line).empty()) {
            have_line = static_cast<bool>(std::getline(is, line));
            if (have_line) ++lineno;
            continue;
        }
        if (text::trim(line) != kHistogramMarker) throw ParseError("expected histogram marker", lineno);
        text::KeyValueDocument meta;
        while (true) {
            if (!std::getline(is, line)) throw ParseError("histogram block ends before its bins", lineno);
            ++lineno;
            const auto t = text::trim(line);
            if (t == kHistogramColumns) break;
            const auto eq = t.find('=');
            if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", lineno);
            meta.set(std::string(text::trim(t.substr(0, eq))), std::string(text::trim(t.substr(eq + 1))));
        }
        Binning b;
        std::optional<double> theta;
        std::uint64_t under = 0, over = 0;
        try {
            b.bins = meta.get_count("bins");
            b.q_min = meta.get_double("q_min");
            b.q_max = meta.get_double("q_max");
            if (meta.get("theta_a") != "pooled") theta = meta.get_double("theta_a");
            under = meta.get_count("underflow_count");
            over = meta.get_count("overflow_count");
        } catch (const ParseError &e) {
            throw ParseError(e.what(), lineno);
        }
        std::vector<double> ws(b.bins), wsq(b.bins);
        std::vector<std::uint64_t> counts(b.bins);
        for (std::size_t i = 0; i < b.bins; ++i) {
            if (!std::getline(is, line)) throw ParseError("missing histogram rows", lineno);
            ++lineno;
            const auto f = text::split(text::trim(line), ',');
            if (f.size() != 4) throw ParseError("expected 4 histogram columns", lineno);
            const auto w = text::to_double(f[1]);
            const auto c = text::to_uint(f[2]);
            const auto w2 = text::to_double(f[3]);
            if (!w || !c || !w2) throw ParseError("bad histogram row", lineno);
            ws[i] = *w;
            counts[i] = *c;
            wsq[i] = *w2;
        }
        out.push_back(WeightedHistogram::from_bins(b, theta, std::move(ws), std::move(wsq), std::move(counts), under, over));
        have_line = static_cast<bool>(std::getline(is, line));
        if (have_line) ++lineno;
    }
    return out;
}

inline void write_uniformity_report(std::ostream &os, const UniformityReport &r, double alpha = 0.01) {
    os << "# eprtomo uniformity report\n";
    text::KeyValueDocument d;
    d.set("channel", r.channel == UniformityChannel::weighted ? std::string("weighted") : std::string("raw"));
    d.set_count("segments", r.segments);
    d.set_count("bins_used", r.bins_used);
    d.set("max_pairwise_distance", r.max_pairwise_distance);
    d.set("chi_square", r.chi_square);
    d.set("degrees_of_freedom", r.degrees_of_freedom);
    d.set("p_value", r.p_value);
    d.set("alpha", alpha);
    d.set("passed", r.passed(alpha) ? std::string("true") : std::string("false"));
    d.write(os);
}

}  // namespace eprtomo
