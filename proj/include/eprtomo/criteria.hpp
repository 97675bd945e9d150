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

// Duan inseparability and Reid-Drummond EPR criteria, analytic and
// estimated from homodyne records.
//
// Both criteria only need the second moments of two measurement settings:
// both detectors at theta = 0 (the X setting) and both at theta = pi/2 (the
// P setting).

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "eprtomo/errors.hpp"
#include "eprtomo/gaussian.hpp"
#include "eprtomo/record.hpp"
#include "eprtomo/text.hpp"

namespace eprtomo {

inline constexpr double kXPhase = 0.0;
inline constexpr double kPPhase = std::numbers::pi / 2.0;

/// Second moments of (q_a, q_b) at the X setting and at the P setting.
struct SettingMoments {
    ProjectedMoments x;
    ProjectedMoments p;
};

inline SettingMoments setting_moments(const GaussianTwoModeState &s) {
    return {project(s, kXPhase, kXPhase), project(s, kPPhase, kPPhase)};
}

/// Detected moments, including efficiency, dark noise and phase jitter.
inline SettingMoments setting_moments(const GaussianTwoModeState &s, const DetectorModel &det) {
    return {detected_projection(s, kXPhase, kXPhase, det), detected_projection(s, kPPhase, kPPhase, det)};
}

struct DuanResult {
    /// 1/2 (Var(X_a + sx X_b) + Var(P_a + sp P_b)); 2 for the vacuum.
    double value = 0.0;
    /// value / 2; 1 for the vacuum, below 1 certifies entanglement.
    double normalized = 0.0;
    int sign_x = +1;
    int sign_p = -1;

    std::string signs() const {
        return std::string("X_a") + (sign_x > 0 ? "+" : "-") + "X_b,P_a" + (sign_p > 0 ? "+" : "-") + "P_b";
    }
};

/// The sign pairing (+,-) or (-,+) that gives the smaller value is chosen,
/// so the result does not depend on the beamsplitter sign convention.
inline DuanResult duan(const SettingMoments &m) {
    auto combo = [](const ProjectedMoments &pm, int sign) { return pm.var_a + pm.var_b + 2.0 * sign * pm.cov_ab; };
    const double plus_minus = 0.5 * (combo(m.x, +1) + combo(m.p, -1));
    const double minus_plus = 0.5 * (combo(m.x, -1) + combo(m.p, +1));
    DuanResult r;
    if (plus_minus <= minus_plus) {
        r.value = plus_minus;
        r.sign_x = +1;
        r.sign_p = -1;
    } else {
        r.value = minus_plus;
        r.sign_x = -1;
        r.sign_p = +1;
    }
    r.normalized = r.value / 2.0;
    return r;
}

inline DuanResult duan(const GaussianTwoModeState &s) { return duan(setting_moments(s)); }
inline DuanResult duan(const Eigen::Matrix4d &cov) { return duan(GaussianTwoModeState(cov)); }

/// Var(Q_target) - Cov(Q_a, Q_b)^2 / Var(Q_other) for one setting's moments.
inline double conditional_variance(const ProjectedMoments &m, Mode target) {
    const double conditioner = target == Mode::a ? m.var_b : m.var_a;
    const double own = target == Mode::a ? m.var_a : m.var_b;
    if (!(conditioner > 0.0)) throw DegenerateInputError("conditioning variance is zero");
    return own - m.cov_ab * m.cov_ab / conditioner;
}

inline double conditional_variance(const GaussianTwoModeState &s, Quadrature quad, Mode target) {
    const double theta = quad == Quadrature::x ? kXPhase : kPPhase;
    return conditional_variance(project(s, theta, theta), target);
}

/// Product of the conditional variances of X_a and P_a given mode b;
/// below 1 demonstrates EPR steering.
inline double reid_epr(const SettingMoments &m) {
    return conditional_variance(m.x, Mode::a) * conditional_variance(m.p, Mode::a);
}
inline double reid_epr(const GaussianTwoModeState &s) { return reid_epr(setting_moments(s)); }

struct CriteriaReport {
    std::string source = "analytic";
    double duan_value = 0.0;
    double duan_normalized = 0.0;
    std::string duan_signs;
    double reid_product = 0.0;
    double cond_var_x = 0.0;
    double cond_var_p = 0.0;
    double se_duan_value = 0.0;
    double se_duan_normalized = 0.0;
    double se_reid_product = 0.0;
    double se_cond_var_x = 0.0;
    double se_cond_var_p = 0.0;
    std::uint64_t sample_count = 0;
    std::uint64_t count_x = 0;
    std::uint64_t count_p = 0;
    std::uint64_t count_other = 0;
    std::uint64_t batches = 0;
};

inline CriteriaReport report_from_moments(const SettingMoments &m) {
    CriteriaReport r;
    const DuanResult d = duan(m);
    r.duan_value = d.value;
    r.duan_normalized = d.normalized;
    r.duan_signs = d.signs();
    r.cond_var_x = conditional_variance(m.x, Mode::a);
    r.cond_var_p = conditional_variance(m.p, Mode::a);
    r.reid_product = r.cond_var_x * r.cond_var_p;
    return r;
}

inline CriteriaReport analytic_report(const GaussianTwoModeState &s) { return report_from_moments(setting_moments(s)); }
inline CriteriaReport analytic_report(const GaussianTwoModeState &s, const DetectorModel &det) {
    return report_from_moments(setting_moments(s, det));
}

/// Streaming plug-in estimator of both criteria from records taken at the
/// X and P settings. Samples of each setting are dealt round-robin into
/// `batches` groups; standard errors come from the spread of the per-batch
/// estimates. Records at other settings are counted and ignored.
class CriteriaEstimator {
   public:
    static constexpr std::size_t kDefaultBatches = 64;
    static constexpr std::uint64_t kMinSamplesPerSetting = 10000;

    explicit CriteriaEstimator(std::size_t batches = kDefaultBatches) : x_(batches), p_(batches) {
        if (batches < 20) throw DomainError("batch-means error estimates need at least 20 batches");
    }

    void add(const QuadratureRecord &r) {
        if (same_phase(r.theta_a, kXPhase) && same_phase(r.theta_b, kXPhase)) {
            x_.add(r.q_a, r.q_b);
        } else if (same_phase(r.theta_a, kPPhase) && same_phase(r.theta_b, kPPhase)) {
            p_.add(r.q_a, r.q_b);
        } else {
            ++other_;
        }
    }

    void add(std::span<const QuadratureRecord> records) {
        for (const auto &r : records) add(r);
    }

    CriteriaReport report() const {
        if (x_.count() == 0 || p_.count() == 0)
            throw IncompleteDataError(std::string("records lack the ") + (x_.count() == 0 ? "(X,X)" : "(P,P)") +
                                      " setting");
        if (x_.count() < kMinSamplesPerSetting || p_.count() < kMinSamplesPerSetting)
            throw SignificanceError("need at least " + std::to_string(kMinSamplesPerSetting) +
                                    " pairs per setting, have " + std::to_string(std::min(x_.count(), p_.count())));

        CriteriaReport r = report_from_moments({x_.total().moments(), p_.total().moments()});
        r.source = "records";
        r.count_x = x_.count();
        r.count_p = p_.count();
        r.count_other = other_;
        r.sample_count = x_.count() + p_.count() + other_;
        r.batches = x_.batches();

        std::array<std::vector<double>, 5> per_batch;
        for (std::size_t k = 0; k < x_.batches(); ++k) {
            const CriteriaReport b = report_from_moments({x_.batch(k).moments(), p_.batch(k).moments()});
            per_batch[0].push_back(b.duan_value);
            per_batch[1].push_back(b.duan_normalized);
            per_batch[2].push_back(b.reid_product);
            per_batch[3].push_back(b.cond_var_x);
            per_batch[4].push_back(b.cond_var_p);
        }
        r.se_duan_value = standard_error(per_batch[0]);
        r.se_duan_normalized = standard_error(per_batch[1]);
        r.se_reid_product = standard_error(per_batch[2]);
        r.se_cond_var_x = standard_error(per_batch[3]);
        r.se_cond_var_p = standard_error(per_batch[4]);
        return r;
    }

   private:
    struct Sums {
        std::uint64_t n = 0;
        double a = 0, b = 0, aa = 0, bb = 0, ab = 0;

        void add(double qa, double qb) {
            ++n;
            a += qa;
            b += qb;
            aa += qa * qa;
            bb += qb * qb;
            ab += qa * qb;
        }
        void merge(const Sums &o) {
            n += o.n;
            a += o.a;
            b += o.b;
            aa += o.aa;
            bb += o.bb;
            ab += o.ab;
        }
        ProjectedMoments moments() const {
            const double nn = static_cast<double>(n);
            const double ma = a / nn, mb = b / nn;
            const double corr = nn / (nn - 1.0);
            return {ma, mb, (aa / nn - ma * ma) * corr, (bb / nn - mb * mb) * corr, (ab / nn - ma * mb) * corr};
        }
    };

    class Setting {
       public:
        explicit Setting(std::size_t batches) : batches_(batches) {}
        void add(double qa, double qb) {
            batches_[next_].add(qa, qb);
            next_ = (next_ + 1) % batches_.size();
        }
        std::uint64_t count() const {
            std::uint64_t n = 0;
            for (const auto &b : batches_) n += b.n;
            return n;
        }
        std::size_t batches() const { return batches_.size(); }
        const Sums &batch(std::size_t k) const { return batches_[k]; }
        Sums total() const {
            Sums t;
            for (const auto &b : batches_) t.merge(b);
            return t;
        }

       private:
        std::vector<Sums> batches_;
        std::size_t next_ = 0;
    };

    static double standard_error(const std::vector<double> &v) {
        double mean = 0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double k = static_cast<double>(v.size());
        return std::sqrt(ss / (k - 1.0) / k);
    }

    Setting x_;
    Setting p_;
    std::uint64_t other_ = 0;
};

inline CriteriaReport estimate_from_records(std::span<const QuadratureRecord> records,
                                            std::size_t batches = CriteriaEstimator::kDefaultBatches) {
    CriteriaEstimator est(batches);
    est.add(records);
    return est.report();
}

inline text::KeyValueDocument to_document(const CriteriaReport &r) {
    text::KeyValueDocument d;
    d.set("source", r.source);
    d.set("duan_value", r.duan_value);
    d.set("duan_normalized", r.duan_normalized);
    d.set("duan_signs", r.duan_signs);
    d.set("reid_product", r.reid_product);
    d.set("cond_var_x", r.cond_var_x);
    d.set("cond_var_p", r.cond_var_p);
    d.set("se_duan_value", r.se_duan_value);
    d.set("se_duan_normalized", r.se_duan_normalized);
    d.set("se_reid_product", r.se_reid_product);
    d.set("se_cond_var_x", r.se_cond_var_x);
    d.set("se_cond_var_p", r.se_cond_var_p);
    d.set_count("sample_count", r.sample_count);
    d.set_count("count_x", r.count_x);
    d.set_count("count_p", r.count_p);
    d.set_count("count_other", r.count_other);
    d.set_count("batches", r.batches);
    return d;
}

inline CriteriaReport report_from_document(const text::KeyValueDocument &d) {
    CriteriaReport r;
    r.source = d.get("source");
    r.duan_value = d.get_double("duan_value");
    r.duan_normalized = d.get_double("duan_normalized");
    r.duan_signs = d.get("duan_signs");
    r.reid_product = d.get_double("reid_product");
    r.cond_var_x = d.get_double("cond_var_x");
    r.cond_var_p = d.get_double("cond_var_p");
    r.se_duan_value = d.get_double("se_duan_value");
    r.se_duan_normalized = d.get_double("se_duan_normalized");
    r.se_reid_product = d.get_double("se_reid_product");
    r.se_cond_var_x = d.get_double("se_cond_var_x");
    r.se_cond_var_p = d.get_double("se_cond_var_p");
    r.sample_count = d.get_count("sample_count");
    r.count_x = d.get_count("count_x");
    r.count_p = d.get_count("count_p");
    r.count_other = d.get_count("count_other");
    r.batches = d.get_count("batches");
    return r;
}

inline void write_report(std::ostream &os, const CriteriaReport &r) {
    os << "# eprtomo criteria report\n";
    to_document(r).write(os);
}

}  // namespace eprtomo
