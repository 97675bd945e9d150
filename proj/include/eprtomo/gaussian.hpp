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

// Gaussian two-mode states in the quadrature convention used throughout the
// library:
//
//   X = a + a^dag,  P = -i (a - a^dag),  [X, P] = 2i.
//
// The vacuum has variance exactly 1 in every quadrature and
// n + 1/2 = (X^2 + P^2) / 4. Phase-space vectors are ordered
// (X_a, P_a, X_b, P_b). A homodyne detector with local-oscillator phase theta
// measures Q_theta = cos(theta) X + sin(theta) P.
//
// Sign convention: the balanced beamsplitter maps the input modes (1, 2) to
// a = (1 + 2)/sqrt(2), b = (1 - 2)/sqrt(2). Mixing an X-squeezed mode with a
// P-squeezed one then gives Cov(X_a, X_b) < 0 and Cov(P_a, P_b) > 0, the same
// signs as the two-mode squeezed vacuum sum over (-tanh r)^n |n>|n>.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "eprtomo/errors.hpp"
#include "eprtomo/rng.hpp"

namespace eprtomo {

inline constexpr double kVacuumVariance = 1.0;
inline constexpr double kPhysicalTolerance = 1e-9;
inline constexpr double kSymmetryTolerance = 1e-12;

enum class Mode { a, b };
enum class Quadrature { x, p };

inline double db_to_ratio(double db) { return std::pow(10.0, db / 10.0); }

/// Squeezing below and anti-squeezing above shot noise, both in dB >= 0.
struct SqueezerSpec {
    double squeeze_db = 0.0;
    double antisqueeze_db = 0.0;

    double squeezed_variance() const { return db_to_ratio(-squeeze_db); }
    double antisqueezed_variance() const { return db_to_ratio(antisqueeze_db); }

    /// V_s * V_a; equals 1 for a pure squeezer.
    double purity_product() const { return squeezed_variance() * antisqueezed_variance(); }
    bool is_pure() const { return std::abs(purity_product() - 1.0) <= 1e-9; }

    void validate() const {
        if (!(squeeze_db >= 0.0) || !(antisqueeze_db >= 0.0) || !std::isfinite(squeeze_db) ||
            !std::isfinite(antisqueeze_db))
            throw DomainError("squeezer levels must be finite and nonnegative dB");
        if (purity_product() < 1.0 - kPhysicalTolerance)
            throw PhysicalityError("squeezer violates uncertainty: V_s*V_a = " +
                                   std::to_string(purity_product()) + " < 1");
    }
};

/// Homodyne detector imperfections, shared by both arms.
struct DetectorModel {
    double efficiency = 1.0;
    /// Shot noise above electronic noise; +inf means a noiseless detector.
    double dark_clearance_db = std::numeric_limits<double>::infinity();
    double phase_jitter_rad = 0.0;

    static DetectorModel ideal() { return {}; }

    double dark_variance() const {
        if (std::isinf(dark_clearance_db) && dark_clearance_db > 0) return 0.0;
        return db_to_ratio(-dark_clearance_db);
    }

    void validate() const {
        if (!(efficiency > 0.0 && efficiency <= 1.0))
            throw DomainError("detector efficiency must lie in (0, 1]");
        if (std::isnan(dark_clearance_db))
            throw DomainError("dark noise clearance must be a number");
        if (!(phase_jitter_rad >= 0.0) || !std::isfinite(phase_jitter_rad))
            throw DomainError("phase jitter must be finite and nonnegative");
    }
};

struct SingleModeState {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();

    double symplectic_eigenvalue() const { return std::sqrt(std::max(0.0, cov.determinant())); }

    void validate() const {
        const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
        if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale)
            throw PhysicalityError("single-mode covariance is not symmetric");
        if (cov(0, 0) <= 0.0 || cov(1, 1) <= 0.0 || symplectic_eigenvalue() < 1.0 - kPhysicalTolerance)
            throw PhysicalityError("single-mode covariance violates uncertainty");
    }
};

/// Mean vector and covariance over (X_a, P_a, X_b, P_b). The constructor
/// rejects anything that is not a physical Gaussian state.
class GaussianTwoModeState {
   public:
    GaussianTwoModeState() : mean_(Eigen::Vector4d::Zero()), cov_(Eigen::Matrix4d::Identity()) {}

    explicit GaussianTwoModeState(const Eigen::Matrix4d &cov,
                                  const Eigen::Vector4d &mean = Eigen::Vector4d::Zero())
        : mean_(mean), cov_(cov) {
        validate();
    }

    static GaussianTwoModeState vacuum() { return {}; }

    const Eigen::Vector4d &mean() const { return mean_; }
    const Eigen::Matrix4d &cov() const { return cov_; }

    Eigen::Matrix2d block(Mode row, Mode col) const {
        return cov_.block<2, 2>(offset(row), offset(col));
    }
    Eigen::Vector2d mode_mean(Mode m) const { return mean_.segment<2>(offset(m)); }

    SingleModeState reduced(Mode m) const { return {mode_mean(m), block(m, m)}; }

    /// Symplectic eigenvalues (nu_-, nu_+), normalised so the vacuum has both
    /// equal to 1. They are the square roots of the eigenvalues of the
    /// symmetric matrix -V^(1/2) Omega V Omega V^(1/2).
    std::pair<double, double> symplectic_eigenvalues() const {
        Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
        omega(0, 1) = omega(2, 3) = 1.0;
        omega(1, 0) = omega(3, 2) = -1.0;
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> root(cov_);
        const Eigen::Matrix4d half = root.operatorSqrt();
        Eigen::Matrix4d m = -(half * omega * cov_ * omega * half);
        m = (0.5 * (m + m.transpose())).eval();
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(m, Eigen::EigenvaluesOnly);
        const auto &ev = eig.eigenvalues();
        return {std::sqrt(std::max(0.0, ev(0))), std::sqrt(std::max(0.0, ev(3)))};
    }

    bool is_pure(double tol = 1e-9) const {
        auto [lo, hi] = symplectic_eigenvalues();
        return std::abs(lo - 1.0) <= tol && std::abs(hi - 1.0) <= tol;
    }

    static constexpr Eigen::Index offset(Mode m) { return m == Mode::a ? 0 : 2; }

   private:
    void validate() const {
        if (!cov_.allFinite() || !mean_.allFinite())
            throw PhysicalityError("covariance or mean has non-finite entries");
        const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
        if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale)
            throw PhysicalityError("covariance matrix is not symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(cov_, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -kSymmetryTolerance * scale)
            throw PhysicalityError("covariance matrix is not positive semidefinite");
        if (symplectic_eigenvalues().first < 1.0 - kPhysicalTolerance)
            throw PhysicalityError("covariance violates the uncertainty principle");
    }

    Eigen::Vector4d mean_;
    Eigen::Matrix4d cov_;
};

inline Eigen::Matrix2d rotation_matrix(double phi) {
    Eigen::Matrix2d r;
    r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    return r;
}

/// Amplitude-squeezed vacuum: X carries V_s, P carries V_a.
inline SingleModeState single_mode_squeezed(const SqueezerSpec &spec) {
    spec.validate();
    SingleModeState s;
    s.cov = Eigen::Vector2d(spec.squeezed_variance(), spec.antisqueezed_variance()).asDiagonal();
    return s;
}

inline SingleModeState rotate(const SingleModeState &s, double phi) {
    const Eigen::Matrix2d r = rotation_matrix(phi);
    SingleModeState out{r * s.mean, r * s.cov * r.transpose()};
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

inline GaussianTwoModeState rotate(const GaussianTwoModeState &s, Mode mode, double phi) {
    Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
    const auto o = GaussianTwoModeState::offset(mode);
    t.block<2, 2>(o, o) = rotation_matrix(phi);
    Eigen::Matrix4d cov = t * s.cov() * t.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
    return GaussianTwoModeState(cov, t * s.mean());
}

/// Symplectic matrix of the balanced beamsplitter (see the header comment).
inline Eigen::Matrix4d beamsplitter_5050_matrix() {
    const double h = std::numbers::sqrt2 / 2.0;
    Eigen::Matrix4d s;
    s << h, 0, h, 0,   //
        0, h, 0, h,    //
        h, 0, -h, 0,   //
        0, h, 0, -h;
    return s;
}

inline GaussianTwoModeState beamsplit_5050(const SingleModeState &s1, const SingleModeState &s2) {
    s1.validate();
    s2.validate();
    Eigen::Matrix4d in = Eigen::Matrix4d::Zero();
    in.block<2, 2>(0, 0) = s1.cov;
    in.block<2, 2>(2, 2) = s2.cov;
    Eigen::Vector4d mean_in;
    mean_in << s1.mean, s2.mean;
    const Eigen::Matrix4d bs = beamsplitter_5050_matrix();
    Eigen::Matrix4d cov = bs * in * bs.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
    return GaussianTwoModeState(cov, bs * mean_in);
}

/// Two squeezers of the given spec locked at a relative phase (pi/2 for
/// the entangling configuration) and mixed on the balanced beamsplitter.
inline GaussianTwoModeState entangled_pair(const SqueezerSpec &spec,
                                           double relative_phase = std::numbers::pi / 2.0) {
    const SingleModeState s1 = single_mode_squeezed(spec);
    return beamsplit_5050(s1, rotate(s1, relative_phase));
}

/// Pure two-mode squeezed vacuum with squeezing parameter r.
inline GaussianTwoModeState tmss_covariance(double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("squeezing parameter must be >= 0");
    const double c = std::cosh(2.0 * r);
    const double s = std::sinh(2.0 * r);
    Eigen::Matrix4d cov;
    cov << c, 0, -s, 0,  //
        0, c, 0, s,      //
        -s, 0, c, 0,     //
        0, s, 0, c;
    return GaussianTwoModeState(cov);
}

/// Pure-loss channel of transmissivity eta on one mode.
inline GaussianTwoModeState apply_loss(const GaussianTwoModeState &s, Mode mode, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("loss transmissivity must lie in (0, 1]");
    const auto o = GaussianTwoModeState::offset(mode);
    Eigen::Vector4d scale = Eigen::Vector4d::Ones();
    scale.segment<2>(o).setConstant(std::sqrt(eta));
    Eigen::Matrix4d cov = scale.asDiagonal() * s.cov() * scale.asDiagonal();
    cov.block<2, 2>(o, o) += (1.0 - eta) * kVacuumVariance * Eigen::Matrix2d::Identity();
    Eigen::Vector4d mean = scale.asDiagonal() * s.mean();
    return GaussianTwoModeState(cov, mean);
}

/// State as seen by the detector pair: loss on both arms, then additive
/// electronic noise. Phase jitter is not a Gaussian channel and is handled
/// by `detected_projection`.
inline GaussianTwoModeState detected_state(const GaussianTwoModeState &s, const DetectorModel &det) {
    det.validate();
    GaussianTwoModeState out = apply_loss(apply_loss(s, Mode::a, det.efficiency), Mode::b, det.efficiency);
    Eigen::Matrix4d cov = out.cov();
    cov.diagonal().array() += det.dark_variance();
    return GaussianTwoModeState(cov, out.mean());
}

/// First and second moments of the joint homodyne outcome (q_a, q_b).
struct ProjectedMoments {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double var_a = 1.0;
    double var_b = 1.0;
    double cov_ab = 0.0;
};

inline ProjectedMoments project(const GaussianTwoModeState &s, double theta_a, double theta_b) {
    const Eigen::Vector2d ua(std::cos(theta_a), std::sin(theta_a));
    const Eigen::Vector2d ub(std::cos(theta_b), std::sin(theta_b));
    return {ua.dot(s.mode_mean(Mode::a)), ub.dot(s.mode_mean(Mode::b)),
            ua.dot(s.block(Mode::a, Mode::a) * ua), ub.dot(s.block(Mode::b, Mode::b) * ub),
            ua.dot(s.block(Mode::a, Mode::b) * ub)};
}

/// Exact moments of the detected outcome including efficiency, dark noise
/// and independent Gaussian jitter of both local-oscillator phases.
inline ProjectedMoments detected_projection(const GaussianTwoModeState &s, double theta_a, double theta_b,
                                            const DetectorModel &det) {
    det.validate();
    const double sigma2 = det.phase_jitter_rad * det.phase_jitter_rad;
    const double damp1 = std::exp(-0.5 * sigma2);  // E[cos(delta)]
    const double damp2 = std::exp(-2.0 * sigma2);  // E[cos(2 delta)]
    auto second_moment = [&](double theta) -> Eigen::Matrix2d {
        Eigen::Matrix2d m;
        m << 1.0 + damp2 * std::cos(2 * theta), damp2 * std::sin(2 * theta), damp2 * std::sin(2 * theta),
            1.0 - damp2 * std::cos(2 * theta);
        return 0.5 * m;
    };
    const Eigen::Vector2d ua = damp1 * Eigen::Vector2d(std::cos(theta_a), std::sin(theta_a));
    const Eigen::Vector2d ub = damp1 * Eigen::Vector2d(std::cos(theta_b), std::sin(theta_b));
    const Eigen::Vector2d ma = s.mode_mean(Mode::a);
    const Eigen::Vector2d mb = s.mode_mean(Mode::b);
    const Eigen::Matrix2d qa = s.block(Mode::a, Mode::a) + ma * ma.transpose();
    const Eigen::Matrix2d qb = s.block(Mode::b, Mode::b) + mb * mb.transpose();

    ProjectedMoments raw;
    raw.mean_a = ua.dot(ma);
    raw.mean_b = ub.dot(mb);
    raw.var_a = (qa * second_moment(theta_a)).trace() - raw.mean_a * raw.mean_a;
    raw.var_b = (qb * second_moment(theta_b)).trace() - raw.mean_b * raw.mean_b;
    raw.cov_ab = ua.dot(s.block(Mode::a, Mode::b) * ub);

    const double eta = det.efficiency;
    const double noise = (1.0 - eta) * kVacuumVariance + det.dark_variance();
    return {std::sqrt(eta) * raw.mean_a, std::sqrt(eta) * raw.mean_b, eta * raw.var_a + noise,
            eta * raw.var_b + noise, eta * raw.cov_ab};
}

struct QuadraturePair {
    double q_a = 0.0;
    double q_b = 0.0;
};

/// Draws detected joint homodyne outcomes of one state at arbitrary
/// local-oscillator phases. Holds no random state itself.
class JointSampler {
   public:
    JointSampler(const GaussianTwoModeState &s, const DetectorModel &det)
        : a_(s.block(Mode::a, Mode::a)),
          b_(s.block(Mode::b, Mode::b)),
          c_(s.block(Mode::a, Mode::b)),
          ma_(s.mode_mean(Mode::a)),
          mb_(s.mode_mean(Mode::b)),
          eta_(det.efficiency),
          noise_((1.0 - det.efficiency) * kVacuumVariance + det.dark_variance()),
          jitter_(det.phase_jitter_rad) {
        det.validate();
    }

    /// One draw. With jitter enabled, two normals perturb the phases before
    /// the two normals of the outcome are drawn.
    QuadraturePair operator()(Engine &engine, std::normal_distribution<double> &normal, double theta_a,
                              double theta_b) const {
        if (jitter_ > 0.0) {
            theta_a += jitter_ * normal(engine);
            theta_b += jitter_ * normal(engine);
        }
        const double ca = std::cos(theta_a), sa = std::sin(theta_a);
        const double cb = std::cos(theta_b), sb = std::sin(theta_b);
        const double va = ca * ca * a_(0, 0) + 2 * ca * sa * a_(0, 1) + sa * sa * a_(1, 1);
        const double vb = cb * cb * b_(0, 0) + 2 * cb * sb * b_(0, 1) + sb * sb * b_(1, 1);
        const double cab = ca * cb * c_(0, 0) + ca * sb * c_(0, 1) + sa * cb * c_(1, 0) + sa * sb * c_(1, 1);
        const double sqrt_eta = std::sqrt(eta_);
        const double mean_a = sqrt_eta * (ca * ma_(0) + sa * ma_(1));
        const double mean_b = sqrt_eta * (cb * mb_(0) + sb * mb_(1));
        const double var_a = eta_ * va + noise_;
        const double var_b = eta_ * vb + noise_;
        const double cov = eta_ * cab;

        const double sd_a = std::sqrt(var_a);
        const double z1 = normal(engine);
        const double z2 = normal(engine);
        const double slope = cov / sd_a;
        const double resid = std::sqrt(std::max(0.0, var_b - slope * slope));
        return {mean_a + sd_a * z1, mean_b + slope * z1 + resid * z2};
    }

   private:
    Eigen::Matrix2d a_, b_, c_;
    Eigen::Vector2d ma_, mb_;
    double eta_;
    double noise_;
    double jitter_;
};

/// `count` detected outcome pairs at fixed phases. Chunked seeding makes the
/// result bit-identical for every thread count.
inline std::vector<QuadraturePair> sample_joint_quadratures(const GaussianTwoModeState &s, double theta_a,
                                                            double theta_b, const DetectorModel &det,
                                                            std::uint64_t seed, std::size_t count,
                                                            unsigned threads = 1) {
    if (count == 0) throw DomainError("sample count must be >= 1");
    const JointSampler sampler(s, det);
    std::vector<QuadraturePair> out(count);
    const std::size_t chunks = (count + kSampleChunk - 1) / kSampleChunk;
    parallel_for(chunks, threads, [&](std::size_t chunk) {
        Engine engine = chunk_engine(seed, chunk);
        std::normal_distribution<double> normal(0.0, 1.0);
        const std::size_t begin = chunk * kSampleChunk;
        const std::size_t end = std::min(count, begin + kSampleChunk);
        for (std::size_t i = begin; i < end; ++i) out[i] = sampler(engine, normal, theta_a, theta_b);
    });
    return out;
}

}  // namespace eprtomo
