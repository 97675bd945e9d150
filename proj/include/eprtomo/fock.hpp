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

// Fock-basis tools: oscillator eigenfunctions, diagonal pattern functions,
// photon-number loss maps and the truncated two-mode squeezed vacuum.
//
// Wavefunctions use the vacuum-variance-1 convention, so psi_0(q) =
// (2 pi)^(-1/4) exp(-q^2/4) and psi_n solves
//
//   psi'' = (q^2/4 - n - 1/2) psi.

#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "eprtomo/errors.hpp"

namespace eprtomo {

inline constexpr int kMaxFockOrder = 60;
inline constexpr int kMaxPatternOrder = 40;

/// psi_0 .. psi_{n_max} at q by the upward three-term recursion.
inline std::vector<double> fock_wavefunctions(int n_max, double q) {
    if (n_max < 0) throw DomainError("Fock order must be >= 0");
    if (n_max > kMaxFockOrder) throw DomainError("Fock order above " + std::to_string(kMaxFockOrder) + " is not supported");
    std::vector<double> psi(static_cast<std::size_t>(n_max) + 1);
    psi[0] = std::pow(2.0 * std::numbers::pi, -0.25) * std::exp(-0.25 * q * q);
    if (n_max >= 1) psi[1] = q * psi[0];
    for (int n = 1; n < n_max; ++n) {
        const double np1 = n + 1.0;
        psi[n + 1] = q / std::sqrt(np1) * psi[n] - std::sqrt(n / np1) * psi[n - 1];
    }
    return psi;
}

inline double fock_wavefunction(int n, double q) { return fock_wavefunctions(n, q)[static_cast<std::size_t>(n)]; }

/// Quadrature probability density |psi_n(q)|^2 of the Fock state |n>.
inline double fock_pdf(int n, double q) {
    const double v = fock_wavefunction(n, q);
    return v * v;
}

/// Diagonal pattern functions f_nn(q) with  int f_nn |psi_m|^2 dq = delta_nm.
///
/// f_nn = 2 d/dq (psi_n phi_n), where phi_n is the irregular solution of the
/// same oscillator equation with opposite parity and unit Wronskian
/// psi_n phi_n' - psi_n' phi_n = 1. phi_n is integrated outward from q = 0
/// with classical RK4; the tabulated kernel and its derivative are evaluated
/// between nodes by cubic Hermite interpolation. Every f_nn is even in q.
class PatternFunctions {
   public:
    explicit PatternFunctions(int n_max = 20, double q_max = 13.0, double step = 1e-3)
        : n_max_(n_max), q_max_(q_max), step_(step) {
        if (n_max < 0 || n_max > kMaxPatternOrder)
            throw DomainError("pattern functions are tabulated only up to n = " + std::to_string(kMaxPatternOrder));
        if (!(q_max > 0.0) || !(step > 0.0)) throw DomainError("pattern table needs a positive range and step");
        nodes_ = static_cast<std::size_t>(std::ceil(q_max_ / step_)) + 1;
        values_.assign(static_cast<std::size_t>(n_max_ + 1) * nodes_, 0.0);
        slopes_.assign(values_.size(), 0.0);
        for (int n = 0; n <= n_max_; ++n) tabulate(n);
    }

    int n_max() const { return n_max_; }
    double q_max() const { return q_max_; }

    double operator()(int n, double q) const {
        if (n < 0 || n > n_max_) throw DomainError("pattern function order " + std::to_string(n) + " not tabulated");
        const double x = std::abs(q);
        if (x > q_max_) throw DomainError("pattern function requested beyond |q| = " + std::to_string(q_max_));
        const double u = x / step_;
        std::size_t i = static_cast<std::size_t>(u);
        if (i >= nodes_ - 1) i = nodes_ - 2;
        const double t = u - static_cast<double>(i);
        const std::size_t base = static_cast<std::size_t>(n) * nodes_;
        const double y0 = values_[base + i], y1 = values_[base + i + 1];
        const double d0 = slopes_[base + i] * step_, d1 = slopes_[base + i + 1] * step_;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1;
    }

   private:
    void tabulate(int n) {
        const double energy = n + 0.5;
        auto psi_pair = [n](double q) {
            const auto psi = fock_wavefunctions(n, q);
            const double p = psi[static_cast<std::size_t>(n)];
            const double prev = n > 0 ? psi[static_cast<std::size_t>(n) - 1] : 0.0;
            return std::pair{p, std::sqrt(static_cast<double>(n)) * prev - 0.5 * q * p};
        };

        // phi(0), phi'(0) fixing opposite parity and unit Wronskian.
        auto [p0, dp0] = psi_pair(0.0);
        double phi = 0.0, dphi = 0.0;
        if (n % 2 == 0) {
            dphi = 1.0 / p0;
        } else {
            phi = -1.0 / dp0;
        }

        auto accel = [energy](double q, double y) { return (0.25 * q * q - energy) * y; };
        const std::size_t base = static_cast<std::size_t>(n) * nodes_;
        for (std::size_t i = 0; i < nodes_; ++i) {
            const double q = static_cast<double>(i) * step_;
            auto [p, dp] = psi_pair(q);
            values_[base + i] = 2.0 * (dp * phi + p * dphi);
            slopes_[base + i] = 2.0 * (2.0 * (0.25 * q * q - energy) * p * phi + 2.0 * dp * dphi);
            if (i + 1 == nodes_) break;
            const double h = step_;
            const double k1y = dphi, k1v = accel(q, phi);
            const double k2y = dphi + 0.5 * h * k1v, k2v = accel(q + 0.5 * h, phi + 0.5 * h * k1y);
            const double k3y = dphi + 0.5 * h * k2v, k3v = accel(q + 0.5 * h, phi + 0.5 * h * k2y);
            const double k4y = dphi + h * k3v, k4v = accel(q + h, phi + h * k3y);
            phi += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
            dphi += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        }
    }

    int n_max_;
    double q_max_;
    double step_;
    std::size_t nodes_ = 0;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

/// Shared table covering every supported order.
inline const PatternFunctions &default_pattern_functions() {
    static const PatternFunctions table(kMaxPatternOrder, 18.0);
    return table;
}

inline double pattern_diag(int n, double q) { return default_pattern_functions()(n, q); }

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

/// Photon-number distribution after a pure-loss channel of transmissivity
/// eta: p_out(n) = sum_{m>=n} C(m,n) eta^n (1-eta)^(m-n) p(m).
inline std::vector<double> binomial_loss(std::span<const double> p, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("loss transmissivity must lie in (0, 1]");
    const int size = static_cast<int>(p.size());
    std::vector<double> out(p.size(), 0.0);
    for (int m = 0; m < size; ++m) {
        if (p[static_cast<std::size_t>(m)] == 0.0) continue;
        for (int n = 0; n <= m; ++n) {
            const double t = binomial(m, n) * std::pow(eta, n) * std::pow(1.0 - eta, m - n);
            out[static_cast<std::size_t>(n)] += t * p[static_cast<std::size_t>(m)];
        }
    }
    return out;
}

/// Photon-number distribution after a quantum-limited phase-insensitive
/// amplifier of gain G >= 1: p_out(n) = sum_{m<=n} C(n,m) G^-(m+1)
/// (1-1/G)^(n-m) p(m). The output is truncated to `out_size` entries.
inline std::vector<double> amplifier_map(std::span<const double> p, double gain, std::size_t out_size) {
    if (!(gain >= 1.0)) throw DomainError("amplifier gain must be >= 1");
    std::vector<double> out(out_size, 0.0);
    const double x = 1.0 - 1.0 / gain;
    for (std::size_t m = 0; m < p.size(); ++m) {
        if (p[m] == 0.0) continue;
        const double lead = std::pow(gain, -static_cast<double>(m + 1));
        for (std::size_t n = m; n < out_size; ++n) {
            const double t = binomial(static_cast<int>(n), static_cast<int>(m)) * lead *
                             (n == m ? 1.0 : std::pow(x, static_cast<double>(n - m)));
            out[n] += t * p[m];
            if (x == 0.0) break;
        }
    }
    return out;
}

/// Amplitudes c_n of |n>_a |n>_b in a truncated two-mode state.
struct FockStateVectorTwoMode {
    std::vector<double> amplitudes;

    double norm_squared() const {
        double s = 0;
        for (double c : amplitudes) s += c * c;
        return s;
    }
    /// Probability missing from the truncated basis.
    double truncation_defect() const { return 1.0 - norm_squared(); }
};

/// Two-mode squeezed vacuum: c_n = (-tanh r)^n / cosh r, n = 0..n_max.
inline FockStateVectorTwoMode tmss_fock_state(double r, int n_max) {
    if (!(r >= 0.0) || n_max < 0) throw DomainError("need r >= 0 and n_max >= 0");
    FockStateVectorTwoMode s;
    s.amplitudes.resize(static_cast<std::size_t>(n_max) + 1);
    const double lam = -std::tanh(r);
    double c = 1.0 / std::cosh(r);
    for (auto &a : s.amplitudes) {
        a = c;
        c *= lam;
    }
    return s;
}

/// Probability of exactly n photons in each mode of the two-mode squeezed
/// vacuum, (1 - tanh^2 r) tanh^(2n) r.
inline double tmss_pair_probability(double r, int n) {
    const double l2 = std::tanh(r) * std::tanh(r);
    return (1.0 - l2) * std::pow(l2, n);
}

inline double tmss_mean_photon_number(double r) { return std::sinh(r) * std::sinh(r); }

}  // namespace eprtomo
