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

// State reconstruction from phase-averaged quadrature densities: Fock
// diagonal by pattern functions, Wigner function by filtered
// backprojection, efficiency correction, and the exact prediction for the
// conditioned state.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "eprtomo/conditioning.hpp"
#include "eprtomo/errors.hpp"
#include "eprtomo/fock.hpp"
#include "eprtomo/text.hpp"

namespace eprtomo {

struct FockDiagonal {
    std::vector<double> probabilities;
    /// Empty when the diagonal is exact.
    std::vector<double> standard_errors;

    int n_max() const { return static_cast<int>(probabilities.size()) - 1; }
    double operator[](std::size_t n) const { return probabilities.at(n); }
    double sum() const {
        double s = 0;
        for (double p : probabilities) s += p;
        return s;
    }
};

/// rho_nn = int density(q) f_nn(q) dq by the midpoint rule on the density's
/// cells.
inline FockDiagonal fock_diagonal(const SampledDensity &density, int n_max,
                                  const PatternFunctions &patterns = default_pattern_functions()) {
    const double integral = density.integral();
    if (std::abs(integral - 1.0) > 1e-3)
        throw DomainError("density is not normalized (integral " + text::format(integral, 6) + ")");
    if (n_max < 0 || n_max > patterns.n_max()) throw DomainError("n_max outside the pattern table");
    FockDiagonal out;
    out.probabilities.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (std::size_t i = 0; i < density.values.size(); ++i) {
        const double q = density.center(i);
        const double w = density.values[i] * density.width;
        if (w == 0.0) continue;
        for (int n = 0; n <= n_max; ++n) out.probabilities[static_cast<std::size_t>(n)] += w * patterns(n, q);
    }
    return out;
}

/// Fock diagonal of a conditioned histogram with delta-method standard
/// errors from the per-bin sums of squared increments.
inline FockDiagonal fock_diagonal(const WeightedHistogram &h, int n_max, double significance = 5.0,
                                  const PatternFunctions &patterns = default_pattern_functions()) {
    FockDiagonal out = fock_diagonal(normalize(h, significance), n_max, patterns);
    const Binning &b = h.binning();
    const double total = h.total_weight();
    out.standard_errors.assign(out.probabilities.size(), 0.0);
    for (int n = 0; n <= n_max; ++n) {
        const double rho = out.probabilities[static_cast<std::size_t>(n)];
        double var = 0;
        for (std::size_t i = 0; i < b.bins; ++i) {
            const double d = patterns(n, b.center(i)) - rho;
            var += h.weight_sq_sums()[i] * d * d;
        }
        out.standard_errors[static_cast<std::size_t>(n)] = std::sqrt(var) / total;
    }
    return out;
}

/// Forward efficiency map applied to a diagonal.
inline FockDiagonal apply_binomial_loss(const FockDiagonal &d, double eta) {
    return {binomial_loss(d.probabilities, eta), {}};
}

struct LossCorrection {
    FockDiagonal corrected;
    std::vector<std::string> warnings;
};

/// Inverts the binomial loss map on the truncated upper-triangular system
/// by back-substitution from n_max down to 0.
inline LossCorrection loss_correct(const FockDiagonal &measured, double eta, double warn_below = -0.05) {
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("efficiency must lie in (0, 1]");
    const int n_max = measured.n_max();
    LossCorrection out;
    auto &p = out.corrected.probabilities;
    p.assign(measured.probabilities.size(), 0.0);
    for (int n = n_max; n >= 0; --n) {
        double rhs = measured.probabilities[static_cast<std::size_t>(n)];
        for (int m = n + 1; m <= n_max; ++m)
            rhs -= binomial(m, n) * std::pow(eta, n) * std::pow(1.0 - eta, m - n) * p[static_cast<std::size_t>(m)];
        p[static_cast<std::size_t>(n)] = rhs / std::pow(eta, n);
    }
    for (int n = 0; n <= n_max; ++n) {
        if (p[static_cast<std::size_t>(n)] < warn_below)
            out.warnings.push_back("corrected rho_" + std::to_string(n) + std::to_string(n) + " = " +
                                   text::format(p[static_cast<std::size_t>(n)], 4) + " is noise dominated");
    }
    return out;
}

/// Uniform axis with `points` nodes from lo to hi inclusive.
struct Axis {
    double lo = -6.0;
    double hi = 6.0;
    std::size_t points = 241;

    double step() const { return (hi - lo) / static_cast<double>(points - 1); }
    double at(std::size_t i) const { return lo + static_cast<double>(i) * step(); }
};

struct GridSpec {
    Axis x;
    Axis p;

    void validate() const {
        for (const Axis *a : {&x, &p}) {
            if (a->points < 2 || !(a->hi > a->lo)) throw DomainError("grid axis needs two nodes and a positive span");
            if (a->step() > 1.0 / 8.0 + 1e-12) throw DomainError("grid too coarse: fewer than 8 points per unit");
        }
    }
};

struct WignerGrid {
    Axis x_axis;
    Axis p_axis;
    /// Row-major, one row per p node.
    std::vector<double> values;

    double at(std::size_t ix, std::size_t ip) const { return values[ip * x_axis.points + ix]; }

    /// Bilinear interpolation inside the grid.
    double sample(double x, double p) const {
        auto locate = [](const Axis &a, double v, std::size_t &i, double &t) {
            const double u = std::clamp((v - a.lo) / a.step(), 0.0, static_cast<double>(a.points - 1));
            i = std::min(static_cast<std::size_t>(u), a.points - 2);
            t = u - static_cast<double>(i);
        };
        std::size_t ix, ip;
        double tx, tp;
        locate(x_axis, x, ix, tx);
        locate(p_axis, p, ip, tp);
        return (1 - tx) * (1 - tp) * at(ix, ip) + tx * (1 - tp) * at(ix + 1, ip) + (1 - tx) * tp * at(ix, ip + 1) +
               tx * tp * at(ix + 1, ip + 1);
    }

    /// Trapezoidal integral over the grid.
    double integral() const {
        double s = 0;
        for (std::size_t ip = 0; ip < p_axis.points; ++ip) {
            const double wp = (ip == 0 || ip + 1 == p_axis.points) ? 0.5 : 1.0;
            for (std::size_t ix = 0; ix < x_axis.points; ++ix) {
                const double wx = (ix == 0 || ix + 1 == x_axis.points) ? 0.5 : 1.0;
                s += wp * wx * at(ix, ip);
            }
        }
        return s * x_axis.step() * p_axis.step();
    }
};

/// Filter for the backprojection: ramp |k| cut off at `cutoff`, with a
/// raised-cosine taper over the last `taper_fraction` of the band.
struct RadonOptions {
    double cutoff = 4.0;
    double taper_fraction = 0.05;
    std::size_t angles = 180;
    std::size_t frequency_steps = 1024;
    double projection_step = 0.005;

    double window(double k) const {
        const double start = (1.0 - taper_fraction) * cutoff;
        if (k <= start) return 1.0;
        if (k >= cutoff) return 0.0;
        return 0.5 * (1.0 + std::cos(std::numbers::pi * (k - start) / (cutoff - start)));
    }
};

/// A quadrature density measured at local-oscillator phase theta.
struct PhaseDensity {
    double theta = 0.0;
    SampledDensity density;
};

namespace detail {

/// Filtered projection g(s) = 1/(2 pi^2) int_0^kc k A(k) Re[P(k) e^{iks}] dk
/// on a uniform s grid, with P the characteristic function of the density.
class FilteredProjection {
   public:
    FilteredProjection(const SampledDensity &d, const RadonOptions &opt, double s_max)
        : s_min_(-s_max), ds_(opt.projection_step) {
        const std::size_t nk = opt.frequency_steps + (opt.frequency_steps % 2);  // Simpson needs even
        const double dk = opt.cutoff / static_cast<double>(nk);
        std::vector<double> kk(nk + 1), re(nk + 1), im(nk + 1), wk(nk + 1);
        for (std::size_t j = 0; j <= nk; ++j) {
            const double k = static_cast<double>(j) * dk;
            double c = 0, s = 0;
            for (std::size_t i = 0; i < d.values.size(); ++i) {
                const double w = d.values[i] * d.width;
                if (w == 0.0) continue;
                c += w * std::cos(k * d.center(i));
                s += w * std::sin(k * d.center(i));
            }
            const double simpson = (j == 0 || j == nk) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
            kk[j] = k;
            re[j] = c;
            im[j] = s;
            wk[j] = simpson * dk / 3.0 * k * opt.window(k) / (2.0 * std::numbers::pi * std::numbers::pi);
        }
        const std::size_t ns = static_cast<std::size_t>(std::ceil(2.0 * s_max / ds_)) + 1;
        g_.assign(ns, 0.0);
        for (std::size_t m = 0; m < ns; ++m) {
            const double s = s_min_ + static_cast<double>(m) * ds_;
            double acc = 0;
            for (std::size_t j = 0; j <= nk; ++j) acc += wk[j] * (re[j] * std::cos(kk[j] * s) + im[j] * std::sin(kk[j] * s));
            g_[m] = acc;
        }
    }

    double operator()(double s) const {
        const double u = (s - s_min_) / ds_;
        if (u <= 0) return g_.front();
        const auto i = static_cast<std::size_t>(u);
        if (i + 1 >= g_.size()) return g_.back();
        const double t = u - static_cast<double>(i);
        return (1 - t) * g_[i] + t * g_[i + 1];
    }

   private:
    double s_min_;
    double ds_;
    std::vector<double> g_;
};

inline double grid_radius(const GridSpec &g) {
    const double x = std::max(std::abs(g.x.lo), std::abs(g.x.hi));
    const double p = std::max(std::abs(g.p.lo), std::abs(g.p.hi));
    return std::hypot(x, p) + 0.1;
}

inline WignerGrid backproject(const GridSpec &grid, std::span<const double> thetas,
                              std::span<const FilteredProjection *const> projections) {
    WignerGrid w{grid.x, grid.p, std::vector<double>(grid.x.points * grid.p.points, 0.0)};
    const double dtheta = std::numbers::pi / static_cast<double>(thetas.size());
    for (std::size_t ip = 0; ip < grid.p.points; ++ip) {
        const double p = grid.p.at(ip);
        for (std::size_t ix = 0; ix < grid.x.points; ++ix) {
            const double x = grid.x.at(ix);
            double acc = 0;
            for (std::size_t j = 0; j < thetas.size(); ++j)
                acc += (*projections[j])(x * std::cos(thetas[j]) + p * std::sin(thetas[j]));
            w.values[ip * grid.x.points + ix] = acc * dtheta;
        }
    }
    return w;
}

}  // namespace detail

/// Wigner function of a phase-symmetric state from its single pooled
/// quadrature density: every projection angle sees the same density.
inline WignerGrid inverse_radon(const SampledDensity &density, const GridSpec &grid, const RadonOptions &opt = {}) {
    grid.validate();
    if (opt.angles < 1 || !(opt.cutoff > 0.0)) throw DomainError("backprojection needs angles and a positive cutoff");
    const detail::FilteredProjection g(density, opt, detail::grid_radius(grid));
    std::vector<double> thetas(opt.angles);
    std::vector<const detail::FilteredProjection *> proj(opt.angles, &g);
    for (std::size_t j = 0; j < opt.angles; ++j)
        thetas[j] = std::numbers::pi * static_cast<double>(j) / static_cast<double>(opt.angles);
    return detail::backproject(grid, thetas, proj);
}

/// General filtered backprojection from densities at equally spaced phases
/// covering [0, pi).
inline WignerGrid inverse_radon(std::span<const PhaseDensity> densities, const GridSpec &grid,
                                const RadonOptions &opt = {}) {
    grid.validate();
    if (densities.size() < 12) throw DomainError("general backprojection needs densities at >= 12 phases");
    const double radius = detail::grid_radius(grid);
    std::vector<detail::FilteredProjection> gs;
    gs.reserve(densities.size());
    std::vector<double> thetas;
    for (const auto &pd : densities) {
        gs.emplace_back(pd.density, opt, radius);
        thetas.push_back(pd.theta);
    }
    std::vector<const detail::FilteredProjection *> proj;
    for (const auto &g : gs) proj.push_back(&g);
    return detail::backproject(grid, thetas, proj);
}

/// Exact ensemble limit of the heralding scheme for a two-mode squeezed
/// vacuum seen through detectors of efficiency eta_a, eta_b with dark-noise
/// variance v_dark on both arms, weighting with q_b^2 - calibration.
///
/// Mode b enters only through the weight's conditional mean,
/// 2 eta_b n + 1 + v_dark - calibration for |n>_b. Mode a then passes a loss
/// channel and the additive dark noise, which equals a loss of 1/G followed
/// by a quantum-limited amplifier of gain G = 1 + v_dark/2. The Fock basis is
/// enlarged until the two-mode state misses less than 1e-14 of its norm.
inline FockDiagonal oracle_conditioned_state(double r, double eta_a, double eta_b, double v_dark, int n_max,
                                             double calibration = kDefaultCalibration) {
    if (!(r >= 0.0)) throw DomainError("squeezing parameter must be >= 0");
    if (n_max < 0) throw DomainError("n_max must be >= 0");
    if (!(eta_b > 0.0 && eta_b <= 1.0)) throw DomainError("efficiency must lie in (0, 1]");
    if (!(v_dark >= 0.0)) throw DomainError("dark noise variance must be >= 0");
    const double l2 = std::tanh(r) * std::tanh(r);
    int basis = n_max;
    while (std::pow(l2, basis + 1) > 1e-14) {
        if (++basis > 4000) throw TruncationError("two-mode state needs more than 4000 Fock levels");
    }
    const FockStateVectorTwoMode state = tmss_fock_state(r, basis);
    if (state.truncation_defect() > 1e-8) throw TruncationError("truncation audit failed");

    std::vector<double> weighted(state.amplitudes.size());
    for (std::size_t n = 0; n < weighted.size(); ++n) {
        const double c2 = state.amplitudes[n] * state.amplitudes[n];
        weighted[n] = c2 * (2.0 * eta_b * static_cast<double>(n) + kVacuumVariance + v_dark - calibration);
    }
    double total = 0;
    for (double w : weighted) total += w;
    if (!(total > 0.0)) throw DegenerateConditioningError("conditioning weight vanishes for this state");
    for (double &w : weighted) w /= total;

    const double gain = 1.0 + 0.5 * v_dark;
    std::vector<double> out = binomial_loss(weighted, eta_a / gain);
    if (gain > 1.0) out = amplifier_map(out, gain, out.size() + 40);
    out.resize(static_cast<std::size_t>(n_max) + 1, 0.0);
    return {out, {}};
}

inline void write_fock_diagonal(std::ostream &os, const FockDiagonal &d,
                                const std::optional<LossCorrection> &corrected = std::nullopt,
                                std::optional<double> eta = std::nullopt) {
    os << "# eprtomo fock diagonal\n";
    text::KeyValueDocument meta;
    meta.set_count("n_max", static_cast<std::uint64_t>(d.n_max()));
    meta.set("sum", d.sum());
    if (eta) meta.set("eta", *eta);
    if (corrected) {
        meta.set("corrected_sum", corrected->corrected.sum());
        for (std::size_t k = 0; k < corrected->warnings.size(); ++k)
            meta.set("warning_" + std::to_string(k), corrected->warnings[k]);
    }
    meta.write(os);
    os << "n,probability,standard_error" << (corrected ? ",corrected_probability" : "") << '\n';
    for (std::size_t n = 0; n < d.probabilities.size(); ++n) {
        os << n << ',' << text::format(d.probabilities[n]) << ','
           << text::format(d.standard_errors.empty() ? 0.0 : d.standard_errors[n]);
        if (corrected) os << ',' << text::format(corrected->corrected.probabilities[n]);
        os << '\n';
    }
}

/// Reads the `probability` (and `standard_error`) columns back.
inline FockDiagonal read_fock_diagonal(std::istream &is) {
    FockDiagonal d;
    std::string line;
    std::size_t lineno = 0;
    bool in_rows = false;
    while (std::getline(is, line)) {
        ++lineno;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (!in_rows) {
            if (t.rfind("n,probability", 0) == 0) in_rows = true;
            continue;
        }
        const auto f = text::split(t, ',');
        if (f.size() < 3) throw ParseError("expected n,probability,standard_error", lineno);
        const auto p = text::to_double(f[1]);
        const auto se = text::to_double(f[2]);
        if (!p || !se) throw ParseError("bad Fock diagonal row", lineno);
        d.probabilities.push_back(*p);
        d.standard_errors.push_back(*se);
    }
    if (d.probabilities.empty()) throw ParseError("no Fock diagonal rows", lineno);
    return d;
}

inline void write_wigner_csv(std::ostream &os, const WignerGrid &w) {
    os << "x,p,value\n";
    for (std::size_t ip = 0; ip < w.p_axis.points; ++ip)
        for (std::size_t ix = 0; ix < w.x_axis.points; ++ix)
            os << text::format(w.x_axis.at(ix)) << ',' << text::format(w.p_axis.at(ip)) << ','
               << text::format(w.at(ix, ip)) << '\n';
}

/// Axis metadata followed by one whitespace-separated row of values per p
/// node.
inline void write_wigner_matrix(std::ostream &os, const WignerGrid &w) {
    os << "# eprtomo wigner grid\n";
    text::KeyValueDocument meta;
    meta.set("x_min", w.x_axis.lo);
    meta.set("x_max", w.x_axis.hi);
    meta.set_count("x_points", w.x_axis.points);
    meta.set("p_min", w.p_axis.lo);
    meta.set("p_max", w.p_axis.hi);
    meta.set_count("p_points", w.p_axis.points);
    meta.write(os);
    os << "values\n";
    for (std::size_t ip = 0; ip < w.p_axis.points; ++ip) {
        for (std::size_t ix = 0; ix < w.x_axis.points; ++ix) os << (ix ? " " : "") << text::format(w.at(ix, ip));
        os << '\n';
    }
}

inline WignerGrid read_wigner_matrix(std::istream &is) {
    std::string line;
    std::size_t lineno = 0;
    text::KeyValueDocument meta;
    while (std::getline(is, line)) {
        ++lineno;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (t == "values") break;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", lineno);
        meta.set(std::string(text::trim(t.substr(0, eq))), std::string(text::trim(t.substr(eq + 1))));
    }
    WignerGrid w;
    w.x_axis = {meta.get_double("x_min"), meta.get_double("x_max"), meta.get_count("x_points")};
    w.p_axis = {meta.get_double("p_min"), meta.get_double("p_max"), meta.get_count("p_points")};
    w.values.reserve(w.x_axis.points * w.p_axis.points);
    for (std::size_t ip = 0; ip < w.p_axis.points; ++ip) {
        if (!std::getline(is, line)) throw ParseError("missing Wigner rows", lineno);
        ++lineno;
        std::size_t cols = 0;
        for (auto tok : text::split(text::trim(line), ' ')) {
            if (tok.empty()) continue;
            const auto v = text::to_double(tok);
            if (!v) throw ParseError("bad Wigner value", lineno);
            w.values.push_back(*v);
            ++cols;
        }
        if (cols != w.x_axis.points) throw ParseError("Wigner row has the wrong length", lineno);
    }
    return w;
}

}  // namespace eprtomo
