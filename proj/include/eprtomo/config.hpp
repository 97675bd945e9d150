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

// Run configuration: a flat `[section]` / `key = value` text format.
//
//   [state]         kind, squeeze_db, antisqueeze_db, r, relative_phase
//   [detector]      efficiency, dark_clearance_db, phase_jitter_rad
//   [scan]          mode, histogram_count, samples_per_histogram,
//                   theta_b_periods, theta_a_range, samples_per_setting
//   [conditioning]  bins, q_min, q_max, calibration, calibration_samples,
//                   significance
//   [tomography]    grid_min, grid_max, grid_points, cutoff, taper, angles,
//                   n_max, eta
//   [run]           seed, threads, format, input, output
//
// Unknown sections and keys are errors. `dump_config` writes every field,
// doubles with 17 significant digits, so its output parses back to the
// identical configuration.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "eprtomo/acquisition.hpp"
#include "eprtomo/conditioning.hpp"
#include "eprtomo/errors.hpp"
#include "eprtomo/gaussian.hpp"
#include "eprtomo/text.hpp"
#include "eprtomo/tomography.hpp"

namespace eprtomo {

enum class StateKind { squeezers, tmss, vacuum, single_squeezer };
enum class ScanMode { phase_scan, settings };
enum class CalibrationMode { unit, measured };

struct StateConfig {
    StateKind kind = StateKind::squeezers;
    double squeeze_db = 6.0;
    double antisqueeze_db = 8.5;
    double r = 0.0921;
    double relative_phase = std::numbers::pi / 2.0;
};

struct ScanConfig {
    ScanMode mode = ScanMode::settings;
    ScanPlan plan;
    std::uint64_t samples_per_setting = 1000000;
};

struct ConditioningConfig {
    Binning binning;
    CalibrationMode calibration = CalibrationMode::unit;
    std::uint64_t calibration_samples = 1000000;
    double significance = 5.0;
};

struct TomographyConfig {
    double grid_min = -6.0;
    double grid_max = 6.0;
    std::uint64_t grid_points = 241;
    RadonOptions radon;
    std::uint64_t n_max = 10;
    /// 0 disables the efficiency correction.
    double eta = 0.0;

    GridSpec grid() const {
        const Axis a{grid_min, grid_max, static_cast<std::size_t>(grid_points)};
        return {a, a};
    }
};

struct RunSection {
    std::uint64_t seed = 1;
    std::uint64_t threads = 1;
    RecordFormat format = RecordFormat::text;
    std::string input;
    std::string output;
};

struct RunConfig {
    StateConfig state;
    DetectorModel detector{0.95, 20.0, 0.0};
    ScanConfig scan;
    ConditioningConfig conditioning;
    TomographyConfig tomography;
    RunSection run;

    GaussianTwoModeState build_state() const {
        switch (state.kind) {
            case StateKind::squeezers:
                return entangled_pair({state.squeeze_db, state.antisqueeze_db}, state.relative_phase);
            case StateKind::tmss:
                return tmss_covariance(state.r);
            case StateKind::vacuum:
                return GaussianTwoModeState::vacuum();
            case StateKind::single_squeezer: {
                const SingleModeState s = single_mode_squeezed({state.squeeze_db, state.antisqueeze_db});
                Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
                cov.block<2, 2>(0, 0) = s.cov;
                return GaussianTwoModeState(cov);
            }
        }
        throw ConfigError("state.kind: unhandled state kind");
    }

    /// Field-level checks beyond what parsing enforces.
    void validate() const;
};

namespace config_detail {

struct Field {
    const char *section;
    const char *key;
    std::function<std::string(const RunConfig &)> get;
    std::function<void(RunConfig &, const std::string &)> set;
};

inline double parse_double(const std::string &name, const std::string &v) {
    const auto d = text::to_double(v);
    if (!d) throw ConfigError(name + ": expected a number, got '" + v + "'");
    return *d;
}

inline std::uint64_t parse_count(const std::string &name, const std::string &v) {
    const auto d = text::to_uint(v);
    if (!d) throw ConfigError(name + ": expected a nonnegative integer, got '" + v + "'");
    return *d;
}

template <typename E>
struct EnumNames {
    std::vector<std::pair<E, const char *>> names;

    std::string to_string(E e) const {
        for (const auto &[v, n] : names)
            if (v == e) return n;
        return "?";
    }
    E parse(const std::string &field, const std::string &v) const {
        std::string allowed;
        for (const auto &[e, n] : names) {
            if (v == n) return e;
            allowed += (allowed.empty() ? "" : "|") + std::string(n);
        }
        throw ConfigError(field + ": expected one of " + allowed + ", got '" + v + "'");
    }
};

inline const EnumNames<StateKind> kStateKinds{{{StateKind::squeezers, "squeezers"},
                                               {StateKind::tmss, "tmss"},
                                               {StateKind::vacuum, "vacuum"},
                                               {StateKind::single_squeezer, "single_squeezer"}}};
inline const EnumNames<ScanMode> kScanModes{{{ScanMode::phase_scan, "phase_scan"}, {ScanMode::settings, "settings"}}};
inline const EnumNames<CalibrationMode> kCalibrationModes{
    {{CalibrationMode::unit, "unit"}, {CalibrationMode::measured, "measured"}}};
inline const EnumNames<RecordFormat> kFormats{{{RecordFormat::text, "csv"}, {RecordFormat::binary, "bin"}}};

#define EPRTOMO_DOUBLE_FIELD(sec, name, member)                                                   \
    Field {                                                                                       \
        sec, name, [](const RunConfig &c) { return text::format(c.member); },                     \
            [](RunConfig &c, const std::string &v) { c.member = parse_double(sec "." name, v); } \
    }
#define EPRTOMO_COUNT_FIELD(sec, name, member)                                                                    \
    Field {                                                                                                       \
        sec, name, [](const RunConfig &c) { return std::to_string(c.member); },                                   \
            [](RunConfig &c, const std::string &v) {                                                              \
                c.member = static_cast<decltype(c.member)>(parse_count(sec "." name, v));                         \
            }                                                                                                     \
    }
#define EPRTOMO_ENUM_FIELD(sec, name, member, table)                                                  \
    Field {                                                                                           \
        sec, name, [](const RunConfig &c) { return table.to_string(c.member); },                      \
            [](RunConfig &c, const std::string &v) { c.member = table.parse(sec "." name, v); }       \
    }
#define EPRTOMO_STRING_FIELD(sec, name, member)                                   \
    Field {                                                                       \
        sec, name, [](const RunConfig &c) { return c.member; },                   \
            [](RunConfig &c, const std::string &v) { c.member = v; }              \
    }

inline const std::vector<Field> &fields() {
    static const std::vector<Field> table{
        EPRTOMO_ENUM_FIELD("state", "kind", state.kind, kStateKinds),
        EPRTOMO_DOUBLE_FIELD("state", "squeeze_db", state.squeeze_db),
        EPRTOMO_DOUBLE_FIELD("state", "antisqueeze_db", state.antisqueeze_db),
        EPRTOMO_DOUBLE_FIELD("state", "r", state.r),
        EPRTOMO_DOUBLE_FIELD("state", "relative_phase", state.relative_phase),
        EPRTOMO_DOUBLE_FIELD("detector", "efficiency", detector.efficiency),
        EPRTOMO_DOUBLE_FIELD("detector", "dark_clearance_db", detector.dark_clearance_db),
        EPRTOMO_DOUBLE_FIELD("detector", "phase_jitter_rad", detector.phase_jitter_rad),
        EPRTOMO_ENUM_FIELD("scan", "mode", scan.mode, kScanModes),
        EPRTOMO_COUNT_FIELD("scan", "histogram_count", scan.plan.histogram_count),
        EPRTOMO_COUNT_FIELD("scan", "samples_per_histogram", scan.plan.samples_per_histogram),
        EPRTOMO_COUNT_FIELD("scan", "theta_b_periods", scan.plan.theta_b_scan_periods_per_histogram),
        EPRTOMO_DOUBLE_FIELD("scan", "theta_a_range", scan.plan.theta_a_range),
        EPRTOMO_COUNT_FIELD("scan", "samples_per_setting", scan.samples_per_setting),
        EPRTOMO_COUNT_FIELD("conditioning", "bins", conditioning.binning.bins),
        EPRTOMO_DOUBLE_FIELD("conditioning", "q_min", conditioning.binning.q_min),
        EPRTOMO_DOUBLE_FIELD("conditioning", "q_max", conditioning.binning.q_max),
        EPRTOMO_ENUM_FIELD("conditioning", "calibration", conditioning.calibration, kCalibrationModes),
        EPRTOMO_COUNT_FIELD("conditioning", "calibration_samples", conditioning.calibration_samples),
        EPRTOMO_DOUBLE_FIELD("conditioning", "significance", conditioning.significance),
        EPRTOMO_DOUBLE_FIELD("tomography", "grid_min", tomography.grid_min),
        EPRTOMO_DOUBLE_FIELD("tomography", "grid_max", tomography.grid_max),
        EPRTOMO_COUNT_FIELD("tomography", "grid_points", tomography.grid_points),
        EPRTOMO_DOUBLE_FIELD("tomography", "cutoff", tomography.radon.cutoff),
        EPRTOMO_DOUBLE_FIELD("tomography", "taper", tomography.radon.taper_fraction),
        EPRTOMO_COUNT_FIELD("tomography", "angles", tomography.radon.angles),
        EPRTOMO_COUNT_FIELD("tomography", "n_max", tomography.n_max),
        EPRTOMO_DOUBLE_FIELD("tomography", "eta", tomography.eta),
        EPRTOMO_COUNT_FIELD("run", "seed", run.seed),
        EPRTOMO_COUNT_FIELD("run", "threads", run.threads),
        EPRTOMO_ENUM_FIELD("run", "format", run.format, kFormats),
        EPRTOMO_STRING_FIELD("run", "input", run.input),
        EPRTOMO_STRING_FIELD("run", "output", run.output),
    };
    return table;
}

#undef EPRTOMO_DOUBLE_FIELD
#undef EPRTOMO_COUNT_FIELD
#undef EPRTOMO_ENUM_FIELD
#undef EPRTOMO_STRING_FIELD

}  // namespace config_detail

inline void RunConfig::validate() const {
    auto fail = [](const std::string &m) { throw ConfigError(m); };
    auto wrap = [](const char *prefix, auto &&check) {
        try {
            check();
        } catch (const ConfigError &) {
            throw;
        } catch (const Error &e) {
            throw ConfigError(std::string(prefix) + ": " + e.what());
        }
    };
    if (!(state.squeeze_db >= 0.0)) fail("state.squeeze_db: must be >= 0");
    if (!(state.antisqueeze_db >= 0.0)) fail("state.antisqueeze_db: must be >= 0");
    if (!(state.r >= 0.0) || !std::isfinite(state.r)) fail("state.r: must be finite and >= 0");
    if (!std::isfinite(state.relative_phase)) fail("state.relative_phase: must be finite");
    wrap("state", [&] { (void)build_state(); });
    if (!(detector.efficiency > 0.0 && detector.efficiency <= 1.0)) fail("detector.efficiency: must lie in (0, 1]");
    if (std::isnan(detector.dark_clearance_db)) fail("detector.dark_clearance_db: must be a number");
    if (!(detector.phase_jitter_rad >= 0.0) || !std::isfinite(detector.phase_jitter_rad))
        fail("detector.phase_jitter_rad: must be finite and >= 0");
    wrap("scan", [&] { scan.plan.validate(); });
    if (scan.samples_per_setting == 0) fail("scan.samples_per_setting: must be >= 1");
    wrap("conditioning", [&] { conditioning.binning.validate(); });
    if (conditioning.calibration_samples == 0) fail("conditioning.calibration_samples: must be >= 1");
    if (!(conditioning.significance >= 0.0)) fail("conditioning.significance: must be >= 0");
    wrap("tomography", [&] { tomography.grid().validate(); });
    if (!(tomography.radon.cutoff > 0.0)) fail("tomography.cutoff: must be > 0");
    if (!(tomography.radon.taper_fraction >= 0.0 && tomography.radon.taper_fraction <= 1.0))
        fail("tomography.taper: must lie in [0, 1]");
    if (tomography.radon.angles == 0) fail("tomography.angles: must be >= 1");
    if (tomography.n_max > static_cast<std::uint64_t>(kMaxPatternOrder))
        fail("tomography.n_max: must be <= " + std::to_string(kMaxPatternOrder));
    if (!(tomography.eta >= 0.0 && tomography.eta <= 1.0)) fail("tomography.eta: must lie in [0, 1] (0 = off)");
    if (run.threads == 0 || run.threads > 1024) fail("run.threads: must lie in [1, 1024]");
}

/// Sets `section.key` from its text form.
inline void set_config_value(RunConfig &c, const std::string &section, const std::string &key,
                             const std::string &value) {
    for (const auto &f : config_detail::fields()) {
        if (section == f.section && key == f.key) {
            f.set(c, value);
            return;
        }
    }
    throw ConfigError("unknown configuration key '" + section + "." + key + "'");
}

/// Parses a configuration on top of the defaults. Errors name the line.
inline RunConfig parse_config(std::istream &is) {
    RunConfig c;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#' || t.front() == ';') continue;
        try {
            if (t.front() == '[') {
                if (t.back() != ']') throw ConfigError("malformed section header");
                section = std::string(text::trim(t.substr(1, t.size() - 2)));
                bool known = false;
                for (const auto &f : config_detail::fields()) known = known || section == f.section;
                if (!known) throw ConfigError("unknown section '" + section + "'");
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'");
            if (section.empty()) throw ConfigError("key outside any section");
            set_config_value(c, section, std::string(text::trim(t.substr(0, eq))),
                             std::string(text::trim(t.substr(eq + 1))));
        } catch (const ConfigError &e) {
            throw ConfigError(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
        }
    }
    return c;
}

inline RunConfig parse_config(const std::string &text) {
    std::istringstream is(text);
    return parse_config(is);
}

inline RunConfig load_config(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open configuration '" + path + "'");
    try {
        return parse_config(is);
    } catch (const ConfigError &e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline void dump_config(std::ostream &os, const RunConfig &c) {
    std::string section;
    for (const auto &f : config_detail::fields()) {
        if (section != f.section) {
            if (!section.empty()) os << '\n';
            section = f.section;
            os << '[' << section << "]\n";
        }
        os << f.key << " = " << f.get(c) << '\n';
    }
}

inline std::string dump_config(const RunConfig &c) {
    std::ostringstream os;
    dump_config(os, c);
    return os.str();
}

}  // namespace eprtomo
