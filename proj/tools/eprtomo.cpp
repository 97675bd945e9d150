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

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eprtomo/eprtomo.hpp"

namespace {

using namespace eprtomo;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDegenerate = 4;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> threads;
    std::optional<std::string> format;
    std::optional<std::string> state;
    std::optional<double> r;
    std::optional<double> eta;
    std::string in;
    std::string out;
    bool dump_config = false;
};

void add_common(CLI::App &app, CommonOptions &o) {
    app.add_option("--config", o.config_path, "Configuration file");
    app.add_option("--seed", o.seed, "Master seed");
    app.add_option("--threads", o.threads, "Worker threads");
    app.add_option("--format", o.format, "Record file format (csv|bin)");
    app.add_option("--state", o.state, "State kind (squeezers|tmss|vacuum|single_squeezer)");
    app.add_option("--r", o.r, "Two-mode squeezing parameter");
    app.add_option("--eta", o.eta, "Efficiency used for the Fock-diagonal correction");
    app.add_option("--in", o.in, "Input file");
    app.add_option("--out", o.out, "Output file or prefix");
    app.add_flag("--dump-config", o.dump_config, "Print the effective configuration and exit");
}

RunConfig effective_config(const CommonOptions &o) {
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    if (o.seed) c.run.seed = *o.seed;
    if (o.threads) c.run.threads = *o.threads;
    if (o.format) set_config_value(c, "run", "format", *o.format);
    if (o.state) set_config_value(c, "state", "kind", *o.state);
    if (o.r) c.state.r = *o.r;
    if (o.eta) c.tomography.eta = *o.eta;
    if (!o.in.empty()) c.run.input = o.in;
    if (!o.out.empty()) c.run.output = o.out;
    c.validate();
    return c;
}

unsigned thread_count(const RunConfig &c) { return static_cast<unsigned>(c.run.threads); }

std::string require_input(const RunConfig &c) {
    if (c.run.input.empty()) throw ConfigError("run.input: no input file given (use --in)");
    return c.run.input;
}

std::string require_output(const RunConfig &c) {
    if (c.run.output.empty()) throw ConfigError("run.output: no output path given (use --out)");
    return c.run.output;
}

std::ofstream open_out(const std::string &path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    return os;
}

/// Per-setting running moments for the simulate summary.
struct SegmentSummary {
    double theta_a = 0, theta_b = 0;
    std::uint64_t n = 0;
    double sa = 0, saa = 0, sb = 0, sbb = 0;
};

int cmd_simulate(const RunConfig &c) {
    const std::string out = require_output(c);
    const GaussianTwoModeState state = c.build_state();
    RecordWriter writer(out, c.run.format);
    std::vector<SegmentSummary> summary;
    auto sink = [&](std::span<const QuadratureRecord> rs) {
        writer.write(rs);
        for (const auto &r : rs) {
            const bool fixed = c.scan.mode == ScanMode::settings;
            if (summary.empty() || !same_label(summary.back().theta_a, r.theta_a) ||
                (fixed && !same_label(summary.back().theta_b, r.theta_b)))
                summary.push_back({r.theta_a, fixed ? r.theta_b : 0.0});
            auto &s = summary.back();
            ++s.n;
            s.sa += r.q_a;
            s.saa += r.q_a * r.q_a;
            s.sb += r.q_b;
            s.sbb += r.q_b * r.q_b;
        }
    };
    if (c.scan.mode == ScanMode::settings) {
        simulate_run(state, criteria_schedule(c.scan.samples_per_setting), c.detector, c.run.seed, sink,
                     thread_count(c));
    } else {
        simulate_run(state, generate_scan(c.scan.plan), c.detector, c.run.seed, sink, thread_count(c));
    }
    writer.flush();

    std::cout << "records = " << writer.written() << "\noutput = " << out << "\n";
    std::cout << "segment,theta_a,theta_b,count,var_q_a,var_q_b\n";
    for (std::size_t k = 0; k < summary.size(); ++k) {
        const auto &s = summary[k];
        const double n = static_cast<double>(s.n);
        const double va = (s.saa - s.sa * s.sa / n) / (n - 1.0);
        const double vb = (s.sbb - s.sb * s.sb / n) / (n - 1.0);
        std::cout << k << ',' << text::format(s.theta_a, 6) << ','
                  << (c.scan.mode == ScanMode::settings ? text::format(s.theta_b, 6) : std::string("scanned")) << ','
                  << s.n << ',' << text::format(va, 6) << ',' << text::format(vb, 6) << '\n';
    }
    return kExitOk;
}

int cmd_criteria(const RunConfig &c, bool analytic) {
    CriteriaReport report;
    if (analytic) {
        report = analytic_report(c.build_state(), c.detector);
    } else {
        CriteriaEstimator est;
        for_each_record_batch(require_input(c), [&](std::span<const QuadratureRecord> rs) { est.add(rs); });
        report = est.report();
    }
    if (c.run.output.empty()) {
        write_report(std::cout, report);
    } else {
        auto os = open_out(c.run.output);
        write_report(os, report);
        write_report(std::cout, report);
    }
    return kExitOk;
}

double calibration_constant(const RunConfig &c) {
    if (c.conditioning.calibration == CalibrationMode::unit) return kDefaultCalibration;
    return measure_vacuum_calibration(c.detector, c.run.seed ^ 0xCA11B7A7E5EEDULL,
                                      static_cast<std::size_t>(c.conditioning.calibration_samples), thread_count(c));
}

int cmd_condition(const RunConfig &c, bool per_phase) {
    const std::string out = require_output(c);
    const double calibration = calibration_constant(c);
    SegmentedAccumulator acc(c.conditioning.binning, calibration);
    for_each_record_batch(require_input(c), [&](std::span<const QuadratureRecord> rs) { acc.add(rs); });
    const WeightedHistogram pooled = acc.pooled();

    // Fails with a degenerate-conditioning error before anything is written.
    const SampledDensity density = normalize(pooled, c.conditioning.significance);

    auto os = open_out(out);
    write_histogram(os, pooled, calibration);
    if (per_phase)
        for (const auto &s : acc.segments()) write_histogram(os, s, calibration);

    std::cout << "records = " << pooled.record_count() << "\nsegments = " << acc.segments().size()
              << "\ncalibration = " << text::format(calibration) << "\ntotal_weight = "
              << text::format(pooled.total_weight()) << "\nmean_weight = "
              << text::format(pooled.total_weight() / static_cast<double>(pooled.record_count()))
              << "\nout_of_range_fraction = " << text::format(pooled.out_of_range_fraction(), 6)
              << "\ndensity_at_0 = " << text::format(density.values[c.conditioning.binning.locate(0.0)], 6)
              << "\ndensity_at_1 = " << text::format(density.values[c.conditioning.binning.locate(1.0)], 6) << '\n';

    if (per_phase) {
        if (acc.segments().size() < 2)
            throw IncompleteDataError("--per-phase needs records at two or more theta_a values");
        auto rs = open_out(out + ".uniformity.txt");
        for (auto channel : {UniformityChannel::weighted, UniformityChannel::raw}) {
            const UniformityReport rep = uniformity_test(acc.segments(), channel);
            write_uniformity_report(rs, rep);
            write_uniformity_report(std::cout, rep);
        }
    }
    return kExitOk;
}

WeightedHistogram pooled_histogram(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "' for reading");
    const auto hs = read_histograms(is);
    if (hs.empty()) throw ParseError("no histogram in '" + path + "'", 0);
    for (const auto &h : hs)
        if (h.pooled()) return h;
    WeightedHistogram p(hs.front().binning());
    for (const auto &h : hs) p.merge(h);
    return p;
}

void write_plots(const std::string &prefix, const std::vector<SampledDensity> &segments, const SampledDensity &pooled,
                 const WignerGrid *w, const FockDiagonal *d, const FockDiagonal *corrected) {
    {
        auto os = open_out(prefix + ".density.svg");
        svg::histogram_overlay(os, segments, pooled, "Conditioned quadrature density");
    }
    if (w) {
        auto os = open_out(prefix + ".wigner.svg");
        svg::wigner_plot(os, *w, "Reconstructed Wigner function");
    }
    if (d) {
        auto os = open_out(prefix + ".fock.svg");
        svg::fock_bar_chart(os, *d, "Photon number distribution", corrected);
    }
}

int cmd_reconstruct(const RunConfig &c, bool plots) {
    const std::string prefix = require_output(c);
    const WeightedHistogram h = pooled_histogram(require_input(c));
    const SampledDensity density = normalize(h, c.conditioning.significance);
    const FockDiagonal diag = fock_diagonal(h, static_cast<int>(c.tomography.n_max), c.conditioning.significance);
    const WignerGrid w = inverse_radon(density, c.tomography.grid(), c.tomography.radon);

    std::optional<LossCorrection> corrected;
    std::optional<double> eta;
    if (c.tomography.eta > 0.0) {
        eta = c.tomography.eta;
        corrected = loss_correct(diag, *eta);
        for (const auto &msg : corrected->warnings) std::cerr << "warning: " << msg << '\n';
    }
    {
        auto os = open_out(prefix + ".fock.txt");
        write_fock_diagonal(os, diag, corrected, eta);
    }
    {
        auto os = open_out(prefix + ".wigner.csv");
        write_wigner_csv(os, w);
    }
    {
        auto os = open_out(prefix + ".wigner.txt");
        write_wigner_matrix(os, w);
    }
    write_fock_diagonal(std::cout, diag, corrected, eta);
    std::cout << "wigner_origin = " << text::format(w.sample(0.0, 0.0), 8)
              << "\nwigner_integral = " << text::format(w.integral(), 8) << '\n';
    if (plots)
        write_plots(prefix, {}, density, &w, &diag, corrected ? &corrected->corrected : nullptr);
    return kExitOk;
}

/// Two-mode squeezing parameter of the configured state, when it has one.
std::optional<double> squeezing_parameter(const RunConfig &c) {
    switch (c.state.kind) {
        case StateKind::tmss:
            return c.state.r;
        case StateKind::squeezers:
            return -0.5 * std::log(db_to_ratio(-c.state.squeeze_db));
        case StateKind::vacuum:
            return 0.0;
        case StateKind::single_squeezer:
            return std::nullopt;
    }
    return std::nullopt;
}

int cmd_oracle(const RunConfig &c) {
    write_report(std::cout, analytic_report(c.build_state(), c.detector));
    const auto r = squeezing_parameter(c);
    if (!r) {
        std::cout << "# no two-mode squeezing parameter for this state kind\n";
        return kExitOk;
    }
    std::cout << "# eprtomo oracle\n";
    text::KeyValueDocument d;
    d.set("r", *r);
    d.set("mean_photon_number", tmss_mean_photon_number(*r));
    d.set("pair_probability_11", tmss_pair_probability(*r, 1));
    d.write(std::cout);
    const FockDiagonal diag = oracle_conditioned_state(*r, c.detector.efficiency, c.detector.efficiency,
                                                       c.detector.dark_variance(), static_cast<int>(c.tomography.n_max));
    write_fock_diagonal(std::cout, diag);
    if (!c.run.output.empty()) {
        auto os = open_out(c.run.output);
        write_fock_diagonal(os, diag);
    }
    return kExitOk;
}

int cmd_plot(const RunConfig &c) {
    const std::string in = require_input(c);
    const std::string prefix = require_output(c);
    std::ifstream is(in);
    if (!is) throw Error("cannot open '" + in + "' for reading");
    std::string first;
    std::getline(is, first);
    is.seekg(0);
    const auto head = text::trim(first);
    if (head == kHistogramMarker) {
        const auto hs = read_histograms(is);
        std::vector<SampledDensity> segments;
        std::optional<SampledDensity> pooled;
        for (const auto &h : hs) {
            if (h.pooled() && !pooled) {
                pooled = normalize(h, c.conditioning.significance);
            } else {
                segments.push_back(normalize(h, c.conditioning.significance));
            }
        }
        if (!pooled) throw IncompleteDataError("histogram file has no pooled block");
        write_plots(prefix, segments, *pooled, nullptr, nullptr, nullptr);
    } else if (head == "# eprtomo fock diagonal") {
        const FockDiagonal d = read_fock_diagonal(is);
        auto os = open_out(prefix + ".fock.svg");
        svg::fock_bar_chart(os, d, "Photon number distribution");
    } else if (head == "# eprtomo wigner grid") {
        const WignerGrid w = read_wigner_matrix(is);
        auto os = open_out(prefix + ".wigner.svg");
        svg::wigner_plot(os, w, "Reconstructed Wigner function");
    } else {
        throw ParseError("unrecognized file type", 1);
    }
    return kExitOk;
}

int exit_code(const std::exception_ptr &e) {
    try {
        std::rethrow_exception(e);
    } catch (const ConfigError &) {
        return kExitConfig;
    } catch (const DegenerateConditioningError &) {
        return kExitDegenerate;
    } catch (const SignificanceError &) {
        return kExitDegenerate;
    } catch (const DegenerateInputError &) {
        return kExitDegenerate;
    } catch (...) {
        return kExitData;
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"eprtomo: entangled homodyne simulation, heralding and tomography"};
    app.require_subcommand(1);

    CommonOptions opts;
    bool analytic = false, per_phase = false, plots = false;
    auto *simulate = app.add_subcommand("simulate", "Simulate homodyne records");
    auto *criteria = app.add_subcommand("criteria", "Evaluate the entanglement criteria");
    auto *condition = app.add_subcommand("condition", "Accumulate weighted histograms");
    auto *reconstruct = app.add_subcommand("reconstruct", "Reconstruct Fock diagonal and Wigner function");
    auto *oracle = app.add_subcommand("oracle", "Exact predictions for the configured scenario");
    auto *plot = app.add_subcommand("plot", "Render a histogram, Fock or Wigner file as SVG");
    for (auto *sub : {simulate, criteria, condition, reconstruct, oracle, plot}) add_common(*sub, opts);
    criteria->add_flag("--analytic", analytic, "Use the configured covariance instead of records");
    condition->add_flag("--per-phase", per_phase, "Write per-theta_a histograms and the uniformity report");
    reconstruct->add_flag("--plots", plots, "Also write SVG plots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        const RunConfig cfg = effective_config(opts);
        if (opts.dump_config) {
            dump_config(std::cout, cfg);
            return kExitOk;
        }
        if (simulate->parsed()) return cmd_simulate(cfg);
        if (criteria->parsed()) return cmd_criteria(cfg, analytic);
        if (condition->parsed()) return cmd_condition(cfg, per_phase);
        if (reconstruct->parsed()) return cmd_reconstruct(cfg, plots);
        if (oracle->parsed()) return cmd_oracle(cfg);
        if (plot->parsed()) return cmd_plot(cfg);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(std::current_exception());
    }
    return kExitOk;
}
