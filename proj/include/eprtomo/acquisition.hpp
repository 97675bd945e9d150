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

// Measurement protocol and record files.
//
// The phase-scan protocol holds the analysis phase theta_a fixed for one
// histogram segment while the conditioning phase theta_b sweeps [0, 2*pi) an
// integer number of times, so every segment sees all theta_b equally often.
// The analog ramps of a real experiment are discretized into one setting per
// sample.
//
// Record files come in two layouts:
//   text:   header `index,theta_a,theta_b,q_a,q_b`, one comma-separated row
//           per record, floats with 9 significant digits.
//   binary: the 4 bytes `EPRT`, a version byte (1), then one little-endian
//           IEEE-754 binary64 quintuple (index, theta_a, theta_b, q_a, q_b)
//           per record.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "eprtomo/errors.hpp"
#include "eprtomo/gaussian.hpp"
#include "eprtomo/record.hpp"
#include "eprtomo/rng.hpp"
#include "eprtomo/text.hpp"

namespace eprtomo {

struct PhaseSetting {
    double theta_a = 0.0;
    double theta_b = 0.0;
};

/// Slow theta_a steps, fast uniform theta_b sweeps.
struct ScanPlan {
    std::size_t histogram_count = 36;
    std::size_t samples_per_histogram = 100000;
    std::size_t theta_b_scan_periods_per_histogram = 10;
    double theta_a_range = 4.0 * std::numbers::pi;
    double theta_b_range = 2.0 * std::numbers::pi;

    std::size_t samples_per_period() const { return samples_per_histogram / theta_b_scan_periods_per_histogram; }

    void validate() const {
        if (histogram_count == 0) throw DomainError("scan plan needs at least one histogram");
        if (samples_per_histogram == 0) throw DomainError("scan plan needs samples per histogram");
        if (theta_b_scan_periods_per_histogram == 0)
            throw DomainError("theta_b must be scanned at least once per histogram");
        if (samples_per_histogram % theta_b_scan_periods_per_histogram != 0)
            throw DomainError("samples_per_histogram must be an integer multiple of the samples per theta_b period");
        if (!(theta_a_range >= 0.0) || !std::isfinite(theta_a_range))
            throw DomainError("theta_a_range must be finite and nonnegative");
        if (std::abs(theta_b_range - 2.0 * std::numbers::pi) > 1e-12)
            throw DomainError("theta_b_range must be exactly 2*pi");
    }
};

/// Per-sample phase settings of a scan plan, computed on demand.
class ScanSchedule {
   public:
    explicit ScanSchedule(const ScanPlan &plan) : plan_(plan) {
        plan_.validate();
        period_ = plan_.samples_per_period();
    }

    std::size_t size() const { return plan_.histogram_count * plan_.samples_per_histogram; }
    std::size_t segment_count() const { return plan_.histogram_count; }
    std::size_t segment(std::size_t i) const { return i / plan_.samples_per_histogram; }

    double segment_theta_a(std::size_t seg) const {
        return plan_.theta_a_range * static_cast<double>(seg) / static_cast<double>(plan_.histogram_count);
    }

    PhaseSetting operator[](std::size_t i) const {
        const std::size_t j = i % plan_.samples_per_histogram;
        const double tb = plan_.theta_b_range * static_cast<double>(j % period_) / static_cast<double>(period_);
        return {segment_theta_a(segment(i)), tb};
    }

    const ScanPlan &plan() const { return plan_; }

   private:
    ScanPlan plan_;
    std::size_t period_ = 1;
};

inline ScanSchedule generate_scan(const ScanPlan &plan) { return ScanSchedule(plan); }

/// Blocks of samples at fixed phase settings, e.g. the X and P settings the
/// entanglement criteria need.
class SettingsSchedule {
   public:
    SettingsSchedule(std::vector<PhaseSetting> settings, std::size_t samples_per_setting)
        : settings_(std::move(settings)), per_(samples_per_setting) {
        if (settings_.empty() || per_ == 0) throw DomainError("settings schedule is empty");
    }

    std::size_t size() const { return settings_.size() * per_; }
    std::size_t segment_count() const { return settings_.size(); }
    std::size_t segment(std::size_t i) const { return i / per_; }
    PhaseSetting operator[](std::size_t i) const { return settings_[segment(i)]; }

   private:
    std::vector<PhaseSetting> settings_;
    std::size_t per_;
};

/// Both detectors on X, then both on P.
inline SettingsSchedule criteria_schedule(std::size_t samples_per_setting) {
    return SettingsSchedule({{0.0, 0.0}, {std::numbers::pi / 2, std::numbers::pi / 2}}, samples_per_setting);
}

using RecordSink = std::function<void(std::span<const QuadratureRecord>)>;

/// Draws one detected joint sample per scheduled setting and hands the
/// records to `sink` in index order, one chunk at a time. Memory use is
/// bounded by `threads` chunks; output is identical for every thread count.
template <typename Schedule>
void simulate_run(const GaussianTwoModeState &state, const Schedule &schedule, const DetectorModel &det,
                  std::uint64_t seed, const RecordSink &sink, unsigned threads = 1) {
    const JointSampler sampler(state, det);
    const std::size_t total = schedule.size();
    const std::size_t chunks = (total + kSampleChunk - 1) / kSampleChunk;
    threads = std::max(1u, threads);
    std::vector<std::vector<QuadratureRecord>> buffers(threads);
    for (std::size_t first = 0; first < chunks; first += threads) {
        const std::size_t group = std::min<std::size_t>(threads, chunks - first);
        parallel_for(group, threads, [&](std::size_t slot) {
            const std::size_t chunk = first + slot;
            Engine engine = chunk_engine(seed, chunk);
            std::normal_distribution<double> normal(0.0, 1.0);
            const std::size_t begin = chunk * kSampleChunk;
            const std::size_t end = std::min(total, begin + kSampleChunk);
            auto &buf = buffers[slot];
            buf.resize(end - begin);
            for (std::size_t i = begin; i < end; ++i) {
                const PhaseSetting ps = schedule[i];
                const QuadraturePair q = sampler(engine, normal, ps.theta_a, ps.theta_b);
                buf[i - begin] = {static_cast<std::uint64_t>(i), ps.theta_a, ps.theta_b, q.q_a, q.q_b};
            }
        });
        for (std::size_t slot = 0; slot < group; ++slot) sink(buffers[slot]);
    }
}

template <typename Schedule>
std::vector<QuadratureRecord> simulate_records(const GaussianTwoModeState &state, const Schedule &schedule,
                                               const DetectorModel &det, std::uint64_t seed, unsigned threads = 1) {
    std::vector<QuadratureRecord> out;
    out.reserve(schedule.size());
    simulate_run(state, schedule, det, seed,
                 [&](std::span<const QuadratureRecord> r) { out.insert(out.end(), r.begin(), r.end()); }, threads);
    return out;
}

enum class RecordFormat { text, binary };

inline constexpr char kRecordMagic[4] = {'E', 'P', 'R', 'T'};
inline constexpr std::uint8_t kRecordVersion = 1;
inline constexpr const char *kRecordHeader = "index,theta_a,theta_b,q_a,q_b";

namespace detail {

inline void put_le(std::ostream &os, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    char buf[8];
    for (int k = 0; k < 8; ++k) buf[k] = static_cast<char>((bits >> (8 * k)) & 0xFF);
    os.write(buf, 8);
}

inline double get_le(const unsigned char *buf) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
    return std::bit_cast<double>(bits);
}

inline bool finite_record(const QuadratureRecord &r) {
    return std::isfinite(r.theta_a) && std::isfinite(r.theta_b) && std::isfinite(r.q_a) && std::isfinite(r.q_b);
}

}  // namespace detail

/// Appends records to a stream in either layout, checking that indices
/// increase strictly and values are finite.
class RecordWriter {
   public:
    RecordWriter(std::ostream &os, RecordFormat format) : os_(&os), format_(format) { write_header(); }

    RecordWriter(const std::string &path, RecordFormat format)
        : file_(std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc)),
          os_(file_.get()),
          format_(format) {
        if (!*file_) throw Error("cannot open '" + path + "' for writing");
        write_header();
    }

    void write(const QuadratureRecord &r) {
        if (written_ > 0 && r.index <= last_index_) throw DomainError("record indices must increase strictly");
        if (!detail::finite_record(r)) throw DomainError("record " + std::to_string(r.index) + " is not finite");
        if (format_ == RecordFormat::text) {
            line_.clear();
            line_ += std::to_string(r.index);
            for (double v : {r.theta_a, r.theta_b, r.q_a, r.q_b}) {
                line_ += ',';
                line_ += text::format(v, 9);
            }
            line_ += '\n';
            os_->write(line_.data(), static_cast<std::streamsize>(line_.size()));
        } else {
            detail::put_le(*os_, static_cast<double>(r.index));
            for (double v : {r.theta_a, r.theta_b, r.q_a, r.q_b}) detail::put_le(*os_, v);
        }
        last_index_ = r.index;
        ++written_;
    }

    void write(std::span<const QuadratureRecord> rs) {
        for (const auto &r : rs) write(r);
    }

    void flush() {
        os_->flush();
        if (!*os_) throw Error("record stream write failed");
    }

    std::uint64_t written() const { return written_; }

   private:
    void write_header() {
        if (format_ == RecordFormat::text) {
            *os_ << kRecordHeader << '\n';
        } else {
            os_->write(kRecordMagic, 4);
            os_->put(static_cast<char>(kRecordVersion));
        }
    }

    std::unique_ptr<std::ofstream> file_;
    std::ostream *os_;
    RecordFormat format_;
    std::uint64_t last_index_ = 0;
    std::uint64_t written_ = 0;
    std::string line_;
};

/// Streaming reader; detects the layout from the first bytes.
class RecordReader {
   public:
    explicit RecordReader(const std::string &path)
        : file_(std::make_unique<std::ifstream>(path, std::ios::binary)), is_(file_.get()) {
        if (!*file_) throw Error("cannot open '" + path + "' for reading");
        read_header();
    }

    explicit RecordReader(std::istream &is) : is_(&is) { read_header(); }

    RecordFormat format() const { return format_; }

    /// Reads the next record; false at end of input.
    bool next(QuadratureRecord &r) {
        return format_ == RecordFormat::text ? next_text(r) : next_binary(r);
    }

    /// Reads up to `max` records into `out` (cleared first).
    std::size_t next_batch(std::vector<QuadratureRecord> &out, std::size_t max) {
        out.clear();
        QuadratureRecord r;
        while (out.size() < max && next(r)) out.push_back(r);
        return out.size();
    }

   private:
    void read_header() {
        char magic[5] = {};
        is_->read(magic, 4);
        if (is_->gcount() == 4 && std::memcmp(magic, kRecordMagic, 4) == 0) {
            format_ = RecordFormat::binary;
            const int version = is_->get();
            if (version != kRecordVersion)
                throw ParseError("unsupported binary record version " + std::to_string(version), 0);
            return;
        }
        format_ = RecordFormat::text;
        is_->clear();
        is_->seekg(0);
        std::string header;
        if (!std::getline(*is_, header)) throw ParseError("missing record header", 1);
        line_ = 1;
        if (text::trim(header) != kRecordHeader) throw ParseError("malformed record header '" + header + "'", 1);
    }

    bool next_text(QuadratureRecord &r) {
        std::string line;
        while (true) {
            if (!std::getline(*is_, line)) return false;
            ++line_;
            if (!text::trim(line).empty()) break;
        }
        const auto fields = text::split(text::trim(line), ',');
        if (fields.size() != 5) throw ParseError("expected 5 fields, found " + std::to_string(fields.size()), line_);
        const auto index = text::to_uint(fields[0]);
        if (!index) throw ParseError("bad index '" + std::string(fields[0]) + "'", line_);
        double vals[4];
        for (int k = 0; k < 4; ++k) {
            const auto v = text::to_double(fields[k + 1]);
            if (!v) throw ParseError("bad number '" + std::string(fields[k + 1]) + "'", line_);
            if (!std::isfinite(*v)) throw ParseError("non-finite value", line_);
            vals[k] = *v;
        }
        r = {*index, vals[0], vals[1], vals[2], vals[3]};
        check_index(r, line_);
        return true;
    }

    bool next_binary(QuadratureRecord &r) {
        unsigned char buf[40];
        is_->read(reinterpret_cast<char *>(buf), 40);
        const auto got = is_->gcount();
        if (got == 0) return false;
        ++line_;
        if (got != 40) throw ParseError("truncated binary record", line_);
        const double idx = detail::get_le(buf);
        if (!(idx >= 0.0) || idx != std::floor(idx) || idx > 9007199254740992.0)
            throw ParseError("bad binary record index", line_);
        r = {static_cast<std::uint64_t>(idx), detail::get_le(buf + 8), detail::get_le(buf + 16),
             detail::get_le(buf + 24), detail::get_le(buf + 32)};
        if (!detail::finite_record(r)) throw ParseError("non-finite value", line_);
        check_index(r, line_);
        return true;
    }

    void check_index(const QuadratureRecord &r, std::size_t line) {
        if (seen_ && r.index <= last_index_) throw ParseError("record index does not increase", line);
        seen_ = true;
        last_index_ = r.index;
    }

    std::unique_ptr<std::ifstream> file_;
    std::istream *is_;
    RecordFormat format_ = RecordFormat::text;
    std::size_t line_ = 0;
    bool seen_ = false;
    std::uint64_t last_index_ = 0;
};

inline void write_records(std::span<const QuadratureRecord> records, const std::string &path, RecordFormat format) {
    RecordWriter w(path, format);
    w.write(records);
    w.flush();
}

inline std::vector<QuadratureRecord> read_records(const std::string &path) {
    RecordReader reader(path);
    std::vector<QuadratureRecord> out;
    QuadratureRecord r;
    while (reader.next(r)) out.push_back(r);
    return out;
}

/// Streams a record file through `sink` in batches.
inline std::uint64_t for_each_record_batch(const std::string &path, const RecordSink &sink,
                                           std::size_t batch = kSampleChunk) {
    RecordReader reader(path);
    std::vector<QuadratureRecord> buf;
    std::uint64_t n = 0;
    while (reader.next_batch(buf, batch) > 0) {
        sink(buf);
        n += buf.size();
    }
    return n;
}

}  // namespace eprtomo
