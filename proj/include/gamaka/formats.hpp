// Copyright 2026 The Gamaka Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON and CSV encodings of contours, segmentations, plans and reports.
// Layouts are documented in docs/formats.md.

#ifndef GAMAKA_FORMATS_HPP
#define GAMAKA_FORMATS_HPP

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <gamaka/analysis.hpp>
#include <gamaka/error.hpp>
#include <gamaka/pitch_tracking.hpp>
#include <gamaka/segmentation.hpp>
#include <gamaka/timescale.hpp>

namespace gamaka
{

inline constexpr int schema_version = 1;

inline nlohmann::json to_json(const Segmentation &seg)
{
    const double s = seg.frame_ms / 1000.0;
    auto arr = nlohmann::json::array();
    for (const auto &x : seg.segments) {
        nlohmann::json j = {{"kind", std::string(to_string(x.kind))},
                            {"start_frame", x.start},
                            {"end_frame", x.end},
                            {"start_s", static_cast<double>(x.start) * s},
                            {"end_s", static_cast<double>(x.end + 1) * s}};
        if (x.mean_semitone) {
            j["mean_semitone"] = *x.mean_semitone;
        }
        arr.push_back(std::move(j));
    }
    return {{"schema_version", schema_version}, {"frame_ms", seg.frame_ms}, {"n_frames", seg.n_frames},
            {"segments", std::move(arr)}};
}

inline Segmentation segmentation_from_json(const nlohmann::json &j)
{
    try {
        if (j.at("schema_version").get<int>() != schema_version) {
            throw InvalidArgument("unsupported segmentation schema version");
        }
        Segmentation seg;
        seg.frame_ms = j.at("frame_ms").get<double>();
        seg.n_frames = j.at("n_frames").get<std::size_t>();
        for (const auto &x : j.at("segments")) {
            Segment s;
            s.kind = segment_kind_from_string(x.at("kind").get<std::string>());
            s.start = x.at("start_frame").get<std::size_t>();
            s.end = x.at("end_frame").get<std::size_t>();
            if (x.contains("mean_semitone")) {
                s.mean_semitone = x.at("mean_semitone").get<double>();
            }
            seg.segments.push_back(s);
        }
        validate(seg);
        return seg;
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(std::string("malformed segmentation JSON: ") + e.what());
    }
}

inline nlohmann::json to_json(const ScalePlan &plan)
{
    auto arr = nlohmann::json::array();
    for (const auto &e : plan.entries) {
        nlohmann::json j = {{"kind", std::string(to_string(e.kind))},
                            {"in_start", e.in_start},
                            {"in_end", e.in_end},
                            {"out_start", e.out_start},
                            {"out_end", e.out_end}};
        if (e.kind == SegmentKind::cp_note) {
            j["attack_frames"] = e.attack_frames;
            j["decay_frames"] = e.decay_frames;
        }
        arr.push_back(std::move(j));
    }
    return {{"schema_version", schema_version}, {"R", plan.factor},          {"R_effective", effective_factor(plan)},
            {"frame_ms", plan.frame_ms},        {"in_n_frames", plan.in_n_frames}, {"out_n_frames", plan.out_n_frames},
            {"entries", std::move(arr)}};
}

inline ScalePlan plan_from_json(const nlohmann::json &j)
{
    try {
        if (j.at("schema_version").get<int>() != schema_version) {
            throw InvalidArgument("unsupported plan schema version");
        }
        ScalePlan p;
        p.factor = j.at("R").get<double>();
        p.frame_ms = j.at("frame_ms").get<double>();
        p.in_n_frames = j.at("in_n_frames").get<std::size_t>();
        p.out_n_frames = j.at("out_n_frames").get<std::size_t>();
        for (const auto &x : j.at("entries")) {
            PlanEntry e;
            e.kind = segment_kind_from_string(x.at("kind").get<std::string>());
            e.in_start = x.at("in_start").get<std::size_t>();
            e.in_end = x.at("in_end").get<std::size_t>();
            e.out_start = x.at("out_start").get<std::size_t>();
            e.out_end = x.at("out_end").get<std::size_t>();
            e.attack_frames = x.value("attack_frames", std::size_t{0});
            e.decay_frames = x.value("decay_frames", std::size_t{0});
            p.entries.push_back(e);
        }
        return p;
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(std::string("malformed plan JSON: ") + e.what());
    }
}

namespace detail
{

inline std::string fmt_number(double v, int precision = 6)
{
    if (std::isnan(v)) {
        return "";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

} // namespace detail

/// frame_index,time_s,f_hz,semitones; unvoiced frames leave semitones empty.
inline void write_contour_csv(std::ostream &os, const PitchContour &pc, const SemitoneContour &sc)
{
    if (pc.size() != sc.size()) {
        throw InvalidArgument("pitch and semitone contours differ in length");
    }
    os << "frame_index,time_s,f_hz,semitones\n";
    for (std::size_t l = 0; l < pc.size(); ++l) {
        os << l << ',' << detail::fmt_number(static_cast<double>(l) * pc.frame_ms / 1000.0) << ','
           << detail::fmt_number(pc.f[l], 4) << ',' << (sc.n[l] ? detail::fmt_number(*sc.n[l]) : std::string()) << '\n';
    }
}

inline const char *ratio_csv_header =
    "label,cp_s,transient_s,silence_s,overall_s,cp2_s,transient2_s,silence2_s,overall2_s,"
    "ratio_cp,ratio_transient,ratio_silence,ratio_overall\n";

inline void write_ratio_row(std::ostream &os, const std::string &label, const RatioReport &r)
{
    using detail::fmt_number;
    os << label << ',' << fmt_number(r.speed1.cp_notes, 3) << ',' << fmt_number(r.speed1.transients, 3) << ','
       << fmt_number(r.speed1.silence, 3) << ',' << fmt_number(r.speed1.overall(), 3) << ','
       << fmt_number(r.speed2.cp_notes, 3) << ',' << fmt_number(r.speed2.transients, 3) << ','
       << fmt_number(r.speed2.silence, 3) << ',' << fmt_number(r.speed2.overall(), 3) << ',' << fmt_number(r.cp_notes, 4)
       << ',' << fmt_number(r.transients, 4) << ',' << fmt_number(r.silence, 4) << ',' << fmt_number(r.overall, 4)
       << '\n';
}

inline void write_ratio_csv(std::ostream &os, const std::string &label, const RatioReport &r)
{
    os << ratio_csv_header;
    write_ratio_row(os, label, r);
}

struct SweepRow {
    double window_ms = 0.0;
    double rho_lower = 1.0;
    double measured_spread = 1.0;
    double sweep_ratio = 1.0;
};

inline void write_sweep_csv(std::ostream &os, const std::vector<SweepRow> &rows)
{
    os << "W_ms,rho_L,measured_spread,sweep_ratio\n";
    for (const auto &r : rows) {
        os << detail::fmt_number(r.window_ms, 3) << ',' << detail::fmt_number(r.rho_lower) << ','
           << detail::fmt_number(r.measured_spread) << ',' << detail::fmt_number(r.sweep_ratio) << '\n';
    }
}

/// One row of the two-speed duration table shipped in data/table3.csv.
struct TwoSpeedRow {
    std::string raga;
    int varnams = 0;
    ClassDurations speed1;
    double ratio_cp = 0.0;
    double ratio_transient = 0.0;
    double ratio_silence = 0.0;
    double ratio_overall = 0.0;

    /// Speed-2 class durations implied by dividing by the listed ratios.
    [[nodiscard]] ClassDurations implied_speed2() const noexcept
    {
        return {speed1.cp_notes / ratio_cp, speed1.transients / ratio_transient, speed1.silence / ratio_silence};
    }
};

inline std::vector<TwoSpeedRow> read_two_speed_csv(std::istream &is)
{
    std::vector<TwoSpeedRow> rows;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 10) {
            throw InvalidArgument("two-speed table row has " + std::to_string(cells.size()) + " cells, expected 10");
        }
        TwoSpeedRow r;
        try {
            r.raga = cells[0];
            r.varnams = std::stoi(cells[1]);
            r.speed1 = {std::stod(cells[2]), std::stod(cells[3]), std::stod(cells[4])};
            // cells[5] repeats the overall duration; it is derived, not stored.
            r.ratio_cp = std::stod(cells[6]);
            r.ratio_transient = std::stod(cells[7]);
            r.ratio_silence = std::stod(cells[8]);
            r.ratio_overall = std::stod(cells[9]);
        } catch (const std::logic_error &) {
            throw InvalidArgument("non-numeric cell in two-speed table row '" + line + "'");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<TwoSpeedRow> read_two_speed_csv(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    return read_two_speed_csv(in);
}

inline void write_json_file(const std::string &path, const nlohmann::json &j)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw IoError("write failed for " + path);
    }
}

inline nlohmann::json read_json_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(path + ": " + e.what());
    }
}

} // namespace gamaka

#endif
