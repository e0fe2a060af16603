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

#ifndef GAMAKA_SEGMENTATION_HPP
#define GAMAKA_SEGMENTATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gamaka/audio_io.hpp>
#include <gamaka/error.hpp>
#include <gamaka/pitch_tracking.hpp>

namespace gamaka
{

enum class SegmentKind { cp_note, transient, silence };

inline std::string_view to_string(SegmentKind k) noexcept
{
    switch (k) {
    case SegmentKind::cp_note:
        return "cp_note";
    case SegmentKind::transient:
        return "transient";
    case SegmentKind::silence:
        return "silence";
    }
    return "unknown";
}

inline SegmentKind segment_kind_from_string(std::string_view s)
{
    if (s == "cp_note") {
        return SegmentKind::cp_note;
    }
    if (s == "transient") {
        return SegmentKind::transient;
    }
    if (s == "silence") {
        return SegmentKind::silence;
    }
    throw InvalidArgument("unknown segment kind '" + std::string(s) + "'");
}

/// Inclusive frame range [start, end] with a label.
struct Segment {
    SegmentKind kind = SegmentKind::transient;
    std::size_t start = 0;
    std::size_t end = 0;
    std::optional<double> mean_semitone; // CP-notes only

    [[nodiscard]] std::size_t length() const noexcept { return end - start + 1; }
    friend bool operator==(const Segment &, const Segment &) = default;
};

struct SegmentCounts {
    std::size_t cp_notes = 0;
    std::size_t transients = 0;
    std::size_t silences = 0;
};

/// Ordered, disjoint, exhaustive labelling of [0, n_frames).
struct Segmentation {
    std::vector<Segment> segments;
    std::size_t n_frames = 0;
    double frame_ms = default_frame_ms;

    [[nodiscard]] SegmentCounts counts() const noexcept
    {
        SegmentCounts c;
        for (const auto &s : segments) {
            switch (s.kind) {
            case SegmentKind::cp_note:
                ++c.cp_notes;
                break;
            case SegmentKind::transient:
                ++c.transients;
                break;
            case SegmentKind::silence:
                ++c.silences;
                break;
            }
        }
        return c;
    }

    [[nodiscard]] std::size_t frames_of(SegmentKind k) const noexcept
    {
        std::size_t total = 0;
        for (const auto &s : segments) {
            if (s.kind == k) {
                total += s.length();
            }
        }
        return total;
    }

    [[nodiscard]] std::vector<Segment> of_kind(SegmentKind k) const
    {
        std::vector<Segment> out;
        std::copy_if(segments.begin(), segments.end(), std::back_inserter(out),
                     [k](const Segment &s) { return s.kind == k; });
        return out;
    }

    friend bool operator==(const Segmentation &, const Segmentation &) = default;
};

/// Throws unless the segments tile [0, n_frames) in order with no two silences adjacent.
inline void validate(const Segmentation &seg)
{
    std::size_t next = 0;
    for (std::size_t i = 0; i < seg.segments.size(); ++i) {
        const auto &s = seg.segments[i];
        if (s.start != next || s.end < s.start) {
            throw InvalidArgument("segmentation is not contiguous at frame " + std::to_string(next));
        }
        if (i > 0 && s.kind == SegmentKind::silence && seg.segments[i - 1].kind == SegmentKind::silence) {
            throw InvalidArgument("adjacent silence segments at frame " + std::to_string(s.start));
        }
        next = s.end + 1;
    }
    if (next != seg.n_frames) {
        throw InvalidArgument("segmentation covers " + std::to_string(next) + " of " + std::to_string(seg.n_frames)
                              + " frames");
    }
}

struct SegmentationConfig {
    double cp_tolerance = 0.3;   // semitones either side of the run mean
    double cp_max_slope = 1.0;   // semitones per second
    std::size_t cp_min_frames = 2;
    double snap_window_ms = 80.0;
    double snap_tolerance = 0.3; // semitones
    std::vector<double> cp_peaks = default_cp_peaks();

    /// Every semitone of the 12-tone scale across three octaves around the tonic.
    static std::vector<double> default_cp_peaks()
    {
        std::vector<double> p;
        for (int k = -24; k <= 36; ++k) {
            p.push_back(static_cast<double>(k));
        }
        return p;
    }

    void check() const
    {
        if (!(cp_tolerance > 0.0) || !(cp_max_slope > 0.0) || cp_min_frames == 0 || !(snap_window_ms > 0.0)
            || !(snap_tolerance > 0.0)) {
            throw InvalidArgument("segmentation thresholds must be positive");
        }
    }
};

/// Ordinary least-squares slope in semitones per second, time at frame centres.
inline double best_fit_slope(std::span<const double> values, double frame_ms)
{
    if (values.size() < 2) {
        throw InvalidArgument("slope needs at least two values");
    }
    const double dt = frame_ms / 1000.0;
    const double n = static_cast<double>(values.size());
    double t_mean = 0.0, v_mean = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        t_mean += (static_cast<double>(k) + 0.5) * dt;
        v_mean += values[k];
    }
    t_mean /= n;
    v_mean /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double dtk = (static_cast<double>(k) + 0.5) * dt - t_mean;
        sxy += dtk * (values[k] - v_mean);
        sxx += dtk * dtk;
    }
    return sxy / sxx;
}

/// Whether the values form a constant-pitch run: extremes within tolerance of the
/// mean and best-fit slope no steeper than the limit. Single values pass trivially.
inline bool is_cp_run(std::span<const double> values, double frame_ms, const SegmentationConfig &cfg)
{
    if (values.empty()) {
        return false;
    }
    double sum = 0.0;
    double lo = values.front(), hi = values.front();
    for (double v : values) {
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double mean = sum / static_cast<double>(values.size());
    if (hi - mean > cfg.cp_tolerance || mean - lo > cfg.cp_tolerance) {
        return false;
    }
    return values.size() < 2 || std::abs(best_fit_slope(values, frame_ms)) <= cfg.cp_max_slope;
}

inline std::vector<Segment> detect_silence(std::span<const std::optional<double>> n)
{
    std::vector<Segment> out;
    std::size_t l = 0;
    while (l < n.size()) {
        if (n[l]) {
            ++l;
            continue;
        }
        std::size_t e = l;
        while (e + 1 < n.size() && !n[e + 1]) {
            ++e;
        }
        out.push_back({SegmentKind::silence, l, e, std::nullopt});
        l = e + 1;
    }
    return out;
}

/// Maximal runs of unvoiced frames, in order.
inline std::vector<Segment> detect_silence(const PitchContour &pc)
{
    std::vector<std::optional<double>> n(pc.size());
    for (std::size_t l = 0; l < pc.size(); ++l) {
        if (pc.voiced(l)) {
            n[l] = pc.f[l];
        }
    }
    return detect_silence(n);
}

inline std::vector<Segment> detect_silence(const SemitoneContour &sc)
{
    return detect_silence(sc.n);
}

/// Greedy left-to-right CP-note detection.
///
/// From each start frame the longest valid run is found (validity is not
/// monotone in run length because the slope test loosens as runs grow, so
/// the scan continues past failures until the extremes differ by more than
/// twice the tolerance, after which no longer run can pass). A run of at
/// least `cp_min_frames` is emitted and scanning resumes after it; otherwise
/// the start advances by one frame.
inline std::vector<Segment> detect_cp_notes(const SemitoneContour &sc, const SegmentationConfig &cfg = {})
{
    cfg.check();
    const std::size_t L = sc.size();
    const double dt = sc.frame_ms / 1000.0;
    std::vector<Segment> out;
    std::size_t i = 0;
    while (i < L) {
        if (!sc.voiced(i)) {
            ++i;
            continue;
        }
        // Running sums over the candidate [i, j] with local time k = j - i.
        double sv = 0.0, stv = 0.0, st = 0.0, stt = 0.0;
        double lo = *sc.n[i], hi = *sc.n[i];
        std::optional<std::size_t> best_end;
        double best_mean = 0.0;
        for (std::size_t j = i; j < L && sc.voiced(j); ++j) {
            const double v = *sc.n[j];
            const double t = (static_cast<double>(j - i) + 0.5) * dt;
            sv += v;
            stv += t * v;
            st += t;
            stt += t * t;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            if (hi - lo > 2.0 * cfg.cp_tolerance) {
                break;
            }
            const double cnt = static_cast<double>(j - i + 1);
            if (cnt < 2.0) {
                continue;
            }
            const double mean = sv / cnt;
            if (hi - mean > cfg.cp_tolerance || mean - lo > cfg.cp_tolerance) {
                continue;
            }
            const double sxx = stt - st * st / cnt;
            const double sxy = stv - st * sv / cnt;
            if (std::abs(sxy / sxx) > cfg.cp_max_slope) {
                continue;
            }
            best_end = j;
            best_mean = mean;
        }
        if (best_end && *best_end - i + 1 >= cfg.cp_min_frames) {
            out.push_back({SegmentKind::cp_note, i, *best_end, best_mean});
            i = *best_end + 1;
        } else {
            ++i;
        }
    }
    return out;
}

/// Complement of silences and CP-notes over [0, L) as maximal runs.
inline std::vector<Segment> derive_transients(std::size_t L, std::span<const Segment> silences,
                                              std::span<const Segment> cp_notes)
{
    std::vector<char> taken(L, 0);
    auto mark = [&](std::span<const Segment> segs) {
        for (const auto &s : segs) {
            if (s.end < s.start || s.end >= L) {
                throw InvalidArgument("segment [" + std::to_string(s.start) + ", " + std::to_string(s.end)
                                      + "] lies outside the contour");
            }
            for (std::size_t l = s.start; l <= s.end; ++l) {
                if (taken[l]) {
                    throw InvalidArgument("silence and CP-note segments overlap at frame " + std::to_string(l));
                }
                taken[l] = 1;
            }
        }
    };
    mark(silences);
    mark(cp_notes);
    std::vector<Segment> out;
    std::size_t l = 0;
    while (l < L) {
        if (taken[l]) {
            ++l;
            continue;
        }
        std::size_t e = l;
        while (e + 1 < L && !taken[e + 1]) {
            ++e;
        }
        out.push_back({SegmentKind::transient, l, e, std::nullopt});
        l = e + 1;
    }
    return out;
}

/// Merges the three lists into one ordered segmentation.
inline Segmentation assemble(std::size_t L, double frame_ms, std::span<const Segment> silences,
                             std::span<const Segment> cp_notes)
{
    const auto transients = derive_transients(L, silences, cp_notes);
    Segmentation seg;
    seg.n_frames = L;
    seg.frame_ms = frame_ms;
    seg.segments.insert(seg.segments.end(), silences.begin(), silences.end());
    seg.segments.insert(seg.segments.end(), cp_notes.begin(), cp_notes.end());
    seg.segments.insert(seg.segments.end(), transients.begin(), transients.end());
    std::sort(seg.segments.begin(), seg.segments.end(),
              [](const Segment &a, const Segment &b) { return a.start < b.start; });
    validate(seg);
    return seg;
}

namespace detail
{

inline std::optional<double> nearest_peak(double v, std::span<const double> peaks, double tol)
{
    std::optional<double> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (double p : peaks) {
        const double d = std::abs(v - p);
        if (d <= tol && d < best_d) {
            best = p;
            best_d = d;
        }
    }
    return best;
}

/// 3-frame median over voiced neighbours; two voiced values average.
inline std::vector<std::optional<double>> median3(std::span<const std::optional<double>> n)
{
    std::vector<std::optional<double>> out(n.size());
    for (std::size_t l = 0; l < n.size(); ++l) {
        if (!n[l]) {
            continue;
        }
        double vals[3];
        std::size_t k = 0;
        if (l > 0 && n[l - 1]) {
            vals[k++] = *n[l - 1];
        }
        vals[k++] = *n[l];
        if (l + 1 < n.size() && n[l + 1]) {
            vals[k++] = *n[l + 1];
        }
        std::sort(vals, vals + k);
        out[l] = k == 3 ? vals[1] : (k == 2 ? 0.5 * (vals[0] + vals[1]) : vals[0]);
    }
    return out;
}

} // namespace detail

/// Frames of the smoothed contour where the direction changes or stays flat.
/// A voiced frame with only one voiced neighbour (the end of a voiced run)
/// counts as a one-sided extremum.
inline std::vector<std::size_t> stationary_points(const SemitoneContour &sc)
{
    const auto s = detail::median3(sc.n);
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < s.size(); ++l) {
        if (!s[l]) {
            continue;
        }
        const bool has_prev = l > 0 && s[l - 1];
        const bool has_next = l + 1 < s.size() && s[l + 1];
        if (has_prev != has_next) {
            out.push_back(l);
        } else if (has_prev && has_next && (*s[l] - *s[l - 1]) * (*s[l + 1] - *s[l]) <= 0.0) {
            out.push_back(l);
        }
    }
    return out;
}

/// Relabels stationary stretches of transients as CP-notes.
///
/// Around each stationary point inside a transient, every voiced frame whose
/// centre lies within half the snap window is checked against the nearest
/// scale peak; if all of them sit within the snap tolerance of that one peak
/// the stretch becomes a CP-note at the peak value. The slope condition is
/// not applied here. Snapped stretches merge with each other and with
/// neighbouring CP-notes at the same peak, and transients are re-derived.
inline Segmentation snap_stationary_points(const SemitoneContour &sc, const Segmentation &seg,
                                           const SegmentationConfig &cfg = {})
{
    cfg.check();
    validate(seg);
    if (sc.size() != seg.n_frames) {
        throw InvalidArgument("contour and segmentation lengths differ");
    }
    const std::size_t L = seg.n_frames;
    const auto half = static_cast<std::size_t>(std::floor(cfg.snap_window_ms / 2.0 / seg.frame_ms + 1e-9));

    // Peak each frame was snapped to, if any.
    std::vector<std::optional<double>> snapped(L);
    for (std::size_t p : stationary_points(sc)) {
        const auto owner = std::find_if(seg.segments.begin(), seg.segments.end(),
                                        [p](const Segment &s) { return s.start <= p && p <= s.end; });
        if (owner == seg.segments.end() || owner->kind != SegmentKind::transient) {
            continue;
        }
        const auto peak = detail::nearest_peak(*sc.n[p], cfg.cp_peaks, cfg.snap_tolerance);
        if (!peak) {
            continue;
        }
        const std::size_t a = std::max(owner->start, p >= half ? p - half : 0);
        const std::size_t b = std::min(owner->end, p + half);
        bool ok = b - a + 1 >= cfg.cp_min_frames;
        for (std::size_t l = a; ok && l <= b; ++l) {
            ok = sc.voiced(l) && std::abs(*sc.n[l] - *peak) <= cfg.snap_tolerance;
        }
        if (!ok) {
            continue;
        }
        for (std::size_t l = a; l <= b; ++l) {
            snapped[l] = *peak;
        }
    }

    std::vector<Segment> silences;
    std::vector<Segment> cps;
    for (const auto &s : seg.segments) {
        if (s.kind == SegmentKind::silence) {
            silences.push_back(s);
        } else if (s.kind == SegmentKind::cp_note) {
            cps.push_back(s);
        }
    }
    std::size_t l = 0;
    while (l < L) {
        if (!snapped[l]) {
            ++l;
            continue;
        }
        std::size_t e = l;
        while (e + 1 < L && snapped[e + 1] && *snapped[e + 1] == *snapped[l]) {
            ++e;
        }
        cps.push_back({SegmentKind::cp_note, l, e, *snapped[l]});
        l = e + 1;
    }
    std::sort(cps.begin(), cps.end(), [](const Segment &a, const Segment &b) { return a.start < b.start; });

    std::vector<Segment> merged;
    for (const auto &c : cps) {
        if (!merged.empty() && merged.back().end + 1 == c.start) {
            auto &prev = merged.back();
            const auto pa = detail::nearest_peak(*prev.mean_semitone, cfg.cp_peaks, cfg.snap_tolerance);
            const auto pb = detail::nearest_peak(*c.mean_semitone, cfg.cp_peaks, cfg.snap_tolerance);
            if (pa && pb && *pa == *pb) {
                prev.end = c.end;
                prev.mean_semitone = *pa;
                continue;
            }
        }
        merged.push_back(c);
    }
    return assemble(L, seg.frame_ms, silences, merged);
}

/// Silence, CP-notes and transients of a semitone contour, before snapping.
inline Segmentation segment_contour(const SemitoneContour &sc, const SegmentationConfig &cfg = {})
{
    const auto silences = detect_silence(sc);
    const auto cps = detect_cp_notes(sc, cfg);
    return assemble(sc.size(), sc.frame_ms, silences, cps);
}

/// Everything the pipeline derives from one recording.
struct Analysis {
    FrameGrid grid;
    PitchContour pitch;
    SemitoneContour semitones;
    Segmentation segmentation;
};

inline Analysis analyze(const AudioBuffer &buf, double tonic_hz, const SegmentationConfig &cfg = {},
                        const TrackerConfig &tracker = {}, double frame_ms = default_frame_ms)
{
    if (!(tonic_hz > 0.0)) {
        throw InvalidArgument("tonic must be positive");
    }
    Analysis a;
    a.grid = frame_grid(buf, frame_ms);
    a.pitch = track_pitch(buf, a.grid, tracker);
    a.semitones = to_semitones(a.pitch, tonic_hz);
    a.segmentation = snap_stationary_points(a.semitones, segment_contour(a.semitones, cfg), cfg);
    return a;
}

/// grid -> pitch -> semitones -> silence -> CP-notes -> snapping -> transients.
inline Segmentation segment(const AudioBuffer &buf, double tonic_hz, const SegmentationConfig &cfg = {},
                            const TrackerConfig &tracker = {}, double frame_ms = default_frame_ms)
{
    return analyze(buf, tonic_hz, cfg, tracker, frame_ms).segmentation;
}

} // namespace gamaka

#endif
