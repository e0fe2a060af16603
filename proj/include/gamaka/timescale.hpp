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

#ifndef GAMAKA_TIMESCALE_HPP
#define GAMAKA_TIMESCALE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <gamaka/audio_io.hpp>
#include <gamaka/error.hpp>
#include <gamaka/pitch_tracking.hpp>
#include <gamaka/segmentation.hpp>

namespace gamaka
{

inline constexpr double default_cp_cap_ms = 250.0;

/// One segment's placement on the slowed-down timeline. Frame ranges are inclusive.
struct PlanEntry {
    SegmentKind kind = SegmentKind::transient;
    std::size_t in_start = 0;
    std::size_t in_end = 0;
    std::size_t out_start = 0;
    std::size_t out_end = 0;
    std::size_t attack_frames = 0; // CP-notes only
    std::size_t decay_frames = 0;  // CP-notes only

    [[nodiscard]] std::size_t in_length() const noexcept { return in_end - in_start + 1; }
    [[nodiscard]] std::size_t out_length() const noexcept { return out_end - out_start + 1; }
    friend bool operator==(const PlanEntry &, const PlanEntry &) = default;
};

struct ScalePlan {
    double factor = 1.0;
    std::vector<PlanEntry> entries;
    std::size_t in_n_frames = 0;
    std::size_t out_n_frames = 0;
    double frame_ms = default_frame_ms;

    friend bool operator==(const ScalePlan &, const ScalePlan &) = default;
};

/// Output-to-input length ratio of the whole timeline.
inline double effective_factor(const ScalePlan &plan)
{
    if (plan.in_n_frames == 0) {
        throw InvalidArgument("empty plan");
    }
    return static_cast<double>(plan.out_n_frames) / static_cast<double>(plan.in_n_frames);
}

struct ClassSeconds {
    double cp_notes = 0.0;
    double transients = 0.0;
    double silence = 0.0;
    [[nodiscard]] double total() const noexcept { return cp_notes + transients + silence; }
};

struct ScaleReport {
    double factor = 1.0;
    double effective = 1.0;
    ClassSeconds input;
    ClassSeconds output;
};

inline ScaleReport scale_report(const ScalePlan &plan)
{
    ScaleReport r;
    r.factor = plan.factor;
    r.effective = effective_factor(plan);
    const double s = plan.frame_ms / 1000.0;
    for (const auto &e : plan.entries) {
        double *in = nullptr, *out = nullptr;
        switch (e.kind) {
        case SegmentKind::cp_note:
            in = &r.input.cp_notes;
            out = &r.output.cp_notes;
            break;
        case SegmentKind::transient:
            in = &r.input.transients;
            out = &r.output.transients;
            break;
        case SegmentKind::silence:
            in = &r.input.silence;
            out = &r.output.silence;
            break;
        }
        *in += static_cast<double>(e.in_length()) * s;
        *out += static_cast<double>(e.out_length()) * s;
    }
    return r;
}

namespace detail
{

inline std::size_t cp_cap_frames(double cp_cap_ms, double frame_ms)
{
    return static_cast<std::size_t>(std::ceil(cp_cap_ms / frame_ms - 1e-9));
}

/// Output length of a CP-note: scaled by R, except that notes shorter than the
/// cap are stretched no further than the cap (and never shortened).
inline std::size_t cp_out_frames(std::size_t len, double scaled, double cp_cap_ms, double frame_ms)
{
    const auto full = static_cast<std::size_t>(std::llround(scaled));
    if (static_cast<double>(len) * frame_ms >= cp_cap_ms) {
        return full;
    }
    return std::min(full, std::max(len, cp_cap_frames(cp_cap_ms, frame_ms)));
}

/// Frames from the note's start until frame energy first reaches 90% of the
/// note's median energy (and symmetrically from the end), at least one each.
/// Notes too short to keep a steady part get zero attack and decay.
inline void attack_decay(std::span<const double> energies, std::size_t start, std::size_t end, std::size_t &attack,
                         std::size_t &decay)
{
    const std::size_t len = end - start + 1;
    if (len < 3) {
        attack = decay = 0;
        return;
    }
    attack = decay = 1;
    if (energies.size() > end) {
        std::vector<double> e(energies.begin() + static_cast<std::ptrdiff_t>(start),
                              energies.begin() + static_cast<std::ptrdiff_t>(end) + 1);
        std::vector<double> sorted = e;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(len / 2), sorted.end());
        const double target = 0.9 * sorted[len / 2];
        std::size_t a = 0;
        while (a < len && e[a] < target) {
            ++a;
        }
        std::size_t b = 0;
        while (b < len && e[len - 1 - b] < target) {
            ++b;
        }
        attack = std::max<std::size_t>(1, a);
        decay = std::max<std::size_t>(1, b);
    }
    // Keep at least one steady frame.
    while (attack + decay > len - 1) {
        if (attack >= decay && attack > 1) {
            --attack;
        } else if (decay > 1) {
            --decay;
        } else {
            break;
        }
    }
}

inline ScalePlan layout(const Segmentation &seg, double factor, double cp_cap_ms, std::span<const double> energies)
{
    validate(seg);
    if (!(cp_cap_ms >= 0.0)) {
        throw InvalidArgument("CP-note cap must be non-negative");
    }
    ScalePlan plan;
    plan.factor = factor;
    plan.in_n_frames = seg.n_frames;
    plan.frame_ms = seg.frame_ms;

    // Consecutive transients would have overlapping nominal spans; fold them first.
    std::vector<Segment> segs;
    for (const auto &s : seg.segments) {
        if (!segs.empty() && s.kind == SegmentKind::transient && segs.back().kind == SegmentKind::transient) {
            segs.back().end = s.end;
        } else {
            segs.push_back(s);
        }
    }

    // Transients keep their input length; CP-notes and silences take their
    // R-scaled length. Each segment starts right after the previous one, so a
    // transient preceded only by scaled material lands at R*s .. (R-1)*s + e
    // and the flanking spans on both sides close up against it.
    std::size_t cursor = 0;
    for (const auto &s : segs) {
        PlanEntry e;
        e.kind = s.kind;
        e.in_start = s.start;
        e.in_end = s.end;
        const std::size_t len = s.length();
        std::size_t out_len = len;
        switch (s.kind) {
        case SegmentKind::transient:
            break;
        case SegmentKind::silence:
            out_len = static_cast<std::size_t>(std::llround(factor * static_cast<double>(len)));
            break;
        case SegmentKind::cp_note:
            out_len = cp_out_frames(len, factor * static_cast<double>(len), cp_cap_ms, seg.frame_ms);
            attack_decay(energies, s.start, s.end, e.attack_frames, e.decay_frames);
            break;
        }
        out_len = std::max(out_len, len);
        e.out_start = cursor;
        e.out_end = cursor + out_len - 1;
        cursor += out_len;
        plan.entries.push_back(e);
    }
    plan.out_n_frames = cursor;
    return plan;
}

} // namespace detail

/// Non-uniform slow-down plan for an integer factor R >= 1.
///
/// `energies` are per-frame RMS values used to size each CP-note's attack and
/// decay; when empty every CP-note gets one frame of each.
inline ScalePlan build_plan(const Segmentation &seg, int factor, double cp_cap_ms = default_cp_cap_ms,
                            std::span<const double> energies = {})
{
    if (factor < 1) {
        throw InvalidArgument("slow-down factor must be at least 1, got " + std::to_string(factor));
    }
    return detail::layout(seg, static_cast<double>(factor), cp_cap_ms, energies);
}

/// Rejects non-integer factors; the core planner is defined for integer R only.
inline ScalePlan build_plan(const Segmentation &seg, double factor, double cp_cap_ms = default_cp_cap_ms,
                            std::span<const double> energies = {})
{
    if (!(factor >= 1.0)) {
        throw InvalidArgument("slow-down factor must be at least 1");
    }
    if (factor != std::floor(factor)) {
        throw InvalidArgument("slow-down factor must be an integer; use build_plan_fractional for rational R");
    }
    return build_plan(seg, static_cast<int>(factor), cp_cap_ms, energies);
}

/// Extension for rational R: equivalent to planning at ceil(R) and trimming
/// each CP-note and silence extension in proportion, rounded to whole frames.
inline ScalePlan build_plan_fractional(const Segmentation &seg, double factor, double cp_cap_ms = default_cp_cap_ms,
                                       std::span<const double> energies = {})
{
    if (!(factor >= 1.0) || !std::isfinite(factor)) {
        throw InvalidArgument("slow-down factor must be at least 1");
    }
    return detail::layout(seg, factor, cp_cap_ms, energies);
}

/// Loops whole periods of `steady` until it fills `target_len` samples.
///
/// Splices are spread evenly over the output; at each one the read position
/// jumps back by (about) one period and the two readings are blended with a
/// raised-cosine crossfade that runs up to the next splice. The jump sizes
/// are integers summing to the required extension, so they differ from the
/// period by at most P/(2k) + 1 samples for k splices. The read position ends
/// exactly at the end of `steady`, so the original start and end are kept.
/// Spans shorter than two periods are looped as a whole.
inline std::vector<double> extend_pitch_synchronous(std::span<const double> steady, std::size_t period,
                                                    std::size_t target_len)
{
    const std::size_t n = steady.size();
    if (n == 0) {
        throw InvalidArgument("cannot extend an empty span");
    }
    if (target_len < n) {
        throw InvalidArgument("pitch-synchronous extension cannot shorten a span");
    }
    std::vector<double> y(steady.begin(), steady.end());
    if (target_len == n) {
        return y;
    }
    if (period == 0 || n < 2 * period) {
        period = n;
    }
    const std::size_t extra = target_len - n;
    std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(extra) / period)));
    if ((extra + k - 1) / k > n) {
        k = (extra + n - 1) / n;
    }

    y.assign(target_len, 0.0);
    std::size_t out = 0;
    std::size_t read = 0;
    std::size_t jumped = 0;
    for (std::size_t t = 1; t <= k + 1; ++t) {
        const std::size_t splice = t <= k ? t * target_len / (k + 1) : target_len;
        while (out < splice) {
            y[out++] = steady[read++];
        }
        if (t > k) {
            break;
        }
        const std::size_t jump = (extra * t) / k - jumped;
        jumped += jump;
        const std::size_t from = read;
        read -= std::min(jump, read);
        // Fade over the whole gap to the next splice: the phase slip of a
        // non-integer jump then reads as a slight detune, not a click.
        const std::size_t gap = (t + 1) * target_len / (k + 1) - splice;
        const std::size_t fade = std::min({std::max<std::size_t>(1, gap), n - from, target_len - out});
        for (std::size_t u = 0; u < fade; ++u) {
            const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * (static_cast<double>(u) + 0.5) / fade);
            y[out++] = (1.0 - w) * steady[from + u] + w * steady[read++];
        }
    }
    return y;
}

/// Tiles a silence span to `target_len` samples. The first and last frames are
/// copied to the output boundaries and the interior is repeated between them,
/// excess repetition dropped. Shorter targets get a truncated copy.
inline std::vector<double> extend_silence(std::span<const double> span, std::size_t target_len,
                                          std::size_t frame_len)
{
    if (span.empty()) {
        throw InvalidArgument("cannot extend an empty span");
    }
    const std::size_t n = span.size();
    if (target_len <= n) {
        return {span.begin(), span.begin() + static_cast<std::ptrdiff_t>(target_len)};
    }
    std::vector<double> y(target_len);
    frame_len = std::min(frame_len, n);
    if (frame_len == 0 || n < 2 * frame_len || target_len < 2 * frame_len) {
        for (std::size_t i = 0; i < target_len; ++i) {
            y[i] = span[i % n];
        }
        return y;
    }
    std::copy(span.begin(), span.begin() + static_cast<std::ptrdiff_t>(frame_len), y.begin());
    std::copy(span.end() - static_cast<std::ptrdiff_t>(frame_len), span.end(),
              y.end() - static_cast<std::ptrdiff_t>(frame_len));
    const auto interior = span.subspan(frame_len, n - 2 * frame_len);
    const std::size_t fill = target_len - 2 * frame_len;
    for (std::size_t i = 0; i < fill; ++i) {
        y[frame_len + i] = interior.empty() ? span[i % n] : interior[i % interior.size()];
    }
    return y;
}

namespace detail
{

/// Linear interpolation of per-frame values placed at frame centres; clamps outside.
inline double interp_frames(std::span<const double> values, double pos_frames)
{
    const double x = pos_frames - 0.5;
    if (x <= 0.0) {
        return values.front();
    }
    const auto i = static_cast<std::size_t>(std::floor(x));
    if (i + 1 >= values.size()) {
        return values.back();
    }
    const double t = x - static_cast<double>(i);
    return (1.0 - t) * values[i] + t * values[i + 1];
}

inline constexpr double envelope_floor = 1e-4;

inline std::size_t cp_period(std::span<const double> note, const FrameGrid &grid, int sample_rate)
{
    std::vector<double> f;
    for (std::size_t off = 0; off + grid.frame_len_samples <= note.size(); off += grid.frame_len_samples) {
        if (auto p = estimate_frame_pitch(note.subspan(off, grid.frame_len_samples), sample_rate)) {
            f.push_back(*p);
        }
    }
    if (f.empty()) {
        return 0;
    }
    std::nth_element(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(f.size() / 2), f.end());
    return static_cast<std::size_t>(std::lround(sample_rate / f[f.size() / 2]));
}

inline void render_cp(std::span<const double> x, const FrameGrid &grid, int sample_rate, const PlanEntry &e,
                      std::span<double> out)
{
    const std::size_t fl = grid.frame_len_samples;
    const std::size_t in_len = e.in_length();
    const std::size_t out_len = e.out_length();
    const auto note = x.subspan(e.in_start * fl, in_len * fl);
    if (out_len == in_len) {
        std::copy(note.begin(), note.end(), out.begin());
        return;
    }
    const std::size_t a = e.attack_frames;
    const std::size_t b = e.decay_frames;

    std::vector<double> env(in_len);
    for (std::size_t l = 0; l < in_len; ++l) {
        env[l] = rms(note.subspan(l * fl, fl));
    }

    // Steady part: frames [a, in_len - b) in, [a, out_len - b) out.
    const std::size_t steady_in = (in_len - a - b) * fl;
    const std::size_t steady_out = (out_len - a - b) * fl;
    const std::size_t base = a * fl;
    std::vector<double> flat(steady_in);
    for (std::size_t i = 0; i < steady_in; ++i) {
        const double pos = static_cast<double>(base + i) / static_cast<double>(fl);
        flat[i] = note[base + i] / std::max(interp_frames(env, pos), envelope_floor);
    }
    const auto period = cp_period(note, grid, sample_rate);
    const auto ext = extend_pitch_synchronous(flat, period, steady_out);
    const double map = steady_out > 1 ? static_cast<double>(steady_in - 1) / static_cast<double>(steady_out - 1) : 0.0;
    for (std::size_t j = 0; j < steady_out; ++j) {
        const double pos = (static_cast<double>(base) + static_cast<double>(j) * map) / static_cast<double>(fl);
        out[base + j] = ext[j] * std::max(interp_frames(env, pos), envelope_floor);
    }
    std::copy(note.begin(), note.begin() + static_cast<std::ptrdiff_t>(base), out.begin());
    std::copy(note.end() - static_cast<std::ptrdiff_t>(b * fl), note.end(),
              out.begin() + static_cast<std::ptrdiff_t>(base + steady_out));
}

} // namespace detail

/// Throws unless the plan was built from this segmentation and tiles its output.
inline void check_plan(const Segmentation &seg, const ScalePlan &plan)
{
    validate(seg);
    if (plan.in_n_frames != seg.n_frames) {
        throw InvalidArgument("plan and segmentation cover different frame counts");
    }
    std::size_t in_next = 0, out_next = 0;
    for (const auto &e : plan.entries) {
        if (e.in_start != in_next || e.out_start != out_next || e.in_end < e.in_start || e.out_end < e.out_start) {
            throw InvalidArgument("plan entries are not contiguous");
        }
        if (e.kind == SegmentKind::transient && e.out_length() != e.in_length()) {
            throw InvalidArgument("plan scales a transient");
        }
        if (e.kind == SegmentKind::cp_note && e.attack_frames + e.decay_frames >= e.in_length() && e.in_length() >= 3) {
            throw InvalidArgument("CP-note attack and decay leave no steady part");
        }
        in_next = e.in_end + 1;
        out_next = e.out_end + 1;
        for (std::size_t l = e.in_start; l <= e.in_end; ++l) {
            const auto it = std::find_if(seg.segments.begin(), seg.segments.end(),
                                         [l](const Segment &s) { return s.start <= l && l <= s.end; });
            if (it->kind != e.kind) {
                throw InvalidArgument("plan entry kind disagrees with segmentation at frame " + std::to_string(l));
            }
        }
    }
    if (in_next != plan.in_n_frames || out_next != plan.out_n_frames) {
        throw InvalidArgument("plan does not cover its frame counts");
    }
}

/// Renders the slowed-down signal: transients copied verbatim, CP-notes
/// extended pitch-synchronously under their own amplitude envelope with
/// attack and decay copied, silences tiled.
inline AudioBuffer render(const AudioBuffer &buf, const Segmentation &seg, const ScalePlan &plan)
{
    check_plan(seg, plan);
    const FrameGrid grid = frame_grid(buf, seg.frame_ms);
    if (grid.n_frames != seg.n_frames) {
        throw InvalidArgument("segmentation was not derived from this buffer");
    }
    const std::size_t fl = grid.frame_len_samples;
    const auto x = buf.view();
    std::vector<double> out(plan.out_n_frames * fl, 0.0);
    for (const auto &e : plan.entries) {
        const auto in = x.subspan(e.in_start * fl, e.in_length() * fl);
        std::span<double> dst(out.data() + e.out_start * fl, e.out_length() * fl);
        switch (e.kind) {
        case SegmentKind::transient:
            std::copy(in.begin(), in.end(), dst.begin());
            break;
        case SegmentKind::silence: {
            const auto y = extend_silence(in, dst.size(), fl);
            std::copy(y.begin(), y.end(), dst.begin());
            break;
        }
        case SegmentKind::cp_note:
            detail::render_cp(x, grid, buf.sample_rate, e, dst);
            break;
        }
    }
    for (double &v : out) {
        v = std::clamp(v, -1.0, 1.0);
    }
    return AudioBuffer(std::move(out), buf.sample_rate);
}

struct UniformScaleConfig {
    double frame_ms = 40.0;
    double tolerance_ms = 10.0;
};

/// Uniform, pitch-preserving time stretch by waveform-similarity overlap-add.
///
/// Hann frames at 50% overlap are laid down at a fixed synthesis hop; each
/// analysis frame is taken near its nominal position (hop / factor apart),
/// shifted within the tolerance to best match the natural continuation of the
/// previous frame. Output length is round(input length * factor).
inline AudioBuffer uniform_scale(const AudioBuffer &buf, double factor, const UniformScaleConfig &cfg = {})
{
    if (!(factor >= 1.0) || !std::isfinite(factor)) {
        throw InvalidArgument("uniform scale factor must be at least 1");
    }
    const auto x = buf.view();
    const long nx = static_cast<long>(x.size());
    std::size_t n = frame_length(cfg.frame_ms, buf.sample_rate);
    n += n % 2;
    const long half = static_cast<long>(n / 2);
    const long hop = half;
    const auto tol = static_cast<long>(std::lround(cfg.tolerance_ms / 1000.0 * buf.sample_rate));
    const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(x.size()) * factor));

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
    auto at = [&](long i) { return (i >= 0 && i < nx) ? x[static_cast<std::size_t>(i)] : 0.0; };

    std::vector<double> y(out_len, 0.0);
    long prev_center = 0;
    for (long k = 0;; ++k) {
        const long out_center = k * hop;
        if (out_center - half >= static_cast<long>(out_len)) {
            break;
        }
        const long nominal = std::lround(static_cast<double>(out_center) / factor);
        long center = nominal;
        if (k > 0) {
            // Match the overlapping first half against what would have followed the previous frame.
            const long natural = prev_center + hop;
            double best = -2.0;
            for (long d = 0; d <= 2 * tol; ++d) {
                const long delta = (d % 2 == 0) ? d / 2 : -(d + 1) / 2;
                const long c = nominal + delta;
                double xy = 0.0, yy = 0.0, xx = 0.0;
                for (long m = -half; m < 0; ++m) {
                    const double a = at(natural + m);
                    const double b = at(c + m);
                    xy += a * b;
                    xx += a * a;
                    yy += b * b;
                }
                const double score = (xx > 0.0 && yy > 0.0) ? xy / std::sqrt(xx * yy) : (xx == 0.0 && yy == 0.0 ? 1.0 : 0.0);
                if (score > best + 1e-12) {
                    best = score;
                    center = c;
                }
            }
        }
        for (long m = -half; m < half; ++m) {
            const long o = out_center + m;
            if (o >= 0 && o < static_cast<long>(out_len)) {
                y[static_cast<std::size_t>(o)] += w[static_cast<std::size_t>(m + half)] * at(center + m);
            }
        }
        prev_center = center;
    }
    for (double &v : y) {
        v = std::clamp(v, -1.0, 1.0);
    }
    return AudioBuffer(std::move(y), buf.sample_rate);
}

} // namespace gamaka

#endif
