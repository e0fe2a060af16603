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

#ifndef GAMAKA_ANALYSIS_HPP
#define GAMAKA_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <gamaka/audio_io.hpp>
#include <gamaka/error.hpp>
#include <gamaka/segmentation.hpp>
#include <gamaka/spectrum.hpp>

namespace gamaka
{

enum class GlideShape { linear, raised_cosine };

struct Harmonic {
    double multiple = 2.0;
    double amplitude = 0.5; // relative to the fundamental
};

/// A tone that sits at f0, moves to f1 and back over t_T, then sits at f0 again.
struct GamakaParams {
    double f0_hz = 125.0;
    double f1_hz = 150.0;
    double t_c1_s = 0.07;
    double t_c2_s = 0.07;
    double t_T_s = 0.2;
    double amplitude = 0.5; // peak of the summed partials
    double phase = 0.0;     // radians
    std::vector<Harmonic> harmonics;
    GlideShape shape = GlideShape::linear;

    /// Lower Ni of bhairavi, male voice: 125 -> 150 -> 125 Hz over 200 ms between 70 ms holds.
    static GamakaParams kampita() { return {}; }

    [[nodiscard]] double duration_s() const noexcept { return t_c1_s + t_T_s + t_c2_s; }

    /// Instantaneous fundamental frequency at time t.
    [[nodiscard]] double frequency_at(double t) const noexcept
    {
        if (t < t_c1_s || t >= t_c1_s + t_T_s || t_T_s <= 0.0) {
            return f0_hz;
        }
        const double u = (t - t_c1_s) / t_T_s;
        const double shape_value = shape == GlideShape::linear ? 1.0 - std::abs(2.0 * u - 1.0)
                                                               : 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * u);
        return f0_hz + (f1_hz - f0_hz) * shape_value;
    }

    [[nodiscard]] double highest_multiple() const noexcept
    {
        double m = 1.0;
        for (const auto &h : harmonics) {
            m = std::max(m, h.multiple);
        }
        return m;
    }

    void check() const
    {
        if (!(f0_hz > 0.0) || !(f1_hz > 0.0)) {
            throw InvalidArgument("gamaka frequencies must be positive");
        }
        if (!(t_c1_s >= 0.0) || !(t_c2_s >= 0.0) || !(t_T_s >= 0.0)) {
            throw InvalidArgument("gamaka durations must be non-negative");
        }
        if (!(duration_s() > 0.0)) {
            throw InvalidArgument("gamaka has zero duration");
        }
        if (!(amplitude > 0.0) || amplitude > 1.0) {
            throw InvalidArgument("gamaka amplitude must lie in (0, 1]");
        }
        for (const auto &h : harmonics) {
            if (!(h.multiple >= 1.0) || !(h.amplitude >= 0.0)) {
                throw InvalidArgument("harmonic multiples must be >= 1 with non-negative amplitude");
            }
        }
    }
};

/// Phase-continuous synthesis of the gamaka tone; partials follow the fundamental.
inline AudioBuffer synth_gamaka(const GamakaParams &p, int sample_rate)
{
    p.check();
    const double f_top = std::max(p.f0_hz, p.f1_hz) * p.highest_multiple();
    if (static_cast<double>(sample_rate) < 4.0 * f_top) {
        throw InvalidArgument("sample rate " + std::to_string(sample_rate) + " Hz is below four times the highest partial ("
                              + std::to_string(f_top) + " Hz)");
    }
    double norm = 1.0;
    for (const auto &h : p.harmonics) {
        norm += h.amplitude;
    }
    const auto n = static_cast<std::size_t>(std::llround(p.duration_s() * sample_rate));
    std::vector<double> s(n);
    const double ts = 1.0 / sample_rate;
    double phase = p.phase;
    for (std::size_t i = 0; i < n; ++i) {
        double v = std::cos(phase);
        for (const auto &h : p.harmonics) {
            v += h.amplitude * std::cos(h.multiple * phase);
        }
        s[i] = p.amplitude * v / norm;
        // Midpoint rule keeps the phase integral exact for piecewise-linear frequency.
        const double t_mid = (static_cast<double>(i) + 0.5) * ts;
        phase += 2.0 * std::numbers::pi * p.frequency_at(t_mid) * ts;
    }
    return AudioBuffer(std::move(s), sample_rate);
}

/// Lower bound on the frequency ratio seen by a W-long window on the glide.
struct WindowFeasibility {
    double rho_lower = 1.0;
    double window_ms = 0.0;
    double semitone_spread = 0.0;
};

inline WindowFeasibility rho_lower_bound(double f0_hz, double f1_hz, double window_ms, double t_T_ms)
{
    if (!(f0_hz > 0.0) || !(f1_hz > 0.0) || !(window_ms > 0.0) || !(t_T_ms > 0.0)) {
        throw InvalidArgument("window feasibility inputs must be positive");
    }
    if (f1_hz < f0_hz) {
        throw InvalidArgument("excursion frequency must not be below the base frequency");
    }
    WindowFeasibility r;
    r.window_ms = window_ms;
    r.rho_lower = 1.0 + (f1_hz - f0_hz) / f0_hz * (window_ms / (t_T_ms / 2.0));
    r.semitone_spread = 12.0 * std::log2(r.rho_lower);
    return r;
}

/// -20 dB band of a single analysis window.
struct SpreadMeasurement {
    double center_s = 0.0;
    double band_lo_hz = 0.0;
    double band_hi_hz = 0.0;
    /// band_hi / band_lo of the -20 dB region around the spectral peak.
    double band_ratio = 1.0;
    /// 1 + (band width minus that of a steady tone at the same window) / f0;
    /// about 1 for a steady tone, it isolates the widening due to the glide.
    double sweep_ratio = 1.0;
};

inline constexpr double spread_threshold_db = -20.0;

namespace detail
{

/// Edges of the -20 dB region around the spectral peak, with the crossing
/// interpolated linearly between bins so the measure varies smoothly with W.
inline std::pair<double, double> band_edges(std::span<const double> frame, std::size_t nfft, int sample_rate)
{
    const auto mag = stft_frame(frame, WindowShape::hann, nfft);
    const auto peak = static_cast<std::size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());
    const double floor = mag[peak] * std::pow(10.0, spread_threshold_db / 20.0);
    std::size_t lo = peak, hi = peak;
    while (lo > 0 && mag[lo - 1] >= floor) {
        --lo;
    }
    while (hi + 1 < mag.size() && mag[hi + 1] >= floor) {
        ++hi;
    }
    const double df = static_cast<double>(sample_rate) / static_cast<double>(nfft);
    double f_lo = bin_frequency(lo, nfft, sample_rate);
    double f_hi = bin_frequency(hi, nfft, sample_rate);
    if (lo > 0) {
        f_lo -= df * (mag[lo] - floor) / (mag[lo] - mag[lo - 1]);
    }
    if (hi + 1 < mag.size()) {
        f_hi += df * (mag[hi] - floor) / (mag[hi] - mag[hi + 1]);
    }
    return {f_lo, f_hi};
}

} // namespace detail

/// Windows the middle of the rising half of the transient and measures how
/// far the spectrum's -20 dB band spreads.
inline SpreadMeasurement spectral_spread_demo(const GamakaParams &p, double window_ms, int sample_rate)
{
    p.check();
    const double center = p.t_c1_s + p.t_T_s / 4.0;
    const double w = window_ms / 1000.0;
    if (p.t_T_s > 0.0 && w > p.t_T_s / 2.0) {
        throw InvalidArgument("window does not fit inside the rising half of the transient");
    }
    const auto buf = synth_gamaka(p, sample_rate);
    const auto len = frame_length(window_ms, sample_rate);
    const auto start = static_cast<long>(std::lround(center * sample_rate)) - static_cast<long>(len / 2);
    if (start < 0 || static_cast<std::size_t>(start) + len > buf.size()) {
        throw InvalidArgument("analysis window falls outside the synthesized tone");
    }
    const auto frame = buf.view().subspan(static_cast<std::size_t>(start), len);
    const std::size_t nfft = std::max<std::size_t>(next_pow2(len) * 16, std::size_t{1} << 17);
    const auto [lo, hi] = detail::band_edges(frame, nfft, sample_rate);

    GamakaParams steady = p;
    steady.f0_hz = steady.f1_hz = p.frequency_at(center);
    const auto ref = synth_gamaka(steady, sample_rate);
    const auto [rlo, rhi] = detail::band_edges(ref.view().subspan(static_cast<std::size_t>(start), len), nfft, sample_rate);

    SpreadMeasurement m;
    m.center_s = center;
    m.band_lo_hz = lo;
    m.band_hi_hz = hi;
    m.band_ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    m.sweep_ratio = 1.0 + ((hi - lo) - (rhi - rlo)) / p.f0_hz;
    return m;
}

/// Durations in seconds per segment class.
struct ClassDurations {
    double cp_notes = 0.0;
    double transients = 0.0;
    double silence = 0.0;
    [[nodiscard]] double overall() const noexcept { return cp_notes + transients + silence; }
};

inline ClassDurations class_durations(const Segmentation &seg)
{
    const double s = seg.frame_ms / 1000.0;
    return {static_cast<double>(seg.frames_of(SegmentKind::cp_note)) * s,
            static_cast<double>(seg.frames_of(SegmentKind::transient)) * s,
            static_cast<double>(seg.frames_of(SegmentKind::silence)) * s};
}

/// Speed-1 over speed-2 durations per class.
///
/// A class absent at speed 2 but present at speed 1 reports +infinity; a class
/// absent at both speeds reports NaN.
struct RatioReport {
    ClassDurations speed1;
    ClassDurations speed2;
    double cp_notes = 1.0;
    double transients = 1.0;
    double silence = 1.0;
    double overall = 1.0;
};

inline double duration_ratio(double d1, double d2) noexcept
{
    if (d2 > 0.0) {
        return d1 / d2;
    }
    return d1 > 0.0 ? std::numeric_limits<double>::infinity() : std::numeric_limits<double>::quiet_NaN();
}

inline RatioReport ratio_report(const ClassDurations &speed1, const ClassDurations &speed2)
{
    RatioReport r;
    r.speed1 = speed1;
    r.speed2 = speed2;
    r.cp_notes = duration_ratio(speed1.cp_notes, speed2.cp_notes);
    r.transients = duration_ratio(speed1.transients, speed2.transients);
    r.silence = duration_ratio(speed1.silence, speed2.silence);
    r.overall = duration_ratio(speed1.overall(), speed2.overall());
    return r;
}

inline RatioReport ratio_report(const Segmentation &speed1, const Segmentation &speed2)
{
    validate(speed1);
    validate(speed2);
    return ratio_report(class_durations(speed1), class_durations(speed2));
}

} // namespace gamaka

#endif
