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

#ifndef GAMAKA_PITCH_TRACKING_HPP
#define GAMAKA_PITCH_TRACKING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <gamaka/audio_io.hpp>
#include <gamaka/error.hpp>

namespace gamaka
{

struct TrackerConfig {
    double fmin_hz = 60.0;
    double fmax_hz = 1000.0;
    /// Minimum normalized autocorrelation at the chosen lag.
    double voicing_threshold = 0.5;
    /// Frames quieter than this, relative to the loudest frame, are silent.
    double silence_db = -45.0;
    /// Sub-harmonic guard: the lowest lag within this fraction of the best peak wins.
    double octave_ratio = 0.9;
};

/// Per-frame f0 in Hz; 0 marks an unvoiced or silent frame.
struct PitchContour {
    std::vector<double> f;
    double frame_ms = default_frame_ms;

    [[nodiscard]] std::size_t size() const noexcept { return f.size(); }
    [[nodiscard]] bool voiced(std::size_t l) const noexcept { return f[l] > 0.0; }
};

/// Semitones relative to the tonic; unvoiced frames hold no value.
struct SemitoneContour {
    std::vector<std::optional<double>> n;
    double tonic_hz = 0.0;
    double frame_ms = default_frame_ms;

    [[nodiscard]] std::size_t size() const noexcept { return n.size(); }
    [[nodiscard]] bool voiced(std::size_t l) const noexcept { return n[l].has_value(); }
};

inline double hz_to_semitones(double f_hz, double tonic_hz)
{
    return 12.0 * std::log2(f_hz / tonic_hz);
}

inline double semitones_to_hz(double st, double tonic_hz)
{
    return tonic_hz * std::exp2(st / 12.0);
}

/// Normalized autocorrelation pitch estimate with parabolic lag refinement.
///
/// The frame is mean-removed, then for each lag in the search range the
/// overlapping parts are correlated and normalized by their energies. Among
/// the local maxima the lowest lag within `octave_ratio` of the strongest is
/// taken, which keeps sub-harmonic lags from winning on harmonic-rich tones.
/// Returns nothing when the strongest peak is below the voicing threshold.
inline std::optional<double> estimate_frame_pitch(std::span<const double> frame, int sample_rate,
                                                  const TrackerConfig &cfg = {})
{
    const std::size_t n = frame.size();
    if (n < 4 || sample_rate <= 0) {
        return std::nullopt;
    }
    double mean = 0.0;
    for (double v : frame) {
        mean += v;
    }
    mean /= static_cast<double>(n);
    std::vector<double> x(n);
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = frame[i] - mean;
        energy += x[i] * x[i];
    }
    if (energy <= 1e-20) {
        return std::nullopt;
    }

    const auto min_lag = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(sample_rate / cfg.fmax_hz)));
    const auto max_lag = std::min(static_cast<std::size_t>(std::ceil(sample_rate / cfg.fmin_hz)), n / 2);
    if (max_lag < min_lag + 2) {
        return std::nullopt;
    }

    // Prefix sums of x^2 give the per-lag normalizers in O(1).
    std::vector<double> sq(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        sq[i + 1] = sq[i] + x[i] * x[i];
    }
    // r[k] holds the lag min_lag - 1 + k so parabolic fits at the range ends have neighbours.
    const std::size_t lo = min_lag - 1;
    const std::size_t hi = max_lag + 1;
    std::vector<double> r(hi - lo + 1, 0.0);
    for (std::size_t lag = lo; lag <= hi && lag < n; ++lag) {
        double acc = 0.0;
        const std::size_t m = n - lag;
        for (std::size_t i = 0; i < m; ++i) {
            acc += x[i] * x[i + lag];
        }
        const double e0 = sq[m];
        const double e1 = sq[n] - sq[lag];
        r[lag - lo] = (e0 > 0.0 && e1 > 0.0) ? acc / std::sqrt(e0 * e1) : 0.0;
    }

    std::vector<std::size_t> peaks;
    double best = -1.0;
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
        const double c = r[lag - lo];
        if (c > r[lag - lo - 1] && c >= r[lag - lo + 1]) {
            peaks.push_back(lag);
            best = std::max(best, c);
        }
    }
    if (peaks.empty() || best < cfg.voicing_threshold) {
        return std::nullopt;
    }
    std::size_t chosen = peaks.front();
    for (std::size_t lag : peaks) {
        if (r[lag - lo] >= cfg.octave_ratio * best) {
            chosen = lag;
            break;
        }
    }

    const double a = r[chosen - lo - 1];
    const double b = r[chosen - lo];
    const double c = r[chosen - lo + 1];
    const double denom = a - 2.0 * b + c;
    double shift = 0.0;
    if (denom < 0.0) {
        shift = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
    }
    const double f = sample_rate / (static_cast<double>(chosen) + shift);
    if (f < cfg.fmin_hz || f > cfg.fmax_hz) {
        return std::nullopt;
    }
    return f;
}

/// One f0 value per frame. Frames below the silence floor or without a
/// periodicity peak come back as 0.
inline PitchContour track_pitch(const AudioBuffer &buf, const FrameGrid &grid, const TrackerConfig &cfg = {})
{
    PitchContour pc;
    pc.frame_ms = grid.frame_ms;
    pc.f.assign(grid.n_frames, 0.0);
    const auto energies = frame_energies(buf, grid);
    const double loudest = energies.empty() ? 0.0 : *std::max_element(energies.begin(), energies.end());
    if (loudest <= 0.0) {
        return pc;
    }
    const double floor = loudest * std::pow(10.0, cfg.silence_db / 20.0);
    for (std::size_t l = 0; l < grid.n_frames; ++l) {
        if (energies[l] <= 0.0 || energies[l] < floor) {
            continue;
        }
        if (auto f = estimate_frame_pitch(frame_samples(buf, grid, l), buf.sample_rate, cfg)) {
            pc.f[l] = *f;
        }
    }
    return pc;
}

inline SemitoneContour to_semitones(const PitchContour &pc, double tonic_hz)
{
    if (!(tonic_hz > 0.0)) {
        throw InvalidArgument("tonic must be positive");
    }
    SemitoneContour sc;
    sc.tonic_hz = tonic_hz;
    sc.frame_ms = pc.frame_ms;
    sc.n.resize(pc.size());
    for (std::size_t l = 0; l < pc.size(); ++l) {
        if (pc.voiced(l)) {
            sc.n[l] = hz_to_semitones(pc.f[l], tonic_hz);
        }
    }
    return sc;
}

} // namespace gamaka

#endif
