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

#ifndef GAMAKA_PIPELINE_HPP
#define GAMAKA_PIPELINE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include <gamaka/audio_io.hpp>
#include <gamaka/segmentation.hpp>
#include <gamaka/timescale.hpp>

namespace gamaka
{

struct SlowDownOptions {
    double factor = 2.0;
    double cp_cap_ms = default_cp_cap_ms;
    bool allow_fractional = false;
    double frame_ms = default_frame_ms;
    SegmentationConfig segmentation;
    TrackerConfig tracker;
};

struct SlowDownResult {
    Analysis analysis;
    ScalePlan plan;
    AudioBuffer output;
};

/// Segment, plan and render in one go.
inline SlowDownResult slow_down(const AudioBuffer &buf, double tonic_hz, const SlowDownOptions &opt)
{
    SlowDownResult r;
    r.analysis = analyze(buf, tonic_hz, opt.segmentation, opt.tracker, opt.frame_ms);
    const auto energies = frame_energies(buf, r.analysis.grid);
    r.plan = opt.allow_fractional
                 ? build_plan_fractional(r.analysis.segmentation, opt.factor, opt.cp_cap_ms, energies)
                 : build_plan(r.analysis.segmentation, opt.factor, opt.cp_cap_ms, energies);
    r.output = render(buf, r.analysis.segmentation, r.plan);
    return r;
}

struct Comparison {
    SlowDownResult nonuniform;
    AudioBuffer uniform;
    AudioBuffer original; // frame-aligned input both versions were made from
    double effective = 1.0;
};

/// Matched-duration A/B: the uniform baseline is run at the effective factor
/// the non-uniform algorithm achieved, on the same frame-aligned input.
inline Comparison compare(const AudioBuffer &buf, double tonic_hz, const SlowDownOptions &opt)
{
    Comparison c;
    c.nonuniform = slow_down(buf, tonic_hz, opt);
    c.effective = effective_factor(c.nonuniform.plan);
    c.original = frame_aligned_prefix(buf, c.nonuniform.analysis.grid);
    c.uniform = uniform_scale(c.original, c.effective);
    return c;
}

/// Cuts a buffer at the given times (seconds); returns one piece per interval.
inline std::vector<AudioBuffer> split_at(const AudioBuffer &buf, std::vector<double> times_s)
{
    std::vector<AudioBuffer> parts;
    std::sort(times_s.begin(), times_s.end());
    std::size_t from = 0;
    for (double t : times_s) {
        const auto at = std::min(buf.size(), static_cast<std::size_t>(std::llround(std::max(0.0, t) * buf.sample_rate)));
        if (at > from) {
            parts.emplace_back(std::vector<double>(buf.samples.begin() + static_cast<std::ptrdiff_t>(from),
                                                   buf.samples.begin() + static_cast<std::ptrdiff_t>(at)),
                               buf.sample_rate);
            from = at;
        }
    }
    if (from < buf.size()) {
        parts.emplace_back(std::vector<double>(buf.samples.begin() + static_cast<std::ptrdiff_t>(from), buf.samples.end()),
                           buf.sample_rate);
    }
    return parts;
}

} // namespace gamaka

#endif
