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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gamaka/gamaka.hpp>

#include "test_support.hpp"

namespace
{

using namespace gamaka;
using namespace gamaka::testing;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char *f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Fixtures shared by criteria 1, 2a, 8 and 9.
struct Fixture {
    AudioBuffer audio;
    double tonic = 146.8;
};

std::vector<Fixture> random_fixtures(std::size_t count, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_int_distribution<std::size_t> notes(3, 6);
    std::uniform_real_distribution<double> tonic(110.0, 180.0);
    std::vector<Fixture> out;
    for (std::size_t i = 0; i < count; ++i) {
        const double t = tonic(rng);
        out.push_back({render_pieces(random_pieces(rng, notes(rng)), t), t});
    }
    return out;
}

// 1. Transients keep their length in frames, and their samples, under slow-down.
Outcome transient_preservation()
{
    const auto t0 = Clock::now();
    const auto fixtures = random_fixtures(100, 2024);
    std::mt19937 rng(7);
    std::size_t transients = 0, violations = 0, with_transient = 0;
    for (const auto &f : fixtures) {
        const int R = 2 + static_cast<int>(rng() % 3);
        const auto r = slow_down(f.audio, f.tonic, with_factor(static_cast<double>(R)));
        const std::size_t fl = r.analysis.grid.frame_len_samples;
        bool any = false;
        // Merged consecutive transients are compared against the input frames they cover.
        for (const auto &e : r.plan.entries) {
            if (e.kind != SegmentKind::transient) continue;
            any = true;
            ++transients;
            bool ok = e.out_length() == e.in_length();
            for (std::size_t i = 0; ok && i < e.in_length() * fl; ++i) {
                ok = r.output.samples[e.out_start * fl + i] == std::clamp(f.audio.samples[e.in_start * fl + i], -1.0, 1.0);
            }
            violations += !ok;
        }
        with_transient += any;
    }
    const double secs = seconds_since(t0);
    return {violations == 0 && with_transient > 0 && secs < 30.0,
            fmt("%zu transients in %zu/100 fixtures, %zu length or sample mismatches (tol 0 frames), %.1f s (< 30 s)",
                transients, with_transient, violations, secs)};
}

// Durations of a pieces list, with CP lengths chosen above the 250 ms cap.
std::vector<Piece> tuned_mix()
{
    // Four notes of 23 frames joined by three 10-frame glides. The outer frame
    // of each glide stays within the note tolerance and joins the note, so
    // 24 of 122 frames are transient: R' = 2 - 24/122 = 1.803 at R = 2.
    std::vector<Piece> p;
    const double st[] = {0.0, 5.0, 2.0, 7.0};
    for (int k = 0; k < 4; ++k) {
        p.push_back({SegmentKind::cp_note, 23, st[k], st[k]});
        if (k < 3) p.push_back({SegmentKind::transient, 10, st[k], st[k + 1]});
    }
    return p;
}

// 2. Effective factor: 1 < R' < R with transients; a tuned mix reaches 1.79..1.81; all-CP gives R.
Outcome effective_factor_property()
{
    const auto fixtures = random_fixtures(30, 99);
    std::size_t checked = 0, bad = 0;
    for (const auto &f : fixtures) {
        for (int R : {2, 3}) {
            const auto r = slow_down(f.audio, f.tonic, with_factor(static_cast<double>(R)));
            if (r.analysis.segmentation.frames_of(SegmentKind::transient) == 0) continue;
            ++checked;
            const double e = effective_factor(r.plan);
            bad += !(e > 1.0 && e < R);
        }
    }
    const auto tuned = render_pieces(tuned_mix(), 146.8);
    const double eb = effective_factor(slow_down(tuned, 146.8, with_factor(2.0)).plan);
    const auto steady = tone(146.8, 3.0, 0.5, {1.0, 0.5, 0.25});
    const double ec = effective_factor(slow_down(steady, 146.8, with_factor(2.0)).plan);
    const bool pass = checked > 0 && bad == 0 && eb >= 1.79 && eb <= 1.81 && std::abs(ec - 2.0) <= 0.02;
    return {pass, fmt("(a) %zu/%zu runs with 1 < R' < R; (b) tuned mix R' = %.4f in [1.79, 1.81]; (c) all-CP R' = %.4f "
                      "(2 +/- 0.02)",
                      checked - bad, checked, eb, ec)};
}

// 3. Window lower bound.
Outcome window_bound()
{
    double worst = 0.0;
    for (double w : {10.0, 20.0, 33.33, 40.0, 100.0}) {
        worst = std::max(worst, std::abs(rho_lower_bound(125, 150, w, 200).rho_lower - (1.0 + 0.2 * (w / 100.0))));
    }
    const double at_third = rho_lower_bound(125, 150, 33.33, 200).rho_lower;
    const double at_40 = rho_lower_bound(125, 150, 40, 200).rho_lower;
    return {worst <= 1e-12 && std::abs(at_third - 1.0667) <= 5e-4,
            fmt("max |rho_L - (1 + 0.2 W/100)| = %.1e (tol 1e-12); W=33.33 ms -> %.5f vs printed 1.0667 (tol 5e-4); "
                "W=40 ms -> %.4f",
                worst, at_third, at_40)};
}

// 4. Measured spread of a mid-transient window is at least the bound.
Outcome spectral_spread()
{
    const auto p = GamakaParams::kampita();
    bool pass = true;
    std::ostringstream os;
    for (double w : {32.0, 40.0, 64.0}) {
        const auto m = spectral_spread_demo(p, w, sr);
        const double rho = rho_lower_bound(p.f0_hz, p.f1_hz, w, p.t_T_s * 1000.0).rho_lower;
        pass = pass && m.band_ratio >= rho;
        os << fmt("W=%g ms: %.4f >= %.4f; ", w, m.band_ratio, rho);
    }
    return {pass, os.str() + "(-20 dB band hi/lo)"};
}

// 5. Greedy CP detection against brute-force enumeration.
Outcome segmentation_oracle()
{
    std::mt19937 rng(5150);
    std::size_t runs = 0, violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t L = 1 + rng() % 64;
        const auto n = random_contour(rng, L);
        const auto cps = detect_cp_notes(contour_of(n));
        std::vector<char> in_cp(L, 0);
        for (const auto &s : cps)
            for (std::size_t l = s.start; l <= s.end; ++l) in_cp[l] = 1;
        for (const auto &s : cps) {
            ++runs;
            const auto v = voiced_slice(n, s.start, s.end);
            if (!v || !oracle_cp_valid(*v, 32.0)) {
                ++violations;
                continue;
            }
            // Every strictly larger range [a, b] around the run, extending only into
            // voiced frames no other CP-note owns, must be invalid.
            for (std::size_t a = 0; a <= s.start; ++a) {
                bool free_left = true;
                for (std::size_t l = a; l < s.start; ++l) free_left = free_left && !in_cp[l];
                if (!free_left) continue;
                for (std::size_t b = s.end; b < L; ++b) {
                    if (b > s.end && in_cp[b]) break;
                    if (a == s.start && b == s.end) continue;
                    const auto w = voiced_slice(n, a, b);
                    if (w && oracle_cp_valid(*w, 32.0)) {
                        ++violations;
                        a = s.start + 1; // one count per run
                        break;
                    }
                }
            }
        }
    }
    return {violations == 0 && runs > 0,
            fmt("200 contours (<= 64 frames), %zu CP runs, %zu non-maximal or invalid (tol 0)", runs, violations)};
}

// 6. Tracker accuracy on harmonic tones between silences.
Outcome tracker_accuracy()
{
    const auto t0 = Clock::now();
    std::size_t voiced = 0, good = 0, silent = 0, silent_bad = 0;
    for (double f0 = 110.0; f0 <= 330.0 + 1e-9; f0 += 10.0) {
        const auto pad = zeros(0.25);
        const auto body = tone(f0, 1.0, 0.5, {1.0, 0.6, 0.4, 0.2});
        const auto buf = concat({pad, body, pad});
        const auto g = frame_grid(buf);
        const auto pc = track_pitch(buf, g);
        for (std::size_t l = 0; l < g.n_frames; ++l) {
            const bool in_tone = g.begin(l) >= pad.size() && g.end(l) <= pad.size() + body.size();
            const bool in_gap = g.end(l) <= pad.size() || g.begin(l) >= pad.size() + body.size();
            if (in_tone) {
                ++voiced;
                good += pc.f[l] > 0.0 && std::abs(12.0 * std::log2(pc.f[l] / f0)) <= 0.1;
            } else if (in_gap) {
                ++silent;
                silent_bad += pc.f[l] != 0.0;
            }
        }
    }
    const double secs = seconds_since(t0);
    const double frac = static_cast<double>(good) / static_cast<double>(voiced);
    return {frac >= 0.95 && silent_bad == 0 && secs < 10.0,
            fmt("%zu/%zu voiced frames within 0.1 st (%.1f%%, need 95%%); %zu/%zu silence frames nonzero; %.2f s (< 10 s)",
                good, voiced, 100.0 * frac, silent_bad, silent, secs)};
}

// 7. Two-speed ratio table recomputed from its checked-in durations.
Outcome table_ratios()
{
    const auto rows = read_two_speed_csv(std::string(GAMAKA_DATA_DIR) + "/table3.csv");
    bool pass = rows.size() == 6;
    std::ostringstream os;
    for (const auto &r : rows) {
        const auto rep = ratio_report(r.speed1, r.implied_speed2());
        const double d[] = {rep.cp_notes - r.ratio_cp, rep.transients - r.ratio_transient, rep.silence - r.ratio_silence,
                            rep.overall - r.ratio_overall};
        bool ok = true;
        for (double x : d) ok = ok && std::abs(x) <= 0.01;
        pass = pass && ok;
        os << fmt("%s %.2f/%.2f/%.2f/%.3f%s", r.raga.c_str(), rep.cp_notes, rep.transients, rep.silence, rep.overall,
                  ok ? "" : fmt(" (overall printed %.2f, off by %.3f)", r.ratio_overall, d[3]).c_str())
           << "; ";
    }
    os << "(tol 0.01)";
    return {pass, os.str()};
}

// 8. R = 1 is the identity; 16-bit WAV survives a round trip.
Outcome identity_and_round_trip()
{
    auto fixtures = random_fixtures(20, 8);
    fixtures.push_back({synth_gamaka(GamakaParams::kampita(), sr), 125.0});
    std::size_t exact = 0;
    for (const auto &f : fixtures) {
        const auto r = slow_down(f.audio, f.tonic, with_factor(1.0));
        exact += r.output.samples == frame_aligned_prefix(f.audio, r.analysis.grid).samples;
    }
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> d(-32768, 32767);
    std::vector<double> q(44100);
    for (auto &x : q) x = d(rng) / 32768.0;
    const auto bytes = encode_wav(AudioBuffer(q, sr));
    const auto back = decode_wav(bytes);
    const bool rt = back.samples == q && encode_wav(back) == bytes;
    return {exact == fixtures.size() && rt,
            fmt("R=1 bit-exact on %zu/%zu fixtures; PCM16 round trip %s", exact, fixtures.size(),
                rt ? "bit-exact" : "differs")};
}

// 9. Rendered CP-notes keep pitch and their envelope end points.
Outcome cp_preservation()
{
    auto fixtures = random_fixtures(20, 909);
    fixtures.push_back({synth_gamaka(GamakaParams::kampita(), sr), 125.0});
    std::size_t notes = 0, pitch_bad = 0, env_bad = 0;
    double worst_st = 0.0, worst_db = 0.0;
    for (const auto &f : fixtures) {
        const auto r = slow_down(f.audio, f.tonic, with_factor(2.0));
        const auto g_out = frame_grid(r.output);
        const auto sc_out = to_semitones(track_pitch(r.output, g_out), f.tonic);
        const auto &sc_in = r.analysis.semitones;
        for (const auto &e : r.plan.entries) {
            if (e.kind != SegmentKind::cp_note) continue;
            ++notes;
            auto mean = [](const SemitoneContour &sc, std::size_t a, std::size_t b) {
                double s = 0.0;
                std::size_t n = 0;
                for (std::size_t l = a; l <= b; ++l) {
                    if (sc.n[l]) {
                        s += *sc.n[l];
                        ++n;
                    }
                }
                return n ? s / static_cast<double>(n) : std::nan("");
            };
            const double dm = std::abs(mean(sc_out, e.out_start, e.out_end) - mean(sc_in, e.in_start, e.in_end));
            if (!(dm <= 0.3)) ++pitch_bad;
            worst_st = std::max(worst_st, std::isnan(dm) ? 99.0 : dm);
            const double a_in = frame_rms(f.audio, r.analysis.grid, e.in_start);
            const double b_in = frame_rms(f.audio, r.analysis.grid, e.in_end);
            const double a_out = frame_rms(r.output, g_out, e.out_start);
            const double b_out = frame_rms(r.output, g_out, e.out_end);
            const double dd = std::max(std::abs(db(a_out / a_in)), std::abs(db(b_out / b_in)));
            if (!(dd <= 1.0)) ++env_bad;
            worst_db = std::max(worst_db, dd);
        }
    }
    return {notes > 0 && pitch_bad == 0 && env_bad == 0,
            fmt("%zu CP-notes at R=2: worst mean shift %.3f st (tol 0.3), worst end-point RMS change %.3f dB (tol 1)",
                notes, worst_st, worst_db)};
}

// 10. Stimulus protocol for the listening comparison.
Outcome listening_protocol()
{
    const auto buf = render_pieces(tuned_mix(), 146.8);
    const auto c = compare(buf, 146.8, with_factor(2.0));
    const double fl = static_cast<double>(c.nonuniform.analysis.grid.frame_len_samples);
    const double diff = std::abs(static_cast<double>(c.uniform.size()) - static_cast<double>(c.nonuniform.output.size()));
    const std::vector<double> cuts{1.0, 2.5};
    const auto a = split_at(c.nonuniform.output, cuts);
    const auto b = split_at(c.uniform, cuts);
    bool same_cuts = a.size() == b.size();
    for (std::size_t i = 0; same_cuts && i + 1 < a.size(); ++i) same_cuts = a[i].size() == b[i].size();
    return {diff <= fl && same_cuts,
            fmt("uniform baseline run at R' = %.4f, durations differ by %.0f samples (<= 1 frame), %zu clips cut at "
                "matching points; human preference study not reproduced",
                c.effective, diff, a.size())};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria{
        {"1 transient duration preserved", transient_preservation},
        {"2 effective factor", effective_factor_property},
        {"3 window lower bound", window_bound},
        {"4 spectral spread >= bound", spectral_spread},
        {"5 greedy CP runs maximal", segmentation_oracle},
        {"6 pitch tracker accuracy", tracker_accuracy},
        {"7 two-speed ratio table", table_ratios},
        {"8 identity and WAV round trip", identity_and_round_trip},
        {"9 CP pitch and envelope kept", cp_preservation},
        {"10 comparison stimulus protocol", listening_protocol},
    };
    int failed = 0;
    for (const auto &[name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception &e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
