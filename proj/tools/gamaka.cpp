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

// gamaka: segment, slow down and analyse monophonic melodic recordings.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <gamaka/gamaka.hpp>

namespace
{

namespace fs = std::filesystem;
using namespace gamaka;

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

/// Remembers every file a command writes and deletes them unless committed.
class OutputGuard
{
  public:
    OutputGuard() = default;
    OutputGuard(const OutputGuard &) = delete;
    OutputGuard &operator=(const OutputGuard &) = delete;
    ~OutputGuard()
    {
        if (committed_) {
            return;
        }
        for (const auto &p : paths_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

    const std::string &add(const std::string &path)
    {
        paths_.push_back(path);
        return paths_.back();
    }
    void commit() noexcept { committed_ = true; }

  private:
    std::vector<std::string> paths_;
    bool committed_ = false;
};

struct CommonOptions {
    double tonic_hz = 0.0;
    double frame_ms = default_frame_ms;
    SegmentationConfig seg;
    TrackerConfig tracker;
};

void add_analysis_flags(CLI::App *cmd, CommonOptions &o, bool tonic_required = true)
{
    auto *tonic = cmd->add_option("--tonic", o.tonic_hz, "Tonic frequency in Hz")->check(CLI::PositiveNumber);
    if (tonic_required) {
        tonic->required();
    }
    cmd->add_option("--frame-ms", o.frame_ms, "Analysis frame length in ms")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--cp-tolerance", o.seg.cp_tolerance, "CP-note band around the run mean, semitones")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--cp-max-slope", o.seg.cp_max_slope, "CP-note best-fit slope limit, semitones per second")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--cp-min-frames", o.seg.cp_min_frames, "Shortest CP-note in frames")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--snap-window-ms", o.seg.snap_window_ms, "Span checked around stationary points, ms")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--snap-tolerance", o.seg.snap_tolerance, "Distance to a scale peak for snapping, semitones")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--voicing-threshold", o.tracker.voicing_threshold, "Normalized autocorrelation voicing threshold")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--silence-db", o.tracker.silence_db, "Silence floor relative to the loudest frame, dB")
        ->capture_default_str();
    cmd->add_option("--fmin", o.tracker.fmin_hz, "Lowest trackable pitch, Hz")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--fmax", o.tracker.fmax_hz, "Highest trackable pitch, Hz")->capture_default_str()->check(CLI::PositiveNumber);
}

void print_summary(const Segmentation &seg)
{
    const auto c = seg.counts();
    const auto d = class_durations(seg);
    std::printf("cp_notes: %zu segments, %.3f s\n", c.cp_notes, d.cp_notes);
    std::printf("transients: %zu segments, %.3f s\n", c.transients, d.transients);
    std::printf("silence: %zu segments, %.3f s\n", c.silences, d.silence);
}

int run_segment(const std::string &input, const CommonOptions &o, const std::string &out_json,
                const std::string &out_csv)
{
    OutputGuard guard;
    const auto buf = read_wav(input);
    spdlog::info("read {} ({} samples at {} Hz)", input, buf.size(), buf.sample_rate);
    const auto a = analyze(buf, o.tonic_hz, o.seg, o.tracker, o.frame_ms);
    write_json_file(guard.add(out_json), to_json(a.segmentation));
    if (!out_csv.empty()) {
        std::ofstream csv(guard.add(out_csv));
        if (!csv) {
            throw IoError("cannot open " + out_csv + " for writing");
        }
        write_contour_csv(csv, a.pitch, a.semitones);
        if (!csv) {
            throw IoError("write failed for " + out_csv);
        }
    }
    print_summary(a.segmentation);
    guard.commit();
    return exit_ok;
}

SlowDownOptions slow_options(const CommonOptions &o, double factor, double cap, bool fractional)
{
    SlowDownOptions s;
    s.factor = factor;
    s.cp_cap_ms = cap;
    s.allow_fractional = fractional;
    s.frame_ms = o.frame_ms;
    s.segmentation = o.seg;
    s.tracker = o.tracker;
    return s;
}

int run_slowdown(const std::string &input, const CommonOptions &o, double factor, double cap, bool fractional,
                 const std::string &out_wav, const std::string &out_plan)
{
    OutputGuard guard;
    const auto buf = read_wav(input);
    const auto r = slow_down(buf, o.tonic_hz, slow_options(o, factor, cap, fractional));
    write_wav(guard.add(out_wav), r.output);
    if (!out_plan.empty()) {
        write_json_file(guard.add(out_plan), to_json(r.plan));
    }
    std::printf("R = %g\nR_effective = %.6f\n", r.plan.factor, effective_factor(r.plan));
    guard.commit();
    return exit_ok;
}

int run_compare(const std::string &input, const CommonOptions &o, double factor, double cap, bool fractional,
                const std::string &outdir, const std::vector<double> &splits)
{
    OutputGuard guard;
    const auto buf = read_wav(input);
    const auto c = compare(buf, o.tonic_hz, slow_options(o, factor, cap, fractional));
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (ec) {
        throw IoError("cannot create " + outdir + ": " + ec.message());
    }
    const auto path = [&](const std::string &name) { return (fs::path(outdir) / name).string(); };
    write_wav(guard.add(path("nonuniform.wav")), c.nonuniform.output);
    write_wav(guard.add(path("uniform.wav")), c.uniform);

    nlohmann::json manifest = {{"schema_version", schema_version},
                               {"input", input},
                               {"R", c.nonuniform.plan.factor},
                               {"R_effective", c.effective},
                               {"frame_ms", c.nonuniform.plan.frame_ms},
                               {"sample_rate", buf.sample_rate},
                               {"input_duration_s", c.original.duration_s()},
                               {"nonuniform_duration_s", c.nonuniform.output.duration_s()},
                               {"uniform_duration_s", c.uniform.duration_s()},
                               {"nonuniform", "nonuniform.wav"},
                               {"uniform", "uniform.wav"}};
    if (!splits.empty()) {
        // Split points are output times; the original is cut at the matching input times.
        std::vector<double> original_splits;
        for (double t : splits) {
            original_splits.push_back(t / c.effective);
        }
        auto clips = nlohmann::json::array();
        const auto a = split_at(c.nonuniform.output, splits);
        const auto b = split_at(c.uniform, splits);
        const auto s = split_at(c.original, original_splits);
        for (std::size_t i = 0; i < a.size(); ++i) {
            nlohmann::json clip;
            const auto part = std::to_string(i + 1);
            write_wav(guard.add(path("nonuniform_part" + part + ".wav")), a[i]);
            clip["nonuniform"] = "nonuniform_part" + part + ".wav";
            if (i < b.size()) {
                write_wav(guard.add(path("uniform_part" + part + ".wav")), b[i]);
                clip["uniform"] = "uniform_part" + part + ".wav";
            }
            if (i < s.size()) {
                write_wav(guard.add(path("original_part" + part + ".wav")), s[i]);
                clip["original"] = "original_part" + part + ".wav";
            }
            clips.push_back(std::move(clip));
        }
        manifest["split_at_s"] = splits;
        manifest["clips"] = std::move(clips);
    }
    write_json_file(guard.add(path("manifest.json")), manifest);
    std::printf("R = %g\nR_effective = %.6f\n", c.nonuniform.plan.factor, c.effective);
    guard.commit();
    return exit_ok;
}

int run_ratios(const std::string &speed1, const std::string &speed2, const CommonOptions &o,
               const std::string &out_csv, const std::string &label)
{
    OutputGuard guard;
    const auto s1 = segment(read_wav(speed1), o.tonic_hz, o.seg, o.tracker, o.frame_ms);
    const auto s2 = segment(read_wav(speed2), o.tonic_hz, o.seg, o.tracker, o.frame_ms);
    const auto r = ratio_report(s1, s2);
    {
        std::ofstream csv(guard.add(out_csv));
        if (!csv) {
            throw IoError("cannot open " + out_csv + " for writing");
        }
        write_ratio_csv(csv, label, r);
        if (!csv) {
            throw IoError("write failed for " + out_csv);
        }
    }
    std::printf("ratio cp_notes: %g\nratio transients: %g\nratio silence: %g\nratio overall: %g\n", r.cp_notes,
                r.transients, r.silence, r.overall);
    guard.commit();
    return exit_ok;
}

struct SynthOptions {
    std::string preset;
    GamakaParams params = GamakaParams::kampita();
    std::vector<std::string> harmonics;
    std::string shape = "linear";
    int sample_rate = 44100;
};

GamakaParams resolve_params(const SynthOptions &o)
{
    GamakaParams p = o.params;
    if (!o.preset.empty() && o.preset != "kampita") {
        throw InvalidArgument("unknown preset '" + o.preset + "'");
    }
    p.shape = o.shape == "raised-cosine" ? GlideShape::raised_cosine : GlideShape::linear;
    for (const auto &h : o.harmonics) {
        const auto colon = h.find(':');
        if (colon == std::string::npos) {
            throw InvalidArgument("harmonic '" + h + "' is not of the form MULTIPLE:AMPLITUDE");
        }
        try {
            p.harmonics.push_back({std::stod(h.substr(0, colon)), std::stod(h.substr(colon + 1))});
        } catch (const std::logic_error &) {
            throw InvalidArgument("harmonic '" + h + "' is not numeric");
        }
    }
    return p;
}

void add_synth_flags(CLI::App *cmd, SynthOptions &o)
{
    cmd->add_option("--preset", o.preset, "Parameter preset; 'kampita' is 125 -> 150 -> 125 Hz over 200 ms")
        ->check(CLI::IsMember({"kampita"}));
    cmd->add_option("--f0", o.params.f0_hz, "Base frequency, Hz")->capture_default_str();
    cmd->add_option("--f1", o.params.f1_hz, "Excursion frequency, Hz")->capture_default_str();
    cmd->add_option("--tc1", o.params.t_c1_s, "Leading hold, s")->capture_default_str();
    cmd->add_option("--tc2", o.params.t_c2_s, "Trailing hold, s")->capture_default_str();
    cmd->add_option("--tT", o.params.t_T_s, "Transition time f0 -> f1 -> f0, s")->capture_default_str();
    cmd->add_option("--amplitude", o.params.amplitude, "Peak amplitude")->capture_default_str();
    cmd->add_option("--phase", o.params.phase, "Initial phase, radians")->capture_default_str();
    cmd->add_option("--harmonic", o.harmonics, "Extra partial MULTIPLE:AMPLITUDE (repeatable)");
    cmd->add_option("--shape", o.shape, "Transition contour")
        ->capture_default_str()
        ->check(CLI::IsMember({"linear", "raised-cosine"}));
    cmd->add_option("--sample-rate", o.sample_rate, "Output sample rate, Hz")->capture_default_str()->check(CLI::PositiveNumber);
}

int run_synth(const SynthOptions &o, const std::string &out_wav)
{
    OutputGuard guard;
    const auto buf = synth_gamaka(resolve_params(o), o.sample_rate);
    write_wav(guard.add(out_wav), buf);
    std::printf("wrote %s: %.3f s at %d Hz\n", out_wav.c_str(), buf.duration_s(), buf.sample_rate);
    guard.commit();
    return exit_ok;
}

int run_spread(const SynthOptions &o, const std::vector<double> &windows, const std::string &out_csv)
{
    OutputGuard guard;
    const auto p = resolve_params(o);
    std::vector<SweepRow> rows;
    for (double w : windows) {
        const auto m = spectral_spread_demo(p, w, o.sample_rate);
        rows.push_back({w, rho_lower_bound(p.f0_hz, p.f1_hz, w, p.t_T_s * 1000.0).rho_lower, m.band_ratio, m.sweep_ratio});
    }
    std::ofstream csv(guard.add(out_csv));
    if (!csv) {
        throw IoError("cannot open " + out_csv + " for writing");
    }
    write_sweep_csv(csv, rows);
    csv.close();
    write_sweep_csv(std::cout, rows);
    guard.commit();
    return exit_ok;
}

void configure_logging()
{
    auto logger = spdlog::stderr_color_mt("gamaka");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char *lvl = std::getenv("GAMAKA_LOG")) {
        spdlog::set_level(spdlog::level::from_str(lvl));
    }
}

} // namespace

int main(int argc, char **argv)
{
    configure_logging();

    CLI::App app{"Segment monophonic melodic audio into CP-notes, transients and silence, and slow it down "
                 "without stretching transients."};
    app.require_subcommand(1);
    app.set_version_flag("--version", "gamaka 0.1.0");

    CommonOptions common;
    std::string input, input2, out, out_csv, plan_path, outdir, label = "recording";
    double factor = 2.0;
    double cap = default_cp_cap_ms;
    bool fractional = false;
    std::vector<double> splits;
    SynthOptions synth;
    std::vector<double> windows{32.0, 40.0, 64.0};

    auto *seg = app.add_subcommand("segment", "Label frames as CP-note, transient or silence");
    seg->add_option("input", input, "Input WAV")->required()->check(CLI::ExistingFile);
    add_analysis_flags(seg, common);
    seg->add_option("--out", out, "Segmentation JSON output")->required();
    seg->add_option("--csv", out_csv, "Optional pitch contour CSV output");

    auto add_scale_flags = [&](CLI::App *cmd) {
        cmd->add_option("--factor,-R", factor, "Slow-down factor R (integer unless --allow-fractional)")
            ->capture_default_str()
            ->check(CLI::Range(1.0, 1000.0));
        cmd->add_option("--cp-cap-ms", cap, "CP-notes shorter than this are stretched at most to it, ms")
            ->capture_default_str()
            ->check(CLI::NonNegativeNumber);
        cmd->add_flag("--allow-fractional", fractional, "Accept a non-integer R (CP extensions trimmed in proportion)");
    };

    auto *slow = app.add_subcommand("slowdown", "Slow down by R, leaving transients at their original length");
    slow->add_option("input", input, "Input WAV")->required()->check(CLI::ExistingFile);
    add_analysis_flags(slow, common);
    add_scale_flags(slow);
    slow->add_option("--out", out, "Output WAV")->required();
    slow->add_option("--plan", plan_path, "Optional plan JSON output");

    auto *cmp = app.add_subcommand("compare", "Render the non-uniform slow-down and a uniform stretch at the same R'");
    cmp->add_option("input", input, "Input WAV")->required()->check(CLI::ExistingFile);
    add_analysis_flags(cmp, common);
    add_scale_flags(cmp);
    cmp->add_option("--outdir", outdir, "Output directory")->required();
    cmp->add_option("--split-at", splits, "Cut every output at these output times, s (repeatable)");

    auto *rat = app.add_subcommand("ratios", "Per-class duration ratios between two renditions");
    rat->add_option("speed1", input, "First-speed WAV")->required()->check(CLI::ExistingFile);
    rat->add_option("speed2", input2, "Second-speed WAV")->required()->check(CLI::ExistingFile);
    add_analysis_flags(rat, common);
    rat->add_option("--out", out, "Ratio report CSV output")->required();
    rat->add_option("--label", label, "Row label in the report")->capture_default_str();

    auto *syn = app.add_subcommand("synth", "Write a synthetic gamaka fixture");
    add_synth_flags(syn, synth);
    syn->add_option("--out", out, "Output WAV")->required();

    auto *spr = app.add_subcommand("spread", "Window-size sweep of the spectral spread against the lower bound");
    add_synth_flags(spr, synth);
    spr->add_option("--windows", windows, "Window sizes, ms")->capture_default_str()->delimiter(',');
    spr->add_option("--out", out, "Sweep CSV output")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (seg->parsed()) {
            return run_segment(input, common, out, out_csv);
        }
        if (slow->parsed()) {
            return run_slowdown(input, common, factor, cap, fractional, out, plan_path);
        }
        if (cmp->parsed()) {
            return run_compare(input, common, factor, cap, fractional, outdir, splits);
        }
        if (rat->parsed()) {
            return run_ratios(input, input2, common, out, label);
        }
        if (syn->parsed()) {
            return run_synth(synth, out);
        }
        if (spr->parsed()) {
            return run_spread(synth, windows, out);
        }
    } catch (const std::exception &e) {
        std::cerr << "gamaka: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_usage;
}
