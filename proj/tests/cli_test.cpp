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

// Drives the gamaka executable end to end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include <gamaka/gamaka.hpp>

#include "test_support.hpp"

namespace
{

namespace fs = std::filesystem;
using namespace gamaka;

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string &args)
{
    const std::string cmd = std::string(GAMAKA_CLI_PATH) + " " + args + " 2>&1";
    Run r;
    FILE *p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, p)) r.out += buf;
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class Cli : public ::testing::Test
{
  protected:
    void SetUp() override { dir = gamaka::testing::temp_dir("cli"); }
    void TearDown() override { fs::remove_all(dir); }
    std::string path(const std::string &name) const { return (dir / name).string(); }

    std::string kampita()
    {
        const auto p = path("kampita.wav");
        const auto r = run("synth --preset kampita --out " + p);
        EXPECT_EQ(r.code, 0) << r.out;
        return p;
    }

    fs::path dir;
};

TEST_F(Cli, HelpListsDefaults)
{
    const auto r = run("segment --help");
    EXPECT_EQ(r.code, 0);
    for (const char *s : {"--frame-ms", "32", "--cp-tolerance", "0.3", "--cp-max-slope", "--snap-window-ms", "80"}) {
        EXPECT_NE(r.out.find(s), std::string::npos) << s;
    }
    const auto s = run("slowdown --help");
    EXPECT_NE(s.out.find("--cp-cap-ms"), std::string::npos);
    EXPECT_NE(s.out.find("250"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitTwo)
{
    const auto in = kampita();
    EXPECT_EQ(run("segment " + in + " --out " + path("s.json")).code, 2); // missing --tonic
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("slowdown " + in + " --tonic 125 --factor 0.5 --out " + path("o.wav")).code, 2);
}

TEST_F(Cli, SegmentKampita)
{
    const auto in = kampita();
    const auto r = run("segment " + in + " --tonic 125 --out " + path("seg.json") + " --csv " + path("c.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("cp_notes: 2 segments"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("transients: 1 segments"), std::string::npos) << r.out;
    const auto seg = segmentation_from_json(read_json_file(path("seg.json")));
    EXPECT_EQ(seg.counts().cp_notes, 2u);
    std::ifstream csv(path("c.csv"));
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "frame_index,time_s,f_hz,semitones");
}

TEST_F(Cli, SegmentSilentFile)
{
    write_wav(path("quiet.wav"), gamaka::testing::zeros(1.0));
    const auto r = run("segment " + path("quiet.wav") + " --tonic 146.8 --out " + path("s.json"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("cp_notes: 0 segments"), std::string::npos);
    EXPECT_NE(r.out.find("silence: 1 segments"), std::string::npos);
}

TEST_F(Cli, SlowdownReportsEffectiveFactor)
{
    const auto in = kampita();
    const auto r = run("slowdown " + in + " --tonic 125 -R 2 --out " + path("o.wav") + " --plan " + path("p.json"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("R = 2"), std::string::npos);
    const auto plan = plan_from_json(read_json_file(path("p.json")));
    const double eff = effective_factor(plan);
    EXPECT_GT(eff, 1.0);
    EXPECT_LT(eff, 2.0);
    EXPECT_EQ(read_wav(path("o.wav")).size(), plan.out_n_frames * 1411);
}

TEST_F(Cli, SlowdownIdentity)
{
    const auto in = kampita();
    ASSERT_EQ(run("slowdown " + in + " --tonic 125 -R 1 --out " + path("o.wav")).code, 0);
    const auto a = read_wav(in);
    const auto b = read_wav(path("o.wav"));
    ASSERT_EQ(b.size(), frame_aligned_prefix(a, frame_grid(a)).size());
    for (std::size_t i = 0; i < b.size(); ++i) ASSERT_EQ(a.samples[i], b.samples[i]);
}

TEST_F(Cli, SlowdownSteadyTone)
{
    write_wav(path("tone.wav"), gamaka::testing::tone(220.0, 2.0));
    const auto r = run("slowdown " + path("tone.wav") + " --tonic 220 -R 2 --out " + path("o.wav"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto pos = r.out.find("R_effective = ");
    ASSERT_NE(pos, std::string::npos);
    EXPECT_NEAR(std::stod(r.out.substr(pos + 14)), 2.0, 0.02);
}

TEST_F(Cli, SlowdownFractionalNeedsFlag)
{
    const auto in = kampita();
    EXPECT_EQ(run("slowdown " + in + " --tonic 125 -R 1.5 --out " + path("o.wav")).code, 1);
    EXPECT_FALSE(fs::exists(path("o.wav")));
    EXPECT_EQ(run("slowdown " + in + " --tonic 125 -R 1.5 --allow-fractional --out " + path("o.wav")).code, 0);
}

TEST_F(Cli, CompareWritesMatchedPair)
{
    const auto in = kampita();
    const auto r = run("compare " + in + " --tonic 125 -R 2 --outdir " + path("ab") + " --split-at 0.2");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto a = read_wav(path("ab/nonuniform.wav"));
    const auto b = read_wav(path("ab/uniform.wav"));
    EXPECT_LE(std::abs(static_cast<long>(a.size()) - static_cast<long>(b.size())), 1411);
    const auto m = read_json_file(path("ab/manifest.json"));
    EXPECT_EQ(m["schema_version"], 1);
    EXPECT_EQ(m["R"], 2.0);
    EXPECT_GT(m["R_effective"].get<double>(), 1.0);
    EXPECT_TRUE(fs::exists(path("ab/nonuniform_part2.wav")));
    EXPECT_TRUE(fs::exists(path("ab/uniform_part2.wav")));
}

TEST_F(Cli, RatiosOfSameFileAreOne)
{
    const auto in = kampita();
    const auto r = run("ratios " + in + " " + in + " --tonic 125 --out " + path("r.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    std::ifstream csv(path("r.csv"));
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    EXPECT_NE(row.find(",1.0000,1.0000,,1.0000"), std::string::npos) << row;
}

TEST_F(Cli, RatiosAcrossSpeedsSeparateClasses)
{
    // Speed 2 = the non-uniform R = 2 rendering of a two-note fixture, mixed sample rates.
    std::vector<gamaka::testing::Piece> pieces{{SegmentKind::cp_note, 20, 0, 0},
                                               {SegmentKind::transient, 6, 0, 5},
                                               {SegmentKind::cp_note, 20, 5, 5}};
    const auto fast = gamaka::testing::render_pieces(pieces, 146.8, 32.0, 22050);
    write_wav(path("fast.wav"), fast);
    ASSERT_EQ(run("slowdown " + path("fast.wav") + " --tonic 146.8 -R 2 --out " + path("slow.wav")).code, 0);
    const auto slow = read_wav(path("slow.wav"));
    std::vector<double> s44;
    for (double v : slow.samples) {
        s44.push_back(v);
        s44.push_back(v);
    }
    write_wav(path("slow44.wav"), AudioBuffer(s44, 44100));
    const auto r = run("ratios " + path("slow44.wav") + " " + path("fast.wav") + " --tonic 146.8 --out " + path("r.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto cp = r.out.find("ratio cp_notes: ");
    const auto tr = r.out.find("ratio transients: ");
    ASSERT_NE(cp, std::string::npos);
    ASSERT_NE(tr, std::string::npos);
    const double rc = std::stod(r.out.substr(cp + 16));
    const double rt = std::stod(r.out.substr(tr + 18));
    EXPECT_GT(rc, 1.7);
    EXPECT_LT(rt, 1.3);
}

TEST_F(Cli, SynthParameters)
{
    const auto r = run("synth --f0 200 --f1 200 --tT 0 --harmonic 2:0.5 --out " + path("s.wav"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(read_wav(path("s.wav")).size(), static_cast<std::size_t>(0.14 * 44100 + 0.5));
    EXPECT_EQ(run("synth --harmonic bogus --out " + path("x.wav")).code, 1);
    EXPECT_EQ(run("synth --harmonic 50:1 --sample-rate 8000 --out " + path("x.wav")).code, 1);
    EXPECT_FALSE(fs::exists(path("x.wav")));
}

TEST_F(Cli, SpreadSweep)
{
    const auto r = run("spread --preset kampita --windows 32,40,64 --out " + path("sw.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    std::ifstream csv(path("sw.csv"));
    std::string line;
    int n = 0;
    while (std::getline(csv, line)) ++n;
    EXPECT_EQ(n, 4);
}

TEST_F(Cli, RuntimeErrorsExitOneAndLeaveNoOutput)
{
    std::ofstream(path("bad.wav")) << "this is not audio";
    const auto r = run("segment " + path("bad.wav") + " --tonic 100 --out " + path("s.json"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("gamaka:"), std::string::npos);
    EXPECT_FALSE(fs::exists(path("s.json")));

    const auto in = kampita();
    const auto w = run("segment " + in + " --tonic 125 --out " + path("s.json") + " --csv /nonexistent/dir/c.csv");
    EXPECT_EQ(w.code, 1);
    EXPECT_FALSE(fs::exists(path("s.json")));
}

} // namespace
