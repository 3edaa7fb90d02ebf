// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#include "stallwatch/anomaly.hpp"
#include "stallwatch/cli.hpp"
#include "stallwatch/synth.hpp"
#include "stallwatch/text.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace stallwatch {
namespace {

namespace fs = std::filesystem;

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "stallwatch");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("stallwatch_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        synth::ScenarioSpec spec;
        spec.video_id = "cam7";
        spec.duration_frames = 2400;
        synth::VehicleSpec stalled;
        stalled.box = BBoxd(0, 400, 60, 40);
        stalled.segments = {{200, Point2d(4, 0)}, {1, Point2d::Zero()}};
        synth::VehicleSpec through;
        through.box = BBoxd(1850, 600, 60, 40);
        through.segments = {{1, Point2d(-4, 0)}};
        spec.vehicles = {stalled, through};
        text::write_file_atomic(dir_ / "scenario.txt", synth::serialize_scenario(spec));
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string p(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, cli::kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"track", "--out", p("o")}).code, cli::kExitUsage);
    EXPECT_EQ(run({"track", "--in", p("missing.csv"), "--out", p("o")}).code, cli::kExitUsage);
    EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST_F(Cli, DataErrorsNameTheFile) {
    text::write_file_atomic(dir_ / "bad.csv", "0,1,2,3\n");
    const auto bad = run({"track", "--in", p("bad.csv"), "--out", p("o")});
    EXPECT_EQ(bad.code, cli::kExitData);
    EXPECT_NE(bad.err.find("bad.csv"), std::string::npos) << bad.err;

    ASSERT_EQ(run({"synth", "--in", p("scenario.txt"), "--out", p("syn")}).code, 0);
    const auto missing = run({"eval-mot", "--in", p("syn/gt.csv"), "--gt", p("nowhere.csv")});
    EXPECT_EQ(missing.code, cli::kExitData);
    EXPECT_NE(missing.err.find("nowhere.csv"), std::string::npos) << missing.err;
}

TEST_F(Cli, SynthAnomaliesEvalPipeline) {
    ASSERT_EQ(run({"synth", "--in", p("scenario.txt"), "--out", p("syn")}).code, 0);
    const auto anomalies = run({"anomalies", "--in", p("syn/detections.csv"), "--out", p("run")});
    ASSERT_EQ(anomalies.code, 0) << anomalies.err;
    const auto events = parse_events(dir_ / "run/events.csv");
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].video_id, "detections");
    EXPECT_NEAR(events[0].start_s, 200.0 / 30.0, 1e-9);

    // The same run under the scenario's video id scores perfectly against its ground truth.
    ASSERT_EQ(run({"anomalies", "--in", p("syn/detections.csv"), "--out", p("run2"), "--video-id", "cam7"}).code, 0);
    const auto eval = run({"eval-anomaly", "--in", p("run2/events.csv"), "--gt", p("syn/anomalies_gt.csv"), "--out",
                           p("eval")});
    ASSERT_EQ(eval.code, 0) << eval.err;
    const auto report = text::read_file(dir_ / "eval/anomaly_report.txt");
    EXPECT_NE(report.find("s4 = 1\n"), std::string::npos) << report;
    EXPECT_NE(report.find("f1 = 1\n"), std::string::npos) << report;

    const auto mot = run({"eval-mot", "--in", p("run2/tracks.csv"), "--gt", p("syn/gt.csv"), "--out", p("mot")});
    ASSERT_EQ(mot.code, 0) << mot.err;
    EXPECT_NE(mot.out.find("MOTA   1.0000"), std::string::npos) << mot.out;
    EXPECT_NE(text::read_file(dir_ / "mot/mot_report.txt").find("ids = 0\n"), std::string::npos);
}

TEST_F(Cli, ManifestListsFilesThatExist) {
    ASSERT_EQ(run({"synth", "--in", p("scenario.txt"), "--out", p("syn"), "--seed", "5"}).code, 0);
    ASSERT_EQ(run({"anomalies", "--in", p("syn/detections.csv"), "--out", p("run")}).code, 0);
    for (const auto* d : {"syn", "run"}) {
        const auto manifest = text::read_file(dir_ / d / "manifest.txt");
        int outputs = 0;
        std::istringstream lines(manifest);
        for (std::string line; std::getline(lines, line);) {
            if (line.rfind("output = ", 0) == 0) {
                ++outputs;
                EXPECT_TRUE(fs::exists(dir_ / d / line.substr(9))) << line;
            }
        }
        EXPECT_GE(outputs, 3);
        EXPECT_NE(manifest.find("timing."), std::string::npos);
    }
    EXPECT_NE(text::read_file(dir_ / "syn/manifest.txt").find("seed = 5\n"), std::string::npos);
}

TEST_F(Cli, AnomaliesTracksEqualTrackCommand) {
    ASSERT_EQ(run({"synth", "--in", p("scenario.txt"), "--out", p("syn")}).code, 0);
    ASSERT_EQ(run({"track", "--in", p("syn/detections.csv"), "--out", p("t")}).code, 0);
    ASSERT_EQ(run({"anomalies", "--in", p("syn/detections.csv"), "--out", p("a")}).code, 0);
    EXPECT_EQ(text::read_file(dir_ / "t/tracks.csv"), text::read_file(dir_ / "a/tracks.csv"));
}

TEST_F(Cli, BatchWritesOneDirectoryPerInput) {
    ASSERT_EQ(run({"synth", "--in", p("scenario.txt"), "--out", p("s1"), "--seed", "1"}).code, 0);
    ASSERT_EQ(run({"synth", "--in", p("scenario.txt"), "--out", p("s2"), "--seed", "2"}).code, 0);
    fs::copy_file(dir_ / "s1/detections.csv", dir_ / "north.csv");
    fs::copy_file(dir_ / "s2/detections.csv", dir_ / "south.csv");
    const auto batch =
        run({"anomalies", "--in", p("north.csv"), "--in", p("south.csv"), "--out", p("b"), "--jobs", "2"});
    ASSERT_EQ(batch.code, 0) << batch.err;
    for (const auto* stem : {"north", "south"}) {
        EXPECT_TRUE(fs::exists(dir_ / "b" / stem / "events.csv"));
        EXPECT_TRUE(fs::exists(dir_ / "b" / stem / "manifest.txt"));
        const auto events = parse_events(dir_ / "b" / stem / "events.csv");
        ASSERT_EQ(events.size(), 1u);
        EXPECT_EQ(events[0].video_id, stem);
    }
    ASSERT_EQ(run({"anomalies", "--in", p("north.csv"), "--out", p("single")}).code, 0);
    EXPECT_EQ(text::read_file(dir_ / "b/north/events.csv"), text::read_file(dir_ / "single/events.csv"));
}

TEST_F(Cli, ExecutableRuns) {
    const std::string cmd = std::string("\"") + STALLWATCH_CLI_PATH + "\" synth --in \"" + p("scenario.txt") +
                            "\" --out \"" + p("exe") + "\" > \"" + p("exe.log") + "\" 2>&1";
    EXPECT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(fs::exists(dir_ / "exe/detections.csv"));
    const std::string bad = std::string("\"") + STALLWATCH_CLI_PATH + "\" nonsense > /dev/null 2>&1";
    const int status = std::system(bad.c_str());
    ASSERT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), cli::kExitUsage);
}

}  // namespace
}  // namespace stallwatch
