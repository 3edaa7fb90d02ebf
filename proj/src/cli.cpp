// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#include "stallwatch/cli.hpp"

#include "stallwatch/anomaly.hpp"
#include "stallwatch/association.hpp"
#include "stallwatch/config.hpp"
#include "stallwatch/ingest.hpp"
#include "stallwatch/metrics.hpp"
#include "stallwatch/roi.hpp"
#include "stallwatch/synth.hpp"
#include "stallwatch/text.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace stallwatch::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormatVersion = "1";

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - start_).count();
        start_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Options {
    std::vector<std::string> inputs;
    std::string gt;
    std::string config;
    std::string out;
    std::string video_id;
    std::string roi;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
};

EngineConfig config_from(const Options& o, std::ostream& err) {
    EngineConfig cfg = o.config.empty() ? EngineConfig{} : load_config(o.config);
    for (const auto& w : config_warnings(cfg)) {
        err << "warning: " << w << '\n';
    }
    return cfg;
}

void write_output(RunManifest& m, const std::string& name, const std::string& contents) {
    text::write_file_atomic(m.output_dir / name, contents);
    m.outputs.push_back(name);
}

std::string video_id_for(const Options& o, const fs::path& input) {
    return o.video_id.empty() || o.inputs.size() > 1 ? input.stem().string() : o.video_id;
}

// One video: detections -> tracks (and optionally events).
void run_video(const std::string& command, const fs::path& input, const fs::path& out_dir, const Options& o,
               const EngineConfig& cfg) {
    RunManifest m;
    m.command = command;
    m.inputs = {input};
    m.config = o.config;
    m.output_dir = out_dir;
    fs::create_directories(out_dir);

    Stopwatch clock;
    const auto detections = parse_detections(input);
    m.timings_s.emplace_back("ingest", clock.lap());

    const auto tracks = track_detections(detections, cfg);
    const double track_s = clock.lap();
    m.timings_s.emplace_back("track", track_s);
    const int frames = detections.empty() ? 0 : detections.back().frame - detections.front().frame + 1;
    m.extra.emplace_back("frames", std::to_string(frames));
    m.extra.emplace_back("tracks", std::to_string(tracks.size()));
    m.extra.emplace_back("hz", text::format(track_s > 0.0 ? frames / track_s : 0.0));

    write_output(m, "config.txt", to_string(cfg));
    write_output(m, "tracks.csv", serialize_tracks(tracks));

    if (command == "anomalies") {
        const auto video_id = video_id_for(o, input);
        std::optional<RegionOfInterest> roi;
        if (!o.roi.empty()) {
            roi = load_roi(o.roi);
            m.inputs.push_back(o.roi);
        }
        clock.lap();
        const auto result = analyze_anomalies(tracks, cfg, roi, video_id);
        m.timings_s.emplace_back("anomaly", clock.lap());
        m.extra.emplace_back("video_id", video_id);
        m.extra.emplace_back("events", std::to_string(result.events.size()));
        write_output(m, "trajectories.csv", serialize_tracks(result.trajectories));
        write_output(m, "events.csv", serialize_events(result.events));
        write_output(m, "roi.txt", serialize_roi(result.roi));
    }
    m.write();
}

int run_videos(const std::string& command, const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = config_from(o, err);
    const fs::path out_dir(o.out);
    const bool many = o.inputs.size() > 1;

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::vector<std::string> failures;
    auto worker = [&] {
        for (std::size_t i = next++; i < o.inputs.size(); i = next++) {
            const fs::path input(o.inputs[i]);
            try {
                run_video(command, input, many ? out_dir / input.stem() : out_dir, o, cfg);
            } catch (const std::exception& e) {
                std::lock_guard lock(mu);
                failures.push_back(e.what());
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(o.jobs, static_cast<int>(o.inputs.size())));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    if (!failures.empty()) {
        for (const auto& f : failures) {
            err << "error: " << f << '\n';
        }
        return kExitData;
    }
    out << command << ": wrote " << out_dir.string() << '\n';
    return kExitOk;
}

int eval_mot(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = config_from(o, err);
    const auto gt = parse_mot_ground_truth(o.gt);
    const auto pred = parse_tracks(o.inputs.front());
    const auto report = clear_mot(gt, pred, cfg.mot_iou_threshold);
    out << to_table(report);
    if (!o.out.empty()) {
        RunManifest m;
        m.command = "eval-mot";
        m.inputs = {o.inputs.front(), o.gt};
        m.config = o.config;
        m.output_dir = o.out;
        fs::create_directories(m.output_dir);
        write_output(m, "mot_report.txt", to_key_value(report));
        m.write();
    }
    return kExitOk;
}

int eval_anomaly(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = config_from(o, err);
    const auto gt = parse_anomaly_ground_truth(o.gt);
    const auto pred = parse_events(o.inputs.front());
    const auto score = score_anomalies(gt, pred, cfg.anomaly_window_s);
    out << to_table(score);
    if (!o.out.empty()) {
        RunManifest m;
        m.command = "eval-anomaly";
        m.inputs = {o.inputs.front(), o.gt};
        m.config = o.config;
        m.output_dir = o.out;
        fs::create_directories(m.output_dir);
        write_output(m, "anomaly_report.txt", to_key_value(score));
        m.write();
    }
    return kExitOk;
}

int run_synth(const Options& o, std::ostream& out) {
    auto spec = synth::load_scenario(o.inputs.front());
    if (o.seed) {
        spec.rng_seed = *o.seed;
    }
    if (!o.video_id.empty()) {
        spec.video_id = o.video_id;
    }
    RunManifest m;
    m.command = "synth";
    m.inputs = {o.inputs.front()};
    m.output_dir = o.out;
    fs::create_directories(m.output_dir);
    Stopwatch clock;
    const auto data = synth::generate(spec);
    m.timings_s.emplace_back("generate", clock.lap());
    m.extra.emplace_back("seed", std::to_string(spec.rng_seed));
    m.extra.emplace_back("video_id", spec.video_id);
    write_output(m, "detections.csv", serialize_detections(data.detections));
    write_output(m, "gt.csv", serialize_mot_ground_truth(data.gt_tracks));
    write_output(m, "anomalies_gt.csv", serialize_anomaly_ground_truth(data.gt_anomalies));
    m.write();
    out << "synth: " << data.detections.size() << " detections, " << data.gt_anomalies.size()
        << " annotated stalls -> " << o.out << '\n';
    return kExitOk;
}

}  // namespace

std::string RunManifest::serialize() const {
    std::ostringstream out;
    out << "command = " << command << '\n';
    out << "format.detections = " << kFormatVersion << '\n'
        << "format.tracks = " << kFormatVersion << '\n'
        << "format.events = " << kFormatVersion << '\n';
    for (const auto& in : inputs) {
        out << "input = " << in.string() << '\n';
    }
    out << "config = " << (config.empty() ? std::string("(defaults)") : config.string()) << '\n';
    for (const auto& o : outputs) {
        out << "output = " << o << '\n';
    }
    for (const auto& [k, v] : extra) {
        out << k << " = " << v << '\n';
    }
    for (const auto& [stage, s] : timings_s) {
        out << "timing." << stage << "_s = " << text::format(s) << '\n';
    }
    return out.str();
}

void RunManifest::write() const { text::write_file_atomic(output_dir / "manifest.txt", serialize()); }

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Vehicle tracking and stalled-vehicle detection over precomputed detections", "stallwatch"};
    app.require_subcommand(1);

    Options o;
    std::uint64_t seed = 0;

    auto* track = app.add_subcommand("track", "detections -> tracks.csv");
    auto* anomalies = app.add_subcommand("anomalies", "detections -> tracks.csv, trajectories.csv, events.csv");
    for (auto* sub : {track, anomalies}) {
        sub->add_option("--in", o.inputs, "detection CSV file(s), one per video")->required()->check(CLI::ExistingFile);
        sub->add_option("--config", o.config, "engine config (key = value)");
        sub->add_option("--out", o.out, "run directory")->required();
        sub->add_option("--video-id", o.video_id, "video id (single input; default: input file stem)");
        sub->add_option("--jobs", o.jobs, "videos processed in parallel")->check(CLI::PositiveNumber);
    }
    anomalies->add_option("--roi", o.roi, "region polygon file (x,y per line) instead of the learned hull");

    auto* eval_mot_cmd = app.add_subcommand("eval-mot", "tracks.csv + ground truth -> CLEAR MOT report");
    auto* eval_anomaly_cmd = app.add_subcommand("eval-anomaly", "events.csv + ground truth -> S4 / F1 / NRMSE");
    for (auto* sub : {eval_mot_cmd, eval_anomaly_cmd}) {
        sub->add_option("--in", o.inputs, "predictions")->required()->expected(1);
        sub->add_option("--gt", o.gt, "ground truth")->required();
        sub->add_option("--config", o.config, "engine config (evaluation thresholds)");
        sub->add_option("--out", o.out, "directory for the machine-readable report");
    }

    auto* synth_cmd = app.add_subcommand("synth", "scenario spec -> detections.csv, gt.csv, anomalies_gt.csv");
    synth_cmd->add_option("--in", o.inputs, "scenario spec")->required()->expected(1);
    synth_cmd->add_option("--out", o.out, "output directory")->required();
    auto* seed_opt = synth_cmd->add_option("--seed", seed, "override the scenario seed");
    synth_cmd->add_option("--video-id", o.video_id, "override the scenario video id");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        if (argc <= 1) {
            err << app.help();
        }
        return kExitUsage;
    }
    if (seed_opt->count() > 0) {
        o.seed = seed;
    }

    try {
        if (track->parsed()) {
            return run_videos("track", o, out, err);
        }
        if (anomalies->parsed()) {
            return run_videos("anomalies", o, out, err);
        }
        if (eval_mot_cmd->parsed()) {
            return eval_mot(o, out, err);
        }
        if (eval_anomaly_cmd->parsed()) {
            return eval_anomaly(o, out, err);
        }
        if (synth_cmd->parsed()) {
            return run_synth(o, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace stallwatch::cli
