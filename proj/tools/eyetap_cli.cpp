// eyetap: simulate, study, analyze, calibrate, serve, replay.
// Data goes to files (or stdout for calibrate); progress and diagnostics to stderr.

#include "eyetap/harness.hpp"
#include "eyetap/live.hpp"
#include "eyetap/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>

namespace fs = std::filesystem;
using namespace eyetap;

namespace {

std::string default_out() {
    const char* env = std::getenv("EYETAP_OUT");
    return env && *env ? env : "out";
}

SessionConfig load(const std::string& path, const std::vector<std::string>& overrides) {
    SessionConfig cfg = path.empty() ? SessionConfig{} : load_config(path);
    for (const auto& kv : overrides) {
        const auto [k, v] = split_assignment(kv);
        try {
            apply_setting(cfg, k, v);
        } catch (const ParseError& e) {
            throw ParseError(std::string("--set ") + kv + ": " + e.what());
        }
    }
    return cfg;
}

std::vector<JudgeRecord> judgements(const SessionLog& log) {
    std::vector<JudgeRecord> out;
    for (const auto& e : log.events)
        if (const auto* j = std::get_if<JudgeRecord>(&e)) out.push_back(*j);
    return out;
}

std::string stamp_now() {
    const auto t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaze + acoustic pulse selection engine and experiment harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir = default_out(), plan_path, logs_dir, wav_path, log_path, host = "127.0.0.1";
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    double margin = 20.0;
    long frame_ms = 10;
    int port = 8765, jobs = 1;

    auto* sim = app.add_subcommand("simulate", "run one simulated session");
    sim->add_option("--config", config_path, "session config file")->check(CLI::ExistingFile);
    sim->add_option("--seed", seed, "session seed (overrides the config)");
    sim->add_option("--set", overrides, "key=value config override")->take_all();
    sim->add_option("--out", out_dir, "output directory (default $EYETAP_OUT or ./out)");

    auto* study = app.add_subcommand("study", "run techniques x tasks x participants");
    study->add_option("--plan", plan_path, "study plan file")->required()->check(CLI::ExistingFile);
    study->add_option("--out", out_dir, "output directory (default $EYETAP_OUT or ./out)");
    study->add_option("--jobs", jobs, "parallel sessions")->check(CLI::PositiveNumber);

    auto* analyze = app.add_subcommand("analyze", "recompute metrics from a log directory");
    analyze->add_option("--logs", logs_dir, "directory of .jsonl logs")->required()->check(CLI::ExistingDirectory);
    analyze->add_option("--out", out_dir, "report directory (default $EYETAP_OUT or ./out)");

    auto* calibrate = app.add_subcommand("calibrate", "print a detector threshold from ambient audio");
    calibrate->add_option("--wav", wav_path, "32-bit float mono WAV of ambient noise")->required()->check(CLI::ExistingFile);
    calibrate->add_option("--margin", margin, "dB above the ambient 95th percentile");
    calibrate->add_option("--frame-ms", frame_ms, "analysis window")->check(CLI::PositiveNumber);

    auto* serve = app.add_subcommand("serve", "serve one live session over TCP (NDJSON frames)");
    serve->add_option("--config", config_path, "session config file")->check(CLI::ExistingFile);
    serve->add_option("--set", overrides, "key=value config override")->take_all();
    serve->add_option("--port", port, "TCP port (0 picks one)");
    serve->add_option("--host", host, "listen address");
    serve->add_option("--out", out_dir, "output directory (default $EYETAP_OUT or ./out)");

    auto* rep = app.add_subcommand("replay", "re-run a log through a fresh engine");
    rep->add_option("--log", log_path, "session log")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", out_dir, "write the replayed log here when given explicitly");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*sim) {
            SessionConfig cfg = load(config_path, overrides);
            if (sim->count("--seed")) cfg.seed = seed;
            cfg.source = SourceKind::simulated;
            SessionLog log = run_session(cfg);
            log.header.wall_time = stamp_now();
            fs::create_directories(out_dir);
            const fs::path path = fs::path(out_dir) / (cfg.participant_id + "_" + std::string(to_string(cfg.technique)) +
                                                       "_" + std::string(to_string(cfg.task)) + "_s" +
                                                       std::to_string(cfg.seed) + ".jsonl");
            write_session_log(path, log);
            std::cerr << "wrote " << path.string() << " (" << log.status() << ", " << log.events.size()
                      << " events)\n";
            return log.complete() ? 0 : 2;
        }
        if (*study) {
            const StudyPlan plan = load_study_plan(plan_path);
            const auto res = run_study(plan, out_dir, jobs, [](const std::string& m) { std::cerr << m << '\n'; });
            std::cerr << "wrote " << res.logs.size() << " logs and the report to " << out_dir << '\n';
            for (const auto& f : res.failures) std::cerr << "failed: " << f << '\n';
            return res.failures.empty() ? 0 : 2;
        }
        if (*analyze) {
            write_report(analyze_logs(load_logs(logs_dir)), out_dir);
            std::cerr << "wrote report.json, trials.csv, conditions.csv to " << out_dir << '\n';
            return 0;
        }
        if (*calibrate) {
            const auto frames = read_wav(wav_path);
            const double thr = calibrate_threshold(frames, margin, frame_ms);
            std::printf("%.1f\n", thr);
            return 0;
        }
        if (*serve) {
            SessionConfig cfg = load(config_path, overrides);
            cfg.source = SourceKind::live;
            fs::create_directories(out_dir);
            const fs::path path = fs::path(out_dir) / (cfg.participant_id + "_live_" +
                                                       std::string(to_string(cfg.technique)) + "_" +
                                                       std::string(to_string(cfg.task)) + ".jsonl");
            SessionLog log = serve_live(
                cfg, port, {}, [&](int p) { std::cerr << "listening on " << host << ':' << p << '\n'; }, host);
            log.header.wall_time = stamp_now();
            write_session_log(path, log);
            std::cerr << "wrote " << path.string() << " (" << log.status() << ")\n";
            return 0;
        }
        if (*rep) {
            const SessionLog original = read_session_log(log_path);
            const SessionLog again = replay_session(original);
            const bool same = judgements(original) == judgements(again);
            if (rep->count("--out")) {
                fs::create_directories(out_dir);
                write_session_log(fs::path(out_dir) / fs::path(log_path).filename(), again);
            }
            std::cerr << "replayed " << judgements(again).size() << " judge outcomes: "
                      << (same ? "identical to the original" : "DIFFERENT from the original") << '\n';
            return same ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
