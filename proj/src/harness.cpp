#include "eyetap/harness.hpp"

#include "eyetap/report.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace eyetap {

InputEvent make_input(const GazeSample& s) { return {s.t, InputKind::gaze, s}; }
InputEvent make_input(const LevelSample& s) { return {s.t, InputKind::pulse, s}; }
InputEvent make_input(const PulseRecord& p) { return {p.t, InputKind::pulse, p}; }
InputEvent make_input(const VoiceRecord& v) { return {v.t, InputKind::voice, v}; }
InputEvent make_input(const Click& c) { return {c.t, InputKind::click, c}; }

std::vector<MergedEvent> merge_streams(const std::vector<std::vector<InputEvent>>& streams) {
    std::vector<MergedEvent> out;
    for (std::size_t s = 0; s < streams.size(); ++s) {
        const auto& stream = streams[s];
        for (std::size_t i = 0; i < stream.size(); ++i) {
            if (i > 0 && stream[i].t < stream[i - 1].t) {
                throw ProtocolError("stream " + std::to_string(s) + " is not time-ordered at index " +
                                    std::to_string(i));
            }
            out.push_back({stream[i], s});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const MergedEvent& a, const MergedEvent& b) {
        if (a.event.t != b.event.t) return a.event.t < b.event.t;
        if (a.event.kind != b.event.kind) return a.event.kind < b.event.kind;
        return a.stream < b.stream;
    });
    return out;
}

void advance_to(Engine& engine, Millis t) {
    while (!engine.finished()) {
        const auto d = engine.next_deadline();
        if (!d || *d > t) return;
        engine.tick(std::max(*d, engine.last_t()));
    }
}

void deliver(Engine& engine, const InputEvent& e) {
    advance_to(engine, e.t - 1);
    if (engine.finished()) return;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GazeSample>) engine.on_gaze(p);
            else if constexpr (std::is_same_v<T, LevelSample>) engine.on_level(p);
            else if constexpr (std::is_same_v<T, PulseRecord>) engine.on_pulse(p);
            else if constexpr (std::is_same_v<T, VoiceRecord>) engine.on_voice(p);
            else engine.on_click(p);
        },
        e.payload);
}

double simulated_threshold(const SessionConfig& cfg) {
    const double ambient = cfg.detector.to_dbfs(cfg.ambient_spl_db);
    AudioSynth synth(ambient, cfg.audio_sample_rate, derive_seed(cfg.audio_seed(), 1));
    std::vector<AudioFrame> frames;
    while (synth.now() < cfg.calibration_ms) frames.push_back(synth.next(cfg.detector.frame_ms));
    return calibrate_threshold(frames, cfg.calibration_margin_db, cfg.detector.frame_ms,
                               cfg.detector.level_floor_dbfs);
}

namespace {

/// Agent-driven inputs for one session; pops events in merge order.
class SimulatedLoop {
public:
    explicit SimulatedLoop(const SessionConfig& cfg, Engine& engine)
        : engine_(engine),
          agent_(cfg.resolved_participant(), cfg.screen),
          recognizer_(cfg.resolved_voice()),
          audio_(cfg.technique == Technique::eyetap),
          frame_ms_(cfg.detector.frame_ms),
          synth_(cfg.detector.to_dbfs(cfg.ambient_spl_db), cfg.audio_sample_rate, cfg.audio_seed()),
          meter_(cfg.detector.frame_ms, cfg.detector.level_floor_dbfs) {}

    void run() {
        engine_.start(0);
        version_ = engine_.view_version();
        plan(0, false);
        while (!engine_.finished() && !engine_.complete()) {
            step();
            if (engine_.complete()) break;
            if (engine_.view_version() != version_) {
                version_ = engine_.view_version();
                replan(now_);
            }
        }
        if (!engine_.finished()) engine_.finish(engine_.complete() ? "complete" : "incomplete", now_);
    }

private:
    enum Source { gaze, audio, voice_cmd, voice_rec, click, deadline, plan_end };

    struct Candidate {
        Millis t;
        int rank;  // merge priority at equal t
        Source src;
    };

    void step() {
        std::vector<Candidate> c;
        if (!gaze_.empty()) c.push_back({gaze_.front().t, 0, gaze});
        if (audio_) c.push_back({synth_.now() + frame_ms_, 1, audio});
        if (!voice_cmds_.empty()) c.push_back({voice_cmds_.front(), 2, voice_cmd});
        if (!recognitions_.empty()) c.push_back({recognitions_.front().t, 2, voice_rec});
        if (!clicks_.empty()) c.push_back({clicks_.front(), 3, click});
        if (auto d = engine_.next_deadline()) c.push_back({*d, 4, deadline});
        c.push_back({plan_end_, 5, plan_end});
        const auto next = *std::min_element(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
            return a.t != b.t ? a.t < b.t : a.rank < b.rank;
        });
        now_ = std::max(now_, next.t);

        switch (next.src) {
            case gaze:
                engine_.on_gaze(gaze_.front());
                gaze_.pop_front();
                break;
            case audio: {
                for (const auto& level : meter_.push(synth_.next(frame_ms_))) engine_.on_level(level);
                break;
            }
            case voice_cmd: {
                const Millis cmd = voice_cmds_.front();
                voice_cmds_.pop_front();
                if (auto r = recognizer_.recognize(cmd)) {
                    recognitions_.push_back({*r, cmd, true});
                    std::sort(recognitions_.begin(), recognitions_.end(),
                              [](const VoiceRecord& a, const VoiceRecord& b) { return a.t < b.t; });
                    // Wait for the recognizer before trying again.
                    extend_plan(*r + agent_.model().retry_ms);
                } else {
                    engine_.on_voice({cmd, cmd, false});
                }
                break;
            }
            case voice_rec:
                engine_.on_voice(recognitions_.front());
                recognitions_.pop_front();
                break;
            case click: {
                clicks_.pop_front();
                const Point p = agent_.fixation_point();
                engine_.on_click({now_, p.x, p.y});
                break;
            }
            case deadline:
                engine_.tick(now_);
                break;
            case plan_end:
                if (engine_.view().goal) {
                    plan(now_, true);
                } else {
                    hold(now_);
                }
                break;
        }
    }

    void extend_plan(Millis until) {
        if (until <= plan_end_) return;
        for (auto& s : agent_.hold(plan_end_, until)) gaze_.push_back(s);
        plan_end_ = until;
    }

    void hold(Millis now) {
        const auto d = engine_.next_deadline();
        const Millis until = d ? std::max(*d, now + 1) : now + agent_.model().retry_ms;
        for (auto& s : agent_.hold(now, until)) gaze_.push_back(s);
        plan_end_ = until;
    }

    void replan(Millis now) {
        agent_.interrupt(now);
        std::erase_if(gaze_, [now](const GazeSample& s) { return s.t > now; });
        std::erase_if(voice_cmds_, [now](Millis t) { return t > now; });
        std::erase_if(clicks_, [now](Millis t) { return t > now; });
        synth_.cancel_from(now);
        if (engine_.view().goal) {
            plan(now, false);
        } else {
            hold(now);
        }
    }

    void plan(Millis now, bool retry) {
        TaskView view = engine_.view();
        view.retry = retry;
        const Millis from = gaze_.empty() ? now : std::max(now, gaze_.back().t);
        const Schedule s = agent_.step(view, from);
        for (const auto& g : s.gaze) gaze_.push_back(g);
        for (const auto& a : s.actuations) {
            switch (a.kind) {
                case Actuation::pulse: synth_.schedule({a.t, a.duration_ms}, a.level_dbfs); break;
                case Actuation::voice: voice_cmds_.push_back(a.t); break;
                case Actuation::click: clicks_.push_back(a.t); break;
                case Actuation::dwell: break;
            }
        }
        plan_end_ = s.end;
    }

    Engine& engine_;
    Agent agent_;
    VoiceRecognizer recognizer_;
    bool audio_;
    Millis frame_ms_;
    AudioSynth synth_;
    LevelMeter meter_;
    std::deque<GazeSample> gaze_;
    std::deque<Millis> voice_cmds_;
    std::deque<VoiceRecord> recognitions_;
    std::deque<Millis> clicks_;
    Millis plan_end_ = 0;
    Millis now_ = 0;
    std::uint64_t version_ = 0;
};

}  // namespace

SessionLog simulate_session(const SessionConfig& input) {
    input.validate();
    SessionConfig cfg = input;
    SessionHeader header = make_header(input);
    if (cfg.technique == Technique::eyetap && cfg.calibrate) {
        cfg.detector.threshold_dbfs = simulated_threshold(cfg);
        header.extra["threshold_dbfs"] = cfg.detector.threshold_dbfs;
    }
    Engine engine(cfg, std::move(header));
    SimulatedLoop(cfg, engine).run();
    return engine.take_log();
}

SessionLog replay_session(const SessionLog& log) {
    SessionConfig cfg = config_from_header(log.header);
    cfg.source = SourceKind::replay;
    if (cfg.replay_path.empty()) cfg.replay_path = "-";
    Engine engine(cfg, log.header);

    Millis start = 0;
    for (const auto& e : log.events) {
        if (std::holds_alternative<TaskShownRecord>(e)) {
            start = event_time(e);
            break;
        }
    }
    engine.start(start);
    const auto streams = replay(log);
    for (const auto& e : streams.ordered) {
        if (engine.finished() || engine.complete()) break;
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, GazeSample> || std::is_same_v<T, PulseRecord> ||
                              std::is_same_v<T, VoiceRecord> || std::is_same_v<T, Click>) {
                    deliver(engine, make_input(p));
                }
            },
            e);
    }
    const Millis end_t = log.events.empty() ? start : event_time(log.events.back());
    if (!engine.finished() && !engine.complete()) advance_to(engine, end_t);
    if (!engine.finished()) {
        std::string status = engine.complete() ? "complete" : log.status();
        engine.finish(status, engine.complete() ? engine.last_t() : end_t);
    }
    return engine.take_log();
}

SessionLog run_session(const SessionConfig& cfg) {
    cfg.validate();
    switch (cfg.source) {
        case SourceKind::simulated: return simulate_session(cfg);
        case SourceKind::replay: return replay_session(read_session_log(cfg.replay_path));
        case SourceKind::live: throw InvalidSpec("live sessions are served with serve_live");
    }
    throw InvalidState("unreachable source kind");
}

// --- studies -------------------------------------------------------------------

std::string StudyTask::label() const {
    if (kind == TaskKind::matrix) return "matrix-l" + std::to_string(level);
    return std::string(to_string(kind));
}

void StudyPlan::validate() const {
    if (techniques.empty()) throw InvalidSpec("study plan has no techniques");
    if (tasks.empty()) throw InvalidSpec("study plan has no tasks");
    if (participant_seeds.empty()) throw InvalidSpec("study plan has no participants");
    for (const auto& c : study_cells(*this)) c.cfg.validate();
}

namespace {

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw InvalidInput("empty list item");
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::vector<StudyTask> parse_tasks(const std::string& v) {
    std::vector<StudyTask> out;
    for (const auto& item : split_list(v)) {
        const auto colon = item.find(':');
        const TaskKind kind = parse_task_kind(item.substr(0, colon));
        if (colon == std::string::npos) {
            out.push_back({kind, 1});
            continue;
        }
        if (kind != TaskKind::matrix) throw InvalidInput("only matrix tasks take levels: '" + item + "'");
        const std::string levels = item.substr(colon + 1);
        const auto dash = levels.find('-');
        const int lo = std::stoi(levels.substr(0, dash));
        const int hi = dash == std::string::npos ? lo : std::stoi(levels.substr(dash + 1));
        if (lo > hi) throw InvalidInput("empty level range '" + levels + "'");
        matrix_target_count(lo);
        matrix_target_count(hi);
        for (int l = lo; l <= hi; ++l) out.push_back({kind, l});
    }
    return out;
}

}  // namespace

StudyPlan parse_study_plan(const std::string& text) {
    StudyPlan plan;
    bool have_tasks = false;
    for (const auto& [key, vl] : parse_pairs(text)) {
        const auto& [value, line] = vl;
        try {
            if (key == "techniques") {
                plan.techniques.clear();
                for (const auto& t : split_list(value)) plan.techniques.push_back(parse_technique(t));
            } else if (key == "tasks") {
                plan.tasks = parse_tasks(value);
                have_tasks = true;
            } else if (key == "seeds") {
                plan.participant_seeds.clear();
                for (const auto& s : split_list(value)) plan.participant_seeds.push_back(std::stoull(s));
            } else if (key == "participants") {
                const int n = std::stoi(value);
                if (n <= 0) throw InvalidInput("participants must be positive");
                plan.participant_seeds.clear();
                for (int i = 1; i <= n; ++i) plan.participant_seeds.push_back(static_cast<std::uint64_t>(i));
            } else if (key == "seed") {
                plan.seed = std::stoull(value);
            } else {
                apply_setting(plan.base, key, value);
            }
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line);
        } catch (const std::exception& e) {
            throw ParseError("field '" + key + "': " + e.what(), line);
        }
    }
    if (!have_tasks) plan.tasks = parse_tasks("matrix:1-5");
    return plan;
}

StudyPlan load_study_plan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read plan file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_study_plan(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::vector<std::vector<Technique>> technique_orders(const StudyPlan& plan) {
    std::vector<std::vector<Technique>> out;
    for (std::size_t p = 0; p < plan.participant_seeds.size(); ++p) {
        auto order = plan.techniques;
        Rng rng(derive_seed(plan.seed, p));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        out.push_back(order);
    }
    return out;
}

std::vector<StudyCell> study_cells(const StudyPlan& plan) {
    std::vector<StudyCell> cells;
    const auto orders = technique_orders(plan);
    for (std::size_t p = 0; p < orders.size(); ++p) {
        for (std::size_t o = 0; o < orders[p].size(); ++o) {
            for (std::size_t k = 0; k < plan.tasks.size(); ++k) {
                StudyCell c;
                c.participant = static_cast<int>(p);
                c.order = static_cast<int>(o);
                c.technique = orders[p][o];
                c.task = plan.tasks[k];
                c.cfg = plan.base;
                c.cfg.source = SourceKind::simulated;
                c.cfg.technique = c.technique;
                c.cfg.task = c.task.kind;
                if (c.task.kind == TaskKind::matrix) c.cfg.matrix.level = c.task.level;
                c.cfg.participant_id = "p" + std::to_string(p + 1);
                c.cfg.seed = derive_seed(plan.participant_seeds[p],
                                         static_cast<std::uint64_t>(c.technique) * 1000 + k);
                c.log_name = c.cfg.participant_id + "_" + std::to_string(o) + "_" +
                             std::string(to_string(c.technique)) + "_" + c.task.label() + ".jsonl";
                cells.push_back(std::move(c));
            }
        }
    }
    return cells;
}

StudyResult run_study(const StudyPlan& plan, const std::filesystem::path& out_dir, int jobs,
                      const Progress& progress) {
    plan.validate();
    const auto cells = study_cells(plan);
    const auto log_dir = out_dir / "logs";
    std::filesystem::create_directories(log_dir);

    StudyResult result;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const auto& c = cells[i];
            try {
                SessionLog log = simulate_session(c.cfg);
                log.header.extra["participant"] = c.cfg.participant_id;
                log.header.extra["order"] = c.order;
                write_session_log(log_dir / c.log_name, log);
                std::lock_guard lock(mu);
                if (progress) progress(c.log_name + ": " + log.status());
            } catch (const std::exception& e) {
                std::lock_guard lock(mu);
                result.failures.push_back(c.log_name + ": " + e.what());
                if (progress) progress(c.log_name + ": FAILED " + e.what());
            }
        }
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
    std::vector<std::thread> threads;
    for (int i = 1; i < n; ++i) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    std::sort(result.failures.begin(), result.failures.end());
    for (const auto& c : cells) {
        if (std::filesystem::exists(log_dir / c.log_name)) result.logs.push_back(log_dir / c.log_name);
    }
    write_report(analyze_logs(load_logs(log_dir)), out_dir);
    if (!result.failures.empty()) {
        std::ofstream f(out_dir / "failures.txt");
        for (const auto& m : result.failures) f << m << '\n';
    }
    return result;
}

}  // namespace eyetap
