#include "eyetap/engine.hpp"

#include <type_traits>

namespace eyetap {

using nlohmann::json;

namespace {

json pt(Point p) { return json::array({p.x, p.y}); }

}  // namespace

json task_geometry(const TaskSpec& spec) {
    json j{{"name", task_name(spec)}};
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, MatrixSpec>) {
                const auto layout = gen_matrix_level(s);
                j["cols"] = s.cols;
                j["rows"] = s.rows;
                j["level"] = s.level;
                json cells = json::array();
                for (const auto& c : layout.cells) cells.push_back(to_json(c));
                j["cells"] = cells;
                j["order"] = layout.order;
            } else if constexpr (std::is_same_v<T, DartSpec>) {
                j["ring_radii"] = s.ring_radii;
                j["inter_trial_ms"] = s.inter_trial_ms;
                json centers = json::array();
                for (const auto& c : gen_dart_centers(s)) centers.push_back(pt(c));
                j["centers"] = centers;
            } else {
                j["kind"] = to_string(s.kind);
                json conds = json::array();
                for (const auto& c : gen_fitts_sequence(s)) {
                    json targets = json::array();
                    for (const auto& t : c.targets) targets.push_back(to_json(t));
                    json trials = json::array();
                    for (const auto& t : c.trials) trials.push_back(t.target.id);
                    conds.push_back({{"index", c.index},
                                     {"distance", c.distance},
                                     {"width", c.width},
                                     {"targets", targets},
                                     {"start_target", c.start_target.id},
                                     {"trials", trials}});
                }
                j["conditions"] = conds;
            }
        },
        spec);
    return j;
}

SessionHeader make_header(const SessionConfig& cfg) {
    SessionHeader h;
    for (const auto& [k, v] : to_pairs(cfg)) h.config[k] = v;
    h.task = task_geometry(cfg.task_spec());
    return h;
}

SessionConfig config_from_header(const SessionHeader& header) {
    SessionConfig cfg;
    if (!header.config.is_object()) throw ParseError("header config is not an object");
    for (const auto& [k, v] : header.config.items()) {
        if (!v.is_string()) throw ParseError("header config value for '" + k + "' is not a string");
        apply_setting(cfg, k, v.get<std::string>());
    }
    return cfg;
}

Engine::Engine(SessionConfig cfg, SessionHeader header)
    : cfg_((cfg.validate(), std::move(cfg))),
      runner_(make_task_runner(cfg_.task_spec())),
      detector_(cfg_.detector) {
    log_.header = std::move(header);
    dwell_.threshold_ms = cfg_.dwell_threshold_ms;
}

Millis Engine::stamp(Millis t, const char* what) {
    if (finished_) throw InvalidState(std::string("session already finished (") + what + ")");
    if (!started_) throw InvalidState(std::string("session not started (") + what + ")");
    if (t < last_t_) {
        throw ProtocolError(std::string(what) + " at t=" + std::to_string(t) + " precedes t=" + std::to_string(last_t_));
    }
    return t;
}

void Engine::record(LogEvent e) {
    last_t_ = std::max(last_t_, event_time(e));
    log_.events.push_back(e);
    if (listener_) listener_(log_.events.back());
}

void Engine::start(Millis now) {
    if (started_) throw InvalidState("session already started");
    started_ = true;
    last_t_ = now;
    apply(runner_->start(now), now);
}

void Engine::apply(const std::vector<TaskEvent>& events, Millis now) {
    if (events.empty()) return;
    ++version_;
    dwell_ = DwellState{};
    dwell_.threshold_ms = cfg_.dwell_threshold_ms;
    for (const auto& ev : events) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, TaskShown>) record(TaskShownRecord{now, e});
                else if constexpr (std::is_same_v<T, JudgeOutcome>) record(JudgeRecord{now, e});
                else record(LevelCompleteRecord{now, e});
            },
            ev);
    }
}

void Engine::select(const SelectionEvent& sel, Millis now) {
    record(SelectionRecord{now, sel});
    apply(runner_->on_selection(sel, now), now);
}

void Engine::on_gaze(GazeSample s) {
    stamp(s.t, "gaze");
    if (s.valid) {
        const Point p = cfg_.screen.clamp(s.pos());
        s.x = p.x;
        s.y = p.y;
    }
    record(s);
    gaze_.push(s);
    if (cfg_.technique != Technique::dwell || runner_->complete()) return;
    const auto r = dwell_step(dwell_, s, [this](Point p) { return runner_->hit_test(p); });
    dwell_ = r.state;
    if (r.selection) select(*r.selection, s.t);
}

void Engine::pulse_detected(const PulseEvent& p, Millis now) {
    record(PulseRecord{now, p});
    if (cfg_.technique != Technique::eyetap || runner_->complete()) return;
    if (auto sel = eyetap_step(gaze_, p)) {
        select(*sel, now);
    } else {
        record(WarningRecord{now, "pulse with no gaze sample; ignored"});
    }
}

void Engine::on_level(const LevelSample& level) {
    const Millis now = std::max(last_t_, level.t + cfg_.detector.frame_ms);
    stamp(now, "level");
    if (auto p = detector_.push(level)) pulse_detected(*p, now);
}

void Engine::flush_audio(Millis now) {
    stamp(now, "flush");
    if (auto p = detector_.flush()) pulse_detected(*p, now);
}

void Engine::on_pulse(const PulseRecord& rec) {
    stamp(rec.t, "pulse");
    pulse_detected(rec.pulse, rec.t);
}

void Engine::on_voice(const VoiceRecord& rec) {
    stamp(rec.t, "voice");
    record(rec);
    if (!rec.recognized || cfg_.technique != Technique::voice || runner_->complete()) return;
    if (auto sel = voice_select(gaze_, rec.t)) {
        select(*sel, rec.t);
    } else {
        record(WarningRecord{rec.t, "voice command with no gaze sample; ignored"});
    }
}

void Engine::on_click(const Click& c) {
    stamp(c.t, "click");
    record(c);
    if (cfg_.technique != Technique::pointer || runner_->complete()) return;
    const auto r = pointer_step(c, cfg_.screen);
    if (r.clamped) record(WarningRecord{c.t, "click outside the screen clamped to bounds"});
    select(r.selection, c.t);
}

void Engine::on_tlx(Millis t, const TlxScales& scales) {
    stamp(t, "tlx");
    scales.validate();
    record(TlxRecord{t, scales});
}

std::optional<Millis> Engine::next_deadline() const {
    if (finished_ || runner_->complete()) return std::nullopt;
    Millis d = runner_->block_start() + cfg_.timeout_ms;
    if (auto t = runner_->next_deadline()) d = std::min(d, *t);
    return d;
}

void Engine::tick(Millis now) {
    if (finished_ || !started_) return;
    stamp(now, "tick");
    if (auto d = runner_->next_deadline(); d && *d <= now) apply(runner_->tick(now), now);
    if (!runner_->complete() && now - runner_->block_start() >= cfg_.timeout_ms) {
        record(WarningRecord{now, "block timed out"});
        finish("timeout", now);
    }
}

std::optional<Millis> Engine::dwell_remaining(Millis now) const { return eyetap::dwell_remaining(dwell_, now); }

void Engine::finish(const std::string& status, Millis now) {
    if (finished_) return;
    now = std::max(now, last_t_);
    record(EndRecord{now, status});
    finished_ = true;
}

}  // namespace eyetap
