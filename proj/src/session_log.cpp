#include "eyetap/session_log.hpp"

#include <fstream>
#include <sstream>

namespace eyetap {

using nlohmann::json;

namespace {

json pt(Point p) { return json::array({p.x, p.y}); }

Point pt_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ParseError("expected [x, y]");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json trial_json(const TrialOutcome& t) {
    return {{"trial_id", t.trial_id}, {"condition", t.condition}, {"distance", t.distance},
            {"width", t.width},       {"start", pt(t.start)},     {"from", pt(t.from)},
            {"target", pt(t.target)}, {"endpoint", pt(t.endpoint)}, {"mt", t.movement_time},
            {"hit", t.hit},           {"errors", t.errors_in_trial}};
}

TrialOutcome trial_from(const json& j) {
    TrialOutcome t;
    t.trial_id = j.at("trial_id").get<int>();
    t.condition = j.at("condition").get<int>();
    t.distance = j.at("distance").get<double>();
    t.width = j.at("width").get<double>();
    t.start = pt_from(j.at("start"));
    t.from = pt_from(j.at("from"));
    t.target = pt_from(j.at("target"));
    t.endpoint = pt_from(j.at("endpoint"));
    t.movement_time = j.at("mt").get<Millis>();
    t.hit = j.at("hit").get<bool>();
    t.errors_in_trial = j.at("errors").get<int>();
    return t;
}

json header_json(const SessionHeader& h) {
    return {{"type", "header"}, {"version", h.version}, {"wall_time", h.wall_time},
            {"config", h.config}, {"task", h.task},     {"extra", h.extra}};
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

json to_json(const Target& t) {
    json j{{"id", t.id}, {"shape", to_string(t.shape)}, {"center", pt(t.center)}, {"barrier", t.is_barrier}};
    if (t.shape == Shape::circle) j["radius"] = t.radius;
    else j["size"] = pt(t.size);
    if (t.label) j["label"] = *t.label;
    return j;
}

Target target_from_json(const json& j) {
    Target t;
    t.id = j.at("id").get<int>();
    t.shape = parse_shape(j.at("shape").get<std::string>());
    t.center = pt_from(j.at("center"));
    t.is_barrier = j.at("barrier").get<bool>();
    if (t.shape == Shape::circle) t.radius = j.at("radius").get<double>();
    else t.size = pt_from(j.at("size"));
    if (j.contains("label")) t.label = j.at("label").get<int>();
    return t;
}

Millis event_time(const LogEvent& e) {
    return std::visit([](const auto& v) { return v.t; }, e);
}

std::string_view event_type(const LogEvent& e) {
    return std::visit(overloaded{
                          [](const GazeSample&) { return std::string_view("gaze"); },
                          [](const PulseRecord&) { return std::string_view("pulse"); },
                          [](const VoiceRecord&) { return std::string_view("voice"); },
                          [](const Click&) { return std::string_view("click"); },
                          [](const SelectionRecord&) { return std::string_view("selection"); },
                          [](const TaskShownRecord&) { return std::string_view("task_shown"); },
                          [](const JudgeRecord&) { return std::string_view("judge_outcome"); },
                          [](const LevelCompleteRecord&) { return std::string_view("level_complete"); },
                          [](const TlxRecord&) { return std::string_view("tlx"); },
                          [](const WarningRecord&) { return std::string_view("warning"); },
                          [](const EndRecord&) { return std::string_view("end"); },
                      },
                      e);
}

json to_json(const LogEvent& e) {
    json j{{"t", event_time(e)}, {"type", event_type(e)}};
    std::visit(overloaded{
                   [&](const GazeSample& g) {
                       j["x"] = g.x;
                       j["y"] = g.y;
                       j["valid"] = g.valid;
                   },
                   [&](const PulseRecord& p) {
                       j["onset"] = p.pulse.t_onset;
                       j["offset"] = p.pulse.t_offset;
                       j["peak_dbfs"] = p.pulse.peak_level_dbfs;
                   },
                   [&](const VoiceRecord& v) {
                       j["command_t"] = v.command_t;
                       j["recognized"] = v.recognized;
                   },
                   [&](const Click& c) {
                       j["x"] = c.x;
                       j["y"] = c.y;
                   },
                   [&](const SelectionRecord& s) {
                       j["sel_t"] = s.selection.t;
                       j["trigger_t"] = s.selection.trigger_t;
                       j["x"] = s.selection.x;
                       j["y"] = s.selection.y;
                       j["technique"] = to_string(s.selection.technique);
                   },
                   [&](const TaskShownRecord& s) {
                       j["block"] = s.shown.block;
                       j["step"] = s.shown.step;
                       j["goal"] = to_json(s.shown.goal);
                   },
                   [&](const JudgeRecord& r) {
                       const auto& o = r.outcome;
                       j["outcome"] = o.kind;
                       j["block"] = o.block;
                       j["sel_t"] = o.sel_t;
                       j["endpoint"] = pt(o.endpoint);
                       if (o.cell) j["cell"] = *o.cell;
                       if (o.ordinal) j["ordinal"] = *o.ordinal;
                       if (o.trial) j["trial"] = trial_json(*o.trial);
                       if (o.distance) j["distance"] = *o.distance;
                       if (o.center) j["center"] = pt(*o.center);
                   },
                   [&](const LevelCompleteRecord& l) {
                       j["block"] = l.block.block;
                       j["start_t"] = l.block.start_t;
                       j["end_t"] = l.block.end_t;
                       j["errors"] = l.block.errors;
                   },
                   [&](const TlxRecord& r) {
                       j["mental"] = r.scales.mental;
                       j["physical"] = r.scales.physical;
                       j["temporal"] = r.scales.temporal;
                       j["performance"] = r.scales.performance;
                       j["effort"] = r.scales.effort;
                       j["frustration"] = r.scales.frustration;
                   },
                   [&](const WarningRecord& w) { j["message"] = w.message; },
                   [&](const EndRecord& r) { j["status"] = r.status; },
               },
               e);
    return j;
}

LogEvent event_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    const auto t = j.at("t").get<Millis>();
    if (type == "gaze") return GazeSample{t, j.at("x").get<double>(), j.at("y").get<double>(), j.at("valid").get<bool>()};
    if (type == "pulse")
        return PulseRecord{t, {j.at("onset").get<Millis>(), j.at("offset").get<Millis>(), j.at("peak_dbfs").get<double>()}};
    if (type == "voice") return VoiceRecord{t, j.at("command_t").get<Millis>(), j.at("recognized").get<bool>()};
    if (type == "click") return Click{t, j.at("x").get<double>(), j.at("y").get<double>()};
    if (type == "selection") {
        SelectionEvent s{j.at("sel_t").get<Millis>(), j.at("x").get<double>(), j.at("y").get<double>(),
                         parse_technique(j.at("technique").get<std::string>()), j.at("trigger_t").get<Millis>()};
        return SelectionRecord{t, s};
    }
    if (type == "task_shown")
        return TaskShownRecord{t, {j.at("block").get<int>(), j.at("step").get<int>(), target_from_json(j.at("goal"))}};
    if (type == "judge_outcome") {
        JudgeOutcome o;
        o.kind = j.at("outcome").get<std::string>();
        o.block = j.at("block").get<int>();
        o.sel_t = j.at("sel_t").get<Millis>();
        o.endpoint = pt_from(j.at("endpoint"));
        if (j.contains("cell")) o.cell = j.at("cell").get<int>();
        if (j.contains("ordinal")) o.ordinal = j.at("ordinal").get<int>();
        if (j.contains("trial")) o.trial = trial_from(j.at("trial"));
        if (j.contains("distance")) o.distance = j.at("distance").get<double>();
        if (j.contains("center")) o.center = pt_from(j.at("center"));
        return JudgeRecord{t, o};
    }
    if (type == "level_complete")
        return LevelCompleteRecord{t, {j.at("block").get<int>(), j.at("start_t").get<Millis>(),
                                       j.at("end_t").get<Millis>(), j.at("errors").get<int>()}};
    if (type == "tlx") {
        TlxScales s{j.at("mental").get<double>(),     j.at("physical").get<double>(),
                    j.at("temporal").get<double>(),   j.at("performance").get<double>(),
                    j.at("effort").get<double>(),     j.at("frustration").get<double>()};
        return TlxRecord{t, s};
    }
    if (type == "warning") return WarningRecord{t, j.at("message").get<std::string>()};
    if (type == "end") return EndRecord{t, j.at("status").get<std::string>()};
    throw ParseError("unknown event type '" + type + "'");
}

std::string SessionLog::status() const {
    if (!events.empty()) {
        if (const auto* end = std::get_if<EndRecord>(&events.back())) return end->status;
    }
    return "incomplete";
}

SessionLog SessionLog::without_wall_time() const {
    SessionLog copy = *this;
    copy.header.wall_time.clear();
    return copy;
}

std::string serialize(const SessionLog& log) {
    std::string out = header_json(log.header).dump();
    out += '\n';
    for (const auto& e : log.events) {
        out += to_json(e).dump();
        out += '\n';
    }
    return out;
}

SessionLog parse_session_log(std::istream& in) {
    SessionLog log;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    Millis last_t = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
        }
        try {
            if (!have_header) {
                if (j.value("type", "") != "header") throw ParseError("first record must be the header", line_no);
                log.header.version = j.at("version").get<int>();
                if (log.header.version != kLogVersion)
                    throw ParseError("unsupported log version " + std::to_string(log.header.version), line_no);
                log.header.wall_time = j.at("wall_time").get<std::string>();
                log.header.config = j.at("config");
                log.header.task = j.at("task");
                log.header.extra = j.value("extra", json::object());
                have_header = true;
                continue;
            }
            auto e = event_from_json(j);
            if (event_time(e) < last_t) throw ParseError("event timestamps decrease", line_no);
            last_t = event_time(e);
            log.events.push_back(std::move(e));
        } catch (const ParseError& e) {
            if (e.line() > 0) throw;
            throw ParseError(e.what(), line_no);
        } catch (const std::exception& e) {
            throw ParseError(std::string("bad record: ") + e.what(), line_no);
        }
    }
    if (!have_header) throw ParseError("session log has no header");
    return log;
}

SessionLog parse_session_log(const std::string& text) {
    std::istringstream in(text);
    return parse_session_log(in);
}

void write_session_log(const std::filesystem::path& path, const SessionLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write session log: " + path.string());
    out << serialize(log);
}

SessionLog read_session_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot read session log: " + path.string());
    return parse_session_log(in);
}

ReplayStreams replay(const SessionLog& log) {
    ReplayStreams r;
    for (const auto& e : log.events) {
        if (const auto* g = std::get_if<GazeSample>(&e)) r.gaze.push_back(*g);
        else if (const auto* p = std::get_if<PulseRecord>(&e)) r.pulses.push_back(*p);
        else if (const auto* v = std::get_if<VoiceRecord>(&e)) r.voice.push_back(*v);
        else if (const auto* c = std::get_if<Click>(&e)) r.clicks.push_back(*c);
        else continue;
        r.ordered.push_back(e);
    }
    return r;
}

}  // namespace eyetap
