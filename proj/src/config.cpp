#include "eyetap/config.hpp"

#include "eyetap/rng.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace eyetap {

std::string_view to_string(SourceKind s) {
    switch (s) {
        case SourceKind::simulated: return "simulated";
        case SourceKind::replay: return "replay";
        case SourceKind::live: return "live";
    }
    return "?";
}

std::string_view to_string(TaskKind k) {
    switch (k) {
        case TaskKind::matrix: return "matrix";
        case TaskKind::dart: return "dart";
        case TaskKind::ribbon: return "ribbon";
        case TaskKind::circle: return "circle";
    }
    return "?";
}

TaskKind parse_task_kind(std::string_view s) {
    if (s == "matrix") return TaskKind::matrix;
    if (s == "dart") return TaskKind::dart;
    if (s == "ribbon") return TaskKind::ribbon;
    if (s == "circle") return TaskKind::circle;
    throw InvalidInput("unknown task '" + std::string(s) + "'");
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw InvalidInput("cannot format number");
    return std::string(buf, end);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw InvalidInput("expected a number, got '" + v + "'");
    return out;
}

std::int64_t to_int(const std::string& v) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw InvalidInput("expected an integer, got '" + v + "'");
    return out;
}

std::uint64_t to_uint(const std::string& v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw InvalidInput("expected an unsigned integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InvalidInput("expected a boolean, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
    if (out.empty()) throw InvalidInput("expected a comma-separated list");
    return out;
}

std::string list_str(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

struct Field {
    std::function<void(SessionConfig&, const std::string&)> set;
    std::function<std::string(const SessionConfig&)> get;
};

#define ET_DOUBLE(path) \
    Field { [](SessionConfig& c, const std::string& v) { c.path = to_double(v); }, [](const SessionConfig& c) { return format_double(c.path); } }
#define ET_INT(path, T) \
    Field { [](SessionConfig& c, const std::string& v) { c.path = static_cast<T>(to_int(v)); }, [](const SessionConfig& c) { return std::to_string(c.path); } }
#define ET_BOOL(path) \
    Field { [](SessionConfig& c, const std::string& v) { c.path = to_bool(v); }, [](const SessionConfig& c) { return std::string(c.path ? "true" : "false"); } }

const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table = {
        {"seed", Field{[](SessionConfig& c, const std::string& v) { c.seed = to_uint(v); },
                       [](const SessionConfig& c) { return std::to_string(c.seed); }}},
        {"screen.width", ET_INT(screen.width, int)},
        {"screen.height", ET_INT(screen.height, int)},
        {"technique", Field{[](SessionConfig& c, const std::string& v) { c.technique = parse_technique(v); },
                            [](const SessionConfig& c) { return std::string(to_string(c.technique)); }}},
        {"dwell.threshold_ms", ET_INT(dwell_threshold_ms, Millis)},
        {"voice.median_ms", ET_DOUBLE(voice.median_ms)},
        {"voice.dispersion", ET_DOUBLE(voice.dispersion)},
        {"voice.miss_rate", ET_DOUBLE(voice.miss_rate)},
        {"task", Field{[](SessionConfig& c, const std::string& v) { c.task = parse_task_kind(v); },
                       [](const SessionConfig& c) { return std::string(to_string(c.task)); }}},
        {"matrix.level", ET_INT(matrix.level, int)},
        {"matrix.cols", ET_INT(matrix.cols, int)},
        {"matrix.rows", ET_INT(matrix.rows, int)},
        {"dart.trials", ET_INT(dart.trials, int)},
        {"dart.inter_trial_ms", ET_INT(dart.inter_trial_ms, Millis)},
        {"fitts.distances", Field{[](SessionConfig& c, const std::string& v) { c.fitts.distances = to_list(v); },
                                  [](const SessionConfig& c) { return list_str(c.fitts.distances); }}},
        {"fitts.widths", Field{[](SessionConfig& c, const std::string& v) { c.fitts.widths = to_list(v); },
                               [](const SessionConfig& c) { return list_str(c.fitts.widths); }}},
        {"fitts.trials_per_condition", ET_INT(fitts.trials_per_condition, int)},
        {"fitts.circle_targets_per_ring", ET_INT(fitts.circle_targets_per_ring, int)},
        {"fitts.count_multiple_attempts", ET_BOOL(fitts.count_multiple_attempts)},
        {"source", Field{[](SessionConfig& c, const std::string& v) {
                             if (v == "simulated") c.source = SourceKind::simulated;
                             else if (v == "replay") c.source = SourceKind::replay;
                             else if (v == "live") c.source = SourceKind::live;
                             else throw InvalidInput("unknown source '" + v + "'");
                         },
                         [](const SessionConfig& c) { return std::string(to_string(c.source)); }}},
        {"replay.path", Field{[](SessionConfig& c, const std::string& v) { c.replay_path = v; },
                              [](const SessionConfig& c) { return c.replay_path; }}},
        {"participant.id", Field{[](SessionConfig& c, const std::string& v) { c.participant_id = v; },
                                 [](const SessionConfig& c) { return c.participant_id; }}},
        {"participant.jitter_sigma_px", ET_DOUBLE(participant.jitter_sigma_px)},
        {"participant.jitter_right_gain", ET_DOUBLE(participant.jitter_right_gain)},
        {"participant.saccade_ms", ET_INT(participant.saccade_ms, Millis)},
        {"participant.sample_rate_hz", ET_DOUBLE(participant.sample_rate_hz)},
        {"participant.reaction_ms", ET_INT(participant.reaction_ms, Millis)},
        {"participant.settle_ms", ET_INT(participant.settle_ms, Millis)},
        {"participant.pulse_latency_ms", ET_INT(participant.pulse_latency_ms, Millis)},
        {"participant.pulse_duration_ms", ET_INT(participant.pulse_duration_ms, Millis)},
        {"participant.pulse_dbfs", ET_DOUBLE(participant.pulse_dbfs)},
        {"participant.click_latency_ms", ET_INT(participant.click_latency_ms, Millis)},
        {"participant.retry_ms", ET_INT(participant.retry_ms, Millis)},
        {"participant.pointer_sigma_px", ET_DOUBLE(participant.pointer_sigma_px)},
        {"participant.pointer_base_ms", ET_INT(participant.pointer_base_ms, Millis)},
        {"participant.pointer_ms_per_bit", ET_DOUBLE(participant.pointer_ms_per_bit)},
        {"detector.threshold_dbfs", ET_DOUBLE(detector.threshold_dbfs)},
        {"detector.frame_ms", ET_INT(detector.frame_ms, Millis)},
        {"detector.min_pulse_ms", ET_INT(detector.min_pulse_ms, Millis)},
        {"detector.max_pulse_ms", ET_INT(detector.max_pulse_ms, Millis)},
        {"detector.refractory_ms", ET_INT(detector.refractory_ms, Millis)},
        {"detector.level_floor_dbfs", ET_DOUBLE(detector.level_floor_dbfs)},
        {"detector.spl_offset_db", ET_DOUBLE(detector.spl_offset_db)},
        {"audio.ambient_spl_db", ET_DOUBLE(ambient_spl_db)},
        {"audio.sample_rate", ET_INT(audio_sample_rate, int)},
        {"audio.calibrate", ET_BOOL(calibrate)},
        {"audio.margin_db", ET_DOUBLE(calibration_margin_db)},
        {"audio.calibration_ms", ET_INT(calibration_ms, Millis)},
        {"timeout_ms", ET_INT(timeout_ms, Millis)},
        {"live.idle_timeout_ms", ET_INT(idle_timeout_ms, Millis)},
    };
    return table;
}

#undef ET_DOUBLE
#undef ET_INT
#undef ET_BOOL

}  // namespace

void SessionConfig::validate() const {
    screen.validate();
    if (dwell_threshold_ms <= 0) throw InvalidSpec("dwell.threshold_ms must be positive");
    voice.validate();
    eyetap::validate(task_spec());
    participant.validate();
    detector.validate();
    if (audio_sample_rate <= 0) throw InvalidSpec("audio.sample_rate must be positive");
    if (calibration_ms < 1000) throw InvalidSpec("audio.calibration_ms must be at least 1000");
    if (timeout_ms <= 0) throw InvalidSpec("timeout_ms must be positive");
    if (idle_timeout_ms <= 0) throw InvalidSpec("live.idle_timeout_ms must be positive");
    if (source == SourceKind::replay && replay_path.empty()) throw InvalidSpec("replay.path is required for source = replay");
    if (source == SourceKind::live && technique == Technique::voice)
        throw InvalidSpec("the live protocol carries no voice input; use eyetap, dwell or pointer");
}

TaskSpec SessionConfig::task_spec() const {
    const std::uint64_t s = derive_seed(seed, 0x7461736b);
    switch (task) {
        case TaskKind::matrix: {
            MatrixSpec m = matrix;
            m.screen = screen;
            m.seed = s;
            return m;
        }
        case TaskKind::dart: {
            DartSpec d = dart;
            d.screen = screen;
            d.seed = s;
            return d;
        }
        case TaskKind::ribbon:
        case TaskKind::circle: {
            FittsSpec f = fitts;
            f.kind = task == TaskKind::ribbon ? FittsKind::ribbon : FittsKind::circle;
            f.screen = screen;
            f.seed = s;
            return f;
        }
    }
    throw InvalidState("unreachable task kind");
}

ParticipantModel SessionConfig::resolved_participant() const {
    ParticipantModel p = participant;
    switch (technique) {
        case Technique::eyetap: p.actuation = Actuation::pulse; break;
        case Technique::dwell: p.actuation = Actuation::dwell; break;
        case Technique::voice: p.actuation = Actuation::voice; break;
        case Technique::pointer: p.actuation = Actuation::click; break;
    }
    p.seed = derive_seed(seed, 0x61676e74);
    return p;
}

VoiceModel SessionConfig::resolved_voice() const {
    VoiceModel v = voice;
    v.seed = derive_seed(seed, 0x766f6963);
    return v;
}

std::uint64_t SessionConfig::audio_seed() const { return derive_seed(seed, 0x61756469); }

void apply_setting(SessionConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& [name, field] : fields()) {
        if (name != key) continue;
        try {
            field.set(cfg, value);
        } catch (const std::exception& e) {
            throw ParseError("field '" + key + "': " + e.what());
        }
        return;
    }
    throw ParseError("unknown field '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> to_pairs(const SessionConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, field] : fields()) out.emplace_back(name, field.get(cfg));
    return out;
}

std::vector<std::pair<std::string, std::pair<std::string, int>>> parse_pairs(const std::string& text) {
    std::vector<std::pair<std::string, std::pair<std::string, int>>> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line_no);
        out.push_back({key, {value, line_no}});
    }
    return out;
}

SessionConfig parse_config(const std::string& text, SessionConfig base) {
    for (const auto& [key, vl] : parse_pairs(text)) {
        try {
            apply_setting(base, key, vl.first);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), vl.second);
        }
    }
    return base;
}

SessionConfig load_config(const std::filesystem::path& path, SessionConfig base) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str(), std::move(base));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::pair<std::string, std::string> split_assignment(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value, got '" + kv + "'");
    return {trim(kv.substr(0, eq)), trim(kv.substr(eq + 1))};
}

}  // namespace eyetap
