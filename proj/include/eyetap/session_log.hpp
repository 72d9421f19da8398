#pragma once

// SessionLog: header line followed by one JSON object per event (JSONL).
// Field names and enum spellings are part of the on-disk format (version 1).

#include "eyetap/inputsim.hpp"
#include "eyetap/metrics.hpp"
#include "eyetap/signal.hpp"
#include "eyetap/tasks.hpp"
#include "eyetap/techniques.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace eyetap {

inline constexpr int kLogVersion = 1;

struct SessionHeader {
    int version = kLogVersion;
    std::string wall_time;
    /// Flat key/value snapshot of the SessionConfig (same keys as the config file).
    nlohmann::json config = nlohmann::json::object();
    /// Generated task geometry.
    nlohmann::json task = nlohmann::json::object();
    /// Run facts: calibrated threshold, clock offset, study order index, ...
    nlohmann::json extra = nlohmann::json::object();

    friend bool operator==(const SessionHeader&, const SessionHeader&) = default;
};

struct PulseRecord {
    Millis t = 0;  // detection time
    PulseEvent pulse;
    friend bool operator==(const PulseRecord&, const PulseRecord&) = default;
};

struct VoiceRecord {
    Millis t = 0;  // recognition time, or command time when missed
    Millis command_t = 0;
    bool recognized = true;
    friend bool operator==(const VoiceRecord&, const VoiceRecord&) = default;
};

struct SelectionRecord {
    Millis t = 0;
    SelectionEvent selection;
    friend bool operator==(const SelectionRecord&, const SelectionRecord&) = default;
};

struct TaskShownRecord {
    Millis t = 0;
    TaskShown shown;
    friend bool operator==(const TaskShownRecord&, const TaskShownRecord&) = default;
};

struct JudgeRecord {
    Millis t = 0;
    JudgeOutcome outcome;
    friend bool operator==(const JudgeRecord&, const JudgeRecord&) = default;
};

struct LevelCompleteRecord {
    Millis t = 0;
    BlockComplete block;
    friend bool operator==(const LevelCompleteRecord&, const LevelCompleteRecord&) = default;
};

struct TlxRecord {
    Millis t = 0;
    TlxScales scales;
    friend bool operator==(const TlxRecord&, const TlxRecord&) = default;
};

struct WarningRecord {
    Millis t = 0;
    std::string message;
    friend bool operator==(const WarningRecord&, const WarningRecord&) = default;
};

struct EndRecord {
    Millis t = 0;
    std::string status;  // complete | timeout | incomplete
    friend bool operator==(const EndRecord&, const EndRecord&) = default;
};

using LogEvent = std::variant<GazeSample, PulseRecord, VoiceRecord, Click, SelectionRecord, TaskShownRecord,
                              JudgeRecord, LevelCompleteRecord, TlxRecord, WarningRecord, EndRecord>;

Millis event_time(const LogEvent& e);
std::string_view event_type(const LogEvent& e);

struct SessionLog {
    SessionHeader header;
    std::vector<LogEvent> events;

    friend bool operator==(const SessionLog&, const SessionLog&) = default;

    /// Status of the trailing end record; "incomplete" when absent.
    std::string status() const;
    bool complete() const { return status() == "complete"; }
    /// Copies with the wall-time header field blanked, for determinism checks.
    SessionLog without_wall_time() const;
};

nlohmann::json to_json(const Target& t);
Target target_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LogEvent& e);
LogEvent event_from_json(const nlohmann::json& j);

std::string serialize(const SessionLog& log);
/// Throws ParseError (with line number) on malformed input.
SessionLog parse_session_log(std::istream& in);
SessionLog parse_session_log(const std::string& text);

void write_session_log(const std::filesystem::path& path, const SessionLog& log);
SessionLog read_session_log(const std::filesystem::path& path);

/// Recorded input events in log order: what a replay source re-emits.
struct ReplayStreams {
    std::vector<GazeSample> gaze;
    std::vector<PulseRecord> pulses;
    std::vector<VoiceRecord> voice;
    std::vector<Click> clicks;
    /// All of the above interleaved exactly as recorded.
    std::vector<LogEvent> ordered;
};

ReplayStreams replay(const SessionLog& log);

}  // namespace eyetap
