#pragma once

// Session configuration and its `key = value` text form. The same keys are
// used by config files, `--set` overrides and the SessionLog header snapshot.

#include "eyetap/inputsim.hpp"
#include "eyetap/signal.hpp"
#include "eyetap/tasks.hpp"
#include "eyetap/techniques.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace eyetap {

enum class SourceKind { simulated, replay, live };

std::string_view to_string(SourceKind s);

enum class TaskKind { matrix, dart, ribbon, circle };

std::string_view to_string(TaskKind k);
TaskKind parse_task_kind(std::string_view s);

struct SessionConfig {
    ScreenSpec screen;
    Technique technique = Technique::eyetap;
    Millis dwell_threshold_ms = 500;
    VoiceModel voice;

    TaskKind task = TaskKind::matrix;
    MatrixSpec matrix;
    DartSpec dart;
    FittsSpec fitts;

    SourceKind source = SourceKind::simulated;
    ParticipantModel participant;
    std::string participant_id = "p1";
    std::string replay_path;

    DetectorConfig detector;
    /// Simulated room noise, modeled dB SPL (converted with detector.spl_offset_db).
    double ambient_spl_db = 50.0;
    int audio_sample_rate = 16000;
    /// Calibrate the detector threshold from ambient audio before simulated runs.
    bool calibrate = true;
    double calibration_margin_db = 10.0;
    Millis calibration_ms = 1000;

    /// Per block (matrix level, dart trial, Fitts condition).
    Millis timeout_ms = 120000;
    Millis idle_timeout_ms = 30000;
    std::uint64_t seed = 1;

    friend bool operator==(const SessionConfig&, const SessionConfig&) = default;

    /// Throws InvalidSpec naming the offending field.
    void validate() const;
    /// Task spec with screen and a seed derived from the session seed.
    TaskSpec task_spec() const;
    /// Participant model with actuation implied by the technique and a derived seed.
    ParticipantModel resolved_participant() const;
    VoiceModel resolved_voice() const;
    std::uint64_t audio_seed() const;
};

/// Applies one `key = value` assignment. Throws ParseError on unknown keys or bad values.
void apply_setting(SessionConfig& cfg, const std::string& key, const std::string& value);

/// Ordered key/value pairs covering every setting.
std::vector<std::pair<std::string, std::string>> to_pairs(const SessionConfig& cfg);

/// Parses `key = value` lines; `#` starts a comment. Errors carry the line number.
SessionConfig parse_config(const std::string& text, SessionConfig base = {});
SessionConfig load_config(const std::filesystem::path& path, SessionConfig base = {});

/// Splits "key=value" (for CLI overrides).
std::pair<std::string, std::string> split_assignment(const std::string& kv);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Parses `key = value` text into pairs without interpreting keys.
std::vector<std::pair<std::string, std::pair<std::string, int>>> parse_pairs(const std::string& text);

}  // namespace eyetap
