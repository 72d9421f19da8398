#pragma once

// Session orchestration: stream merging, the simulated closed loop, log
// replay, and batch studies over techniques x tasks x participants.

#include "eyetap/engine.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace eyetap {

/// Tie-break priority at equal timestamps.
enum class InputKind { gaze = 0, pulse = 1, voice = 2, click = 3 };

struct InputEvent {
    Millis t = 0;
    InputKind kind = InputKind::gaze;
    std::variant<GazeSample, LevelSample, PulseRecord, VoiceRecord, Click> payload;

    friend bool operator==(const InputEvent&, const InputEvent&) = default;
};

InputEvent make_input(const GazeSample& s);
InputEvent make_input(const LevelSample& s);
InputEvent make_input(const PulseRecord& p);
InputEvent make_input(const VoiceRecord& v);
InputEvent make_input(const Click& c);

struct MergedEvent {
    InputEvent event;
    std::size_t stream = 0;
    friend bool operator==(const MergedEvent&, const MergedEvent&) = default;
};

/**
 * Orders by (t, kind, stream index), keeping each stream's own order.
 * Throws ProtocolError naming the first stream whose timestamps decrease.
 */
std::vector<MergedEvent> merge_streams(const std::vector<std::vector<InputEvent>>& streams);

/// Feeds one input into the engine, first firing task deadlines strictly before its time.
void deliver(Engine& engine, const InputEvent& e);
/// Fires every task deadline at or before t.
void advance_to(Engine& engine, Millis t);

/// Runs a simulated or replay-source session. Live configs go through serve_live.
SessionLog run_session(const SessionConfig& cfg);
SessionLog simulate_session(const SessionConfig& cfg);
/// Re-drives the recorded inputs through a fresh engine built from the header snapshot.
SessionLog replay_session(const SessionLog& log);

/// Detector threshold from ambient audio synthesized for the config's room level.
double simulated_threshold(const SessionConfig& cfg);

// --- studies -----------------------------------------------------------------

struct StudyTask {
    TaskKind kind = TaskKind::matrix;
    int level = 1;
    std::string label() const;
    friend bool operator==(const StudyTask&, const StudyTask&) = default;
};

struct StudyPlan {
    std::vector<Technique> techniques{Technique::eyetap, Technique::dwell, Technique::voice, Technique::pointer};
    std::vector<StudyTask> tasks;
    std::vector<std::uint64_t> participant_seeds{1};
    std::uint64_t seed = 1;
    SessionConfig base;

    void validate() const;
};

/**
 * Plan file: `techniques = eyetap, dwell`, `tasks = matrix:1-5, dart, ribbon`,
 * `participants = 3` or `seeds = 4, 8, 15`, `seed = 7`; any other key is a
 * session config key applied to every cell.
 */
StudyPlan parse_study_plan(const std::string& text);
StudyPlan load_study_plan(const std::filesystem::path& path);

struct StudyCell {
    int participant = 0;
    int order = 0;  // position of the technique in this participant's order
    Technique technique = Technique::eyetap;
    StudyTask task;
    SessionConfig cfg;
    std::string log_name;
};

/// Technique order for each participant, shuffled from the plan seed.
std::vector<std::vector<Technique>> technique_orders(const StudyPlan& plan);
std::vector<StudyCell> study_cells(const StudyPlan& plan);

struct StudyResult {
    std::vector<std::filesystem::path> logs;
    /// "log_name: message" for cells that failed; the others still run.
    std::vector<std::string> failures;
};

using Progress = std::function<void(const std::string&)>;

/// Writes logs under out_dir/logs, then the report computed from those files.
StudyResult run_study(const StudyPlan& plan, const std::filesystem::path& out_dir, int jobs = 1,
                      const Progress& progress = {});

}  // namespace eyetap
