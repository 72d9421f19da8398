#pragma once

// The single event loop state: detector -> technique -> task runner -> log.
// Every input source (agent, replay, live socket) drives the same Engine.

#include "eyetap/config.hpp"
#include "eyetap/session_log.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace eyetap {

/// Generated geometry for the header (cells, dart centers, Fitts conditions).
nlohmann::json task_geometry(const TaskSpec& spec);

/// Header with the config snapshot and task geometry; wall_time left empty.
SessionHeader make_header(const SessionConfig& cfg);

/// Rebuilds a config from a header snapshot.
SessionConfig config_from_header(const SessionHeader& header);

class Engine {
public:
    using Listener = std::function<void(const LogEvent&)>;

    /// Validates cfg; throws InvalidSpec before anything runs.
    Engine(SessionConfig cfg, SessionHeader header);

    void set_listener(Listener l) { listener_ = std::move(l); }

    void start(Millis now);

    // Inputs. Each is logged, then any selection and task events follow it.
    // Timestamps earlier than the last logged event raise ProtocolError.
    void on_gaze(GazeSample s);
    /// One detector window; t is the window start. Detection is logged at window end.
    void on_level(const LevelSample& level);
    /// A pulse detected elsewhere (replayed logs).
    void on_pulse(const PulseRecord& rec);
    void on_voice(const VoiceRecord& rec);
    void on_click(const Click& c);
    void on_tlx(Millis t, const TlxScales& scales);

    /// Fires due task deadlines and the per-block timeout.
    void tick(Millis now);
    /// Closes a pulse still open at end of stream.
    void flush_audio(Millis now);
    void finish(const std::string& status, Millis now);

    bool complete() const { return runner_->complete(); }
    bool finished() const { return finished_; }
    TaskView view() const { return runner_->view(); }
    /// Increments whenever the task emits events.
    std::uint64_t view_version() const { return version_; }
    std::optional<Millis> next_deadline() const;
    std::optional<Millis> dwell_remaining(Millis now) const;
    const TaskRunner& task() const { return *runner_; }
    const SessionConfig& config() const { return cfg_; }
    Millis last_t() const { return last_t_; }
    double threshold_dbfs() const { return detector_.config().threshold_dbfs; }

    const SessionLog& log() const { return log_; }
    SessionHeader& header() { return log_.header; }
    SessionLog take_log() { return std::move(log_); }

private:
    Millis stamp(Millis t, const char* what);
    void record(LogEvent e);
    void select(const SelectionEvent& sel, Millis now);
    void apply(const std::vector<TaskEvent>& events, Millis now);
    void pulse_detected(const PulseEvent& p, Millis now);

    SessionConfig cfg_;
    SessionLog log_;
    std::unique_ptr<TaskRunner> runner_;
    PulseDetector detector_;
    GazeHistory gaze_;
    DwellState dwell_;
    Listener listener_;
    Millis last_t_ = 0;
    std::uint64_t version_ = 0;
    bool started_ = false;
    bool finished_ = false;
};

}  // namespace eyetap
