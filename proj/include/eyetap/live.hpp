#pragma once

// Live sessions: a transport-free protocol state machine (LiveSession) and a
// single-client TCP server that speaks it as newline-delimited JSON frames.
//
// client -> server: hello{client_version} start{} gaze{t,x,y} level{t,dbfs}
//                   click{t,x,y} tlx{mental,physical,temporal,performance,effort,frustration}
// server -> client: config{...} target_update{target,highlight} dwell_progress{remaining_ms}
//                   selection{t,x,y,outcome} complete{summary} error{code,msg}

#include "eyetap/engine.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace eyetap {

inline constexpr int kProtocolVersion = 1;

class LiveSession {
public:
    /// cfg.source must be live.
    explicit LiveSession(SessionConfig cfg);

    /// One inbound frame at server session-clock time `now` (ms). Returns outbound frames.
    std::vector<nlohmann::json> handle(const nlohmann::json& msg, Millis now);
    /// Parses one line first; malformed JSON yields an error frame and closes the session.
    std::vector<nlohmann::json> handle_line(const std::string& line, Millis now);
    /// Time passing without input: task deadlines and the idle timeout.
    std::vector<nlohmann::json> poll(Millis now);
    /// The client went away.
    void disconnect(Millis now);

    bool closed() const { return closed_; }
    const SessionLog& log() const { return engine_.log(); }
    const Engine& engine() const { return engine_; }

private:
    std::vector<nlohmann::json> fail(const std::string& code, const std::string& msg, Millis now);
    Millis rebase(const nlohmann::json& msg, Millis now);
    void on_event(const LogEvent& e);
    void flush_progress(Millis now);
    void close(const std::string& status, Millis now);

    SessionConfig cfg_;
    Engine engine_;
    bool hello_ = false;
    bool started_ = false;
    bool closed_ = false;
    bool complete_sent_ = false;
    Millis last_input_ = 0;
    std::optional<Millis> offset_;
    std::optional<SelectionEvent> pending_selection_;
    std::optional<Millis> last_progress_;
    bool progress_sent_ = false;
    std::vector<nlohmann::json> out_;
};

/**
 * Accepts one client on host:port (port 0 picks a free port, reported through
 * on_listening), runs the session to completion, and writes the log to
 * log_path when non-empty. Returns the log.
 */
SessionLog serve_live(const SessionConfig& cfg, int port, const std::filesystem::path& log_path,
                      const std::function<void(int)>& on_listening = {}, const std::string& host = "127.0.0.1");

}  // namespace eyetap
