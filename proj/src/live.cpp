#include "eyetap/live.hpp"

#include "eyetap/harness.hpp"
#include "eyetap/report.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cerrno>
#include <cstring>

namespace eyetap {

using nlohmann::json;

namespace {

SessionConfig checked(SessionConfig cfg) {
    if (cfg.source != SourceKind::live) throw InvalidSpec("serve_live needs source = live");
    cfg.validate();
    return cfg;
}

json point_json(Point p) { return json::array({p.x, p.y}); }

double number(const json& msg, const char* key) {
    if (!msg.contains(key) || !msg.at(key).is_number()) throw ProtocolError(std::string("missing number '") + key + "'");
    return msg.at(key).get<double>();
}

}  // namespace

LiveSession::LiveSession(SessionConfig cfg)
    : cfg_(checked(std::move(cfg))), engine_(cfg_, make_header(cfg_)) {
    engine_.set_listener([this](const LogEvent& e) { on_event(e); });
}

void LiveSession::on_event(const LogEvent& e) {
    if (const auto* s = std::get_if<SelectionRecord>(&e)) {
        pending_selection_ = s->selection;
    } else if (const auto* j = std::get_if<JudgeRecord>(&e)) {
        const auto& o = j->outcome;
        json sel{{"type", "selection"}, {"t", o.sel_t}, {"x", o.endpoint.x}, {"y", o.endpoint.y}, {"outcome", o.kind}};
        if (o.cell) sel["cell"] = *o.cell;
        if (o.distance) sel["distance"] = *o.distance;
        out_.push_back(sel);
        pending_selection_.reset();
        if (o.kind == "error" || o.kind == "miss") {
            json hl{{"type", "target_update"}, {"highlight", {{"kind", "error"}, {"point", point_json(o.endpoint)}}}};
            if (o.cell) hl["highlight"]["cell"] = *o.cell;
            if (const auto goal = engine_.view().goal) hl["goal"] = point_json(*goal);
            out_.push_back(hl);
        }
    } else if (const auto* t = std::get_if<TaskShownRecord>(&e)) {
        out_.push_back({{"type", "target_update"},
                        {"block", t->shown.block},
                        {"step", t->shown.step},
                        {"target", to_json(t->shown.goal)},
                        {"highlight", nullptr}});
    } else if (const auto* w = std::get_if<WarningRecord>(&e)) {
        out_.push_back({{"type", "warning"}, {"t", w->t}, {"msg", w->message}});
    }
}

void LiveSession::flush_progress(Millis now) {
    if (pending_selection_) {
        const auto& s = *pending_selection_;
        out_.push_back({{"type", "selection"}, {"t", s.t}, {"x", s.x}, {"y", s.y}, {"outcome", "ignored"}});
        pending_selection_.reset();
    }
    if (cfg_.technique != Technique::dwell) return;
    const auto rem = engine_.dwell_remaining(now);
    std::optional<Millis> bucket;
    if (rem) bucket = (*rem + 99) / 100 * 100;
    if (progress_sent_ && bucket == last_progress_) return;
    last_progress_ = bucket;
    progress_sent_ = true;
    out_.push_back({{"type", "dwell_progress"}, {"remaining_ms", bucket ? json(*bucket) : json(nullptr)}});
}

void LiveSession::close(const std::string& status, Millis now) {
    if (closed_) return;
    closed_ = true;
    if (started_) engine_.finish(status, now);
}

std::vector<json> LiveSession::fail(const std::string& code, const std::string& msg, Millis now) {
    out_.push_back({{"type", "error"}, {"code", code}, {"msg", msg}});
    close(engine_.complete() ? "complete" : "incomplete", std::max(now, engine_.last_t()));
    return std::exchange(out_, {});
}

Millis LiveSession::rebase(const json& msg, Millis now) {
    const auto client_t = static_cast<Millis>(std::llround(number(msg, "t")));
    if (!offset_) {
        offset_ = now - client_t;
        engine_.header().extra["clock_offset_ms"] = *offset_;
    }
    return std::max(client_t + *offset_, engine_.last_t());
}

std::vector<json> LiveSession::handle_line(const std::string& line, Millis now) {
    if (closed_) return {};
    json msg;
    try {
        msg = json::parse(line);
    } catch (const json::exception& e) {
        return fail("malformed", std::string("not a JSON object: ") + e.what(), now);
    }
    return handle(msg, now);
}

std::vector<json> LiveSession::handle(const json& msg, Millis now) {
    if (closed_) return {};
    if (!msg.is_object() || !msg.contains("type") || !msg.at("type").is_string())
        return fail("malformed", "frame must be an object with a string 'type'", now);
    const std::string type = msg.at("type").get<std::string>();
    last_input_ = now;
    try {
        if (type == "hello") {
            if (hello_) return fail("protocol", "duplicate hello", now);
            hello_ = true;
            out_.push_back({{"type", "config"},
                            {"protocol_version", kProtocolVersion},
                            {"technique", to_string(cfg_.technique)},
                            {"screen", {{"width", cfg_.screen.width}, {"height", cfg_.screen.height}}},
                            {"task", engine_.log().header.task},
                            {"targets", [&] {
                                 json a = json::array();
                                 for (const auto& t : engine_.task().visible_targets()) a.push_back(to_json(t));
                                 return a;
                             }()},
                            {"detector",
                             {{"frame_ms", cfg_.detector.frame_ms}, {"threshold_dbfs", cfg_.detector.threshold_dbfs}}},
                            {"dwell_threshold_ms", cfg_.dwell_threshold_ms},
                            {"dwell_remaining_policy", "countdown_100ms"}});
            return std::exchange(out_, {});
        }
        if (!hello_) return fail("protocol", "expected hello first", now);
        if (type == "start") {
            if (started_) return fail("protocol", "duplicate start", now);
            started_ = true;
            engine_.start(now);
            return std::exchange(out_, {});
        }
        if (!started_) return fail("protocol", "expected start before input", now);

        if (type == "tlx") {
            TlxScales s{number(msg, "mental"),      number(msg, "physical"), number(msg, "temporal"),
                        number(msg, "performance"), number(msg, "effort"),   number(msg, "frustration")};
            engine_.on_tlx(std::max(now, engine_.last_t()), s);
            if (engine_.complete()) close("complete", engine_.last_t());
            return std::exchange(out_, {});
        }
        if (engine_.complete()) return std::exchange(out_, {});  // late input after the task ended

        const Millis t = rebase(msg, now);
        if (type == "gaze") {
            deliver(engine_, make_input(GazeSample{t, number(msg, "x"), number(msg, "y"), true}));
        } else if (type == "level") {
            deliver(engine_, make_input(LevelSample{t, number(msg, "dbfs")}));
        } else if (type == "click") {
            deliver(engine_, make_input(Click{t, number(msg, "x"), number(msg, "y")}));
        } else {
            return fail("unknown_type", "unknown frame type '" + type + "'", now);
        }
        flush_progress(t);
        if (engine_.finished() && !closed_) closed_ = true;
        if (engine_.complete() && !complete_sent_) {
            complete_sent_ = true;
            json summary{{"errors", error_locations(engine_.log()).size()}};
            if (const auto ct = completion_time(engine_.log())) summary["completion_ms"] = *ct;
            out_.push_back({{"type", "complete"}, {"summary", summary}});
        }
    } catch (const std::exception& e) {
        return fail("protocol", e.what(), now);
    }
    return std::exchange(out_, {});
}

std::vector<json> LiveSession::poll(Millis now) {
    if (closed_) return {};
    if (now - last_input_ >= cfg_.idle_timeout_ms) {
        out_.push_back({{"type", "error"}, {"code", "idle_timeout"}, {"msg", "no client input"}});
        close(engine_.complete() ? "complete" : "incomplete", std::max(now, engine_.last_t()));
        return std::exchange(out_, {});
    }
    if (started_ && !engine_.complete()) {
        advance_to(engine_, std::max(now, engine_.last_t()));
        if (engine_.finished()) closed_ = true;
    }
    return std::exchange(out_, {});
}

void LiveSession::disconnect(Millis now) {
    close(engine_.complete() ? "complete" : "incomplete", std::max(now, engine_.last_t()));
}

namespace {

class Fd {
public:
    explicit Fd(int fd = -1) : fd_(fd) {}
    ~Fd() {
        if (fd_ >= 0) ::close(fd_);
    }
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    int get() const { return fd_; }

private:
    int fd_;
};

[[noreturn]] void sys_fail(const std::string& what) { throw std::runtime_error(what + ": " + std::strerror(errno)); }

bool send_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const auto n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        off += static_cast<std::size_t>(n);
    }
    return true;
}

}  // namespace

SessionLog serve_live(const SessionConfig& cfg, int port, const std::filesystem::path& log_path,
                      const std::function<void(int)>& on_listening, const std::string& host) {
    LiveSession session(cfg);

    Fd listener(::socket(AF_INET, SOCK_STREAM, 0));
    if (listener.get() < 0) sys_fail("socket");
    const int yes = 1;
    ::setsockopt(listener.get(), SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) throw InvalidInput("bad listen address '" + host + "'");
    if (::bind(listener.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) sys_fail("bind");
    if (::listen(listener.get(), 1) < 0) sys_fail("listen");
    socklen_t len = sizeof addr;
    ::getsockname(listener.get(), reinterpret_cast<sockaddr*>(&addr), &len);
    if (on_listening) on_listening(ntohs(addr.sin_port));

    Fd client(::accept(listener.get(), nullptr, nullptr));
    if (client.get() < 0) sys_fail("accept");

    const auto t0 = std::chrono::steady_clock::now();
    auto now = [&] {
        return static_cast<Millis>(
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count());
    };
    auto send_frames = [&](const std::vector<json>& frames) {
        std::string data;
        for (const auto& f : frames) data += f.dump() + "\n";
        return data.empty() || send_all(client.get(), data);
    };

    std::string buffer;
    char chunk[4096];
    bool connected = true;
    while (!session.closed() && connected) {
        pollfd pfd{client.get(), POLLIN, 0};
        const int r = ::poll(&pfd, 1, 20);
        if (r < 0 && errno != EINTR) sys_fail("poll");
        if (r > 0) {
            const auto n = ::recv(client.get(), chunk, sizeof chunk, 0);
            if (n <= 0) {
                connected = false;
            } else {
                buffer.append(chunk, static_cast<std::size_t>(n));
                for (auto nl = buffer.find('\n'); nl != std::string::npos && !session.closed(); nl = buffer.find('\n')) {
                    std::string line = buffer.substr(0, nl);
                    buffer.erase(0, nl + 1);
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    if (line.empty()) continue;
                    if (!send_frames(session.handle_line(line, now()))) connected = false;
                }
            }
        }
        if (connected && !session.closed() && !send_frames(session.poll(now()))) connected = false;
    }
    if (!session.closed()) session.disconnect(now());
    ::shutdown(client.get(), SHUT_RDWR);

    SessionLog log = session.log();
    if (!log_path.empty()) write_session_log(log_path, log);
    return log;
}

}  // namespace eyetap
