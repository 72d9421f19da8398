#include "eyetap/session_log.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace eyetap;

namespace {

SessionLog sample_log() {
    SessionLog log;
    log.header.wall_time = "2026-01-01T00:00:00Z";
    log.header.config = {{"technique", "eyetap"}, {"seed", "4"}};
    log.header.task = {{"kind", "matrix"}};
    log.header.extra = {{"threshold_dbfs", -50.5}};
    Target goal;
    goal.id = 3;
    goal.center = {100.25, 200.5};
    goal.size = {174, 154};
    goal.label = 1;
    JudgeOutcome j;
    j.kind = "advance";
    j.sel_t = 40;
    j.endpoint = {101, 199};
    j.cell = 3;
    j.ordinal = 1;
    TrialOutcome tr;
    tr.distance = 256;
    tr.width = 96;
    tr.endpoint = {1.5, 2.5};
    tr.movement_time = 812;
    tr.hit = true;
    JudgeOutcome jt;
    jt.kind = "trial";
    jt.trial = tr;
    jt.sel_t = 45;
    log.events = {
        TaskShownRecord{0, {0, 1, goal}},
        GazeSample{11, 100.123456789, 200.1, true},
        GazeSample{22, 0, 0, false},
        PulseRecord{30, {10, 30, -12.25}},
        VoiceRecord{35, 33, false},
        Click{38, 5, 6},
        SelectionRecord{40, {40, 101, 199, Technique::eyetap, 10}},
        JudgeRecord{40, j},
        JudgeRecord{45, jt},
        LevelCompleteRecord{50, {0, 0, 50, 2}},
        TlxRecord{60, {10, 20, 30, 40, 50, 60}},
        WarningRecord{61, "pulse with no gaze sample; ignored"},
        EndRecord{62, "complete"},
    };
    return log;
}

}  // namespace

TEST_CASE("session log round trips every record type exactly") {
    const auto log = sample_log();
    const auto text = serialize(log);
    const auto back = parse_session_log(text);
    CHECK(back == log);
    CHECK(serialize(back) == text);
    CHECK(back.status() == "complete");
}

TEST_CASE("session log file round trip and wall time blanking") {
    const auto path = std::filesystem::temp_directory_path() / "eyetap_log_roundtrip.jsonl";
    write_session_log(path, sample_log());
    const auto back = read_session_log(path);
    CHECK(back == sample_log());
    CHECK(back.without_wall_time().header.wall_time.empty());
    std::filesystem::remove(path);
}

TEST_CASE("parse errors carry line numbers") {
    const auto text = serialize(sample_log());
    std::istringstream lines(text);
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);

    auto line_of = [](const std::string& s) {
        try {
            parse_session_log(s);
        } catch (const ParseError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of(header + "\n" + first + "\n{not json\n") == 3);
    CHECK(line_of(header + "\n{\"type\":\"bogus\",\"t\":1}\n") == 2);
    CHECK(line_of(first + "\n") == 1);
    CHECK(line_of(header + "\n{\"type\":\"gaze\",\"t\":50,\"x\":1,\"y\":1,\"valid\":true}\n"
                  "{\"type\":\"gaze\",\"t\":40,\"x\":1,\"y\":1,\"valid\":true}\n") == 3);
    CHECK_THROWS_AS(parse_session_log(std::string{}), ParseError);
}

TEST_CASE("unsupported versions are rejected") {
    auto log = sample_log();
    log.header.version = 2;
    CHECK_THROWS_AS(parse_session_log(serialize(log)), ParseError);
}

TEST_CASE("missing end record reads as incomplete") {
    auto log = sample_log();
    log.events.pop_back();
    CHECK(log.status() == "incomplete");
    CHECK_FALSE(log.complete());
}

TEST_CASE("replay streams keep only inputs in recorded order") {
    const auto r = replay(sample_log());
    CHECK(r.gaze.size() == 2);
    CHECK(r.pulses.size() == 1);
    CHECK(r.voice.size() == 1);
    CHECK(r.clicks.size() == 1);
    REQUIRE(r.ordered.size() == 5);
    CHECK(std::holds_alternative<GazeSample>(r.ordered[0]));
    CHECK(std::holds_alternative<Click>(r.ordered[4]));
}
