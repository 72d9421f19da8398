#include "eyetap/harness.hpp"

#include <doctest.h>

#include <cmath>

using namespace eyetap;

TEST_CASE("zero-sigma fixation sits exactly on the center") {
    const auto s = synth_fixation({100, 100}, 0.0, 100, 60.0, 1);
    REQUIRE(s.size() == 6);
    for (const auto& g : s) {
        CHECK(g.x == 100.0);
        CHECK(g.y == 100.0);
    }
}

TEST_CASE("fixation jitter has the requested standard deviation") {
    const auto s = synth_fixation({500, 500}, 10.0, 10000, 60.0, 7);
    double mx = 0, my = 0;
    for (const auto& g : s) {
        mx += g.x;
        my += g.y;
    }
    mx /= s.size();
    my /= s.size();
    double vx = 0, vy = 0;
    for (const auto& g : s) {
        vx += (g.x - mx) * (g.x - mx);
        vy += (g.y - my) * (g.y - my);
    }
    CHECK(std::fabs(std::sqrt(vx / (s.size() - 1)) - 10.0) <= 1.0);
    CHECK(std::fabs(std::sqrt(vy / (s.size() - 1)) - 10.0) <= 1.0);
    CHECK(synth_fixation({500, 500}, 10.0, 1000, 60.0, 7) == synth_fixation({500, 500}, 10.0, 1000, 60.0, 7));
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].t > s[i - 1].t);
}

TEST_CASE("saccades: degenerate, monotone, midpoint strictly inside") {
    for (const auto& g : synth_saccade({0, 0}, {0, 0}, 40, 90.0)) {
        CHECK(g.x == 0.0);
        CHECK(g.y == 0.0);
    }
    for (Millis d : {10, 40, 100, 333}) {
        const auto s = synth_saccade({0, 0}, {300, 0}, d, 90.0);
        for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].x >= s[i - 1].x);
        for (const auto& g : s) CHECK(g.y == 0.0);
        CHECK(s.back().x == 300.0);
    }
    const auto s = synth_saccade({0, 0}, {300, 0}, 100, 90.0);
    const auto& mid = s[s.size() / 2];
    CHECK(mid.x > 0.0);
    CHECK(mid.x < 300.0);
}

TEST_CASE("dwell-mode agent fixates the target with no actuation") {
    ParticipantModel m;
    m.actuation = Actuation::dwell;
    Agent a(m, {});
    const auto s = a.step({Point{500, 500}, 40.0, false}, 0);
    CHECK(s.actuations.empty());
    Millis inside_from = -1, inside_until = -1;
    for (const auto& g : s.gaze) {
        if (g.t < s.fixation_onset) continue;
        if (distance(g.pos(), {500, 500}) <= 60.0) {
            if (inside_from < 0) inside_from = g.t;
            inside_until = g.t;
        }
    }
    CHECK(inside_until - inside_from >= 500);
}

TEST_CASE("pulse-mode agent: onset = fixation onset + settle + pulse latency") {
    ParticipantModel m;
    m.actuation = Actuation::pulse;
    m.settle_ms = 150;
    m.pulse_latency_ms = 100;
    Agent a(m, {});
    const auto s = a.step({Point{500, 500}, 40.0, false}, 1000);
    REQUIRE(s.actuations.size() == 1);
    CHECK(s.actuations[0].kind == Actuation::pulse);
    CHECK(s.actuations[0].t - s.fixation_onset == 250);
    CHECK(s.movement_start == 1000 + m.reaction_ms);
    CHECK_THROWS_AS(a.step({}, 2000), InvalidState);
}

TEST_CASE("agent streams are strictly ordered and on screen across re-plans") {
    ParticipantModel m;
    m.actuation = Actuation::pulse;
    m.jitter_sigma_px = 80.0;
    ScreenSpec screen;
    Agent a(m, screen);
    Rng rng(3);
    Millis now = 0;
    Millis last = -1;
    for (int k = 0; k < 200; ++k) {
        const Point goal{rng.uniform(0, 1919), rng.uniform(0, 1079)};
        const auto s = a.step({goal, 20.0, rng.bernoulli(0.2)}, now);
        const Millis cut = now + static_cast<Millis>(rng.below(3000));
        for (const auto& g : s.gaze) {
            if (g.t > cut) break;
            CHECK(g.t > last);
            CHECK(screen.contains(g.pos()));
            last = g.t;
        }
        a.interrupt(cut);
        now = cut;
    }
}

TEST_CASE("dwell agent on an endless fixation selects within dwell + settle + 1 s") {
    SessionConfig cfg;
    cfg.technique = Technique::dwell;
    cfg.task = TaskKind::dart;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        cfg.seed = seed;
        const auto log = simulate_session(cfg);
        Millis shown = -1;
        for (const auto& e : log.events) {
            if (const auto* t = std::get_if<TaskShownRecord>(&e)) shown = t->t;
            if (const auto* s = std::get_if<SelectionRecord>(&e)) {
                CHECK(s->t - shown <= cfg.dwell_threshold_ms + cfg.participant.settle_ms + 1000);
            }
        }
        CHECK(log.complete());
    }
}

TEST_CASE("replay of an empty log gives empty streams") {
    const auto r = replay(SessionLog{});
    CHECK(r.gaze.empty());
    CHECK(r.pulses.empty());
    CHECK(r.ordered.empty());
}
