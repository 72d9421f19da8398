#include "eyetap/tasks.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace eyetap;

namespace {

SelectionEvent at(Point p, Millis t = 0) { return {t, p.x, p.y, Technique::pointer, t}; }

}  // namespace

TEST_CASE("matrix geometry: 77 cells, 45 active, 2 + 2 * level labels") {
    CHECK(MatrixSpec{}.active_cell_count() == 45);
    for (int level = 1; level <= 5; ++level) {
        CHECK(matrix_target_count(level) == std::vector<int>{4, 6, 8, 10, 12}[level - 1]);
        for (std::uint64_t seed = 1; seed <= 30; ++seed) {
            MatrixSpec spec;
            spec.level = level;
            spec.seed = seed;
            const auto m = gen_matrix_level(spec);
            REQUIRE(m.cells.size() == 77);
            int labeled = 0, barriers = 0;
            std::vector<int> labels;
            for (const auto& c : m.cells) {
                if (c.label) {
                    ++labeled;
                    labels.push_back(*c.label);
                    CHECK(m.is_active(c.id));
                }
                barriers += c.is_barrier ? 1 : 0;
                CHECK(c.fits(spec.screen));
            }
            CHECK(labeled == matrix_target_count(level));
            CHECK(labeled + barriers == 77);
            std::sort(labels.begin(), labels.end());
            for (int k = 0; k < labeled; ++k) CHECK(labels[static_cast<std::size_t>(k)] == k + 1);
        }
    }
    CHECK_THROWS_AS(matrix_target_count(0), InvalidSpec);
    CHECK_THROWS_AS(matrix_target_count(6), InvalidSpec);
}

TEST_CASE("matrix layouts depend on the seed only") {
    MatrixSpec a, b;
    b.seed = 2;
    CHECK(gen_matrix_level(a).order == gen_matrix_level(a).order);
    CHECK(gen_matrix_level(a).order != gen_matrix_level(b).order);
}

TEST_CASE("matrix judge: ordered hits complete, barriers and out-of-order hits are errors") {
    MatrixSpec spec;
    spec.level = 1;
    const auto m = gen_matrix_level(spec);
    MatrixJudge j(m);
    CHECK(j.judge(at(m.labeled(1).center)).kind == MatrixOutcome::Kind::advance);
    const int barrier = m.order.front() == 0 ? 1 : 0;
    const auto b = j.judge(at(m.cells[static_cast<std::size_t>(barrier)].center));
    CHECK(b.kind == MatrixOutcome::Kind::error);
    CHECK(b.cell == barrier);
    const auto ooo = j.judge(at(m.labeled(3).center));
    CHECK(ooo.kind == MatrixOutcome::Kind::error);
    CHECK(ooo.expected_ordinal == 2);
    CHECK(j.judge(at(m.labeled(2).center)).kind == MatrixOutcome::Kind::advance);
    CHECK(j.judge(at(m.labeled(3).center)).kind == MatrixOutcome::Kind::advance);
    CHECK(j.judge(at(m.labeled(4).center)).kind == MatrixOutcome::Kind::complete);
    CHECK(j.errors() == 2);
    CHECK_THROWS_AS(j.judge(at(m.labeled(1).center)), InvalidState);

    MatrixJudge clean(m);
    for (int k = 1; k <= 4; ++k) clean.judge(at(m.labeled(k).center));
    CHECK(clean.complete());
    CHECK(clean.errors() == 0);
}

TEST_CASE("matrix hit testing includes cell edges") {
    const auto m = gen_matrix_level(MatrixSpec{});
    const auto& c = m.cells[12];
    CHECK(c.contains({c.center.x + c.size.x / 2.0, c.center.y}));
    CHECK_FALSE(c.contains({c.center.x + c.size.x / 2.0 + 0.01, c.center.y}));
}

TEST_CASE("dart score clamps at 90 px") {
    CHECK(dart_score({500, 500}, {500, 500}) == 0.0);
    CHECK(dart_score({525, 500}, {500, 500}) == doctest::Approx(25.0));
    CHECK(dart_score({700, 500}, {500, 500}) == 90.0);
}

TEST_CASE("dart centers sit in the central third with the dart visible") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        DartSpec spec;
        spec.seed = seed;
        for (const auto& p : gen_dart_centers(spec)) {
            CHECK(p.x >= 640.0);
            CHECK(p.x <= 1280.0);
            CHECK(p.y >= 360.0);
            CHECK(p.y <= 720.0);
            CHECK(p.x - 90 >= 0);
            CHECK(p.y + 90 <= 1080);
        }
    }
}

TEST_CASE("Fitts sequence: all six conditions once, ribbon distances, circle hop covers the ring") {
    for (auto kind : {FittsKind::ribbon, FittsKind::circle}) {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            FittsSpec spec;
            spec.kind = kind;
            spec.seed = seed;
            const auto seq = gen_fitts_sequence(spec);
            REQUIRE(seq.size() == 6);
            std::set<std::pair<double, double>> seen;
            for (const auto& c : seq) {
                seen.insert({c.distance, c.width});
                CHECK(c.trials.size() == 9);
                for (const auto& t : c.targets) CHECK(t.fits(spec.screen));
                if (kind == FittsKind::ribbon) {
                    Point prev = c.start_target.center;
                    for (const auto& tr : c.trials) {
                        CHECK(std::fabs(tr.target.center.x - prev.x) == doctest::Approx(c.distance));
                        prev = tr.target.center;
                    }
                }
            }
            CHECK(seen.size() == 6);
        }
    }
    std::set<int> visited;
    for (int k = 0; k < 11; ++k) visited.insert(circle_hop(k, 11));
    CHECK(visited.size() == 11);
}

TEST_CASE("Fitts judge: edge is a hit, outside a miss, MT from the previous selection") {
    FittsTrial tr;
    tr.distance = 256;
    tr.width = 96;
    tr.target.shape = Shape::ribbon;
    tr.target.center = {1088, 540};
    tr.target.size = {96, 1080};
    CHECK(fitts_judge(tr, at({1088 + 48, 100}, 1800), 1000, {832, 540}).hit);
    const auto miss = fitts_judge(tr, at({1088 + 48.5, 100}, 1800), 1000, {832, 540});
    CHECK_FALSE(miss.hit);
    CHECK(miss.errors_in_trial == 1);
    CHECK(miss.movement_time == 800);
}

TEST_CASE("Fitts runner: warm-up, trials, per-condition block events") {
    FittsSpec spec;
    spec.trials_per_condition = 3;
    auto r = make_task_runner(spec);
    r->start(0);
    int trials = 0, blocks = 0, warmups = 0;
    Millis t = 0;
    while (!r->complete()) {
        t += 700;
        const auto v = r->view();
        REQUIRE(v.goal);
        for (const auto& e : r->on_selection(at(*v.goal, t), t)) {
            if (const auto* j = std::get_if<JudgeOutcome>(&e)) {
                if (j->kind == "warmup") ++warmups;
                if (j->kind == "trial") {
                    ++trials;
                    CHECK(j->trial->hit);
                    CHECK(j->trial->movement_time == 700);
                }
            }
            if (std::holds_alternative<BlockComplete>(e)) ++blocks;
        }
    }
    CHECK(warmups == 6);
    CHECK(trials == 18);
    CHECK(blocks == 6);
}

TEST_CASE("Fitts runner with multiple attempts keeps the trial open after a miss") {
    FittsSpec spec;
    spec.trials_per_condition = 1;
    spec.count_multiple_attempts = true;
    auto r = make_task_runner(spec);
    r->start(0);
    r->on_selection(at(*r->view().goal, 10), 10);
    const Point goal = *r->view().goal;
    const auto wrong = r->on_selection(at({5, 5}, 30), 30);
    REQUIRE(std::get<JudgeOutcome>(wrong.front()).kind == "miss");
    CHECK(*r->view().goal == goal);
    const auto hit = r->on_selection(at(goal, 40), 40);
    const auto& tr = *std::get<JudgeOutcome>(hit.front()).trial;
    CHECK(tr.hit);
    CHECK(tr.errors_in_trial == 1);
}

TEST_CASE("dart runner hides the target between trials") {
    DartSpec spec;
    spec.trials = 2;
    auto r = make_task_runner(spec);
    r->start(0);
    const Point c = *r->view().goal;
    const auto ev = r->on_selection(at({c.x + 25, c.y}, 500), 500);
    CHECK(*std::get<JudgeOutcome>(ev.front()).distance == doctest::Approx(25.0));
    CHECK_FALSE(r->view().goal);
    CHECK(r->next_deadline() == 2500);
    CHECK(r->tick(2499).empty());
    CHECK(r->tick(2500).size() == 1);
    CHECK(r->view().goal);
}
