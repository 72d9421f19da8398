#include "eyetap/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace eyetap;

namespace {

TrialOutcome trial(double d, double w, Point start, Point target, Point endpoint, Millis mt, bool hit = true) {
    TrialOutcome t;
    t.distance = d;
    t.width = w;
    t.start = start;
    t.from = start;
    t.target = target;
    t.endpoint = endpoint;
    t.movement_time = mt;
    t.hit = hit;
    return t;
}

std::vector<GazeSample> line_path(Point a, Point b, Millis span, double rate, Point offset = {}) {
    std::vector<GazeSample> out;
    const auto n = static_cast<int>(std::floor(static_cast<double>(span) * rate / 1000.0)) + 1;
    for (int i = 0; i < n; ++i) {
        const double u = static_cast<double>(i) / (n - 1);
        const Point p = a + (b - a) * u + offset;
        out.push_back({static_cast<Millis>(std::llround(u * static_cast<double>(span))), p.x, p.y, true});
    }
    return out;
}

}  // namespace

TEST_CASE("dtw small cases") {
    const std::vector<double> a{1, 2, 3};
    CHECK(dtw(a, a).cost == 0.0);
    CHECK(dtw(std::vector<double>{0, 0, 0}, std::vector<double>{1, 1}).cost == 3.0);
    CHECK_THROWS_AS(dtw(std::vector<double>{}, a), InvalidInput);
}

TEST_CASE("dtw matches exhaustive warp-path enumeration and is symmetric") {
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<int> len(1, 6), val(-5, 5);
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<double> a(static_cast<std::size_t>(len(gen))), b(static_cast<std::size_t>(len(gen)));
        for (auto& v : a) v = val(gen);
        for (auto& v : b) v = val(gen);
        const auto r = dtw(a, b);
        CHECK(r.cost == doctest::Approx(oracle::dtw_enumerate(a, b)));
        const auto c = oracle::path_cost_of(a, b, r.path);
        REQUIRE(c);
        CHECK(*c == doctest::Approx(r.cost));
        CHECK(dtw(b, a).cost == doctest::Approx(r.cost));
    }
}

TEST_CASE("dtw matches a memoized recursion on longer random pairs") {
    std::mt19937_64 gen(19);
    std::uniform_int_distribution<int> len(1, 10);
    std::normal_distribution<double> val(0.0, 50.0);
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<double> a(static_cast<std::size_t>(len(gen))), b(static_cast<std::size_t>(len(gen)));
        for (auto& v : a) v = val(gen);
        for (auto& v : b) v = val(gen);
        const auto r = dtw(a, b);
        CHECK(r.cost == doctest::Approx(oracle::dtw_memo(a, b)));
        CHECK(oracle::path_cost_of(a, b, r.path).value() == doctest::Approx(r.cost));
    }
}

TEST_CASE("path cost: zero on the ideal path, offset shows up on one axis") {
    const std::vector<Point> vertical{{500, 100}, {500, 900}};
    CHECK(path_cost(line_path(vertical[0], vertical[1], 1000, 60), vertical, 60).combined == doctest::Approx(0.0));
    const auto shifted = path_cost(line_path(vertical[0], vertical[1], 1000, 60, {10, 0}), vertical, 60);
    CHECK(shifted.dtw_y == doctest::Approx(0.0));
    CHECK(shifted.combined == doctest::Approx(5.0));
}

TEST_CASE("path cost is stable when the sampling rate doubles") {
    // Deviation across the direction of travel, which warping cannot absorb.
    const std::vector<Point> targets{{200, 100}, {200, 900}, {1000, 900}};
    auto cost = [&](double rate) {
        const auto ideal = resample_polyline(targets, static_cast<std::size_t>(2 * rate) + 1);
        std::vector<GazeSample> s;
        for (std::size_t i = 0; i < ideal.size(); ++i) {
            const double t = static_cast<double>(i) * 1000.0 / rate;
            const double d = 10 + 5 * std::sin(t / 200.0);
            Point p = ideal[i];
            (p.y < 900 ? p.x : p.y) += d;
            s.push_back({static_cast<Millis>(std::llround(t)), p.x, p.y, true});
        }
        return path_cost(s, targets, rate).combined;
    };
    for (double rate : {30.0, 60.0, 120.0}) {
        const double lo = cost(rate), hi = cost(2 * rate);
        CHECK(std::fabs(hi - lo) / lo < 0.05);
    }
}

TEST_CASE("resample_polyline spaces points by arc length") {
    const std::vector<Point> w{{0, 0}, {10, 0}, {10, 10}};
    const auto r = resample_polyline(w, 5);
    REQUIRE(r.size() == 5);
    CHECK(r[1] == Point{5, 0});
    CHECK(r[2] == Point{10, 0});
    CHECK(r[3] == Point{10, 5});
    CHECK(r[4] == Point{10, 10});
}

TEST_CASE("univariate throughput worked example") {
    // Deviations -2, 0, 2, 0 along the axis: SD = sqrt(8/3).
    std::vector<TrialOutcome> ts;
    for (double dev : {-2.0, 0.0, 2.0, 0.0})
        ts.push_back(trial(200, 40, {0, 0}, {200, 0}, {200 + dev, 0}, 500));
    CHECK(sd_univariate(ts) == doctest::Approx(std::sqrt(8.0 / 3.0)));
    const auto r = throughput(ts, TpVariant::univariate);
    REQUIRE(r.per_condition.size() == 1);
    const auto& c = r.per_condition[0];
    CHECK(c.we == doctest::Approx(4.133 * std::sqrt(8.0 / 3.0)));
    CHECK(c.de == doctest::Approx(200.0));
    CHECK(c.tp == doctest::Approx(std::log2(200.0 / c.we + 1.0) / 0.5));
}

TEST_CASE("effective width 41.33 and IDe log2(3)") {
    // SD 10 -> We 41.33; De = 2 We -> IDe = log2(3).
    const double we = 41.33;
    std::vector<TrialOutcome> ts;
    for (double dev : {-10.0, 10.0, -10.0, 10.0})
        ts.push_back(trial(2 * we, 40, {0, 0}, {2 * we, 0}, {2 * we + dev, 0}, 1000));
    // Sample SD of +-10 over four trials is 10 * sqrt(4/3); rescale to exactly 10.
    const double k = std::sqrt(3.0 / 4.0);
    for (auto& t : ts) t.endpoint.x = t.target.x + (t.endpoint.x - t.target.x) * k;
    const auto c = throughput(ts, TpVariant::univariate).per_condition[0];
    CHECK(c.sd == doctest::Approx(10.0));
    CHECK(c.we == doctest::Approx(41.33));
    CHECK(c.ide == doctest::Approx(std::log2(3.0)));
    CHECK(c.tp == doctest::Approx(std::log2(3.0)));
}

TEST_CASE("throughput is invariant under translation and rotation") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> n(0.0, 8.0);
    std::vector<TrialOutcome> base;
    for (int i = 0; i < 12; ++i) {
        const Point s{0, 0}, tgt{300, 0};
        base.push_back(trial(300, 64, s, tgt, tgt + Point{n(gen), n(gen)}, 600 + i * 10));
    }
    const double ang = 0.7;
    auto move = [&](Point p) {
        return Point{p.x * std::cos(ang) - p.y * std::sin(ang) + 400, p.x * std::sin(ang) + p.y * std::cos(ang) + 250};
    };
    auto moved = base;
    for (auto& t : moved) {
        t.start = move(t.start);
        t.from = move(t.from);
        t.target = move(t.target);
        t.endpoint = move(t.endpoint);
    }
    for (auto v : {TpVariant::univariate, TpVariant::bivariate})
        CHECK(throughput(moved, v).mean_tp == doctest::Approx(throughput(base, v).mean_tp));
}

TEST_CASE("degenerate conditions are excluded") {
    std::vector<TrialOutcome> one{trial(100, 20, {0, 0}, {100, 0}, {101, 0}, 400)};
    const auto r = throughput(one, TpVariant::univariate);
    CHECK(r.per_condition[0].excluded);
    CHECK(r.mean_tp == 0.0);
}

TEST_CASE("error rate") {
    std::vector<TrialOutcome> ts(10, trial(100, 20, {}, {100, 0}, {100, 0}, 300));
    CHECK(error_rate(ts) == 0.0);
    ts[3].hit = false;
    CHECK(error_rate(ts) == doctest::Approx(0.10));
    CHECK_THROWS_AS(error_rate(std::vector<TrialOutcome>{}), InvalidInput);
}

TEST_CASE("error heatmap bins and halves") {
    const ScreenSpec screen;
    const auto empty = error_heatmap(std::vector<Point>{}, 11, 7, screen);
    CHECK(empty.total == 0);
    for (int v : empty.counts) CHECK(v == 0);
    const std::vector<Point> pts{{1800, 100}, {1810, 110}, {1805, 120}};
    const auto h = error_heatmap(pts, 11, 7, screen);
    CHECK(h.at(10, 0) == 3);
    CHECK(h.right == 3);
    CHECK(h.left == 0);
    CHECK(h.top == 3);
    CHECK(error_heatmap(std::vector<Point>{{5000, -4}}, 11, 7, screen).at(10, 0) == 1);
}

TEST_CASE("raw TLX") {
    CHECK(tlx_overall({50, 50, 50, 50, 50, 50}) == 50.0);
    CHECK(tlx_overall({10, 20, 30, 40, 50, 60}) == doctest::Approx(35.0));
    CHECK(tlx_overall({60, 50, 40, 30, 20, 10}) == doctest::Approx(35.0));
    CHECK_THROWS_AS(tlx_overall({101, 0, 0, 0, 0, 0}), InvalidInput);
}

TEST_CASE("bivariate SD of the four-corner example") {
    const std::vector<Point> corners{{1, 1}, {-1, 1}, {1, -1}, {-1, -1}};
    CHECK(std::fabs(sd_bivariate(corners) - std::sqrt(8.0 / 3.0)) < 1e-9);
    CHECK(nominal_id(256, 128) == std::log2(3.0));
}
