#include "eyetap/tasks.hpp"

#include "eyetap/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eyetap {

std::string_view to_string(Shape s) {
    switch (s) {
        case Shape::rect: return "rect";
        case Shape::circle: return "circle";
        case Shape::ribbon: return "ribbon";
    }
    return "?";
}

Shape parse_shape(std::string_view s) {
    if (s == "rect") return Shape::rect;
    if (s == "circle") return Shape::circle;
    if (s == "ribbon") return Shape::ribbon;
    throw InvalidInput("unknown shape '" + std::string(s) + "'");
}

bool Target::contains(Point p) const {
    switch (shape) {
        case Shape::circle: return distance(p, center) <= radius;
        case Shape::ribbon: return std::abs(p.x - center.x) <= size.x / 2.0;
        case Shape::rect: return std::abs(p.x - center.x) <= size.x / 2.0 && std::abs(p.y - center.y) <= size.y / 2.0;
    }
    return false;
}

double Target::half_extent() const {
    switch (shape) {
        case Shape::circle: return radius;
        case Shape::ribbon: return size.x / 2.0;
        case Shape::rect: return std::min(size.x, size.y) / 2.0;
    }
    return 0.0;
}

bool Target::fits(const ScreenSpec& screen) const {
    double hx = size.x / 2.0, hy = size.y / 2.0;
    if (shape == Shape::circle) hx = hy = radius;
    constexpr double eps = 1e-9;
    return center.x - hx >= -eps && center.y - hy >= -eps && center.x + hx <= screen.width + eps &&
           center.y + hy <= screen.height + eps;
}

namespace {

std::optional<int> first_containing(const std::vector<Target>& targets, Point p) {
    for (const auto& t : targets) {
        if (t.contains(p)) return t.id;
    }
    return std::nullopt;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace

// --- matrix ----------------------------------------------------------------

int matrix_target_count(int level) {
    if (level < 1 || level > 5) throw InvalidSpec("matrix level must be in 1..5");
    return 2 + 2 * level;
}

void MatrixSpec::validate() const {
    screen.validate();
    if (cols < 3 || rows < 3) throw InvalidSpec("matrix needs at least 3 columns and 3 rows");
    if (target_count() > active_cell_count()) throw InvalidSpec("matrix level needs more targets than active cells");
}

bool MatrixLayout::is_active(int cell_id) const {
    const int c = cell_id % spec.cols;
    const int r = cell_id / spec.cols;
    return c > 0 && c < spec.cols - 1 && r > 0 && r < spec.rows - 1;
}

std::optional<int> MatrixLayout::cell_at(Point p) const { return first_containing(cells, p); }

MatrixLayout gen_matrix_level(const MatrixSpec& spec) {
    spec.validate();
    MatrixLayout layout;
    layout.spec = spec;
    const double cw = static_cast<double>(spec.screen.width) / spec.cols;
    const double ch = static_cast<double>(spec.screen.height) / spec.rows;
    std::vector<int> active;
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            Target t;
            t.id = r * spec.cols + c;
            t.shape = Shape::rect;
            t.center = {(c + 0.5) * cw, (r + 0.5) * ch};
            t.size = {cw, ch};
            t.is_barrier = true;
            layout.cells.push_back(t);
            if (layout.is_active(t.id)) active.push_back(t.id);
        }
    }
    Rng rng(derive_seed(spec.seed, 0x6d61));
    shuffle(active, rng);
    const int n = spec.target_count();
    for (int k = 0; k < n; ++k) {
        auto& cell = layout.cells[static_cast<std::size_t>(active[static_cast<std::size_t>(k)])];
        cell.label = k + 1;
        cell.is_barrier = false;
        layout.order.push_back(cell.id);
    }
    return layout;
}

std::string_view to_string(MatrixOutcome::Kind k) {
    switch (k) {
        case MatrixOutcome::Kind::advance: return "advance";
        case MatrixOutcome::Kind::error: return "error";
        case MatrixOutcome::Kind::complete: return "complete";
    }
    return "?";
}

MatrixOutcome MatrixJudge::judge(const SelectionEvent& sel) {
    if (complete()) throw InvalidState("matrix level already complete");
    const auto cell = layout_->cell_at(layout_->spec.screen.clamp(sel.pos()));
    const int cell_id = cell.value_or(0);
    const int expected = next_;
    if (cell && *cell == layout_->order[static_cast<std::size_t>(next_ - 1)]) {
        ++next_;
        return {complete() ? MatrixOutcome::Kind::complete : MatrixOutcome::Kind::advance, cell_id, expected};
    }
    ++errors_;
    return {MatrixOutcome::Kind::error, cell_id, expected};
}

// --- dart ------------------------------------------------------------------

void DartSpec::validate() const {
    screen.validate();
    if (!(ring_radii[0] > 0 && ring_radii[0] < ring_radii[1] && ring_radii[1] < ring_radii[2]))
        throw InvalidSpec("dart ring radii must be positive and increasing");
    if (trials < 1) throw InvalidSpec("dart needs at least one trial");
    if (inter_trial_ms < 0) throw InvalidSpec("dart inter_trial_ms must be >= 0");
    if (2 * max_distance() > std::min(screen.width, screen.height)) throw InvalidSpec("dart does not fit on screen");
}

std::vector<Point> gen_dart_centers(const DartSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, 0x6461));
    const double r = spec.max_distance();
    const double w = spec.screen.width, h = spec.screen.height;
    const double x0 = std::max(w / 3.0, r), x1 = std::min(2.0 * w / 3.0, w - r);
    const double y0 = std::max(h / 3.0, r), y1 = std::min(2.0 * h / 3.0, h - r);
    std::vector<Point> out;
    for (int i = 0; i < spec.trials; ++i) {
        const double x = rng.uniform(x0, x1);
        const double y = rng.uniform(y0, y1);
        out.push_back({x, y});
    }
    return out;
}

double dart_score(Point endpoint, Point center, double max_distance) {
    return std::min(distance(endpoint, center), max_distance);
}

// --- Fitts -----------------------------------------------------------------

std::string_view to_string(FittsKind k) { return k == FittsKind::ribbon ? "ribbon" : "circle"; }

FittsKind parse_fitts_kind(std::string_view s) {
    if (s == "ribbon") return FittsKind::ribbon;
    if (s == "circle") return FittsKind::circle;
    throw InvalidInput("unknown Fitts kind '" + std::string(s) + "'");
}

void FittsSpec::validate() const {
    screen.validate();
    if (distances.empty() || widths.empty()) throw InvalidSpec("Fitts spec needs distances and widths");
    for (double d : distances)
        if (!(d > 0)) throw InvalidSpec("Fitts distances must be positive");
    for (double w : widths)
        if (!(w > 0)) throw InvalidSpec("Fitts widths must be positive");
    if (trials_per_condition < 1) throw InvalidSpec("Fitts trials_per_condition must be >= 1");
    if (kind == FittsKind::circle && circle_targets_per_ring < 2) throw InvalidSpec("Fitts ring needs >= 2 targets");
}

int circle_hop(int k, int n) {
    const int step = (n + 1) / 2;
    return static_cast<int>((static_cast<std::int64_t>(k) * step) % n);
}

std::vector<FittsCondition> gen_fitts_sequence(const FittsSpec& spec) {
    spec.validate();
    std::vector<FittsCondition> conditions;
    for (double d : spec.distances) {
        for (double w : spec.widths) {
            FittsCondition c;
            c.distance = d;
            c.width = w;
            conditions.push_back(std::move(c));
        }
    }
    Rng rng(derive_seed(spec.seed, 0x6674));
    shuffle(conditions, rng);

    const Point mid = spec.screen.center();
    int trial_id = 0;
    for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
        auto& c = conditions[ci];
        c.index = static_cast<int>(ci);
        if (spec.kind == FittsKind::ribbon) {
            for (int side = 0; side < 2; ++side) {
                Target t;
                t.id = side;
                t.shape = Shape::ribbon;
                t.center = {mid.x + (side == 0 ? -c.distance / 2.0 : c.distance / 2.0), mid.y};
                t.size = {c.width, static_cast<double>(spec.screen.height)};
                c.targets.push_back(t);
            }
            c.start_target = c.targets[0];
            for (int k = 1; k <= spec.trials_per_condition; ++k) {
                FittsTrial tr;
                tr.trial_id = trial_id++;
                tr.condition = c.index;
                tr.distance = c.distance;
                tr.width = c.width;
                tr.start = c.targets[static_cast<std::size_t>((k - 1) % 2)].center;
                tr.target = c.targets[static_cast<std::size_t>(k % 2)];
                c.trials.push_back(tr);
            }
        } else {
            const int n = spec.circle_targets_per_ring;
            for (int i = 0; i < n; ++i) {
                const double a = -std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * i / n;
                Target t;
                t.id = i;
                t.shape = Shape::circle;
                t.center = {mid.x + c.distance / 2.0 * std::cos(a), mid.y + c.distance / 2.0 * std::sin(a)};
                t.radius = c.width / 2.0;
                c.targets.push_back(t);
            }
            c.start_target = c.targets[static_cast<std::size_t>(circle_hop(0, n))];
            for (int k = 1; k <= spec.trials_per_condition; ++k) {
                FittsTrial tr;
                tr.trial_id = trial_id++;
                tr.condition = c.index;
                tr.distance = c.distance;
                tr.width = c.width;
                tr.start = c.targets[static_cast<std::size_t>(circle_hop(k - 1, n))].center;
                tr.target = c.targets[static_cast<std::size_t>(circle_hop(k, n))];
                c.trials.push_back(tr);
            }
        }
        for (const auto& t : c.targets) {
            if (!t.fits(spec.screen)) throw InvalidSpec("Fitts geometry exceeds the screen");
        }
    }
    return conditions;
}

TrialOutcome fitts_judge(const FittsTrial& trial, const SelectionEvent& sel, Millis trial_start_t, Point from) {
    TrialOutcome out;
    out.trial_id = trial.trial_id;
    out.condition = trial.condition;
    out.distance = trial.distance;
    out.width = trial.width;
    out.start = trial.start;
    out.from = from;
    out.target = trial.target.center;
    out.endpoint = sel.pos();
    out.movement_time = sel.t - trial_start_t;
    out.hit = trial.target.contains(sel.pos());
    out.errors_in_trial = out.hit ? 0 : 1;
    return out;
}

// --- runners -----------------------------------------------------------------

std::string task_name(const TaskSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, MatrixSpec>) return "matrix";
            else if constexpr (std::is_same_v<T, DartSpec>) return "dart";
            else return std::string(to_string(s.kind));
        },
        spec);
}

void validate(const TaskSpec& spec) {
    std::visit([](const auto& s) { s.validate(); }, spec);
}

namespace {

class MatrixRunner final : public TaskRunner {
public:
    explicit MatrixRunner(const MatrixSpec& spec) : layout_(gen_matrix_level(spec)), judge_(layout_) {}

    std::vector<TaskEvent> start(Millis now) override {
        start_t_ = now;
        return {shown()};
    }

    std::vector<TaskEvent> on_selection(const SelectionEvent& sel, Millis now) override {
        if (judge_.complete()) return {};
        const auto r = judge_.judge(sel);
        JudgeOutcome j;
        j.kind = std::string(to_string(r.kind));
        j.sel_t = sel.t;
        j.endpoint = sel.pos();
        j.cell = r.cell;
        j.ordinal = r.expected_ordinal;
        std::vector<TaskEvent> out{j};
        if (r.kind == MatrixOutcome::Kind::advance) out.push_back(shown());
        if (r.kind == MatrixOutcome::Kind::complete) out.push_back(BlockComplete{0, start_t_, now, judge_.errors()});
        return out;
    }

    TaskView view() const override {
        if (judge_.complete()) return {};
        const auto& t = layout_.labeled(judge_.current_ordinal());
        return {t.center, t.half_extent(), false};
    }

    std::optional<int> hit_test(Point p) const override { return layout_.cell_at(p); }
    std::vector<Target> visible_targets() const override { return layout_.cells; }
    bool complete() const override { return judge_.complete(); }
    Millis block_start() const override { return start_t_; }

private:
    TaskShown shown() const {
        return {0, judge_.current_ordinal(), layout_.labeled(judge_.current_ordinal())};
    }

    MatrixLayout layout_;
    MatrixJudge judge_;
    Millis start_t_ = 0;
};

class DartRunner final : public TaskRunner {
public:
    explicit DartRunner(const DartSpec& spec) : spec_(spec), centers_(gen_dart_centers(spec)) {}

    std::vector<TaskEvent> start(Millis now) override {
        task_start_ = now;
        return {show(now)};
    }

    std::vector<TaskEvent> on_selection(const SelectionEvent& sel, Millis now) override {
        if (!active_ || done_) return {};
        JudgeOutcome j;
        j.kind = "dart";
        j.block = trial_;
        j.sel_t = sel.t;
        j.endpoint = sel.pos();
        j.center = centers_[static_cast<std::size_t>(trial_)];
        j.distance = dart_score(sel.pos(), *j.center, spec_.max_distance());
        active_ = false;
        std::vector<TaskEvent> out{j};
        if (trial_ + 1 >= spec_.trials) {
            done_ = true;
            out.push_back(BlockComplete{0, task_start_, now, 0});
        } else {
            next_show_ = now + spec_.inter_trial_ms;
        }
        return out;
    }

    std::vector<TaskEvent> tick(Millis now) override {
        if (!next_show_ || now < *next_show_) return {};
        next_show_.reset();
        ++trial_;
        return {show(now)};
    }

    std::optional<Millis> next_deadline() const override { return next_show_; }

    TaskView view() const override {
        if (!active_ || done_) return {};
        return {centers_[static_cast<std::size_t>(trial_)], spec_.ring_radii[0], false};
    }

    std::optional<int> hit_test(Point p) const override {
        if (!active_ || done_) return std::nullopt;
        if (distance(p, centers_[static_cast<std::size_t>(trial_)]) <= spec_.max_distance()) return trial_;
        return std::nullopt;
    }

    std::vector<Target> visible_targets() const override {
        if (!active_ || done_) return {};
        return {dart_target()};
    }

    bool complete() const override { return done_; }
    Millis block_start() const override { return shown_t_; }

private:
    Target dart_target() const {
        Target t;
        t.id = trial_;
        t.shape = Shape::circle;
        t.center = centers_[static_cast<std::size_t>(trial_)];
        t.radius = spec_.max_distance();
        return t;
    }

    TaskShown show(Millis now) {
        active_ = true;
        shown_t_ = now;
        return {trial_, trial_, dart_target()};
    }

    DartSpec spec_;
    std::vector<Point> centers_;
    int trial_ = 0;
    bool active_ = false;
    bool done_ = false;
    Millis task_start_ = 0;
    Millis shown_t_ = 0;
    std::optional<Millis> next_show_;
};

class FittsRunner final : public TaskRunner {
public:
    explicit FittsRunner(const FittsSpec& spec) : spec_(spec), conditions_(gen_fitts_sequence(spec)) {}

    std::vector<TaskEvent> start(Millis now) override {
        block_start_ = now;
        return {shown()};
    }

    std::vector<TaskEvent> on_selection(const SelectionEvent& sel, Millis now) override {
        if (complete()) return {};
        const auto& c = condition();
        std::vector<TaskEvent> out;
        JudgeOutcome j;
        j.block = cond_;
        j.sel_t = sel.t;
        j.endpoint = sel.pos();
        if (trial_ < 0) {
            j.kind = "warmup";
            out.push_back(j);
            trial_ = 0;
            errors_ = 0;
            last_sel_t_ = sel.t;
            last_endpoint_ = sel.pos();
            out.push_back(shown());
            return out;
        }
        const auto& tr = c.trials[static_cast<std::size_t>(trial_)];
        auto outcome = fitts_judge(tr, sel, last_sel_t_, last_endpoint_);
        if (!outcome.hit && spec_.count_multiple_attempts) {
            ++errors_;
            j.kind = "miss";
            out.push_back(j);
            return out;
        }
        outcome.errors_in_trial = spec_.count_multiple_attempts ? errors_ : outcome.errors_in_trial;
        block_errors_ += outcome.errors_in_trial;
        j.kind = "trial";
        j.trial = outcome;
        out.push_back(j);
        last_sel_t_ = sel.t;
        last_endpoint_ = sel.pos();
        errors_ = 0;
        ++trial_;
        if (trial_ >= static_cast<int>(c.trials.size())) {
            out.push_back(BlockComplete{cond_, block_start_, now, block_errors_});
            ++cond_;
            trial_ = -1;
            block_errors_ = 0;
            block_start_ = now;
            if (!complete()) out.push_back(shown());
        } else {
            out.push_back(shown());
        }
        return out;
    }

    TaskView view() const override {
        if (complete()) return {};
        const Target& t = goal();
        Point aim = t.center;
        return {aim, t.half_extent(), false};
    }

    std::optional<int> hit_test(Point p) const override {
        if (complete()) return std::nullopt;
        // Small circles overlap their neighbours; the highlighted target wins.
        if (goal().contains(p)) return goal().id;
        return first_containing(condition().targets, p);
    }

    std::vector<Target> visible_targets() const override {
        if (complete()) return {};
        return condition().targets;
    }

    bool complete() const override { return cond_ >= static_cast<int>(conditions_.size()); }
    Millis block_start() const override { return block_start_; }

private:
    const FittsCondition& condition() const { return conditions_[static_cast<std::size_t>(cond_)]; }
    const Target& goal() const {
        const auto& c = condition();
        return trial_ < 0 ? c.start_target : c.trials[static_cast<std::size_t>(trial_)].target;
    }
    TaskShown shown() const { return {cond_, trial_ + 1, goal()}; }

    FittsSpec spec_;
    std::vector<FittsCondition> conditions_;
    int cond_ = 0;
    int trial_ = -1;  // -1: waiting for the untimed start selection
    int errors_ = 0;
    int block_errors_ = 0;
    Millis block_start_ = 0;
    Millis last_sel_t_ = 0;
    Point last_endpoint_;
};

}  // namespace

std::unique_ptr<TaskRunner> make_task_runner(const TaskSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::unique_ptr<TaskRunner> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, MatrixSpec>) return std::make_unique<MatrixRunner>(s);
            else if constexpr (std::is_same_v<T, DartSpec>) return std::make_unique<DartRunner>(s);
            else return std::make_unique<FittsRunner>(s);
        },
        spec);
}

}  // namespace eyetap
