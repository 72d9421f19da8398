#pragma once

// Experiment protocols: matrix (ordered labeled buttons among barriers),
// dart accuracy, and ribbon/circle Fitts sequences. Each protocol has a
// pure geometry generator, a judge, and a TaskRunner that sequences them.

#include "eyetap/common.hpp"
#include "eyetap/inputsim.hpp"
#include "eyetap/techniques.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace eyetap {

enum class Shape { rect, circle, ribbon };

std::string_view to_string(Shape s);
Shape parse_shape(std::string_view s);

struct Target {
    int id = 0;
    Shape shape = Shape::rect;
    Point center;
    Point size;          // rect and ribbon: (width, height)
    double radius = 0.0; // circle
    std::optional<int> label;
    bool is_barrier = false;

    friend bool operator==(const Target&, const Target&) = default;
    /// Inclusive of the boundary.
    bool contains(Point p) const;
    double half_extent() const;
    bool fits(const ScreenSpec& screen) const;
};

// --- matrix ----------------------------------------------------------------

/// Labeled targets per difficulty level: 1 -> 4, 2 -> 6, ..., 5 -> 12.
int matrix_target_count(int level);

struct MatrixSpec {
    int cols = 11;
    int rows = 7;
    int level = 1;
    std::uint64_t seed = 1;
    ScreenSpec screen;

    friend bool operator==(const MatrixSpec&, const MatrixSpec&) = default;
    void validate() const;
    int target_count() const { return matrix_target_count(level); }
    /// Cells outside the outermost ring of columns and rows.
    int active_cell_count() const { return (cols - 2) * (rows - 2); }
};

struct MatrixLayout {
    MatrixSpec spec;
    std::vector<Target> cells;  // row-major, id == index
    std::vector<int> order;     // order[k] = cell id labeled k + 1

    std::optional<int> cell_at(Point p) const;
    const Target& labeled(int ordinal) const { return cells.at(static_cast<std::size_t>(order.at(ordinal - 1))); }
    bool is_active(int cell_id) const;
};

MatrixLayout gen_matrix_level(const MatrixSpec& spec);

struct MatrixOutcome {
    enum class Kind { advance, error, complete };
    Kind kind = Kind::advance;
    int cell = 0;
    int expected_ordinal = 1;
};

std::string_view to_string(MatrixOutcome::Kind k);

class MatrixJudge {
public:
    explicit MatrixJudge(const MatrixLayout& layout) : layout_(&layout) {}

    /// Throws InvalidState once the level is complete.
    MatrixOutcome judge(const SelectionEvent& sel);
    int current_ordinal() const { return next_; }
    bool complete() const { return next_ > static_cast<int>(layout_->order.size()); }
    int errors() const { return errors_; }

private:
    const MatrixLayout* layout_;
    int next_ = 1;
    int errors_ = 0;
};

// --- dart ------------------------------------------------------------------

struct DartSpec {
    std::array<double, 3> ring_radii{30.0, 60.0, 90.0};
    int trials = 5;
    Millis inter_trial_ms = 2000;
    std::uint64_t seed = 1;
    ScreenSpec screen;

    friend bool operator==(const DartSpec&, const DartSpec&) = default;
    void validate() const;
    double max_distance() const { return ring_radii[2]; }
};

/// Uniform in the central third of the screen, keeping the whole dart visible.
std::vector<Point> gen_dart_centers(const DartSpec& spec);

/// Euclidean distance, clamped at max_distance.
double dart_score(Point endpoint, Point center, double max_distance = 90.0);

// --- Fitts -----------------------------------------------------------------

enum class FittsKind { ribbon, circle };

std::string_view to_string(FittsKind k);
FittsKind parse_fitts_kind(std::string_view s);

struct FittsSpec {
    FittsKind kind = FittsKind::ribbon;
    std::vector<double> distances{256.0, 384.0, 512.0};
    std::vector<double> widths{96.0, 128.0};
    int trials_per_condition = 9;
    int circle_targets_per_ring = 11;
    /// When true a miss is counted and the trial continues until a hit.
    bool count_multiple_attempts = false;
    std::uint64_t seed = 1;
    ScreenSpec screen;

    friend bool operator==(const FittsSpec&, const FittsSpec&) = default;
    void validate() const;
};

struct FittsTrial {
    int trial_id = 0;
    int condition = 0;
    double distance = 0.0;
    double width = 0.0;
    Point start;
    Target target;
};

struct FittsCondition {
    int index = 0;
    double distance = 0.0;
    double width = 0.0;
    std::vector<Target> targets;  // every selectable target shown for this condition
    Target start_target;          // selected once, untimed, to begin the sequence
    std::vector<FittsTrial> trials;
};

/// Opposite-hopping visit order around a ring of n targets: (k * ceil(n / 2)) mod n.
int circle_hop(int k, int n);

/// Throws InvalidSpec when any geometry leaves the screen.
std::vector<FittsCondition> gen_fitts_sequence(const FittsSpec& spec);

struct TrialOutcome {
    int trial_id = 0;
    int condition = 0;
    double distance = 0.0;
    double width = 0.0;
    Point start;   // geometric start (previous target center)
    Point from;    // actual previous selection endpoint
    Point target;  // target center
    Point endpoint;
    Millis movement_time = 0;
    bool hit = false;
    int errors_in_trial = 0;

    friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

TrialOutcome fitts_judge(const FittsTrial& trial, const SelectionEvent& sel, Millis trial_start_t, Point from);

// --- sequencing --------------------------------------------------------------

using TaskSpec = std::variant<MatrixSpec, DartSpec, FittsSpec>;

std::string task_name(const TaskSpec& spec);
void validate(const TaskSpec& spec);

struct TaskShown {
    int block = 0;
    int step = 0;
    Target goal;
    friend bool operator==(const TaskShown&, const TaskShown&) = default;
};

struct JudgeOutcome {
    std::string kind;  // advance | error | complete | warmup | trial | miss | dart
    int block = 0;
    Millis sel_t = 0;
    Point endpoint;
    std::optional<int> cell;
    std::optional<int> ordinal;
    std::optional<TrialOutcome> trial;
    std::optional<double> distance;
    std::optional<Point> center;

    friend bool operator==(const JudgeOutcome&, const JudgeOutcome&) = default;
};

struct BlockComplete {
    int block = 0;
    Millis start_t = 0;
    Millis end_t = 0;
    int errors = 0;
    friend bool operator==(const BlockComplete&, const BlockComplete&) = default;
};

using TaskEvent = std::variant<TaskShown, JudgeOutcome, BlockComplete>;

/// Drives one protocol from SelectionEvents. Not thread-safe; owned by one event loop.
class TaskRunner {
public:
    virtual ~TaskRunner() = default;

    virtual std::vector<TaskEvent> start(Millis now) = 0;
    virtual std::vector<TaskEvent> on_selection(const SelectionEvent& sel, Millis now) = 0;
    /// Time-driven transitions; due when next_deadline() <= now.
    virtual std::vector<TaskEvent> tick(Millis) { return {}; }
    virtual std::optional<Millis> next_deadline() const { return std::nullopt; }

    virtual TaskView view() const = 0;
    /// Selectable target under p for the dwell technique.
    virtual std::optional<int> hit_test(Point p) const = 0;
    /// Everything currently drawn, for clients that render.
    virtual std::vector<Target> visible_targets() const = 0;
    virtual bool complete() const = 0;
    /// Start of the current block (level, dart trial or Fitts condition).
    virtual Millis block_start() const = 0;
};

std::unique_ptr<TaskRunner> make_task_runner(const TaskSpec& spec);

}  // namespace eyetap
