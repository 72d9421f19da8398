#pragma once

// Synthetic gaze/pointer sources: fixation jitter, eased saccades and a
// scripted participant that executes one target acquisition at a time.

#include "eyetap/common.hpp"
#include "eyetap/rng.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace eyetap {

struct GazeSample {
    Millis t = 0;
    double x = 0.0;
    double y = 0.0;
    bool valid = true;

    friend bool operator==(const GazeSample&, const GazeSample&) = default;
    Point pos() const { return {x, y}; }
};

/// How the simulated participant confirms a selection.
enum class Actuation { pulse, voice, dwell, click };

std::string_view to_string(Actuation a);
Actuation parse_actuation(std::string_view s);

struct ParticipantModel {
    double jitter_sigma_px = 12.0;
    /// Jitter SD scales by (1 + gain * x / screen_width); 0 means uniform.
    double jitter_right_gain = 0.0;
    Millis saccade_ms = 40;
    double sample_rate_hz = 90.0;
    Millis reaction_ms = 250;
    Millis settle_ms = 2800;
    Actuation actuation = Actuation::dwell;
    Millis pulse_latency_ms = 100;
    Millis pulse_duration_ms = 60;
    double pulse_dbfs = -20.0;
    Millis click_latency_ms = 100;
    /// Wait after an unanswered actuation (or dwell attempt) before trying again.
    Millis retry_ms = 1500;
    // Hand pointer: movement time base + per_bit * log2(D / W + 1), resting offset SD.
    double pointer_sigma_px = 2.0;
    Millis pointer_base_ms = 200;
    double pointer_ms_per_bit = 150.0;
    std::uint64_t seed = 1;

    friend bool operator==(const ParticipantModel&, const ParticipantModel&) = default;
    void validate() const;
};

double ease_in_out(double u);

/// floor(duration * rate / 1000) samples around center, t = t0 + floor(i * 1000 / rate).
std::vector<GazeSample> synth_fixation(Point center, double sigma, Millis duration, double rate_hz,
                                       std::uint64_t seed, Millis t0 = 0);

/// Smoothstep trajectory; the first sample is one step past `from`, the last is `to`.
std::vector<GazeSample> synth_saccade(Point from, Point to, Millis duration, double rate_hz, Millis t0 = 0);

/// What the participant can see of the task.
struct TaskView {
    std::optional<Point> goal;
    /// Smallest half-size of the goal target; drives pointer movement time.
    double goal_half_extent = 0.0;
    /// Same goal as the previous step and nothing happened: try again in place.
    bool retry = false;
};

struct ScheduledActuation {
    Millis t = 0;  // pulse onset, voice command start, or click time
    Actuation kind = Actuation::pulse;
    Millis duration_ms = 0;
    double level_dbfs = 0.0;
};

struct Schedule {
    std::vector<GazeSample> gaze;
    std::vector<ScheduledActuation> actuations;
    Millis movement_start = 0;
    Millis fixation_onset = 0;
    /// The plan covers (now, end]; past this the caller re-plans with retry.
    Millis end = 0;
};

/**
 * Simulated participant. Samples lie on a global grid
 * t_k = floor(k * 1000 / rate) so that re-planning never breaks strict
 * time ordering. Positions are clamped to the screen.
 */
class Agent {
public:
    Agent(ParticipantModel model, ScreenSpec screen);

    /// Plans reaction -> movement -> fixation (+ actuation). Samples start after `now`.
    Schedule step(const TaskView& view, Millis now);
    /// Keeps looking at the current fixation point over (now, until].
    std::vector<GazeSample> hold(Millis now, Millis until);
    /// The caller dropped the rest of the last schedule at `now`.
    void interrupt(Millis now);

    const ParticipantModel& model() const { return model_; }
    Point fixation_point() const { return fixation_; }

private:
    bool is_pointer() const { return model_.actuation == Actuation::click; }
    Millis grid_time(std::int64_t k) const;
    std::int64_t first_index_after(Millis t) const;
    double sigma_at(Point center) const;
    GazeSample resting_sample(Millis t, Point center);

    ParticipantModel model_;
    ScreenSpec screen_;
    Rng rng_;
    Point fixation_;
    Point pointer_offset_{};
    Point last_from_{};
    Millis last_movement_start_ = 0;
    Millis last_fixation_onset_ = 0;
};

}  // namespace eyetap
