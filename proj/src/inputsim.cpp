#include "eyetap/inputsim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace eyetap {

std::string_view to_string(Actuation a) {
    switch (a) {
        case Actuation::pulse: return "pulse";
        case Actuation::voice: return "voice";
        case Actuation::dwell: return "dwell";
        case Actuation::click: return "click";
    }
    return "?";
}

Actuation parse_actuation(std::string_view s) {
    if (s == "pulse") return Actuation::pulse;
    if (s == "voice") return Actuation::voice;
    if (s == "dwell") return Actuation::dwell;
    if (s == "click") return Actuation::click;
    throw InvalidInput("unknown actuation '" + std::string(s) + "'");
}

void ParticipantModel::validate() const {
    if (!(sample_rate_hz > 0.0) || sample_rate_hz > 1000.0)
        throw InvalidSpec("participant sample_rate_hz must be in (0, 1000]");
    if (jitter_sigma_px < 0.0 || pointer_sigma_px < 0.0) throw InvalidSpec("participant jitter must be >= 0");
    if (jitter_right_gain < 0.0) throw InvalidSpec("participant jitter_right_gain must be >= 0");
    if (saccade_ms < 0 || reaction_ms < 0 || settle_ms < 0 || pulse_latency_ms < 0 || click_latency_ms < 0 ||
        pointer_base_ms < 0 || pointer_ms_per_bit < 0.0)
        throw InvalidSpec("participant latencies must be >= 0");
    if (pulse_duration_ms <= 0) throw InvalidSpec("participant pulse_duration_ms must be positive");
    if (retry_ms <= 0) throw InvalidSpec("participant retry_ms must be positive");
}

double ease_in_out(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

std::vector<GazeSample> synth_fixation(Point center, double sigma, Millis duration, double rate_hz,
                                       std::uint64_t seed, Millis t0) {
    if (duration <= 0) throw InvalidInput("synth_fixation: duration must be positive");
    if (!(rate_hz > 0.0)) throw InvalidInput("synth_fixation: rate must be positive");
    Rng rng(seed);
    const auto count = static_cast<std::int64_t>(std::floor(static_cast<double>(duration) * rate_hz / 1000.0));
    std::vector<GazeSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        const Millis t = t0 + static_cast<Millis>(std::floor(static_cast<double>(i) * 1000.0 / rate_hz));
        const double dx = rng.normal();
        const double dy = rng.normal();
        out.push_back({t, center.x + sigma * dx, center.y + sigma * dy, true});
    }
    return out;
}

std::vector<GazeSample> synth_saccade(Point from, Point to, Millis duration, double rate_hz, Millis t0) {
    if (duration <= 0) throw InvalidInput("synth_saccade: duration must be positive");
    if (!(rate_hz > 0.0)) throw InvalidInput("synth_saccade: rate must be positive");
    const auto n = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::floor(static_cast<double>(duration) * rate_hz / 1000.0)));
    std::vector<GazeSample> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 1; i <= n; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(n);
        const Point p = i == n ? to : from + (to - from) * ease_in_out(u);
        const Millis t = t0 + static_cast<Millis>(std::llround(u * static_cast<double>(duration)));
        out.push_back({t, p.x, p.y, true});
    }
    return out;
}

// ---------------------------------------------------------------------------

Agent::Agent(ParticipantModel model, ScreenSpec screen)
    : model_(model), screen_(screen), rng_(model.seed), fixation_(screen.center()) {
    model_.validate();
    screen_.validate();
}

Millis Agent::grid_time(std::int64_t k) const {
    return static_cast<Millis>(std::floor(static_cast<double>(k) * 1000.0 / model_.sample_rate_hz));
}

std::int64_t Agent::first_index_after(Millis t) const {
    auto k = static_cast<std::int64_t>(std::floor(static_cast<double>(t) * model_.sample_rate_hz / 1000.0));
    k = std::max<std::int64_t>(k - 1, 0);
    while (grid_time(k) <= t) ++k;
    return k;
}

double Agent::sigma_at(Point center) const {
    if (is_pointer()) return 0.0;
    return model_.jitter_sigma_px * (1.0 + model_.jitter_right_gain * center.x / screen_.width);
}

GazeSample Agent::resting_sample(Millis t, Point center) {
    if (is_pointer()) {
        const Point p = screen_.clamp(center);
        return {t, p.x, p.y, true};
    }
    const double sigma = sigma_at(center);
    const double dx = rng_.normal();
    const double dy = rng_.normal();
    const Point p = screen_.clamp({center.x + sigma * dx, center.y + sigma * dy});
    return {t, p.x, p.y, true};
}

std::vector<GazeSample> Agent::hold(Millis now, Millis until) {
    std::vector<GazeSample> out;
    for (auto k = first_index_after(now); grid_time(k) <= until; ++k)
        out.push_back(resting_sample(grid_time(k), fixation_));
    return out;
}

Schedule Agent::step(const TaskView& view, Millis now) {
    if (!view.goal) throw InvalidState("agent_step: task view has no current target");

    Schedule s;
    const Point from = fixation_;
    Point to = *view.goal;
    if (is_pointer() && !view.retry) {
        pointer_offset_ = {model_.pointer_sigma_px * rng_.normal(), model_.pointer_sigma_px * rng_.normal()};
    }
    if (is_pointer()) to = to + pointer_offset_;
    to = screen_.clamp(to);

    Millis movement_ms = 0;
    if (!view.retry) {
        if (is_pointer()) {
            const double width = std::max(2.0 * view.goal_half_extent, 1.0);
            const double id = std::log2(distance(from, to) / width + 1.0);
            movement_ms = model_.pointer_base_ms + static_cast<Millis>(std::llround(model_.pointer_ms_per_bit * id));
        } else {
            movement_ms = model_.saccade_ms;
        }
    }
    s.movement_start = now + (view.retry ? 0 : model_.reaction_ms);
    s.fixation_onset = s.movement_start + movement_ms;

    switch (model_.actuation) {
        case Actuation::pulse:
            s.actuations.push_back({s.fixation_onset + model_.settle_ms + model_.pulse_latency_ms, Actuation::pulse,
                                    model_.pulse_duration_ms, model_.pulse_dbfs});
            s.end = s.actuations.back().t + model_.pulse_duration_ms + model_.retry_ms;
            break;
        case Actuation::voice:
            s.actuations.push_back({s.fixation_onset + model_.settle_ms, Actuation::voice, 0, 0.0});
            s.end = s.actuations.back().t + model_.retry_ms;
            break;
        case Actuation::click:
            s.actuations.push_back({s.fixation_onset + model_.click_latency_ms, Actuation::click, 0, 0.0});
            s.end = s.actuations.back().t + model_.retry_ms;
            break;
        case Actuation::dwell:
            s.end = s.fixation_onset + model_.retry_ms;
            break;
    }

    for (auto k = first_index_after(now); grid_time(k) <= s.end; ++k) {
        const Millis t = grid_time(k);
        if (t < s.movement_start) {
            s.gaze.push_back(resting_sample(t, from));
        } else if (t < s.fixation_onset) {
            const double u = static_cast<double>(t - s.movement_start) / static_cast<double>(movement_ms);
            const Point p = screen_.clamp(from + (to - from) * ease_in_out(u));
            s.gaze.push_back({t, p.x, p.y, true});
        } else {
            s.gaze.push_back(resting_sample(t, to));
        }
    }
    fixation_ = to;
    last_from_ = from;
    last_movement_start_ = s.movement_start;
    last_fixation_onset_ = s.fixation_onset;
    return s;
}

void Agent::interrupt(Millis now) {
    if (now >= last_fixation_onset_) return;
    if (now < last_movement_start_) {
        fixation_ = last_from_;
        return;
    }
    const double u = static_cast<double>(now - last_movement_start_) /
                     static_cast<double>(last_fixation_onset_ - last_movement_start_);
    fixation_ = screen_.clamp(last_from_ + (fixation_ - last_from_) * ease_in_out(u));
}

}  // namespace eyetap
