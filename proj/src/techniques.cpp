#include "eyetap/techniques.hpp"

#include <cmath>
#include <string>

namespace eyetap {

std::string_view to_string(Technique t) {
    switch (t) {
        case Technique::eyetap: return "eyetap";
        case Technique::dwell: return "dwell";
        case Technique::voice: return "voice";
        case Technique::pointer: return "pointer";
    }
    return "?";
}

Technique parse_technique(std::string_view s) {
    if (s == "eyetap") return Technique::eyetap;
    if (s == "dwell") return Technique::dwell;
    if (s == "voice") return Technique::voice;
    if (s == "pointer") return Technique::pointer;
    throw InvalidInput("unknown technique '" + std::string(s) + "'");
}

void GazeHistory::push(const GazeSample& s) {
    if (!s.valid) return;
    if (!samples_.empty() && s.t <= samples_.back().t) return;
    samples_.push_back(s);
    while (!samples_.empty() && samples_.front().t < s.t - window_ms_) samples_.pop_front();
}

std::optional<GazeSample> GazeHistory::nearest(Millis t) const {
    std::optional<GazeSample> best;
    Millis best_gap = 0;
    for (const auto& s : samples_) {
        const Millis gap = s.t > t ? s.t - t : t - s.t;
        if (!best || gap < best_gap) {
            best = s;
            best_gap = gap;
        }
    }
    return best;
}

std::optional<GazeSample> GazeHistory::latest() const {
    if (samples_.empty()) return std::nullopt;
    return samples_.back();
}

std::optional<SelectionEvent> eyetap_step(const GazeHistory& gaze, const PulseEvent& pulse) {
    auto g = gaze.nearest(pulse.t_onset);
    if (!g) return std::nullopt;
    return SelectionEvent{pulse.t_onset, g->x, g->y, Technique::eyetap, pulse.t_onset};
}

DwellResult dwell_step(DwellState state, const GazeSample& sample, const HitTest& targets) {
    if (state.last_t && sample.t <= *state.last_t) return {state, std::nullopt};
    state.last_t = sample.t;

    const std::optional<int> hit = sample.valid ? targets(sample.pos()) : std::nullopt;
    if (!hit) {
        state.phase = DwellState::Phase::idle;
        state.target_id.reset();
        return {state, std::nullopt};
    }
    if (state.phase == DwellState::Phase::idle || state.target_id != hit) {
        state.phase = DwellState::Phase::accumulating;
        state.target_id = hit;
        state.t_enter = sample.t;
    }
    if (sample.t - state.t_enter >= state.threshold_ms) {
        SelectionEvent sel{sample.t, sample.x, sample.y, Technique::dwell, sample.t};
        state.phase = DwellState::Phase::idle;
        state.target_id.reset();
        return {state, sel};
    }
    return {state, std::nullopt};
}

std::optional<Millis> dwell_remaining(const DwellState& state, Millis now) {
    if (state.phase != DwellState::Phase::accumulating) return std::nullopt;
    return std::max<Millis>(0, state.threshold_ms - (now - state.t_enter));
}

void VoiceModel::validate() const {
    if (!(median_ms > 0.0)) throw InvalidSpec("voice median latency must be positive");
    if (dispersion < 0.0) throw InvalidSpec("voice dispersion must be >= 0");
    if (!(miss_rate >= 0.0 && miss_rate <= 1.0)) throw InvalidSpec("voice miss_rate must be in [0, 1]");
}

std::optional<Millis> voice_step(Millis command_t, const VoiceModel& model, Rng& rng) {
    if (command_t < 0) throw InvalidInput("voice_step: command time must be >= 0");
    // Both draws are always taken so the stream position does not depend on the outcome.
    const bool miss = rng.uniform() < model.miss_rate;
    const double latency = rng.lognormal(model.median_ms, model.dispersion);
    if (miss) return std::nullopt;
    return command_t + static_cast<Millis>(std::llround(latency));
}

VoiceRecognizer::VoiceRecognizer(VoiceModel model) : model_(model), rng_(model.seed) { model_.validate(); }

std::optional<SelectionEvent> voice_select(const GazeHistory& gaze, Millis recognized_t) {
    auto g = gaze.nearest(recognized_t);
    if (!g) return std::nullopt;
    return SelectionEvent{recognized_t, g->x, g->y, Technique::voice, recognized_t};
}

PointerResult pointer_step(const Click& click, const ScreenSpec& screen) {
    const Point p = screen.clamp({click.x, click.y});
    const bool clamped = p.x != click.x || p.y != click.y;
    return {SelectionEvent{click.t, p.x, p.y, Technique::pointer, click.t}, clamped};
}

}  // namespace eyetap
