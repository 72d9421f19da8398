#pragma once

// The four selection techniques as small deterministic state machines.

#include "eyetap/common.hpp"
#include "eyetap/inputsim.hpp"
#include "eyetap/rng.hpp"
#include "eyetap/signal.hpp"

#include <deque>
#include <functional>
#include <optional>
#include <string_view>

namespace eyetap {

enum class Technique { eyetap, dwell, voice, pointer };

std::string_view to_string(Technique t);
Technique parse_technique(std::string_view s);

struct SelectionEvent {
    Millis t = 0;
    double x = 0.0;
    double y = 0.0;
    Technique technique = Technique::eyetap;
    Millis trigger_t = 0;

    friend bool operator==(const SelectionEvent&, const SelectionEvent&) = default;
    Point pos() const { return {x, y}; }
};

/// Recent valid gaze samples for nearest-in-time lookups.
class GazeHistory {
public:
    explicit GazeHistory(Millis window_ms = 5000) : window_ms_(window_ms) {}

    void push(const GazeSample& s);
    /// Nearest sample to t; ties go to the earlier sample.
    std::optional<GazeSample> nearest(Millis t) const;
    std::optional<GazeSample> latest() const;
    bool empty() const { return samples_.empty(); }

private:
    Millis window_ms_;
    std::deque<GazeSample> samples_;
};

/// Selection at the gaze sample nearest to the pulse onset; nullopt when no gaze was seen yet.
std::optional<SelectionEvent> eyetap_step(const GazeHistory& gaze, const PulseEvent& pulse);

/// Maps a screen point to the selectable target under it (inclusive edges).
using HitTest = std::function<std::optional<int>(Point)>;

struct DwellState {
    enum class Phase { idle, accumulating };

    Phase phase = Phase::idle;
    std::optional<int> target_id;
    Millis t_enter = 0;
    Millis threshold_ms = 500;
    std::optional<Millis> last_t;

    friend bool operator==(const DwellState&, const DwellState&) = default;
};

struct DwellResult {
    DwellState state;
    std::optional<SelectionEvent> selection;
};

/**
 * Entering a target starts accumulation; leaving it, entering another target
 * or an invalid sample resets. Fires at the first sample with
 * t - t_enter >= threshold_ms, at that sample's position, then returns to
 * idle. Samples that do not advance time are ignored.
 */
DwellResult dwell_step(DwellState state, const GazeSample& sample, const HitTest& targets);

/// Remaining dwell time at `now`, or nullopt when idle.
std::optional<Millis> dwell_remaining(const DwellState& state, Millis now);

struct VoiceModel {
    double median_ms = 1200.0;
    double dispersion = 0.25;
    double miss_rate = 0.05;
    std::uint64_t seed = 1;

    friend bool operator==(const VoiceModel&, const VoiceModel&) = default;
    void validate() const;
};

/// Recognition time for a command spoken at command_t, or nullopt on a miss.
std::optional<Millis> voice_step(Millis command_t, const VoiceModel& model, Rng& rng);

class VoiceRecognizer {
public:
    explicit VoiceRecognizer(VoiceModel model);
    std::optional<Millis> recognize(Millis command_t) { return voice_step(command_t, model_, rng_); }

private:
    VoiceModel model_;
    Rng rng_;
};

/// Voice recognition triggers a selection at the gaze sample nearest to recognition time.
std::optional<SelectionEvent> voice_select(const GazeHistory& gaze, Millis recognized_t);

struct Click {
    Millis t = 0;
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Click&, const Click&) = default;
};

struct PointerResult {
    SelectionEvent selection;
    bool clamped = false;
};

PointerResult pointer_step(const Click& click, const ScreenSpec& screen);

}  // namespace eyetap
